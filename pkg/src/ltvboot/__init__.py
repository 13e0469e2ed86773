"""Early detection of lifetime-value winners in A/B tests.

Each group's daily response curve is fitted with a log-log regression, the
lifetime value is extrapolated under a residual bootstrap, and the two
bootstrap distributions are compared.
"""

__version__ = "0.1.0"

from .baseline import UserCumulative, WelchResult, decide_winner_standard, welch_t_test
from .bootstrap import (
    BootstrapConfig,
    Decision,
    DifferenceVerdict,
    LtvDistribution,
    bootstrap_ltv,
    compare_groups,
    decide_winner,
    difference_test,
    resample_pseudo_series,
)
from .errors import *  # noqa: F401,F403
from .model import (
    DailySeries,
    ExtrapolationConfig,
    LogLogFit,
    extrapolate_ltv,
    fit_loglog,
    predict_log,
)
from .simulator import (
    GroupParams,
    SimScenario,
    SimulatedExperiment,
    crossover_scenario,
    null_scenario,
    simulate,
)
