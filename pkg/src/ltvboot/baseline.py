"""Short-term comparison: one-sided Welch t-test on per-user cumulative response."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats

from .bootstrap import Decision
from .errors import InvalidSeries, ZeroVariance


@dataclass(frozen=True)
class UserCumulative:
    """Per-user cumulative response of one group through some evaluation day."""

    group_label: str
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or len(values) < 2:
            raise InvalidSeries(f"{self.group_label}: need at least 2 users")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_users(self) -> int:
        return len(self.values)


class WelchResult(NamedTuple):
    t: float
    df: float
    p_one_sided: float


def welch_t_test(control: UserCumulative, test: UserCumulative) -> WelchResult:
    """Welch's unequal-variance t-test of H1: mean(test) > mean(control).

    The p-value is the upper tail of Student's t at the Welch-Satterthwaite
    degrees of freedom, evaluated through the regularized incomplete beta
    function (``scipy.stats.t.sf``).
    """
    x, y = control.values, test.values
    nx, ny = len(x), len(y)
    vx = x.var(ddof=1) / nx
    vy = y.var(ddof=1) / ny
    se2 = vx + vy
    if se2 <= 0:
        raise ZeroVariance("both groups are constant; no t statistic exists")
    t = (y.mean() - x.mean()) / math.sqrt(se2)
    df = se2**2 / (vx**2 / (nx - 1) + vy**2 / (ny - 1))
    return WelchResult(float(t), float(df), float(stats.t.sf(t, df)))


def decide_winner_standard(p_one_sided: float, alpha: float) -> Decision:
    """Test iff ``p <= alpha`` (the boundary counts as significant)."""
    return Decision.TEST if p_one_sided <= alpha else Decision.CONTROL
