"""Two-group evaluation reports and the retrospective accuracy harness."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .baseline import decide_winner_standard, welch_t_test
from .bootstrap import (
    BootstrapConfig,
    Decision,
    bootstrap_ltv,
    bootstrap_paths,
    difference_test,
)
from .errors import DegenerateDesign, LtvBootError
from .model import DailySeries
from .simulator import SimScenario, simulate

QUANTILE_LEVELS = (0.025, 0.25, 0.5, 0.75, 0.975)
QUANTILE_KEYS = ("p2.5", "p25", "p50", "p75", "p97.5")
BAND_LEVELS = (0.5, 0.05, 0.95)


@dataclass(frozen=True)
class GroupSummary:
    label: str
    n_observations: int
    last_observed_day: int
    beta0: float
    beta1: float
    weekday_coefs: Optional[list]
    sigma2: float
    ltv_point_estimate: float
    ltv_quantiles: dict
    extrapolation_band: dict = field(repr=False)


@dataclass(frozen=True)
class EvaluationReport:
    control: GroupSummary
    test: GroupSummary
    p_control_minus_test_positive: float
    p_test_minus_control_positive: float
    alpha: float
    decision: Decision
    seed: int
    iterations: int
    horizon: int
    include_observed_pseudo: bool = True
    log_offset: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "config": {
                "seed": self.seed,
                "iterations": self.iterations,
                "horizon": self.horizon,
                "include_observed_pseudo": self.include_observed_pseudo,
                "log_offset": self.log_offset,
            },
            "groups": {"control": asdict(self.control), "test": asdict(self.test)},
            "p_control_minus_test_positive": self.p_control_minus_test_positive,
            "p_test_minus_control_positive": self.p_test_minus_control_positive,
            "alpha": self.alpha,
            "decision": self.decision.value,
        }

    def bands(self) -> dict:
        return {
            self.control.label: self.control.extrapolation_band,
            self.test.label: self.test.extrapolation_band,
        }


def _summarize(series: DailySeries, config: BootstrapConfig, workers: int):
    fit, dist, paths = bootstrap_paths(series, config, workers)
    median, p05, p95 = np.quantile(paths, BAND_LEVELS, axis=0)
    band = {
        "day": list(range(1, paths.shape[1] + 1)),
        "median": median.tolist(),
        "p05": p05.tolist(),
        "p95": p95.tolist(),
    }
    summary = GroupSummary(
        label=series.group_label,
        n_observations=series.n,
        last_observed_day=series.days[-1],
        beta0=fit.beta0,
        beta1=fit.beta1,
        weekday_coefs=None if fit.weekday_coefs is None else list(fit.weekday_coefs),
        sigma2=fit.sigma2,
        ltv_point_estimate=dist.point_estimate,
        ltv_quantiles=dict(zip(QUANTILE_KEYS, dist.quantiles(QUANTILE_LEVELS).tolist())),
        extrapolation_band=band,
    )
    return summary, dist


def evaluate(
    control: DailySeries,
    test: DailySeries,
    config: BootstrapConfig,
    alpha: float = 0.05,
    workers: int = 1,
    log_offset: Optional[float] = None,
) -> EvaluationReport:
    """Run the bootstrap LTV comparison on two observed groups."""
    control_summary, control_dist = _summarize(control, config, workers)
    test_summary, test_dist = _summarize(test, config, workers)
    verdict = difference_test(control_dist, test_dist, alpha)
    return EvaluationReport(
        control=control_summary,
        test=test_summary,
        p_control_minus_test_positive=verdict.p_control_minus_test_positive,
        p_test_minus_control_positive=verdict.p_test_minus_control_positive,
        alpha=alpha,
        decision=verdict.decision,
        seed=config.seed,
        iterations=config.iterations,
        horizon=config.horizon.horizon,
        include_observed_pseudo=config.horizon.include_observed_pseudo,
        log_offset=log_offset,
    )


@dataclass(frozen=True)
class MethodScore:
    success: int
    failure: int

    @property
    def accuracy(self) -> float:
        total = self.success + self.failure
        return self.success / total if total else float("nan")

    def to_dict(self) -> dict:
        return {"success": self.success, "failure": self.failure, "accuracy": self.accuracy}


@dataclass(frozen=True)
class ExperimentRecord:
    index: int
    seed: int
    true_winner: str
    proposed_decision: str
    proposed_p_test_better: float
    standard_decision: str
    welch_t: float
    welch_p: float

    @property
    def proposed_correct(self) -> bool:
        return self.proposed_decision == self.true_winner

    @property
    def standard_correct(self) -> bool:
        return self.standard_decision == self.true_winner


@dataclass(frozen=True)
class RetrospectiveSummary:
    n_experiments: int
    proposed: MethodScore
    standard: MethodScore
    records: tuple = field(repr=False, default=())

    def to_dict(self) -> dict:
        return {
            "n_experiments": self.n_experiments,
            "success_definition": (
                "decision at evaluation_day equals the group with the higher expected "
                "cumulative value at truth_day"
            ),
            "methods": {
                "proposed": self.proposed.to_dict(),
                "standard": self.standard.to_dict(),
            },
        }


def experiment_seed(master_seed: int, index: int) -> int:
    """Seed of replicate ``index``; a pure function of the master seed."""
    ss = np.random.SeedSequence([master_seed & ((1 << 64) - 1), index])
    return int(ss.generate_state(1, np.uint64)[0])


def run_experiment(
    scenario: SimScenario,
    index: int,
    seed: int,
    iterations: int = 2000,
    horizon: int = 365,
    alpha: float = 0.05,
) -> ExperimentRecord:
    """Simulate one replicate and judge it at the evaluation day with both methods."""
    scenario = scenario.with_seed(seed)
    experiment = simulate(scenario)
    day = scenario.evaluation_day

    dists = {}
    for g in ("control", "test"):
        series = experiment.daily[g]
        if series is None:
            raise DegenerateDesign(f"group {g} churned out completely")
        config = BootstrapConfig(iterations, seed, horizon)
        dists[g] = bootstrap_ltv(series.truncate(day), config)
    verdict = difference_test(dists["control"], dists["test"], alpha)

    welch = welch_t_test(experiment.evaluation["control"], experiment.evaluation["test"])
    return ExperimentRecord(
        index=index,
        seed=seed,
        true_winner=experiment.true_winner.value,
        proposed_decision=verdict.decision.value,
        proposed_p_test_better=verdict.p_test_minus_control_positive,
        standard_decision=decide_winner_standard(welch.p_one_sided, alpha).value,
        welch_t=welch.t,
        welch_p=welch.p_one_sided,
    )


def run_retrospective(
    scenario: SimScenario,
    n_experiments: int,
    master_seed: int,
    iterations: int = 2000,
    horizon: int = 365,
    alpha: float = 0.05,
    workers: int = 1,
) -> RetrospectiveSummary:
    """Replay ``n_experiments`` simulated experiments and tabulate both methods' accuracy."""
    if n_experiments < 1:
        raise ValueError("n_experiments must be >= 1")

    def one(i):
        seed = experiment_seed(master_seed, i)
        try:
            return run_experiment(scenario, i, seed, iterations, horizon, alpha)
        except LtvBootError as exc:
            raise type(exc)(f"experiment {i} (seed {seed}): {exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = tuple(pool.map(one, range(n_experiments)))
    else:
        records = tuple(one(i) for i in range(n_experiments))

    proposed_ok = sum(r.proposed_correct for r in records)
    standard_ok = sum(r.standard_correct for r in records)
    return RetrospectiveSummary(
        n_experiments=n_experiments,
        proposed=MethodScore(proposed_ok, n_experiments - proposed_ok),
        standard=MethodScore(standard_ok, n_experiments - standard_ok),
        records=records,
    )
