"""Synthetic two-group experiments with geometric churn.

Every recruited user is active on day 1 and stays active each further day with
probability ``1 - churn_rate``.  An active user earns ``r * exp(e)`` on a day,
``e ~ N(-sd**2 / 2, sd**2)``, so a day's expected revenue per active user is
exactly ``r``.  Expected cumulative revenue per recruited user through day D is
therefore ``sum_{t=1..D} r (1 - churn)^(t-1)``, which defines the true winner.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baseline import UserCumulative
from .bootstrap import Decision
from .errors import ScenarioError
from .model import DailySeries

GROUPS = ("control", "test")
GROUP_FIELDS = ("n_users", "daily_revenue_per_active", "churn_rate", "revenue_noise_sd")
SHARED_FIELDS = ("horizon_days", "seed", "evaluation_day", "truth_day")


@dataclass(frozen=True)
class GroupParams:
    n_users: int
    daily_revenue_per_active: float
    churn_rate: float
    revenue_noise_sd: float = 0.0

    def __post_init__(self):
        if self.n_users < 1:
            raise ScenarioError(f"n_users must be >= 1, got {self.n_users}")
        if not 0 <= self.churn_rate < 1:
            raise ScenarioError(f"churn_rate must be in [0, 1), got {self.churn_rate}")
        if not self.daily_revenue_per_active > 0:
            raise ScenarioError("daily_revenue_per_active must be positive")
        if self.revenue_noise_sd < 0:
            raise ScenarioError("revenue_noise_sd must be non-negative")

    def expected_daily(self, day: int) -> float:
        """Expected revenue per recruited user on ``day``."""
        return self.daily_revenue_per_active * (1.0 - self.churn_rate) ** (day - 1)

    def expected_cumulative(self, through_day: int) -> float:
        return sum(self.expected_daily(t) for t in range(1, through_day + 1))


@dataclass(frozen=True)
class SimScenario:
    control: GroupParams
    test: GroupParams
    horizon_days: int = 90
    seed: int = 0
    evaluation_day: int = 14
    truth_day: int = 60

    def __post_init__(self):
        if not 1 <= self.evaluation_day < self.truth_day <= self.horizon_days:
            raise ScenarioError(
                "need 1 <= evaluation_day < truth_day <= horizon_days, got "
                f"{self.evaluation_day}, {self.truth_day}, {self.horizon_days}"
            )

    def group(self, name: str) -> GroupParams:
        return getattr(self, name)

    def true_winner(self, through_day: int | None = None) -> Decision:
        """Group with the larger expected cumulative value; ties go to control."""
        day = self.truth_day if through_day is None else through_day
        if self.test.expected_cumulative(day) > self.control.expected_cumulative(day):
            return Decision.TEST
        return Decision.CONTROL

    def with_seed(self, seed: int) -> "SimScenario":
        return dataclasses.replace(self, seed=seed)

    def to_dict(self) -> dict:
        """Flat key-value form: ``<group>_<field>`` plus the shared fields."""
        out = {}
        for g in GROUPS:
            params = self.group(g)
            for f in GROUP_FIELDS:
                out[f"{g}_{f}"] = getattr(params, f)
        for f in SHARED_FIELDS:
            out[f] = getattr(self, f)
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "SimScenario":
        known = {f"{g}_{f}" for g in GROUPS for f in GROUP_FIELDS} | set(SHARED_FIELDS)
        unknown = set(doc) - known
        if unknown:
            raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
        try:
            groups = {
                g: GroupParams(
                    n_users=int(doc[f"{g}_n_users"]),
                    daily_revenue_per_active=float(doc[f"{g}_daily_revenue_per_active"]),
                    churn_rate=float(doc[f"{g}_churn_rate"]),
                    revenue_noise_sd=float(doc.get(f"{g}_revenue_noise_sd", 0.0)),
                )
                for g in GROUPS
            }
        except KeyError as exc:
            raise ScenarioError(f"missing scenario key {exc.args[0]!r}") from None
        shared = {f: int(doc[f]) for f in SHARED_FIELDS if f in doc}
        return cls(groups["control"], groups["test"], **shared)


def load_scenario(path) -> SimScenario:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: expected a JSON object")
    return SimScenario.from_dict(doc)


def save_scenario(scenario: SimScenario, path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class SimulatedExperiment:
    scenario: SimScenario
    daily: dict = field(repr=False)
    evaluation: dict = field(repr=False)
    truth: dict = field(repr=False)
    true_winner: Decision = Decision.CONTROL


def _simulate_group(params: GroupParams, scenario: SimScenario, label: str, index: int):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([scenario.seed, index])))
    n = params.n_users
    horizon = scenario.horizon_days
    if params.churn_rate > 0:
        lifetime = rng.geometric(params.churn_rate, size=n)
    else:
        lifetime = np.full(n, horizon, dtype=np.int64)
    sd = params.revenue_noise_sd

    cumulative = np.zeros(n)
    snapshots = {}
    days, averages = [], []
    for t in range(1, horizon + 1):
        active = np.flatnonzero(lifetime >= t)
        if active.size:
            earned = np.full(active.size, params.daily_revenue_per_active)
            if sd > 0:
                earned *= np.exp(rng.normal(-0.5 * sd * sd, sd, size=active.size))
            cumulative[active] += earned
            days.append(t)
            averages.append(float(np.sum(earned)) / n)
        if t in (scenario.evaluation_day, scenario.truth_day):
            snapshots[t] = cumulative.copy()

    series = DailySeries(label, tuple(days), tuple(averages)) if len(days) >= 3 else None
    return series, snapshots


def simulate(scenario: SimScenario) -> SimulatedExperiment:
    """Draw one experiment.  Deterministic in ``scenario`` (including its seed).

    Days after every user in a group has churned are dropped from that group's
    daily series.
    """
    daily, evaluation, truth = {}, {}, {}
    for index, g in enumerate(GROUPS):
        series, snaps = _simulate_group(scenario.group(g), scenario, g, index)
        daily[g] = series
        if scenario.group(g).n_users >= 2:
            evaluation[g] = UserCumulative(g, snaps[scenario.evaluation_day])
            truth[g] = UserCumulative(g, snaps[scenario.truth_day])
    return SimulatedExperiment(scenario, daily, evaluation, truth, scenario.true_winner())


def crossover_scenario(n_users: int = 100_000, seed: int = 0) -> SimScenario:
    """Preset where the test group leads early and loses later.

    Higher revenue per active user but faster churn for the test group.  The
    expected per-user cumulative gap is about +2.2% at day 14, +0.9% at day 28,
    -1.0% at day 60 and -2.0% at day 90.
    """
    return SimScenario(
        control=GroupParams(n_users, 0.0225, 0.035, 0.5),
        test=GroupParams(n_users, 0.02333, 0.03733, 0.5),
        horizon_days=90,
        seed=seed,
        evaluation_day=14,
        truth_day=60,
    )


def null_scenario(n_users: int = 2_000, seed: int = 0) -> SimScenario:
    """Both groups drawn from the same process."""
    params = GroupParams(n_users, 0.02, 0.03, 0.5)
    return SimScenario(params, params, horizon_days=60, seed=seed, evaluation_day=14, truth_day=60)


def crossover_day(scenario: SimScenario, max_day: int | None = None):
    """Days on which the leader in expected cumulative value changes."""
    max_day = max_day or scenario.horizon_days
    gaps = [
        scenario.test.expected_cumulative(t) - scenario.control.expected_cumulative(t)
        for t in range(1, max_day + 1)
    ]
    return [t + 1 for t in range(1, max_day) if np.sign(gaps[t]) != np.sign(gaps[t - 1])]
