"""Residual bootstrap of lifetime value and the two-group bootstrap test.

Random numbers come from numpy's Philox4x64-10, a counter-based generator.
For group ``label`` under master ``seed`` the 128-bit Philox key is
``SeedSequence([seed, label_hash(label)]).generate_state(2, uint64)`` and
bootstrap iteration ``j`` uses the stream starting at counter ``[0, j, 0, 0]``.
Iteration ``j`` draws ``n`` uniforms ``u_i = (raw_i >> 11) * 2**-53`` from that
stream and resamples residual ``floor(u_i * n)``.  Because each iteration owns
its stream, iterations can run in any order or in parallel.
"""

from __future__ import annotations

import enum
import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import numpy as np

from .errors import DegenerateDesign, DegenerateResample, LengthMismatch
from .model import (
    DailySeries,
    ExtrapolationConfig,
    LogLogFit,
    daily_paths,
    design_matrix,
    extrapolate_ltv,
    fit_loglog,
    horizon_design,
    projection,
    solve_rows,
)

_MASK64 = (1 << 64) - 1
# Differences smaller than this fraction of the compared values are ties.
TIE_RTOL = 1e-12


class Decision(str, enum.Enum):
    CONTROL = "control"
    TEST = "test"


def label_hash(label: str) -> int:
    """Stable 64-bit hash of a group label (BLAKE2b, little-endian)."""
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def philox_key(seed: int, label: str) -> np.ndarray:
    ss = np.random.SeedSequence([seed & _MASK64, label_hash(label)])
    return ss.generate_state(2, np.uint64)


def iteration_stream(key: np.ndarray, j: int) -> np.random.Generator:
    """Random stream owned by bootstrap iteration ``j``."""
    return np.random.Generator(np.random.Philox(key=key, counter=[0, j, 0, 0]))


@dataclass(frozen=True)
class BootstrapConfig:
    iterations: int = 2000
    seed: int = 0
    horizon: ExtrapolationConfig = field(default_factory=ExtrapolationConfig)

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if isinstance(self.horizon, int):
            object.__setattr__(self, "horizon", ExtrapolationConfig(self.horizon))


@dataclass(frozen=True)
class LtvDistribution:
    group_label: str
    samples: np.ndarray
    point_estimate: float

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def iterations(self) -> int:
        return len(self.samples)

    def quantiles(self, probs=(0.025, 0.25, 0.5, 0.75, 0.975)) -> np.ndarray:
        return np.quantile(self.samples, probs)


@dataclass(frozen=True)
class DifferenceVerdict:
    """Paired bootstrap differences ``control_j - test_j`` and what they imply."""

    diffs: np.ndarray
    p_control_minus_test_positive: float
    p_test_minus_control_positive: float
    alpha: float
    decision: Decision


def resample_pseudo_series(
    fit: LogLogFit, series: DailySeries, rng: np.random.Generator
) -> DailySeries:
    """One bootstrap pseudo-series: ``exp(fitted_log_i + e*_i)`` with ``e*`` drawn with replacement."""
    resid = np.asarray(fit.residuals)
    n = len(resid)
    idx = (rng.random(n) * n).astype(np.intp)
    values = np.exp(np.asarray(fit.fitted_log) + resid[idx])
    return series.with_values(values)


def _draw_indices(key, n, start, stop) -> np.ndarray:
    idx = np.empty((stop - start, n), dtype=np.intp)
    for row, j in enumerate(range(start, stop)):
        idx[row] = (iteration_stream(key, j).random(n) * n).astype(np.intp)
    return idx


def _run_chunk(fit, proj, hdesign, key, config, start, stop, keep_paths):
    resid = np.asarray(fit.residuals)
    fitted = np.asarray(fit.fitted_log)
    idx = _draw_indices(key, fit.n, start, stop)
    log_pseudo = fitted[None, :] + resid[idx]
    coefs = solve_rows(proj, log_pseudo)
    if not np.all(np.isfinite(coefs)):
        raise DegenerateResample(f"{fit.n}-point refit produced non-finite coefficients")
    pseudo = np.exp(log_pseudo)
    paths = daily_paths(fit, coefs, pseudo, config.horizon, design=hdesign)
    ltv = paths.sum(axis=1)
    return ltv, (paths if keep_paths else None)


def _bootstrap(series: DailySeries, config: BootstrapConfig, workers: int, keep_paths: bool):
    fit = fit_loglog(series)
    # Pseudo-series share the original days, so the design (and its projection)
    # is fixed across iterations.
    try:
        proj = projection(design_matrix(series.days, series.weekday))
    except DegenerateDesign as exc:  # pragma: no cover - fit_loglog already succeeded
        raise DegenerateResample(str(exc)) from exc
    hdesign = horizon_design(fit, config.horizon.horizon)
    key = philox_key(config.seed, series.group_label)

    B = config.iterations
    workers = max(1, min(int(workers), B))
    bounds = np.linspace(0, B, workers + 1).astype(int)
    chunks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    def run(chunk):
        return _run_chunk(fit, proj, hdesign, key, config, *chunk, keep_paths)

    if workers == 1:
        results = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, chunks))

    samples = np.concatenate([r[0] for r in results])
    paths = np.concatenate([r[1] for r in results]) if keep_paths else None
    dist = LtvDistribution(
        series.group_label, samples, extrapolate_ltv(fit, None, config.horizon)
    )
    return fit, dist, paths


def bootstrap_ltv(
    series: DailySeries, config: BootstrapConfig, workers: int = 1
) -> LtvDistribution:
    """Bootstrap distribution of a group's lifetime value.

    Fits once on the full sample, then for every iteration resamples the
    log-space residuals, refits and extrapolates to the horizon.  The result
    depends only on ``(series, config)``; ``workers`` only changes speed.
    """
    return _bootstrap(series, config, workers, keep_paths=False)[1]


def bootstrap_paths(series: DailySeries, config: BootstrapConfig, workers: int = 1):
    """Like :func:`bootstrap_ltv` but also return the fit and the ``(B, H)`` daily paths."""
    return _bootstrap(series, config, workers, keep_paths=True)


def decide_winner(p_test_minus_control_positive: float, alpha: float) -> Decision:
    """Control unless the bootstrap evidence that test beats control is significant."""
    # Slack absorbs the rounding in 1 - k/B so that p == 1 - alpha stays inclusive.
    if 1.0 - p_test_minus_control_positive <= alpha + 1e-12:
        return Decision.TEST
    return Decision.CONTROL


def difference_test(
    control: LtvDistribution, test: LtvDistribution, alpha: float = 0.05
) -> DifferenceVerdict:
    if len(control.samples) != len(test.samples):
        raise LengthMismatch(
            f"control has {len(control.samples)} replicates, test has {len(test.samples)}"
        )
    c = control.samples
    t = test.samples
    diffs = c - t
    tol = TIE_RTOL * np.maximum(np.abs(c), np.abs(t))
    B = len(diffs)
    p_pos = np.count_nonzero(diffs > tol) / B
    p_neg = np.count_nonzero(diffs < -tol) / B
    diffs.setflags(write=False)
    return DifferenceVerdict(
        diffs=diffs,
        p_control_minus_test_positive=p_pos,
        p_test_minus_control_positive=p_neg,
        alpha=alpha,
        decision=decide_winner(p_neg, alpha),
    )


def compare_groups(
    control: DailySeries,
    test: DailySeries,
    config: BootstrapConfig,
    alpha: float = 0.05,
    workers: int = 1,
) -> DifferenceVerdict:
    return difference_test(
        bootstrap_ltv(control, config, workers), bootstrap_ltv(test, config, workers), alpha
    )
