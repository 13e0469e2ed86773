"""Log-log response curves: series type, least-squares fit and lifetime extrapolation.

A group's daily average response ``Y_t`` is modelled as a power law in the day
index, ``ln Y_t = b0 + b1 ln t (+ weekday effect) + e_t``.  Everything here is
pure and works on immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateDesign,
    HorizonTooShort,
    InvalidSeries,
    MissingCovariate,
    NonPositiveResponse,
)

N_WEEKDAYS = 7
MIN_OBSERVATIONS = 3
# X'X condition numbers above this are treated as singular.
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class DailySeries:
    """Observed daily average response of one experiment group.

    ``days`` are 1-based day indices since the cohort started, ``values`` the
    average response per recruited user on each of those days.  ``weekday``
    optionally labels each day with a category 0-6.
    """

    group_label: str
    days: tuple
    values: tuple
    weekday: Optional[tuple] = None

    def __post_init__(self):
        days = tuple(int(d) for d in self.days)
        values = tuple(float(v) for v in self.values)
        weekday = None if self.weekday is None else tuple(int(w) for w in self.weekday)
        object.__setattr__(self, "days", days)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weekday", weekday)

        if len(days) != len(values):
            raise InvalidSeries(
                f"{self.group_label}: {len(days)} days but {len(values)} values"
            )
        if weekday is not None:
            if len(weekday) != len(days):
                raise InvalidSeries(f"{self.group_label}: weekday length mismatch")
            if any(w < 0 or w >= N_WEEKDAYS for w in weekday):
                raise InvalidSeries(f"{self.group_label}: weekday outside 0-6")
        if days and days[0] < 1:
            raise InvalidSeries(f"{self.group_label}: day indices start at 1")
        if any(b <= a for a, b in zip(days, days[1:])):
            raise InvalidSeries(f"{self.group_label}: days must be strictly increasing")
        for d, v in zip(days, values):
            if not v > 0 or not math.isfinite(v):
                raise NonPositiveResponse(
                    f"{self.group_label}: response on day {d} is {v!r}; "
                    "the log-log model needs strictly positive values"
                )
        if len(days) < MIN_OBSERVATIONS:
            raise DegenerateDesign(
                f"{self.group_label}: need at least {MIN_OBSERVATIONS} observations, "
                f"got {len(days)}"
            )

    def __len__(self):
        return len(self.days)

    @property
    def n(self) -> int:
        return len(self.days)

    def truncate(self, last_day: int) -> "DailySeries":
        """Keep only observations on or before ``last_day``."""
        keep = [i for i, d in enumerate(self.days) if d <= last_day]
        return DailySeries(
            self.group_label,
            tuple(self.days[i] for i in keep),
            tuple(self.values[i] for i in keep),
            None if self.weekday is None else tuple(self.weekday[i] for i in keep),
        )

    def with_values(self, values: Sequence[float]) -> "DailySeries":
        return DailySeries(self.group_label, self.days, tuple(values), self.weekday)

    def relabel(self, label: str) -> "DailySeries":
        return DailySeries(label, self.days, self.values, self.weekday)


@dataclass(frozen=True)
class LogLogFit:
    """Least-squares fit of ``ln Y`` on ``[1, ln T, weekday dummies]``.

    Residuals and fitted values live in log space.  ``days`` and ``weekday``
    echo the series the fit came from so that predictions can be extrapolated
    on the same calendar.
    """

    beta0: float
    beta1: float
    weekday_coefs: Optional[tuple]
    residuals: tuple
    fitted_log: tuple
    sigma2: float
    n: int
    days: tuple = field(default=())
    weekday: Optional[tuple] = None

    @property
    def coefficients(self) -> np.ndarray:
        extra = self.weekday_coefs or ()
        return np.array((self.beta0, self.beta1) + tuple(extra), dtype=float)

    def weekday_of(self, day: int) -> int:
        """Weekday category of an arbitrary day, cycling from the first observation."""
        if self.weekday is None:
            raise MissingCovariate("fit carries no weekday information")
        return (self.weekday[0] + day - self.days[0]) % N_WEEKDAYS


@dataclass(frozen=True)
class ExtrapolationConfig:
    """Lifetime horizon in days and how observed days enter the LTV sum.

    With ``include_observed_pseudo`` (the default) the observed days contribute
    the (pseudo-)data itself; otherwise they contribute model predictions.
    """

    horizon: int = 365
    include_observed_pseudo: bool = True

    def __post_init__(self):
        if self.horizon < 1:
            raise HorizonTooShort(f"horizon must be positive, got {self.horizon}")


def design_matrix(days, weekday=None) -> np.ndarray:
    """Columns: intercept, ln(day), then 6 weekday dummies (category 0 is the reference)."""
    days = np.asarray(days, dtype=float)
    cols = [np.ones_like(days), np.log(days)]
    if weekday is not None:
        weekday = np.asarray(weekday)
        for k in range(1, N_WEEKDAYS):
            cols.append((weekday == k).astype(float))
    return np.column_stack(cols)


def projection(design: np.ndarray) -> np.ndarray:
    """Return ``(X'X)^-1 X'`` via a Cholesky solve of the normal equations.

    Raises DegenerateDesign when the system is underdetermined or singular.
    """
    n, p = design.shape
    if n < p + 1:
        raise DegenerateDesign(
            f"{n} observations cannot identify {p} coefficients with a residual "
            "degree of freedom"
        )
    gram = design.T @ design
    if not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > MAX_CONDITION:
        raise DegenerateDesign("normal equations are singular (constant regressor?)")
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise DegenerateDesign("normal equations are not positive definite") from exc
    tmp = np.linalg.solve(chol, design.T)
    return np.linalg.solve(chol.T, tmp)


def solve_rows(proj: np.ndarray, log_values: np.ndarray) -> np.ndarray:
    """Coefficients for each row of ``log_values`` (shape ``(m, n)`` -> ``(m, p)``).

    Uses per-row reductions rather than a matrix product so a row's result
    does not depend on how many other rows are solved alongside it.
    """
    log_values = np.atleast_2d(log_values)
    out = np.empty((log_values.shape[0], proj.shape[0]))
    for k in range(proj.shape[0]):
        out[:, k] = (log_values * proj[k]).sum(axis=1)
    return out


def fitted_rows(design: np.ndarray, coefs: np.ndarray) -> np.ndarray:
    out = np.zeros((coefs.shape[0], design.shape[0]))
    for k in range(design.shape[1]):
        out += coefs[:, k, None] * design[None, :, k]
    return out


def fit_loglog(series: DailySeries) -> LogLogFit:
    """Ordinary least squares of ``ln Y`` on ``ln T`` (plus weekday dummies if present)."""
    values = np.asarray(series.values, dtype=float)
    if np.any(values <= 0):
        raise NonPositiveResponse(f"{series.group_label}: non-positive response")
    design = design_matrix(series.days, series.weekday)
    proj = projection(design)
    log_y = np.log(values)
    coefs = solve_rows(proj, log_y)
    fitted = fitted_rows(design, coefs)[0]
    resid = log_y - fitted
    n, p = design.shape
    sigma2 = float(resid @ resid) / (n - p)
    c = coefs[0]
    return LogLogFit(
        beta0=float(c[0]),
        beta1=float(c[1]),
        weekday_coefs=None if series.weekday is None else tuple(float(x) for x in c[2:]),
        residuals=tuple(resid.tolist()),
        fitted_log=tuple(fitted.tolist()),
        sigma2=sigma2,
        n=n,
        days=series.days,
        weekday=series.weekday,
    )


def predict_log(fit: LogLogFit, day: int, weekday: Optional[int] = None) -> float:
    """Predicted log-response on ``day`` (1-based)."""
    if day < 1:
        raise ValueError(f"day must be >= 1, got {day}")
    value = fit.beta0 + fit.beta1 * math.log(day)
    if fit.weekday_coefs is not None:
        if weekday is None:
            raise MissingCovariate("fit has weekday terms; supply a weekday")
        if weekday:
            value += fit.weekday_coefs[weekday - 1]
    elif weekday is not None:
        raise ValueError("fit has no weekday terms but a weekday was supplied")
    return value


def horizon_design(fit: LogLogFit, horizon: int) -> np.ndarray:
    """Design matrix for days 1..horizon on the fit's calendar."""
    days = np.arange(1, horizon + 1)
    weekday = None
    if fit.weekday_coefs is not None:
        weekday = (fit.weekday[0] + days - fit.days[0]) % N_WEEKDAYS
    return design_matrix(days, weekday)


def daily_paths(
    fit: LogLogFit,
    coefs: np.ndarray,
    observed: Optional[np.ndarray],
    config: ExtrapolationConfig,
    design: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Daily values over days 1..H for each coefficient row.

    Unobserved days get ``exp`` of the prediction; observed days get the
    matching row of ``observed`` when given and the config asks for it.
    """
    last_day = max(fit.days, default=0)
    if config.horizon < last_day:
        raise HorizonTooShort(
            f"horizon {config.horizon} ends before last observed day {last_day}"
        )
    if design is None:
        design = horizon_design(fit, config.horizon)
    log_pred = fitted_rows(design, np.atleast_2d(coefs))
    paths = np.empty_like(log_pred)
    # Row-wise exp keeps each row's result independent of the batch layout.
    for j in range(log_pred.shape[0]):
        paths[j] = np.exp(log_pred[j])
    if observed is not None and config.include_observed_pseudo and fit.days:
        idx = np.asarray(fit.days) - 1
        paths[:, idx] = np.atleast_2d(observed)
    return paths


def extrapolate_ltv(
    fit: LogLogFit,
    pseudo_values: Optional[Sequence[float]] = None,
    config: ExtrapolationConfig = ExtrapolationConfig(),
) -> float:
    """Sum of daily values over days 1..H.

    Observed days contribute ``pseudo_values`` (or ``exp`` of the fitted values
    when absent); every other day contributes the back-transformed prediction.
    """
    if pseudo_values is None:
        observed = np.exp(np.asarray(fit.fitted_log))
    else:
        observed = np.asarray(pseudo_values, dtype=float)
        if observed.shape != (fit.n,):
            raise ValueError(f"expected {fit.n} pseudo values, got {observed.shape}")
        if np.any(observed <= 0):
            raise NonPositiveResponse("pseudo values must be positive")
    paths = daily_paths(fit, fit.coefficients[None, :], observed, config)
    return float(paths[0].sum())
