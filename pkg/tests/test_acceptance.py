"""Exit criteria for the package, one test per criterion.

Run alone with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ltvboot.baseline import UserCumulative, welch_t_test
from ltvboot.bootstrap import BootstrapConfig, bootstrap_ltv, difference_test
from ltvboot.io import load_daily_csv, write_daily_csv
from ltvboot.model import DailySeries, ExtrapolationConfig, LogLogFit, extrapolate_ltv, fit_loglog
from ltvboot.report import run_retrospective
from ltvboot.simulator import crossover_scenario, null_scenario

import oracles

PROPERTY_CASES = 1000


@pytest.fixture
def record(request):
    def _record(name, detail=""):
        request.node.user_properties.append(("criterion", name))
        request.node.user_properties.append(("detail", detail))

    return _record


def test_ac1_regression_exactness(record):
    record("AC1 regression exactness", "tol 1e-10")
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(200):
        c = math.exp(rng.uniform(-8, 8))
        b = rng.uniform(-3, 3)
        n = int(rng.integers(3, 60))
        days = np.sort(rng.choice(np.arange(1, 400), size=n, replace=False))
        fit = fit_loglog(DailySeries("g", days, c * days.astype(float) ** b))
        err = max(abs(fit.beta0 - math.log(c)), abs(fit.beta1 - b), np.max(np.abs(fit.residuals)))
        worst = max(worst, err)
        assert abs(fit.beta0 - math.log(c)) <= 1e-10
        assert abs(fit.beta1 - b) <= 1e-10
        assert np.max(np.abs(fit.residuals)) <= 1e-10
    record("AC1 regression exactness", f"max error {worst:.1e} <= 1e-10")


def test_ac2_analytic_ltv(record):
    config = ExtrapolationConfig(365)
    linear = extrapolate_ltv(LogLogFit(0.0, 1.0, None, (), (), 0.0, 0), None, config)
    assert linear == pytest.approx(66795, rel=1e-6)
    for b0 in (-4.0, -0.3, 0.0, 1.7):
        flat = extrapolate_ltv(LogLogFit(b0, 0.0, None, (), (), 0.0, 0), None, config)
        assert flat == pytest.approx(365 * math.exp(b0), rel=1e-6)
    record("AC2 analytic LTV oracle", f"sum t = {linear!r}")


def test_ac3_bootstrap_determinism_and_degeneracy(record):
    series = DailySeries(
        "control", range(1, 15),
        [0.022 * d**-0.2 * (1 + 0.04 * math.sin(d)) for d in range(1, 15)],
    )
    config = BootstrapConfig(iterations=2000, seed=20240601)
    one = bootstrap_ltv(series, config)
    again = bootstrap_ltv(series, config)
    many = bootstrap_ltv(series, config, workers=8)
    assert one.samples.tobytes() == again.samples.tobytes()
    assert one.samples.tobytes() == many.samples.tobytes()
    assert np.ptp(one.samples) > 0

    exact = DailySeries("control", range(1, 15), [0.03 * d**-0.25 for d in range(1, 15)])
    flat = bootstrap_ltv(exact, config)
    width = np.ptp(flat.samples) / flat.point_estimate
    assert width < 1e-12
    assert np.allclose(flat.samples, flat.point_estimate, rtol=1e-12)
    record("AC3 bootstrap determinism & degeneracy", f"relative width {width:.1e}")


def test_ac4_null_calibration(record):
    start = time.time()
    summary = run_retrospective(null_scenario(), 500, master_seed=4, iterations=2000, alpha=0.05)
    chose_test = sum(r.proposed_decision == "test" for r in summary.records)
    rate = chose_test / summary.n_experiments
    record(
        "AC4 null calibration",
        f"proposed chose test {chose_test}/500 = {rate:.3f} (bound 0.09), "
        f"{time.time() - start:.0f}s",
    )
    assert rate <= 0.09


def test_ac5_crossover_reproduction(record):
    sc = crossover_scenario()
    c14, t14 = sc.control.expected_cumulative(14), sc.test.expected_cumulative(14)
    c90, t90 = sc.control.expected_cumulative(90), sc.test.expected_cumulative(90)
    assert t14 > c14
    assert t90 < c90
    assert c14 == pytest.approx(oracles.geometric_cumulative(0.0225, 0.035, 14), rel=1e-12)

    start = time.time()
    summary = run_retrospective(sc, 200, master_seed=5, iterations=2000, alpha=0.05)
    proposed_control = sum(r.proposed_decision == "control" for r in summary.records)
    standard_control = sum(r.standard_decision == "control" for r in summary.records)
    record(
        "AC5 crossover reproduction",
        f"day14 lift {t14 / c14 - 1:+.2%}, day90 {t90 / c90 - 1:+.2%}; "
        f"accuracy proposed {summary.proposed.accuracy:.3f} "
        f"vs standard {summary.standard.accuracy:.3f}, {time.time() - start:.0f}s",
    )
    assert proposed_control > standard_control
    assert summary.proposed.accuracy > summary.standard.accuracy


def test_ac6_welch_oracle(record):
    rng = np.random.default_rng(606)
    worst_t = worst_p = 0.0
    for _ in range(100):
        x = rng.normal(rng.uniform(-5, 5), rng.uniform(0.1, 4), size=rng.integers(2, 12))
        y = rng.normal(rng.uniform(-5, 5), rng.uniform(0.1, 4), size=rng.integers(2, 12))
        got = welch_t_test(UserCumulative("c", x), UserCumulative("t", y))
        t, df, p = oracles.welch_textbook(list(x), list(y))
        worst_t = max(worst_t, abs(got.t - t))
        worst_p = max(worst_p, abs(got.p_one_sided - p))
        assert got.df == pytest.approx(df, rel=1e-9)
    record("AC6 Welch oracle equivalence", f"max |dt| {worst_t:.1e}, max |dp| {worst_p:.1e}")
    assert worst_t <= 1e-9
    assert worst_p <= 1e-6


positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


@st.composite
def paired_series(draw):
    n = draw(st.integers(3, 12))
    days = np.cumsum(draw(st.lists(st.integers(1, 3), min_size=n, max_size=n))).tolist()
    a = draw(st.lists(positive, min_size=n, max_size=n))
    b = draw(st.lists(positive, min_size=n, max_size=n))
    return DailySeries("control", days, a), DailySeries("test", days, b)


property_settings = settings(
    max_examples=PROPERTY_CASES,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)


def test_ac7_property_suite(record):
    counts = {}

    @property_settings
    @given(paired_series(), st.floats(1e-3, 1e3), st.integers(0, 2**32))
    def scale_equivariance(pair, k, seed):
        counts["scale"] = counts.get("scale", 0) + 1
        control, test = pair
        config = BootstrapConfig(iterations=25, seed=seed, horizon=max(control.days) + 30)
        c, t = bootstrap_ltv(control, config), bootstrap_ltv(test, config)
        ck = bootstrap_ltv(control.with_values([k * v for v in control.values]), config)
        tk = bootstrap_ltv(test.with_values([k * v for v in test.values]), config)
        assert np.allclose(ck.samples, k * c.samples, rtol=1e-9, atol=0)
        assert np.allclose(tk.samples, k * t.samples, rtol=1e-9, atol=0)
        base, sc = difference_test(c, t), difference_test(ck, tk)
        magnitude = k * np.maximum(c.samples, t.samples)
        assert np.all(np.abs(sc.diffs - k * base.diffs) <= 1e-9 * magnitude)
        assert sc.p_control_minus_test_positive == base.p_control_minus_test_positive
        assert sc.p_test_minus_control_positive == base.p_test_minus_control_positive
        assert sc.decision is base.decision

    @property_settings
    @given(
        st.lists(st.floats(1e-3, 1e6), min_size=1, max_size=30).flatmap(
            lambda a: st.tuples(
                st.just(a), st.lists(st.floats(1e-3, 1e6), min_size=len(a), max_size=len(a))
            )
        ),
        st.floats(0.001, 0.5),
    )
    def exchange_antisymmetry(pair, alpha):
        counts["exchange"] = counts.get("exchange", 0) + 1
        a, b = pair
        from ltvboot.bootstrap import LtvDistribution

        da, db = LtvDistribution("a", a, 1.0), LtvDistribution("b", b, 1.0)
        fwd, rev = difference_test(da, db, alpha), difference_test(db, da, alpha)
        assert np.array_equal(fwd.diffs, -rev.diffs)
        assert fwd.p_control_minus_test_positive == rev.p_test_minus_control_positive
        assert fwd.p_test_minus_control_positive == rev.p_control_minus_test_positive

    samples = st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=25).filter(
        lambda v: np.std(v) > 1e-6
    )

    @property_settings
    @given(samples, samples)
    def swap_negation(x, y):
        counts["swap"] = counts.get("swap", 0) + 1
        fwd = welch_t_test(UserCumulative("c", x), UserCumulative("t", y))
        rev = welch_t_test(UserCumulative("t", y), UserCumulative("c", x))
        assert rev.t == pytest.approx(-fwd.t, rel=1e-12, abs=1e-12)
        assert rev.p_one_sided == pytest.approx(1 - fwd.p_one_sided, abs=1e-12)

    @property_settings
    @given(
        st.lists(
            st.tuples(
                st.text("abcxyz_-,\" ", min_size=1, max_size=6).filter(lambda s: s.strip() == s),
                st.lists(st.floats(1e-300, 1e300), min_size=3, max_size=8),
                st.integers(1, 5),
            ),
            min_size=1,
            max_size=3,
            unique_by=lambda t: t[0],
        ),
        st.booleans(),
    )
    def csv_round_trip(groups, with_weekday):
        counts["csv"] = counts.get("csv", 0) + 1
        series = []
        for label, values, start in groups:
            days = range(start, start + len(values))
            weekday = [(d * 3) % 7 for d in days] if with_weekday else None
            series.append(DailySeries(label, days, values, weekday))
        write_daily_csv(series, path)
        assert load_daily_csv(path) == series

    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "rt.csv"
        scale_equivariance()
        exchange_antisymmetry()
        swap_negation()
        csv_round_trip()

    record("AC7 property suite", ", ".join(f"{k} {v} cases" for k, v in counts.items()))
    assert all(v >= PROPERTY_CASES for v in counts.values())
