"""Reference computations written independently of the ltvboot code paths."""

import math

from scipy import integrate

M64 = (1 << 64) - 1
PHILOX_M0 = 0xD2E7470EE14C6C93
PHILOX_M1 = 0xCA5A826395121157
PHILOX_W0 = 0x9E3779B97F4A7C15
PHILOX_W1 = 0xBB67AE8584CAA73B


def _mulhilo(a, b):
    prod = a * b
    return prod >> 64, prod & M64


def philox4x64(counter, key, rounds=10):
    """Philox4x64-10 block function on Python ints (Random123 reference)."""
    c = list(counter)
    k = list(key)
    for r in range(rounds):
        if r:
            k = [(k[0] + PHILOX_W0) & M64, (k[1] + PHILOX_W1) & M64]
        hi0, lo0 = _mulhilo(PHILOX_M0, c[0])
        hi1, lo1 = _mulhilo(PHILOX_M1, c[2])
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0]
    return c


def philox_raw(key, counter, count):
    """Raw 64-bit outputs of a Philox stream whose counter starts at ``counter``.

    Like numpy's bit generator, the counter is bumped before each block.
    """
    ctr = list(counter)
    out = []
    while len(out) < count:
        for i in range(4):
            ctr[i] = (ctr[i] + 1) & M64
            if ctr[i]:
                break
        out.extend(philox4x64(ctr, key))
    return out[:count]


def replay_indices(key, j, n):
    raw = philox_raw([int(k) for k in key], [0, j, 0, 0], n)
    return [math.floor((x >> 11) * 2.0**-53 * n) for x in raw]


def simple_regression(x, y):
    """Intercept and slope from cov/var."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    slope = sxy / sxx
    return my - slope * mx, slope


def loglog_regression(days, values):
    return simple_regression([math.log(d) for d in days], [math.log(v) for v in values])


def brute_ltv(beta0, beta1, horizon, observed=None):
    """Sum of exp(b0 + b1 ln t) over t = 1..H, with observed[t] replacing day t."""
    observed = observed or {}
    total = 0.0
    for t in range(1, horizon + 1):
        if t in observed:
            total += observed[t]
        else:
            total += math.exp(beta0) * t**beta1
    return total


def _t_pdf(x, df):
    logc = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(logc - (df + 1) / 2 * math.log1p(x * x / df))


def t_upper_tail(t, df):
    """P(T > t) by quadrature of the Student t density."""
    if t >= 0:
        tail, _ = integrate.quad(_t_pdf, t, math.inf, args=(df,), epsabs=1e-13, epsrel=1e-12)
        return tail
    body, _ = integrate.quad(_t_pdf, t, 0, args=(df,), epsabs=1e-13, epsrel=1e-12)
    return 0.5 + body


def welch_textbook(control, test):
    n1, n2 = len(control), len(test)
    m1, m2 = sum(control) / n1, sum(test) / n2
    s1 = sum((v - m1) ** 2 for v in control) / (n1 - 1)
    s2 = sum((v - m2) ** 2 for v in test) / (n2 - 1)
    se = math.sqrt(s1 / n1 + s2 / n2)
    t = (m2 - m1) / se
    df = (s1 / n1 + s2 / n2) ** 2 / ((s1 / n1) ** 2 / (n1 - 1) + (s2 / n2) ** 2 / (n2 - 1))
    return t, df, t_upper_tail(t, df)


def geometric_cumulative(r, churn, through_day):
    """Closed-form r * (1 - q^D) / (1 - q) with q = 1 - churn."""
    if churn == 0:
        return r * through_day
    q = 1 - churn
    return r * (1 - q**through_day) / churn
