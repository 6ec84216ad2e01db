"""Student t machinery: regularized incomplete beta, t tails, Welch and paired tests."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DataError

CF_EPS = 1e-12
CF_MAX_ITER = 300
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float, x_complement: float | None = None) -> float:
    """Regularized incomplete beta I_x(a, b).

    ``x_complement`` (= 1 - x) may be passed when it is known more
    accurately than ``1 - x`` would be.
    """
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a, b > 0")
    y = 1.0 - x if x_complement is None else x_complement
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log(y))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    t2 = t * t
    x = df / (df + t2)
    y = t2 / (df + t2)
    p = betainc(0.5 * df, 0.5, x, y)
    return min(1.0, max(0.0, p))


def t_cdf(t: float, df: float) -> float:
    half = 0.5 * t_sf_two_sided(t, df)
    return 1.0 - half if t > 0 else half


def t_pdf(t: float, df: float) -> float:
    logc = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(logc - (df + 1) / 2 * math.log1p(t * t / df))


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float
    mean_a: float
    mean_b: float

    def to_json(self) -> dict:
        return {"t": self.t, "df": self.df, "p": self.p, "mean_a": self.mean_a, "mean_b": self.mean_b}


def _mean_var(x: Sequence[float]) -> tuple[float, float]:
    n = len(x)
    m = math.fsum(x) / n
    v = math.fsum((xi - m) ** 2 for xi in x) / (n - 1)
    return m, v


def welch_ttest(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sided unequal-variance t-test with Welch-Satterthwaite df."""
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise DataError("welch_ttest needs at least two observations per sample")
    ma, va = _mean_var(a)
    mb, vb = _mean_var(b)
    if va == 0.0 and vb == 0.0:
        raise DataError("welch_ttest undefined: both samples have zero variance")
    sa, sb = va / na, vb / nb
    se2 = sa + sb
    if se2 == 0.0:
        raise DataError("welch_ttest undefined: variance underflows")
    t = (ma - mb) / math.sqrt(se2)
    # df is scale-free; normalising first keeps tiny variances from underflowing
    top = max(sa, sb)
    ra, rb = sa / top, sb / top
    df = (ra + rb) ** 2 / (ra * ra / (na - 1) + rb * rb / (nb - 1))
    return TTestResult(t, df, t_sf_two_sided(t, df), ma, mb)


def paired_ttest(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test on ``a - b``.

    All differences zero gives p=1; zero variance with a nonzero mean gives p=0.
    """
    if len(a) != len(b):
        raise DataError("paired test needs equal-length samples")
    n = len(a)
    if n < 2:
        raise DataError("paired test needs at least two pairs")
    d = [float(x) - float(y) for x, y in zip(a, b)]
    ma = math.fsum(float(x) for x in a) / n
    mb = math.fsum(float(y) for y in b) / n
    md, vd = _mean_var(d)
    if max(d) == min(d):
        md, vd = d[0], 0.0
    if vd == 0.0:
        if md == 0.0:
            return TTestResult(0.0, n - 1, 1.0, ma, mb)
        return TTestResult(math.copysign(math.inf, md), n - 1, 0.0, ma, mb)
    t = md / math.sqrt(vd / n)
    return TTestResult(t, n - 1, t_sf_two_sided(t, n - 1), ma, mb)
