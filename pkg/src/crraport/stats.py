"""Statistical kernel: normal CDF, Shapiro-Wilk test, ECDFs, quantiles.

Everything here is a pure function of its inputs and safe to call from
any thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, ndtri

__all__ = [
    "TestResult",
    "EmpiricalCdf",
    "normal_cdf",
    "shapiro_wilk",
    "empirical_cdf",
    "quantile",
]

_SQRT1_2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class TestResult:
    """Outcome of a hypothesis test."""

    statistic: float
    p_value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.statistic):
            raise ValueError("test statistic must be finite")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p-value must lie in [0, 1]")


def normal_cdf(x):
    """Standard normal CDF.

    Evaluated through the complementary error function,
    ``Phi(x) = erfc(-x / sqrt(2)) / 2``, which keeps the absolute error
    well below 1e-12 for |x| <= 8 and never produces NaN or negative
    values in the far tails. Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    out = 0.5 * erfc(-arr * _SQRT1_2)
    if arr.ndim == 0:
        return float(out)
    return out


# Royston (1995) / AS R94 polynomial coefficients, ascending order.
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coeffs, x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def shapiro_wilk(sample) -> TestResult:
    """Shapiro-Wilk W test of composite normality.

    Implements the Royston (1995) approximation (AS R94): expected
    normal order statistics from the Blom-type quantile formula,
    polynomial-corrected end coefficients, and a normal approximation
    of the null distribution of ``log(1 - W)`` (with separate
    regressions for n <= 11 and n >= 12; n = 3 is exact).

    Valid for sample sizes 3 <= n <= 5000 with non-degenerate spread.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = int(x.size)
    if n < 3 or n > 5000:
        raise ValueError("sample size must be in [3, 5000]")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample must contain only finite values")
    if x[-1] - x[0] <= 0.0:
        raise ValueError("zero sample variance")

    n2 = n // 2
    # Lower-half expected order statistics (all negative; middle is 0
    # for odd n and drops out of the statistic).
    m = ndtri((np.arange(1, n2 + 1) - 0.375) / (n + 0.25))
    ssq = 2.0 * float(np.dot(m, m))

    if n == 3:
        coef = np.array([math.sqrt(0.5)])
    else:
        rsn = 1.0 / math.sqrt(n)
        a1 = _poly(_C1, rsn) - m[0] / math.sqrt(ssq)
        coef = np.empty(n2)
        if n > 5:
            a2 = _poly(_C2, rsn) - m[1] / math.sqrt(ssq)
            fac = math.sqrt(
                (ssq - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2)
                / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)
            )
            coef[0] = a1
            coef[1] = a2
            coef[2:] = -m[2:] / fac
        else:
            fac = math.sqrt((ssq - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1 * a1))
            coef[0] = a1
            coef[1:] = -m[1:] / fac

    centred = x - x.mean()
    ssx = float(np.dot(centred, centred))
    sax = float(np.dot(coef, x[: -n2 - 1 : -1] - x[:n2]))
    w = min(sax * sax / ssx, 1.0)

    if n == 3:
        # Exact null distribution for n = 3.
        p = 1.90985931710274 * (math.asin(math.sqrt(w)) - 1.04719755119660)
        return TestResult(w, min(1.0, max(0.0, p)))

    w1 = 1.0 - w
    if w1 <= 1e-19:
        return TestResult(w, 1.0)
    y = math.log(w1)
    if n <= 11:
        gma = _poly(_G, float(n))
        if y >= gma:
            return TestResult(w, 0.0)
        z = (-math.log(gma - y) - _poly(_C3, float(n))) / math.exp(
            _poly(_C4, float(n))
        )
    else:
        ln_n = math.log(n)
        z = (y - _poly(_C5, ln_n)) / math.exp(_poly(_C6, ln_n))
    p = normal_cdf(-z)  # upper tail
    return TestResult(w, min(1.0, max(0.0, p)))


class EmpiricalCdf:
    """Right-continuous empirical distribution function.

    ``F(x) = #{values <= x} / n``; callable on scalars or arrays.
    """

    __slots__ = ("_sorted",)

    def __init__(self, values) -> None:
        arr = np.sort(np.asarray(values, dtype=float).ravel())
        if arr.size == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample must contain only finite values")
        self._sorted = arr

    @property
    def n(self) -> int:
        return int(self._sorted.size)

    def __call__(self, x):
        pos = np.searchsorted(self._sorted, np.asarray(x, dtype=float), side="right")
        out = pos / self._sorted.size
        if np.ndim(x) == 0:
            return float(out)
        return out


def empirical_cdf(values) -> EmpiricalCdf:
    """Build the right-continuous ECDF of a nonempty sample."""
    return EmpiricalCdf(values)


def quantile(values, q: float) -> float:
    """Order-statistic quantile with linear interpolation (type 7)."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("empty sample")
    qf = float(q)
    if not 0.0 <= qf <= 1.0:
        raise ValueError("quantile level must lie in [0, 1]")
    return float(np.quantile(arr, qf))
