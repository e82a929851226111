"""Closed-form optimal portfolios for power and logarithmic utility.

Under the log-normal approximation of the portfolio gross return, the
expected power utility of terminal wealth W0 * w'R is

    E[U(W)] = W0^(1-g)/(1-g) * exp[(1-g^2) ln X + (g^2-g)/2 ln Y],

with X = w'mu and Y = w'Sigma w + X^2. Stationarity along w'1 = 1
reduces the problem to a quadratic in X,

    (1+s) X^2 - (g+2) r_gmv X + (g+1) (r_gmv^2 + s v_gmv) = 0,

whose discriminant gates existence: a real optimum requires the risk
aversion g to reach a market-determined threshold ``gamma_min``. The
maximum sits at the smaller root X-; the optimal weights are

    w* = Sigma^-1 [(-1 + (g+1) mu / X) Y / g - X mu],

which is exactly the Markowitz frontier portfolio with target mean X.
Logarithmic utility (g = 1) has the same weight formulas with value
ln W0 + 2 ln X - ln(Y)/2 and exists iff gamma_min <= 1. The optimum is
mean-variance efficient iff it exists and r_gmv > 0, it never coincides
with the GMV portfolio, and as g -> infinity it converges to the Sharpe
ratio portfolio while X and V decrease monotonically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .frontier import S_MIN, FrontierConstants, Weights, efficient_constants
from .market import MarketParams

__all__ = [
    "CrraSolution",
    "GammaCondition",
    "MonotonicityReport",
    "gamma_min",
    "discriminant",
    "gamma_condition",
    "power_solution",
    "log_solution",
    "objective_value",
    "is_mv_efficient_power",
    "monotonicity_check",
]

_NO_SOLUTION_MSG = "no solution exists below gamma_min"
_NONPOS_MEAN_MSG = "optimal mean non-positive; log-utility objective undefined"
_PARABOLA_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class CrraSolution:
    """Optimal portfolio for one risk-aversion level.

    ``x`` is the optimal expected gross return w*'mu, ``y`` the second
    moment E[(w'R)^2], ``v = y - x^2`` the variance. ``gamma = 1``
    marks logarithmic utility.
    """

    gamma: float
    x: float
    y: float
    v: float
    weights: Weights
    expected_utility: float
    mv_efficient: bool
    w0: float = 1.0

    def __post_init__(self) -> None:
        if self.y <= 0.0:
            raise ValueError("second moment must be positive")
        if abs(self.y - (self.v + self.x * self.x)) > 1e-12 * self.y:
            raise ValueError("inconsistent moments: y != v + x^2")
        if math.isnan(self.expected_utility):
            raise ValueError("expected utility must not be NaN")


def _check_on_parabola(sol: CrraSolution, constants: FrontierConstants) -> None:
    """Parabola membership and the never-GMV exclusion.

    The absolute floor covers extreme gamma, where v - v_gmv sinks
    below what y - x^2 can resolve in doubles; real defects violate the
    identity at O(1).
    """
    lhs = (sol.x - constants.r_gmv) ** 2
    rhs = constants.s * (sol.v - constants.v_gmv)
    tol = _PARABOLA_RTOL * max(abs(lhs), abs(rhs)) + 1e-12 * max(
        1.0, sol.y, sol.x * sol.x
    )
    if abs(lhs - rhs) > tol:
        raise ArithmeticError("solution left the mean-variance parabola")
    if sol.x == constants.r_gmv:
        raise ArithmeticError("solution coincides with the GMV portfolio")


def gamma_min(constants: FrontierConstants) -> float:
    """Smallest risk aversion for which the power-utility optimum exists.

    2s + 2 [ s(1+s) v/r^2 + sqrt(s(1+s)(1 + s v/r^2)(1 + (1+s) v/r^2)) ]
    with r = r_gmv, v = v_gmv; always exceeds 2s.
    """
    if constants.s <= S_MIN:
        raise ValueError("degenerate frontier")
    if constants.r_gmv == 0.0:
        raise ValueError("existence threshold undefined for r_gmv = 0")
    s = constants.s
    ratio = constants.v_gmv / (constants.r_gmv * constants.r_gmv)
    root = math.sqrt(s * (1.0 + s) * (1.0 + s * ratio) * (1.0 + (1.0 + s) * ratio))
    return 2.0 * s + 2.0 * (s * (1.0 + s) * ratio + root)


def discriminant(gamma: float, constants: FrontierConstants) -> float:
    """Existence discriminant of the optimal-mean quadratic.

    (g+2)^2 r^2 - 4 (g+1) (1+s) (r^2 + s v); nonnegative exactly when
    the power-utility optimum exists.
    """
    r2 = constants.r_gmv * constants.r_gmv
    s, v = constants.s, constants.v_gmv
    d = (gamma + 2.0) ** 2 * r2 - 4.0 * (gamma + 1.0) * (1.0 + s) * (r2 + s * v)
    alt = (gamma - 2.0 * s) ** 2 * r2 - 4.0 * (1.0 + s) * s * (r2 + (gamma + 1.0) * v)
    scale = max(abs(d), (gamma + 2.0) ** 2 * r2, 1.0)
    if abs(d - alt) > 1e-10 * scale:
        raise ArithmeticError("discriminant forms disagree")
    return d


@dataclass(frozen=True, eq=False)
class GammaCondition:
    """Existence threshold bundled with the sign condition on r_gmv."""

    gamma_min: float
    r_gmv_positive: bool
    constants: FrontierConstants = field(repr=False)

    def discriminant_at(self, gamma: float) -> float:
        return discriminant(gamma, self.constants)

    def exists(self, gamma: float) -> bool:
        return gamma >= self.gamma_min


def gamma_condition(constants: FrontierConstants) -> GammaCondition:
    """Bundle gamma_min with the sign condition on r_gmv."""
    gm = gamma_min(constants)
    d_at_min = discriminant(gm, constants)
    if abs(d_at_min) > 1e-9 * constants.r_gmv * constants.r_gmv:
        raise ArithmeticError("discriminant does not vanish at gamma_min")
    return GammaCondition(
        gamma_min=gm, r_gmv_positive=constants.r_gmv > 0.0, constants=constants
    )


def _clamped_discriminant(gamma: float, constants: FrontierConstants) -> float:
    """Discriminant with the tiny-negative clamp at the gamma_min boundary."""
    d = discriminant(gamma, constants)
    floor = -1e-12 * constants.r_gmv**2 * (gamma + 2.0) ** 2
    if d < floor:
        raise ValueError(
            f"{_NO_SOLUTION_MSG} (gamma={gamma:.6g}, "
            f"gamma_min={gamma_min(constants):.6g})"
        )
    return max(d, 0.0)


def _x_minus(gamma: float, constants: FrontierConstants, d: float) -> float:
    """Smaller root of the optimal-mean quadratic."""
    r, s, v = constants.r_gmv, constants.s, constants.v_gmv
    sq = math.sqrt(d)
    if r > 0.0:
        # Conjugate form: no cancellation as gamma grows large.
        return 2.0 * (gamma + 1.0) * (r * r + s * v) / ((gamma + 2.0) * r + sq)
    return ((gamma + 2.0) * r - sq) / (2.0 * (1.0 + s))


def _solve_xy(gamma: float, constants: FrontierConstants) -> tuple[float, float]:
    """Optimal mean and second moment for risk aversion ``gamma``."""
    d = _clamped_discriminant(gamma, constants)
    x = _x_minus(gamma, constants, d)
    if x <= 0.0:
        raise ValueError(_NONPOS_MEAN_MSG)
    r, s, v = constants.r_gmv, constants.s, constants.v_gmv
    # (x - r)/s through the conjugate of the alternate discriminant
    # form: exact algebra, and it dodges the small-s cancellation that
    # the literal (gamma/s)(x r - r^2 - s v) suffers. The denominator
    # is positive because gamma >= gamma_min > 2s and r > 0 here.
    tilt = 2.0 * (r * r + (gamma + 1.0) * v) / ((gamma - 2.0 * s) * r + math.sqrt(d))
    # Same quantity as (gamma/s)(x r - r^2 - s v), rearranged so every
    # term keeps its sign: stable for tiny s and for huge gamma alike.
    y = gamma / (gamma + 2.0) * ((1.0 + s) * tilt * (x + r) + (r * r - v))
    if y <= 0.0:
        raise ArithmeticError("internal inconsistency: second moment non-positive")
    return x, y


def _weights_from_moments(
    gamma: float, x: float, y: float, params: MarketParams
) -> Weights:
    """Sigma^-1 [(-1 + (g+1) mu / x) y / g - x mu]."""
    inner = (y / gamma) * ((gamma + 1.0) * params.mu / x - 1.0) - x * params.mu
    return Weights(params.solve(inner))


def _objective(x: float, y: float, gamma: float, w0: float) -> float:
    """Expected utility at portfolio moments (x, y); gamma=1 is log.

    Exponents beyond the double range collapse to +/-inf (extreme
    gamma), never NaN.
    """
    if gamma == 1.0:
        return math.log(w0) + 2.0 * math.log(x) - 0.5 * math.log(y)
    prefactor = w0 ** (1.0 - gamma) / (1.0 - gamma)
    exponent = (1.0 - gamma * gamma) * math.log(x) + 0.5 * (
        gamma * gamma - gamma
    ) * math.log(y)
    try:
        return prefactor * math.exp(exponent)
    except OverflowError:
        return math.copysign(math.inf, prefactor)


def power_solution(
    gamma: float, params: MarketParams, w0: float = 1.0
) -> CrraSolution:
    """Optimal portfolio maximizing expected power utility.

    Requires gamma >= gamma_min (a discriminant within rounding of zero
    is treated as the boundary case). gamma = 1 dispatches to
    ``log_solution``; the weight formulas coincide there.
    """
    if gamma <= 0.0:
        raise ValueError("relative risk aversion must be positive")
    if w0 <= 0.0:
        raise ValueError("initial wealth must be positive")
    if gamma == 1.0:
        return log_solution(params, w0)
    constants = efficient_constants(params)
    if constants.s <= S_MIN:
        raise ValueError("degenerate frontier")
    x, y = _solve_xy(gamma, constants)
    weights = _weights_from_moments(gamma, x, y, params)
    solution = CrraSolution(
        gamma=gamma,
        x=x,
        y=y,
        v=y - x * x,
        weights=weights,
        expected_utility=_objective(x, y, gamma, w0),
        mv_efficient=constants.r_gmv > 0.0,
        w0=w0,
    )
    _check_on_parabola(solution, constants)
    return solution


def log_solution(params: MarketParams, w0: float = 1.0) -> CrraSolution:
    """Optimal portfolio maximizing expected logarithmic utility.

    Exists iff gamma_min <= 1; equals the gamma = 1 evaluation of the
    power-utility formulas, with value ln W0 + 2 ln X - ln(Y)/2.
    """
    if w0 <= 0.0:
        raise ValueError("initial wealth must be positive")
    constants = efficient_constants(params)
    if constants.s <= S_MIN:
        raise ValueError("degenerate frontier")
    gm = gamma_min(constants)
    if gm > 1.0:
        raise ValueError(
            f"log-utility solution does not exist for this market "
            f"(gamma_min={gm:.6g} > 1)"
        )
    x, y = _solve_xy(1.0, constants)
    weights = _weights_from_moments(1.0, x, y, params)
    solution = CrraSolution(
        gamma=1.0,
        x=x,
        y=y,
        v=y - x * x,
        weights=weights,
        expected_utility=_objective(x, y, 1.0, w0),
        mv_efficient=constants.r_gmv > 0.0,
        w0=w0,
    )
    _check_on_parabola(solution, constants)
    return solution


def objective_value(
    w: Weights, params: MarketParams, gamma: float, w0: float = 1.0
) -> float:
    """Expected utility of an arbitrary feasible portfolio.

    Exact under the moment-matched log-normal model; requires
    w'mu > 0 (the objective contains ln of the mean).
    """
    if gamma <= 0.0:
        raise ValueError("relative risk aversion must be positive")
    if w0 <= 0.0:
        raise ValueError("initial wealth must be positive")
    x = float(w.w @ params.mu)
    if x <= 0.0:
        raise ValueError("outside objective domain")
    y = float(w.w @ params.sigma @ w.w) + x * x
    return _objective(x, y, gamma, w0)


def is_mv_efficient_power(gamma: float, constants: FrontierConstants) -> bool:
    """True iff the power-utility optimum is mean-variance efficient.

    Equivalent to gamma >= gamma_min together with r_gmv > 0.
    """
    if constants.r_gmv <= 0.0:
        return False
    if constants.s <= S_MIN:
        # Degenerate-frontier limit: gamma_min -> 0.
        return gamma > 0.0
    return gamma >= gamma_min(constants)


@dataclass(frozen=True)
class MonotonicityReport:
    """Per-gamma table of (x, v, utility) plus the monotonicity verdicts."""

    gammas: tuple[float, ...]
    x_values: tuple[float, ...]
    v_values: tuple[float, ...]
    utilities: tuple[float, ...]
    sharpe_return: float
    x_strictly_decreasing: bool
    v_strictly_decreasing: bool
    x_above_sharpe_return: bool

    @property
    def passed(self) -> bool:
        return (
            self.x_strictly_decreasing
            and self.v_strictly_decreasing
            and self.x_above_sharpe_return
        )


def monotonicity_check(params: MarketParams, gammas) -> MonotonicityReport:
    """Verify that x(gamma), v(gamma) decrease and x stays above the
    Sharpe portfolio's expected return along an ascending gamma grid."""
    grid = [float(g) for g in gammas]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("gamma grid must be strictly ascending")
    constants = efficient_constants(params)
    if constants.r_gmv <= 0.0:
        raise ValueError("r_gmv must be positive")
    gm = gamma_min(constants)
    if grid and grid[0] < gm:
        raise ValueError(f"all gammas must be >= gamma_min ({gm:.6g})")

    solutions = [power_solution(g, params) for g in grid]
    xs = tuple(sol.x for sol in solutions)
    vs = tuple(sol.v for sol in solutions)
    us = tuple(sol.expected_utility for sol in solutions)
    ones = np.ones(params.k)
    sinv_mu = params.solve(params.mu)
    sharpe_return = float(params.mu @ sinv_mu) / float(ones @ sinv_mu)
    return MonotonicityReport(
        gammas=tuple(grid),
        x_values=xs,
        v_values=vs,
        utilities=us,
        sharpe_return=sharpe_return,
        x_strictly_decreasing=all(b < a for a, b in zip(xs, xs[1:])),
        v_strictly_decreasing=all(b < a for a, b in zip(vs, vs[1:])),
        x_above_sharpe_return=all(x >= sharpe_return - 1e-10 for x in xs),
    )
