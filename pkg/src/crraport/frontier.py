"""Efficient-set constants and classical mean-variance portfolios.

Three scalars pin down the frontier geometry: the expected gross return
``r_gmv`` and variance ``v_gmv`` of the global minimum variance
portfolio, and the slope ``s = mu' Q mu`` with

    Q = Sigma^-1 - Sigma^-1 1 1' Sigma^-1 / (1' Sigma^-1 1).

Every feasible optimal portfolio lives on the parabola
``(X - r_gmv)^2 = s (V - v_gmv)`` in mean-variance space; its upper
branch (X >= r_gmv) is the efficient frontier. Shorting is allowed
throughout: feasible means w'1 = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market import MarketParams

__all__ = [
    "S_MIN",
    "Weights",
    "FrontierConstants",
    "efficient_constants",
    "gmv_weights",
    "sharpe_weights",
    "portfolio_moments",
    "markowitz_weights",
    "parabola_variance",
]

# Below this slope the frontier degenerates (all feasible portfolios
# share one mean) and the closed forms divide by s; reject, don't
# regularize.
S_MIN = 1e-12

_WEIGHT_SUM_ATOL = 1e-10
_Q_NULL_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class Weights:
    """Fully-invested portfolio weights (w'1 = 1, shorting allowed)."""

    w: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.w, dtype=float).ravel()
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if abs(w.sum() - 1.0) > _WEIGHT_SUM_ATOL:
            raise ValueError("weights must sum to 1 (absolute tolerance 1e-10)")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)


@dataclass(frozen=True, eq=False)
class FrontierConstants:
    """Location of the efficient frontier: r_gmv, v_gmv, slope s, and Q."""

    r_gmv: float
    v_gmv: float
    s: float
    q: np.ndarray

    def __post_init__(self) -> None:
        if not self.v_gmv > 0.0:
            raise ValueError("v_gmv must be positive")
        if self.s < 0.0:
            raise ValueError("s must be nonnegative")
        q = np.array(self.q, dtype=float)
        ones = np.ones(q.shape[0])
        if np.max(np.abs(q @ ones)) > _Q_NULL_ATOL:
            raise ValueError("Q must annihilate the ones vector")
        q.flags.writeable = False
        object.__setattr__(self, "q", q)


def efficient_constants(params: MarketParams) -> FrontierConstants:
    """Compute (r_gmv, v_gmv, s, Q) from the market parameters.

    All inverse applications are linear solves against the cached
    Cholesky factor of sigma; Q is assembled from solve columns.
    """
    ones = np.ones(params.k)
    sinv_one = params.solve(ones)
    sinv_mu = params.solve(params.mu)
    a = float(ones @ sinv_one)
    b = float(ones @ sinv_mu)
    c = float(params.mu @ sinv_mu)

    sigma_inv = params.solve(np.eye(params.k))
    q = sigma_inv - np.outer(sinv_one, sinv_one) / a
    q = 0.5 * (q + q.T)

    # s is defined through Q; both evaluations cancel ~7 digits on
    # small-vol markets, so the noise floor below is scale-aware and
    # true-zero slopes (equal means) clamp to exactly 0.
    s = float(params.mu @ (q @ params.mu))
    noise = (
        16.0
        * np.finfo(float).eps
        * max(1.0, float(np.max(np.abs(q))) * float(np.max(np.abs(params.mu))) ** 2)
        * params.k
    )
    if s < -noise:
        raise ValueError("slope parameter came out materially negative")
    if s <= noise:
        s = 0.0
    s_solve = c - b * b / a
    if abs(s_solve - s) > max(1e-10 * max(1.0, abs(c)), 4.0 * noise):
        raise ArithmeticError("inconsistent slope between solve and Q forms")
    return FrontierConstants(r_gmv=b / a, v_gmv=1.0 / a, s=s, q=q)


def gmv_weights(params: MarketParams) -> Weights:
    """Global minimum variance portfolio, Sigma^-1 1 / (1' Sigma^-1 1)."""
    ones = np.ones(params.k)
    sinv_one = params.solve(ones)
    return Weights(sinv_one / (ones @ sinv_one))


def sharpe_weights(params: MarketParams) -> Weights:
    """Sharpe ratio portfolio, Sigma^-1 mu / (1' Sigma^-1 mu).

    Note mu is the mean of GROSS returns, so this differs slightly from
    the textbook net-return Sharpe portfolio. Undefined when
    1' Sigma^-1 mu = 0.
    """
    sinv_mu = params.solve(params.mu)
    b = float(sinv_mu.sum())
    if abs(b) <= 1e-12 * max(1.0, float(np.max(np.abs(sinv_mu)))):
        raise ValueError("Sharpe portfolio undefined")
    return Weights(sinv_mu / b)


def portfolio_moments(w: Weights, params: MarketParams) -> tuple[float, float]:
    """Expected gross return and variance, (w'mu, w'Sigma w)."""
    if w.w.size != params.k:
        raise ValueError("weights dimension does not match market")
    x = float(w.w @ params.mu)
    v = float(w.w @ params.sigma @ w.w)
    return x, max(v, 0.0)


def markowitz_weights(
    x_target: float, params: MarketParams, constants: FrontierConstants
) -> Weights:
    """Frontier portfolio with expected gross return ``x_target``.

    w = w_gmv + (x_target - r_gmv)/s * Q mu.
    """
    if constants.s <= S_MIN:
        raise ValueError("degenerate frontier")
    base = gmv_weights(params).w
    tilt = constants.q @ params.mu
    return Weights(base + (float(x_target) - constants.r_gmv) / constants.s * tilt)


def parabola_variance(x: float, constants: FrontierConstants) -> float:
    """Variance of the frontier portfolio with mean ``x``."""
    if constants.s <= S_MIN:
        raise ValueError("degenerate frontier")
    d = float(x) - constants.r_gmv
    return d * d / constants.s + constants.v_gmv
