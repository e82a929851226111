"""Shared generators for the test suite."""

from __future__ import annotations

import math

import numpy as np

from crraport import MarketParams


def random_market(
    rng: np.random.Generator,
    k: int,
    mean_spread: float = 0.01,
    vol_range: tuple[float, float] = (0.02, 0.08),
) -> MarketParams:
    """Random PD market with gross means near 1.

    Correlations come from a Wishart-style draw with k+4 samples, so
    the covariance is comfortably positive definite.
    """
    while True:
        vols = rng.uniform(*vol_range, k)
        a = rng.normal(size=(k + 4, k))
        corr = a.T @ a
        d = np.sqrt(np.diag(corr))
        corr = corr / np.outer(d, d)
        sigma = corr * np.outer(vols, vols)
        mu = 1.0 + rng.normal(0.0, mean_spread, k)
        try:
            return MarketParams(mu, sigma)
        except ValueError:
            continue


def market_with_constants(r_gmv: float, v_gmv: float, s: float) -> MarketParams:
    """Two-asset market realizing exact target efficient-set constants.

    With sigma = 2 v_gmv I and mu = r_gmv +- sqrt(v_gmv s), the GMV
    portfolio is (1/2, 1/2) with mean r_gmv and variance v_gmv, and the
    slope comes out exactly s.
    """
    root = math.sqrt(v_gmv * s)
    mu = np.array([r_gmv + root, r_gmv - root])
    sigma = np.diag([2.0 * v_gmv, 2.0 * v_gmv])
    return MarketParams(mu, sigma)


def random_feasible_weights(rng: np.random.Generator, k: int, n: int) -> np.ndarray:
    """n raw fully-invested weight vectors (no domain screening)."""
    head = rng.uniform(-2.0, 3.0, size=(n, k - 1))
    return np.hstack([head, 1.0 - head.sum(axis=1, keepdims=True)])
