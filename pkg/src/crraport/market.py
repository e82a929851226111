"""Asset-return ingestion and market-parameter estimation.

Returns are simple per-period returns ``r``; everything downstream works
with gross returns ``R = 1 + r``, so ``MarketParams.mu`` is the mean of
gross returns and ``MarketParams.sigma`` their covariance (identical to
the covariance of simple returns). All values are immutable after
construction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import cho_solve

__all__ = [
    "ReturnMatrix",
    "MarketParams",
    "SynthSpec",
    "load_returns_csv",
    "estimate_params",
    "synth_market",
    "subset",
]

# Cholesky pivot acceptance threshold, relative to the largest diagonal
# entry of the covariance matrix.
_PIVOT_RTOL = 1e-12
_SYMMETRY_RTOL = 1e-10

_SINGULAR_MSG = "singular covariance; need n > k and non-degenerate returns"


def _spd_cholesky(sigma: np.ndarray, what: str = "covariance") -> np.ndarray:
    """Lower Cholesky factor of an SPD matrix, or ValueError.

    Fails if the factorization breaks down or any pivot falls at or
    below ``1e-12 * max(diag)``.
    """
    diag = np.diag(sigma)
    max_diag = float(np.max(diag)) if diag.size else 0.0
    if max_diag <= 0.0:
        raise ValueError(f"{what} is not positive definite")
    try:
        lower = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise ValueError(f"{what} is not positive definite") from None
    pivots = np.diag(lower) ** 2
    if not np.all(pivots > _PIVOT_RTOL * max_diag):
        raise ValueError(f"{what} is not positive definite (pivot below tolerance)")
    return lower


@dataclass(frozen=True, eq=False)
class ReturnMatrix:
    """n_periods x n_assets matrix of simple returns."""

    values: np.ndarray
    asset_labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("returns must form a 2-d matrix")
        n, k = values.shape
        if n < 2:
            raise ValueError("n_periods >= 2 required")
        if k < 2:
            raise ValueError("n_assets >= 2 required")
        if not np.all(np.isfinite(values)):
            raise ValueError("returns must contain only finite values")
        labels = tuple(self.asset_labels) or tuple(
            f"asset_{j + 1}" for j in range(k)
        )
        if len(labels) != k:
            raise ValueError("asset_labels length must match n_assets")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "asset_labels", labels)

    @property
    def n_periods(self) -> int:
        return self.values.shape[0]

    @property
    def n_assets(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class MarketParams:
    """Mean vector and covariance matrix of gross returns.

    ``sigma`` must be symmetric (relative tolerance 1e-10) and positive
    definite; the Cholesky factor is computed once at construction and
    reused for every linear solve against sigma.
    """

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        mu = np.array(self.mu, dtype=float).ravel()
        sigma = np.array(self.sigma, dtype=float)
        if mu.size < 2:
            raise ValueError("n_assets >= 2 required")
        if sigma.shape != (mu.size, mu.size):
            raise ValueError("sigma must be k x k with k = len(mu)")
        if not np.all(np.isfinite(mu)) or not np.all(np.isfinite(sigma)):
            raise ValueError("mu and sigma must be finite")
        scale = float(np.max(np.abs(sigma)))
        if scale <= 0.0 or np.max(np.abs(sigma - sigma.T)) > _SYMMETRY_RTOL * scale:
            raise ValueError("sigma must be symmetric within relative tolerance 1e-10")
        sigma = 0.5 * (sigma + sigma.T)
        chol = _spd_cholesky(sigma)
        mu.flags.writeable = False
        sigma.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "_chol", chol)

    @property
    def k(self) -> int:
        return self.mu.size

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``sigma @ x = rhs`` via the cached Cholesky factor."""
        return cho_solve((self._chol, True), np.asarray(rhs, dtype=float))


def load_returns_csv(
    path, delimiter: str = ",", header: bool | None = None
) -> ReturnMatrix:
    """Load a returns CSV: one row per period, one column per asset.

    ``header=None`` auto-detects a label row (a first row with any
    non-numeric cell). Cells must parse as finite reals; ragged rows and
    bad cells are reported with their row/column position.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        raw = [
            row
            for row in csv.reader(fh, delimiter=delimiter)
            if any(cell.strip() for cell in row)
        ]
    if not raw:
        raise ValueError("no data rows")

    labels: tuple[str, ...] = ()
    if header is None:
        header = not all(_is_finite_number(cell) for cell in raw[0])
    if header:
        labels = tuple(cell.strip() for cell in raw[0])
        raw = raw[1:]
    if not raw:
        raise ValueError("no data rows")
    if len(raw) == 1:
        raise ValueError("n_periods >= 2 required")

    k = len(raw[0])
    data = np.empty((len(raw), k))
    for i, row in enumerate(raw):
        row_no = i + 2 if header else i + 1
        if len(row) != k:
            raise ValueError(
                f"ragged row {row_no}: expected {k} cells, found {len(row)}"
            )
        for j, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise ValueError(
                    f"non-numeric cell at row {row_no}, column {j + 1}: {cell.strip()!r}"
                ) from None
            if not np.isfinite(value):
                raise ValueError(
                    f"non-finite cell at row {row_no}, column {j + 1}: {cell.strip()!r}"
                )
            data[i, j] = value
    return ReturnMatrix(data, labels)


def _is_finite_number(cell: str) -> bool:
    try:
        return bool(np.isfinite(float(cell)))
    except ValueError:
        return False


def estimate_params(returns: ReturnMatrix) -> MarketParams:
    """Sample mean and unbiased sample covariance of gross returns."""
    gross = returns.values + 1.0
    mu = gross.mean(axis=0)
    dev = gross - mu
    sigma = dev.T @ dev / (returns.n_periods - 1)
    sigma = 0.5 * (sigma + sigma.T)
    try:
        return MarketParams(mu, sigma)
    except ValueError as exc:
        raise ValueError(_SINGULAR_MSG) from exc


@dataclass(frozen=True, eq=False)
class SynthSpec:
    """Specification of a synthetic i.i.d. normal market.

    ``mu0`` is the target mean of GROSS returns (simple returns are
    drawn with mean ``mu0 - 1``); ``sigma0`` their covariance.
    """

    n: int
    mu0: np.ndarray
    sigma0: np.ndarray

    def __post_init__(self) -> None:
        mu0 = np.array(self.mu0, dtype=float).ravel()
        sigma0 = np.array(self.sigma0, dtype=float)
        if int(self.n) < 2:
            raise ValueError("n_periods >= 2 required")
        if mu0.size < 2:
            raise ValueError("n_assets >= 2 required")
        if sigma0.shape != (mu0.size, mu0.size):
            raise ValueError("sigma0 must be k x k with k = len(mu0)")
        if not np.all(np.isfinite(mu0)) or not np.all(np.isfinite(sigma0)):
            raise ValueError("mu0 and sigma0 must be finite")
        chol = _spd_cholesky(sigma0, what="sigma0")
        mu0.flags.writeable = False
        sigma0.flags.writeable = False
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "sigma0", sigma0)
        object.__setattr__(self, "_chol", chol)

    @property
    def k(self) -> int:
        return self.mu0.size

    @classmethod
    def from_dict(cls, spec: dict) -> "SynthSpec":
        out = cls(n=spec["n"], mu0=spec["mu0"], sigma0=spec["sigma0"])
        if "k" in spec and int(spec["k"]) != out.k:
            raise ValueError("k in spec does not match len(mu0)")
        return out


def synth_market(spec: SynthSpec, seed: int) -> ReturnMatrix:
    """Draw n i.i.d. multivariate-normal return rows, deterministically."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((spec.n, spec.k))
    values = (spec.mu0 - 1.0) + z @ spec._chol.T
    return ReturnMatrix(values)


def subset(params: MarketParams, indices) -> MarketParams:
    """Restrict mu and sigma to the selected assets."""
    idx = [int(i) for i in indices]
    if len(idx) < 2:
        raise ValueError("at least 2 distinct indices required")
    if len(set(idx)) != len(idx):
        raise ValueError("duplicate asset index")
    if any(i < 0 or i >= params.k for i in idx):
        raise ValueError("asset index out of range")
    return MarketParams(params.mu[idx], params.sigma[np.ix_(idx, idx)])
