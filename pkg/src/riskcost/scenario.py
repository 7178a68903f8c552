"""Return matrices, the Wishart interaction matrix and the risk-with-cost objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, UsageError
from .market import AssetEnsemble, rng_from

__all__ = [
    "ReturnMatrix",
    "WishartMatrix",
    "RETURN_DISTRIBUTIONS",
    "DENSE_CAP",
    "generate_returns",
    "build_wishart",
    "risk",
    "cost",
    "hamiltonian",
    "budget_residual",
    "is_feasible",
    "save_matrix",
]

RETURN_DISTRIBUTIONS = ("gaussian", "two-point")
DENSE_CAP = 2000


@dataclass(frozen=True, eq=False)
class ReturnMatrix:
    """Rescaled modified returns ``X[i, mu] = x_{i mu} / sqrt(N)``; rows are assets."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2:
            raise UsageError("return matrix must be 2-d (assets x periods)")

    @property
    def n_assets(self) -> int:
        return self.values.shape[0]

    @property
    def n_periods(self) -> int:
        return self.values.shape[1]

    @property
    def alpha(self) -> float:
        return self.n_periods / self.n_assets


class WishartMatrix:
    """``J = X X^T``, stored densely when ``N <= dense_cap`` and otherwise only through ``X``.

    ``matvec`` always works; ``dense`` materializes on demand.
    """

    def __init__(self, returns: ReturnMatrix, dense_cap: int = DENSE_CAP):
        self.returns = returns
        self.dense_cap = dense_cap
        self._dense = None
        if returns.n_assets <= dense_cap:
            self._dense = _gram(returns.values)

    @classmethod
    def from_dense(cls, J) -> "WishartMatrix":
        """Wrap an explicit symmetric matrix (no underlying return matrix)."""
        J = np.array(J, dtype=float)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise UsageError("J must be square")
        self = cls.__new__(cls)
        self.returns = None
        self.dense_cap = J.shape[0]
        self._dense = J
        return self

    @property
    def n(self) -> int:
        if self._dense is not None:
            return self._dense.shape[0]
        return self.returns.n_assets

    @property
    def materialized(self) -> bool:
        return self._dense is not None

    @property
    def dense(self) -> np.ndarray:
        if self._dense is None:
            return _gram(self.returns.values)
        return self._dense

    def matvec(self, w: np.ndarray) -> np.ndarray:
        if self._dense is not None:
            return self._dense @ w
        X = self.returns.values
        return X @ (X.T @ w)


def _gram(X: np.ndarray) -> np.ndarray:
    J = X @ X.T
    # BLAS may leave the two triangles differing in the last bit
    return np.triu(J) + np.triu(J, 1).T


def generate_returns(ensemble: AssetEnsemble, n_periods: int, seed, distribution: str = "gaussian") -> ReturnMatrix:
    """Draw ``p`` periods of i.i.d. returns and center them by the true mean.

    Parameters
    ----------
    ensemble : AssetEnsemble
        Supplies the per-asset variance ``v_i`` (the mean cancels after centering).
    n_periods : int
        Number of periods ``p``.
    seed : int or SeedSequence
        Root of the returns substream.
    distribution : {"gaussian", "two-point"}
        Law of the modified return; ``two-point`` draws ``+-sqrt(v_i)`` with
        equal probability.
    """
    if n_periods < 1:
        raise ConfigurationError(f"need at least one period, got {n_periods}")
    if distribution not in RETURN_DISTRIBUTIONS:
        raise ConfigurationError(f"unknown return distribution {distribution!r}")
    n = ensemble.n_assets
    rng = rng_from(seed, 2)
    sd = np.sqrt(ensemble.variance)[:, None]
    if distribution == "gaussian":
        z = rng.standard_normal((n, n_periods))
    else:
        z = 2.0 * rng.integers(0, 2, size=(n, n_periods)) - 1.0
    return ReturnMatrix(sd * z / np.sqrt(n))


def build_wishart(returns: ReturnMatrix, dense_cap: int = DENSE_CAP) -> WishartMatrix:
    return WishartMatrix(returns, dense_cap=dense_cap)


def _check_dims(w, J, c=None):
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.shape[0] != J.n:
        raise UsageError(f"portfolio has shape {w.shape}, expected ({J.n},)")
    if c is not None:
        c = np.asarray(c, dtype=float)
        if c.shape != w.shape:
            raise UsageError(f"cost vector has shape {c.shape}, expected {w.shape}")
    return w, c


def risk(w, J: WishartMatrix) -> float:
    """``w^T J w / 2``."""
    w, _ = _check_dims(w, J)
    return 0.5 * float(w @ J.matvec(w))


def cost(w, c) -> float:
    """Total purchasing cost ``sum_i w_i c_i``."""
    w = np.asarray(w, dtype=float)
    c = np.asarray(c, dtype=float)
    if w.shape != c.shape:
        raise UsageError(f"cost vector has shape {c.shape}, expected {w.shape}")
    return float(c @ w)


def hamiltonian(w, J: WishartMatrix, c, eta: float) -> float:
    """Risk with cost ``w^T J w / 2 + eta c^T w`` (not divided by ``N``)."""
    w, c = _check_dims(w, J, c)
    return 0.5 * float(w @ J.matvec(w)) + eta * float(c @ w)


def budget_residual(w) -> float:
    """``sum_i w_i - N``."""
    w = np.asarray(w, dtype=float)
    return float(w.sum() - w.size)


def is_feasible(w, rtol: float = 1e-6) -> bool:
    w = np.asarray(w, dtype=float)
    return abs(budget_residual(w)) <= rtol * w.size


def save_matrix(path, matrix) -> None:
    """Dump a matrix as whitespace-separated text, 15 significant digits."""
    if isinstance(matrix, ReturnMatrix):
        matrix = matrix.values
    elif isinstance(matrix, WishartMatrix):
        matrix = matrix.dense
    np.savetxt(path, np.asarray(matrix), fmt="%.15g")
