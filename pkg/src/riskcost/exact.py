"""Exact minimizer of the Lagrange function by symmetric positive definite solves.

No inverse of ``J`` is ever formed: the six bilinear moments come from the
solutions of ``J y = e``, ``J z = c`` and ``J y2 = y``, ``J z2 = z``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import SingularityError, UsageError
from .scenario import WishartMatrix, hamiltonian

__all__ = [
    "QuenchedMoments",
    "OptimizationOutcome",
    "WishartSolver",
    "PIVOT_RTOL",
    "quenched_moments",
    "lagrange_epsilon",
    "lagrange_qw",
    "lagrange_multiplier",
    "optimal_portfolio_closed_form",
]

PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class QuenchedMoments:
    """``m1..m6``: ``e'J^-1 e``, ``e'J^-1 c``, ``c'J^-1 c``, then the same with ``J^-2``; all divided by ``N``."""

    m1: float
    m2: float
    m3: float
    m4: float
    m5: float
    m6: float

    def as_tuple(self):
        return (self.m1, self.m2, self.m3, self.m4, self.m5, self.m6)


@dataclass(frozen=True, eq=False)
class OptimizationOutcome:
    """Optimal (or approximately optimal) portfolio for one disorder sample.

    Attributes
    ----------
    w : ndarray
        Portfolio weights.
    k : float
        Lagrange multiplier of the budget constraint.
    epsilon : float
        Realized risk with cost per asset, ``H(w) / N``.
    qw : float
        Investment concentration ``|w|^2 / N``.
    eta : float
        Cost tolerance the portfolio was optimized for.
    iterations : int
        Descent iterations used; 0 for the closed form.
    residual : float
        Last descent step size (1-norm); 0 for the closed form.
    """

    w: np.ndarray
    k: float
    epsilon: float
    qw: float
    eta: float
    iterations: int = 0
    residual: float = 0.0

    @property
    def budget_gap(self) -> float:
        return float(self.w.sum() - self.w.size)


class WishartSolver:
    """Factorization of ``J`` reused across right-hand sides.

    Cholesky first; if that fails, LU with a condition-number warning.  A
    pivot ratio below ``PIVOT_RTOL`` is treated as singular.
    """

    def __init__(self, J: WishartMatrix, pivot_rtol: float = PIVOT_RTOL):
        self.n = J.n
        self._kind = None
        if not J.materialized and J.returns is not None:
            self._init_qr(J.returns.values, pivot_rtol)
            return
        A = J.dense
        try:
            self._factor = sla.cho_factor(A, lower=True, check_finite=True)
            pivots = np.diag(self._factor[0]) ** 2
            self._kind = "cholesky"
        except np.linalg.LinAlgError:
            with warnings.catch_warnings():
                # exact zero pivots are reported as SingularityError below
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu, piv = sla.lu_factor(A, check_finite=True)
            self._factor = (lu, piv)
            pivots = np.abs(np.diag(lu))
            self._kind = "lu"
        self._check_pivots(pivots, pivot_rtol)
        if self._kind == "lu":
            cond = np.linalg.cond(A)
            warnings.warn(
                f"J is not numerically positive definite; using LU (condition number {cond:.3g})",
                RuntimeWarning,
                stacklevel=2,
            )

    def _init_qr(self, X, pivot_rtol):
        # X^T = Q R gives J = R^T R without ever forming J
        r = sla.qr(X.T, mode="r", check_finite=True)[0][: self.n]
        self._factor = r
        self._kind = "qr"
        self._check_pivots(np.diag(r) ** 2, pivot_rtol)

    @staticmethod
    def _check_pivots(pivots, rtol):
        pmax = np.max(pivots) if pivots.size else 0.0
        if not np.all(np.isfinite(pivots)) or pmax <= 0 or np.min(pivots) < rtol * pmax:
            raise SingularityError(
                "Wishart matrix is singular or indefinite (alpha <= 1 or degenerate sample)"
            )

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self._kind == "cholesky":
            return sla.cho_solve(self._factor, b)
        if self._kind == "lu":
            return sla.lu_solve(self._factor, b)
        r = self._factor
        tmp = sla.solve_triangular(r, b, trans="T")
        return sla.solve_triangular(r, tmp)


def _first_solves(solver: WishartSolver, c: np.ndarray) -> np.ndarray:
    return solver.solve(np.column_stack([np.ones(solver.n), c]))


def _moments_from(solver: WishartSolver, c: np.ndarray):
    n = solver.n
    e = np.ones(n)
    yz = _first_solves(solver, c)
    y, z = yz[:, 0], yz[:, 1]
    yz2 = solver.solve(yz)
    y2, z2 = yz2[:, 0], yz2[:, 1]
    mom = QuenchedMoments(
        m1=float(e @ y) / n,
        m2=float(e @ z) / n,
        m3=float(c @ z) / n,
        m4=float(e @ y2) / n,
        m5=float(e @ z2) / n,
        m6=float(c @ z2) / n,
    )
    return mom


def _cost_vector(J: WishartMatrix, c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape != (J.n,):
        raise UsageError(f"cost vector has shape {c.shape}, expected ({J.n},)")
    return c


def quenched_moments(J: WishartMatrix, c) -> QuenchedMoments:
    """The six moments of ``J^-1`` and ``J^-2`` in the ``(e, c)`` directions."""
    c = _cost_vector(J, c)
    return _moments_from(WishartSolver(J), c)


def lagrange_multiplier(mom: QuenchedMoments, eta: float) -> float:
    """Budget multiplier ``k* = (1 + eta m2) / m1``."""
    if not mom.m1 > 0:
        raise SingularityError(f"m1 must be positive, got {mom.m1}")
    return (1.0 + eta * mom.m2) / mom.m1


def lagrange_epsilon(mom: QuenchedMoments, eta: float) -> float:
    """Minimal risk with cost per asset from the first three moments."""
    if not mom.m1 > 0:
        raise SingularityError(f"m1 must be positive, got {mom.m1}")
    return 0.5 * (1.0 + eta * mom.m2) ** 2 / mom.m1 - 0.5 * eta**2 * mom.m3


def lagrange_qw(mom: QuenchedMoments, eta: float) -> float:
    """Investment concentration of the optimum from all six moments."""
    if not (mom.m1 > 0 and mom.m4 > 0):
        raise SingularityError(f"m1 and m4 must be positive, got {mom.m1}, {mom.m4}")
    ratio5 = mom.m5 / mom.m4
    lead = 1.0 / mom.m1 + eta * (mom.m2 / mom.m1 - ratio5)
    return mom.m4 * lead**2 + eta**2 * mom.m4 * (mom.m6 / mom.m4 - ratio5**2)


def optimal_portfolio_closed_form(J: WishartMatrix, c, eta: float, solver: WishartSolver | None = None) -> OptimizationOutcome:
    """``w* = J^-1 (k* e - eta c)`` with ``k*`` fixed by the budget.

    Pass a prebuilt ``solver`` to reuse one factorization across several
    ``eta`` values.
    """
    c = _cost_vector(J, c)
    solver = solver if solver is not None else WishartSolver(J)
    n = J.n
    yz = _first_solves(solver, c)
    y, z = yz[:, 0], yz[:, 1]
    m1 = float(y.sum()) / n
    m2 = float(z.sum()) / n
    if not m1 > 0:
        raise SingularityError(f"m1 must be positive, got {m1}")
    k = (1.0 + eta * m2) / m1
    w = k * y - eta * z
    return OptimizationOutcome(
        w=w,
        k=k,
        epsilon=hamiltonian(w, J, c, eta) / n,
        qw=float(w @ w) / n,
        eta=eta,
    )
