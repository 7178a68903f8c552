"""Saddle-point steepest descent on the Lagrange function.

``w`` descends and the budget multiplier ``k`` ascends, both gradients taken
at the current iterate (a simultaneous update).  The run stops once the
1-norm of the change in ``(w, k)`` drops below ``delta``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DivergenceError, NonConvergenceError, UsageError
from .exact import OptimizationOutcome
from .scenario import WishartMatrix, hamiltonian

__all__ = [
    "DescentConfig",
    "DescentState",
    "Instance",
    "lagrangian",
    "lagrangian_gradient",
    "descent_step",
    "estimate_lambda_max",
    "run_descent",
]


@dataclass(frozen=True)
class DescentConfig:
    gamma_w: float = 1e-3
    gamma_k: float = 1e-3
    delta: float = 1e-6
    max_iter: int = 10_000_000
    scaled_criterion: bool = False
    w0: np.ndarray | None = None
    k0: float = 1.0

    def __post_init__(self):
        for name in ("gamma_w", "gamma_k", "delta"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True, eq=False)
class DescentState:
    t: int
    w: np.ndarray
    k: float
    delta: float = np.inf


@dataclass(frozen=True, eq=False)
class Instance:
    """One optimization problem: Wishart matrix, cost vector, cost tolerance."""

    J: WishartMatrix
    c: np.ndarray
    eta: float

    def __post_init__(self):
        if np.shape(self.c) != (self.J.n,):
            raise UsageError(f"cost vector has shape {np.shape(self.c)}, expected ({self.J.n},)")

    @property
    def n(self) -> int:
        return self.J.n


def lagrangian(w, k: float, inst: Instance) -> float:
    w = np.asarray(w, dtype=float)
    return hamiltonian(w, inst.J, inst.c, inst.eta) + k * (w.size - w.sum())


def lagrangian_gradient(w, k: float, J: WishartMatrix, c, eta: float):
    """Return ``(dL/dw, dL/dk) = (J w + eta c - k e, N - e'w)``."""
    w = np.asarray(w, dtype=float)
    c = np.asarray(c, dtype=float)
    if w.shape != (J.n,) or c.shape != (J.n,):
        raise UsageError(f"expected vectors of length {J.n}, got {w.shape} and {c.shape}")
    grad_w = J.matvec(w) + eta * c - k
    grad_k = w.size - float(w.sum())
    return grad_w, grad_k


def descent_step(state: DescentState, cfg: DescentConfig, inst: Instance) -> DescentState:
    """One simultaneous update; ``delta`` of the result is the step's 1-norm."""
    # overflow shows up as non-finite values and is reported below
    with np.errstate(over="ignore", invalid="ignore"):
        gw, gk = lagrangian_gradient(state.w, state.k, inst.J, inst.c, inst.eta)
        dw = cfg.gamma_w * gw
        dk = cfg.gamma_k * gk
        w = state.w - dw
        k = state.k + dk
    if not (np.all(np.isfinite(w)) and np.isfinite(k)):
        raise DivergenceError(f"non-finite iterate at iteration {state.t + 1}", iteration=state.t + 1)
    return DescentState(t=state.t + 1, w=w, k=k, delta=float(np.abs(dw).sum()) + abs(dk))


def estimate_lambda_max(J: WishartMatrix, iters: int = 100, seed: int = 0) -> float:
    """Power-iteration estimate of the largest eigenvalue of ``J``."""
    x = np.random.default_rng(seed).standard_normal(J.n)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        y = J.matvec(x)
        lam = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0
        x = y / norm
    return lam


def run_descent(
    inst: Instance,
    cfg: DescentConfig = DescentConfig(),
    trace=None,
    trace_every: int = 1000,
    check_stability: bool = True,
) -> OptimizationOutcome:
    """Iterate until the step 1-norm falls below ``cfg.delta`` (per asset if ``scaled_criterion``).

    Parameters
    ----------
    inst : Instance
    cfg : DescentConfig
    trace : writable text stream, optional
        Receives ``iteration delta lagrangian budget_residual`` rows every
        ``trace_every`` iterations and at the final iterate.
    check_stability : bool
        Warn when ``gamma_w * lambda_max(J) >= 2``.

    Raises
    ------
    DivergenceError
        Some component became non-finite.
    NonConvergenceError
        ``cfg.max_iter`` reached; the exception carries the last state.
    """
    n = inst.n
    if check_stability:
        lam = estimate_lambda_max(inst.J)
        if cfg.gamma_w * lam >= 2.0:
            warnings.warn(
                f"gamma_w * lambda_max = {cfg.gamma_w * lam:.3g} >= 2; descent is likely to diverge",
                RuntimeWarning,
                stacklevel=2,
            )
    w0 = np.ones(n) if cfg.w0 is None else np.array(cfg.w0, dtype=float)
    if w0.shape != (n,):
        raise UsageError(f"initial portfolio has shape {w0.shape}, expected ({n},)")

    J, c, eta = inst.J, np.asarray(inst.c, dtype=float), inst.eta
    dense = J.dense if J.materialized else None
    gw_, gk_ = cfg.gamma_w, cfg.gamma_k
    eta_c = eta * c
    threshold = cfg.delta * n if cfg.scaled_criterion else cfg.delta
    if trace is not None:
        trace.write("iteration delta lagrangian budget_residual\n")

    with np.errstate(over="ignore", invalid="ignore"):
        w, k, t, delta = _iterate(w0, float(cfg.k0), n, dense, J, eta_c, gw_, gk_, threshold, cfg.max_iter, inst, trace, trace_every)
    return OptimizationOutcome(
        w=w,
        k=k,
        epsilon=hamiltonian(w, J, c, eta) / n,
        qw=float(w @ w) / n,
        eta=eta,
        iterations=t,
        residual=delta,
    )


# inlined descent_step: this loop is the hot path
def _iterate(w, k, n, dense, J, eta_c, gw_, gk_, threshold, max_iter, inst, trace, trace_every):
    t = 0
    while True:
        Jw = dense @ w if dense is not None else J.matvec(w)
        dw = gw_ * (Jw + eta_c - k)
        dk = gk_ * (n - w.sum())
        w = w - dw
        k = k + dk
        t += 1
        delta = float(np.abs(dw).sum()) + abs(dk)
        if not np.isfinite(delta) or not np.isfinite(k):
            raise DivergenceError(f"non-finite iterate at iteration {t}", iteration=t)
        done = delta < threshold
        if trace is not None and (t % trace_every == 0 or done):
            L = lagrangian(w, k, inst)
            trace.write(f"{t} {delta:.9g} {L:.12g} {w.sum() - n:.9g}\n")
        if done:
            break
        if t >= max_iter:
            raise NonConvergenceError(
                f"no convergence after {t} iterations (last delta={delta:.3g})",
                state=DescentState(t=t, w=w, k=k, delta=delta),
            )
    return w, k, t, delta


def warm_config(cfg: DescentConfig, previous: OptimizationOutcome) -> DescentConfig:
    """Config that starts from a previous optimum (used when stepping along an eta grid)."""
    return replace(cfg, w0=previous.w, k0=previous.k)
