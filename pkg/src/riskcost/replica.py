"""Closed-form typical-case predictions.

Quenched results (optimize per disorder sample, then average) come from the
replica-symmetric ground state; annealed results (average the objective,
then optimize) are the operations-research baseline.  Every formula is a
function of the bracket averages in :class:`~riskcost.market.EnsembleStats`
and the period ratio ``alpha = p / N``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .exact import QuenchedMoments
from .market import EnsembleStats

__all__ = [
    "CostStatistics",
    "OrderParameters",
    "ReplicaPrediction",
    "cost_statistics",
    "replica_epsilon",
    "replica_qw",
    "concentration_shift",
    "annealed_epsilon",
    "annealed_qw",
    "order_parameters",
    "predicted_inverse_moments",
    "return_variant_epsilon",
    "predict",
    "theory_table",
    "write_theory_table",
    "THEORY_COLUMNS",
]

ALPHA_WARN_MARGIN = 1e-3


@dataclass(frozen=True)
class CostStatistics:
    """Cost spread measures under the ``1/v`` and ``1/v**2`` asset weightings.

    ``var_c`` and ``var_cc`` are weighted variances of ``c``; ``delta_c`` is
    the difference of the two weighted means and may have either sign.
    """

    var_c: float
    delta_c: float
    var_cc: float


def cost_statistics(stats: EnsembleStats) -> CostStatistics:
    if not (stats.inv_v > 0 and stats.inv_v2 > 0):
        raise DomainError("<v^-1> and <v^-2> must be positive")
    mean1 = stats.inv_v_c / stats.inv_v
    mean2 = stats.inv_v2_c / stats.inv_v2
    return CostStatistics(
        var_c=stats.inv_v_c2 / stats.inv_v - mean1**2,
        delta_c=mean1 - mean2,
        var_cc=stats.inv_v2_c2 / stats.inv_v2 - mean2**2,
    )


def _quenched_alpha(alpha: float) -> float:
    if not alpha > 1:
        raise DomainError(f"quenched formulas need alpha > 1, got {alpha}")
    if alpha < 1 + ALPHA_WARN_MARGIN:
        warnings.warn(f"alpha={alpha} is within {ALPHA_WARN_MARGIN} of the phase boundary", RuntimeWarning, stacklevel=3)
    return alpha - 1.0


def _annealed_alpha(alpha: float) -> float:
    if not alpha > 0:
        raise DomainError(f"annealed formulas need alpha > 0, got {alpha}")
    return alpha


def replica_epsilon(stats: EnsembleStats, cs: CostStatistics, alpha: float, eta: float) -> float:
    """Minimal risk with cost per asset (quenched)."""
    a1 = _quenched_alpha(alpha)
    return (
        a1 / (2.0 * stats.inv_v)
        + eta * stats.inv_v_c / stats.inv_v
        - eta**2 * stats.inv_v * cs.var_c / (2.0 * a1)
    )


def concentration_shift(stats: EnsembleStats, cs: CostStatistics, alpha: float, eta: float) -> float:
    """Cost-induced part of the quenched concentration, quadratic in ``eta``."""
    a1 = _quenched_alpha(alpha)
    return (
        eta**2 * stats.inv_v**2 * cs.var_c / a1**3
        + 2.0 * eta / a1 * stats.inv_v2 / stats.inv_v * cs.delta_c
        + eta**2 * stats.inv_v2 * (cs.var_cc + cs.delta_c**2) / a1**2
    )


def replica_qw(stats: EnsembleStats, cs: CostStatistics, alpha: float, eta: float) -> float:
    """Investment concentration of the quenched optimum."""
    a1 = _quenched_alpha(alpha)
    return 1.0 / a1 + stats.inv_v2 / stats.inv_v**2 + concentration_shift(stats, cs, alpha, eta)


def annealed_epsilon(stats: EnsembleStats, cs: CostStatistics, alpha: float, eta: float) -> float:
    """Minimum over the budget set of the disorder-averaged objective, per asset."""
    a = _annealed_alpha(alpha)
    return (
        a / (2.0 * stats.inv_v)
        + eta * stats.inv_v_c / stats.inv_v
        - eta**2 * stats.inv_v * cs.var_c / (2.0 * a)
    )


def annealed_qw(stats: EnsembleStats, cs: CostStatistics, alpha: float, eta: float) -> float:
    a = _annealed_alpha(alpha)
    return (
        stats.inv_v2 / stats.inv_v**2
        + eta**2 * stats.inv_v2 * (cs.var_cc + cs.delta_c**2) / a**2
        + 2.0 * eta / a * stats.inv_v2 / stats.inv_v * cs.delta_c
    )


@dataclass(frozen=True)
class OrderParameters:
    """Zero-temperature order parameters, rescaled by powers of the inverse temperature so they stay finite.

    ``chi_w_hat`` is ``beta * chi_w``, ``chi_s_hat`` is ``beta * chi_s``,
    ``chi_s_tilde_hat`` is ``chi~_s / beta``, ``q_s_tilde_hat`` is
    ``q~_s / beta**2`` and ``k_hat`` is ``k / beta``.  ``chi~_w`` and ``q~_w``
    vanish identically and are omitted.
    """

    chi_w_hat: float
    q_w: float
    chi_s_hat: float
    q_s: float
    chi_s_tilde_hat: float
    q_s_tilde_hat: float
    k_hat: float


def order_parameters(stats: EnsembleStats, cs: CostStatistics, alpha: float, eta: float) -> OrderParameters:
    a1 = _quenched_alpha(alpha)
    bracket = 1.0 / stats.inv_v + eta**2 * stats.inv_v * cs.var_c / a1**2
    return OrderParameters(
        chi_w_hat=stats.inv_v / a1,
        q_w=replica_qw(stats, cs, alpha, eta),
        chi_s_hat=1.0 / a1,
        q_s=alpha / a1 * bracket,
        chi_s_tilde_hat=a1,
        q_s_tilde_hat=a1 * bracket,
        k_hat=a1 / stats.inv_v + eta * stats.inv_v_c / stats.inv_v,
    )


def predicted_inverse_moments(stats: EnsembleStats, alpha: float) -> QuenchedMoments:
    """Large-N values of the six ``J^-1`` / ``J^-2`` moments."""
    a1 = _quenched_alpha(alpha)
    return QuenchedMoments(
        m1=stats.inv_v / a1,
        m2=stats.inv_v_c / a1,
        m3=stats.inv_v_c2 / a1,
        m4=stats.inv_v**2 / a1**3 + stats.inv_v2 / a1**2,
        m5=stats.inv_v * stats.inv_v_c / a1**3 + stats.inv_v2_c / a1**2,
        m6=stats.inv_v * stats.inv_v_c2 / a1**3 + stats.inv_v2_c2 / a1**2,
    )


def return_variant_epsilon(stats: EnsembleStats, alpha: float, g: float, eta: float) -> float:
    """Minimal risk per asset when the objective also rewards expected return with weight ``g``.

    The linear term becomes ``(eta c - g r)^T w``; ``g = 0`` gives
    :func:`replica_epsilon` and ``eta = 0`` the pure risk-with-return case.
    """
    a1 = _quenched_alpha(alpha)
    iv = stats.inv_v
    mixed = eta**2 * stats.inv_v_c2 - 2.0 * eta * g * stats.inv_v_cr + g**2 * stats.inv_v_r2
    shift = eta * stats.inv_v_c / iv - g * stats.inv_v_r / iv
    spread = mixed / iv - shift**2
    return a1 / (2.0 * iv) + shift - iv * spread / (2.0 * a1)


@dataclass(frozen=True)
class ReplicaPrediction:
    alpha: float
    eta: float
    epsilon_quenched: float
    qw_quenched: float
    epsilon_annealed: float
    qw_annealed: float
    order: OrderParameters | None = None


def predict(stats: EnsembleStats, alpha: float, eta: float, with_order: bool = False) -> ReplicaPrediction:
    cs = cost_statistics(stats)
    return ReplicaPrediction(
        alpha=alpha,
        eta=eta,
        epsilon_quenched=replica_epsilon(stats, cs, alpha, eta),
        qw_quenched=replica_qw(stats, cs, alpha, eta),
        epsilon_annealed=annealed_epsilon(stats, cs, alpha, eta),
        qw_annealed=annealed_qw(stats, cs, alpha, eta),
        order=order_parameters(stats, cs, alpha, eta) if with_order else None,
    )


THEORY_COLUMNS = ("eta", "eps_replica", "qw_replica", "eps_annealed", "qw_annealed")


def theory_table(stats: EnsembleStats, alpha: float, etas) -> np.ndarray:
    """Rows of ``eta, eps_quenched, qw_quenched, eps_annealed, qw_annealed``."""
    rows = []
    for eta in np.asarray(etas, dtype=float):
        p = predict(stats, alpha, float(eta))
        rows.append((eta, p.epsilon_quenched, p.qw_quenched, p.epsilon_annealed, p.qw_annealed))
    return np.array(rows, dtype=float).reshape(-1, len(THEORY_COLUMNS))


def write_theory_table(path, stats: EnsembleStats, alpha: float, etas) -> None:
    np.savetxt(
        path,
        theory_table(stats, alpha, etas),
        fmt="%.9g",
        delimiter="\t",
        header="\t".join(THEORY_COLUMNS),
        comments="",
    )
