"""Quick invariant checks backing ``riskcost validate``.

Each check returns ``(name, passed, detail)``.  Sizes are kept small so the
whole suite runs in well under a minute; the pytest suite holds the
full-scale versions.
"""

from __future__ import annotations

import numpy as np

from .descent import DescentConfig, Instance, lagrangian, lagrangian_gradient, run_descent
from .exact import lagrange_epsilon, lagrange_qw, optimal_portfolio_closed_form, quenched_moments
from .experiment import ExperimentConfig, run_sweep
from .market import DEFAULT_PARETO, analytic_stats, ensemble_stats, generate_ensemble, inverse_pareto_sample, pareto_moment
from .replica import (
    annealed_epsilon,
    cost_statistics,
    predicted_inverse_moments,
    replica_epsilon,
    replica_qw,
    return_variant_epsilon,
)
from .scenario import build_wishart, generate_returns

__all__ = ["CHECKS", "run_checks"]


def _instance(n, alpha, seed, eta=0.0):
    ens = generate_ensemble(DEFAULT_PARETO, DEFAULT_PARETO, n, seed)
    J = build_wishart(generate_returns(ens, int(alpha * n), seed))
    return ens, J


def check_sampler(seed=0):
    draws = inverse_pareto_sample(DEFAULT_PARETO, np.random.default_rng(seed).random(200_000))
    worst = 0.0
    for n in (-2, -1, 1, 2):
        x = draws**n
        z = abs(x.mean() - pareto_moment(DEFAULT_PARETO, n)) / (x.std(ddof=1) / np.sqrt(x.size))
        worst = max(worst, z)
    return "sampler moments", worst < 3.0, f"max |z| = {worst:.2f} (limit 3)"


def check_gradient(seed=1):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        ens, J = _instance(20, 3, int(rng.integers(1 << 30)))
        eta = float(rng.uniform(0, 10))
        inst = Instance(J, ens.cost, eta)
        w, k = rng.normal(1, 1, 20), float(rng.normal())
        d, dk = rng.normal(size=20), float(rng.normal())
        h = 1e-6
        fd = (lagrangian(w + h * d, k + h * dk, inst) - lagrangian(w - h * d, k - h * dk, inst)) / (2 * h)
        gw, gk = lagrangian_gradient(w, k, J, ens.cost, eta)
        an = gw @ d + gk * dk
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-12))
    return "gradient vs finite differences", worst < 1e-6, f"max rel err = {worst:.2e}"


def check_closed_form(seed=2):
    worst = 0.0
    for s in range(5):
        ens, J = _instance(60, 3, seed * 100 + s)
        mom = quenched_moments(J, ens.cost)
        for eta in (0.0, 3.0, 30.0):
            out = optimal_portfolio_closed_form(J, ens.cost, eta)
            worst = max(
                worst,
                abs(out.epsilon - lagrange_epsilon(mom, eta)) / abs(out.epsilon),
                abs(out.qw - lagrange_qw(mom, eta)) / out.qw,
            )
    return "closed form vs moment formulas", worst < 1e-8, f"max rel err = {worst:.2e}"


def check_descent(seed=3):
    worst_e = worst_w = 0.0
    for s in range(3):
        ens, J = _instance(50, 3, seed * 100 + s)
        for eta in (0.0, 5.0):
            cf = optimal_portfolio_closed_form(J, ens.cost, eta)
            ds = run_descent(Instance(J, ens.cost, eta), DescentConfig(delta=1e-7))
            worst_e = max(worst_e, abs(cf.epsilon - ds.epsilon))
            worst_w = max(worst_w, float(np.abs(cf.w - ds.w).max()))
    ok = worst_e <= 1e-5 and worst_w <= 1e-4
    return "descent vs closed form", ok, f"eps gap {worst_e:.2e}, w gap {worst_w:.2e}"


def check_moment_chaining():
    stats = analytic_stats(DEFAULT_PARETO, DEFAULT_PARETO)
    cs = cost_statistics(stats)
    worst = 0.0
    for alpha in (1.5, 3.0, 7.0):
        mom = predicted_inverse_moments(stats, alpha)
        for eta in (0.0, 1.0, 10.0, 100.0):
            e, q = replica_epsilon(stats, cs, alpha, eta), replica_qw(stats, cs, alpha, eta)
            worst = max(worst, abs(lagrange_epsilon(mom, eta) - e) / abs(e), abs(lagrange_qw(mom, eta) - q) / q)
    return "predicted moments chain to replica formulas", worst < 1e-12, f"max rel err = {worst:.2e}"


def check_moments(seed=4):
    ens = generate_ensemble(DEFAULT_PARETO, DEFAULT_PARETO, 300, seed)
    pred = predicted_inverse_moments(ensemble_stats(ens), 3.0).as_tuple()
    emp = np.mean(
        [quenched_moments(build_wishart(generate_returns(ens, 900, (seed, s))), ens.cost).as_tuple() for s in range(5)],
        axis=0,
    )
    worst = float(np.max(np.abs(emp / np.array(pred) - 1)))
    return "empirical inverse moments", worst < 0.05, f"max rel dev = {worst:.3f} (limit 0.05)"


def check_quenched_below_annealed():
    stats = analytic_stats(DEFAULT_PARETO, DEFAULT_PARETO)
    cs = cost_statistics(stats)
    ok = all(
        replica_epsilon(stats, cs, a, eta) < annealed_epsilon(stats, cs, a, eta)
        for a in (1.5, 2.0, 3.0, 5.0)
        for eta in (0.0, 1.0, 10.0, 50.0)
    )
    return "quenched < annealed", ok, "alpha in {1.5,2,3,5} x eta in {0,1,10,50}"


def check_limits():
    stats = analytic_stats(DEFAULT_PARETO, DEFAULT_PARETO)
    cs = cost_statistics(stats)
    e0 = replica_epsilon(stats, cs, 3.0, 0.0)
    q0 = replica_qw(stats, cs, 3.0, 0.0)
    ok = e0 == 2.0 / (2 * stats.inv_v) and q0 == 0.5 + stats.inv_v2 / stats.inv_v**2
    etas = np.linspace(100, 1000, 10)
    ratio = [replica_epsilon(stats, cs, 3.0, e) / e for e in etas]
    ok = ok and bool(np.all(np.diff(ratio) < 0))
    ok = ok and all(
        abs(return_variant_epsilon(stats, 3.0, 0.0, e) - replica_epsilon(stats, cs, 3.0, e)) <= 1e-12 * abs(replica_epsilon(stats, cs, 3.0, e))
        for e in (0.0, 5.0, 50.0)
    )
    return "limits (eta -> 0, eta -> inf, g = 0)", ok, ""


def check_sweep(seed=5):
    cfg = ExperimentConfig(
        n_assets=150, n_periods=450, trials=10, eta_min=0, eta_max=40, eta_step=20, solver="closed-form", seed=seed
    )
    res = run_sweep(cfg)
    worst = 0.0
    for r in res.records:
        tol = max(3 * r.epsilon.stderr, 0.02 * abs(r.eps_replica))
        worst = max(worst, abs(r.epsilon.mean - r.eps_replica) / tol)
    return "reduced sweep vs theory", worst <= 1.0, f"max deviation / tolerance = {worst:.2f}"


CHECKS = (
    check_sampler,
    check_gradient,
    check_closed_form,
    check_descent,
    check_moment_chaining,
    check_moments,
    check_quenched_below_annealed,
    check_limits,
    check_sweep,
)


def run_checks(out=print):
    results = []
    for check in CHECKS:
        name, ok, detail = check()
        results.append((name, ok, detail))
        out(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else ""))
    return results
