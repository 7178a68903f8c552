import io

import numpy as np
import pytest

from riskcost.descent import (
    DescentConfig,
    DescentState,
    Instance,
    descent_step,
    estimate_lambda_max,
    lagrangian,
    lagrangian_gradient,
    run_descent,
)
from riskcost.errors import ConfigurationError, DivergenceError, NonConvergenceError, UsageError
from riskcost.exact import optimal_portfolio_closed_form
from riskcost.market import point_mass_ensemble
from riskcost.scenario import WishartMatrix, build_wishart, generate_returns


def eye(n):
    return WishartMatrix.from_dense(np.eye(n))


def test_gradient_stationary_and_linear_terms():
    gw, gk = lagrangian_gradient(np.ones(4), 1.0, eye(4), np.full(4, 3.0), 0.0)
    assert np.all(gw == 0) and gk == 0
    c = np.array([1.0, -2.0, 0.5])
    gw, gk = lagrangian_gradient(np.zeros(3), 0.0, eye(3), c, 1.0)
    np.testing.assert_array_equal(gw, c)
    assert gk == 3


def test_gradient_dimension_check():
    with pytest.raises(UsageError):
        lagrangian_gradient(np.ones(2), 0.0, eye(3), np.ones(3), 1.0)


@pytest.mark.parametrize("seed", range(10))
def test_gradient_central_differences(problem, seed):
    rng = np.random.default_rng(seed)
    ens, J = problem(20, 3, seed)
    eta = rng.uniform(0, 20)
    inst = Instance(J, ens.cost, eta)
    w, k = rng.normal(1, 1, 20), rng.normal()
    d, dk = rng.normal(size=20), rng.normal()
    h = 1e-6
    fd = (lagrangian(w + h * d, k + h * dk, inst) - lagrangian(w - h * d, k - h * dk, inst)) / (2 * h)
    gw, gk = lagrangian_gradient(w, k, J, ens.cost, eta)
    assert fd == pytest.approx(gw @ d + gk * dk, rel=1e-6)


def test_gradient_factored_path(problem, rng):
    ens, J = problem(40, 3, 1)
    lazy = build_wishart(J.returns, dense_cap=1)
    w = rng.normal(size=40)
    a = lagrangian_gradient(w, 0.3, J, ens.cost, 2.0)[0]
    b = lagrangian_gradient(w, 0.3, lazy, ens.cost, 2.0)[0]
    np.testing.assert_allclose(a, b, rtol=1e-10)


def test_step_hand_iteration():
    cfg = DescentConfig()
    inst = Instance(eye(3), np.ones(3), 0.0)
    s = descent_step(DescentState(0, np.zeros(3), 1.0), cfg, inst)
    np.testing.assert_allclose(s.w, np.full(3, 1e-3))
    # budget gap N - e'w = 3 at the start, so k ascends by gamma_k * 3
    assert s.k == pytest.approx(1.0 + 3e-3)
    assert s.t == 1 and s.delta == pytest.approx(3e-3 + 3e-3)


def test_step_at_stationary_point():
    s0 = DescentState(5, np.ones(3), 1.0)
    s = descent_step(s0, DescentConfig(), Instance(eye(3), np.ones(3), 0.0))
    assert s.delta == 0 and np.array_equal(s.w, s0.w) and s.k == s0.k


def test_step_k_sign():
    inst = Instance(eye(2), np.zeros(2), 0.0)
    s = descent_step(DescentState(0, np.array([2.0, 2.0]), 0.0), DescentConfig(gamma_k=0.1), inst)
    # e'w = 4 > N = 2, so k decreases by gamma_k * (N - e'w)
    assert s.k == pytest.approx(-0.2)


def test_step_divergence():
    inst = Instance(WishartMatrix.from_dense(np.eye(2) * 1e308), np.zeros(2), 0.0)
    with pytest.raises(DivergenceError) as info:
        descent_step(DescentState(0, np.full(2, 1e10), 0.0), DescentConfig(gamma_w=1.0), inst)
    assert info.value.iteration == 1


def test_run_identity():
    out = run_descent(Instance(eye(10), np.ones(10), 0.0), DescentConfig(w0=np.zeros(10)))
    np.testing.assert_allclose(out.w, np.ones(10), atol=1e-4)
    assert out.epsilon == pytest.approx(0.5, abs=1e-4)
    assert out.residual < 1e-6 and out.iterations > 0


def test_run_matches_closed_form_default_config(problem):
    ens, J = problem(100, 3, 17)
    cf = optimal_portfolio_closed_form(J, ens.cost, 2.0)
    out = run_descent(Instance(J, ens.cost, 2.0))
    assert np.max(np.abs(out.w - cf.w)) <= 1e-4
    assert abs(out.epsilon - cf.epsilon) <= 1e-5


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("eta", [0.0, 5.0, 20.0])
def test_run_agrees_within_ten_delta(problem, seed, eta):
    delta = 1e-7
    ens, J = problem(80, 3, 100 + seed)
    cf = optimal_portfolio_closed_form(J, ens.cost, eta)
    out = run_descent(Instance(J, ens.cost, eta), DescentConfig(delta=delta))
    assert abs(out.epsilon - cf.epsilon) <= 10 * delta
    # q_w grows like |w|^2, so its gap is bounded relative to its size
    assert abs(out.qw - cf.qw) <= 10 * delta * cf.qw


def test_uniform_ensemble_epsilon_near_replica():
    # unit variances: quenched eps at eta = 0 is (alpha - 1) / 2 = 1
    ens = point_mass_ensemble(500)
    vals = []
    for seed in range(20):
        J = build_wishart(generate_returns(ens, 1500, seed))
        vals.append(run_descent(Instance(J, ens.cost, 0.0), DescentConfig(scaled_criterion=True)).epsilon)
    vals = np.array(vals)
    se = vals.std(ddof=1) / np.sqrt(vals.size)
    assert abs(vals.mean() - 1.0) <= max(3 * se, 2e-3)


def test_budget_residual_decays(problem):
    # |e'w - N| is a damped oscillation (k overshoots), not a monotone
    # sequence; its running maximum over successive quarters must shrink
    ens, J = problem(60, 3, 4)
    buf = io.StringIO()
    run_descent(Instance(J, ens.cost, 3.0), trace=buf, trace_every=25)
    rows = np.loadtxt(io.StringIO(buf.getvalue()), skiprows=1)
    gap = np.abs(rows[:, 3])
    window_max = [chunk.max() for chunk in np.array_split(gap, 4)]
    assert np.all(np.diff(window_max) < 0)
    assert gap[-1] < 1e-3 * gap.max()
    assert rows[-1, 1] < 1e-6


def test_trace_format(problem):
    ens, J = problem(30, 3, 2)
    buf = io.StringIO()
    out = run_descent(Instance(J, ens.cost, 1.0), trace=buf, trace_every=500)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "iteration delta lagrangian budget_residual"
    assert int(lines[-1].split()[0]) == out.iterations


def test_non_convergence_carries_state(problem):
    ens, J = problem(30, 3, 2)
    with pytest.raises(NonConvergenceError) as info:
        run_descent(Instance(J, ens.cost, 1.0), DescentConfig(max_iter=50))
    assert info.value.state.t == 50


def test_unstable_step_warns_and_diverges(problem):
    ens, J = problem(30, 3, 2)
    lam = estimate_lambda_max(J)
    assert lam == pytest.approx(np.linalg.eigvalsh(J.dense)[-1], rel=1e-3)
    with pytest.warns(RuntimeWarning, match="diverge"), pytest.raises(DivergenceError):
        run_descent(Instance(J, ens.cost, 1.0), DescentConfig(gamma_w=5.0 / lam, max_iter=100_000))


def test_stable_step_does_not_warn(problem, recwarn):
    ens, J = problem(30, 3, 2)
    run_descent(Instance(J, ens.cost, 1.0))
    assert not [w for w in recwarn if issubclass(w.category, RuntimeWarning)]


@pytest.mark.parametrize("kw", [dict(gamma_w=0), dict(gamma_k=-1), dict(delta=0), dict(max_iter=0)])
def test_config_validation(kw):
    with pytest.raises(ConfigurationError):
        DescentConfig(**kw)
