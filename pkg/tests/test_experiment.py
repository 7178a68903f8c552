import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import riskcost.experiment as ex
from riskcost.descent import DescentConfig
from riskcost.errors import ConfigurationError, SweepError, TrialError, UsageError
from riskcost.experiment import (
    ExperimentConfig,
    aggregate,
    eta_grid,
    format_sweep_table,
    run_sweep,
    run_trial,
    trial_problem,
    write_metadata,
)
from riskcost.market import save_ensemble

SMALL = ExperimentConfig(
    n_assets=40, n_periods=120, trials=6, eta_min=0, eta_max=20, eta_step=10, solver="closed-form", seed=7
)


def test_aggregate_examples():
    a = aggregate([1.0, 2.0, 3.0])
    assert (a.mean, a.std, a.n, a.degenerate) == (2.0, 1.0, 3, False)
    assert a.stderr == pytest.approx(1 / np.sqrt(3))
    a = aggregate([5.0])
    assert (a.mean, a.std, a.stderr, a.degenerate) == (5.0, 0.0, 0.0, True)
    with pytest.raises(UsageError):
        aggregate([])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=50))
def test_aggregate_matches_numpy(xs):
    a = aggregate(xs)
    assert a.mean == pytest.approx(np.mean(xs), rel=1e-9, abs=1e-6)
    assert a.std == pytest.approx(np.std(xs, ddof=1), rel=1e-7, abs=1e-6)
    assert a.std >= 0


def test_eta_grid():
    np.testing.assert_allclose(eta_grid(ExperimentConfig()), np.arange(0, 101, 2.0))
    assert eta_grid(ExperimentConfig(eta_min=3, eta_max=3, eta_step=1)).tolist() == [3.0]


@pytest.mark.parametrize(
    "changes",
    [dict(eta_min=5, eta_max=1), dict(eta_step=0), dict(trials=0), dict(n_assets=1), dict(solver="newton"),
     dict(returns="cauchy"), dict(n_periods=0)],
)
def test_config_rejects(changes):
    with pytest.raises(ConfigurationError):
        ExperimentConfig(**changes)


def test_config_dict_round_trip():
    cfg = ex.with_overrides(SMALL, descent=DescentConfig(delta=1e-7, gamma_w=2e-3), redraw_ensemble=False)
    assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.as_dict()))) == cfg


def test_sweep_is_deterministic():
    assert format_sweep_table(run_sweep(SMALL)) == format_sweep_table(run_sweep(SMALL))
    other = format_sweep_table(run_sweep(ex.with_overrides(SMALL, seed=8)))
    assert other != format_sweep_table(run_sweep(SMALL))


def test_periods_do_not_perturb_ensemble():
    e1, _ = trial_problem(SMALL, 3)
    e2, _ = trial_problem(ex.with_overrides(SMALL, n_periods=200), 3)
    assert e1 == e2


def test_fixed_ensemble_shared_across_trials():
    cfg = ex.with_overrides(SMALL, redraw_ensemble=False)
    (a, Ja), (b, Jb) = trial_problem(cfg, 0), trial_problem(cfg, 1)
    assert a == b
    assert not np.array_equal(Ja.dense, Jb.dense)
    assert trial_problem(SMALL, 0)[0] != trial_problem(SMALL, 1)[0]


def test_ensemble_from_file(tmp_path):
    ens, _ = trial_problem(SMALL, 0)
    path = tmp_path / "ens.txt"
    save_ensemble(ens, path)
    cfg = ex.with_overrides(SMALL, ensemble_path=str(path))
    np.testing.assert_allclose(trial_problem(cfg, 4)[0].cost, ens.cost, rtol=1e-14)
    res = run_sweep(cfg)
    np.testing.assert_allclose(res.theory_stats.inv_v, np.mean(1 / ens.variance), rtol=1e-12)
    with pytest.raises(ConfigurationError):
        trial_problem(ex.with_overrides(cfg, n_assets=41), 0)


def test_single_trial_is_flagged():
    res = run_sweep(ex.with_overrides(SMALL, trials=1))
    assert res.degenerate
    assert np.all(res.column("eps_std") == 0)
    assert not run_sweep(SMALL).degenerate


def test_trial_order_does_not_matter():
    # averages over trials only depend on the set of trials
    cells = [ex._trial_column(SMALL, m)[1] for m in range(SMALL.trials)]
    perm = np.random.default_rng(0).permutation(SMALL.trials)
    for j in range(len(eta_grid(SMALL))):
        a = aggregate([cells[m][j][0] for m in range(SMALL.trials)])
        b = aggregate([cells[m][j][0] for m in perm])
        assert a.mean == b.mean and a.std == b.std


def test_sweep_matches_single_trials():
    res = run_sweep(SMALL)
    eps = [run_trial(SMALL, 10.0, m).epsilon for m in range(SMALL.trials)]
    assert res.records[1].epsilon.mean == pytest.approx(np.mean(eps), rel=1e-12)


def test_solvers_agree():
    cfg = ex.with_overrides(SMALL, trials=3, descent=DescentConfig(delta=1e-8))
    cf = run_sweep(cfg)
    ds = run_sweep(ex.with_overrides(cfg, solver="descent"))
    np.testing.assert_allclose(ds.column("eps_mean"), cf.column("eps_mean"), atol=1e-5)
    np.testing.assert_allclose(ds.column("qw_mean"), cf.column("qw_mean"), rtol=1e-4)


def test_warm_start_does_not_change_answers():
    cfg = ex.with_overrides(SMALL, trials=2, solver="descent", descent=DescentConfig(delta=1e-8))
    warm, cold = run_sweep(cfg), run_sweep(ex.with_overrides(cfg, warm_start=False))
    np.testing.assert_allclose(warm.column("eps_mean"), cold.column("eps_mean"), atol=1e-5)


def test_self_averaging():
    def spread(n):
        cfg = ExperimentConfig(n_assets=n, n_periods=3 * n, trials=12, eta_min=10, eta_max=10, eta_step=1,
                               solver="closed-form", seed=3)
        return run_sweep(cfg).records[0].epsilon.std

    assert spread(400) < spread(100)


def test_failures_under_threshold_are_recorded(monkeypatch):
    real = ex._trial_column

    def flaky(cfg, m):
        stats, cells = real(cfg, m)
        if m == 2:
            cells[0] = str(TrialError(m, 0.0, RuntimeError("boom")))
        return stats, cells

    monkeypatch.setattr(ex, "_trial_column", flaky)
    cfg = ex.with_overrides(SMALL, trials=10)
    res = run_sweep(cfg)
    assert len(res.failures) == 1 and res.failures[0]["trial"] == 2
    assert res.records[0].n_trials == 9 and res.records[1].n_trials == 10


def test_too_many_failures_raise():
    cfg = ex.with_overrides(SMALL, trials=2, solver="descent", descent=DescentConfig(max_iter=5))
    with pytest.raises(SweepError) as info:
        run_sweep(cfg)
    res = info.value.result
    assert len(res.failures) == res.total_cells
    assert np.all(np.isnan(res.column("eps_mean")))


def test_singular_trials_fail_cleanly():
    cfg = ex.with_overrides(SMALL, n_periods=20, trials=2, theory=False)
    with pytest.raises(TrialError):
        run_trial(cfg, 0.0, 0)
    with pytest.raises(SweepError):
        run_sweep(cfg)


def test_metadata_sidecar(tmp_path):
    res = run_sweep(SMALL)
    meta = json.loads(write_metadata(res, tmp_path / "m.json").read_text())
    assert meta["root_seed"] == 7
    assert meta["trial_spawn_keys"][3] == [1, 3]
    assert ExperimentConfig.from_dict(meta["config"]) == SMALL
    assert meta["failures"] == []


def test_table_format():
    lines = format_sweep_table(run_sweep(SMALL)).splitlines()
    assert lines[0].split("\t") == list(ex.SWEEP_COLUMNS)
    assert len(lines) == 4
    assert lines[1].split("\t")[-1] == "6"
