import json
import subprocess
import sys

import numpy as np
import pytest

from riskcost import cli
from riskcost.config import config_to_ini, parse_config
from riskcost.descent import DescentConfig
from riskcost.errors import ConfigurationError
from riskcost.experiment import ExperimentConfig
from riskcost.market import ParetoParams

FAST = ["--assets", "30", "--periods", "90", "--trials", "4", "--eta-min", "0", "--eta-max", "10",
        "--eta-step", "5", "--solver", "closed-form", "--seed", "11"]


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_empty_config_gives_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, ""))
    assert cfg == ExperimentConfig()
    assert (cfg.n_assets, cfg.n_periods, cfg.trials, cfg.eta_step) == (1000, 3000, 100, 2.0)
    assert cfg.descent == DescentConfig(gamma_w=1e-3, gamma_k=1e-3, delta=1e-6)
    assert cfg.pareto_c == ParetoParams(2, 1, 4)
    assert parse_config() == ExperimentConfig()


def test_ini_values(tmp_path):
    cfg = parse_config(write(tmp_path, "[market]\nb_c = 3\nu_h = 5\n[scenario]\nassets = 50\nperiods = 200\n"
                                       "[descent]\ndelta = 1e-8\n[experiment]\ntrials = 3\nwarm_start = no\n"))
    assert cfg.pareto_c.power == 3 and cfg.pareto_h.upper == 5
    assert (cfg.n_assets, cfg.n_periods, cfg.trials) == (50, 200, 3)
    assert cfg.descent.delta == 1e-8 and not cfg.warm_start


@pytest.mark.parametrize(
    "text, where",
    [
        ("[experiment]\neta_min = 5\neta_max = 1\n", "experiment.eta_max"),
        ("[experiment]\nbogus = 1\n", "experiment.bogus"),
        ("[nonsense]\n", "nonsense"),
        ("[scenario]\nassets = many\n", "scenario.assets"),
        ("[market]\nl_c = 5\nu_c = 4\n", "lower"),
        ("[descent]\ngamma_w = -1\n", "gamma_w"),
        ("not an ini", "run.ini"),
    ],
)
def test_bad_config_rejected(tmp_path, text, where):
    with pytest.raises(ConfigurationError, match=where):
        parse_config(write(tmp_path, text))


def test_missing_file():
    with pytest.raises(ConfigurationError):
        parse_config("/nonexistent/run.ini")


def test_ini_round_trip(tmp_path):
    cfg = parse_config(overrides={"n_assets": 77, "descent.gamma_w": 3e-4, "pareto_h.lower": 1.5, "seed": 9,
                                  "redraw_ensemble": False})
    assert parse_config(write(tmp_path, config_to_ini(cfg))) == cfg
    assert parse_config(write(tmp_path, config_to_ini(ExperimentConfig()))) == ExperimentConfig()


def test_flags_override_file(tmp_path):
    cfg = parse_config(write(tmp_path, "[experiment]\ntrials = 3\n"), {"trials": 5})
    assert cfg.trials == 5


def test_theory_command(tmp_path):
    assert cli.main(["theory", "--out", str(tmp_path), "--eta-max", "50", "--eta-step", "10"]) == 0
    rows = np.loadtxt(tmp_path / "theory.tsv", skiprows=1)
    assert rows.shape == (6, 5)
    np.testing.assert_allclose(rows[-1, 1], 33.233035714285734, rtol=1e-8)


def test_sweep_outputs_and_sidecar_reconstruction(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["sweep", *FAST, "--out", str(a), "--jobs", "1"]) == cli.EXIT_OK
    for name in ("sweep.tsv", "sweep.json", "theory.tsv"):
        assert (a / name).exists()
    meta = json.loads((a / "sweep.json").read_text())
    assert meta["manifest"]["subcommand"] == "sweep"
    assert cli.main(["sweep", "--config", str(a / "sweep.json"), "--out", str(b), "--jobs", "1"]) == 0
    assert (a / "sweep.tsv").read_bytes() == (b / "sweep.tsv").read_bytes()


def test_jobs_do_not_change_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["sweep", *FAST, "--out", str(a), "--jobs", "1"]) == 0
    assert cli.main(["sweep", *FAST, "--out", str(b), "--jobs", "2"]) == 0
    assert (a / "sweep.tsv").read_bytes() == (b / "sweep.tsv").read_bytes()


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    assert cli.main(["theory", "--eta-max", "4"]) == 0
    assert (tmp_path / "env" / "theory.tsv").exists()


def test_solve_command(tmp_path, capsys):
    assert cli.main(["solve", *FAST, "--eta", "3", "--trial", "1", "--dump", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "closed-form" in out and "descent" in out and "|diff|" in out
    assert (tmp_path / "ensemble.txt").exists() and (tmp_path / "wishart.txt").exists()
    assert np.loadtxt(tmp_path / "wishart.txt").shape == (30, 30)


def test_exit_codes(tmp_path):
    bad = write(tmp_path, "[experiment]\neta_min = 5\neta_max = 1\n")
    assert cli.main(["sweep", "--config", str(bad), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    ini = write(tmp_path, "[descent]\nmax_iter = 3\n", "fail.ini")
    code = cli.main(["sweep", "--config", str(ini), *FAST, "--solver", "descent", "--out", str(tmp_path / "f"),
                     "--jobs", "1"])
    assert code == cli.EXIT_FAILED
    assert (tmp_path / "f" / "sweep.json").exists()
    blocker = write(tmp_path, "x", "blocker")
    assert cli.main(["theory", "--out", str(blocker / "sub")]) == cli.EXIT_IO


def test_validate_command(capsys):
    assert cli.main(["validate"]) == cli.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 9 and all(l.startswith("PASS") for l in lines)


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "riskcost.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "riskcost" in res.stdout
    res = subprocess.run([sys.executable, "-m", "riskcost.cli", "bogus"], capture_output=True, text=True)
    assert res.returncode == 2


def test_readme_example_config(tmp_path):
    import re
    from pathlib import Path

    readme = Path(__file__).resolve().parents[1] / "README.md"
    ini = re.search(r"```ini\n(.*?)```", readme.read_text(), re.S).group(1)
    assert parse_config(write(tmp_path, ini)) == ExperimentConfig()
