"""Command-line front end.

Subcommands::

    riskcost theory    theory curves only
    riskcost solve     one instance, both solvers, with a diff report
    riskcost sweep     full protocol: table + JSON sidecar + theory curves
    riskcost validate  quick invariant checks, one PASS/FAIL line each
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .descent import Instance, run_descent
from .errors import ConfigurationError, RiskCostError, SweepError
from .exact import optimal_portfolio_closed_form
from .experiment import ExperimentConfig, SweepResult, eta_grid, run_sweep, trial_problem, write_metadata, write_sweep_table
from .market import analytic_stats, save_ensemble
from .replica import write_theory_table
from .scenario import save_matrix

__all__ = ["RunManifest", "emit_outputs", "build_parser", "main"]

OUT_ENV = "RISKCOST_OUT"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_PARTIAL = 3
EXIT_FAILED = 4
EXIT_IO = 5


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    config: ExperimentConfig
    out_dir: Path
    config_path: str | None = None
    version: str = __version__

    @property
    def seed(self) -> int:
        return self.config.seed

    def as_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "config_path": self.config_path,
            "out_dir": str(self.out_dir),
            "seed": self.seed,
            "version": self.version,
        }


def _theory_stats(cfg: ExperimentConfig, result: SweepResult | None = None):
    if result is not None and result.theory_stats is not None:
        return result.theory_stats
    return analytic_stats(cfg.pareto_c, cfg.pareto_h)


def emit_outputs(result: SweepResult, manifest: RunManifest, basename: str = "sweep") -> list[Path]:
    """Write ``<basename>.tsv``, ``<basename>.json`` and ``theory.tsv`` into the output directory."""
    out = Path(manifest.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [
        write_sweep_table(result, out / f"{basename}.tsv"),
        write_metadata(result, out / f"{basename}.json", extra={"manifest": manifest.as_dict()}),
    ]
    cfg = result.config
    if cfg.theory:
        theory = out / "theory.tsv"
        write_theory_table(theory, _theory_stats(cfg, result), cfg.alpha, eta_grid(cfg))
        paths.append(theory)
    return paths


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI config or JSON sidecar of an earlier run")
    common.add_argument("--seed", type=int, metavar="U64")
    common.add_argument("--eta-min", type=float)
    common.add_argument("--eta-max", type=float)
    common.add_argument("--eta-step", type=float)
    common.add_argument("--trials", type=int, metavar="M")
    common.add_argument("--assets", type=int, metavar="N")
    common.add_argument("--periods", type=int, metavar="P")
    common.add_argument("--solver", choices=("descent", "closed-form"))
    common.add_argument("--out", metavar="DIR", help=f"output directory (default: ${OUT_ENV} or ./riskcost-out)")
    common.add_argument("--jobs", type=int, metavar="K", default=os.cpu_count() or 1)

    parser = argparse.ArgumentParser(prog="riskcost", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"riskcost {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("theory", parents=[common], help="write theory curves only")
    solve = sub.add_parser("solve", parents=[common], help="solve one instance with both solvers")
    solve.add_argument("--eta", type=float, default=None, help="cost tolerance (default: --eta-min)")
    solve.add_argument("--trial", type=int, default=0, help="trial index whose instance is solved")
    solve.add_argument("--dump", action="store_true", help="also write the ensemble, X and J as text")
    sub.add_parser("sweep", parents=[common], help="run the full sweep")
    sub.add_parser("validate", help="run quick invariant checks")
    return parser


_FLAG_TARGETS = {
    "seed": "seed",
    "eta_min": "eta_min",
    "eta_max": "eta_max",
    "eta_step": "eta_step",
    "trials": "trials",
    "assets": "n_assets",
    "periods": "n_periods",
    "solver": "solver",
}


def _config_from(args):
    from .config import parse_config

    overrides = {t: getattr(args, f) for f, t in _FLAG_TARGETS.items() if getattr(args, f, None) is not None}
    return parse_config(args.config, overrides)


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV) or "riskcost-out")


def _cmd_theory(args) -> int:
    cfg = _config_from(args)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "theory.tsv"
    write_theory_table(path, _theory_stats(cfg), cfg.alpha, eta_grid(cfg))
    print(path)
    return EXIT_OK


def _cmd_solve(args) -> int:
    cfg = _config_from(args)
    eta = cfg.eta_min if args.eta is None else args.eta
    ens, J = trial_problem(cfg, args.trial)
    cf = optimal_portfolio_closed_form(J, ens.cost, eta)
    ds = run_descent(Instance(J, ens.cost, eta), cfg.descent)
    print(f"N={cfg.n_assets} p={cfg.n_periods} alpha={cfg.alpha:g} eta={eta:g} seed={cfg.seed} trial={args.trial}")
    print(f"{'solver':<12}{'epsilon':>18}{'q_w':>18}{'k':>18}{'iterations':>12}")
    for name, o in (("closed-form", cf), ("descent", ds)):
        print(f"{name:<12}{o.epsilon:>18.10g}{o.qw:>18.10g}{o.k:>18.10g}{o.iterations:>12d}")
    print(f"{'|diff|':<12}{abs(cf.epsilon - ds.epsilon):>18.3e}{abs(cf.qw - ds.qw):>18.3e}{abs(cf.k - ds.k):>18.3e}")
    print(f"max |w_closed - w_descent| = {np.abs(cf.w - ds.w).max():.3e}")
    if args.dump:
        out = _out_dir(args)
        out.mkdir(parents=True, exist_ok=True)
        save_ensemble(ens, out / "ensemble.txt")
        save_matrix(out / "returns.txt", J.returns)
        save_matrix(out / "wishart.txt", J)
        print(out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _config_from(args)
    manifest = RunManifest("sweep", cfg, _out_dir(args), args.config)
    status = EXIT_OK
    try:
        result = run_sweep(cfg, jobs=args.jobs)
    except SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        result = exc.result
        status = EXIT_FAILED
    if status == EXIT_OK and result.failures:
        print(f"warning: {len(result.failures)} of {result.total_cells} cells failed", file=sys.stderr)
        status = EXIT_PARTIAL
    for p in emit_outputs(result, manifest):
        print(p)
    return status


def _cmd_validate(args) -> int:
    from .validation import run_checks

    results = run_checks()
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"theory": _cmd_theory, "solve": _cmd_solve, "sweep": _cmd_sweep, "validate": _cmd_validate}[args.command]
    try:
        return handler(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except RiskCostError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
