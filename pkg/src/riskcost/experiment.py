"""Cost-tolerance sweep over independent disorder trials.

For every trial ``m`` a fresh (or fixed) asset ensemble and return matrix
are drawn from substreams of one root seed, the problem is solved for each
``eta`` on the grid, and per-``eta`` means and error bars are collected next
to the quenched and annealed theory curves.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .descent import DescentConfig, Instance, run_descent, warm_config
from .errors import ConfigurationError, RiskCostError, SweepError, TrialError, UsageError
from .exact import OptimizationOutcome, WishartSolver, optimal_portfolio_closed_form
from .market import (
    DEFAULT_PARETO,
    AssetEnsemble,
    EnsembleStats,
    ParetoParams,
    analytic_stats,
    ensemble_stats,
    generate_ensemble,
    load_ensemble,
)
from .replica import predict
from .scenario import DENSE_CAP, RETURN_DISTRIBUTIONS, build_wishart, generate_returns

__all__ = [
    "SOLVERS",
    "ExperimentConfig",
    "Aggregate",
    "EtaRecord",
    "SweepResult",
    "eta_grid",
    "trial_seed",
    "trial_problem",
    "run_trial",
    "run_sweep",
    "aggregate",
    "SWEEP_COLUMNS",
    "format_sweep_table",
    "write_sweep_table",
    "write_metadata",
]

SOLVERS = ("descent", "closed-form")
BRACKETS = ("analytic", "empirical")
MAX_FAILURE_FRACTION = 0.10

# spawn keys below the root seed
_FIXED_ENSEMBLE_KEY = (0,)
_TRIAL_KEY = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a sweep.  Defaults reproduce the full-size setting (alpha = 3)."""

    n_assets: int = 1000
    n_periods: int = 3000
    pareto_c: ParetoParams = DEFAULT_PARETO
    pareto_h: ParetoParams = DEFAULT_PARETO
    eta_min: float = 0.0
    eta_max: float = 100.0
    eta_step: float = 2.0
    trials: int = 100
    solver: str = "descent"
    descent: DescentConfig = field(default_factory=DescentConfig)
    seed: int = 0
    redraw_ensemble: bool = True
    warm_start: bool = True
    returns: str = "gaussian"
    theory: bool = True
    theory_brackets: str = "analytic"
    ensemble_path: str | None = None
    dense_cap: int = DENSE_CAP

    def __post_init__(self):
        if self.n_assets < 2:
            raise ConfigurationError(f"experiment.assets: need >= 2, got {self.n_assets}")
        if self.n_periods < 1:
            raise ConfigurationError(f"experiment.periods: need >= 1, got {self.n_periods}")
        if not self.eta_min <= self.eta_max:
            raise ConfigurationError(
                f"experiment.eta_max: must be >= eta_min ({self.eta_min}), got {self.eta_max}"
            )
        if not self.eta_step > 0:
            raise ConfigurationError(f"experiment.eta_step: must be > 0, got {self.eta_step}")
        if self.eta_min < 0:
            raise ConfigurationError(f"experiment.eta_min: must be >= 0, got {self.eta_min}")
        if self.trials < 1:
            raise ConfigurationError(f"experiment.trials: need >= 1, got {self.trials}")
        if self.solver not in SOLVERS:
            raise ConfigurationError(f"experiment.solver: expected one of {SOLVERS}, got {self.solver!r}")
        if self.returns not in RETURN_DISTRIBUTIONS:
            raise ConfigurationError(
                f"scenario.returns: expected one of {RETURN_DISTRIBUTIONS}, got {self.returns!r}"
            )
        if self.theory_brackets not in BRACKETS:
            raise ConfigurationError(
                f"experiment.theory_brackets: expected one of {BRACKETS}, got {self.theory_brackets!r}"
            )
        if self.theory and self.n_periods <= self.n_assets:
            raise ConfigurationError(
                "scenario.periods: quenched theory needs periods > assets (alpha > 1); "
                f"got {self.n_periods} <= {self.n_assets}"
            )
        if self.seed < 0:
            raise ConfigurationError(f"experiment.seed: must be >= 0, got {self.seed}")

    @property
    def alpha(self) -> float:
        return self.n_periods / self.n_assets

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["pareto_c"] = asdict(self.pareto_c)
        d["pareto_h"] = asdict(self.pareto_h)
        desc = asdict(self.descent)
        desc.pop("w0")
        d["descent"] = desc
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        for key in ("pareto_c", "pareto_h"):
            if key in d and isinstance(d[key], dict):
                d[key] = ParetoParams(**d[key])
        if "descent" in d and isinstance(d["descent"], dict):
            d["descent"] = DescentConfig(**d["descent"])
        return cls(**d)


def eta_grid(cfg: ExperimentConfig) -> np.ndarray:
    count = math.floor((cfg.eta_max - cfg.eta_min) / cfg.eta_step + 1e-9) + 1
    return cfg.eta_min + cfg.eta_step * np.arange(count)


def trial_seed(cfg: ExperimentConfig, m: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(cfg.seed, spawn_key=(_TRIAL_KEY, m))


def _ensemble(cfg: ExperimentConfig, m: int) -> AssetEnsemble:
    if cfg.ensemble_path is not None:
        ens = load_ensemble(cfg.ensemble_path)
        if ens.n_assets != cfg.n_assets:
            raise ConfigurationError(
                f"{cfg.ensemble_path}: has {ens.n_assets} assets, config says {cfg.n_assets}"
            )
        return ens
    if cfg.redraw_ensemble:
        seed = trial_seed(cfg, m)
    else:
        seed = np.random.SeedSequence(cfg.seed, spawn_key=_FIXED_ENSEMBLE_KEY)
    return generate_ensemble(cfg.pareto_c, cfg.pareto_h, cfg.n_assets, seed)


def trial_problem(cfg: ExperimentConfig, m: int):
    """Ensemble and Wishart matrix of trial ``m``."""
    ens = _ensemble(cfg, m)
    X = generate_returns(ens, cfg.n_periods, trial_seed(cfg, m), cfg.returns)
    return ens, build_wishart(X, dense_cap=cfg.dense_cap)


def run_trial(cfg: ExperimentConfig, eta: float, m: int) -> OptimizationOutcome:
    """Solve one ``(m, eta)`` cell from scratch (descent starts cold)."""
    ens, J = trial_problem(cfg, m)
    try:
        if cfg.solver == "closed-form":
            return optimal_portfolio_closed_form(J, ens.cost, eta)
        return run_descent(Instance(J, ens.cost, eta), cfg.descent, check_stability=False)
    except RiskCostError as exc:
        raise TrialError(m, eta, exc) from exc


def _trial_column(cfg: ExperimentConfig, m: int):
    """All grid points of trial ``m``: ``(stats, [(eps, qw) or error message, ...])``."""
    ens, J = trial_problem(cfg, m)
    etas = eta_grid(cfg)
    cells = []
    if cfg.solver == "closed-form":
        try:
            solver = WishartSolver(J)
        except RiskCostError as exc:
            return ensemble_stats(ens), [str(TrialError(m, eta, exc)) for eta in etas]
        for eta in etas:
            out = optimal_portfolio_closed_form(J, ens.cost, float(eta), solver=solver)
            cells.append((out.epsilon, out.qw))
        return ensemble_stats(ens), cells

    dcfg = cfg.descent
    previous = None
    for eta in etas:
        start = warm_config(dcfg, previous) if (cfg.warm_start and previous is not None) else dcfg
        try:
            out = run_descent(Instance(J, ens.cost, float(eta)), start, check_stability=False)
        except RiskCostError as exc:
            cells.append(str(TrialError(m, float(eta), exc)))
            previous = None
            continue
        cells.append((out.epsilon, out.qw))
        previous = out
    return ensemble_stats(ens), cells


@dataclass(frozen=True)
class Aggregate:
    mean: float
    std: float
    stderr: float
    n: int
    degenerate: bool = False


def aggregate(values) -> Aggregate:
    """Mean, sample standard deviation and standard error of the mean.

    A single value gives zero spread with ``degenerate=True``.
    """
    x = np.asarray(list(values), dtype=float)
    if x.size == 0:
        raise UsageError("cannot aggregate an empty list")
    mean = math.fsum(x) / x.size
    if x.size == 1:
        return Aggregate(mean=mean, std=0.0, stderr=0.0, n=1, degenerate=True)
    std = math.sqrt(math.fsum((x - mean) ** 2) / (x.size - 1))
    return Aggregate(mean=mean, std=std, stderr=std / math.sqrt(x.size), n=int(x.size))


_NAN_AGG = Aggregate(mean=math.nan, std=math.nan, stderr=math.nan, n=0, degenerate=True)


@dataclass(frozen=True)
class EtaRecord:
    eta: float
    epsilon: Aggregate
    qw: Aggregate
    eps_replica: float = math.nan
    qw_replica: float = math.nan
    eps_annealed: float = math.nan
    qw_annealed: float = math.nan

    @property
    def n_trials(self) -> int:
        return self.epsilon.n


@dataclass
class SweepResult:
    config: ExperimentConfig
    records: list
    failures: list = field(default_factory=list)
    theory_stats: EnsembleStats | None = None
    wall_time: float = 0.0

    @property
    def degenerate(self) -> bool:
        return any(r.epsilon.degenerate for r in self.records)

    @property
    def total_cells(self) -> int:
        return len(self.records) * self.config.trials

    def column(self, name: str) -> np.ndarray:
        getters = {
            "eta": lambda r: r.eta,
            "eps_mean": lambda r: r.epsilon.mean,
            "eps_stderr": lambda r: r.epsilon.stderr,
            "eps_std": lambda r: r.epsilon.std,
            "qw_mean": lambda r: r.qw.mean,
            "qw_stderr": lambda r: r.qw.stderr,
            "qw_std": lambda r: r.qw.std,
            "eps_replica": lambda r: r.eps_replica,
            "qw_replica": lambda r: r.qw_replica,
            "eps_annealed": lambda r: r.eps_annealed,
            "qw_annealed": lambda r: r.qw_annealed,
            "n_trials": lambda r: r.n_trials,
        }
        return np.array([getters[name](r) for r in self.records])


def _mean_stats(all_stats) -> EnsembleStats:
    names = [f.name for f in fields(EnsembleStats)]
    return EnsembleStats(**{n: math.fsum(getattr(s, n) for s in all_stats) / len(all_stats) for n in names})


def run_sweep(cfg: ExperimentConfig, jobs: int | None = 1) -> SweepResult:
    """Run every ``(trial, eta)`` cell and aggregate per ``eta``.

    Trials run in a process pool when ``jobs > 1``; results are reduced in
    trial-index order, so the output does not depend on ``jobs``.  Failed
    cells are recorded and left out of the averages; if more than 10% fail,
    :class:`SweepError` is raised with the partial result attached.
    """
    t0 = time.perf_counter()
    etas = eta_grid(cfg)
    work = partial(_trial_column, cfg)
    if jobs is not None and jobs > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, cfg.trials)) as pool:
            columns = list(pool.map(work, range(cfg.trials)))
    else:
        columns = [work(m) for m in range(cfg.trials)]

    failures = []
    eps = [[] for _ in etas]
    qws = [[] for _ in etas]
    for m, (_, cells) in enumerate(columns):
        for j, cell in enumerate(cells):
            if isinstance(cell, str):
                failures.append({"trial": m, "eta": float(etas[j]), "error": cell})
            else:
                eps[j].append(cell[0])
                qws[j].append(cell[1])

    theory_stats = None
    if cfg.theory:
        if cfg.theory_brackets == "empirical" or cfg.ensemble_path is not None:
            theory_stats = _mean_stats([s for s, _ in columns])
        else:
            theory_stats = analytic_stats(cfg.pareto_c, cfg.pareto_h)

    records = []
    for j, eta in enumerate(etas):
        theory = {}
        if theory_stats is not None:
            p = predict(theory_stats, cfg.alpha, float(eta))
            theory = dict(
                eps_replica=p.epsilon_quenched,
                qw_replica=p.qw_quenched,
                eps_annealed=p.epsilon_annealed,
                qw_annealed=p.qw_annealed,
            )
        records.append(
            EtaRecord(
                eta=float(eta),
                epsilon=aggregate(eps[j]) if eps[j] else _NAN_AGG,
                qw=aggregate(qws[j]) if qws[j] else _NAN_AGG,
                **theory,
            )
        )
    result = SweepResult(cfg, records, failures, theory_stats, time.perf_counter() - t0)
    if len(failures) > MAX_FAILURE_FRACTION * result.total_cells:
        err = SweepError(f"{len(failures)} of {result.total_cells} cells failed")
        err.result = result
        raise err
    return result


SWEEP_COLUMNS = (
    "eta",
    "eps_mean",
    "eps_stderr",
    "eps_std",
    "qw_mean",
    "qw_stderr",
    "qw_std",
    "eps_replica",
    "qw_replica",
    "eps_annealed",
    "qw_annealed",
    "n_trials",
)


def format_sweep_table(result: SweepResult) -> str:
    """Tab-separated table, one row per eta, 9 significant digits."""
    lines = ["\t".join(SWEEP_COLUMNS)]
    for r in result.records:
        vals = [
            r.eta,
            r.epsilon.mean,
            r.epsilon.stderr,
            r.epsilon.std,
            r.qw.mean,
            r.qw.stderr,
            r.qw.std,
            r.eps_replica,
            r.qw_replica,
            r.eps_annealed,
            r.qw_annealed,
        ]
        lines.append("\t".join(f"{v:.9g}" for v in vals) + f"\t{r.n_trials:d}")
    return "\n".join(lines) + "\n"


def write_sweep_table(result: SweepResult, path) -> Path:
    path = Path(path)
    path.write_text(format_sweep_table(result))
    return path


def write_metadata(result: SweepResult, path, extra: dict | None = None) -> Path:
    """JSON sidecar: full config, seed scheme, failures, timing."""
    cfg = result.config
    meta = {
        "tool": "riskcost",
        "version": __version__,
        "config": cfg.as_dict(),
        "root_seed": cfg.seed,
        "trial_spawn_keys": [list(trial_seed(cfg, m).spawn_key) for m in range(cfg.trials)],
        "fixed_ensemble_spawn_key": None if cfg.redraw_ensemble else list(_FIXED_ENSEMBLE_KEY),
        "alpha": cfg.alpha,
        "n_eta": len(result.records),
        "failures": result.failures,
        "degenerate_statistics": result.degenerate,
        "theory_stats": result.theory_stats.as_dict() if result.theory_stats else None,
        "wall_time_seconds": result.wall_time,
    }
    if extra:
        meta.update(extra)
    path = Path(path)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, **changes)
