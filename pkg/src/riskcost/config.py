"""Flat INI configuration for sweeps.

Sections follow the modules (``[market]``, ``[scenario]``, ``[descent]``,
``[experiment]``); every key is optional and missing keys take the
full-size defaults.  A JSON metadata sidecar written by a previous run is
accepted in place of an INI file.
"""

from __future__ import annotations

import configparser
import io
import json
from dataclasses import replace
from pathlib import Path

from .descent import DescentConfig
from .errors import ConfigurationError, RiskCostError
from .experiment import ExperimentConfig
from .market import ParetoParams

__all__ = ["parse_config", "config_to_ini", "apply_overrides"]


def _as_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_str(text: str):
    t = text.strip()
    return None if t in ("", "none") else t


# section -> key -> (target, converter); targets are ExperimentConfig fields,
# "descent.<field>", or "pareto_c.<field>" / "pareto_h.<field>"
_SCHEMA = {
    "market": {
        "b_c": ("pareto_c.power", float),
        "l_c": ("pareto_c.lower", float),
        "u_c": ("pareto_c.upper", float),
        "b_h": ("pareto_h.power", float),
        "l_h": ("pareto_h.lower", float),
        "u_h": ("pareto_h.upper", float),
        "redraw_ensemble": ("redraw_ensemble", _as_bool),
        "ensemble_path": ("ensemble_path", _optional_str),
    },
    "scenario": {
        "assets": ("n_assets", int),
        "periods": ("n_periods", int),
        "returns": ("returns", str),
        "dense_cap": ("dense_cap", int),
    },
    "descent": {
        "gamma_w": ("descent.gamma_w", float),
        "gamma_k": ("descent.gamma_k", float),
        "delta": ("descent.delta", float),
        "max_iter": ("descent.max_iter", int),
        "scaled_criterion": ("descent.scaled_criterion", _as_bool),
        "k0": ("descent.k0", float),
    },
    "experiment": {
        "eta_min": ("eta_min", float),
        "eta_max": ("eta_max", float),
        "eta_step": ("eta_step", float),
        "trials": ("trials", int),
        "solver": ("solver", str),
        "seed": ("seed", int),
        "warm_start": ("warm_start", _as_bool),
        "theory": ("theory", _as_bool),
        "theory_brackets": ("theory_brackets", str),
    },
}


def apply_overrides(cfg: ExperimentConfig, values: dict) -> ExperimentConfig:
    """Apply ``{target: value}`` pairs (targets as in the schema) and re-validate."""
    top, desc, pc, ph = {}, {}, {}, {}
    for target, value in values.items():
        if target.startswith("descent."):
            desc[target.split(".", 1)[1]] = value
        elif target.startswith("pareto_c."):
            pc[target.split(".", 1)[1]] = value
        elif target.startswith("pareto_h."):
            ph[target.split(".", 1)[1]] = value
        else:
            top[target] = value
    try:
        if desc:
            top["descent"] = replace(cfg.descent, **desc)
        if pc:
            top["pareto_c"] = replace(cfg.pareto_c, **pc)
        if ph:
            top["pareto_h"] = replace(cfg.pareto_h, **ph)
        return replace(cfg, **top)
    except RiskCostError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from exc


def _parse_ini(text: str, source: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigurationError(f"{source}: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigurationError(f"{source}: unknown section [{section}]")
        schema = _SCHEMA[section]
        for key, raw in parser.items(section):
            if key not in schema:
                raise ConfigurationError(f"{source}: unknown key {section}.{key}")
            target, conv = schema[key]
            try:
                values[target] = conv(raw)
            except ValueError as exc:
                raise ConfigurationError(f"{source}: {section}.{key}: {exc}") from exc
    return values


def parse_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from an optional file plus flag overrides (flags win).

    ``path`` may be an INI file or a JSON sidecar from an earlier run.
    """
    cfg = ExperimentConfig()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file not found: {path}")
        text = path.read_text()
        if path.suffix == ".json":
            try:
                cfg = ExperimentConfig.from_dict(json.loads(text)["config"])
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                raise ConfigurationError(f"{path}: not a sweep metadata file ({exc})") from exc
        else:
            cfg = apply_overrides(cfg, _parse_ini(text, str(path)))
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    return cfg


def config_to_ini(cfg: ExperimentConfig) -> str:
    """Serialize so that ``parse_config`` on the text gives back ``cfg``."""
    parser = configparser.ConfigParser(interpolation=None)
    for section, schema in _SCHEMA.items():
        parser.add_section(section)
        for key, (target, _) in schema.items():
            obj = cfg
            for part in target.split("."):
                obj = getattr(obj, part)
            parser.set(section, key, "none" if obj is None else repr(obj) if isinstance(obj, float) else str(obj))
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
