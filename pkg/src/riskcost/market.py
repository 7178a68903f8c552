"""Random investment environment: bounded-Pareto asset attributes and bracket averages.

Each asset ``i`` carries a purchasing cost ``c_i``, a return variance ``v_i``
and a mean return ``r_i``.  The built-in generator draws ``c_i`` and a
variance coefficient ``h_i`` independently from bounded Pareto laws and sets
``v_i = h_i * c_i**2`` and ``r_i = c_i``.  Arbitrary ``(c, v, r)`` tables can
be loaded from text for ensembles the generator does not cover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "ParetoParams",
    "AssetEnsemble",
    "EnsembleStats",
    "DEFAULT_PARETO",
    "rng_from",
    "inverse_pareto_sample",
    "pareto_moment",
    "generate_ensemble",
    "point_mass_ensemble",
    "ensemble_from_arrays",
    "ensemble_stats",
    "analytic_stats",
    "save_ensemble",
    "load_ensemble",
]


@dataclass(frozen=True)
class ParetoParams:
    """Bounded Pareto law with density proportional to ``x**-power`` on ``[lower, upper]``.

    ``lower == upper`` is accepted as a point mass so degenerate ensembles can
    be expressed with the same type.
    """

    power: float
    lower: float
    upper: float

    def __post_init__(self):
        if not (self.power > 0):
            raise ConfigurationError(f"power must be > 0, got {self.power}")
        if self.power == 1:
            raise ConfigurationError("power == 1 is not supported (normalizer is singular)")
        if not (self.lower > 0):
            raise ConfigurationError(f"lower must be > 0, got {self.lower}")
        if not (self.upper >= self.lower):
            raise ConfigurationError(
                f"upper must be >= lower, got lower={self.lower}, upper={self.upper}"
            )

    @property
    def degenerate(self) -> bool:
        return self.upper == self.lower

    @property
    def normalizer(self) -> float:
        one_b = 1.0 - self.power
        return one_b / (self.upper**one_b - self.lower**one_b)


# (b, u, l) = (2, 4, 1) for both costs and variance coefficients
DEFAULT_PARETO = ParetoParams(power=2.0, lower=1.0, upper=4.0)


def rng_from(seed, *key: int) -> np.random.Generator:
    """Generator for the substream ``key`` below ``seed``.

    ``seed`` may be an int or a :class:`numpy.random.SeedSequence`.  Streams
    with distinct keys are statistically independent, and a given
    ``(seed, key)`` always yields the same stream.
    """
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + key)
    else:
        ss = np.random.SeedSequence(seed, spawn_key=key)
    return np.random.default_rng(ss)


def inverse_pareto_sample(params: ParetoParams, s):
    """Map uniform variates ``s`` in ``[0, 1)`` to bounded-Pareto variates.

    Works elementwise on arrays.  Output lies in ``[lower, upper]`` and is
    increasing in ``s``.
    """
    s = np.asarray(s, dtype=float)
    if np.any((s < 0) | (s > 1)):
        raise DomainError("uniform variates must lie in [0, 1)")
    if params.degenerate:
        out = np.full_like(s, params.lower)
    else:
        one_b = 1.0 - params.power
        base = s * params.upper**one_b + (1.0 - s) * params.lower**one_b
        out = base ** (1.0 / one_b)
        # rounding can push the endpoints out by an ulp
        out = np.clip(out, params.lower, params.upper)
    return out if out.ndim else float(out)


def pareto_moment(params: ParetoParams, n: float) -> float:
    """Exact ``E[X**n]`` for the bounded Pareto law."""
    if params.degenerate:
        return params.lower**n
    lo, hi = params.lower, params.upper
    a = params.normalizer
    e = n - params.power + 1.0
    if e == 0:
        return a * math.log(hi / lo)
    return a * (hi**e - lo**e) / e


@dataclass(frozen=True, eq=False)
class AssetEnsemble:
    """Per-asset cost, variance and mean return for ``N`` assets."""

    cost: np.ndarray
    variance: np.ndarray
    mean_return: np.ndarray
    coupled: bool = False

    def __post_init__(self):
        n = self.cost.shape
        if len(n) != 1 or self.variance.shape != n or self.mean_return.shape != n:
            raise ConfigurationError("cost, variance and mean_return must be 1-d arrays of equal length")
        if not np.all(self.variance > 0):
            raise DomainError("all asset variances must be > 0")

    @property
    def n_assets(self) -> int:
        return self.cost.shape[0]

    def __eq__(self, other):
        if not isinstance(other, AssetEnsemble):
            return NotImplemented
        return (
            self.coupled == other.coupled
            and np.array_equal(self.cost, other.cost)
            and np.array_equal(self.variance, other.variance)
            and np.array_equal(self.mean_return, other.mean_return)
        )


def ensemble_from_arrays(cost, variance, mean_return=None) -> AssetEnsemble:
    """Wrap externally supplied attribute vectors (any correlation structure)."""
    cost = np.array(cost, dtype=float)
    variance = np.array(variance, dtype=float)
    r = cost.copy() if mean_return is None else np.array(mean_return, dtype=float)
    return AssetEnsemble(cost, variance, r, coupled=False)


def generate_ensemble(pareto_c: ParetoParams, pareto_h: ParetoParams, n_assets: int, seed) -> AssetEnsemble:
    """Draw ``c_i`` and ``h_i`` independently and set ``v_i = h_i c_i**2``, ``r_i = c_i``.

    Costs and coefficients come from separate substreams of ``seed`` so the
    draw is reproducible and unaffected by anything else using the seed.
    """
    if n_assets < 2:
        raise ConfigurationError(f"need at least 2 assets, got {n_assets}")
    s_c = rng_from(seed, 0).random(n_assets)
    s_h = rng_from(seed, 1).random(n_assets)
    c = np.asarray(inverse_pareto_sample(pareto_c, s_c), dtype=float)
    h = np.asarray(inverse_pareto_sample(pareto_h, s_h), dtype=float)
    return AssetEnsemble(cost=c, variance=h * c**2, mean_return=c.copy(), coupled=True)


def point_mass_ensemble(n_assets: int, cost: float = 1.0, variance: float = 1.0) -> AssetEnsemble:
    """All assets identical; handy for checks against the simplest closed forms."""
    c = np.full(n_assets, float(cost))
    return AssetEnsemble(c, np.full(n_assets, float(variance)), c.copy(), coupled=False)


@dataclass(frozen=True)
class EnsembleStats:
    """Asset averages ``<f(c, v, r)>`` entering the closed forms.

    Attribute names spell the bracket: ``inv_v2_c`` is ``<v**-2 c>``.
    """

    inv_v: float
    inv_v2: float
    inv_v_c: float
    inv_v_c2: float
    inv_v2_c: float
    inv_v2_c2: float
    inv_v_r: float
    inv_v_r2: float
    inv_v_cr: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def ensemble_stats(ensemble: AssetEnsemble) -> EnsembleStats:
    """Empirical brackets: arithmetic means over assets."""
    v = ensemble.variance
    if np.any(v <= 0):
        raise DomainError("all asset variances must be > 0")
    c, r = ensemble.cost, ensemble.mean_return
    iv = 1.0 / v
    iv2 = iv * iv
    # math.fsum keeps the result independent of asset order
    mean = lambda a: math.fsum(a) / a.size  # noqa: E731
    return EnsembleStats(
        inv_v=mean(iv),
        inv_v2=mean(iv2),
        inv_v_c=mean(iv * c),
        inv_v_c2=mean(iv * c * c),
        inv_v2_c=mean(iv2 * c),
        inv_v2_c2=mean(iv2 * c * c),
        inv_v_r=mean(iv * r),
        inv_v_r2=mean(iv * r * r),
        inv_v_cr=mean(iv * c * r),
    )


def analytic_stats(pareto_c: ParetoParams, pareto_h: ParetoParams) -> EnsembleStats:
    """Large-N brackets for the coupled generator (``v = h c**2``, ``r = c``).

    Independence of ``c`` and ``h`` factorizes every bracket into products of
    one-dimensional Pareto moments.
    """
    mc = lambda n: pareto_moment(pareto_c, n)  # noqa: E731
    mh = lambda n: pareto_moment(pareto_h, n)  # noqa: E731
    inv_v_c = mh(-1) * mc(-1)
    inv_v_c2 = mh(-1) * mc(0)
    return EnsembleStats(
        inv_v=mh(-1) * mc(-2),
        inv_v2=mh(-2) * mc(-4),
        inv_v_c=inv_v_c,
        inv_v_c2=inv_v_c2,
        inv_v2_c=mh(-2) * mc(-3),
        inv_v2_c2=mh(-2) * mc(-2),
        inv_v_r=inv_v_c,
        inv_v_r2=inv_v_c2,
        inv_v_cr=inv_v_c2,
    )


def save_ensemble(ensemble: AssetEnsemble, path) -> None:
    """Write ``index c v r`` columns with a one-line header."""
    n = ensemble.n_assets
    data = np.column_stack([np.arange(n), ensemble.cost, ensemble.variance, ensemble.mean_return])
    np.savetxt(path, data, fmt=["%d", "%.15g", "%.15g", "%.15g"], header="index c v r", comments="")


def load_ensemble(path) -> AssetEnsemble:
    """Read a table written by :func:`save_ensemble` (or any file with that layout)."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().split()
    if [h.lower() for h in header] != ["index", "c", "v", "r"]:
        raise ConfigurationError(f"{path}: expected header 'index c v r', got {' '.join(header)!r}")
    data = np.loadtxt(path, skiprows=1, ndmin=2)
    if data.shape[1] != 4:
        raise ConfigurationError(f"{path}: expected 4 columns, got {data.shape[1]}")
    order = np.argsort(data[:, 0], kind="stable")
    data = data[order]
    return ensemble_from_arrays(data[:, 1], data[:, 2], data[:, 3])
