"""Run configuration: TOML file + CLI overrides, validation, manifest."""
from dataclasses import asdict, dataclass, field, replace
import hashlib
import json
import math
import sys

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .ensemble import EnsembleConfig
from .errors import ConfigError, InvalidInputError
from .hilbert import MAX_SITES
from .model import GUE_CONVENTION, RNG_ALGORITHM
from .thermometry import BetaSearchConfig

WORKERS_ENV = "SCAR_THERMO_WORKERS"

# keys that change where or how fast results are produced, not what they are
_UNHASHED = ("output_dir", "workers")


@dataclass(frozen=True)
class XXZParams:
    b: float = 0.5
    J: float = 1.0
    delta: float = 0.9


@dataclass(frozen=True)
class SearchParams:
    range_scale: float = 40.0
    grid_points: int = 256
    tolerance: float = 1e-10


@dataclass(frozen=True)
class FilterParams:
    r_window: float = 0.5
    r_band: float = 0.02
    r_band_small_n: float = 0.04
    gue_window: tuple = (0.58, 0.62)
    scar_position_band: tuple = (0.25, 0.75)
    excited_band: tuple = (0.45, 0.55)


@dataclass(frozen=True)
class RunConfig:
    model: str = "gue"
    n_sites: int = 12
    n_range: tuple = (8, 9, 10, 11, 12)
    base_seed: int = 0
    n_instances: int = 500
    min_accepted: int = 0
    workers: int = 1
    output_dir: str = "out"
    emit_objective_samples: bool = False
    xxz: XXZParams = field(default_factory=XXZParams)
    beta_search: SearchParams = field(default_factory=SearchParams)
    filters: FilterParams = field(default_factory=FilterParams)

    def __post_init__(self):
        validate(self)

    # -- conversions ------------------------------------------------------
    def to_dict(self):
        d = asdict(self)
        d["n_range"] = list(self.n_range)
        d["filters"]["gue_window"] = list(self.filters.gue_window)
        d["filters"]["scar_position_band"] = list(self.filters.scar_position_band)
        d["filters"]["excited_band"] = list(self.filters.excited_band)
        return d

    def to_toml(self):
        return tomli_w.dumps(self.to_dict())

    def search_config(self):
        s = self.beta_search
        return BetaSearchConfig(s.range_scale, s.grid_points, s.tolerance)

    def ensemble_config(self, compute_excited_band=False):
        f = self.filters
        return EnsembleConfig(
            search=self.search_config(),
            r_window=f.r_window,
            r_band=f.r_band,
            r_band_small_n=f.r_band_small_n,
            gue_window=tuple(f.gue_window),
            scar_position_band=tuple(f.scar_position_band),
            excited_band=tuple(f.excited_band),
            compute_excited_band=compute_excited_band,
            keep_objective_samples=self.emit_objective_samples,
        )

    def config_hash(self):
        d = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def manifest(self, **extra):
        f = self.filters
        doc = {
            "config_hash": self.config_hash(),
            "rng": RNG_ALGORITHM,
            "gue_convention": GUE_CONVENTION,
            "spin_operators": "sigma/2",
            "canonical_ensemble": "k=0 sector spectrum",
            "base_seed": self.base_seed,
            "seed_scheme": "base_seed + instance_id",
            "n_sites": self.n_sites,
            "n_range": list(self.n_range),
            "filters": {
                "r_window": f.r_window,
                "r_band": f.r_band,
                "r_band_small_n": f.r_band_small_n,
                "gue_window": list(f.gue_window),
                "scar_position_band": list(f.scar_position_band),
                "excited_band": list(f.excited_band),
            },
            "beta_search": asdict(self.beta_search),
            "code_version": __version__,
            "config": self.to_dict(),
        }
        doc.update(extra)
        return doc


def _finite(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(name, f"must be a finite number, got {value!r}")


def _int(name, value, lo=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"must be an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(name, f"must be >= {lo}, got {value}")


def _band(name, band):
    if len(band) != 2:
        raise ConfigError(name, "must be a pair [lo, hi]")
    for v in band:
        _finite(name, v)
    if not 0 <= band[0] <= band[1] <= 1:
        raise ConfigError(name, f"need 0 <= lo <= hi <= 1, got {list(band)}")


def validate(cfg):
    if cfg.model not in ("gue", "xxz"):
        raise ConfigError("model", f"must be 'gue' or 'xxz', got {cfg.model!r}")
    _int("n_sites", cfg.n_sites, 3)
    if cfg.n_sites > MAX_SITES:
        raise ConfigError("n_sites", f"exceeds cap {MAX_SITES}")
    if not cfg.n_range:
        raise ConfigError("n_range", "must not be empty")
    for n in cfg.n_range:
        _int("n_range", n, 3)
        if n > MAX_SITES:
            raise ConfigError("n_range", f"{n} exceeds cap {MAX_SITES}")
    _int("base_seed", cfg.base_seed, 0)
    if cfg.base_seed >= 2**64:
        raise ConfigError("base_seed", "must fit in 64 bits")
    _int("n_instances", cfg.n_instances, 1)
    _int("min_accepted", cfg.min_accepted, 0)
    _int("workers", cfg.workers, 1)
    if not isinstance(cfg.output_dir, str) or not cfg.output_dir:
        raise ConfigError("output_dir", "must be a non-empty path")
    if not isinstance(cfg.emit_objective_samples, bool):
        raise ConfigError("emit_objective_samples", "must be true or false")
    for k in ("b", "J", "delta"):
        _finite(f"xxz.{k}", getattr(cfg.xxz, k))
    s = cfg.beta_search
    _finite("beta_search.range_scale", s.range_scale)
    _int("beta_search.grid_points", s.grid_points, 64)
    _finite("beta_search.tolerance", s.tolerance)
    if s.range_scale <= 0:
        raise ConfigError("beta_search.range_scale", "must be positive")
    if not 0 < s.tolerance < 1:
        raise ConfigError("beta_search.tolerance", "must lie in (0, 1)")
    f = cfg.filters
    for k in ("r_window", "r_band", "r_band_small_n"):
        _finite(f"filters.{k}", getattr(f, k))
    if not 0 < f.r_window <= 1:
        raise ConfigError("filters.r_window", "must lie in (0, 1]")
    if f.r_band < 0 or f.r_band_small_n < 0:
        raise ConfigError("filters.r_band", "must be non-negative")
    _band("filters.gue_window", f.gue_window)
    _band("filters.scar_position_band", f.scar_position_band)
    _band("filters.excited_band", f.excited_band)


_SECTIONS = {"xxz": XXZParams, "beta_search": SearchParams, "filters": FilterParams}


def from_dict(doc):
    """Build a :class:`RunConfig` from a parsed mapping; unknown keys are errors."""
    doc = dict(doc)
    top = {f for f in RunConfig.__dataclass_fields__}
    for key in doc:
        if key not in top:
            raise ConfigError(key, "unknown configuration key")
    kwargs = {}
    for key, value in doc.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(key, "must be a table")
            cls = _SECTIONS[key]
            for sub in value:
                if sub not in cls.__dataclass_fields__:
                    raise ConfigError(f"{key}.{sub}", "unknown configuration key")
            sub = {k: tuple(v) if isinstance(v, list) else v for k, v in value.items()}
            kwargs[key] = cls(**sub)
        elif key == "n_range":
            if not isinstance(value, (list, tuple)):
                raise ConfigError(key, "must be a list of integers")
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    try:
        return RunConfig(**kwargs)
    except (TypeError, InvalidInputError) as exc:
        raise ConfigError("config", str(exc)) from exc


def parse_toml(text):
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"invalid TOML: {exc}") from exc
    return from_dict(doc)


def load(path):
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("config", f"invalid TOML in {path}: {exc}") from exc
    return from_dict(doc)


def with_overrides(cfg, **overrides):
    """Apply non-None overrides (CLI flags take precedence over the file)."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    try:
        return replace(cfg, **changes)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from exc
