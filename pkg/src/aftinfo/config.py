"""The shared JSON run configuration.

One file drives every command.  Top-level fields::

    {
      "baseline":   {"family": "weibull", "gamma": 2},
      "covariates": {"kind": "discrete", "support": [[0], [1]], "probs": [0.5, 0.5]},
      "theta":      [0.0],
      "tol":        1e-7,
      "seed":       12345,
      "sweep":      {"family": "weibull", "gammas": [1, 2, 5, 10]},
      "sampler":    {"mode": "direct", "tau": 200, "n": 100000},
      "empirical":  {"records": "runs/sim.csv", "schemes": ["length_biased"], "h_known": false},
      "verify":     {"weibull": [0.5, 1, 2], "loglogistic": [1.5, 2], "custom": [...],
                     "mixing_laws": [{"kind": "degenerate", "u0": 3}], "mixing_bases": [...]}
    }

Every block is optional; commands complain only about what they need.
See ``docs/config.md`` for the full field reference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .covariate import CovariateModel, covariates_from_dict
from .density import (
    BaselineModel,
    Degenerate,
    GridBaseline,
    LogLogistic,
    MixingLaw,
    TwoPoint,
    Uniform,
    UnitUniform,
    Weibull,
    baseline_from_dict,
)
from .errors import ConfigError, DomainError
from .quadrature import DEFAULT_INFO_TOL
from .sampler import DirectTruncation, ExactInverse, PointProcess, SamplerConfig

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "parse_config",
    "lognormal_grid",
    "mixing_law_from_dict",
    "DEFAULT_WEIBULL_GRID",
    "DEFAULT_LOGLOGISTIC_GRID",
    "SWEEP_WEIBULL_GRID",
    "SWEEP_LOGLOGISTIC_GRID",
]

DEFAULT_WEIBULL_GRID = (0.5, 1.0, 2.0, 3.0, 5.0, 10.0)
DEFAULT_LOGLOGISTIC_GRID = (1.5, 2.0, 3.0, 5.0, 10.0)
# gamma ranges for the information-versus-gamma curves
SWEEP_WEIBULL_GRID = tuple(np.round(np.linspace(0.5, 10.0, 39), 6).tolist())
SWEEP_LOGLOGISTIC_GRID = tuple(np.round(np.linspace(1.25, 10.0, 36), 6).tolist())

_TOP = {"baseline", "covariates", "theta", "tol", "seed", "sweep", "sampler",
        "empirical", "verify", "description"}


def lognormal_grid(sigma: float, mu: float = 0.0, nodes: int = 121,
                   span: float = 4.0) -> GridBaseline:
    """Lognormal shape tabulated over ``mu +- span sigma`` on the log scale.

    The two outermost nodes at each end are set to zero so the interpolant
    tapers off and both scale informations stay finite.
    """
    t = np.linspace(mu - span * sigma, mu + span * sigma, nodes)
    x = np.exp(t)
    p = np.exp(-0.5 * ((t - mu) / sigma) ** 2) / (x * sigma * np.sqrt(2 * np.pi))
    p[:2] = 0.0
    p[-2:] = 0.0
    return GridBaseline(x, p, name=f"lognormal-grid(sigma={sigma:g})")


def mixing_law_from_dict(spec: dict) -> MixingLaw:
    kind = str(spec.get("kind", "")).lower().replace("-", "_")
    try:
        if kind == "degenerate":
            return Degenerate(float(spec["u0"]))
        if kind in ("two_point", "twopoint"):
            return TwoPoint(float(spec["u1"]), float(spec["u2"]), float(spec.get("p", 0.5)))
        if kind == "uniform":
            return Uniform(float(spec["a"]), float(spec["b"]))
        if kind in ("unit_uniform", "unituniform"):
            return UnitUniform()
    except KeyError as exc:
        raise ConfigError(f"mixing law of kind {kind!r} is missing {exc}") from None
    raise ConfigError(f"unknown mixing law kind {spec.get('kind')!r}")


def _default_custom():
    return [lognormal_grid(s) for s in (0.25, 0.5, 1.0)]


def _default_laws():
    return [Degenerate(3.0), TwoPoint(1.0, 2.0, 0.5), Uniform(0.5, 2.0), UnitUniform()]


def _default_mixing_bases():
    # smooth bases keep the nested mixture quadrature cheap
    return [Weibull(1.0), Weibull(2.0), LogLogistic(3.0)]


@dataclass
class VerifySettings:
    weibull: tuple[float, ...] = DEFAULT_WEIBULL_GRID
    loglogistic: tuple[float, ...] = DEFAULT_LOGLOGISTIC_GRID
    custom: list[BaselineModel] = field(default_factory=_default_custom)
    mixing_laws: list[MixingLaw] = field(default_factory=_default_laws)
    mixing_bases: list[BaselineModel] = field(default_factory=_default_mixing_bases)
    # harness self-test: {"family", "gamma", "scheme", "delta"}
    corrupt_closed_form: dict | None = None


@dataclass
class RunConfig:
    """Parsed configuration plus command-line overrides."""

    raw: dict = field(default_factory=dict)
    baseline: BaselineModel | None = None
    covariates: CovariateModel | None = None
    theta: tuple[float, ...] = ()
    tol: float = DEFAULT_INFO_TOL
    seed: int | None = None
    sweep: dict = field(default_factory=dict)
    sampler: dict = field(default_factory=dict)
    empirical: dict = field(default_factory=dict)
    verify: VerifySettings = field(default_factory=VerifySettings)
    source: str = "<defaults>"

    def require_baseline(self) -> BaselineModel:
        if self.baseline is None:
            raise ConfigError(f"{self.source}: field 'baseline' is required for this command")
        return self.baseline

    def sampler_config(self, seed: int) -> SamplerConfig:
        """SamplerConfig from the ``sampler`` block."""
        blk = self.sampler
        mode_name = str(blk.get("mode", "exact")).lower()
        where = f"{self.source}: sampler"
        try:
            if mode_name == "direct":
                mode = DirectTruncation(float(blk["tau"]))
            elif mode_name in ("point_process", "pointprocess", "poisson"):
                mode = PointProcess(float(blk["intensity"]), float(blk["window"]))
            elif mode_name == "exact":
                mode = ExactInverse()
            else:
                raise ConfigError(f"{where}.mode: unknown mode {blk.get('mode')!r}")
        except KeyError as exc:
            raise ConfigError(f"{where}: mode {mode_name!r} needs field {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from None
        n = blk.get("n")
        if n is None and not isinstance(mode, PointProcess):
            raise ConfigError(f"{where}.n: record count is required for mode {mode_name!r}")
        return SamplerConfig(self.require_baseline(), mode, seed=seed, theta=self.theta,
                             covariates=self.covariates,
                             n=None if n is None else _int(n, f"{where}.n"),
                             allow_short_window=bool(blk.get("allow_short_window", False)))


def _int(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v) or v < 0:
        raise ConfigError(f"{where}: expected a nonnegative integer, got {v!r}")
    return int(v)


def _floats(v, where) -> tuple[float, ...]:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [v]
    if not isinstance(v, list) or not all(isinstance(a, (int, float)) and not isinstance(a, bool)
                                          for a in v):
        raise ConfigError(f"{where}: expected a list of numbers, got {v!r}")
    return tuple(float(a) for a in v)


def _block(d: dict, key: str, source: str) -> dict:
    v = d.get(key, {})
    if not isinstance(v, dict):
        raise ConfigError(f"{source}: field '{key}' must be an object")
    return v


def _wrap(fn, spec, where):
    # a value outside a constructor's domain stays a DomainError (exit code 2);
    # structural faults are ConfigErrors (exit code 1).  Both get the field path.
    try:
        return fn(spec)
    except (DomainError, ConfigError) as exc:
        raise type(exc)(f"{where}: {exc}") from None
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(data: Any, source: str = "<config>") -> RunConfig:
    """Validate a decoded JSON object and build a :class:`RunConfig`."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    unknown = sorted(set(data) - _TOP)
    if unknown:
        raise ConfigError(f"{source}: unknown field(s) {', '.join(unknown)}")
    cfg = RunConfig(raw=data, source=source)
    if "baseline" in data:
        cfg.baseline = _wrap(baseline_from_dict, data["baseline"], f"{source}: baseline")
    if "covariates" in data:
        cfg.covariates = _wrap(covariates_from_dict, data["covariates"], f"{source}: covariates")
    if "theta" in data:
        cfg.theta = _floats(data["theta"], f"{source}: theta")
    k = 0 if cfg.covariates is None else cfg.covariates.dim
    if len(cfg.theta) != k:
        raise ConfigError(f"{source}: theta has length {len(cfg.theta)} "
                          f"but covariates have dimension {k}")
    if "tol" in data:
        (cfg.tol,) = _floats(data["tol"], f"{source}: tol")
        if not cfg.tol > 0:
            raise ConfigError(f"{source}: tol must be positive")
    if "seed" in data:
        cfg.seed = _int(data["seed"], f"{source}: seed")
    cfg.sweep = _block(data, "sweep", source)
    cfg.sampler = _block(data, "sampler", source)
    cfg.empirical = _block(data, "empirical", source)
    cfg.verify = _parse_verify(_block(data, "verify", source), f"{source}: verify")
    return cfg


def _parse_verify(blk: dict, where: str) -> VerifySettings:
    vs = VerifySettings()
    if "weibull" in blk:
        vs.weibull = _floats(blk["weibull"], f"{where}.weibull")
    if "loglogistic" in blk:
        vs.loglogistic = _floats(blk["loglogistic"], f"{where}.loglogistic")
    if "custom" in blk:
        vs.custom = [_wrap(baseline_from_dict, s, f"{where}.custom[{i}]")
                     for i, s in enumerate(blk["custom"])]
    if "mixing_laws" in blk:
        vs.mixing_laws = [_wrap(mixing_law_from_dict, s, f"{where}.mixing_laws[{i}]")
                          for i, s in enumerate(blk["mixing_laws"])]
    if "mixing_bases" in blk:
        vs.mixing_bases = [_wrap(baseline_from_dict, s, f"{where}.mixing_bases[{i}]")
                           for i, s in enumerate(blk["mixing_bases"])]
    if "corrupt_closed_form" in blk:
        vs.corrupt_closed_form = dict(blk["corrupt_closed_form"])
    return vs


def load_config(path) -> RunConfig:
    """Read and parse a config file; JSON syntax errors report line and column."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(data, str(path))
