"""Cross-sectional sampling of disease episodes.

Three generators produce the same target law for ``(X, D, Z)``:

``sample_direct``
    Onsets uniform on ``[-tau, 0]``; an episode is kept iff it is still in
    progress at time 0 (random left truncation).
``sample_point_process``
    Onsets at the points of a homogeneous Poisson process on ``[-A, 0]``;
    the number of sampled episodes is random.
``sample_exact``
    No rejection: ``Z`` from the tilted covariate law, ``e^(theta'Z) D`` from
    ``f1`` by inversion, and ``X = U D`` with an independent uniform ``U``.

Randomness comes from numpy's counter-based Philox generator.  Stream
``(seed, purpose, chunk)`` uses key ``(seed, purpose)`` and starts its
counter at ``chunk << 192``, so chunks never overlap and any chunk can be
regenerated on its own.  Chunk ``c`` of the exact sampler holds records
``c * CHUNK`` to ``(c + 1) * CHUNK - 1``.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .covariate import CovariateModel
from .density import BaselineModel
from .errors import DomainError

__all__ = [
    "CHUNK",
    "stream",
    "DirectTruncation",
    "PointProcess",
    "ExactInverse",
    "SamplerConfig",
    "EpisodeRecord",
    "EpisodeSample",
    "ShortWindowWarning",
    "duration_quantile_bound",
    "sample_direct",
    "sample_point_process",
    "sample_exact",
    "simulate",
    "write_records",
    "read_records",
]

CHUNK = 1 << 16
CANDIDATE_CHUNK = 1 << 20
WINDOW_FACTOR = 50.0
MIN_ACCEPTANCE = 1e-9

_DIRECT, _PP_COUNT, _PP_POINTS, _EXACT = 0, 1, 2, 3
_U64 = (1 << 64) - 1


def stream(seed: int, purpose: int, chunk: int) -> np.random.Generator:
    """Independent Philox stream for one chunk of one generator."""
    bitgen = np.random.Philox(key=np.array([int(seed) & _U64, purpose], dtype=np.uint64),
                              counter=[0, 0, 0, chunk])
    return np.random.Generator(bitgen)


class ShortWindowWarning(UserWarning):
    """The onset window is shorter than the truncation-bias guard."""


@dataclass(frozen=True)
class DirectTruncation:
    tau: float


@dataclass(frozen=True)
class PointProcess:
    intensity: float
    window: float


@dataclass(frozen=True)
class ExactInverse:
    pass


@dataclass(frozen=True)
class SamplerConfig:
    """Everything that determines a simulated record stream.

    ``theta`` is empty when there are no covariates.
    """

    baseline: BaselineModel
    mode: DirectTruncation | PointProcess | ExactInverse = field(default_factory=ExactInverse)
    seed: int = 0
    theta: Sequence[float] = ()
    covariates: CovariateModel | None = None
    n: int | None = None
    allow_short_window: bool = False

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        k = 0 if self.covariates is None else self.covariates.dim
        if theta.size != k:
            raise DomainError(f"theta has length {theta.size} but covariates have dimension {k}")
        object.__setattr__(self, "theta", tuple(theta.tolist()))
        mode = self.mode
        if isinstance(mode, DirectTruncation) and not mode.tau > 0:
            raise DomainError(f"tau must be positive, got {mode.tau}")
        if isinstance(mode, PointProcess) and not (mode.intensity > 0 and mode.window >= 0):
            raise DomainError("point process needs intensity > 0 and window >= 0")
        if not 0 <= int(self.seed) <= _U64:
            raise DomainError("seed must be an unsigned 64-bit integer")

    @property
    def dim(self) -> int:
        return len(self.theta)


@dataclass(frozen=True)
class EpisodeRecord:
    x: float
    d: float
    z: tuple[float, ...]
    onset: float
    fraction: float


@dataclass
class EpisodeSample:
    """Columnar batch of episodes; iterating yields :class:`EpisodeRecord`."""

    x: np.ndarray
    d: np.ndarray
    z: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.d = np.asarray(self.d, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if z.ndim != 2:
            # a flat vector is one covariate per record; an empty one means none
            z = z.reshape(self.x.size, -1) if z.size else np.empty((self.x.size, 0))
        if self.d.shape != self.x.shape or z.shape[0] != self.x.size:
            raise DomainError(f"column lengths differ: x {self.x.size}, d {self.d.size}, "
                              f"z {z.shape[0]}")
        self.z = z

    @property
    def onset(self) -> np.ndarray:
        return -self.x

    @property
    def fraction(self) -> np.ndarray:
        return self.x / self.d

    @property
    def dim(self) -> int:
        return self.z.shape[1]

    def __len__(self) -> int:
        return self.x.size

    def __getitem__(self, i: int) -> EpisodeRecord:
        x, d = float(self.x[i]), float(self.d[i])
        return EpisodeRecord(x, d, tuple(self.z[i].tolist()), -x, x / d)

    def __iter__(self) -> Iterator[EpisodeRecord]:
        for i in range(len(self)):
            yield self[i]


def duration_quantile_bound(cfg: SamplerConfig, p: float = 0.999) -> float:
    """Upper bound on the ``p`` quantile of ``T = exp(-theta'W) V``.

    Splits the tail probability evenly between ``V`` and the covariate
    factor; exact when there are no covariates.
    """
    if cfg.covariates is None:
        return float(cfg.baseline.quantile(p))
    half = 1 - (1 - p) / 2
    return float(cfg.baseline.quantile(half)) * cfg.covariates.scale_quantile(cfg.theta, half)


def _guard_window(cfg: SamplerConfig, length: float, name: str) -> list[str]:
    q = duration_quantile_bound(cfg)
    if length >= WINDOW_FACTOR * q:
        return []
    msg = (f"{name}={length:g} is below {WINDOW_FACTOR:g} x the 0.999 duration "
           f"quantile ({q:.4g}); truncation bias is O(P(T > {name}))")
    if not cfg.allow_short_window:
        raise DomainError(msg + "; set allow_short_window to proceed")
    warnings.warn(msg, ShortWindowWarning, stacklevel=3)
    return [msg]


def _core_draws(cfg: SamplerConfig, gen: np.random.Generator, size: int):
    """Covariate and duration for ``size`` core-model episodes."""
    if cfg.covariates is None:
        w = np.empty((size, 0))
        scale = 1.0
    else:
        w = cfg.covariates.sample(gen, size)
        scale = np.exp(-(w @ np.asarray(cfg.theta)))
    v = cfg.baseline.sample(gen, size)
    return w, scale * v


def _expected_acceptance(cfg: SamplerConfig, length: float) -> float:
    mean_t = cfg.baseline.mean
    if cfg.covariates is not None:
        mean_t *= math.exp(cfg.covariates.log_normalizer(np.asarray(cfg.theta)))
    return min(mean_t, length) / length


def sample_direct(cfg: SamplerConfig, n: int | None = None) -> tuple[EpisodeSample, float]:
    """Direct approach: uniform onsets on ``[-tau, 0]`` with left truncation.

    Returns the first ``n`` accepted episodes and the acceptance rate.
    """
    mode = cfg.mode
    if not isinstance(mode, DirectTruncation):
        raise DomainError("sample_direct needs a DirectTruncation config")
    n = cfg.n if n is None else n
    if n is None or n < 0:
        raise DomainError("sample_direct needs a nonnegative record count")
    notes = _guard_window(cfg, mode.tau, "tau")
    if _expected_acceptance(cfg, mode.tau) < MIN_ACCEPTANCE:
        raise DomainError(
            f"acceptance probability below {MIN_ACCEPTANCE:g}; check theta={list(cfg.theta)}")
    xs, ds, zs = [], [], []
    accepted = candidates = 0
    chunk = 0
    while accepted < n:
        gen = stream(cfg.seed, _DIRECT, chunk)
        w, t = _core_draws(cfg, gen, CANDIDATE_CHUNK)
        # elapsed time since onset, in (0, tau]
        x = mode.tau * (1.0 - gen.random(CANDIDATE_CHUNK))
        keep = t >= x
        xs.append(x[keep])
        ds.append(t[keep])
        zs.append(w[keep])
        accepted += int(keep.sum())
        candidates += CANDIDATE_CHUNK
        chunk += 1
    rate = accepted / candidates if candidates else float("nan")
    sample = EpisodeSample(np.concatenate(xs)[:n] if xs else np.empty(0),
                           np.concatenate(ds)[:n] if ds else np.empty(0),
                           np.concatenate(zs)[:n] if zs else np.empty((0, cfg.dim)),
                           meta={"mode": "direct", "acceptance_rate": rate,
                                 "candidates": candidates, "warnings": notes})
    return sample, rate


def sample_point_process(cfg: SamplerConfig) -> EpisodeSample:
    """Poisson onsets on ``[-A, 0]``; keeps the episodes in progress at time 0.

    The number of records ``N`` is random, with mean ``lambda E min(T, A)``.
    """
    mode = cfg.mode
    if not isinstance(mode, PointProcess):
        raise DomainError("sample_point_process needs a PointProcess config")
    notes = _guard_window(cfg, mode.window, "window")
    total = int(stream(cfg.seed, _PP_COUNT, 0).poisson(mode.intensity * mode.window))
    xs, ds, zs = [], [], []
    for chunk in range(-(-total // CANDIDATE_CHUNK)):
        size = min(CANDIDATE_CHUNK, total - chunk * CANDIDATE_CHUNK)
        gen = stream(cfg.seed, _PP_POINTS, chunk)
        w, t = _core_draws(cfg, gen, size)
        x = mode.window * (1.0 - gen.random(size))
        keep = t >= x
        xs.append(x[keep])
        ds.append(t[keep])
        zs.append(w[keep])
    x = np.concatenate(xs) if xs else np.empty(0)
    return EpisodeSample(x, np.concatenate(ds) if ds else np.empty(0),
                         np.concatenate(zs) if zs else np.empty((0, cfg.dim)),
                         meta={"mode": "point_process", "n": int(x.size),
                               "points": total, "warnings": notes})


def sample_exact(cfg: SamplerConfig, n: int | None = None) -> EpisodeSample:
    """Rejection-free sampling through the ``X = U D`` representation."""
    n = cfg.n if n is None else n
    if n is None or n < 0:
        raise DomainError("sample_exact needs a nonnegative record count")
    law = None if cfg.covariates is None else cfg.covariates.tilt(cfg.theta)
    theta = np.asarray(cfg.theta)
    xs, ds, zs = [], [], []
    for chunk in range(-(-n // CHUNK)):
        size = min(CHUNK, n - chunk * CHUNK)
        gen = stream(cfg.seed, _EXACT, chunk)
        z = np.empty((size, 0)) if law is None else law.sample(gen, size)
        vstar = np.asarray(cfg.baseline.length_biased_quantile(gen.random(size)), dtype=float)
        bad = ~(vstar > 0) | ~np.isfinite(vstar)
        while bad.any():
            vstar[bad] = cfg.baseline.length_biased_quantile(gen.random(int(bad.sum())))
            bad = ~(vstar > 0) | ~np.isfinite(vstar)
        d = vstar if law is None else np.exp(-(z @ theta)) * vstar
        x = (1.0 - gen.random(size)) * d
        xs.append(x)
        ds.append(d)
        zs.append(z)
    x = np.concatenate(xs) if xs else np.empty(0)
    return EpisodeSample(x, np.concatenate(ds) if ds else np.empty(0),
                         np.concatenate(zs) if zs else np.empty((0, cfg.dim)),
                         meta={"mode": "exact", "warnings": []})


def simulate(cfg: SamplerConfig) -> EpisodeSample:
    """Dispatch on ``cfg.mode``."""
    if isinstance(cfg.mode, DirectTruncation):
        return sample_direct(cfg)[0]
    if isinstance(cfg.mode, PointProcess):
        return sample_point_process(cfg)
    return sample_exact(cfg)


# ---------------------------------------------------------------------------
# record files


def _fmt(v: float) -> str:
    return repr(float(v))


def write_records(sample: EpisodeSample, path, fmt: str = "csv") -> None:
    """Write records as CSV (``x,d,z_1..z_k,onset,fraction``) or JSON lines."""
    path = Path(path)
    k = sample.dim
    onset, frac = sample.onset, sample.fraction
    if fmt == "csv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "d", *[f"z_{j + 1}" for j in range(k)], "onset", "fraction"])
            for i in range(len(sample)):
                w.writerow([_fmt(sample.x[i]), _fmt(sample.d[i]),
                            *[_fmt(v) for v in sample.z[i]],
                            _fmt(onset[i]), _fmt(frac[i])])
    elif fmt in ("json", "jsonl"):
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for i in range(len(sample)):
                fh.write(json.dumps({"x": float(sample.x[i]), "d": float(sample.d[i]),
                                     "z": sample.z[i].tolist(), "onset": float(onset[i]),
                                     "fraction": float(frac[i])}) + "\n")
    else:
        raise DomainError(f"unknown record format {fmt!r}")


def read_records(path) -> EpisodeSample:
    """Read a record file written by :func:`write_records` (either format)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        x = [r["x"] for r in rows]
        d = [r["d"] for r in rows]
        k = len(rows[0]["z"]) if rows else 0
        z = np.array([r["z"] for r in rows], dtype=float).reshape(len(rows), k)
        return EpisodeSample(x, d, z)
    reader = csv.reader(text.splitlines())
    header = next(reader)
    if header[:2] != ["x", "d"] or header[-2:] != ["onset", "fraction"]:
        raise DomainError(f"unexpected record header {header}")
    k = len(header) - 4
    data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    data = data.reshape(-1, len(header))
    return EpisodeSample(data[:, 0], data[:, 1], data[:, 2:2 + k])
