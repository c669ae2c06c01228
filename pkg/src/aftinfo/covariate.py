"""Covariate laws, their exponentially tilted sampled versions, and the
information bounds for the regression parameter.

Under either sampling scheme the sampled covariate has density

    f_Z(z) = exp(-theta'z) h(z) / E_h exp(-theta'W),

which does not involve the baseline.  The information bounds are
``Sigma_Z * I_s(f)`` when ``h`` is unknown and ``Sigma_Z * (I_s(f) + 1)``
when it is known, with ``f = f1`` (length biased) or ``f2`` (current
duration).
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import logsumexp
from scipy.stats import norm

from .density import BaselineModel, Scheme
from .errors import ConfigError, DomainError
from .fisher import closed_form_for, info_scale
from .quadrature import DEFAULT_INFO_TOL, integrate_interval

__all__ = [
    "CovariateModel",
    "DiscreteCovariate",
    "GaussianDiagonalCovariate",
    "GridCovariate",
    "SampledCovariateLaw",
    "InfoBoundReport",
    "covariates_from_dict",
    "info_bound",
    "relative_efficiency",
    "PSD_FLOOR",
]

PSD_FLOOR = -1e-12


def _theta(theta, k):
    t = np.atleast_1d(np.asarray(theta, dtype=float))
    if t.shape != (k,):
        raise DomainError(f"theta must have length {k}, got shape {t.shape}")
    return t


class CovariateModel(ABC):
    """Law ``h`` of the core-model covariate ``W`` in ``R^k``."""

    dim: int

    def __init__(self, theta_box: Sequence[Sequence[float]] | None = None):
        if theta_box is not None:
            lower, upper = (np.asarray(b, dtype=float) for b in theta_box)
            for corner in itertools.product(*zip(lower, upper)):
                if not np.isfinite(self.log_normalizer(np.array(corner))):
                    raise DomainError(
                        f"E_h exp(-theta'W) is infinite at theta={list(corner)}")

    @abstractmethod
    def log_normalizer(self, theta) -> float:
        """``log E_h exp(-theta'W)``."""

    @abstractmethod
    def pdf(self, z):
        """Density (or mass) of ``h`` at the rows of ``z``."""

    @abstractmethod
    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` draws from ``h`` as an ``(n, k)`` array."""

    @abstractmethod
    def scale_quantile(self, theta, p: float) -> float:
        """Quantile of ``exp(-theta'W)`` under ``h``."""

    def tilt(self, theta) -> "SampledCovariateLaw":
        return SampledCovariateLaw(self, theta)


class DiscreteCovariate(CovariateModel):
    """Finitely supported covariate: rows of ``support`` with ``probs``."""

    def __init__(self, support, probs, theta_box=None):
        pts = np.asarray(support, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        p = np.asarray(probs, dtype=float)
        if pts.ndim != 2 or p.shape != (pts.shape[0],):
            raise DomainError("support must be (m, k) with one probability per row")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise DomainError(f"probabilities must be nonnegative and sum to 1, got {p.sum()!r}")
        self.support = pts
        self.probs = p
        self.dim = pts.shape[1]
        super().__init__(theta_box)

    def _log_weights(self, theta):
        t = _theta(theta, self.dim)
        with np.errstate(divide="ignore"):
            return np.log(self.probs) - self.support @ t

    def log_normalizer(self, theta):
        return float(logsumexp(self._log_weights(theta)))

    def _index(self, z):
        z = np.atleast_2d(np.asarray(z, dtype=float))
        if z.shape[1] != self.dim:
            z = z.reshape(-1, self.dim)
        match = np.all(np.abs(z[:, None, :] - self.support[None, :, :]) <= 1e-12, axis=2)
        return np.where(match.any(axis=1), match.argmax(axis=1), -1)

    def pdf(self, z):
        idx = self._index(z)
        return np.where(idx >= 0, self.probs[np.maximum(idx, 0)], 0.0)

    def sample(self, rng, n):
        return self.support[rng.choice(self.probs.size, size=n, p=self.probs)]

    def scale_quantile(self, theta, p):
        s = np.exp(-(self.support @ _theta(theta, self.dim)))
        order = np.argsort(s)
        cum = np.cumsum(self.probs[order])
        return float(s[order][min(np.searchsorted(cum, p), s.size - 1)])


class GaussianDiagonalCovariate(CovariateModel):
    """Independent normal coordinates; tilting only shifts the mean."""

    def __init__(self, mean, variances, theta_box=None):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.variances = np.atleast_1d(np.asarray(variances, dtype=float))
        if self.mean.shape != self.variances.shape or self.mean.ndim != 1:
            raise DomainError("mean and variances must be vectors of equal length")
        if np.any(self.variances <= 0):
            raise DomainError("variances must be positive")
        self.dim = self.mean.size
        super().__init__(theta_box)

    def log_normalizer(self, theta):
        t = _theta(theta, self.dim)
        return float(-t @ self.mean + 0.5 * (self.variances * t**2).sum())

    def pdf(self, z):
        z = np.atleast_2d(np.asarray(z, dtype=float)).reshape(-1, self.dim)
        return np.prod(norm.pdf(z, self.mean, np.sqrt(self.variances)), axis=1)

    def sample(self, rng, n):
        return self.mean + np.sqrt(self.variances) * rng.standard_normal((n, self.dim))

    def scale_quantile(self, theta, p):
        # -theta'W ~ N(-theta'mean, sum theta^2 var)
        t = _theta(theta, self.dim)
        loc = -t @ self.mean
        sd = np.sqrt((t**2 * self.variances).sum())
        return float(np.exp(loc + sd * norm.ppf(p)))


class GridCovariate(CovariateModel):
    """Scalar covariate with a PCHIP density through ``(z, pdf)`` pairs."""

    def __init__(self, z, pdf, theta_box=None):
        z = np.asarray(z, dtype=float)
        y = np.asarray(pdf, dtype=float)
        if z.ndim != 1 or z.shape != y.shape or z.size < 3 or np.any(np.diff(z) <= 0):
            raise DomainError("grid covariate needs increasing z with matching pdf values")
        if np.any(y < 0) or not np.any(y > 0):
            raise DomainError("grid covariate pdf must be nonnegative and not all zero")
        spline = PchipInterpolator(z, y, extrapolate=False)
        self._spline = PchipInterpolator(z, y / float(spline.integrate(z[0], z[-1])),
                                         extrapolate=False)
        self.grid = z
        self.dim = 1
        super().__init__(theta_box)

    def _h(self, z):
        z = np.asarray(z, dtype=float)
        inside = (z >= self.grid[0]) & (z <= self.grid[-1])
        val = self._spline(np.where(inside, z, self.grid[0]))
        return np.where(inside, np.maximum(val, 0.0), 0.0)

    def _moments(self, theta, powers=(0,)):
        t = float(_theta(theta, 1)[0])
        shift = -t * (self.grid[-1] if t < 0 else self.grid[0])

        def f(z):
            base = self._h(z) * np.exp(-t * z - shift)
            return np.stack([base * z**k for k in powers])

        res = integrate_interval(f, self.grid[0], self.grid[-1], tol=1e-300,
                                 rtol=1e-13, points=self.grid)
        return res.value, shift

    def log_normalizer(self, theta):
        val, shift = self._moments(theta)
        return float(np.log(val[0]) + shift)

    def pdf(self, z):
        return self._h(np.asarray(z, dtype=float).reshape(-1))

    def _inverse_table(self, theta):
        t = float(_theta(theta, 1)[0])
        fine = np.unique(np.concatenate(
            [np.linspace(a, b, 65) for a, b in zip(self.grid[:-1], self.grid[1:])]))
        left, width = fine[:-1], np.diff(fine)
        logn = self.log_normalizer(theta)

        def seg(u):
            zz = left[:, None] + width[:, None] * u[None, :]
            return width[:, None] * self._h(zz) * np.exp(-t * zz - logn)

        pieces = integrate_interval(seg, 0.0, 1.0, tol=1e-300, rtol=1e-13).value
        cdf = np.concatenate([[0.0], np.cumsum(pieces)])
        return fine, cdf / cdf[-1]

    def sample(self, rng, n, theta=None):
        fine, cdf = self._inverse_table(np.zeros(1) if theta is None else theta)
        return np.interp(rng.random(n), cdf, fine)[:, None]

    def scale_quantile(self, theta, p):
        t = float(_theta(theta, 1)[0])
        fine, cdf = self._inverse_table(np.zeros(1))
        zq = np.interp(1 - p if t > 0 else p, cdf, fine)
        return float(np.exp(-t * zq))


class SampledCovariateLaw:
    """Law of the sampled covariate ``Z``: ``h`` tilted by ``exp(-theta'z)``.

    Takes no baseline: the sampled covariate law does not depend on it.
    """

    def __init__(self, base: CovariateModel, theta):
        self.base = base
        self.theta = _theta(theta, base.dim)
        self.log_normalizer = base.log_normalizer(self.theta)
        if not np.isfinite(self.log_normalizer):
            raise DomainError(
                f"E_h exp(-theta'W) is not finite at theta={self.theta.tolist()}")
        self.normalizer = float(np.exp(self.log_normalizer))

    @property
    def dim(self) -> int:
        return self.base.dim

    @cached_property
    def _neutral(self) -> bool:
        return bool(np.all(self.theta == 0))

    def pdf(self, z):
        """``exp(-theta'z) h(z) / E_h exp(-theta'W)``; zero off the support."""
        z = np.asarray(z, dtype=float)
        rows = np.atleast_2d(z).reshape(-1, self.dim)
        h = self.base.pdf(rows)
        if self._neutral:
            out = h
        else:
            out = h * np.exp(-(rows @ self.theta) - self.log_normalizer)
        return float(out[0]) if z.ndim <= 1 and rows.shape[0] == 1 else out

    @cached_property
    def probs(self) -> np.ndarray:
        """Tilted probabilities of the support points (discrete base only)."""
        if not isinstance(self.base, DiscreteCovariate):
            raise DomainError("probs is defined for discrete covariates only")
        if self._neutral:
            return self.base.probs
        lw = self.base._log_weights(self.theta)
        return np.exp(lw - logsumexp(lw))

    @cached_property
    def mean(self) -> np.ndarray:
        b = self.base
        if isinstance(b, DiscreteCovariate):
            return self.probs @ b.support
        if isinstance(b, GaussianDiagonalCovariate):
            return b.mean - b.variances * self.theta
        val, _ = b._moments(self.theta, powers=(0, 1))
        return np.array([val[1] / val[0]])

    def sigma_z(self) -> np.ndarray:
        """Covariance matrix of the sampled covariates."""
        return self._sigma.copy()

    @cached_property
    def _sigma(self):
        b = self.base
        if isinstance(b, DiscreteCovariate):
            centered = b.support - self.mean
            s = (centered * self.probs[:, None]).T @ centered
        elif isinstance(b, GaussianDiagonalCovariate):
            s = np.diag(b.variances)
        else:
            val, _ = b._moments(self.theta, powers=(0, 1, 2))
            m1 = val[1] / val[0]
            s = np.array([[val[2] / val[0] - m1**2]])
        s = 0.5 * (s + s.T)
        if np.linalg.eigvalsh(s).min() < PSD_FLOOR:
            raise DomainError("sampled covariate covariance is not positive semidefinite")
        return s

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        b = self.base
        if isinstance(b, DiscreteCovariate):
            return b.support[rng.choice(self.probs.size, size=n, p=self.probs)]
        if isinstance(b, GaussianDiagonalCovariate):
            return self.mean + np.sqrt(b.variances) * rng.standard_normal((n, self.dim))
        return b.sample(rng, n, theta=self.theta)


def covariates_from_dict(spec: dict) -> CovariateModel:
    """Build a covariate model from its JSON description.

    ``{"kind": "discrete", "support": [[0], [1]], "probs": [0.5, 0.5]}``,
    ``{"kind": "gaussian", "mean": [0], "variances": [1]}`` or
    ``{"kind": "grid", "grid": [[z, pdf], ...]}``.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("covariates block must be an object with a 'kind' field")
    kind = str(spec["kind"]).lower()
    box = spec.get("theta_box")
    try:
        if kind == "discrete":
            return DiscreteCovariate(spec["support"], spec["probs"], theta_box=box)
        if kind in ("gaussian", "gaussian_diagonal"):
            return GaussianDiagonalCovariate(spec["mean"], spec["variances"], theta_box=box)
        if kind == "grid":
            grid = np.asarray(spec["grid"], dtype=float)
            return GridCovariate(grid[:, 0], grid[:, 1], theta_box=box)
    except KeyError as exc:
        raise ConfigError(f"covariates block of kind {kind!r} is missing {exc}") from None
    raise ConfigError(f"unknown covariate kind {spec['kind']!r}")


@dataclass(frozen=True)
class InfoBoundReport:
    matrix: np.ndarray
    scheme: Scheme
    h_known: bool
    scalar_info: float
    sigma_z: np.ndarray
    error_estimate: float
    method: str

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "h_known": self.h_known,
            "matrix": self.matrix.tolist(),
            "scalar_info": self.scalar_info,
            "sigma_z": self.sigma_z.tolist(),
            "error_estimate": self.error_estimate,
            "method": self.method,
        }


def info_bound(m: BaselineModel, law: SampledCovariateLaw, scheme,
               h_known: bool = False, tol: float = DEFAULT_INFO_TOL,
               method: str = "quadrature") -> InfoBoundReport:
    """Information bound for theta in one sampled observation.

    Parameters
    ----------
    m : BaselineModel
        Law of ``V``.
    law : SampledCovariateLaw
        Tilted covariate law at the parameter of interest.
    scheme : Scheme or str
        ``"length_biased"`` or ``"current_duration"``.
    h_known : bool
        Whether the core-model covariate law is known; adds ``Sigma_Z``.
    method : {"quadrature", "closed_form"}
        How to obtain the scalar scale information.
    """
    scheme = Scheme.parse(scheme)
    if method == "closed_form":
        res = closed_form_for(m, scheme)
        if res is None:
            raise DomainError(f"no closed form for {m.name}")
    elif method == "quadrature":
        res = info_scale(scheme.density(m), tol)
    else:
        raise DomainError(f"unknown method {method!r}")
    if not res.finite:
        raise DomainError(f"I_s is not finite for {m.name} under {scheme.value} sampling")
    sigma = law.sigma_z()
    factor = res.value + 1.0 if h_known else res.value
    matrix = sigma * factor
    err = float(np.abs(sigma).max() * res.error_estimate)
    return InfoBoundReport(matrix, scheme, bool(h_known), res.value, sigma, err, res.method)


def relative_efficiency(m: BaselineModel, tol: float = DEFAULT_INFO_TOL) -> float:
    """``I_s(f2) / I_s(f1)``: current duration relative to length biased sampling."""
    i1 = info_scale(Scheme.LENGTH_BIASED.density(m), tol)
    i2 = info_scale(Scheme.CURRENT_DURATION.density(m), tol)
    if not (i1.finite and i2.finite) or not i1.value > 0:
        raise DomainError(f"relative efficiency undefined for {m.name}: "
                          f"I_s(f1)={i1.value!r}, I_s(f2)={i2.value!r}")
    return i2.value / i1.value
