"""Baseline duration laws and the densities derived from them.

A :class:`BaselineModel` is the law of ``V`` in ``T = exp(-theta'W) V``.
Sampling at a fixed calendar time turns it into

* :class:`LengthBiased`: ``f1(x) = x g(x) / mu``, the law of full durations;
* :class:`CurrentDuration`: ``f2(x) = Gbar(x) / mu``, the law of elapsed
  durations.

:class:`Scaled`, :class:`Mixture` and :class:`LogTransformed` build further
densities out of any of these.  Every density exposes ``pdf``,
``pdf_derivative``, ``survival`` and ``scale_score`` (``1 + x f'(x)/f(x)``),
all vectorized over numpy arrays.

Scores are formed analytically from ``g'/g`` and the hazard ``g/Gbar`` of
the baseline; they are never obtained by differentiating ``f1`` or ``f2``
numerically.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from functools import cached_property
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError, DomainError, InfiniteMeanError, NumericalError, UndefinedScoreError
from .quadrature import DEFAULT_TOL, integrate_halfline, integrate_interval, integrate_line

__all__ = [
    "BaselineModel",
    "Weibull",
    "LogLogistic",
    "CustomBaseline",
    "GridBaseline",
    "baseline_from_dict",
    "Density",
    "BaselineDensity",
    "LengthBiased",
    "CurrentDuration",
    "Scaled",
    "Mixture",
    "LogTransformed",
    "MixingLaw",
    "Degenerate",
    "TwoPoint",
    "Uniform",
    "UnitUniform",
    "Scheme",
]

_FD_STEP = np.cbrt(np.finfo(float).eps)
_INNER_RTOL = 1e-12
# retry level when roundoff in the base pdf keeps the first pass from converging
_INNER_RTOL_RETRY = 1e-9


def _as_array(x, allow_zero=False, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError(f"{name} contains NaN")
    bad = arr < 0 if allow_zero else arr <= 0
    if np.any(bad):
        raise DomainError(f"{name} must be positive, got {arr[bad].ravel()[0]!r}")
    return arr


def _finish(val, like, what):
    val = np.asarray(val, dtype=float)
    if not np.all(np.isfinite(val)):
        where = np.broadcast_to(np.asarray(like), val.shape)[~np.isfinite(val)]
        raise NumericalError(f"{what} is not finite at x={where.ravel()[0]!r}")
    return float(val) if val.ndim == 0 else val


def _bisect_inverse(cdf, p, lo, hi, iters=200):
    """Vectorized bisection for ``cdf(x) = p`` on ``[lo, hi]``.

    Bisects in log space when ``lo > 0`` so that wide brackets still resolve
    small quantiles to full relative precision.
    """
    p = np.asarray(p, dtype=float)
    a = np.full(p.shape, float(lo))
    b = np.full(p.shape, float(hi))
    logspace = lo > 0
    for _ in range(iters):
        m = np.sqrt(a * b) if logspace else 0.5 * (a + b)
        below = cdf(m) < p
        a = np.where(below, m, a)
        b = np.where(below, b, m)
        if np.all(b - a <= 4 * np.finfo(float).eps * b):
            break
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# Baseline laws


class BaselineModel(ABC):
    """A positive, absolutely continuous law for ``V``.

    Subclasses supply the density, its logarithmic derivative, the survival
    function and the hazard.  Everything else is derived here.
    """

    name: str = "baseline"
    #: True when ``pdf_derivative`` falls back on finite differences.
    numeric_derivative: bool = False

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, math.inf)

    @property
    def breakpoints(self) -> np.ndarray | None:
        return None

    # the underscored methods take validated x > 0 arrays
    @abstractmethod
    def _pdf(self, x): ...

    @abstractmethod
    def _sf(self, x): ...

    def _logderiv(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._dpdf(x) / self._pdf(x)

    def _dpdf(self, x):
        with np.errstate(invalid="ignore"):
            return self._pdf(x) * self._logderiv(x)

    def _hazard(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._pdf(x) / self._sf(x)

    def _zero_ok(self) -> bool:
        return False

    def pdf(self, x):
        arr = _as_array(x, allow_zero=True)
        at_zero = arr == 0
        if np.any(at_zero) and not self._zero_ok():
            raise DomainError(f"{self.name}: pdf is unbounded at x=0")
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = np.where(at_zero, self._pdf_at_zero(),
                           self._pdf(np.where(at_zero, 1.0, arr)))
        return _finish(val, arr, "pdf")

    def _pdf_at_zero(self) -> float:
        return 0.0

    def pdf_derivative(self, x):
        arr = _as_array(x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = self._dpdf(arr)
        return _finish(val, arr, "pdf derivative")

    def survival(self, x):
        arr = _as_array(x, allow_zero=True)
        with np.errstate(over="ignore"):
            val = np.where(arr == 0, 1.0, self._sf(np.where(arr == 0, 1.0, arr)))
        return _finish(val, arr, "survival")

    def cdf(self, x):
        return 1.0 - np.asarray(self.survival(x))

    def hazard(self, x):
        """Baseline hazard ``g/Gbar``."""
        arr = _as_array(x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = self._hazard(arr)
        return _finish(val, arr, "hazard")

    @cached_property
    def mean(self) -> float:
        return self._mean()

    def _mean(self) -> float:
        res = integrate_halfline(lambda x: x * _nan_to_zero(self._pdf(x)),
                                 tol=DEFAULT_TOL, rtol=DEFAULT_TOL)
        if not res.converged or not np.isfinite(res.value):
            raise InfiniteMeanError(f"{self.name}: mean integral did not converge")
        alt = integrate_halfline(lambda x: _nan_to_zero(self._sf(x)),
                                 tol=DEFAULT_TOL, rtol=DEFAULT_TOL)
        if abs(alt.value - res.value) > 1e-6 * max(1.0, res.value):
            raise NumericalError(
                f"{self.name}: int x g = {res.value:.10g} but int Gbar = "
                f"{alt.value:.10g}; density and survival are inconsistent")
        return float(res.value)

    def moment(self, k: float) -> float:
        """``E[V^k]`` by quadrature; families override with closed forms."""
        res = integrate_halfline(lambda x: x**k * _nan_to_zero(self._pdf(x)),
                                 tol=DEFAULT_TOL, rtol=DEFAULT_TOL)
        if not res.converged:
            raise InfiniteMeanError(f"{self.name}: moment {k} is not finite")
        return float(res.value)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        lo, hi = self._bracket()
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return _bisect_inverse(lambda x: 1.0 - self._sf(x), p, lo, hi)

    def _bracket(self) -> tuple[float, float]:
        lo, hi = self.support
        return (max(lo, 1e-300), hi if math.isfinite(hi) else 1e300)

    def length_biased_cdf(self, x):
        """CDF of ``f1(x) = x g(x)/mu``; tabulated unless overridden."""
        arr = _as_array(x, allow_zero=True)
        logx, table = self._lb_table
        with np.errstate(divide="ignore"):
            lx = np.log(arr)
        out = np.interp(lx, logx, table, left=0.0, right=1.0)
        inside = (lx > logx[0]) & (lx < logx[-1])
        if np.any(inside):
            out = np.where(inside, self._lb_spline(np.where(inside, lx, logx[0])), out)
        return np.clip(out, 0.0, 1.0)

    def length_biased_sf(self, x):
        return 1.0 - self.length_biased_cdf(x)

    def current_duration_sf(self, x):
        """Upper tail of ``f2``: ``int_x^inf Gbar / mu = 1 - F1(x) - x Gbar(x)/mu``."""
        arr = _as_array(x, allow_zero=True)
        val = self.length_biased_sf(arr) - arr * self._sf(arr) / self.mean
        return np.clip(val, 0.0, 1.0)

    def length_biased_quantile(self, p):
        """Quantile of ``f1`` by bisection on :meth:`length_biased_cdf`."""
        lo, hi = self._bracket()
        return _bisect_inverse(self.length_biased_cdf, p, lo, hi)

    @cached_property
    def _lb_table(self):
        lo = float(self.quantile(1e-12))
        hi = float(self.quantile(1 - 1e-12))
        edges = np.geomspace(lo, hi, 2001)
        left, width = edges[:-1], np.diff(edges)

        def seg(u):
            y = left[:, None] + width[:, None] * u[None, :]
            return width[:, None] * y * _nan_to_zero(self._pdf(y))

        pieces = integrate_interval(seg, 0.0, 1.0, tol=1e-300, rtol=1e-12).value
        head = integrate_interval(lambda y: y * _nan_to_zero(self._pdf(y)), 0.0, lo,
                                  tol=1e-300, rtol=1e-12).value
        table = (head + np.concatenate([[0.0], np.cumsum(pieces)])) / self.mean
        return np.log(edges), np.minimum(np.maximum.accumulate(table), 1.0)

    @cached_property
    def _lb_spline(self):
        logx, table = self._lb_table
        return PchipInterpolator(logx, table, extrapolate=False)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` values of ``V`` by inversion; zeros are redrawn."""
        v = np.asarray(self.quantile(rng.random(n)), dtype=float)
        bad = v <= 0
        while bad.any():
            v[bad] = self.quantile(rng.random(int(bad.sum())))
            bad = v <= 0
        return v

    def __repr__(self):
        return f"{type(self).__name__}({self.name})"


def _nan_to_zero(v):
    v = np.asarray(v, dtype=float)
    return np.where(np.isfinite(v), v, 0.0)


class Weibull(BaselineModel):
    """Weibull law ``g(t) = gamma t^(gamma-1) exp(-t^gamma)``."""

    def __init__(self, gamma: float):
        if not gamma > 0:
            raise DomainError(f"Weibull gamma must be > 0, got {gamma}")
        self.gamma = float(gamma)
        self.name = f"weibull(gamma={self.gamma:g})"

    def _zero_ok(self):
        return self.gamma >= 1

    def _pdf_at_zero(self):
        return 1.0 if self.gamma == 1 else 0.0

    def _pdf(self, x):
        g = self.gamma
        with np.errstate(over="ignore"):
            return g * np.exp((g - 1) * np.log(x) - x**g)

    def _logderiv(self, x):
        g = self.gamma
        return (g - 1) / x - g * x ** (g - 1)

    def _sf(self, x):
        return np.exp(-(x**self.gamma))

    def _hazard(self, x):
        return self.gamma * x ** (self.gamma - 1)

    def _mean(self):
        return math.gamma(1 + 1 / self.gamma)

    def moment(self, k):
        return math.gamma(1 + k / self.gamma)

    def quantile(self, p):
        return (-np.log1p(-np.asarray(p, dtype=float))) ** (1 / self.gamma)

    def length_biased_cdf(self, x):
        arr = _as_array(x, allow_zero=True)
        return special.gammainc(1 + 1 / self.gamma, arr**self.gamma)

    def length_biased_sf(self, x):
        arr = _as_array(x, allow_zero=True)
        return special.gammaincc(1 + 1 / self.gamma, arr**self.gamma)

    def current_duration_sf(self, x):
        arr = _as_array(x, allow_zero=True)
        return special.gammaincc(1 / self.gamma, arr**self.gamma)

    def length_biased_quantile(self, p):
        a = 1 + 1 / self.gamma
        return special.gammaincinv(a, np.asarray(p, dtype=float)) ** (1 / self.gamma)


class LogLogistic(BaselineModel):
    """Log-logistic law ``g(t) = gamma t^(gamma-1) / (1 + t^gamma)^2``.

    The mean is finite only for ``gamma > 1``.
    """

    def __init__(self, gamma: float):
        if not gamma > 0:
            raise DomainError(f"log-logistic gamma must be > 0, got {gamma}")
        self.gamma = float(gamma)
        self.name = f"loglogistic(gamma={self.gamma:g})"

    def _zero_ok(self):
        return self.gamma >= 1

    def _pdf_at_zero(self):
        return 1.0 if self.gamma == 1 else 0.0

    def _pdf(self, x):
        u = x**self.gamma
        with np.errstate(divide="ignore"):
            return (self.gamma / x) / (u + 2.0 + 1.0 / u)

    def _logderiv(self, x):
        g = self.gamma
        with np.errstate(divide="ignore"):
            frac = 1.0 / (1.0 + 1.0 / x**g)
        return ((g - 1) - 2 * g * frac) / x

    def _sf(self, x):
        return 1.0 / (1.0 + x**self.gamma)

    def _hazard(self, x):
        with np.errstate(divide="ignore"):
            return (self.gamma / x) / (1.0 + 1.0 / x**self.gamma)

    def _mean(self):
        return self.moment(1)

    def moment(self, k):
        g = self.gamma
        if not k < g:
            raise InfiniteMeanError(
                f"log-logistic moment {k} needs gamma > {k}, got gamma={g:g}")
        if k == 0:
            return 1.0
        return (k * math.pi / g) / math.sin(k * math.pi / g)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore"):
            return (p / (1 - p)) ** (1 / self.gamma)

    def _tail_beta(self, a, b, x):
        """``I_w(a, b)`` at ``w = 1/(1 + x^gamma)``, switching to the complement
        ``1 - I_{1-w}(b, a)`` where ``w`` is near 1 and would round to it."""
        g = self.gamma
        if not g > 1:
            raise InfiniteMeanError(f"log-logistic needs gamma > 1, got {g:g}")
        arr = _as_array(x, allow_zero=True)
        u = arr**g
        w = 1.0 / (1.0 + u)
        wc = u / (1.0 + u)
        with np.errstate(invalid="ignore"):
            wc = np.where(np.isinf(u), 1.0, wc)
        return np.where(w <= 0.5, special.betainc(a, b, w), special.betaincc(b, a, wc))

    def length_biased_cdf(self, x):
        g = self.gamma
        return self._head_beta(1 + 1 / g, 1 - 1 / g, x)

    def _head_beta(self, a, b, x):
        # I_{wc}(a, b) with wc = x^gamma/(1 + x^gamma), the complement of _tail_beta(b, a)
        g = self.gamma
        if not g > 1:
            raise InfiniteMeanError(f"log-logistic needs gamma > 1, got {g:g}")
        arr = _as_array(x, allow_zero=True)
        u = arr**g
        w = 1.0 / (1.0 + u)
        with np.errstate(invalid="ignore"):
            wc = np.where(np.isinf(u), 1.0, u / (1.0 + u))
        return np.where(wc <= 0.5, special.betainc(a, b, wc), special.betaincc(b, a, w))

    def length_biased_sf(self, x):
        g = self.gamma
        return self._tail_beta(1 - 1 / g, 1 + 1 / g, x)

    def current_duration_sf(self, x):
        g = self.gamma
        return self._tail_beta(1 - 1 / g, 1 / g, x)

    def length_biased_quantile(self, p):
        g = self.gamma
        if not g > 1:
            raise InfiniteMeanError(f"log-logistic needs gamma > 1, got {g:g}")
        a, b = 1 + 1 / g, 1 - 1 / g
        p = np.asarray(p, dtype=float)
        # solve for both w and 1 - w so the upper tail keeps its precision
        lower = special.betaincinv(a, b, p)
        upper = special.betaincinv(b, a, 1.0 - p)
        w = np.where(p <= 0.5, lower, 1.0 - upper)
        wc = np.where(p <= 0.5, 1.0 - lower, upper)
        with np.errstate(divide="ignore"):
            return (w / wc) ** (1 / g)


class CustomBaseline(BaselineModel):
    """Baseline given by user callables.

    Parameters
    ----------
    pdf, survival : callable
        Vectorized functions of ``x > 0``.
    pdf_derivative : callable, optional
        Analytic derivative of ``pdf``.  Without it a central difference with
        relative step ``cbrt(eps)`` is used and ``numeric_derivative`` is set.
    mean_hint : float, optional
        Known mean; skips the mean quadrature.
    """

    def __init__(self, pdf: Callable, survival: Callable,
                 pdf_derivative: Callable | None = None,
                 mean_hint: float | None = None, name: str = "custom"):
        self._user_pdf = pdf
        self._user_sf = survival
        self._user_dpdf = pdf_derivative
        self.numeric_derivative = pdf_derivative is None
        if mean_hint is not None and not mean_hint > 0:
            raise DomainError(f"mean_hint must be positive, got {mean_hint}")
        self._mean_hint = mean_hint
        self.name = name

    def _pdf(self, x):
        return np.asarray(self._user_pdf(x), dtype=float)

    def _sf(self, x):
        return np.asarray(self._user_sf(x), dtype=float)

    def _dpdf(self, x):
        if self._user_dpdf is not None:
            return np.asarray(self._user_dpdf(x), dtype=float)
        h = _FD_STEP * x
        return (self._pdf(x + h) - self._pdf(x - h)) / (2 * h)

    def _logderiv(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._dpdf(x) / self._pdf(x)

    def _mean(self):
        if self._mean_hint is not None:
            return float(self._mean_hint)
        return super()._mean()


class GridBaseline(BaselineModel):
    """Baseline interpolated monotonically (PCHIP) through ``(x, pdf)`` pairs.

    The pdf is zero outside the grid and is renormalized to unit mass.
    Survival, mean and the length-biased CDF are exact for the interpolant,
    so nothing here needs quadrature.  For finite informations the tabulated
    pdf should reach zero at both ends over at least two nodes; the
    interpolant then vanishes quadratically at the edges of its support.
    """

    def __init__(self, x: Sequence[float], pdf: Sequence[float], name: str = "grid"):
        x = np.asarray(x, dtype=float)
        y = np.asarray(pdf, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 3:
            raise DomainError("grid needs matching 1-D x and pdf arrays of length >= 3")
        if np.any(np.diff(x) <= 0) or x[0] < 0:
            raise DomainError("grid x must be nonnegative and strictly increasing")
        if np.any(y < 0) or not np.any(y > 0):
            raise DomainError("grid pdf must be nonnegative and not identically zero")
        spline = PchipInterpolator(x, y, extrapolate=False)
        cum = spline.antiderivative()
        total = float(cum(x[-1]))
        self._x = x
        self._spline = PchipInterpolator(x, y / total, extrapolate=False)
        self._dspline = self._spline.derivative()
        self._cum = self._spline.antiderivative()
        self._cum2 = self._cum.antiderivative()
        pos = np.flatnonzero(y > 0)
        self._lo = float(x[max(pos[0] - 1, 0)])
        self._hi = float(x[min(pos[-1] + 1, x.size - 1)])
        self.name = name

    @property
    def support(self):
        return (self._lo, self._hi)

    @property
    def breakpoints(self):
        return self._x

    def _zero_ok(self):
        return True

    def _pdf_at_zero(self):
        return float(self._spline(0.0)) if self._x[0] == 0 else 0.0

    def _clip(self, f, x, outside):
        x = np.asarray(x, dtype=float)
        inside = (x >= self._x[0]) & (x <= self._x[-1])
        val = f(np.where(inside, x, self._x[0]))
        return np.where(inside, val, outside)

    def _pdf(self, x):
        return np.maximum(self._clip(self._spline, x, 0.0), 0.0)

    def _dpdf(self, x):
        return self._clip(self._dspline, x, 0.0)

    def _cdf_raw(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= self._x[-1], 1.0,
                        np.clip(self._clip(self._cum, x, 0.0), 0.0, 1.0))

    def _sf(self, x):
        return 1.0 - self._cdf_raw(x)

    def _int_cdf(self, x):
        # int_0^x G(y) dy
        x = np.asarray(x, dtype=float)
        end = float(self._cum2(self._x[-1]))
        return np.where(x >= self._x[-1], end + (x - self._x[-1]),
                        self._clip(self._cum2, x, 0.0))

    def _mean(self):
        return float(self._x[-1] - self._cum2(self._x[-1]))

    def moment(self, k):
        lo, hi = self.support
        res = integrate_interval(lambda x: x**k * self._pdf(x), lo, hi,
                                 tol=1e-300, rtol=1e-12, points=self._x)
        return float(res.value)

    def quantile(self, p):
        return _bisect_inverse(lambda x: self._cdf_raw(x), p, self._lo, self._hi)

    def length_biased_cdf(self, x):
        arr = _as_array(x, allow_zero=True)
        val = (arr * self._cdf_raw(arr) - self._int_cdf(arr)) / self.mean
        return np.clip(np.where(arr >= self._hi, 1.0, val), 0.0, 1.0)

    def length_biased_quantile(self, p):
        return _bisect_inverse(self.length_biased_cdf, p, self._lo, self._hi)


def baseline_from_dict(spec: dict) -> BaselineModel:
    """Build a baseline from its JSON description.

    ``{"family": "weibull", "gamma": 2.0}``, ``{"family": "loglogistic",
    "gamma": 3}`` or ``{"family": "custom", "grid": [[x, pdf], ...]}``.
    """
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("baseline block must be an object with a 'family' field")
    family = str(spec["family"]).lower().replace("-", "").replace("_", "")
    if family in ("weibull", "exponential"):
        gamma = float(spec.get("gamma", 1.0))
        return Weibull(gamma)
    if family == "loglogistic":
        if "gamma" not in spec:
            raise ConfigError("loglogistic baseline needs 'gamma'")
        return LogLogistic(float(spec["gamma"]))
    if family == "custom":
        grid = np.asarray(spec.get("grid", []), dtype=float)
        if grid.ndim != 2 or grid.shape[1] != 2:
            raise ConfigError("custom baseline needs 'grid' as a list of [x, pdf] pairs")
        return GridBaseline(grid[:, 0], grid[:, 1], name=spec.get("name", "grid"))
    raise ConfigError(f"unknown baseline family {spec['family']!r}")


# ---------------------------------------------------------------------------
# Mixing laws


class MixingLaw(ABC):
    """Law ``G`` of a positive multiplier ``U``."""

    #: (points, weights) for discrete laws, None for continuous ones
    atoms: tuple[np.ndarray, np.ndarray] | None = None

    @property
    @abstractmethod
    def support(self) -> tuple[float, float]: ...

    @property
    @abstractmethod
    def mean(self) -> float: ...

    @property
    def is_degenerate(self) -> bool:
        if self.atoms is None:
            return False
        pts, w = self.atoms
        return np.unique(pts[w > 0]).size == 1

    @abstractmethod
    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray: ...


class Degenerate(MixingLaw):
    def __init__(self, u0: float):
        if not u0 > 0:
            raise DomainError(f"degenerate mixing point must be positive, got {u0}")
        self.u0 = float(u0)
        self.atoms = (np.array([self.u0]), np.array([1.0]))

    support = property(lambda self: (self.u0, self.u0))
    mean = property(lambda self: self.u0)

    def sample(self, rng, n):
        return np.full(n, self.u0)

    def __repr__(self):
        return f"Degenerate({self.u0:g})"


class TwoPoint(MixingLaw):
    """Mass ``p`` at ``u1`` and ``1 - p`` at ``u2``."""

    def __init__(self, u1: float, u2: float, p: float):
        if not (u1 > 0 and u2 > 0):
            raise DomainError("two-point mixing atoms must be positive")
        if not 0 <= p <= 1:
            raise DomainError(f"probability must lie in [0, 1], got {p}")
        self.u1, self.u2, self.p = float(u1), float(u2), float(p)
        self.atoms = (np.array([self.u1, self.u2]), np.array([self.p, 1 - self.p]))

    support = property(lambda self: (min(self.u1, self.u2), max(self.u1, self.u2)))
    mean = property(lambda self: self.p * self.u1 + (1 - self.p) * self.u2)

    def sample(self, rng, n):
        return np.where(rng.random(n) < self.p, self.u1, self.u2)

    def __repr__(self):
        return f"TwoPoint({self.u1:g}, {self.u2:g}, {self.p:g})"


class Uniform(MixingLaw):
    """Uniform multiplier on ``[a, b]`` with ``0 < a < b``."""

    def __init__(self, a: float, b: float):
        if not 0 < a < b:
            raise DomainError(f"uniform mixing needs 0 < a < b, got a={a}, b={b}")
        self.a, self.b = float(a), float(b)

    support = property(lambda self: (self.a, self.b))
    mean = property(lambda self: 0.5 * (self.a + self.b))

    def sample(self, rng, n):
        return rng.uniform(self.a, self.b, n)

    def __repr__(self):
        return f"Uniform({self.a:g}, {self.b:g})"


class UnitUniform(MixingLaw):
    """``U(0, 1)``: the multiplicative censoring law."""

    support = property(lambda self: (0.0, 1.0))
    mean = property(lambda self: 0.5)

    def sample(self, rng, n):
        # (0, 1] so that products stay positive
        return 1.0 - rng.random(n)

    def __repr__(self):
        return "UnitUniform()"


# ---------------------------------------------------------------------------
# Densities


class Density(ABC):
    """A density with evaluable pdf, derivative, survival and scale score."""

    numeric_derivative = False
    #: log of a typical value, used to center quadrature windows
    log_center = 0.0

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, math.inf)

    @property
    def breakpoints(self) -> np.ndarray | None:
        return None

    @abstractmethod
    def _pdf(self, x): ...

    @abstractmethod
    def _sf(self, x): ...

    @abstractmethod
    def _score(self, x): ...

    def _dpdf(self, x):
        with np.errstate(invalid="ignore", divide="ignore"):
            return self._pdf(x) * (self._score(x) - 1.0) / x

    def _pdf_and_score(self, x):
        return self._pdf(x), self._score(x)

    def _check(self, x):
        return _as_array(x)

    def pdf(self, x):
        arr = self._check(x)
        with np.errstate(all="ignore"):
            val = self._pdf(arr)
        return _finish(val, arr, "pdf")

    def pdf_derivative(self, x):
        arr = self._check(x)
        with np.errstate(all="ignore"):
            val = self._dpdf(arr)
        return _finish(val, arr, "pdf derivative")

    def survival(self, x):
        arr = self._check(x)
        with np.errstate(all="ignore"):
            val = self._sf(arr)
        return _finish(val, arr, "survival")

    def scale_score(self, x):
        """``1 + x f'(x)/f(x)``, the score of the scale family of this density."""
        arr = self._check(x)
        with np.errstate(all="ignore"):
            dens = self._pdf(arr)
            if np.any(dens <= 0):
                where = np.broadcast_to(arr, np.shape(dens))[dens <= 0].ravel()[0]
                raise UndefinedScoreError(f"pdf vanishes at x={where!r}")
            val = self._score(arr)
        return _finish(val, arr, "scale score")

    @cached_property
    def mean(self) -> float:
        lo, hi = self.support
        if math.isfinite(hi):
            res = integrate_interval(lambda x: x * self._pdf(x), lo, hi,
                                     tol=1e-300, rtol=DEFAULT_TOL, points=self.breakpoints)
        else:
            res = integrate_halfline(lambda x: x * _nan_to_zero(self._pdf(x)),
                                     tol=DEFAULT_TOL, rtol=DEFAULT_TOL,
                                     center=self.log_center)
        return float(res.value)


class BaselineDensity(Density):
    """The baseline density ``g`` itself."""

    def __init__(self, model: BaselineModel):
        self.model = model
        self.numeric_derivative = model.numeric_derivative

    support = property(lambda self: self.model.support)
    breakpoints = property(lambda self: self.model.breakpoints)

    def _check(self, x):
        return _as_array(x)

    def _pdf(self, x):
        return self.model._pdf(x)

    def _dpdf(self, x):
        return self.model._dpdf(x)

    def _sf(self, x):
        return self.model._sf(x)

    def _score(self, x):
        return 1.0 + x * self.model._logderiv(x)

    @cached_property
    def mean(self):
        return self.model.mean

    def __repr__(self):
        return f"BaselineDensity({self.model.name})"


class LengthBiased(Density):
    """``f1(x) = x g(x) / mu``, the law of full sampled durations."""

    def __init__(self, model: BaselineModel):
        self.model = model
        self.mu = model.mean
        self.numeric_derivative = model.numeric_derivative

    support = property(lambda self: self.model.support)
    breakpoints = property(lambda self: self.model.breakpoints)

    def _pdf(self, x):
        return x * self.model._pdf(x) / self.mu

    def _dpdf(self, x):
        return (self.model._pdf(x) + x * self.model._dpdf(x)) / self.mu

    def _sf(self, x):
        return self.model.length_biased_sf(x)

    def cdf(self, x):
        return self.model.length_biased_cdf(_as_array(x, allow_zero=True))

    def _score(self, x):
        return 2.0 + x * self.model._logderiv(x)

    @cached_property
    def mean(self):
        return self.model.moment(2) / self.mu

    def __repr__(self):
        return f"LengthBiased({self.model.name})"


class CurrentDuration(Density):
    """``f2(x) = Gbar(x) / mu``, the law of elapsed sampled durations."""

    def __init__(self, model: BaselineModel):
        self.model = model
        self.mu = model.mean
        self.numeric_derivative = False

    @property
    def support(self):
        return (0.0, self.model.support[1])

    breakpoints = property(lambda self: self.model.breakpoints)

    def _pdf(self, x):
        return self.model._sf(x) / self.mu

    def _dpdf(self, x):
        return -self.model._pdf(x) / self.mu

    def _sf(self, x):
        return self.model.current_duration_sf(x)

    def cdf(self, x):
        arr = _as_array(x, allow_zero=True)
        return 1.0 - np.where(arr == 0, 1.0, self._sf(np.where(arr == 0, 1.0, arr)))

    def _score(self, x):
        return 1.0 - x * self.model._hazard(x)

    @cached_property
    def mean(self):
        return self.model.moment(2) / (2 * self.mu)

    def __repr__(self):
        return f"CurrentDuration({self.model.name})"


class Scaled(Density):
    """Density of ``sigma * Y`` where ``Y`` has density ``base``."""

    def __init__(self, base: Density, sigma: float):
        if not sigma > 0:
            raise DomainError(f"scale must be positive, got {sigma}")
        self.base = base
        self.sigma = float(sigma)
        self.numeric_derivative = base.numeric_derivative
        self.log_center = base.log_center + math.log(self.sigma)

    @property
    def support(self):
        lo, hi = self.base.support
        return (lo * self.sigma, hi * self.sigma)

    @property
    def breakpoints(self):
        bp = self.base.breakpoints
        return None if bp is None else bp * self.sigma

    def _pdf(self, x):
        return self.base._pdf(x / self.sigma) / self.sigma

    def _dpdf(self, x):
        return self.base._dpdf(x / self.sigma) / self.sigma**2

    def _sf(self, x):
        return self.base._sf(x / self.sigma)

    def _score(self, x):
        return self.base._score(x / self.sigma)

    @cached_property
    def mean(self):
        return self.sigma * self.base.mean

    def __repr__(self):
        return f"Scaled({self.base!r}, {self.sigma:g})"


class Mixture(Density):
    """Density of ``U * Y`` with ``U ~ law`` independent of ``Y ~ base``.

    ``h(x) = int (1/u) f(x/u) dG(u)``.  Discrete laws are exact finite sums;
    continuous laws integrate over ``u`` with the package quadrature, all
    requested points at once as one vector-valued integral.
    """

    def __init__(self, base: Density, law: MixingLaw):
        self.base = base
        self.law = law
        self.numeric_derivative = base.numeric_derivative
        lo, hi = law.support
        if law.atoms is not None:
            pts, w = law.atoms
            self.log_center = base.log_center + float(np.log(pts) @ w)
        elif lo > 0:
            self.log_center = base.log_center + math.log(math.sqrt(lo * hi))
        else:
            self.log_center = base.log_center - 1.0

    @property
    def support(self):
        lo, hi = self.base.support
        ulo, uhi = self.law.support
        return (lo * ulo, hi * uhi)

    def _parts(self, x, want_sf=False):
        """Return ``(h(x), x h'(x) + h(x), Hbar(x))``; ``Hbar`` only on request."""
        x = np.asarray(x, dtype=float)
        shape = x.shape
        xf = x.ravel()
        base = self.base

        def terms(y, u_weight):
            # f(y) * weight, f(y) * s(y) * weight, with s masked where f = 0
            f = base._pdf(y)
            s = np.where(f > 0, base._score(np.where(f > 0, y, 1.0)), 0.0)
            return f * u_weight, f * s * u_weight

        if self.law.atoms is not None:
            pts, w = self.law.atoms
            h = np.zeros_like(xf)
            num = np.zeros_like(xf)
            sf = np.zeros_like(xf)
            for u, wi in zip(pts, w):
                if wi == 0:
                    continue
                y = xf / u
                a, b = terms(y, wi / u)
                h += a
                num += b
                if want_sf:
                    sf += wi * base._sf(y)
            return h.reshape(shape), num.reshape(shape), sf.reshape(shape)

        n = xf.size
        bp = base.breakpoints
        if bp is not None and len(bp):
            return self._parts_pointwise(xf, shape, terms, np.asarray(bp, dtype=float), want_sf)
        if isinstance(self.law, UnitUniform):
            # u = exp(-s): h(x) = int_0^inf f(x e^s) ds, Hbar = int S(x e^s) e^-s ds
            def integrand(s):
                es = np.exp(s)
                y = xf[:, None] * es[None, :]
                a, b = terms(y, 1.0)
                if not want_sf:
                    return np.concatenate([a, b], axis=0)
                c = base._sf(y) / es[None, :]
                return np.concatenate([a, b, c], axis=0)

            res = self._inner(integrand, 0.0, math.inf, None, 4.0)
        else:
            lo, hi = self.law.support
            dens = 1.0 / (hi - lo)

            def integrand(u):
                y = xf[:, None] / u[None, :]
                a, b = terms(y, dens / u[None, :])
                if not want_sf:
                    return np.concatenate([a, b], axis=0)
                c = dens * base._sf(y)
                return np.concatenate([a, b, c], axis=0)

            res = self._inner(integrand, lo, hi, None, 8.0)
        v = res.value
        sf = np.clip(v[2 * n:], 0.0, 1.0).reshape(shape) if want_sf else None
        return v[:n].reshape(shape), v[n:2 * n].reshape(shape), sf

    def _inner(self, integrand, lo, hi, pts, width, x=None):
        for rtol in (_INNER_RTOL, _INNER_RTOL_RETRY):
            res = integrate_interval(integrand, lo, hi, tol=1e-300, rtol=rtol,
                                     points=pts, width=width)
            if res.converged:
                return res
        where = "" if x is None else f" at x={float(x)!r}"
        raise NumericalError(f"mixture integral over u did not converge for {self!r}{where}")

    def _parts_pointwise(self, xf, shape, terms, bp, want_sf):
        # kinked base: one integral per x, split where x/u crosses a base breakpoint
        base = self.base
        hi_support = base.support[1]
        k = 3 if want_sf else 2
        out = np.zeros((k, xf.size))
        for i, x in enumerate(xf):
            if isinstance(self.law, UnitUniform):
                lo, hi = 0.0, math.inf
                if math.isfinite(hi_support):
                    if x >= hi_support:
                        continue
                    hi = math.log(hi_support / x)
                pts = np.log(bp[bp > x] / x)

                def integrand(s, x=x):
                    es = np.exp(s)
                    y = x * es
                    a, b = terms(y, 1.0)
                    rows = [a, b] if not want_sf else [a, b, base._sf(y) / es]
                    return np.stack(rows)

                width = 4.0
            else:
                lo, hi = self.law.support
                dens = 1.0 / (hi - lo)
                pts = x / bp[bp > 0]

                def integrand(u, x=x, dens=dens):
                    y = x / u
                    a, b = terms(y, dens / u)
                    rows = [a, b] if not want_sf else [a, b, dens * base._sf(y)]
                    return np.stack(rows)

                width = 8.0
            pts = pts[(pts > lo) & (pts < hi)]
            res = self._inner(integrand, lo, hi, pts, width, x)
            out[:, i] = res.value
        sf = np.clip(out[2], 0.0, 1.0).reshape(shape) if want_sf else None
        return out[0].reshape(shape), out[1].reshape(shape), sf

    def _pdf(self, x):
        return self._parts(x)[0]

    def _sf(self, x):
        return self._parts(x, want_sf=True)[2]

    def _score(self, x):
        h, num, _ = self._parts(x)
        return num / h

    def _dpdf(self, x):
        h, num, _ = self._parts(x)
        return (num - h) / x

    def _pdf_and_score(self, x):
        h, num, _ = self._parts(x)
        return h, num / h

    def pdf_and_score(self, x):
        """Evaluate ``h`` and its scale score in one pass over ``u``."""
        arr = _as_array(x)
        with np.errstate(all="ignore"):
            h, num, _ = self._parts(arr)
        return _finish(h, arr, "pdf"), _finish(num / h, arr, "scale score")

    @cached_property
    def mean(self):
        return self.base.mean * self.law.mean

    def __repr__(self):
        return f"Mixture({self.base!r}, {self.law!r})"


class LogTransformed(Density):
    """Density of ``log Y`` on the real line: ``f~(z) = e^z f(e^z)``.

    Its location score ``f~'/f~`` equals the scale score of ``f`` at ``e^z``.
    """

    def __init__(self, base: Density):
        self.base = base
        self.numeric_derivative = base.numeric_derivative
        self.log_center = base.log_center

    @property
    def support(self):
        lo, hi = self.base.support
        with np.errstate(divide="ignore"):
            return (float(np.log(lo)), float(np.log(hi)))

    @property
    def breakpoints(self):
        bp = self.base.breakpoints
        if bp is None:
            return None
        bp = bp[bp > 0]
        return np.log(bp)

    def _check(self, z):
        arr = np.asarray(z, dtype=float)
        if np.any(np.isnan(arr)):
            raise DomainError("z contains NaN")
        return arr

    def _pdf(self, z):
        x = np.exp(z)
        return x * self.base._pdf(x)

    def _dpdf(self, z):
        return self._pdf(z) * self._score(z)

    def _sf(self, z):
        return self.base._sf(np.exp(z))

    def _score(self, z):
        return self.base._score(np.exp(z))

    def location_score(self, z):
        """``f~'(z)/f~(z)``."""
        arr = self._check(z)
        with np.errstate(all="ignore"):
            dens = self._pdf(arr)
            if np.any(dens <= 0):
                raise UndefinedScoreError("pdf vanishes at a requested point")
            val = self._score(arr)
        return _finish(val, arr, "location score")

    def scale_score(self, z):
        raise DomainError("a log-transformed density is a location family; "
                          "use location_score")

    @cached_property
    def mean(self):
        lo, hi = self.support
        if math.isfinite(lo) and math.isfinite(hi):
            res = integrate_interval(lambda z: z * self._pdf(z), lo, hi,
                                     tol=1e-300, rtol=DEFAULT_TOL,
                                     points=self.breakpoints)
        else:
            res = integrate_line(lambda z: z * _nan_to_zero(self._pdf(z)),
                                 tol=DEFAULT_TOL, center=self.log_center)
        return float(res.value)

    def __repr__(self):
        return f"LogTransformed({self.base!r})"


class Scheme(str, Enum):
    """Cross-sectional sampling scheme."""

    LENGTH_BIASED = "length_biased"
    CURRENT_DURATION = "current_duration"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "_").replace(" ", "_")
        aliases = {"lb": "length_biased", "cd": "current_duration"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise DomainError(f"unknown sampling scheme {value!r}") from None

    def density(self, model: BaselineModel) -> Density:
        """``f1`` for length biased sampling, ``f2`` for current duration."""
        if self is Scheme.LENGTH_BIASED:
            return LengthBiased(model)
        return CurrentDuration(model)
