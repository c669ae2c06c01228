"""Fisher information for scale and location, closed forms, and the two
comparison inequalities checked numerically.

The scale information of a density ``f`` on ``(0, inf)`` is

    I_s(f) = int (1 + x f'(x)/f(x))^2 f(x) dx,

computed here from :meth:`Density.scale_score`, so that the length biased
and current duration cases use ``2 + x g'/g`` and ``1 - x g/Gbar`` directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import (
    BaselineModel,
    Density,
    LogLogistic,
    LogTransformed,
    MixingLaw,
    Mixture,
    Scheme,
    Weibull,
)
from .errors import DomainError
from .quadrature import DEFAULT_INFO_TOL, integrate_halfline, integrate_interval, integrate_line

__all__ = [
    "InfoScaleResult",
    "PatienceReport",
    "ContractionReport",
    "info_scale",
    "info_scale_closed_form",
    "closed_form_for",
    "info_location",
    "verify_patience_inequality",
    "verify_mixture_contraction",
]

# below this the pdf is treated as zero; the dropped mass is tracked
PDF_CUTOFF = 1e-300


@dataclass(frozen=True)
class InfoScaleResult:
    value: float
    method: str  # "closed_form" or "quadrature"
    error_estimate: float = 0.0
    finite: bool = True
    numeric_derivative: bool = False


@dataclass(frozen=True)
class PatienceReport:
    """Outcome of comparing ``I_s(f2)`` with ``I_s(f1)`` for one baseline."""

    model: str
    i1: float
    i2: float
    margin: float
    error: float
    holds: bool
    status: str  # "holds", "violated" or "inconclusive"


@dataclass(frozen=True)
class ContractionReport:
    """Outcome of comparing ``I_s(h)`` for ``h = Mixture(f, G)`` with ``I_s(f)``."""

    density: str
    law: str
    i_f: float
    i_h: float
    error: float
    degenerate: bool
    equal: bool
    holds: bool
    status: str
    details: dict = field(default_factory=dict)


def _score_sq_integrand(d: Density):
    def f(x):
        with np.errstate(all="ignore"):
            p, s = d._pdf_and_score(x)
            keep = p >= PDF_CUTOFF
            val = np.where(keep, s * s * p, 0.0)
            dropped = np.where(~keep & (p > 0) & np.isfinite(s), s * s * p, 0.0)
        return np.stack([val, dropped])

    return f


def _integrate_density(f, d: Density, tol: float, line: bool = False):
    lo, hi = d.support
    if line:
        if math.isinf(lo) and math.isinf(hi):
            return integrate_line(f, tol=tol, center=d.log_center)
        return integrate_interval(f, lo, hi, tol=tol, points=d.breakpoints)
    if math.isfinite(hi):
        return integrate_interval(f, lo, hi, tol=tol, points=d.breakpoints)
    return integrate_halfline(f, tol=tol, center=d.log_center)


def info_scale(d: Density, tol: float = DEFAULT_INFO_TOL) -> InfoScaleResult:
    """Fisher information for scale of ``d`` by quadrature.

    Parameters
    ----------
    d : Density
        Any density on ``(0, inf)``.
    tol : float
        Absolute error target for the information integral.

    Returns
    -------
    InfoScaleResult
        ``finite`` is False when the integral did not converge; ``value`` is
        then only the partial sum and must not be compared.
    """
    if isinstance(d, LogTransformed):
        raise DomainError("info_scale expects a density on (0, inf); "
                          "use info_location for log-transformed densities")
    res = _integrate_density(_score_sq_integrand(d), d, tol)
    value, dropped = (float(v) for v in res.value)
    err = float(res.abs_error_estimate[0]) + abs(dropped)
    finite = bool(res.converged and np.isfinite(value))
    return InfoScaleResult(value, "quadrature", err, finite, d.numeric_derivative)


def info_location(d: LogTransformed, tol: float = DEFAULT_INFO_TOL) -> InfoScaleResult:
    """Fisher information for location ``int (f~'/f~)^2 f~`` over the real line."""
    if not isinstance(d, LogTransformed):
        raise DomainError("info_location expects a LogTransformed density")
    res = _integrate_density(_score_sq_integrand(d), d, tol, line=True)
    value, dropped = (float(v) for v in res.value)
    err = float(res.abs_error_estimate[0]) + abs(dropped)
    finite = bool(res.converged and np.isfinite(value))
    return InfoScaleResult(value, "quadrature", err, finite, d.numeric_derivative)


def info_scale_closed_form(family, gamma: float, scheme) -> InfoScaleResult:
    """Exact ``I_s(f1)`` or ``I_s(f2)`` for the Weibull and log-logistic families.

    Weibull: ``gamma (gamma + 1)`` and ``gamma``.  Log-logistic:
    ``(gamma^2 - 1)/3`` and ``(gamma - 1)/2``, for ``gamma > 1``.
    """
    scheme = Scheme.parse(scheme)
    fam = str(family).lower().replace("-", "").replace("_", "")
    g = float(gamma)
    if fam == "weibull":
        if not g > 0:
            raise DomainError(f"Weibull needs gamma > 0, got {g:g}")
        value = g * (g + 1) if scheme is Scheme.LENGTH_BIASED else g
    elif fam == "loglogistic":
        if not g > 1:
            raise DomainError(f"log-logistic needs gamma > 1, got {g:g}")
        value = (g * g - 1) / 3 if scheme is Scheme.LENGTH_BIASED else (g - 1) / 2
    else:
        raise DomainError(f"no closed form for family {family!r}")
    return InfoScaleResult(value, "closed_form", 0.0, True)


def closed_form_for(model: BaselineModel, scheme) -> InfoScaleResult | None:
    """Closed form for ``model`` when its family has one, else None."""
    if isinstance(model, Weibull):
        return info_scale_closed_form("weibull", model.gamma, scheme)
    if isinstance(model, LogLogistic):
        return info_scale_closed_form("loglogistic", model.gamma, scheme)
    return None


def verify_patience_inequality(m: BaselineModel, tol: float = DEFAULT_INFO_TOL) -> PatienceReport:
    """Check ``I_s(f2) < I_s(f1)`` for baseline ``m`` with an error-aware margin."""
    r1 = info_scale(Scheme.LENGTH_BIASED.density(m), tol)
    r2 = info_scale(Scheme.CURRENT_DURATION.density(m), tol)
    err = max(r1.error_estimate, r2.error_estimate)
    margin = r1.value - r2.value
    if not (r1.finite and r2.finite):
        return PatienceReport(m.name, r1.value, r2.value, margin, err, False, "inconclusive")
    holds = r2.value + err < r1.value
    return PatienceReport(m.name, r1.value, r2.value, margin, err, holds,
                          "holds" if holds else "violated")


def verify_mixture_contraction(f: Density, law: MixingLaw,
                               tol: float = DEFAULT_INFO_TOL) -> ContractionReport:
    """Check ``I_s(h) <= I_s(f)`` for ``h = Mixture(f, law)``.

    A degenerate law must reproduce ``I_s(f)`` within the combined error; a
    non-degenerate one must not (strict contraction).
    """
    rf = info_scale(f, tol)
    rh = info_scale(Mixture(f, law), tol)
    err = rf.error_estimate + rh.error_estimate
    degenerate = law.is_degenerate
    if not (rf.finite and rh.finite):
        return ContractionReport(repr(f), repr(law), rf.value, rh.value, err,
                                 degenerate, False, False, "inconclusive")
    equal = abs(rh.value - rf.value) <= err
    if degenerate:
        holds = equal
    else:
        holds = rh.value < rf.value - err
    return ContractionReport(repr(f), repr(law), rf.value, rh.value, err,
                             degenerate, equal, holds,
                             "holds" if holds else "violated")
