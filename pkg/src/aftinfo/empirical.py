"""Monte Carlo estimates of the information bounds and goodness-of-fit tools.

The efficient score for theta in one sampled record is the centered
covariate times the scale score of the sampled duration law at the rescaled
duration ``v = exp(theta'z) * (d or x)``; its covariance estimates
``Sigma_Z * I_s``.  Standard errors are delete-a-group jackknife estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import kolmogorov

from .covariate import InfoBoundReport, SampledCovariateLaw, info_bound
from .density import BaselineModel, Scheme
from .errors import DomainError, NumericalError
from .sampler import EpisodeRecord, EpisodeSample

__all__ = [
    "EmpiricalInfoReport",
    "KSResult",
    "efficient_score",
    "efficient_scores",
    "empirical_information",
    "empirical_h_known_gain",
    "ks_distance",
    "MIN_RECORDS",
    "MAX_EXCLUDED_FRACTION",
]

MIN_RECORDS = 100
MAX_EXCLUDED_FRACTION = 1e-4
JACKKNIFE_GROUPS = 100


def _duration(sample_or_rec, scheme: Scheme):
    return sample_or_rec.d if scheme is Scheme.LENGTH_BIASED else sample_or_rec.x


def efficient_score(rec: EpisodeRecord, theta, m: BaselineModel, mean_z, scheme) -> np.ndarray:
    """Efficient score of a single record, a k-vector."""
    scheme = Scheme.parse(scheme)
    sample = EpisodeSample(np.array([rec.x]), np.array([rec.d]),
                           np.asarray(rec.z, dtype=float).reshape(1, -1))
    psi, ok = efficient_scores(sample, theta, m, mean_z, scheme)
    if not ok[0]:
        raise DomainError(f"score undefined for record {rec}: density vanishes")
    return psi[0]


def efficient_scores(sample: EpisodeSample, theta, m: BaselineModel, mean_z, scheme,
                     h_known: bool = False):
    """Scores for all records plus a mask of the records where they are defined.

    With ``h_known`` the covariate-only score ``-(z - mean_z)`` is added.
    """
    scheme = Scheme.parse(scheme)
    dens = scheme.density(m)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    z = sample.z
    if z.shape[1] != theta.size:
        raise DomainError(f"records carry {z.shape[1]} covariates but theta has {theta.size}")
    v = np.exp(z @ theta) * _duration(sample, scheme)
    with np.errstate(all="ignore"):
        p = dens._pdf(v)
        ok = (p > 0) & np.isfinite(p)
        s = np.where(ok, dens._score(np.where(ok, v, 1.0)), 0.0)
    ok &= np.isfinite(s)
    s = np.where(ok, s, 0.0)
    if h_known:
        s = s - 1.0
    centered = z - np.asarray(mean_z, dtype=float)
    return centered * s[:, None], ok


def _cov(psi: np.ndarray) -> np.ndarray:
    # elementwise products summed with numpy's pairwise summation
    n = psi.shape[0]
    c = psi - psi.sum(axis=0) / n
    return (c[:, :, None] * c[:, None, :]).sum(axis=0) / (n - 1)


def _jackknife(stat, n: int, groups: int):
    """Delete-a-group jackknife over contiguous blocks of record indices."""
    edges = np.linspace(0, n, groups + 1).astype(int)
    full = stat(np.ones(n, dtype=bool))
    reps = []
    for g in range(groups):
        keep = np.ones(n, dtype=bool)
        keep[edges[g]:edges[g + 1]] = False
        reps.append(stat(keep))
    reps = np.array(reps)
    se = np.sqrt((groups - 1) / groups * ((reps - reps.mean(axis=0)) ** 2).sum(axis=0))
    return full, se


@dataclass(frozen=True)
class EmpiricalInfoReport:
    matrix_estimate: np.ndarray
    standard_errors: np.ndarray
    n: int
    scheme: Scheme
    target: np.ndarray | None
    excluded: int
    score_mean: np.ndarray
    h_known: bool = False
    target_report: InfoBoundReport | None = None

    @property
    def deviation_in_se(self) -> np.ndarray | None:
        """``(estimate - target) / SE`` elementwise."""
        if self.target is None:
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.matrix_estimate - self.target) / self.standard_errors

    def within(self, k_se: float = 3.0) -> bool:
        dev = self.deviation_in_se
        return dev is not None and bool(np.all(np.abs(dev) <= k_se))

    def to_dict(self) -> dict:
        out = {
            "scheme": self.scheme.value,
            "h_known": self.h_known,
            "n": self.n,
            "excluded": self.excluded,
            "matrix_estimate": self.matrix_estimate.tolist(),
            "standard_errors": self.standard_errors.tolist(),
            "score_mean": self.score_mean.tolist(),
            "target": None if self.target is None else self.target.tolist(),
        }
        dev = self.deviation_in_se
        out["deviation_in_se"] = None if dev is None else dev.tolist()
        return out


def _prepare(sample: EpisodeSample):
    n = len(sample)
    if n < MIN_RECORDS:
        raise DomainError(f"need at least {MIN_RECORDS} records, got {n}")
    return n


def _check_exclusions(ok: np.ndarray):
    bad = int((~ok).sum())
    if bad > MAX_EXCLUDED_FRACTION * ok.size:
        raise NumericalError(
            f"{bad} of {ok.size} records have undefined scores; this points at a "
            "score evaluation problem rather than measure-zero events")
    return bad


def empirical_information(sample: EpisodeSample, theta, m: BaselineModel, scheme,
                          law: SampledCovariateLaw | None = None, h_known: bool = False,
                          groups: int = JACKKNIFE_GROUPS) -> EmpiricalInfoReport:
    """Covariance of the efficient score with jackknife standard errors.

    Parameters
    ----------
    sample : EpisodeSample
        Records generated at ``theta`` from baseline ``m``.
    law : SampledCovariateLaw, optional
        The sampled covariate law; when given, the analytic bound is attached
        as ``target``.
    h_known : bool
        Add the covariate-only score, estimating ``Sigma_Z (I_s + 1)``.
    """
    scheme = Scheme.parse(scheme)
    n = _prepare(sample)
    ok_all = np.ones(n, dtype=bool)

    def stat(keep):
        sub = EpisodeSample(sample.x[keep], sample.d[keep], sample.z[keep])
        mean_z = sub.z.sum(axis=0) / len(sub)
        psi, ok = efficient_scores(sub, theta, m, mean_z, scheme, h_known)
        if keep.all():
            ok_all[:] = ok
        return _cov(psi[ok])

    est, se = _jackknife(stat, n, groups)
    excluded = _check_exclusions(ok_all)
    mean_z = sample.z.sum(axis=0) / n
    psi, ok = efficient_scores(sample, theta, m, mean_z, scheme, h_known)
    score_mean = psi[ok].sum(axis=0) / ok.sum()
    target = rep = None
    if law is not None:
        rep = info_bound(m, law, scheme, h_known=h_known)
        target = rep.matrix
    return EmpiricalInfoReport(est, se, n, scheme, target, excluded, score_mean,
                               h_known, rep)


def empirical_h_known_gain(sample: EpisodeSample, theta, m: BaselineModel, scheme,
                           law: SampledCovariateLaw | None = None,
                           groups: int = JACKKNIFE_GROUPS) -> EmpiricalInfoReport:
    """Estimate of (h-known information) minus (h-unknown information).

    Both covariances are formed on the same records inside each jackknife
    replicate, so the standard error is that of the difference.  The target
    is ``Sigma_Z``.
    """
    scheme = Scheme.parse(scheme)
    n = _prepare(sample)
    ok_all = np.ones(n, dtype=bool)

    def stat(keep):
        sub = EpisodeSample(sample.x[keep], sample.d[keep], sample.z[keep])
        mean_z = sub.z.sum(axis=0) / len(sub)
        a, ok = efficient_scores(sub, theta, m, mean_z, scheme, h_known=True)
        b, _ = efficient_scores(sub, theta, m, mean_z, scheme, h_known=False)
        if keep.all():
            ok_all[:] = ok
        return _cov(a[ok]) - _cov(b[ok])

    est, se = _jackknife(stat, n, groups)
    excluded = _check_exclusions(ok_all)
    target = None if law is None else law.sigma_z()
    centered = sample.z - sample.z.mean(axis=0)
    return EmpiricalInfoReport(est, se, n, scheme, target, excluded,
                               -centered.mean(axis=0), True, None)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    p_bound: float
    n: int


def ks_distance(samples, cdf) -> KSResult:
    """One-sample Kolmogorov-Smirnov distance ``sup |F_n - F|``.

    ``p_bound`` comes from the asymptotic Kolmogorov distribution of
    ``sqrt(n) D``.  Unsorted input is sorted.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n < 10:
        raise DomainError(f"KS distance needs at least 10 samples, got {n}")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - f)), float(np.max(f - (i - 1) / n)))
    return KSResult(d, float(kolmogorov(np.sqrt(n) * d)), n)
