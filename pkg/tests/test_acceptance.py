"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (the lines are also
collected into an "acceptance criteria" section of the terminal summary) or
as a script, ``python tests/test_acceptance.py``.
"""

import hashlib
import json
import math
import sys
import time

import numpy as np

from aftinfo import (
    BaselineDensity,
    DirectTruncation,
    DiscreteCovariate,
    ExactInverse,
    LengthBiased,
    Mixture,
    PointProcess,
    SamplerConfig,
    Scheme,
    UnitUniform,
    Weibull,
    empirical_h_known_gain,
    empirical_information,
    info_bound,
    info_scale,
    info_scale_closed_form,
    ks_distance,
    sample_direct,
    sample_exact,
    sample_point_process,
    verify_mixture_contraction,
    verify_patience_inequality,
)
from aftinfo.cli import cmd_sweep, main
from aftinfo.config import VerifySettings, parse_config
from aftinfo.sampler import duration_quantile_bound

from conftest import builtin_models

LB, CD = Scheme.LENGTH_BIASED, Scheme.CURRENT_DURATION
BERNOULLI = DiscreteCovariate([[0.0], [1.0]], [0.5, 0.5])


def _family(m):
    return "weibull" if isinstance(m, Weibull) else "loglogistic"


def test_criterion_1_closed_forms(criterion):
    t0 = time.perf_counter()
    worst, where = 0.0, ""
    for m in builtin_models():
        for scheme in Scheme:
            exact = info_scale_closed_form(_family(m), m.gamma, scheme).value
            q = info_scale(scheme.density(m))
            rel = abs(q.value - exact) / exact
            if not q.finite:
                rel = math.inf
            if rel > worst:
                worst, where = rel, f"{m.name} {scheme.value}"
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 5.0
    criterion(1, ok, f"22 closed forms, max rel error {worst:.2e} ({where}), {elapsed:.2f} s")


def test_criterion_2_patience(criterion):
    t0 = time.perf_counter()
    models = builtin_models() + list(VerifySettings().custom)
    reports = [verify_patience_inequality(m) for m in models]
    elapsed = time.perf_counter() - t0
    bad = [r.model for r in reports if r.status != "holds" or not r.i2 + r.error < r.i1]
    tightest = min(r.margin / max(r.error, 1e-300) for r in reports)
    ok = len(reports) == 14 and not bad and elapsed < 10.0
    criterion(2, ok, f"{len(reports)} baselines, I_s(f2) < I_s(f1) in all, failures {bad}, "
                     f"smallest margin/error {tightest:.3g}, {elapsed:.2f} s")


def test_criterion_3_contraction(criterion):
    t0 = time.perf_counter()
    vs = VerifySettings()
    bad, count = [], 0
    for base in vs.mixing_bases:
        f = BaselineDensity(base)
        for law in vs.mixing_laws:
            r = verify_mixture_contraction(f, law)
            count += 1
            # equality within the combined error for the degenerate law only
            if r.degenerate:
                good = r.equal
            else:
                good = r.i_h < r.i_f - r.error and not r.equal
            if not good or r.status != "holds":
                bad.append(f"{base.name} x {law!r}")
    elapsed = time.perf_counter() - t0
    ok = count == 12 and not bad and elapsed < 10.0
    criterion(3, ok, f"{count} base x law pairs, failures {bad}, {elapsed:.2f} s")


def test_criterion_4_mixing_identity(criterion):
    x = np.geomspace(0.02, 10.0, 20)
    worst = 0.0
    for m in (Weibull(1.0), Weibull(2.0)):
        h = Mixture(LengthBiased(m), UnitUniform()).pdf(x)
        # closed-form current duration density: survival / mean
        f2 = np.asarray(m.survival(x)) / m.mean
        worst = max(worst, float(np.max(np.abs(h - f2))))
    criterion(4, worst < 1e-8, f"20 points x 2 baselines, max |delta| {worst:.2e}")


def _marginal_cdfs(m, theta):
    law = BERNOULLI.tilt([theta])
    p = law.probs
    w = np.exp(theta * np.array([0.0, 1.0]))

    # D = exp(-theta z) V*, X = exp(-theta z) V*U given Z = z
    def cdf_d(y):
        return sum(p[k] * m.length_biased_cdf(w[k] * y) for k in range(2))

    def cdf_x(y):
        return sum(p[k] * (1 - m.current_duration_sf(w[k] * y)) for k in range(2))

    return cdf_d, cdf_x


def _check_sample(s, m, theta):
    n = len(s)
    cdf_d, cdf_x = _marginal_cdfs(m, theta)
    p_d = ks_distance(s.d, cdf_d).p_bound
    p_x = ks_distance(s.x, cdf_x).p_bound
    p_u = ks_distance(s.fraction, lambda t: t).p_bound
    corr = abs(float(np.corrcoef(s.fraction, s.d)[0, 1]))
    ok = min(p_d, p_x, p_u) > 1e-3 and corr < 4 / math.sqrt(n)
    return ok, f"n={n} p(D)={p_d:.3f} p(X)={p_x:.3f} p(U)={p_u:.3f} |corr|={corr:.4f}"


def test_criterion_5_sampler_laws(criterion):
    m, theta, n = Weibull(2.0), math.log(2.0), 100_000
    probe = SamplerConfig(m, ExactInverse(), theta=[theta], covariates=BERNOULLI)
    window = 50.0 * duration_quantile_bound(probe) * 1.01
    lines, oks = [], []

    t0 = time.perf_counter()
    cfg = SamplerConfig(m, DirectTruncation(window), seed=2024, theta=[theta],
                        covariates=BERNOULLI, n=n)
    ok, msg = _check_sample(sample_direct(cfg)[0], m, theta)
    dt = time.perf_counter() - t0
    oks.append(ok and dt < 30.0)
    lines.append(f"direct {msg} {dt:.1f} s")

    t0 = time.perf_counter()
    # E N = lambda E min(T, A), with E T = mu E exp(-theta W)
    mean_t = m.mean * 0.5 * (1 + math.exp(-theta))
    cfg = SamplerConfig(m, PointProcess(n / mean_t, window), seed=2025, theta=[theta],
                        covariates=BERNOULLI)
    ok, msg = _check_sample(sample_point_process(cfg), m, theta)
    dt = time.perf_counter() - t0
    oks.append(ok and dt < 30.0)
    lines.append(f"point process {msg} {dt:.1f} s")
    criterion(5, all(oks), "; ".join(lines))


def _direct_sample(n, seed):
    m = Weibull(2.0)
    probe = SamplerConfig(m, ExactInverse(), theta=[0.0], covariates=BERNOULLI)
    tau = 50.0 * duration_quantile_bound(probe) * 1.01
    cfg = SamplerConfig(m, DirectTruncation(tau), seed=seed, theta=[0.0],
                        covariates=BERNOULLI, n=n)
    return sample_direct(cfg)[0]


def test_criterion_6_bound_estimation(criterion):
    t0 = time.perf_counter()
    m = Weibull(2.0)
    s = _direct_sample(200_000, seed=6)
    law = BERNOULLI.tilt([0.0])
    lb = empirical_information(s, [0.0], m, LB, law=law)
    cd = empirical_information(s, [0.0], m, CD, law=law)
    elapsed = time.perf_counter() - t0
    e_lb, se_lb = lb.matrix_estimate[0, 0], lb.standard_errors[0, 0]
    e_cd, se_cd = cd.matrix_estimate[0, 0], cd.standard_errors[0, 0]
    ok = (abs(e_lb - 1.5) < 3 * se_lb and abs(e_cd - 0.5) < 3 * se_cd and e_lb > e_cd
          and elapsed < 60.0)
    criterion(6, ok, f"LB {e_lb:.4f} +- {se_lb:.4f} (target 1.5, "
                     f"{(e_lb - 1.5) / se_lb:+.2f} SE); CD {e_cd:.4f} +- {se_cd:.4f} "
                     f"(target 0.5, {(e_cd - 0.5) / se_cd:+.2f} SE); {elapsed:.1f} s")


def test_criterion_7_known_covariate_gain(criterion):
    m = Weibull(2.0)
    theta = [math.log(2.0)]
    law = BERNOULLI.tilt(theta)
    sigma = law.sigma_z()
    exact_gap = 0.0
    for scheme in Scheme:
        for method in ("closed_form", "quadrature"):
            known = info_bound(m, law, scheme, h_known=True, method=method).matrix
            unknown = info_bound(m, law, scheme, h_known=False, method=method).matrix
            exact_gap = max(exact_gap, float(np.max(np.abs(known - unknown - sigma))))
    # (I + 1) sigma - I sigma rounds to sigma up to a few ulps of I sigma
    ulps = exact_gap / (np.spacing(7.0 * float(sigma.max())))
    cfg = SamplerConfig(m, ExactInverse(), seed=7, theta=theta, covariates=BERNOULLI,
                        n=200_000)
    s = sample_exact(cfg)
    devs = []
    for scheme in Scheme:
        g = empirical_h_known_gain(s, theta, m, scheme, law=law)
        devs.append(float(g.deviation_in_se[0, 0]))
    ok = ulps <= 4 and all(abs(d) < 3 for d in devs)
    criterion(7, ok, f"analytic gap vs Sigma_Z {exact_gap:.1e} ({ulps:.0f} ulp); empirical "
                     f"gain deviations {devs[0]:+.2f} / {devs[1]:+.2f} SE "
                     f"(Sigma_Z = {float(sigma[0, 0]):.6f})")


def test_criterion_8_sweep_curves(criterion):
    details, oks = [], []
    for fam in ("weibull", "loglogistic"):
        res = cmd_sweep(parse_config({"sweep": {"family": fam}}))
        rows = res["rows"]
        cols = {c: [r[c] for r in rows] for c in ("i_lb", "i_cd", "i_lb_quad", "i_cd_quad",
                                                   "ratio")}
        up = all(all(a < b for a, b in zip(v, v[1:]))
                 for c, v in cols.items() if c != "ratio")
        down = all(a > b for a, b in zip(cols["ratio"], cols["ratio"][1:]))
        oks.append(up and down and not res["failed"])
        details.append(f"{fam} {len(rows)} gammas in [{rows[0]['gamma']:g}, "
                       f"{rows[-1]['gamma']:g}] increasing={up} ratio decreasing={down}")
    criterion(8, all(oks), "; ".join(details))


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_criterion_9_determinism(criterion, tmp_path, capsys):
    base = {"baseline": {"family": "weibull", "gamma": 2},
            "covariates": {"kind": "discrete", "support": [[0], [1]], "probs": [0.5, 0.5]},
            "theta": [0.0], "seed": 99}
    runs = {
        "direct": {"sampler": {"mode": "direct", "tau": 150, "n": 20_000}},
        "point_process": {"sampler": {"mode": "point_process", "intensity": 100,
                                      "window": 150}},
        "exact": {"sampler": {"mode": "exact", "n": 20_000},
                  "empirical": {"groups": 100}},
    }
    same, seen = [], []
    for name, extra in runs.items():
        cfg = tmp_path / f"{name}.json"
        cfg.write_text(json.dumps({**base, **extra}))
        d = tmp_path / name
        d.mkdir()
        digests = []
        # same command, same paths: the rerun overwrites the first run's files
        for _ in range(2):
            rec = d / "records.csv"
            assert main(["simulate", "--config", str(cfg), "--out", str(rec)]) == 0
            files = [rec, d / "records.csv.summary.json"]
            if name == "exact":
                emp = d / "empirical.json"
                assert main(["empirical", "--config", str(cfg), "--out", str(emp)]) == 0
                files.append(emp)
            digests.append([_digest(f) for f in files])
        capsys.readouterr()
        same.append(digests[0] == digests[1])
        seen.append(f"{name}: {len(digests[0])} files {'identical' if same[-1] else 'DIFFER'}")
    criterion(9, all(same), "; ".join(seen))


if __name__ == "__main__":
    import pytest

    sys.exit(pytest.main([__file__, "-v", "-s"]))
