import math

import numpy as np
import pytest
from scipy import stats

from aftinfo import (
    BaselineDensity,
    CurrentDuration,
    CustomBaseline,
    Degenerate,
    LengthBiased,
    LogLogistic,
    LogTransformed,
    Mixture,
    Scaled,
    Scheme,
    TwoPoint,
    Uniform,
    UnitUniform,
    Weibull,
    closed_form_for,
    info_location,
    info_scale,
    info_scale_closed_form,
    verify_mixture_contraction,
    verify_patience_inequality,
)
from aftinfo.config import lognormal_grid
from aftinfo.errors import DomainError

from conftest import builtin_models


@pytest.mark.parametrize("family,gamma,scheme,value", [
    ("weibull", 5, "lb", 30.0), ("weibull", 5, "cd", 5.0),
    ("loglogistic", 10, "lb", 33.0), ("loglogistic", 10, "cd", 4.5),
])
def test_closed_form_values(family, gamma, scheme, value):
    r = info_scale_closed_form(family, gamma, scheme)
    assert r.value == value
    assert r.method == "closed_form"
    assert r.error_estimate == 0.0


def test_closed_form_domain():
    with pytest.raises(DomainError, match="gamma > 1"):
        info_scale_closed_form("loglogistic", 1.0, "lb")
    with pytest.raises(DomainError, match="gamma > 0"):
        info_scale_closed_form("weibull", 0.0, "cd")
    with pytest.raises(DomainError):
        info_scale_closed_form("gamma", 2.0, "cd")


@pytest.mark.parametrize("m,scheme,value", [
    (Weibull(1.0), "lb", 2.0), (Weibull(1.0), "cd", 1.0),
    (LogLogistic(2.0), "lb", 1.0), (LogLogistic(2.0), "cd", 0.5),
])
def test_info_scale_examples(m, scheme, value):
    r = info_scale(Scheme.parse(scheme).density(m))
    assert r.finite and r.method == "quadrature"
    assert r.value == pytest.approx(value, abs=1e-6)


@pytest.mark.parametrize("m", builtin_models(), ids=lambda m: m.name)
def test_closed_form_agreement(m):
    for scheme in Scheme:
        q = info_scale(scheme.density(m))
        exact = closed_form_for(m, scheme).value
        assert abs(q.value - exact) < 1e-6
        # the reported error bound is honest here
        assert abs(q.value - exact) <= max(10 * q.error_estimate, 1e-9)


def test_information_by_independent_quadrature():
    # oracle: scipy quad of the squared scale score of the exponential's f1 (x e^-x)
    from scipy import integrate
    oracle = integrate.quad(lambda x: (2 - x) ** 2 * x * math.exp(-x), 0, np.inf)[0]
    assert info_scale(LengthBiased(Weibull(1.0))).value == pytest.approx(oracle, abs=1e-9)


@pytest.mark.parametrize("sigma", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("m", [Weibull(2.0), LogLogistic(3.0)], ids=lambda m: m.name)
def test_scale_invariance(m, sigma):
    for d in (BaselineDensity(m), LengthBiased(m), CurrentDuration(m)):
        assert abs(info_scale(Scaled(d, sigma)).value - info_scale(d).value) < 1e-8


@pytest.mark.parametrize("m", builtin_models(), ids=lambda m: m.name)
def test_log_transform_identity(m):
    for d in (BaselineDensity(m), LengthBiased(m), CurrentDuration(m)):
        a = info_scale(d)
        b = info_location(LogTransformed(d))
        assert abs(a.value - b.value) < 2e-7, d


def test_location_information_examples():
    assert info_location(LogTransformed(BaselineDensity(Weibull(1.0)))).value == \
        pytest.approx(1.0, abs=1e-7)
    assert info_location(LogTransformed(BaselineDensity(Weibull(2.0)))).value == \
        pytest.approx(4.0, abs=1e-7)
    ref = stats.lognorm(1.0)
    lognormal = CustomBaseline(ref.pdf, ref.sf,
                               pdf_derivative=lambda x: -ref.pdf(x) * (1 + np.log(x)) / x,
                               name="lognormal")
    r = info_location(LogTransformed(BaselineDensity(lognormal)))
    assert r.value == pytest.approx(1.0, abs=1e-7)


def test_info_scale_rejects_log_scale_density():
    with pytest.raises(DomainError):
        info_scale(LogTransformed(BaselineDensity(Weibull(1.0))))
    with pytest.raises(DomainError):
        info_location(BaselineDensity(Weibull(1.0)))


def test_divergent_information_flagged():
    # f = 1.5 sqrt(1 - x) on (0, 1): f s^2 ~ (1 - x)^(-3/2) at the edge
    m = CustomBaseline(
        lambda x: np.where(x < 1, 1.5 * np.sqrt(np.clip(1 - x, 0, None)), 0.0),
        lambda x: np.clip(1 - x, 0, None) ** 1.5,
        pdf_derivative=lambda x: np.where(
            x < 1, -0.75 / np.sqrt(np.clip(1 - x, 1e-300, None)), 0.0),
        name="sqrt-edge")
    assert m.mean == pytest.approx(0.4, abs=1e-8)
    r = info_scale(BaselineDensity(m))
    assert not r.finite


def test_bounded_score_custom():
    # f = 1/(1+x)^2 has score (1 - x)/(1 + x), information 1/3
    m = CustomBaseline(lambda x: 1 / (1 + x) ** 2, lambda x: 1 / (1 + x),
                       pdf_derivative=lambda x: -2 / (1 + x) ** 3, name="pareto-like")
    r = info_scale(BaselineDensity(m))
    assert r.finite and r.value == pytest.approx(1 / 3, abs=1e-7)


@pytest.mark.parametrize("m,i1,i2", [
    (Weibull(2.0), 6.0, 2.0), (LogLogistic(5.0), 8.0, 2.0), (Weibull(0.5), 0.75, 0.5),
])
def test_patience_examples(m, i1, i2):
    r = verify_patience_inequality(m)
    assert r.holds and r.status == "holds"
    assert r.i1 == pytest.approx(i1, abs=1e-6)
    assert r.i2 == pytest.approx(i2, abs=1e-6)
    assert r.margin == pytest.approx(i1 - i2, abs=1e-6)


@pytest.mark.parametrize("sigma", [0.25, 0.5, 1.0])
def test_patience_custom_grids(sigma):
    r = verify_patience_inequality(lognormal_grid(sigma))
    assert r.holds
    assert r.margin > 10 * r.error


def test_contraction_degenerate_is_equality():
    r = verify_mixture_contraction(BaselineDensity(Weibull(1.0)), Degenerate(3.0))
    assert r.degenerate and r.equal and r.holds
    assert r.i_h == pytest.approx(1.0, abs=1e-7)


def test_contraction_unit_uniform_exponential():
    r = verify_mixture_contraction(BaselineDensity(Weibull(1.0)), UnitUniform())
    assert r.holds and not r.equal
    assert r.i_h < 1.0
    assert r.i_h == pytest.approx(0.60846003316, abs=1e-8)


def test_contraction_unit_uniform_monte_carlo_oracle():
    # Monte Carlo score variance of X * U, X ~ Exp(1), U ~ U(0, 1)
    h = Mixture(BaselineDensity(Weibull(1.0)), UnitUniform())
    rng = np.random.default_rng(11)
    y = rng.exponential(size=20000) * (1 - rng.random(20000))
    s2 = h.scale_score(y) ** 2
    mc = s2.mean()
    se = s2.std(ddof=1) / np.sqrt(s2.size)
    assert abs(mc - info_scale(h).value) < 4 * se


def test_contraction_reproduces_patience_for_exponential():
    r = verify_mixture_contraction(LengthBiased(Weibull(1.0)), UnitUniform())
    assert r.i_f == pytest.approx(2.0, abs=1e-7)
    assert r.i_h == pytest.approx(1.0, abs=1e-7)
    assert r.holds


def test_two_point_family_monotone():
    f = BaselineDensity(Weibull(1.0))
    i_f = info_scale(f)
    vals = [info_scale(Mixture(f, TwoPoint(1.0, b, 0.5))) for b in (1.001, 1.5, 2.0, 5.0)]
    prev = i_f
    for v in vals:
        assert v.value <= prev.value + prev.error_estimate + v.error_estimate
        prev = v
    assert abs(vals[0].value - i_f.value) < 1e-5
    np.testing.assert_allclose([v.value for v in vals], [0.99999950, 0.92970, 0.83414, 0.59740],
                               atol=1e-5)


LAWS = [Degenerate(3.0), TwoPoint(1.0, 2.0, 0.5), Uniform(0.5, 2.0), UnitUniform(),
        TwoPoint(0.5, 4.0, 0.2), Uniform(0.1, 1.0)]


@pytest.mark.parametrize("law", LAWS, ids=repr)
@pytest.mark.parametrize("m", [Weibull(1.0), Weibull(2.0), LogLogistic(3.0)], ids=lambda m: m.name)
def test_cauchy_schwarz_direction(m, law):
    r = verify_mixture_contraction(BaselineDensity(m), law)
    assert not r.i_h > r.i_f + r.error
    assert r.holds
    assert r.equal == law.is_degenerate


@pytest.mark.slow
@pytest.mark.parametrize("law", [Uniform(0.5, 2.0), UnitUniform()], ids=repr)
def test_contraction_over_grid_baseline(law):
    r = verify_mixture_contraction(BaselineDensity(lognormal_grid(0.5)), law)
    assert r.holds


def test_numeric_derivative_flag_propagates():
    ref = stats.lognorm(0.5)
    m = CustomBaseline(ref.pdf, ref.sf, name="lognormal-fd")
    r = info_scale(BaselineDensity(m))
    assert r.numeric_derivative
    assert r.value == pytest.approx(1 / 0.25, rel=1e-5)
