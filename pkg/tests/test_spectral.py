import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeroconc import spectral
from zeroconc.spectral import (
    DivergenceError,
    SpectralModel,
    covariance,
    covariance_kappa,
    exp_moment,
    kac_rice_alpha,
    omega_star,
    r1_prime,
    r2_second,
    r_ell,
)

# frozen values from an independent scipy.integrate.quad computation
QUAD_ORACLE = {
    "gaussian": dict(r1p=-0.032993887226873075, r2s=0.4256888664489715,
                     rell2=0.31911462084902487, ck=0.8148728554231554,
                     vr=1.0416435338374794, vi=1.0410883459369817),
    "band": dict(r1p=-0.34592187837415966, r2s=-0.01866428400312715,
                 rell2=0.6668245735458951, ck=0.9433483740081856,
                 vr=1.0134404072535195, vi=0.33601018133798466),
    "bilateral_exponential": dict(r1p=-0.05990409354623244, r2s=0.1665103189493433,
                                  rell2=0.3032454504218292, ck=0.6386554621848741,
                                  vr=1.0952380952380956, vi=2.3809523809523805),
}


def test_density_normalized(named_model):
    q = named_model.quadrature()
    mass, err = q.integrate(lambda lam: np.ones_like(lam))
    assert mass == pytest.approx(1.0, abs=1e-12)


def test_r_at_zero_is_one(named_model):
    assert covariance(named_model, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert covariance(named_model, 0.0, method="quad") == pytest.approx(1.0, abs=1e-12)


def test_quadrature_matches_closed_form(named_model):
    t = np.linspace(-30, 30, 301)
    assert np.max(np.abs(covariance(named_model, t, "quad") - covariance(named_model, t))) < 1e-10


def test_gaussian_covariance_kappa_closed_form(gaussian):
    t = np.linspace(-5, 5, 51)
    k = 0.3
    expected = np.exp(2 * k * k) * np.exp(-t * t / 2) * np.cos(2 * k * t)
    assert np.allclose(covariance_kappa(gaussian, t, k, "quad"), expected, atol=1e-12)


@pytest.mark.parametrize("family", list(QUAD_ORACLE))
def test_against_quad_oracle(family):
    m = SpectralModel.from_name(family)
    o = QUAD_ORACLE[family]
    assert r1_prime(m, 3.0, 0.1) == pytest.approx(o["r1p"], abs=1e-11)
    assert r2_second(m, 2.0, 0.3) == pytest.approx(o["r2s"], abs=1e-11)
    assert r_ell(m, 1.5, 0.2, 2).real == pytest.approx(o["rell2"], abs=1e-11)
    assert covariance_kappa(m, 0.7, 0.2) == pytest.approx(o["ck"], abs=1e-11)
    assert covariance_kappa(m, 0.7, 0.2, "quad") == pytest.approx(o["ck"], abs=1e-11)


def test_r_ell_imaginary_part_vanishes(named_model):
    v = r_ell(named_model, np.linspace(-4, 4, 9), 0.1, 1)
    assert np.max(np.abs(v.imag)) < 1e-15


def test_r_ell_at_y_zero_is_covariance(named_model):
    x = np.linspace(0, 6, 13)
    assert np.allclose(r_ell(named_model, x, 0.0, 2).real, covariance(named_model, x), atol=1e-12)


def test_r1_prime_gaussian_identity(gaussian):
    # r1'(x; y) = Im r(x + iy) / y
    x, y = np.linspace(0.5, 6, 12), 0.15
    expected = np.exp(-((x + 1j * y) ** 2) / 2).imag / y
    assert np.allclose(r1_prime(gaussian, x, y), expected, atol=1e-12)


def test_r2_second_gaussian_identity(gaussian):
    # r2''(x; y) = -(Re r(x + 2iy) - r(x)) / (2 y^2)
    x, y = np.linspace(0.5, 6, 12), 0.15
    expected = -(np.exp(-((x + 2j * y) ** 2) / 2).real - np.exp(-x * x / 2)) / (2 * y * y)
    assert np.allclose(r2_second(gaussian, x, y), expected, atol=1e-10)


@pytest.mark.parametrize("family,alpha", [
    ("gaussian", 1 / math.pi),
    ("band", 1 / (math.pi * math.sqrt(3))),
    ("bilateral_exponential", math.sqrt(2) / math.pi),
])
def test_kac_rice_alpha(family, alpha):
    m = SpectralModel.from_name(family)
    assert kac_rice_alpha(m) == pytest.approx(alpha, rel=1e-14)
    # second moment equals -r''(0)
    assert spectral.curvature_at_zero(m) == pytest.approx(spectral.spectral_moment(m), rel=1e-5)


def test_band_K_scaling():
    assert kac_rice_alpha(SpectralModel.band(2.0)) == pytest.approx(2 / (math.pi * math.sqrt(3)))


def test_exp_moment_closed_forms(named_model):
    for k in (0.0, 0.2, 0.5):
        q = named_model.quadrature(0.0, k)
        val, _ = q.integrate(lambda lam: np.exp(k * lam))
        assert exp_moment(named_model, k) == pytest.approx(val, rel=1e-12)


def test_exp_moment_divergence(bilateral):
    assert exp_moment(bilateral, 1.0) == math.inf
    assert exp_moment(bilateral, 0.5) == pytest.approx(2.0)


def test_kappa_values(band, gaussian, bilateral):
    assert band.kappa == math.inf and gaussian.kappa == math.inf
    assert bilateral.kappa == 1.0


def test_strip_violation_raises(bilateral):
    with pytest.raises(DivergenceError):
        covariance_kappa(bilateral, 0.0, 0.5)
    with pytest.raises(DivergenceError):
        r2_second(bilateral, 1.0, 0.5)


def test_tabulated_model_from_gaussian_samples(tmp_path, gaussian):
    lam = np.linspace(0, 9, 2001)
    dens = gaussian.density(lam)
    path = tmp_path / "d.csv"
    with open(path, "w") as fh:
        fh.write("lambda,density\n")
        for a, b in zip(lam, dens):
            fh.write(f"{float(a)!r},{float(b)!r}\n")
    tab = SpectralModel.from_csv(path)
    assert tab.kappa == math.inf
    t = np.linspace(0, 10, 21)
    assert np.max(np.abs(covariance(tab, t) - covariance(gaussian, t))) < 1e-5
    assert kac_rice_alpha(tab) == pytest.approx(1 / math.pi, rel=1e-5)


def test_tabulated_mirrors_negative_side():
    lam = np.linspace(-2, 2, 41)
    tab = SpectralModel.tabulated(lam, np.where(lam > 0, 2.0, 1.0))
    assert tab.density(0.5) == pytest.approx(tab.density(-0.5))
    mass = 2 * np.trapezoid(tab.values, tab.grid)
    assert mass == pytest.approx(1.0, abs=1e-12)


def test_tabulated_rejects_bad_input():
    with pytest.raises(ValueError):
        SpectralModel.tabulated([0, 1, 1], [1, 1, 1])
    with pytest.raises(ValueError):
        SpectralModel.tabulated([0, 1, 2], [1, -1, 1])


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(-40, 40))
def test_band_covariance_bounded(K, t):
    m = SpectralModel.band(K)
    assert abs(covariance(m, t)) <= 1.0 + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 0.45), st.floats(-20, 20))
def test_covariance_kappa_dominated_by_exp_moment(k, t):
    m = SpectralModel.bilateral_exponential()
    assert abs(covariance_kappa(m, t, k)) <= exp_moment(m, 2 * k) + 1e-12


class TestOmegaStar:
    def test_band_fails_r1prime(self, band):
        rep = omega_star(band, 2 * math.pi, 0.2)
        assert rep.verdict == "fails(r1prime)"
        # sinc vanishes on the lattice 2 pi j
        assert np.max(rep.term_breakdown["r"]) < 1e-12
        assert rep.term_breakdown["r2second"][-1] < 0.05

    @pytest.mark.parametrize("family", ["gaussian", "bilateral_exponential"])
    def test_satisfied(self, family):
        rep = omega_star(SpectralModel.from_name(family), 1.0, 0.2)
        assert rep.verdict == "satisfied"
        vals = [v for _, v in rep.omega_star_table]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_report_serializable(self, gaussian):
        import json
        json.dumps(omega_star(gaussian, 1.0, 0.2, horizon=5).to_dict())

    def test_invalid_kappa_prime(self, bilateral):
        with pytest.raises(ValueError):
            omega_star(bilateral, 1.0, 0.5)


@pytest.mark.parametrize("x,y", [(0.7, 0.1), (2.5, -0.2), (-1.3, 0.3)])
def test_derivatives_match_finite_differences(named_model, x, y):
    # fixes the sign convention of r1' and r2'' against r_1 and r_2 directly
    h = 1e-3
    r1 = lambda s: r_ell(named_model, s, y, 1).real
    r2 = lambda s: r_ell(named_model, s, y, 2).real
    fd1 = (r1(x + h) - r1(x - h)) / (2 * h)
    fd2 = (r2(x + h) - 2 * r2(x) + r2(x - h)) / h**2
    assert r1_prime(named_model, x, y) == pytest.approx(fd1, abs=1e-6)
    assert r2_second(named_model, x, y) == pytest.approx(fd2, abs=1e-5)
