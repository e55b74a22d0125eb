import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from gmrfdet.core import (
    CarCoefficients,
    DomainError,
    SfarParams,
    car_spectrum,
    elliptic_k,
    elliptic_k_gap,
    frequency_grid,
    sfar_params_for_snr,
    sfar_spectrum,
    signal_power,
    snr,
)


def k_by_quadrature(k):
    val, _ = quad(lambda t: 1.0 / math.sqrt(1.0 - (k * math.sin(t)) ** 2), 0.0, math.pi / 2,
                  epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def test_elliptic_k_endpoints():
    assert elliptic_k(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert elliptic_k(1.0) == math.inf


def test_elliptic_k_half():
    # AGM value, cross-checked against the defining integral
    assert elliptic_k(0.5) == pytest.approx(1.6857503548125961, rel=1e-14)
    assert elliptic_k(0.5) == pytest.approx(k_by_quadrature(0.5), rel=1e-12)


@pytest.mark.parametrize("k", [0.1, 0.3, 0.6, 0.8, 0.9, 0.99, 0.999])
def test_elliptic_k_matches_integral(k):
    assert elliptic_k(k) == pytest.approx(k_by_quadrature(k), rel=1e-11)


@pytest.mark.parametrize("k", [-0.1, 1.0000001, math.nan, 2.0])
def test_elliptic_k_domain(k):
    with pytest.raises(DomainError):
        elliptic_k(k)


def test_elliptic_k_gap_agrees_with_modulus():
    for gap in [1.0, 0.5, 0.2, 1e-3, 1e-6]:
        assert elliptic_k_gap(gap) == pytest.approx(elliptic_k(1.0 - gap), rel=1e-9)
    # asymptote K ~ log(4/k') with k' = sqrt(2 gap)
    gap = 1e-40
    assert elliptic_k_gap(gap) == pytest.approx(math.log(4.0 / math.sqrt(2 * gap)), rel=1e-12)


@given(st.floats(0.0, 0.999), st.floats(0.0, 0.999))
def test_elliptic_k_increasing(a, b):
    if a < b:
        assert elliptic_k(a) < elliptic_k(b) or b - a < 1e-12
    assert elliptic_k(a) >= math.pi / 2


@pytest.mark.parametrize("kw", [
    dict(kappa=0.0, zeta=0.1), dict(kappa=-1.0, zeta=0.1), dict(kappa=1.0, zeta=-0.01),
    dict(kappa=1.0, zeta=0.2500001), dict(kappa=1.0, zeta=0.1, sigma2=0.0),
])
def test_params_rejected(kw):
    with pytest.raises(DomainError):
        SfarParams(**kw)


def test_params_lambda():
    p = SfarParams(kappa=2.0, zeta=0.2)
    assert p.lam == pytest.approx(0.4)
    assert p.lam <= p.kappa / 4


def test_spectrum_iid_is_flat():
    f = sfar_spectrum(SfarParams(1.0, 0.0))
    w = np.linspace(-math.pi, math.pi, 7)
    np.testing.assert_allclose(f(w[:, None], w[None, :]), 1 / (4 * math.pi**2), rtol=1e-15)


def test_spectrum_values():
    assert sfar_spectrum(SfarParams(1.0, 0.25))(0.0, 0.0) == math.inf
    assert math.isfinite(sfar_spectrum(SfarParams(1.0, 0.25))(0.1, 0.0))
    assert sfar_spectrum(SfarParams(2.0, 0.1))(math.pi, math.pi) == pytest.approx(
        1 / (11.2 * math.pi**2), rel=1e-14)


@given(st.floats(0.0, 0.2499), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
def test_spectrum_symmetries(zeta, w1, w2):
    f = sfar_spectrum(SfarParams(1.3, zeta))
    v = f(w1, w2)
    assert v > 0 and math.isfinite(v)
    assert f(-w1, -w2) == pytest.approx(v, rel=1e-13)
    assert f(w2, w1) == pytest.approx(v, rel=1e-13)


@pytest.mark.parametrize("zeta", [0.0, 0.05, 0.2, 0.249])
def test_spectrum_extrema(zeta):
    kappa = 1.7
    f = sfar_spectrum(SfarParams(kappa, zeta))
    w = frequency_grid(64, midpoint=False)
    vals = f(w[:, None], w[None, :])
    lo = 1 / (4 * math.pi**2 * kappa * (1 + 4 * zeta))
    hi = 1 / (4 * math.pi**2 * kappa * (1 - 4 * zeta))
    assert vals.min() == pytest.approx(lo, rel=1e-12)
    assert vals.max() == pytest.approx(hi, rel=1e-12)
    assert vals[32, 32] == pytest.approx(lo, rel=1e-12)  # (pi, pi)
    assert vals[0, 0] == pytest.approx(hi, rel=1e-12)


def test_signal_power_values():
    assert signal_power(SfarParams(1.0, 0.0)) == pytest.approx(1.0, rel=1e-15)
    assert signal_power(SfarParams(2.0, 0.0)) == pytest.approx(0.5, rel=1e-15)
    assert signal_power(SfarParams(1.0, 0.2)) == pytest.approx(2 * elliptic_k(0.8) / math.pi, rel=1e-15)
    assert signal_power(SfarParams(1.0, 0.25)) == math.inf


@pytest.mark.parametrize("zeta", [0.05, 0.2])
def test_signal_power_by_inverse_transform(zeta):
    # gamma_00 = integral of f over the square, node rule on a 1024^2 grid
    f = sfar_spectrum(SfarParams(1.0, zeta))
    w = frequency_grid(1024, midpoint=False)
    gamma00 = 4 * math.pi**2 * f(w[:, None], w[None, :]).mean()
    assert gamma00 == pytest.approx(signal_power(SfarParams(1.0, zeta)), rel=1e-6)


def test_signal_power_inverse_transform_converges():
    p = SfarParams(1.0, 0.2499)
    f = sfar_spectrum(p)
    errs = []
    for n in (64, 256, 1024):
        w = frequency_grid(n)
        errs.append(abs(4 * math.pi**2 * f(w[:, None], w[None, :]).mean() - signal_power(p)))
    assert errs[0] > errs[1] > errs[2]


def test_snr_examples():
    assert snr(SfarParams(1.0, 0.0, 1.0)) == pytest.approx(1.0)
    assert snr(SfarParams(1.0, 0.0, 0.1)) == pytest.approx(10.0)
    assert snr(SfarParams(1.0, 0.2, 1.0)) == signal_power(SfarParams(1.0, 0.2))


def test_params_for_snr_examples():
    assert sfar_params_for_snr(1.0, 0.0, 1.0).kappa == pytest.approx(1.0, rel=1e-15)
    assert sfar_params_for_snr(10.0, 0.0, 1.0).kappa == pytest.approx(0.1, rel=1e-15)
    p = sfar_params_for_snr(1.0, 0.2, 1.0)
    assert p.kappa == pytest.approx(2 * elliptic_k(0.8) / math.pi)
    assert snr(p) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(DomainError):
        sfar_params_for_snr(1.0, 0.25, 1.0)


@settings(max_examples=200)
@given(st.floats(1e-3, 1e4), st.floats(0.0, 0.2499), st.floats(1e-3, 1e3))
def test_params_for_snr_roundtrip(s, zeta, sigma2):
    assert snr(sfar_params_for_snr(s, zeta, sigma2)) == pytest.approx(s, rel=1e-13)


def test_car_from_sfar_matches_sfar_spectrum():
    p = SfarParams(1.5, 0.2)
    w = frequency_grid(32)
    a = car_spectrum(CarCoefficients.from_sfar(p))(w[:, None], w[None, :])
    b = sfar_spectrum(p)(w[:, None], w[None, :])
    np.testing.assert_allclose(a, b, rtol=1e-13)


def test_car_boundary_case_admitted():
    CarCoefficients.from_sfar(SfarParams(1.0, 0.25))


def test_car_rejects_asymmetric():
    with pytest.raises(DomainError, match="theta"):
        CarCoefficients({(0, 0): 1.0, (1, 0): -0.1})


def test_car_rejects_nonpositive_center():
    with pytest.raises(DomainError):
        CarCoefficients({(0, 0): 0.0})


def test_car_rejects_negative_spectrum_with_location():
    # 1 - 0.6 (cos w1 + cos w2) < 0 at the origin
    theta = {(0, 0): 1.0, (1, 0): -0.3, (-1, 0): -0.3, (0, 1): -0.3, (0, -1): -0.3}
    with pytest.raises(DomainError, match=r"\(w1, w2\) = \(0, 0\)"):
        CarCoefficients(theta)


def test_car_diagonal_neighbours():
    theta = {(0, 0): 1.0, (1, 1): -0.2, (-1, -1): -0.2, (1, -1): 0.1, (-1, 1): 0.1}
    f = car_spectrum(CarCoefficients(theta))
    w1, w2 = 0.3, -1.1
    expect = 1 / (4 * math.pi**2 * (1 - 0.4 * math.cos(w1 + w2) + 0.2 * math.cos(w1 - w2)))
    assert f(w1, w2) == pytest.approx(expect, rel=1e-14)
