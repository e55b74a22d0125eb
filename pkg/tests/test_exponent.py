import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmrfdet.core import SfarParams, sfar_params_for_snr, sfar_spectrum, SpectrumFn
from gmrfdet.exponent import (
    error_exponent,
    finite_lattice_kl_rate,
    integrand,
    optimal_zeta,
    sfar_error_exponent,
    sfar_error_exponent_gap,
    stein_exponent,
    zeta_sweep,
)

# adaptive dblquad of the closed-form integrand, tolerance 1e-13
KS_SNR1_Z01 = 0.0965318972980488
# hand sum over the four frequencies {0, pi}^2 of the N = 2 torus
RATE_N2_SNR1_Z01 = 0.1024362304375909


def test_integrand_values():
    assert integrand(0.0, 1.0) == 0.0
    assert integrand(1 / (4 * math.pi**2), 1.0) == pytest.approx(0.5 * math.log(2) - 0.25, rel=1e-14)
    assert integrand(math.inf, 1.0) == math.inf


@given(st.floats(0, 1e6), st.floats(1e-3, 1e3))
def test_integrand_nonnegative(f, sigma2):
    assert integrand(f, sigma2) >= 0.0


def test_integrand_small_signal_is_quadratic():
    # D(N(0,1)||N(0,1+q)) = q^2/4 + O(q^3)
    q = 1e-6
    assert integrand(q / (4 * math.pi**2), 1.0) == pytest.approx(q * q / 4, rel=1e-5)


@pytest.mark.parametrize("s", [0.1, 1.0, 10.0, 100.0])
def test_stein_reduction(s):
    res = sfar_error_exponent(s, 0.0, 64)
    assert res.value == pytest.approx(stein_exponent(s), abs=1e-12)
    assert res.error_estimate < 1e-12


def test_stein_value_at_unit_snr():
    assert sfar_error_exponent(1.0, 0.0).value == pytest.approx(0.0965736, abs=1e-7)
    assert sfar_error_exponent(1.0, 0.0).value == pytest.approx(0.5 * math.log(2) - 0.25, abs=1e-12)


def test_quadrature_matches_adaptive_oracle():
    res = sfar_error_exponent(1.0, 0.1, 256)
    assert res.value == pytest.approx(KS_SNR1_Z01, rel=1e-12)
    assert res.error_estimate < 1e-12


def test_general_path_agrees_with_sfar_path():
    for s, z in [(1.0, 0.1), (10.0, 0.2), (0.3, 0.2499), (2.0, 0.0)]:
        spec = sfar_spectrum(sfar_params_for_snr(s, z, 1.0))
        a = error_exponent(spec, 1.0, 128).value
        b = sfar_error_exponent(s, z, 128).value
        assert a == pytest.approx(b, abs=1e-12)


def test_sigma_scaling_invariance():
    # only the ratio of signal to noise spectra matters
    p = SfarParams(2.0, 0.15, 0.5)
    q = SfarParams(2.0 * 3.0, 0.15, 0.5 / 3.0)
    assert error_exponent(sfar_spectrum(p), p.sigma2).value == pytest.approx(
        error_exponent(sfar_spectrum(q), q.sigma2).value, rel=1e-13)


def test_zero_snr_is_undetectable():
    assert sfar_error_exponent(0.0, 0.0).value == 0.0
    assert sfar_error_exponent(1e-12, 0.0).value < 1e-24


def test_perfect_correlation_is_zero():
    res = sfar_error_exponent(1.0, 0.25, 64)
    assert res.value == 0.0


def test_perfect_correlation_pole_is_not_sampled():
    # kappa fixed: spectrum has a single pole at the origin, which midpoints avoid
    res = error_exponent(sfar_spectrum(SfarParams(1.0, 0.25)), 1.0, 64)
    assert math.isfinite(res.value) and res.value > 0


def test_near_perfect_correlation_converged_value():
    # grid-converged (512 to 4096 midpoints agree to 1e-13)
    a = sfar_error_exponent(1.0, 0.2499, 512).value
    assert a == pytest.approx(0.0555489016511, rel=1e-10)


def test_gap_parametrization_matches_zeta():
    for z in (0.0, 0.1, 0.2, 0.2499):
        assert sfar_error_exponent_gap(1.0, 1 - 4 * z, 128).value == pytest.approx(
            sfar_error_exponent(1.0, z, 128).value, rel=1e-12)


def test_exponent_decays_like_inverse_k_near_perfect_correlation():
    # K_s ~ c / K(1 - gap) once the elliptic integral is large
    from gmrfdet.core import elliptic_k_gap
    vals = [(elliptic_k_gap(g), sfar_error_exponent_gap(1.0, g, 512).value) for g in (1e-60, 1e-120)]
    (k1, v1), (k2, v2) = vals
    assert v1 * k1 == pytest.approx(v2 * k2, rel=0.05)


@pytest.mark.parametrize("grid", [7, 6, 10.5, 0, -8])
def test_grid_validation(grid):
    with pytest.raises(ValueError):
        sfar_error_exponent(1.0, 0.1, grid)


def test_error_estimate_is_halving_difference():
    res = sfar_error_exponent(1.0, 0.2499, 64)
    coarse = sfar_error_exponent(1.0, 0.2499, 32)
    assert res.error_estimate == pytest.approx(abs(res.value - coarse.value), rel=1e-12)


def test_monotone_in_zeta_at_high_snr():
    assert sfar_error_exponent(10.0, 0.0).value > sfar_error_exponent(10.0, 0.15).value


def test_second_mode_at_low_snr():
    s = 10 ** -0.5
    z, v = optimal_zeta(s, step=0.001)
    assert z > 0.2
    assert v > sfar_error_exponent(s, 0.0).value


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 100.0), st.floats(1.01, 3.0), st.floats(0.0, 0.249))
def test_monotone_in_snr(s, factor, zeta):
    assert sfar_error_exponent(s * factor, zeta, 32).value > sfar_error_exponent(s, zeta, 32).value


def test_log_snr_growth():
    d = sfar_error_exponent(1e4, 0.1).value - sfar_error_exponent(1e3, 0.1).value
    assert d / math.log(10) == pytest.approx(0.5, abs=0.025)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(0.0, 0.25))
def test_nonnegative(s, zeta):
    assert sfar_error_exponent(s, zeta, 16).value >= 0.0


def test_zeta_sweep_matches_pointwise():
    zs = [0.0, 0.1, 0.2]
    np.testing.assert_allclose(zeta_sweep(1.0, zs, 64), [sfar_error_exponent(1.0, z, 64).value for z in zs])


# finite lattice --------------------------------------------------------

def test_finite_rate_iid_equals_stein_for_every_n():
    spec = sfar_spectrum(sfar_params_for_snr(3.0, 0.0, 1.0))
    for n in (2, 3, 5, 16):
        assert finite_lattice_kl_rate(spec, 1.0, n).value == pytest.approx(stein_exponent(3.0), rel=1e-14)


def test_finite_rate_n2_hand_oracle():
    spec = sfar_spectrum(sfar_params_for_snr(1.0, 0.1, 1.0))
    assert finite_lattice_kl_rate(spec, 1.0, 2).value == pytest.approx(RATE_N2_SNR1_Z01, rel=1e-14)


def test_finite_rate_approaches_quadrature():
    spec = sfar_spectrum(sfar_params_for_snr(1.0, 0.1, 1.0))
    assert abs(finite_lattice_kl_rate(spec, 1.0, 256).value - KS_SNR1_Z01) <= 1e-3
    gaps = [abs(finite_lattice_kl_rate(spec, 1.0, n).value - KS_SNR1_Z01) for n in (2, 4, 8, 16)]
    assert gaps == sorted(gaps, reverse=True)


def test_finite_rate_gap_shrinks_with_visible_gap():
    # closer to perfect correlation the discretization gap stays above rounding
    spec = sfar_spectrum(sfar_params_for_snr(1.0, 0.249, 1.0))
    ref = error_exponent(spec, 1.0, 2048).value
    gaps = [abs(finite_lattice_kl_rate(spec, 1.0, n).value - ref) for n in (16, 32, 64, 128)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_finite_rate_degenerate_flag():
    rate = finite_lattice_kl_rate(sfar_spectrum(SfarParams(1.0, 0.25)), 1.0, 8)
    assert rate.degenerate and rate.value == math.inf


def test_finite_rate_rejects_small_side():
    with pytest.raises(ValueError):
        finite_lattice_kl_rate(sfar_spectrum(SfarParams(1.0, 0.1)), 1.0, 1)


def test_custom_spectrum_object():
    flat = SpectrumFn(lambda w1, w2: np.full(np.broadcast(w1, w2).shape, 1 / (4 * math.pi**2)), "car")
    assert error_exponent(flat, 1.0, 8).value == pytest.approx(stein_exponent(1.0), rel=1e-14)


def _mp_rate(points, midpoint, zeta="0.1", snr=1):
    """The node or midpoint rule for the SFAR exponent in 50-digit arithmetic."""
    mp = pytest.importorskip("mpmath").mp
    mp.dps = 50
    zeta = mp.mpf(zeta)
    scale = snr / ((2 / mp.pi) * mp.ellipk((4 * zeta) ** 2))
    off = mp.mpf(1) / 2 if midpoint else 0
    cosines = {}
    for i in range(points):
        c = mp.cos(2 * mp.pi * (i + off) / points)
        key = mp.nstr(c, 40)
        cosines[key] = (c, cosines.get(key, (c, 0))[1] + 1)
    vals = list(cosines.values())
    total = mp.mpf(0)
    for a, (ca, na) in enumerate(vals):
        for cb, nb in vals[a:]:
            q = scale / (1 - 2 * zeta * ca - 2 * zeta * cb)
            w = na * nb * (1 if (ca, na) == (cb, nb) else 2)
            total += w * (mp.log1p(q) - q / (1 + q)) / 2
    return total / points**2


def test_finite_rate_gap_decreases_in_extended_precision():
    # In double precision the gap is at rounding level from N = 16 on; at 50
    # digits the strict decrease is visible until it drops below 1e-45.
    ref = _mp_rate(512, midpoint=True)
    assert float(ref) == pytest.approx(KS_SNR1_Z01, abs=1e-16)
    gaps = [abs(_mp_rate(n, midpoint=False) - ref) for n in (8, 16, 32, 64)]
    assert gaps[0] > gaps[1] > gaps[2] > 0
    assert gaps[2] < 1e-28 and gaps[3] < 1e-45
    spec = sfar_spectrum(sfar_params_for_snr(1.0, 0.1, 1.0))
    for n in (8, 16, 32, 64):
        assert finite_lattice_kl_rate(spec, 1.0, n).value == pytest.approx(float(_mp_rate(n, False)), abs=1e-16)
