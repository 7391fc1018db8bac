import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from dielectric_energy.absorbing_energy import (
    RegularizationConfig,
    e_field_spectrum,
    energy_breakdown,
    final_expression_spectrum,
    green_norm_integral,
    h_field_spectrum,
    regularized_k_integral,
    thermal_total_energy,
    total_energy_spectrum,
    w1_spectrum,
    w2_spectrum,
)
from dielectric_energy.dispersion import DispersionModel, group_index
from dielectric_energy.errors import DivergenceError, ValidationError
from dielectric_energy.qed_spectrum import ThermalState, spectral_density_model

from . import oracles

LORENTZ = DispersionModel.lorentz(0.5, 1.0, 0.1)
VACUUM = DispersionModel.vacuum()
SWEEP = np.geomspace(0.05, 5.0, 200)
GAMMAS = [0.01, 0.1, 0.5]


# --- regularization config ------------------------------------------------------


def test_regularization_validation():
    with pytest.raises(ValidationError):
        RegularizationConfig(a=-1.0)
    with pytest.raises(ValidationError):
        RegularizationConfig(scheme="gaussian")
    with pytest.raises(ValidationError):
        RegularizationConfig(relative=0.02)
    reg = RegularizationConfig(a=1e-3)
    assert reg.cutoff_length(2.0) == 1e-3
    with pytest.raises(ValidationError, match="a \\* omega / c"):
        reg.cutoff_length(20.0)
    assert RegularizationConfig(relative=1e-4).cutoff_length(2.0) == pytest.approx(5e-5, rel=1e-15)


# --- k-space integrals ----------------------------------------------------------


def _green_norm_oracle(eps, w):
    """Direct quad in k over [0, 50] with breakpoints, plus the leading 4 pi/k^2 tail."""
    q2 = eps * w * w

    def f(k):
        return 4 * math.pi * k * k / abs(k * k - q2) ** 2

    k0 = math.sqrt(abs(q2))
    body, _ = quad(f, 0, 50, points=[k0], epsabs=0, epsrel=1e-12, limit=500)
    tail, _ = quad(f, 50, math.inf, epsabs=0, epsrel=1e-12)
    return body + tail


def test_green_norm_example():
    got = green_norm_integral(1 + 2.5j, 1.0)
    n_r = cmath.sqrt(1 + 2.5j).real
    assert got == pytest.approx(2 * math.pi**2 * n_r / 2.5, rel=1e-14)
    assert got == pytest.approx(10.729, abs=1e-3)
    assert got == pytest.approx(_green_norm_oracle(1 + 2.5j, 1.0), rel=1e-9)


def test_green_norm_scaling_and_divergence():
    eps = 2.0 + 0.3j
    assert green_norm_integral(eps, 3.0) == pytest.approx(green_norm_integral(eps, 1.0) / 3.0, rel=1e-14)
    small = [green_norm_integral(complex(1.0, x), 1.0) for x in (1e-3, 1e-4)]
    assert small[1] / small[0] == pytest.approx(10.0, rel=1e-6)
    with pytest.raises(DivergenceError):
        green_norm_integral(2.0 + 0j, 1.0)
    with pytest.raises(DivergenceError):
        regularized_k_integral(2.0 + 0j, 1.0)


def test_green_norm_closed_vs_quadrature_random():
    rng = np.random.default_rng(20240611)
    for _ in range(50):
        eps = complex(rng.uniform(-3, 6), 10 ** rng.uniform(-3, math.log10(5)))
        w = 10 ** rng.uniform(-1, 1)
        closed = green_norm_integral(eps, w)
        numeric = green_norm_integral(eps, w, method="quadrature")
        assert numeric == pytest.approx(closed, rel=1e-8), (eps, w)


def test_regularized_integral_example():
    reg = RegularizationConfig(a=1e-3)
    got = regularized_k_integral(1 + 2.5j, 1.0, reg)
    root = cmath.sqrt(1 + 2.5j)
    assert got.real == pytest.approx(2 * math.pi**2 * (1000 - root.imag), rel=1e-15)
    assert got.real == pytest.approx(2 * math.pi**2 * (1000 - 0.920), rel=1e-6)
    assert got.imag == pytest.approx(2 * math.pi**2 * root.real, rel=1e-15)
    half = regularized_k_integral(1 + 2.5j, 1.0, RegularizationConfig(a=5e-4))
    assert half.real - 2 * math.pi**2 * 2000 == pytest.approx(got.real - 2 * math.pi**2 * 1000, rel=1e-9)
    vac = regularized_k_integral(1 + 1e-12j, 1e-6, reg)
    assert vac.real == pytest.approx(2 * math.pi**2 / 1e-3, rel=1e-8)


@pytest.mark.parametrize("eps", [1 + 2.5j, 2.25 + 0.01j, -1.5 + 0.4j, 9.0 + 3.0j])
@pytest.mark.parametrize("w", [0.3, 1.0, 4.0, 9.5])
def test_regularized_integral_finite_a(eps, w):
    reg = RegularizationConfig(relative=1e-3)
    closed = regularized_k_integral(eps, w, reg)
    finite = regularized_k_integral(eps, w, reg, method="quadrature")
    a = reg.cutoff_length(w)
    # exact finite-a value from partial fractions
    q = cmath.sqrt(eps) * w
    exact = (2 * math.pi**2 / a + 2j * math.pi**2 * q) / (1 + a * a * q * q)
    assert abs(finite - exact) <= 1e-9 * abs(exact)
    assert abs(finite - closed) <= 2 * (a * w) * abs(closed)


# --- field spectra ---------------------------------------------------------------


def test_e_field_routes_agree():
    assert e_field_spectrum(LORENTZ, 1.0, route="k_integral") == pytest.approx(e_field_spectrum(LORENTZ, 1.0), rel=1e-10)
    w = np.array([0.3, 0.9, 1.1, 2.5])
    assert np.allclose(e_field_spectrum(LORENTZ, w, route="k_integral"), e_field_spectrum(LORENTZ, w), rtol=1e-10, atol=0)


def test_e_field_vacuum_limit_and_monotone():
    w = 0.4
    faint = DispersionModel.lorentz(1e-4, 1.0, 1e-3)
    assert e_field_spectrum(faint, w) == pytest.approx(2 * w**3 / math.pi, rel=1e-7)
    lo = e_field_spectrum(DispersionModel.lorentz(0.3, 1.0, 0.1), w)
    hi = e_field_spectrum(DispersionModel.lorentz(0.6, 1.0, 0.1), w)
    assert hi > lo  # n_R grows with omega_p below resonance


def test_h_field_example():
    reg = RegularizationConfig(a=1e-3)
    finite, cutoff = h_field_spectrum(LORENTZ, 1.0, reg)
    root = cmath.sqrt(1 + 2.5j)
    assert finite == pytest.approx((root**3).real / (4 * math.pi**2), rel=1e-12)
    assert finite == pytest.approx((root.real**3 - 3 * root.real * root.imag**2) / (4 * math.pi**2), rel=1e-12)
    assert cutoff == pytest.approx(2.5 / 1e-3 / (4 * math.pi**2), rel=1e-14)
    _, cutoff_half = h_field_spectrum(LORENTZ, 1.0, RegularizationConfig(a=5e-4))
    assert cutoff_half == pytest.approx(2 * cutoff, rel=1e-14)


def test_h_field_transparent_limit():
    w = 0.5
    model = DispersionModel.lorentz(0.5, 1.0, 1e-9)
    finite, _ = h_field_spectrum(model, w)
    n_r, _ = oracles.n_parts(0.5, 1.0, 0.0, w)
    assert finite == pytest.approx(w**3 * n_r**3 / (4 * math.pi**2), rel=1e-12)


# --- W1 and W2 --------------------------------------------------------------------


def test_w1_against_sympy():
    reg = RegularizationConfig(a=1e-3)
    w = 1.0
    static, rate = w1_spectrum(LORENTZ, w, reg)
    n_r, _ = oracles.n_parts(0.5, 1.0, 0.1, w)
    eps_r, eps_i = oracles.eps_parts(0.5, 1.0, 0.1, w)
    h_fin, h_cut = h_field_spectrum(LORENTZ, w, reg)
    expected = w**3 * n_r * oracles.d_omega_eps_r(0.5, 1.0, 0.1, w) / (4 * math.pi**2) + h_fin + h_cut
    assert static == pytest.approx(expected, rel=1e-12)
    assert rate == pytest.approx(w**4 * n_r * eps_i / (2 * math.pi**2), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(1e-3, 0.5))
def test_w1_rate_positive(w, g):
    assert w1_spectrum(DispersionModel.lorentz(0.5, 1.0, g), w).rate > 0


def test_w1_transparent_limit():
    w = 0.5
    model = DispersionModel.lorentz(0.5, 1.0, 1e-10)
    static, rate = w1_spectrum(model, w, RegularizationConfig(a=1e-3))
    n_r, _ = oracles.n_parts(0.5, 1.0, 0.0, w)
    lossless = w**3 * n_r * oracles.d_omega_eps_r(0.5, 1.0, 0.0, w) / (4 * math.pi**2) + w**3 * n_r**3 / (4 * math.pi**2)
    assert rate < 1e-9
    assert static == pytest.approx(lossless, rel=1e-7)


def test_w2_against_sympy():
    reg = RegularizationConfig(a=1e-3)
    w = 1.0
    cut, fin, rate = w2_spectrum(LORENTZ, w, reg)
    _, eps_i = oracles.eps_parts(0.5, 1.0, 0.1, w)
    assert fin == pytest.approx(w**2 * eps_i * oracles.im_d_w2_sqrt_eps(0.5, 1.0, 0.1, w) / (4 * math.pi**2), rel=1e-12)
    assert cut == pytest.approx(-(w**2) * eps_i / 1e-3 / (4 * math.pi**2), rel=1e-14)
    _, h_cut = h_field_spectrum(LORENTZ, w, reg)
    assert cut + h_cut == 0.0
    assert rate < 0


@pytest.mark.parametrize("g", GAMMAS)
def test_secular_rates_cancel(g):
    model = DispersionModel.lorentz(0.5, 1.0, g)
    b = energy_breakdown(model, SWEEP)
    assert np.all(np.abs(b.w1_rate + b.w2_rate) <= 1e-12 * np.abs(b.w1_rate))


def test_w2_rate_zero_without_absorption():
    assert w2_spectrum(VACUUM, 1.0).rate == 0.0
    assert w1_spectrum(VACUUM, 1.0).rate == 0.0


# --- assembled energy --------------------------------------------------------------


@pytest.mark.parametrize("g", GAMMAS)
def test_assembled_equals_final_expression(g):
    model = DispersionModel.lorentz(0.5, 1.0, g)
    a_form = total_energy_spectrum(model, SWEEP)
    b_form = final_expression_spectrum(model, SWEEP)
    assert np.all(np.abs(a_form - b_form) <= 1e-9 * np.abs(b_form))


def test_final_expression_against_sympy():
    w = 0.7
    n_r, _ = oracles.n_parts(0.5, 1.0, 0.1, w)
    expected = w**3 * n_r**2 * oracles.d_omega_n_r(0.5, 1.0, 0.1, w) / (2 * math.pi**2)
    assert final_expression_spectrum(LORENTZ, w) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("g", GAMMAS)
def test_cutoff_independence(g):
    model = DispersionModel.lorentz(0.5, 1.0, g)
    totals = [total_energy_spectrum(model, SWEEP, RegularizationConfig(relative=r)) for r in (1e-5, 1e-4, 1e-3, 5e-3)]
    for t in totals[1:]:
        assert np.all(np.abs(t - totals[0]) <= 1e-10 * np.abs(totals[0]))


@pytest.mark.parametrize("g", GAMMAS)
def test_cutoff_terms_scale_as_inverse_a(g):
    model = DispersionModel.lorentz(0.5, 1.0, g)
    b1 = energy_breakdown(model, SWEEP, RegularizationConfig(relative=1e-4))
    b2 = energy_breakdown(model, SWEEP, RegularizationConfig(relative=1e-5))
    assert np.allclose(b2.h_field_cutoff, 10 * b1.h_field_cutoff, rtol=1e-10, atol=0)
    assert np.allclose(b2.w2_static_cutoff, 10 * b1.w2_static_cutoff, rtol=1e-10, atol=0)
    assert np.all(np.abs(b1.cutoff_residual) <= 1e-10 * np.abs(b1.h_field_cutoff))


def test_vacuum_total():
    w = np.array([0.1, 1.0, 3.0])
    assert np.allclose(total_energy_spectrum(VACUUM, w), w**3 / (2 * math.pi**2), rtol=1e-14, atol=0)
    assert np.allclose(final_expression_spectrum(VACUUM, w), w**3 / (2 * math.pi**2), rtol=1e-14, atol=0)


def test_transparent_limit_matches_mode_sum():
    model = DispersionModel.lorentz(0.5, 1.0, 1e-9)
    lossless = DispersionModel.lorentz(0.5, 1.0, 0.0)
    for w in (0.2, 0.6, 1.5, 3.0):
        assert total_energy_spectrum(model, w) == pytest.approx(spectral_density_model(lossless, w, ThermalState(0.0)), rel=1e-7)


@pytest.mark.parametrize("g", GAMMAS)
def test_sign_follows_group_index(g):
    model = DispersionModel.lorentz(0.5, 1.0, g)
    total = total_energy_spectrum(model, SWEEP)
    assert np.array_equal(total > 0, group_index(model, SWEEP) > 0)


def test_band_energy_positive_through_anomalous_region():
    model = DispersionModel.lorentz(0.5, 1.0, 0.01)
    assert np.any(total_energy_spectrum(model, SWEEP) < 0)
    band = thermal_total_energy(model, (0.05, 5.0), 0.0)
    assert band.zero_point > 0


def test_nonmagnetic_and_passive_required():
    magnetic = DispersionModel.lorentz(0.5, 1.0, 0.1, mu_model=DispersionModel.lorentz(0.2, 2.0, 0.1))
    with pytest.raises(ValidationError, match="mu = 1"):
        total_energy_spectrum(magnetic, 1.0)
    gain = DispersionModel.tabulated([0.5, 1.0, 2.0], [2.0 - 0.1j, 2.0 - 0.1j, 2.0 - 0.1j])
    with pytest.raises(ValidationError, match="gain"):
        total_energy_spectrum(gain, 1.0)


# --- thermal band -------------------------------------------------------------------


def test_thermal_band_planck():
    T = 0.37
    band = thermal_total_energy(VACUUM, (0.0, 50 * T), T, include_zero_point=False)
    assert band.thermal == pytest.approx(math.pi**2 * T**4 / 15, rel=1e-6)
    assert band.zero_point == 0.0


def test_thermal_band_zero_temperature():
    band = thermal_total_energy(LORENTZ, (0.2, 3.0), 0.0)
    direct, _ = quad(lambda w: float(total_energy_spectrum(LORENTZ, w)), 0.2, 3.0, points=[0.9, 1.0, 1.1, 1.118], epsabs=0, epsrel=1e-11, limit=400)
    assert band.thermal == 0.0
    assert band.zero_point == pytest.approx(direct, rel=1e-9)


def test_thermal_band_matches_coth_weighting():
    T = 0.6
    band = thermal_total_energy(LORENTZ, (0.2, 3.0), T)
    coth, _ = quad(
        lambda w: float(total_energy_spectrum(LORENTZ, w)) / math.tanh(w / (2 * T)),
        0.2, 3.0, points=[0.9, 1.0, 1.1, 1.118], epsabs=0, epsrel=1e-11, limit=400,
    )
    assert band.total == pytest.approx(coth, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 50), st.floats(1e-2, 10))
def test_half_coth_identity(w, T):
    state = ThermalState(T)
    assert 0.5 / math.tanh(w / (2 * T)) == pytest.approx(0.5 + float(state.occupation(w)), rel=1e-14)


def test_thermal_band_validation():
    with pytest.raises(ValidationError, match="diverges"):
        thermal_total_energy(VACUUM, (0.0, math.inf), 1.0)
    with pytest.raises(ValidationError):
        thermal_total_energy(VACUUM, (2.0, 1.0), 1.0)
