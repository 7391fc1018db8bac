import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dielectric_energy.absorbing_energy import e_field_spectrum
from dielectric_energy.dispersion import DispersionModel
from dielectric_energy.errors import ResolutionWarning, ValidationError
from dielectric_energy.oscillator import DampedPropagator
from dielectric_energy.sed_sim import (
    OscillatorParams,
    commutator_envelope,
    commutator_quadrature,
    langevin_force_spectrum,
    oscillator_energy_analytic,
    reconstruct_field_spectrum,
    sample_noise_polarization,
    simulate_oscillator,
    zero_point_energy_closed_form,
)

# Fast ensemble: strong damping keeps the burn-in short.
FAST = OscillatorParams(1.0, 0.5, omega_c=12.0)
FAST_DT = 0.04


# --- force spectrum ------------------------------------------------------------


def test_force_spectrum_limits():
    p = OscillatorParams(1.0, 0.1, m=2.0, omega_c=50.0)
    w = np.array([0.5, 1.0, 10.0])
    assert np.allclose(langevin_force_spectrum(p, 0.0, w), 2.0 * 0.1 / math.pi * w, rtol=1e-15, atol=0)
    hot = langevin_force_spectrum(p, 1e4, 1e-3)
    assert hot == pytest.approx(2 * 2.0 * 0.1 * 1e4 / math.pi, rel=1e-6)
    assert langevin_force_spectrum(p, 3.0, 0.0) == pytest.approx(2 * 2.0 * 0.1 * 3.0 / math.pi, rel=1e-15)
    assert langevin_force_spectrum(p, 3.0, 50.0) == 0.0
    assert langevin_force_spectrum(p, 3.0, 60.0) == 0.0
    with pytest.raises(ValidationError):
        langevin_force_spectrum(p, 1.0, -1.0)


@settings(max_examples=80, deadline=None)
@given(st.floats(1e-3, 40.0), st.floats(1e-2, 20.0))
def test_force_spectrum_ratio_is_coth(w, T):
    p = OscillatorParams(1.0, 0.2, omega_c=50.0)
    ratio = langevin_force_spectrum(p, T, w) / langevin_force_spectrum(p, 0.0, w)
    assert ratio == pytest.approx(1.0 / math.tanh(w / (2 * T)), rel=1e-12)


# --- analytic energy --------------------------------------------------------------


def test_zero_point_quadrature_matches_closed_form():
    p = OscillatorParams(1.0, 0.1, omega_c=1e3)
    assert oscillator_energy_analytic(p, 0.0).zero_point == pytest.approx(zero_point_energy_closed_form(p), rel=1e-6)


def test_energy_against_mpmath():
    p = OscillatorParams(1.0, 0.3, omega_c=20.0)
    T = 0.8
    mp.mp.dps = 25

    def weight(w):
        return w * (1 + w * w) / ((1 - w * w) ** 2 + (0.3 * w) ** 2)

    zp = 3 * 0.3 / (2 * mp.pi) * mp.quad(weight, [0, 0.7, 1, 1.3, 20])
    th = 3 * 0.3 / mp.pi * mp.quad(lambda w: weight(w) / mp.expm1(w / T), [0, 0.7, 1, 1.3, 20])
    got = oscillator_energy_analytic(p, T)
    assert got.zero_point == pytest.approx(float(zp), rel=1e-9)
    assert got.thermal == pytest.approx(float(th), rel=1e-9)


@pytest.mark.parametrize("T", [0.0, 1.0])
def test_weak_coupling_limit(T):
    p = OscillatorParams(1.0, 1e-3, omega_c=50.0)
    n0 = 0.0 if T == 0 else 1 / math.expm1(1 / T)
    assert oscillator_energy_analytic(p, T).total == pytest.approx(1.5 + 3 * n0, rel=5e-3)


def test_undamped_energy_and_validation():
    p = OscillatorParams(2.0, 0.0, omega_c=50.0)
    e = oscillator_energy_analytic(p, 1.0)
    assert e.zero_point == 3.0
    assert e.thermal == pytest.approx(6.0 / math.expm1(2.0), rel=1e-15)
    with pytest.raises(ValidationError):
        oscillator_energy_analytic(OscillatorParams(1.0, 0.1), 0.0)


# --- commutator ---------------------------------------------------------------------


@pytest.mark.parametrize("g", [0.01, 0.05, 0.2, 0.5, 1.5])
@pytest.mark.parametrize("tau", [0.0, 0.3, 1.0, 5.0, 20.0])
def test_commutator_two_routes(g, tau):
    p = OscillatorParams(1.0, g)
    assert commutator_quadrature(p, tau) == pytest.approx(commutator_envelope(p, tau), abs=1e-9)


def test_commutator_limits():
    p = OscillatorParams(1.0, 0.1)
    assert commutator_envelope(p, 0.0) == 1.0
    assert commutator_envelope(p, -3.0) == commutator_envelope(p, 3.0)
    for tau in (0.5, 2.0, 7.0):
        assert commutator_envelope(OscillatorParams(1.3, 0.0), tau) == pytest.approx(math.cos(1.3 * tau), rel=1e-15)
    with pytest.raises(ValidationError):
        commutator_envelope(p, 600.0)
    with pytest.raises(ValidationError):
        commutator_quadrature(OscillatorParams(1.0, 0.0), 1.0)


# --- propagator ---------------------------------------------------------------------


def test_propagate_matches_explicit_recurrence():
    prop = DampedPropagator(1.0, 0.1, 0.01)
    rng = np.random.default_rng(0)
    inc = rng.standard_normal((2, 3, 4000))
    x, v = prop.propagate(inc[0], inc[1], 0.3, -0.2)
    y = np.zeros((2, 3))
    y[0], y[1] = 0.3, -0.2
    ref = [y.copy()]
    for n in range(4000):
        y = prop.matrix @ y + inc[:, :, n]
        ref.append(y.copy())
    ref = np.array(ref)
    scale = np.abs(ref).max()
    assert np.max(np.abs(x - ref[:, 0].T)) < 1e-11 * scale
    assert np.max(np.abs(v - ref[:, 1].T)) < 1e-11 * scale


@pytest.mark.parametrize("w", [0.7, 1.0, 10.0, 40.0])
def test_simpson_duhamel_steady_state(w):
    dt, g = 0.009, 0.2
    prop = DampedPropagator(1.0, g, dt)
    wts = prop.duhamel_weights([0, dt / 2, dt], [dt / 6, 4 * dt / 6, dt / 6])
    n = 30000
    t = np.arange(2 * n + 1) * dt / 2
    f = np.cos(w * t)
    x, _ = prop.propagate(
        wts[0, 0] * f[0:-1:2] + wts[1, 0] * f[1::2] + wts[2, 0] * f[2::2],
        wts[0, 1] * f[0:-1:2] + wts[1, 1] * f[1::2] + wts[2, 1] * f[2::2],
    )
    chi = 1 / (1 - w * w + 1j * g * w)
    exact = (chi * np.exp(1j * w * t[::2])).real
    tail = slice(2 * n // 3, None)
    assert np.max(np.abs(x[tail] - exact[tail])) < 1e-4 * abs(chi)


# --- Langevin ensemble ------------------------------------------------------------------


def test_zero_noise_gives_zero_trajectory():
    ens = simulate_oscillator(OscillatorParams(1.0, 0.0, omega_c=12.0), 0.0, FAST_DT, 200, 100, seed=1, noise_scale=0.0, record_every=10)
    assert np.all(ens.x == 0) and np.all(ens.v == 0)
    assert ens.energy().value == 0.0


def test_seed_determinism_and_batch_independence():
    a = simulate_oscillator(FAST, 0.5, FAST_DT, 100, 100, seed=42, batch_size=16)
    b = simulate_oscillator(FAST, 0.5, FAST_DT, 100, 100, seed=42, batch_size=16)
    c = simulate_oscillator(FAST, 0.5, FAST_DT, 100, 100, seed=42, batch_size=100)
    d = simulate_oscillator(FAST, 0.5, FAST_DT, 100, 100, seed=43, batch_size=16)
    assert np.array_equal(a.kinetic, b.kinetic) and np.array_equal(a.x, b.x)
    assert a.energy() == b.energy()
    assert np.allclose(a.kinetic, c.kinetic, rtol=1e-12, atol=0)
    assert not np.allclose(a.kinetic, d.kinetic)


def test_equipartition_classical_regime():
    p = OscillatorParams(1.0, 0.5, omega_c=20.0)
    T = 2000.0
    ens = simulate_oscillator(p, T, 0.02, 400, 400, seed=5)
    for comp in range(3):
        for est in (ens.kinetic_energy(comp), ens.potential_energy(comp)):
            assert est.sigmas(T / 2) < 3.0


@pytest.mark.parametrize("T", [0.0, 1.0])
def test_energy_matches_quadrature(T):
    ens = simulate_oscillator(FAST, T, FAST_DT, 400, 1000, seed=7)
    assert ens.energy().sigmas(oscillator_energy_analytic(FAST, T).total) < 3.0


def test_noise_scale_scales_energy():
    ens = simulate_oscillator(FAST, 0.0, FAST_DT, 400, 500, seed=8, noise_scale=0.25)
    target = oscillator_energy_analytic(FAST, 0.0, noise_scale=0.25).total
    assert ens.energy().sigmas(target) < 3.0


@pytest.mark.parametrize("T", [0.0, 1.0])
def test_dissipated_equals_injected_power(T):
    ens = simulate_oscillator(FAST, T, FAST_DT, 400, 1000, seed=9)
    assert ens.power_balance().sigmas(0.0) < 3.0
    assert ens.dissipated_power().value > 0


def test_stationarity_of_autocorrelation():
    ens = simulate_oscillator(FAST, 0.5, FAST_DT, 1000, 2000, seed=10, record_every=5)
    lag = 10  # 2 time units
    first = ens.autocorrelation(0, lag)
    late = ens.autocorrelation(150, lag)
    assert abs(first.value - late.value) < 3 * math.hypot(first.std_error, late.std_error)


def test_standard_error_scales_as_inverse_sqrt_n():
    ns = np.array([100, 1000, 10000])
    se = [simulate_oscillator(FAST, 0.0, FAST_DT, 50, int(n), seed=12).energy().std_error for n in ns]
    slope = np.polyfit(np.log(ns), np.log(se), 1)[0]
    assert slope == pytest.approx(-0.5, rel=0.2)


def test_simulation_validation():
    p = OscillatorParams(1.0, 0.1, omega_c=50.0)
    with pytest.raises(ValidationError, match="omega_c"):
        simulate_oscillator(p, 0.0, 0.02, 10, 100, seed=1)
    with pytest.raises(ValidationError, match="n_traj"):
        simulate_oscillator(p, 0.0, 0.009, 10, 99, seed=1)
    with pytest.raises(ValidationError, match="undamped"):
        simulate_oscillator(OscillatorParams(1.0, 0.0, omega_c=50.0), 0.0, 0.009, 10, 100, seed=1)
    with pytest.raises(ValidationError, match="cutoff"):
        simulate_oscillator(OscillatorParams(1.0, 0.1), 0.0, 0.009, 10, 100, seed=1)
    ens = simulate_oscillator(FAST, 0.0, FAST_DT, 10, 100, seed=1)
    with pytest.raises(ValidationError, match="record_every"):
        ens.autocorrelation(0, 1)


# --- noise polarization ------------------------------------------------------------------

BROAD = DispersionModel.lorentz(0.5, 1.0, 0.5)
SMALL_K = (np.arange(6) + 0.5) * 0.4
SMALL_W = np.array([0.8, 1.0, 1.2])


def test_cell_variance_matches_target():
    n = 4000
    ens = sample_noise_polarization(BROAD, SMALL_K, SMALL_W, 0.3, n, seed=4)
    amps = np.array([r.amplitudes() for r in ens])
    sample_var = np.mean(np.abs(amps) ** 2, axis=0)
    target = ens.variance[:, :, None]
    assert np.all(np.abs(sample_var / target - 1) < 5 / math.sqrt(n))
    # Continuum normalization: eps_I (N + 1/2) / (2 pi^3 dw d^3k)
    eps_i = 0.25 * 0.5 * 1.0 / ((1.0 - 1.0) ** 2 + 0.25)
    cell = 0.2 * 4 * math.pi * SMALL_K[2] ** 2 * 0.4
    n1 = 1 / math.expm1(1.0 / 0.3)
    assert ens.variance[1, 2] == pytest.approx(eps_i * (n1 + 0.5) / (2 * math.pi**3) / cell, rel=1e-14)


def test_cells_are_independent():
    n = 4000
    ens = sample_noise_polarization(BROAD, SMALL_K, SMALL_W, 0.0, n, seed=5)
    amps = np.array([r.amplitudes() for r in ens])
    for a, b in [((0, 1, 0), (1, 1, 0)), ((0, 1, 0), (0, 2, 0)), ((2, 3, 0), (2, 3, 1))]:
        x, y = amps[(slice(None),) + a], amps[(slice(None),) + b]
        prod = np.conj(x) * y
        se = np.sqrt(np.mean(np.abs(x) ** 2) * np.mean(np.abs(y) ** 2) / n)
        assert abs(prod.mean()) < 3 * math.sqrt(2) * se
        assert abs(np.mean(x * y)) < 3 * math.sqrt(2) * se


def test_temperature_variance_ratio_is_coth():
    cold = sample_noise_polarization(BROAD, SMALL_K, SMALL_W, 0.0, 1, seed=1)
    hot = sample_noise_polarization(BROAD, SMALL_K, SMALL_W, 0.7, 1, seed=1)
    ratio = hot.variance / cold.variance
    assert np.allclose(ratio, (1 / np.tanh(SMALL_W / 1.4))[:, None], rtol=1e-13, atol=0)


def test_realizations_deterministic():
    a = sample_noise_polarization(BROAD, SMALL_K, SMALL_W, 0.0, 3, seed=9)
    b = sample_noise_polarization(BROAD, SMALL_K, SMALL_W, 0.0, 3, seed=9)
    assert np.array_equal(a[2].amplitudes(), b[2].amplitudes())
    assert not np.array_equal(a[1].amplitudes(), a[2].amplitudes())


def test_grid_validation():
    with pytest.raises(ValidationError, match="uniform"):
        sample_noise_polarization(BROAD, [0.1, 0.2, 0.4], SMALL_W, 0.0, 1, seed=1)
    with pytest.raises(ValidationError, match="spacing"):
        sample_noise_polarization(BROAD, SMALL_K, [1.0], 0.0, 1, seed=1)
    with pytest.raises(ValidationError, match="increasing"):
        sample_noise_polarization(BROAD, SMALL_K, [1.0, 1.0], 0.0, 1, seed=1)
    with pytest.raises(ValidationError, match="two shells"):
        sample_noise_polarization(BROAD, [1.0], SMALL_W, 0.0, 1, seed=1)
    with pytest.raises(ValidationError, match="eps_I"):
        sample_noise_polarization(DispersionModel.vacuum(), SMALL_K, SMALL_W, 0.0, 1, seed=1)


def test_zero_noise_gives_zero_spectrum():
    ens = sample_noise_polarization(BROAD, SMALL_K, SMALL_W, 0.0, 5, seed=1, noise_scale=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        est = reconstruct_field_spectrum(ens)
    assert np.all(est.value == 0)


def test_reconstruction_wide_shell_coarse_grid():
    model = DispersionModel.lorentz(0.5, 1.0, 0.1)  # eps(1) = 1 + 2.5i
    k = (np.arange(4000) + 0.5) * 0.05
    ens = sample_noise_polarization(model, k, [1.0], 0.0, 2000, seed=6, d_omega=0.01)
    est = reconstruct_field_spectrum(ens)
    ref = e_field_spectrum(model, 1.0)
    assert est.value[0] == pytest.approx(ref, rel=0.02)
    assert abs(est.value[0] - ref) < 3 * est.std_error[0] + abs(est.grid_bias[0]) * ref


def test_reconstruction_thermal_factor():
    model = DispersionModel.lorentz(0.5, 1.0, 0.1)
    k = (np.arange(4000) + 0.5) * 0.05
    T = 0.6
    ens = sample_noise_polarization(model, k, [1.0], T, 2000, seed=6, d_omega=0.01)
    est = reconstruct_field_spectrum(ens)
    ref = e_field_spectrum(model, 1.0) / math.tanh(1.0 / (2 * T))
    assert est.value[0] == pytest.approx(ref, rel=0.02)


def test_coarse_grid_warns():
    k = (np.arange(40) + 0.5) * 0.5
    ens = sample_noise_polarization(BROAD, k, [0.5], 0.0, 10, seed=1, d_omega=0.01)
    with pytest.warns(ResolutionWarning, match="shell"):
        est = reconstruct_field_spectrum(ens)
    assert abs(est.grid_bias[0]) > 0.01


def test_reconstruction_model_mismatch():
    ens = sample_noise_polarization(BROAD, SMALL_K, SMALL_W, 0.0, 2, seed=1)
    with pytest.raises(ValidationError, match="model"):
        reconstruct_field_spectrum(ens, DispersionModel.lorentz(0.5, 1.0, 0.1))
