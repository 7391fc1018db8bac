"""Stochastic checks: Langevin oscillator ensembles and noise-polarization fields.

Two classical-ensemble realizations of the fluctuation-dissipation theorem:

* A damped oscillator driven by a coloured Langevin force whose one-sided
  power spectrum is (m gamma / pi) w coth(w / 2T) below a hard cutoff w_c.
  The ensemble energy converges to the quadrature of the reservoir-coupled
  oscillator energy; dissipated and injected power balance.
* Complex Gaussian noise-polarization amplitudes on a (w, k) grid with the
  symmetric (Rytov) correlator. Pushing them through the transfer function
  (w^2/c^2) / (k^2 - eps w^2/c^2) reproduces the electric field spectrum of
  an absorbing medium.

Each trajectory or realization draws from its own child of a root
``numpy.random.SeedSequence``, so results do not depend on batching.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.fft import irfft, next_fast_len

from ._numerics import checked_quad
from .absorbing_energy import N_POLARIZATIONS
from .constants import C, HBAR, K_B
from .dispersion import DispersionModel, eval_permittivity
from .errors import ResolutionWarning, ValidationError
from .oscillator import DampedPropagator, OscillatorParams
from .qed_spectrum import ThermalState

__all__ = [
    "OscillatorParams",
    "Estimate",
    "OscillatorEnergy",
    "TrajectoryEnsemble",
    "NoiseRealization",
    "NoiseEnsemble",
    "FieldSpectrumEstimate",
    "langevin_force_spectrum",
    "simulate_oscillator",
    "oscillator_energy_analytic",
    "zero_point_energy_closed_form",
    "commutator_envelope",
    "commutator_quadrature",
    "sample_noise_polarization",
    "reconstruct_field_spectrum",
]

N_COMPONENTS = 3
# The time step must resolve the noise bandwidth: dt * omega_c below this.
MAX_DT_OMEGA_C = 0.5
MIN_TRAJECTORIES = 100
BURN_IN_DAMPING_TIMES = 10.0
# Largest |tau| gamma accepted by the commutator check.
MAX_TAU_GAMMA = 50.0


def _state(T) -> ThermalState:
    return T if isinstance(T, ThermalState) else ThermalState(T)


def _omega_coth(omega: np.ndarray, state: ThermalState) -> np.ndarray:
    """w coth(w / 2T) = w (1 + 2N), with the w -> 0 limit 2T."""
    w = np.asarray(omega, dtype=float)
    if state.T == 0:
        return w.copy()
    x = HBAR * w / (K_B * state.T)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        w_n = np.where(x > 0, w / np.expm1(np.where(x > 0, x, 1.0)), K_B * state.T / HBAR)
    return w + 2.0 * w_n


def langevin_force_spectrum(params: OscillatorParams, T, omega):
    """One-sided PSD of one Cartesian component of the Langevin force.

    S_F(w) = (m gamma / pi) w coth(w / 2T) for 0 <= w < w_c and zero beyond,
    normalized so that <F^2> = int_0^inf S_F dw. The zero-point 1/2 is
    included; at T = 0 the spectrum is (m gamma / pi) w.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValidationError("omega must be finite and non-negative")
    state = _state(T)
    s = params.m * params.gamma / math.pi * HBAR * _omega_coth(w, state)
    s = np.where(w < params.omega_c, s, 0.0)
    return s[()] if np.ndim(omega) == 0 else s


# --- analytic oscillator results -------------------------------------------------


@dataclass(frozen=True)
class OscillatorEnergy:
    """Mean energy of the three-dimensional oscillator, split by origin."""

    zero_point: float
    thermal: float

    @property
    def total(self) -> float:
        return self.zero_point + self.thermal


def _energy_weight(params: OscillatorParams, w):
    """w (w0^2 + w^2) / |w0^2 - w^2 - i gamma w|^2."""
    w0sq = params.omega_0**2
    return w * (w0sq + w * w) / ((w0sq - w * w) ** 2 + (params.gamma * w) ** 2)


def _peak_points(params: OscillatorParams, hi: float) -> list[float]:
    pts = [params.omega_0, params.omega_0 - params.gamma, params.omega_0 + params.gamma]
    pts += [params.omega_0 - 5 * params.gamma, params.omega_0 + 5 * params.gamma]
    return [p for p in pts if 0 < p < hi]


def oscillator_energy_analytic(
    params: OscillatorParams, T, rtol: float = 1e-10, noise_scale: float = 1.0
) -> OscillatorEnergy:
    """<m v^2/2 + m w0^2 x^2/2> summed over three components, by quadrature.

    zero_point = (3 gamma / 2 pi) int_0^wc w (w0^2+w^2) / |D|^2 dw,
    thermal    = (3 gamma / pi)   int_0^wc w (w0^2+w^2) N(w) / |D|^2 dw,
    with D = w0^2 - w^2 - i gamma w. ``noise_scale`` scales both, matching
    a simulation run with the force spectrum scaled by the same factor.
    """
    if not math.isfinite(params.omega_c):
        raise ValidationError("oscillator energy needs a finite cutoff omega_c")
    state = _state(T)
    wc = params.omega_c
    pref = N_COMPONENTS * HBAR * params.gamma / math.pi
    if params.gamma == 0:
        # Weak-coupling limit: the resonance weight becomes a delta function.
        n0 = float(state.occupation(params.omega_0))
        w0 = HBAR * params.omega_0
        return OscillatorEnergy(noise_scale * 1.5 * w0, noise_scale * 3.0 * w0 * n0)
    points = _peak_points(params, wc)
    zp, _ = checked_quad(lambda w: 0.5 * _energy_weight(params, w), 0.0, wc, rtol=rtol, points=points, limit=2000)
    thermal = 0.0
    if state.T > 0:
        top = min(wc, max(80.0 * state.T, 2.0 * params.omega_0 + 10.0 * params.gamma))
        tpts = points + [state.T * x for x in (1.0, 5.0, 20.0)]
        thermal, _ = checked_quad(
            lambda w: _energy_weight(params, w) * float(state.occupation(w)), 0.0, top, rtol=rtol, points=tpts, limit=2000
        )
    return OscillatorEnergy(noise_scale * pref * zp, noise_scale * pref * thermal)


def zero_point_energy_closed_form(params: OscillatorParams) -> float:
    """(3/pi) w1 arccos(gamma / 2 w0) + (3 gamma / 2 pi) ln(w_c / w0).

    Large-cutoff form of the zero-point energy, accurate up to terms of
    order gamma w0^2 / w_c^2.
    """
    if not math.isfinite(params.omega_c):
        raise ValidationError("zero-point energy diverges without a finite cutoff")
    w0, g = params.omega_0, params.gamma
    return HBAR * (
        3.0 / math.pi * params.omega_1 * math.acos(g / (2.0 * w0)) + 3.0 * g / (2.0 * math.pi) * math.log(params.omega_c / w0)
    )


def _check_tau(params: OscillatorParams, tau: float) -> float:
    tau = float(tau)
    if not math.isfinite(tau):
        raise ValidationError("tau must be finite")
    if params.gamma > 0 and abs(tau) * params.gamma >= MAX_TAU_GAMMA:
        raise ValidationError(f"|tau| must stay below {MAX_TAU_GAMMA:g}/gamma")
    return tau


def commutator_envelope(params: OscillatorParams, tau: float) -> float:
    """[x(t), p(t + tau)] / (i hbar) for the reservoir-damped oscillator.

    [cos w1 tau - (gamma / 2 w1) sin w1 |tau|] exp(-gamma |tau| / 2); equal
    to 1 at tau = 0, which is the preserved canonical commutator.
    """
    tau = abs(_check_tau(params, tau))
    w1, g = params.omega_1, params.gamma
    return (math.cos(w1 * tau) - g / (2.0 * w1) * math.sin(w1 * tau)) * math.exp(-0.5 * g * tau)


def commutator_quadrature(params: OscillatorParams, tau: float, atol: float = 1e-10) -> float:
    """(2 gamma / pi) int_0^inf w^2 cos(w tau) / |w0^2 - w^2 - i gamma w|^2 dw.

    Up to a few resonance widths past w0 the integrand f(w) cos(w tau) is
    integrated by plain Gauss-Kronrod on panels of about two oscillation
    periods; the tail uses QUADPACK's Fourier-integral rule with weight
    cos(w tau). (The finite-interval cosine rule was not used: it returned
    a wrong value with a small error estimate on some panels.)
    """
    tau = abs(_check_tau(params, tau))
    g = params.gamma
    if g == 0:
        raise ValidationError("quadrature form needs gamma > 0")
    w0sq = params.omega_0**2

    def f(w):
        return w * w / ((w0sq - w * w) ** 2 + (g * w) ** 2)

    split = 4.0 * params.omega_0 + 20.0 * g
    points = _peak_points(params, split)
    if tau == 0:
        body, _ = checked_quad(f, 0.0, split, rtol=1e-13, atol=atol, points=points, limit=2000)
        tail, _ = checked_quad(f, split, math.inf, rtol=1e-13, atol=atol)
    else:
        n_panels = max(1, math.ceil(split * tau / (4.0 * math.pi)))
        points = points + list(np.linspace(0.0, split, n_panels + 1)[1:-1])
        body, _ = checked_quad(lambda w: f(w) * math.cos(w * tau), 0.0, split, rtol=1e-13, atol=atol, points=points, limit=2000)
        tail, _ = checked_quad(f, split, math.inf, rtol=0.0, atol=atol, weight="cos", wvar=tau, limlst=200)
    return 2.0 * g / math.pi * (body + tail)


# --- Langevin ensemble -------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    """Ensemble mean with its standard error over ``n`` independent samples."""

    value: float
    std_error: float
    n: int

    def sigmas(self, target: float) -> float:
        """Distance from ``target`` in standard errors."""
        if self.std_error == 0:
            return 0.0 if self.value == target else math.inf
        return abs(self.value - target) / self.std_error


def _estimate(samples: np.ndarray) -> Estimate:
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    std = float(np.std(samples, ddof=1)) / math.sqrt(n) if n > 1 else math.inf
    return Estimate(float(np.mean(samples)), std, n)


@dataclass
class TrajectoryEnsemble:
    """Outcome of :func:`simulate_oscillator`.

    Per-trajectory time averages over the post-burn-in window are kept in
    arrays of shape ``(n_traj, 3)`` (per component) or ``(n_traj,)``.
    ``x``/``v`` hold recorded states with shape ``(n_traj, 3, n_records)``
    at ``record_times``; with no recording they hold the final state only.
    """

    params: OscillatorParams
    T: float
    dt: float
    n_steps: int
    n_burn: int
    seed: int
    noise_scale: float
    kinetic: np.ndarray
    potential: np.ndarray
    dissipated: np.ndarray
    injected: np.ndarray
    record_times: np.ndarray
    x: np.ndarray
    v: np.ndarray

    @property
    def n_traj(self) -> int:
        return self.kinetic.shape[0]

    def energy(self) -> Estimate:
        """Total oscillator energy, all three components."""
        return _estimate(self.kinetic.sum(axis=1) + self.potential.sum(axis=1))

    def kinetic_energy(self, component: int | None = None) -> Estimate:
        k = self.kinetic.sum(axis=1) if component is None else self.kinetic[:, component]
        return _estimate(k)

    def potential_energy(self, component: int | None = None) -> Estimate:
        p = self.potential.sum(axis=1) if component is None else self.potential[:, component]
        return _estimate(p)

    def dissipated_power(self) -> Estimate:
        """gamma m <v^2>: power lost to the damping."""
        return _estimate(self.dissipated)

    def injected_power(self) -> Estimate:
        """<F . v>: power delivered by the Langevin force."""
        return _estimate(self.injected)

    def power_balance(self) -> Estimate:
        """Paired difference injected - dissipated per trajectory."""
        return _estimate(self.injected - self.dissipated)

    def autocorrelation(self, start: int, lag: int) -> Estimate:
        """<x(t) x(t + tau)> per component from recorded samples.

        ``start`` and ``lag`` index ``record_times``; the three components
        of each trajectory are averaged before the ensemble statistics.
        """
        if self.x.shape[-1] < 2:
            raise ValidationError("trajectory was not recorded; pass record_every")
        if not (0 <= start and start + lag < self.x.shape[-1]):
            raise ValidationError("autocorrelation window outside the recorded range")
        prod = self.x[:, :, start] * self.x[:, :, start + lag]
        return _estimate(prod.mean(axis=1))


def _synthesis_length(n_half_samples: int) -> int:
    n = next_fast_len(2 * n_half_samples, real=True)
    return n + (n % 2)


def simulate_oscillator(
    params: OscillatorParams,
    T,
    dt: float,
    n_steps: int,
    n_traj: int,
    seed: int,
    *,
    noise_scale: float = 1.0,
    batch_size: int = 64,
    record_every: int | None = None,
    burn_in: float | None = None,
) -> TrajectoryEnsemble:
    """Integrate x'' + gamma x' + w0^2 x = F_L / m for an ensemble.

    The force on each Cartesian component is a stationary Gaussian process
    synthesized in the frequency domain (random-phase sum over bins of
    width dw, one irfft per component) on a half-step grid, with record
    length twice the run so its period never fits inside the run. Steps use
    the exact damped propagator with Simpson quadrature of the Duhamel
    integral. The first ``burn_in`` time (default 10/gamma) is discarded.
    """
    state = _state(T)
    dt = float(dt)
    if not (dt > 0 and math.isfinite(dt)):
        raise ValidationError("dt must be positive")
    if not math.isfinite(params.omega_c):
        raise ValidationError("the Langevin force needs a finite cutoff omega_c")
    if dt * params.omega_c >= MAX_DT_OMEGA_C:
        raise ValidationError(f"dt * omega_c must stay below {MAX_DT_OMEGA_C} to resolve the noise bandwidth")
    if int(n_steps) < 1:
        raise ValidationError("n_steps must be at least 1")
    if int(n_traj) < MIN_TRAJECTORIES:
        raise ValidationError(f"n_traj must be at least {MIN_TRAJECTORIES}")
    if not (noise_scale >= 0 and math.isfinite(noise_scale)):
        raise ValidationError("noise_scale must be non-negative")
    if params.gamma == 0 and noise_scale > 0:
        raise ValidationError("undamped oscillator (gamma = 0) has no stationary state under noise")
    if batch_size < 1:
        raise ValidationError("batch_size must be positive")
    n_steps, n_traj = int(n_steps), int(n_traj)

    if burn_in is None:
        burn_in = BURN_IN_DAMPING_TIMES / params.gamma if params.gamma > 0 else 0.0
    n_burn = int(math.ceil(burn_in / dt))
    n_total = n_burn + n_steps
    n_half = 2 * n_total + 1
    n_fft = _synthesis_length(n_half)
    d_omega = 2.0 * math.pi / (n_fft * 0.5 * dt)
    bins = np.arange(n_fft // 2 + 1) * d_omega
    psd = noise_scale * langevin_force_spectrum(params, state, bins)
    # The DC bin is dropped: a zero-mean force has no static component.
    psd[0] = 0.0
    amplitude = 0.5 * n_fft * np.sqrt(psd * d_omega)
    # Bins at and above the cutoff carry no power; only the rest are drawn.
    active = int(np.searchsorted(bins, params.omega_c))

    prop = DampedPropagator(params.omega_0, params.gamma, dt)
    simpson = prop.duhamel_weights([0.0, 0.5 * dt, dt], [dt / 6.0, 4.0 * dt / 6.0, dt / 6.0]) / params.m

    if record_every is None:
        rec_idx = np.array([n_total])
    else:
        if int(record_every) < 1:
            raise ValidationError("record_every must be positive")
        rec_idx = np.arange(n_burn, n_total + 1, int(record_every))
    children = np.random.SeedSequence(seed).spawn(n_traj)

    kinetic = np.empty((n_traj, N_COMPONENTS))
    potential = np.empty((n_traj, N_COMPONENTS))
    dissipated = np.empty(n_traj)
    injected = np.empty(n_traj)
    xs = np.empty((n_traj, N_COMPONENTS, rec_idx.size))
    vs = np.empty_like(xs)

    for lo in range(0, n_traj, batch_size):
        hi = min(lo + batch_size, n_traj)
        force = np.empty((hi - lo, N_COMPONENTS, n_half))
        spectrum = np.zeros((N_COMPONENTS, bins.size), dtype=complex)
        for j, child in enumerate(children[lo:hi]):
            rng = np.random.Generator(np.random.PCG64(child))
            a, b = rng.standard_normal((2, N_COMPONENTS, active))
            spectrum.real[:, :active] = amplitude[:active] * a
            spectrum.imag[:, :active] = -amplitude[:active] * b
            force[j] = irfft(spectrum, n_fft, axis=-1)[:, :n_half]
        f0, f1, f2 = force[..., 0:-1:2], force[..., 1::2], force[..., 2::2]
        x, v = prop.propagate(
            simpson[0, 0] * f0 + simpson[1, 0] * f1 + simpson[2, 0] * f2,
            simpson[0, 1] * f0 + simpson[1, 1] * f1 + simpson[2, 1] * f2,
        )
        window = slice(n_burn + 1, n_total + 1)
        xw, vw = x[..., window], v[..., window]
        v2 = np.einsum("bcn,bcn->bc", vw, vw) / n_steps
        kinetic[lo:hi] = 0.5 * params.m * v2
        potential[lo:hi] = 0.5 * params.m * params.omega_0**2 * np.einsum("bcn,bcn->bc", xw, xw) / n_steps
        dissipated[lo:hi] = params.gamma * params.m * v2.sum(axis=1)
        injected[lo:hi] = np.einsum("bcn,bcn->b", force[..., 2 * n_burn + 2 :: 2], vw) / n_steps
        xs[lo:hi] = x[:, :, rec_idx]
        vs[lo:hi] = v[:, :, rec_idx]

    return TrajectoryEnsemble(
        params=params,
        T=state.T,
        dt=dt,
        n_steps=n_steps,
        n_burn=n_burn,
        seed=seed,
        noise_scale=float(noise_scale),
        kinetic=kinetic,
        potential=potential,
        dissipated=dissipated,
        injected=injected,
        record_times=rec_idx * dt,
        x=xs,
        v=vs,
    )


# --- noise polarization and field reconstruction --------------------------------------


def _uniform_grid(values, name: str, spacing: float | None = None) -> tuple[np.ndarray, float]:
    g = np.asarray(values, dtype=float).ravel()
    if g.size == 0 or not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise ValidationError(f"{name} grid must be non-empty, finite and positive")
    if g.size == 1:
        if spacing is None or not spacing > 0:
            raise ValidationError(f"a single-point {name} grid needs an explicit positive spacing")
        return g, float(spacing)
    steps = np.diff(g)
    if np.any(steps <= 0):
        raise ValidationError(f"{name} grid must be strictly increasing")
    step = float(steps.mean())
    if np.max(np.abs(steps - step)) > 1e-9 * step:
        raise ValidationError(f"{name} grid must be uniform (cells of equal width)")
    if spacing is not None and abs(spacing - step) > 1e-9 * step:
        raise ValidationError(f"declared {name} spacing disagrees with the grid")
    return g, step


@dataclass
class NoiseRealization:
    """One draw of the noise-polarization amplitudes g_lambda(k, w).

    Amplitudes are regenerated on demand from ``(seed, index)`` and are
    complex circular Gaussian, independent across (w, k, lambda) cells,
    with ``<|g|^2> = variance`` per cell. k cells are spherical shells of
    volume 4 pi k^2 dk around the radial grid points; the two transverse
    polarizations carry independent amplitudes, so no longitudinal part
    exists by construction.
    """

    seed: int
    index: int
    omega: np.ndarray
    k: np.ndarray
    d_omega: float
    d_k: float
    variance: np.ndarray
    cache: dict = field(default_factory=dict, repr=False)

    def amplitudes(self) -> np.ndarray:
        """Complex amplitudes, shape ``(n_omega, n_k, 2)``."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.index,))
        rng = np.random.Generator(np.random.PCG64(ss))
        shape = self.variance.shape + (N_POLARIZATIONS,)
        z = rng.standard_normal(shape + (2,))
        scale = np.sqrt(0.5 * self.variance)[:, :, None]
        return scale * (z[..., 0] + 1j * z[..., 1])


@dataclass
class NoiseEnsemble(Sequence):
    """Realizations sharing one grid, model and temperature."""

    model: DispersionModel
    T: float
    omega: np.ndarray
    k: np.ndarray
    d_omega: float
    d_k: float
    variance: np.ndarray
    realizations: list

    def __len__(self):
        return len(self.realizations)

    def __getitem__(self, i):
        return self.realizations[i]

    @property
    def shell_volume(self) -> np.ndarray:
        return 4.0 * math.pi * self.k**2 * self.d_k


def sample_noise_polarization(
    model: DispersionModel,
    kgrid,
    omega_grid,
    T,
    n_real: int,
    seed: int,
    *,
    d_omega: float | None = None,
    noise_scale: float = 1.0,
) -> NoiseEnsemble:
    """Draw ``n_real`` classical noise-polarization fields.

    The continuum correlator <g*(k,w) g(k',w')> = eps_I (N + 1/2) / 2 pi^3
    * delta(w - w') delta^3(k - k') becomes a per-cell variance
    eps_I (N + 1/2) / (2 pi^3 dw d^3k) on the grid, with d^3k the shell
    volume 4 pi k^2 dk. Both grids must be uniform; a single frequency
    needs ``d_omega``.
    """
    if np.size(kgrid) < 2:
        raise ValidationError("k grid needs at least two shells")
    k, d_k = _uniform_grid(kgrid, "k")
    omega, d_w = _uniform_grid(omega_grid, "omega", d_omega)
    if int(n_real) < 1:
        raise ValidationError("n_real must be positive")
    if not (noise_scale >= 0 and math.isfinite(noise_scale)):
        raise ValidationError("noise_scale must be non-negative")
    state = _state(T)
    eps = np.asarray(eval_permittivity(model, omega), dtype=complex)
    if np.any(eps.imag <= 0):
        raise ValidationError("noise polarization needs eps_I > 0 at every grid frequency")
    volume = 4.0 * math.pi * k**2 * d_k
    spectral = HBAR * eps.imag * state.mode_factor(omega) / (2.0 * math.pi**3)
    variance = noise_scale * spectral[:, None] / (d_w * volume[None, :])
    variance.setflags(write=False)
    reals = [NoiseRealization(int(seed), i, omega, k, d_w, d_k, variance) for i in range(int(n_real))]
    return NoiseEnsemble(model, state.T, omega, k, d_w, d_k, variance, reals)


@dataclass(frozen=True)
class FieldSpectrumEstimate:
    """Ensemble estimate of the spectral density of <E^2> per unit frequency.

    ``grid_bias`` is the relative deviation of the grid sum of |transfer|^2
    from its continuum value, i.e. the bias the discretization alone would
    leave in an infinite ensemble.
    """

    omega: np.ndarray
    value: np.ndarray
    std_error: np.ndarray
    n: int
    grid_bias: np.ndarray


def _transfer(eps: np.ndarray, omega: np.ndarray, k: np.ndarray) -> np.ndarray:
    q2 = (eps * omega**2 / C**2)[:, None]
    return (omega**2 / C**2)[:, None] / (k[None, :] ** 2 - q2)


def reconstruct_field_spectrum(
    realizations: NoiseEnsemble, model: DispersionModel | None = None, bias_tol: float = 0.01
) -> FieldSpectrumEstimate:
    """Estimate d<E^2>/dw from noise-polarization realizations.

    Each (k, lambda, w) cell radiates a plane wave with amplitude
    d^3k dw * T(k, w) * g, with T = (w^2/c^2) / (k^2 - eps w^2/c^2). Cells
    are independent, so at a point the cross terms vanish on average and
    the field variance accumulates as 2 sum |d^3k dw T g|^2 (the factor 2
    counts the field and its conjugate). Dividing by dw gives the spectral
    density per realization; the result is the ensemble mean.

    Warns with :class:`ResolutionWarning` when the k grid under-resolves
    the resonant shell k ~ n_R w / c, or truncates it, so that the grid
    bias exceeds ``bias_tol``.
    """
    ens = realizations
    if model is None:
        model = ens.model
    elif model != ens.model:
        raise ValidationError("model differs from the one the realizations were sampled for")
    eps = np.asarray(eval_permittivity(model, ens.omega), dtype=complex)
    transfer2 = np.abs(_transfer(eps, ens.omega, ens.k)) ** 2
    volume = ens.shell_volume
    weight = 2.0 * ens.d_omega * (volume**2)[None, :] * transfer2  # (n_omega, n_k)

    samples = np.empty((len(ens), ens.omega.size))
    for i, real in enumerate(ens.realizations):
        key = ("field_spectrum", id(model))
        cached = real.cache.get(key)
        if cached is None:
            g2 = np.abs(real.amplitudes()) ** 2
            cached = np.einsum("wk,wkl->w", weight, g2)
            real.cache[key] = cached
        samples[i] = cached
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    std = samples.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.full_like(mean, math.inf)

    # Continuum value of int 4 pi k^2 |T|^2 dk against the grid sum.
    n_r = np.sqrt(eps).real
    exact = (ens.omega**2 / C**2) ** 2 * 2.0 * math.pi**2 * C * n_r / (eps.imag * ens.omega)
    grid = (volume[None, :] * transfer2).sum(axis=1)
    bias = grid / exact - 1.0
    # Leading large-k tail 4 pi (w/c)^4 / k_max separates truncation from
    # under-resolution of the shell.
    k_top = ens.k[-1] + 0.5 * ens.d_k
    truncation = -4.0 * math.pi * (ens.omega / C) ** 4 / k_top / exact
    shell_width = ens.omega * eps.imag / (2.0 * n_r * C)
    if np.any(np.abs(bias) > bias_tol):
        worst = int(np.argmax(np.abs(bias)))
        warnings.warn(
            f"k grid biases the field spectrum at omega = {ens.omega[worst]:g} by about {bias[worst]:+.2%}: "
            f"truncation at k_max = {k_top:g} accounts for {truncation[worst]:+.2%}, the rest comes from "
            f"dk = {ens.d_k:g} against a resonant-shell half-width of {shell_width[worst]:.3g}",
            ResolutionWarning,
            stacklevel=2,
        )
    return FieldSpectrumEstimate(ens.omega.copy(), mean, std, n, bias)
