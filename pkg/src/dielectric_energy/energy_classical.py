"""Classical electromagnetic energy in dispersive media.

Covers the frequency-domain energy kernel, the Brillouin density for
negligible absorption, the quasi-monochromatic split into stored energy and
evolved heat, the density of a stochastic field with uncorrelated
frequencies, and a time-domain ledger for a medium of driven bound charges.
Gaussian units throughout.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.special import erf

from ._numerics import checked_quad, richardson_derivative
from .dispersion import (
    DispersionModel,
    OpticalResponse,
    complex_index,
    eval_permeability,
    eval_permittivity,
    permeability_derivative,
    permittivity_derivative,
)
from .errors import AbsorptionError, ValidationError
from .oscillator import DampedPropagator, OscillatorParams

__all__ = [
    "ABSORPTION_THRESHOLD",
    "FieldAmplitude",
    "QuasiMonoEnergy",
    "EnergyLedger",
    "poynting_kernel",
    "d_omega_eps_r",
    "d_omega_mu_r",
    "brillouin_density",
    "brillouin_density_at",
    "quasimono_energy",
    "envelope_heat_term",
    "ensemble_density",
    "simulate_classical_oscillator_ledger",
]

# Largest eps_I / |eps_R| for which absorption counts as negligible.
ABSORPTION_THRESHOLD = 1e-3

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class FieldAmplitude:
    """Complex field amplitudes at a carrier frequency, with an optional envelope."""

    E: complex
    H: complex
    omega_0: float
    envelope: Callable[[float], complex] | None = None

    def __post_init__(self):
        for name in ("E", "H"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValidationError(f"amplitude {name} must be finite")
            object.__setattr__(self, name, value)
        if not self.omega_0 > 0:
            raise ValidationError("carrier frequency must be positive")

    @property
    def E2(self) -> float:
        return abs(self.E) ** 2

    @property
    def H2(self) -> float:
        return abs(self.H) ** 2


@dataclass(frozen=True)
class QuasiMonoEnergy:
    stored: float
    heat: float

    @property
    def total(self) -> float:
        return self.stored + self.heat


def _positive(omega, name="omega"):
    w = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValidationError(f"{name} must be positive and finite")
    return w


def poynting_kernel(model: DispersionModel, omega, omega_prime):
    """Split the energy kernel [w' eps*(w') - w eps(w)] / (w' - w).

    Returns ``(regular, singular_heat)``. ``regular`` is the divided
    difference of ``w eps_R``, which tends to d(w eps_R)/dw on the
    diagonal. The imaginary part of the kernel,
    -[w' eps_I(w') + w eps_I(w)] / (w' - w), has a pole at w' = w; its
    residue coefficient ``singular_heat`` = [w eps_I(w) + w' eps_I(w')] / 2
    (which is w eps_I(w) on the diagonal) is what produces heat growing
    linearly in time. Both outputs are symmetric in ``(omega, omega_prime)``.
    """
    w = _positive(omega)
    wp = _positive(omega_prime, "omega_prime")
    w, wp = np.broadcast_arrays(w, wp)
    ew = eval_permittivity(model, w)
    ewp = eval_permittivity(model, wp)
    f = w * ew.real
    fp = wp * ewp.real
    diagonal = d_omega_eps_r(model, w)
    same = wp == w
    with np.errstate(divide="ignore", invalid="ignore"):
        regular = np.where(same, diagonal, (fp - f) / np.where(same, 1.0, wp - w))
    heat = 0.5 * (w * ew.imag + wp * ewp.imag)
    if np.ndim(omega) == 0 and np.ndim(omega_prime) == 0:
        return float(regular), float(heat)
    return regular, heat


def d_omega_eps_r(model: DispersionModel, omega):
    """d(w eps_R)/dw."""
    w = np.asarray(omega, dtype=float)
    out = np.real(eval_permittivity(model, w) + w * permittivity_derivative(model, w))
    return out[()] if np.ndim(omega) == 0 else out


def d_omega_mu_r(model: DispersionModel, omega):
    """d(w mu_R)/dw."""
    w = np.asarray(omega, dtype=float)
    out = np.real(eval_permeability(model, w) + w * permeability_derivative(model, w))
    return out[()] if np.ndim(omega) == 0 else out


def _check_transparent(eps, mu, threshold, where=""):
    eps = np.asarray(eps, dtype=complex)
    mu = np.asarray(mu, dtype=complex)
    for label, z in (("eps", eps), ("mu", mu)):
        ratio = np.abs(z.imag) / np.maximum(np.abs(z.real), np.finfo(float).tiny)
        if np.any(ratio >= threshold):
            worst = float(np.max(ratio))
            raise AbsorptionError(
                f"{label}_I/|{label}_R| = {worst:.3e}{where} exceeds {threshold:g}; "
                "absorption is not negligible, use the absorbing-medium energy "
                "(dielectric_energy.absorbing_energy) instead"
            )


def brillouin_density(
    response: OpticalResponse,
    d_omega_eps: float,
    d_omega_mu: float,
    E,
    H,
    threshold: float = ABSORPTION_THRESHOLD,
) -> float:
    """Cycle-averaged energy density (1/16 pi)[d(w eps_R)/dw |E|^2 + d(w mu_R)/dw |H|^2].

    Only meaningful where absorption is negligible; raises
    ``AbsorptionError`` when eps_I/|eps_R| or mu_I/|mu_R| reaches
    ``threshold``.
    """
    _check_transparent(response.eps, response.mu, threshold, f" at omega = {response.omega:g}")
    return (d_omega_eps * abs(E) ** 2 + d_omega_mu * abs(H) ** 2) / (4.0 * FOUR_PI)


def brillouin_density_at(
    model: DispersionModel, omega: float, E, H, threshold: float = ABSORPTION_THRESHOLD
) -> float:
    """``brillouin_density`` with the response and derivatives taken from ``model``."""
    w = float(_positive(omega))
    eps = complex(eval_permittivity(model, w))
    mu = complex(eval_permeability(model, w))
    n = complex(complex_index(model, w))
    response = OpticalResponse(w, eps, mu, n.real, n.imag, math.nan)
    return brillouin_density(response, d_omega_eps_r(model, w), d_omega_mu_r(model, w), E, H, threshold)


def quasimono_energy(model: DispersionModel, omega_0: float, E0, H0, t: float) -> QuasiMonoEnergy:
    """Leading-order energy of a quasi-monochromatic field after time ``t``.

    ``stored`` is the Brillouin term built from the envelope amplitudes;
    ``heat`` = (w0 t / 8 pi)[eps_I |E0|^2 + mu_I |H0|^2] is the energy
    absorbed since ``t = 0``. The envelope is assumed slow on the scale
    1/w0, which is the caller's responsibility.
    """
    w0 = float(_positive(omega_0, "omega_0"))
    if not (math.isfinite(t) and t >= 0):
        raise ValidationError("t must be finite and non-negative")
    e2 = abs(E0) ** 2
    h2 = abs(H0) ** 2
    eps = complex(eval_permittivity(model, w0))
    mu = complex(eval_permeability(model, w0))
    stored = (d_omega_eps_r(model, w0) * e2 + d_omega_mu_r(model, w0) * h2) / (4.0 * FOUR_PI)
    # Coefficient first, so the result is exactly linear in t.
    heat = (w0 * (eps.imag * e2 + mu.imag * h2) / (2.0 * FOUR_PI)) * t
    return QuasiMonoEnergy(float(stored), float(heat))


def envelope_heat_term(
    model: DispersionModel,
    omega_0: float,
    envelope: Callable[[float], complex],
    t: float,
    t_start: float,
    d_envelope: Callable[[float], complex] | None = None,
    rtol: float = 1e-10,
) -> float:
    """Next-order correction from a time-dependent envelope.

    Evaluates (i/16 pi) d(w eps_I)/dw|_w0 * int_{t_start}^t [E0' E0* - E0*' E0] dt',
    which is real and equals -(1/8 pi) d(w eps_I)/dw * int Im(E0' E0*) dt'.
    This is a diagnostic only; ``quasimono_energy`` does not include it.
    The envelope derivative is taken by finite differences unless
    ``d_envelope`` is supplied.
    """
    w0 = float(_positive(omega_0, "omega_0"))
    slope = float(np.imag(eval_permittivity(model, w0) + w0 * permittivity_derivative(model, w0)))
    if d_envelope is None:
        def d_envelope(s):
            return complex(richardson_derivative(lambda u: np.complex128(envelope(float(u))), s, 1e-3))

    def integrand(s):
        return (d_envelope(s) * np.conj(envelope(s))).imag

    if t == t_start:
        return 0.0
    value, _ = checked_quad(integrand, t_start, t, rtol=rtol, atol=1e-14)
    return -slope * value / (2.0 * FOUR_PI)


def ensemble_density(
    model: DispersionModel,
    spectrum_E: Callable,
    spectrum_H: Callable,
    grid,
    threshold: float = ABSORPTION_THRESHOLD,
) -> float:
    """Energy density of a stationary field with uncorrelated frequencies.

    Integrates (1/16 pi)[d(w eps_R)/dw S_E(w) + d(w mu_R)/dw S_H(w)] over
    ``grid`` with Simpson's rule, where ``S_E`` and ``S_H`` are the
    ensemble spectra <|E(w)|^2> and <|H(w)|^2>. A two-point grid is
    treated as a band and integrated adaptively. Refuses models that
    absorb anywhere on the grid.
    """
    grid = _positive(grid, "grid")
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValidationError("grid must be a strictly increasing array of at least 2 frequencies")

    def density(w):
        w = np.asarray(w, dtype=float)
        return (d_omega_eps_r(model, w) * spectrum_E(w) + d_omega_mu_r(model, w) * spectrum_H(w)) / (4.0 * FOUR_PI)

    if grid.size == 2:
        probe = np.linspace(grid[0], grid[1], 257)
        _check_transparent(eval_permittivity(model, probe), eval_permeability(model, probe), threshold, " in band")
        value, _ = checked_quad(lambda w: float(density(w)), grid[0], grid[1], rtol=1e-11)
        return value
    _check_transparent(eval_permittivity(model, grid), eval_permeability(model, grid), threshold, " on grid")
    return float(simpson(density(grid), x=grid))


# --- time-domain ledger ------------------------------------------------------

# Gauss-Legendre order used for the forcing integral over one step.
_GL_ORDER = 8
# Minimum samples per period of the drive and of the oscillator.
MIN_STEPS_PER_PERIOD = 40


@dataclass
class EnergyLedger:
    """Energy densities of field and medium sampled on a uniform time grid.

    ``dissipated_rate`` is the power lost to damping, 2 gamma times the
    kinetic density; ``drive_power`` is E . dP/dt, the power the field
    delivers to the oscillators; ``langevin_work_rate`` is the power from a
    fluctuating force, identically zero for a deterministic drive.
    """

    t: np.ndarray
    kinetic: np.ndarray
    potential: np.ndarray
    field: np.ndarray
    dissipated_rate: np.ndarray
    drive_power: np.ndarray
    langevin_work_rate: np.ndarray
    period: float
    steady_from: float
    meta: dict = field(default_factory=dict)

    COLUMNS = ("t", "kinetic", "potential", "field", "dissipated_rate", "drive_power")

    @property
    def total(self) -> np.ndarray:
        return self.kinetic + self.potential + self.field

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def cycle_average(self, n_periods: int = 4) -> dict:
        """Means over the last ``n_periods`` whole drive periods.

        Samples are uniform with an integer number per period, so the plain
        mean over one period integrates the periodic steady state exactly.
        """
        per = int(round(self.period / self.dt))
        count = n_periods * per
        if count >= self.t.size:
            raise ValidationError("record shorter than the requested averaging window")
        start = self.t.size - 1 - count
        if self.t[start] < self.steady_from:
            raise ValidationError(
                f"averaging window starts at t = {self.t[start]:g}, before the drive "
                f"is fully on at t = {self.steady_from:g}; increase t_end"
            )
        window = slice(start, self.t.size - 1)
        out = {name: float(np.mean(getattr(self, name)[window])) for name in self.COLUMNS[1:]}
        out["total"] = out["kinetic"] + out["potential"] + out["field"]
        return out

    def balance_residual(self) -> float:
        """Largest violation of d/dt(kinetic + potential) = drive_power - dissipated_rate.

        Checked in integral form with cumulative Simpson quadrature and
        reported relative to the largest medium energy reached.
        """
        medium = self.kinetic + self.potential
        net = self.drive_power - self.dissipated_rate
        if medium.size < 3:
            return 0.0
        work = cumulative_simpson(net, x=self.t, initial=0.0)
        scale = float(np.max(np.abs(medium)))
        diff = np.abs(medium - medium[0] - work)
        return float(np.max(diff) / scale) if scale > 0 else float(np.max(diff))

    def to_csv(self, path=None) -> str:
        """CSV text with a header row; also written to ``path`` if given."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.COLUMNS)
        cols = [getattr(self, name) for name in self.COLUMNS]
        for row in zip(*cols):
            writer.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            tmp = f"{path}.tmp"
            with open(tmp, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        return text


def _ramp(t, t_mid, width):
    return 0.5 * (1.0 + erf((t - t_mid) / width))


def simulate_classical_oscillator_ledger(
    params: OscillatorParams,
    E_omega: float,
    omega: float,
    t_end: float,
    dt: float,
    H_omega: float | None = None,
    ramp_width: float | None = None,
    method: str = "exponential",
) -> EnergyLedger:
    """Drive a medium of bound charges with a homogeneous field E_omega cos(omega t).

    Each charge obeys x'' + gamma x' + omega_0^2 x = (e/m) E(t) and starts
    at rest. The drive is switched on adiabatically with an erf ramp of
    width ``ramp_width`` centred at six widths, so the record after
    ``steady_from`` is the steady state of a field turned on in the remote
    past rather than a from-rest transient. The default width makes the
    free oscillation excited by the ramp negligible (below 1e-10 in
    amplitude) even without damping.

    ``dt`` is rounded down so an integer number of steps spans one drive
    period. ``H_omega`` defaults to n_R E_omega, the plane-wave value in a
    medium with the oscillators' permittivity; it only enters the field
    energy. ``method`` is ``"exponential"`` (exact free propagation plus
    Gauss-Legendre forcing quadrature) or ``"verlet"`` (velocity Verlet with
    exact damping half-steps, second order).
    """
    w = float(_positive(omega))
    w0 = params.omega_0
    g = params.gamma
    if g == 0 and w == w0:
        raise ValidationError("undamped oscillator driven on resonance has no steady state")
    if not (math.isfinite(t_end) and t_end > 0):
        raise ValidationError("t_end must be positive")
    period = 2.0 * math.pi / w
    per = math.ceil(period / dt - 1e-9)
    dt_eff = period / per
    if 2.0 * math.pi / max(w, w0) / dt_eff < MIN_STEPS_PER_PERIOD - 1e-9:
        raise ValidationError(
            f"dt = {dt:g} is too coarse: need at least {MIN_STEPS_PER_PERIOD} steps per "
            f"period of both the drive and the oscillator"
        )
    if method not in ("exponential", "verlet"):
        raise ValidationError(f"unknown integration method {method!r}")

    if ramp_width is None:
        # The ramp excites the free mode through its spectrum at |w - w0|.
        ramp_width = max(10.0 / max(abs(w - w0), 0.5 * g), 2.0 * period)
    t_mid = 6.0 * ramp_width
    steady_from = 12.0 * ramp_width

    n_steps = int(math.ceil(t_end / dt_eff))
    t = np.arange(n_steps + 1) * dt_eff
    q_over_m = params.charge / params.m

    def drive(s):
        return E_omega * _ramp(s, t_mid, ramp_width) * np.cos(w * s)

    if method == "exponential":
        prop = DampedPropagator(w0, g, dt_eff)
        nodes, weights = np.polynomial.legendre.leggauss(_GL_ORDER)
        nodes = 0.5 * dt_eff * (nodes + 1.0)
        weights = 0.5 * dt_eff * weights
        kern = prop.duhamel_weights(nodes, weights)
        force = q_over_m * drive(t[:-1, None] + nodes[None, :])
        increments = force @ kern
        state = prop.run(increments)
        x, v = state[:, 0], state[:, 1]
    else:
        x, v = _verlet(w0, g, dt_eff, q_over_m * drive(t))

    n = params.density
    m = params.m
    e_t = drive(t)
    if H_omega is None:
        H_omega = float(np.real(complex_index(_medium_model(params), w))) * E_omega
    h_t = H_omega * _ramp(t, t_mid, ramp_width) * np.cos(w * t)
    kinetic = 0.5 * n * m * v**2
    potential = 0.5 * n * m * w0**2 * x**2
    return EnergyLedger(
        t=t,
        kinetic=kinetic,
        potential=potential,
        field=(e_t**2 + h_t**2) / (2.0 * FOUR_PI),
        dissipated_rate=2.0 * g * kinetic,
        drive_power=n * params.charge * e_t * v,
        langevin_work_rate=np.zeros_like(t),
        period=period,
        steady_from=steady_from,
        meta={"dt": dt_eff, "ramp_width": ramp_width, "method": method, "N": n},
    )


def _medium_model(params: OscillatorParams) -> DispersionModel:
    return DispersionModel.lorentz(params.omega_p, params.omega_0, params.gamma)


def _verlet(w0, g, dt, accel_drive):
    """Velocity Verlet for the conservative part, exact decay for damping."""
    n_steps = accel_drive.size - 1
    x = np.zeros(n_steps + 1)
    v = np.zeros(n_steps + 1)
    damp = math.exp(-0.5 * g * dt)
    xi, vi = 0.0, 0.0
    ai = -(w0**2) * xi + accel_drive[0]
    for k in range(n_steps):
        vi *= damp
        vh = vi + 0.5 * dt * ai
        xi = xi + dt * vh
        ai = -(w0**2) * xi + accel_drive[k + 1]
        vi = (vh + 0.5 * dt * ai) * damp
        x[k + 1] = xi
        v[k + 1] = vi
    return x, v
