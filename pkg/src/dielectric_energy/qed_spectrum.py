"""Zero-point and thermal energy density of the field in a transparent medium.

In a medium where absorption is negligible the field modes are plane waves
with k = n_R(w) w / c, and the energy density is the mode sum of
hbar w (1/2 + N) over k-space, rewritten as a frequency integral with the
group velocity as the Jacobian.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._numerics import checked_quad
from .constants import C, HBAR, K_B
from .dispersion import (
    DispersionModel,
    Kind,
    OpticalResponse,
    complex_index,
    eval_permeability,
    eval_permittivity,
    group_index,
)
from .energy_classical import ABSORPTION_THRESHOLD, _check_transparent
from .errors import AnomalousDispersionWarning, ValidationError

__all__ = [
    "ThermalState",
    "BandDensity",
    "zero_point_amplitudes",
    "spectral_density",
    "spectral_density_model",
    "fluctuation_spectra",
    "total_density",
    "spontaneous_rate_ratio",
]

# Number of field polarizations in an isotropic medium.
N_POLARIZATIONS = 2


@dataclass(frozen=True)
class ThermalState:
    """Thermal equilibrium at temperature ``T`` (energy units, k_B = 1)."""

    T: float = 0.0

    def __post_init__(self):
        T = float(self.T)
        if not math.isfinite(T) or T < 0:
            raise ValidationError(f"temperature must be finite and non-negative, got {self.T}")
        object.__setattr__(self, "T", T)

    def occupation(self, omega):
        """Mean photon number 1/(exp(hbar w / k_B T) - 1); zero at T = 0."""
        w = np.asarray(omega, dtype=float)
        if self.T == 0:
            out = np.zeros_like(w)
        else:
            with np.errstate(over="ignore", divide="ignore"):
                out = 1.0 / np.expm1(HBAR * w / (K_B * self.T))
        return out[()] if np.ndim(omega) == 0 else out

    def mode_factor(self, omega):
        """1/2 + N(w), which is (1/2) coth(hbar w / 2 k_B T)."""
        return 0.5 + self.occupation(omega)


@dataclass(frozen=True)
class BandDensity:
    """Energy density of a frequency band split into zero-point and thermal parts."""

    zero_point: float
    thermal: float
    omega_min: float
    omega_max: float

    @property
    def total(self) -> float:
        return self.zero_point + self.thermal


def zero_point_amplitudes(response: OpticalResponse, threshold: float = ABSORPTION_THRESHOLD):
    """Vacuum squared amplitudes (E^2, H^2) per polarization and unit frequency.

    E^2 = (hbar/pi c^3) mu_R n_R w^3 and H^2 = (hbar/pi c^3) n_R^3 w^3 / mu_R,
    valid only where absorption is negligible.
    """
    _check_transparent(response.eps, response.mu, threshold, f" at omega = {response.omega:g}")
    w = response.omega
    n_r = response.n_R
    mu_r = response.mu_R
    pref = HBAR * w**3 / (math.pi * C**3)
    return pref * mu_r * n_r, pref * n_r**3 / mu_r


def spectral_density(response: OpticalResponse, state: ThermalState) -> float:
    """rho(w) = n_R^2 hbar w^3 / (pi^2 v_g c^2) * (1/2 + N(w)).

    A non-positive or undefined group velocity makes the mode-counting
    Jacobian meaningless; the value is still returned, with an
    ``AnomalousDispersionWarning``.
    """
    v_g = response.v_g
    if not (v_g > 0):
        warnings.warn(
            f"group velocity {v_g:g} at omega = {response.omega:g} is not positive",
            AnomalousDispersionWarning,
            stacklevel=2,
        )
    w = response.omega
    return response.n_R**2 * HBAR * w**3 / (math.pi**2 * v_g * C**2) * float(state.mode_factor(w))


def spectral_density_model(model: DispersionModel, omega, state: ThermalState):
    """Vectorized ``spectral_density`` using the analytic group index.

    With v_g = c / d(w n_R)/dw this is n_R^2 w^3 d(w n_R)/dw (1/2 + N) hbar / (pi^2 c^3).
    """
    w = np.asarray(omega, dtype=float)
    n_r = np.real(complex_index(model, w))
    gi = group_index(model, w)
    if np.any(gi <= 0):
        warnings.warn("group velocity is not positive somewhere on the grid", AnomalousDispersionWarning, stacklevel=2)
    out = n_r**2 * w**3 * gi * HBAR / (math.pi**2 * C**3) * state.mode_factor(w)
    return out[()] if np.ndim(omega) == 0 else out


def fluctuation_spectra(model: DispersionModel, omega, state: ThermalState):
    """Ensemble spectra <|E(w)|^2>, <|H(w)|^2> of the equilibrium field.

    These are the inputs to the uncorrelated-frequency energy density
    (1/16 pi) int [d(w eps_R)/dw <|E|^2> + d(w mu_R)/dw <|H|^2>] dw that
    reproduce rho(w): summed over both polarizations and carrying the
    factor 2 between a one-sided amplitude and its ensemble mean square,
    each is 4 (1/2 + N)/(1/2) times the zero-point amplitude per polarization.
    """
    w = np.asarray(omega, dtype=float)
    eps = eval_permittivity(model, w)
    mu = eval_permeability(model, w)
    _check_transparent(eps, mu, ABSORPTION_THRESHOLD, " on grid")
    n_r = np.real(complex_index(model, w))
    mu_r = np.real(mu)
    weight = 2.0 * N_POLARIZATIONS * state.mode_factor(w) / 0.5
    pref = HBAR * w**3 / (math.pi * C**3)
    s_e = weight * pref * mu_r * n_r
    s_h = weight * pref * n_r**3 / mu_r
    if np.ndim(omega) == 0:
        return float(s_e), float(s_h)
    return s_e, s_h


def _breakpoints(model: DispersionModel, lo: float, hi: float) -> list[float]:
    pts = []
    for m in (model, model.mu_model):
        if m is None or m.kind is not Kind.LORENTZ:
            continue
        pts.extend([m.omega_0, math.sqrt(m.omega_0**2 + m.omega_p**2)])
    return [p for p in pts if lo < p < hi]


def _check_band_transparent(model: DispersionModel, lo: float, hi: float, threshold: float):
    top = hi if math.isfinite(hi) else max(lo, 1.0) * 1e3
    probe = np.geomspace(max(lo, top * 1e-9), top, 2001) if lo == 0 else np.geomspace(lo, top, 2001)
    eps = eval_permittivity(model, probe)
    mu = eval_permeability(model, probe)
    _check_transparent(eps, mu, threshold, " in band")
    if np.any(eps.real * mu.real <= 0):
        raise ValidationError("band contains a stop band (eps_R mu_R <= 0); no propagating modes there")


def total_density(
    model: DispersionModel,
    state: ThermalState,
    omega_max: float,
    tol: float = 1e-10,
    omega_min: float = 0.0,
    include_zero_point: bool = True,
    threshold: float = ABSORPTION_THRESHOLD,
) -> BandDensity:
    """Integrate rho(w) over [omega_min, omega_max] by adaptive quadrature.

    The zero-point part grows as omega_max**4, so it requires a finite
    cutoff and is reported separately from the thermal part, which
    converges and may be integrated to ``omega_max = inf``.
    """
    lo, hi = float(omega_min), float(omega_max)
    if not (lo >= 0 and hi > lo):
        raise ValidationError("need 0 <= omega_min < omega_max")
    if include_zero_point and not math.isfinite(hi):
        raise ValidationError("zero-point energy diverges; give a finite omega_max or exclude it")
    _check_band_transparent(model, lo, hi, threshold)
    points = _breakpoints(model, lo, hi)

    def rho(w, thermal):
        if w == 0:
            return 0.0
        n_r = float(np.real(complex_index(model, w)))
        gi = float(group_index(model, w))
        factor = float(state.occupation(w)) if thermal else 0.5
        return n_r**2 * w**3 * gi * HBAR / (math.pi**2 * C**3) * factor

    zero = 0.0
    if include_zero_point:
        zero, _ = checked_quad(lambda w: rho(w, False), lo, hi, rtol=tol, points=points)
    thermal = 0.0
    if state.T > 0:
        top = hi
        if not math.isfinite(hi):
            # Beyond ~ 60 T the Bose factor is below 1e-26 relative.
            top = max(60.0 * K_B * state.T / HBAR, lo * 2 if lo > 0 else 1.0)
            top = max([top] + [p * 2 for p in points])
        thermal_points = points + [K_B * state.T / HBAR * x for x in (1.0, 3.0, 10.0)]
        thermal, _ = checked_quad(lambda w: rho(w, True), lo, top, rtol=tol, atol=0.0, points=thermal_points)
    return BandDensity(zero, thermal, lo, hi)


def spontaneous_rate_ratio(model: DispersionModel, omega_0: float) -> float:
    """Spontaneous emission rate in the medium relative to free space: n_R(omega_0)."""
    w = float(omega_0)
    if not (math.isfinite(w) and w > 0):
        raise ValidationError("transition frequency must be positive")
    return float(np.real(complex_index(model, w)))
