"""Zero-point and thermal field energy in a uniform absorbing dielectric.

The field is driven by the noise polarization of the medium, so every
field variance is a k-space integral over the propagator
1/(k^2 - eps w^2/c^2). The electric variance converges; the magnetic one
diverges and is regularized with a Lorentzian cutoff 1/(1 + k^2 a^2) at the
interatomic scale ``a``. The energy splits into W1 (field part, with
E.dD_eps/dt and the magnetic energy) and W2 (work against the noise
polarization). Both grow linearly in time with opposite rates, and the
1/a pieces of the magnetic energy and of W2 cancel; what remains depends
only on n_R(w) and equals the mode-sum result for a transparent medium.

All spectral densities are per unit angular frequency with the sum over
the two transverse polarizations carried out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._numerics import checked_quad
from .constants import C, HBAR
from .dispersion import (
    DispersionModel,
    Kind,
    _principal_root,
    eval_permittivity,
    index_derivative,
    permittivity_derivative,
)
from .errors import DivergenceError, ValidationError
from .qed_spectrum import BandDensity, ThermalState

__all__ = [
    "RegularizationConfig",
    "EnergyBreakdown",
    "W1Terms",
    "W2Terms",
    "green_norm_integral",
    "regularized_k_integral",
    "e_field_spectrum",
    "h_field_spectrum",
    "w1_spectrum",
    "w2_spectrum",
    "energy_breakdown",
    "total_energy_spectrum",
    "final_expression_spectrum",
    "thermal_total_energy",
]

N_POLARIZATIONS = 2
# Largest allowed a * omega / c: the cutoff must sit far beyond the optical k.
MAX_CUTOFF_PARAMETER = 0.01
# k-space quadrature: integrate s = k c / omega up to this (times sqrt|eps|).
S_MAX = 50.0


@dataclass(frozen=True)
class RegularizationConfig:
    """Lorentzian k-space cutoff.

    With ``a`` given the cutoff length is fixed; otherwise it is
    ``relative * c / omega`` at each frequency, which keeps a * omega / c
    constant across a sweep.
    """

    a: float | None = None
    relative: float = 1e-4
    scheme: str = "lorentzian"

    def __post_init__(self):
        if self.scheme != "lorentzian":
            raise ValidationError(f"regularization scheme {self.scheme!r} is not implemented (only 'lorentzian')")
        if self.a is not None:
            a = float(self.a)
            if not (math.isfinite(a) and a > 0):
                raise ValidationError("cutoff length a must be positive")
            object.__setattr__(self, "a", a)
        rel = float(self.relative)
        if not (0 < rel < MAX_CUTOFF_PARAMETER):
            raise ValidationError(f"relative cutoff must lie in (0, {MAX_CUTOFF_PARAMETER})")
        object.__setattr__(self, "relative", rel)

    def cutoff_length(self, omega):
        """Cutoff length at ``omega``; raises if a * omega / c >= 0.01."""
        w = np.asarray(omega, dtype=float)
        if self.a is None:
            out = self.relative * C / w
        else:
            if np.any(self.a * w / C >= MAX_CUTOFF_PARAMETER):
                raise ValidationError(
                    f"a * omega / c must stay below {MAX_CUTOFF_PARAMETER}: "
                    f"a = {self.a:g} is too large for omega up to {float(np.max(w)):g}"
                )
            out = np.full_like(w, self.a)
        return out[()] if np.ndim(omega) == 0 else out


DEFAULT_REGULARIZATION = RegularizationConfig()


class W1Terms(NamedTuple):
    static: np.ndarray | float
    rate: np.ndarray | float


class W2Terms(NamedTuple):
    static_cutoff: np.ndarray | float
    static_finite: np.ndarray | float
    rate: np.ndarray | float


@dataclass(frozen=True)
class EnergyBreakdown:
    """Per-frequency pieces of the energy density.

    ``w1_static`` includes the magnetic energy (``h_field``, itself with
    its 1/a part); ``w2_static`` is the sum of its cutoff and finite parts.
    ``cutoff_residual`` is the sum of all 1/a terms, which cancel.
    ``total`` = w1_static + w2_static.
    """

    omega: np.ndarray | float
    w1_static: np.ndarray | float
    w1_rate: np.ndarray | float
    w2_static: np.ndarray | float
    w2_rate: np.ndarray | float
    h_field: np.ndarray | float
    h_field_cutoff: np.ndarray | float
    w2_static_cutoff: np.ndarray | float
    cutoff_residual: np.ndarray | float
    total: np.ndarray | float


def _as_eps(eps) -> np.ndarray:
    return np.asarray(eps, dtype=complex)


def _out(value, like):
    return value[()] if np.ndim(like) == 0 else value


def green_norm_integral(eps, omega, method: str = "closed", rtol: float = 1e-12):
    """int_0^inf 4 pi k^2 dk / |k^2 - eps w^2/c^2|^2.

    ``method="closed"`` returns 2 pi^2 c n_R / (eps_I w);
    ``method="quadrature"`` integrates adaptively in s = k c / w, with
    breakpoints around the resonant shell s = sqrt(eps_R) and an analytic
    large-s tail. Only finite for eps_I > 0.
    """
    e = _as_eps(eps)
    w = np.asarray(omega, dtype=float)
    if np.any(e.imag <= 0):
        raise DivergenceError("k-integral diverges on the shell k = n w / c unless eps_I > 0")
    if np.any(w <= 0):
        raise ValidationError("omega must be positive")
    if method == "closed":
        n_r = _principal_root(e).real
        return _out(2.0 * math.pi**2 * C * n_r / (e.imag * w), np.broadcast(e, w))
    if method != "quadrature":
        raise ValidationError(f"unknown method {method!r}")
    e_b, w_b = np.broadcast_arrays(e, w)
    out = np.array([_green_norm_quad(complex(ei), float(wi), rtol) for ei, wi in zip(e_b.ravel(), w_b.ravel())])
    return _out(out.reshape(e_b.shape), e_b)


def _green_norm_quad(eps: complex, omega: float, rtol: float) -> float:
    er, ei = eps.real, eps.imag
    mod2 = er * er + ei * ei

    def integrand(s):
        d = s * s - er
        return s * s / (d * d + ei * ei)

    s_max = S_MAX * max(1.0, math.sqrt(math.sqrt(mod2)))
    points = []
    if er > 0:
        s0 = math.sqrt(er)
        half_width = ei / (2.0 * s0)
        for j in (0.0, 1.0, 3.0, 10.0, 30.0, 100.0):
            points.extend([s0 - j * half_width, s0 + j * half_width])
    body, _ = checked_quad(integrand, 0.0, s_max, rtol=rtol, points=points, limit=1000)
    tail = 1.0 / s_max + 2.0 * er / (3.0 * s_max**3) + (4.0 * er * er - mod2) / (5.0 * s_max**5)
    return 4.0 * math.pi * C / omega * (body + tail)


def regularized_k_integral(eps, omega, reg: RegularizationConfig = DEFAULT_REGULARIZATION, method: str = "closed"):
    """int d^3k / (k^2 - eps w^2/c^2) * 1/(1 + k^2 a^2).

    ``method="closed"`` is the small-a result 2 pi^2/a + 2 pi^2 i (w/c) sqrt(eps);
    ``method="quadrature"`` integrates the finite-a expression numerically,
    which differs from the closed form at relative order a w / c.
    """
    e = complex(eps)
    w = float(omega)
    if e.imag <= 0:
        raise DivergenceError("regularized k-integral needs eps_I > 0 (pole on the real k axis)")
    if w <= 0:
        raise ValidationError("omega must be positive")
    a = float(reg.cutoff_length(w))
    if a * w / C >= MAX_CUTOFF_PARAMETER:
        raise ValidationError("a * omega / c must stay below 0.01")
    q = complex(_principal_root(e)) * w / C
    if method == "closed":
        return 2.0 * math.pi**2 / a + 2.0j * math.pi**2 * q
    if method != "quadrature":
        raise ValidationError(f"unknown method {method!r}")
    q2 = q * q

    def f(k):
        return 4.0 * math.pi * k * k / ((k * k - q2) * (1.0 + (k * a) ** 2))

    k0 = abs(q)
    width = max(abs(q2.imag) / (2.0 * max(k0, 1e-300)), 1e-12)
    points = sorted({k0, k0 + width, max(k0 - width, 0.0), k0 + 10 * width, 10 * k0, 1.0 / a, 10.0 / a})
    top = 100.0 / a
    re, _ = checked_quad(lambda k: f(k).real, 0.0, top, rtol=1e-12, points=points, limit=1000)
    im, _ = checked_quad(lambda k: f(k).imag, 0.0, top, rtol=1e-12, points=points, limit=1000)
    # Beyond 100/a the integrand is 4 pi / (a^2 k^2) (1 + O(q^2/k^2, 1/(a k)^2)).
    # Integrated in u = top / k, which maps it onto a smooth integrand on (0, 1].
    tail, _ = checked_quad(lambda u: f(top / u).real * top / (u * u) if u > 0 else 4.0 * math.pi / (a * a * top),
                           0.0, 1.0, rtol=1e-10)
    return complex(re + tail, im)


def _require_nonmagnetic(model: DispersionModel):
    if model.mu_model is not None:
        raise ValidationError("the absorbing-medium energy assumes mu = 1; model carries a permeability")


def _parts(model: DispersionModel, omega):
    _require_nonmagnetic(model)
    w = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValidationError("omega must be positive and finite")
    eps = eval_permittivity(model, w)
    eps = np.asarray(eps, dtype=complex)
    if np.any(eps.imag < 0):
        raise ValidationError("gain medium (eps_I < 0) is not supported")
    d_eps = np.asarray(permittivity_derivative(model, w), dtype=complex)
    root = _principal_root(eps)
    return w, eps, d_eps, root


def e_field_spectrum(model: DispersionModel, omega, route: str = "closed"):
    """Zero-point spectral density of <E^2>: (2 hbar / pi c^3) w^3 n_R.

    ``route="k_integral"`` evaluates it from its definition,
    (hbar / 2 pi^3 c^4) * 2 * w^4 eps_I * green_norm_integral, with the
    k-integral done by quadrature.
    """
    w, eps, _, root = _parts(model, omega)
    if route == "closed":
        out = N_POLARIZATIONS * HBAR / (math.pi * C**3) * w**3 * root.real
    elif route == "k_integral":
        g = green_norm_integral(eps, w, method="quadrature")
        out = HBAR / (2.0 * math.pi**3 * C**4) * N_POLARIZATIONS * w**4 * eps.imag * g
    else:
        raise ValidationError(f"unknown route {route!r}")
    return _out(np.asarray(out, dtype=float), omega)


def _pref(w):
    return HBAR * N_POLARIZATIONS / (8.0 * math.pi**2 * C**3) * w**2


def h_field_spectrum(model: DispersionModel, omega, reg: RegularizationConfig = DEFAULT_REGULARIZATION):
    """Magnetic energy <H^2>/8 pi per unit frequency, as ``(finite, cutoff)``.

    finite = (hbar / 8 pi^2 c^3) * 2 * w^3 Re eps^(3/2);
    cutoff = (hbar / 8 pi^2 c^3) * 2 * w^2 eps_I c / a.
    """
    w, eps, _, root = _parts(model, omega)
    a = reg.cutoff_length(w)
    pref = _pref(w)
    finite = pref * w * (eps * root).real
    cutoff = pref * eps.imag * C / a
    return _out(finite, omega), _out(cutoff, omega)


def w1_spectrum(model: DispersionModel, omega, reg: RegularizationConfig = DEFAULT_REGULARIZATION) -> W1Terms:
    """Time-independent part and growth rate of W1 per unit frequency.

    static = (hbar / 8 pi^2 c^3) * 2 * w^3 n_R d(w eps_R)/dw + <H^2>/8 pi
    (both parts of the magnetic term); rate = (hbar / 4 pi^2 c^3) * 2 * w^4 n_R eps_I.
    """
    w, eps, d_eps, root = _parts(model, omega)
    n_r = root.real
    d_w_eps_r = (eps + w * d_eps).real
    h_fin, h_cut = h_field_spectrum(model, w, reg)
    static = _pref(w) * w * n_r * d_w_eps_r + h_fin + h_cut
    rate = HBAR * N_POLARIZATIONS / (4.0 * math.pi**2 * C**3) * w**4 * n_r * eps.imag
    return W1Terms(_out(static, omega), _out(rate, omega))


def w2_spectrum(model: DispersionModel, omega, reg: RegularizationConfig = DEFAULT_REGULARIZATION) -> W2Terms:
    """Noise-polarization work W2 per unit frequency.

    static_cutoff = -(hbar / 8 pi^2 c^2) * 2 * w^2 eps_I / a;
    static_finite = (hbar / 8 pi^2 c^3) * 2 * w^2 eps_I Im d(w^2 sqrt(eps))/dw;
    rate = -(1/8 pi)(hbar / 2 pi^3 c^4) * 2 * 2 w^5 eps_I^2 * green_norm_integral,
    computed from the k-integral rather than from n_R so that its
    cancellation against the W1 rate is a genuine check.
    """
    w, eps, d_eps, root = _parts(model, omega)
    a = reg.cutoff_length(w)
    static_cutoff = -HBAR * N_POLARIZATIONS / (8.0 * math.pi**2 * C**2) * w**2 * eps.imag / a
    d_w2_root = 2.0 * w * root + w**2 * d_eps / (2.0 * root)
    static_finite = _pref(w) * eps.imag * d_w2_root.imag
    absorbing = eps.imag > 0
    g = np.zeros_like(w)
    if np.any(absorbing):
        g = np.where(absorbing, green_norm_integral(np.where(absorbing, eps, 1j), w), 0.0)
    rate = -HBAR / (8.0 * math.pi * 2.0 * math.pi**3 * C**4) * N_POLARIZATIONS * 2.0 * w**5 * eps.imag**2 * g
    return W2Terms(_out(static_cutoff, omega), _out(static_finite, omega), _out(rate, omega))


def energy_breakdown(
    model: DispersionModel, omega, reg: RegularizationConfig = DEFAULT_REGULARIZATION
) -> EnergyBreakdown:
    """All W1/W2 pieces at ``omega`` with the cutoff terms tracked separately."""
    w, eps, d_eps, root = _parts(model, omega)
    w1 = w1_spectrum(model, w, reg)
    w2 = w2_spectrum(model, w, reg)
    h_fin, h_cut = h_field_spectrum(model, w, reg)
    # The 1/a pair is summed on its own before it meets the finite pieces;
    # subtracting it back out of w1.static would cost digits of order c/(a w).
    residual = h_cut + w2.static_cutoff
    w1_finite = _pref(w) * w * root.real * (eps + w * d_eps).real + h_fin
    total = (w1_finite + w2.static_finite) + residual
    return EnergyBreakdown(
        omega=_out(w, omega),
        w1_static=_out(w1.static, omega),
        w1_rate=_out(w1.rate, omega),
        w2_static=_out(w2.static_cutoff + w2.static_finite, omega),
        w2_rate=_out(w2.rate, omega),
        h_field=_out(h_fin + h_cut, omega),
        h_field_cutoff=_out(h_cut, omega),
        w2_static_cutoff=_out(w2.static_cutoff, omega),
        cutoff_residual=_out(residual, omega),
        total=_out(total, omega),
    )


def total_energy_spectrum(model: DispersionModel, omega, reg: RegularizationConfig = DEFAULT_REGULARIZATION):
    """Assembled zero-point energy density per unit frequency, W1 + W2.

    Equals (hbar / 4 pi^2 c^3) w^3 {n_R d(w eps_R)/dw + Re eps^(3/2)
    + (eps_I / w) Im d(w^2 sqrt(eps))/dw} once the 1/a terms cancel.
    """
    return energy_breakdown(model, omega, reg).total


def final_expression_spectrum(model: DispersionModel, omega):
    """(hbar / 2 pi^2 c^3) w^3 n_R^2 (n_R + w dn_R/dw)."""
    _require_nonmagnetic(model)
    w = np.asarray(omega, dtype=float)
    root = _principal_root(eval_permittivity(model, w))
    n_r = root.real
    dn_r = np.real(index_derivative(model, w))
    out = HBAR / (2.0 * math.pi**2 * C**3) * w**3 * n_r**2 * (n_r + w * dn_r)
    return _out(out, omega)


def _resonances(model: DispersionModel, lo: float, hi: float) -> list[float]:
    if model.kind is not Kind.LORENTZ:
        return []
    pts = [model.omega_0, math.sqrt(model.omega_0**2 + model.omega_p**2)]
    if model.gamma > 0:
        pts += [model.omega_0 - model.gamma, model.omega_0 + model.gamma]
    return [p for p in pts if lo < p < hi]


def thermal_total_energy(
    model: DispersionModel,
    band,
    T: float,
    include_zero_point: bool = True,
    reg: RegularizationConfig = DEFAULT_REGULARIZATION,
    rtol: float = 1e-10,
) -> BandDensity:
    """Band energy density at temperature ``T``.

    The zero-point spectrum W(w) is weighted by coth(w / 2T) = (1/2 + N)/(1/2):
    the zero-point part integrates W itself and the thermal part 2 N(w) W(w).
    ``band`` is ``(omega_min, omega_max)``; ``omega_max`` may be infinite
    when the zero-point part is excluded.
    """
    lo, hi = (float(x) for x in band)
    if not (lo >= 0 and hi > lo):
        raise ValidationError("band must satisfy 0 <= omega_min < omega_max")
    if include_zero_point and not math.isfinite(hi):
        raise ValidationError("zero-point energy diverges; give a finite omega_max or exclude it")
    state = ThermalState(T)
    points = _resonances(model, lo, hi)

    def spectrum(w):
        if w == 0:
            return 0.0
        return float(total_energy_spectrum(model, w, reg))

    zero = 0.0
    if include_zero_point:
        zero, _ = checked_quad(spectrum, lo, hi, rtol=rtol, points=points, limit=1000)
    thermal = 0.0
    if state.T > 0:
        top = hi if math.isfinite(hi) else max([60.0 * state.T] + [2.0 * p for p in points] + [2.0 * lo])
        tpts = points + [state.T * x for x in (1.0, 3.0, 10.0)]
        thermal, _ = checked_quad(
            lambda w: 2.0 * float(state.occupation(w)) * spectrum(w), lo, top, rtol=rtol, points=tpts, limit=1000
        )
    return BandDensity(zero, thermal, lo, hi)
