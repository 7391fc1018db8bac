"""Permittivity and permeability models and the optical quantities derived from them.

Parametric models use the damped-oscillator form

    eps(w) = 1 - w_p**2 / (w**2 - w_0**2 + 1j * gamma * w)

with Drude as the ``w_0 = 0`` special case. Tabulated models interpolate
measured samples with a monotone cubic in log-frequency and never
extrapolate.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline, PchipInterpolator

from ._numerics import richardson_derivative
from .constants import C
from .errors import (
    AnomalousDispersionError,
    ConvergenceWarning,
    EvanescentWarning,
    FrequencyRangeError,
    ValidationError,
)

__all__ = [
    "Kind",
    "DispersionModel",
    "OpticalResponse",
    "KKReport",
    "eval_permittivity",
    "eval_permeability",
    "permittivity_derivative",
    "permeability_derivative",
    "refractive_index",
    "complex_index",
    "index_derivative",
    "group_index",
    "group_velocity",
    "optical_response",
    "kramers_kronig_residual",
]

# Relative step for finite differences on tabulated models.
TABLE_DIFF_STEP = 1e-4


class Kind(str, enum.Enum):
    LORENTZ = "lorentz"
    DRUDE = "drude"
    VACUUM = "vacuum"
    TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class DispersionModel:
    """A linear, isotropic, local response function eps(w) (or mu(w)).

    ``mu_model`` optionally carries the magnetic response as another
    ``DispersionModel`` of the same form; ``None`` means mu = 1.
    """

    kind: Kind
    omega_p: float = 0.0
    omega_0: float = 0.0
    gamma: float = 0.0
    table_omega: np.ndarray | None = None
    table_eps: np.ndarray | None = None
    mu_model: DispersionModel | None = None
    _interp: Any = field(default=None, init=False, repr=False)

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        for name in ("omega_p", "omega_0", "gamma"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value}")
            if value < 0:
                raise ValidationError(f"{name} must be non-negative, got {value}")
            object.__setattr__(self, name, value)
        if kind is Kind.DRUDE and self.omega_0 != 0.0:
            raise ValidationError("a Drude model has omega_0 = 0")
        if kind is Kind.TABULATED:
            self._build_table()
        if self.mu_model is not None and self.mu_model.mu_model is not None:
            raise ValidationError("a permeability model cannot carry its own mu_model")

    def _build_table(self):
        if self.table_omega is None or self.table_eps is None:
            raise ValidationError("tabulated model needs samples")
        omega = np.asarray(self.table_omega, dtype=float)
        eps = np.asarray(self.table_eps, dtype=complex)
        if omega.ndim != 1 or omega.shape != eps.shape or omega.size < 2:
            raise ValidationError("tabulated samples must be two or more (omega, eps) pairs")
        if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(eps))):
            raise ValidationError("tabulated samples must be finite")
        if np.any(omega <= 0):
            raise ValidationError("tabulated frequencies must be positive")
        if np.any(np.diff(omega) <= 0):
            raise ValidationError("tabulated frequencies must be strictly increasing")
        log_w = np.log(omega)
        interp = (PchipInterpolator(log_w, eps.real), PchipInterpolator(log_w, eps.imag))
        object.__setattr__(self, "table_omega", omega)
        object.__setattr__(self, "table_eps", eps)
        object.__setattr__(self, "_interp", interp)

    @classmethod
    def lorentz(cls, omega_p, omega_0, gamma, mu_model=None) -> DispersionModel:
        return cls(Kind.LORENTZ, omega_p, omega_0, gamma, mu_model=mu_model)

    @classmethod
    def drude(cls, omega_p, gamma, mu_model=None) -> DispersionModel:
        return cls(Kind.DRUDE, omega_p, 0.0, gamma, mu_model=mu_model)

    @classmethod
    def vacuum(cls) -> DispersionModel:
        return cls(Kind.VACUUM)

    @classmethod
    def tabulated(cls, omega, eps, mu_model=None) -> DispersionModel:
        return cls(Kind.TABULATED, table_omega=omega, table_eps=eps, mu_model=mu_model)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> DispersionModel:
        """Build a model from a material-file record.

        Accepts ``{kind, omega_p, omega_0, gamma}`` or
        ``{kind: "tabulated", samples: [[w, eps_R, eps_I], ...]}``, plus an
        optional ``mu`` record of the same shape.
        """
        if not isinstance(data, Mapping):
            raise ValidationError("material record must be a table/object")
        if "kind" not in data:
            raise ValidationError("material record is missing field 'kind'")
        try:
            kind = Kind(str(data["kind"]).lower())
        except ValueError:
            raise ValidationError(f"field 'kind': unknown model kind {data['kind']!r}") from None
        mu = data.get("mu")
        mu_model = cls.from_dict(mu) if mu is not None else None

        if kind is Kind.TABULATED:
            samples = data.get("samples")
            if samples is None:
                raise ValidationError("field 'samples' is required for a tabulated model")
            try:
                arr = np.asarray(samples, dtype=float)
            except (TypeError, ValueError):
                raise ValidationError("field 'samples' must be numeric [w, eps_R, eps_I] rows") from None
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise ValidationError("field 'samples' must be a list of [w, eps_R, eps_I] rows")
            return cls.tabulated(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], mu_model=mu_model)

        params = {}
        required = {
            Kind.LORENTZ: ("omega_p", "omega_0", "gamma"),
            Kind.DRUDE: ("omega_p", "gamma"),
            Kind.VACUUM: (),
        }[kind]
        for name in required:
            if name not in data:
                raise ValidationError(f"field '{name}' is required for kind {kind.value!r}")
            try:
                params[name] = float(data[name])
            except (TypeError, ValueError):
                raise ValidationError(f"field '{name}' must be a number, got {data[name]!r}") from None
            if not math.isfinite(params[name]) or params[name] < 0:
                raise ValidationError(f"field '{name}' must be finite and non-negative")
        if kind is Kind.VACUUM:
            return cls(Kind.VACUUM, mu_model=mu_model)
        if kind is Kind.DRUDE:
            return cls.drude(params["omega_p"], params["gamma"], mu_model=mu_model)
        return cls.lorentz(params["omega_p"], params["omega_0"], params["gamma"], mu_model=mu_model)

    def to_dict(self) -> dict:
        if self.kind is Kind.TABULATED:
            out = {
                "kind": self.kind.value,
                "samples": [[float(w), float(e.real), float(e.imag)] for w, e in zip(self.table_omega, self.table_eps)],
            }
        else:
            out = {"kind": self.kind.value, "omega_p": self.omega_p, "omega_0": self.omega_0, "gamma": self.gamma}
        if self.mu_model is not None:
            out["mu"] = self.mu_model.to_dict()
        return out

    @property
    def is_parametric(self) -> bool:
        return self.kind is not Kind.TABULATED

    @property
    def table_range(self) -> tuple[float, float]:
        if self.kind is not Kind.TABULATED:
            return (0.0, math.inf)
        return float(self.table_omega[0]), float(self.table_omega[-1])


@dataclass(frozen=True)
class OpticalResponse:
    omega: float
    eps: complex
    mu: complex
    n_R: float
    n_I: float
    v_g: float

    @property
    def eps_R(self) -> float:
        return self.eps.real

    @property
    def eps_I(self) -> float:
        return self.eps.imag

    @property
    def mu_R(self) -> float:
        return self.mu.real

    @property
    def mu_I(self) -> float:
        return self.mu.imag


def _check_omega(omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValidationError("frequency must be finite")
    return w


def _scalarize(value, like):
    return value[()] if np.ndim(like) == 0 else value


def _response(model: DispersionModel, w: np.ndarray) -> np.ndarray:
    if model.kind is Kind.VACUUM:
        return np.ones_like(w, dtype=complex)
    if model.kind is Kind.TABULATED:
        lo, hi = model.table_range
        aw = np.abs(w)
        # Tolerate rounding at the table edges.
        slack = 1e-12
        if np.any(aw < lo * (1 - slack)) or np.any(aw > hi * (1 + slack)):
            raise FrequencyRangeError(
                f"frequency outside tabulated range [{lo:g}, {hi:g}]"
            )
        log_w = np.log(np.clip(aw, lo, hi))
        re, im = model._interp
        eps = re(log_w) + 1j * im(log_w)
        return np.where(w < 0, np.conj(eps), eps)
    if model.omega_p == 0:
        return np.ones_like(w, dtype=complex)
    d_re = w * w - model.omega_0**2
    denom = d_re + 1j * model.gamma * w
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        eps = 1.0 - model.omega_p**2 / denom
        # On resonance the susceptibility is purely imaginary; real division
        # keeps it odd in w even when gamma w is subnormal.
        on_res = (d_re == 0) & (model.gamma * w != 0)
        if np.any(on_res):
            resonant = np.ones(np.shape(w), dtype=complex)
            resonant.imag = model.omega_p**2 / (model.gamma * w)
            eps = np.where(on_res, resonant, eps)
    return eps


def eval_permittivity(model: DispersionModel, omega):
    """Complex permittivity at ``omega``; vectorized over arrays."""
    w = _check_omega(omega)
    return _scalarize(_response(model, w), omega)


def eval_permeability(model: DispersionModel, omega):
    """Complex permeability; 1 unless the model carries a ``mu_model``."""
    w = _check_omega(omega)
    if model.mu_model is None:
        return _scalarize(np.ones_like(w, dtype=complex), omega)
    return _scalarize(_response(model.mu_model, w), omega)


def _response_derivative(model: DispersionModel, w: np.ndarray) -> np.ndarray:
    if model.kind is Kind.VACUUM:
        return np.zeros_like(w, dtype=complex)
    if model.kind is Kind.TABULATED:
        return richardson_derivative(lambda x: _response(model, x), w, TABLE_DIFF_STEP * np.abs(w))
    denom = w * w - model.omega_0**2 + 1j * model.gamma * w
    return model.omega_p**2 * (2.0 * w + 1j * model.gamma) / denom**2


def permittivity_derivative(model: DispersionModel, omega):
    """d eps / d omega: analytic for parametric kinds, Richardson otherwise."""
    w = _check_omega(omega)
    return _scalarize(_response_derivative(model, w), omega)


def permeability_derivative(model: DispersionModel, omega):
    w = _check_omega(omega)
    if model.mu_model is None:
        return _scalarize(np.zeros_like(w, dtype=complex), omega)
    return _scalarize(_response_derivative(model.mu_model, w), omega)


def _principal_root(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    root = np.sqrt(z)
    # Pin the branch on the negative real axis regardless of the sign of zero.
    neg_axis = (z.imag == 0) & (z.real < 0)
    if np.any(neg_axis):
        root = np.where(neg_axis, 1j * np.sqrt(np.abs(z.real)), root)
    return root


def refractive_index(eps, mu=1.0):
    """Principal square root of eps*mu, returned as ``(n_R, n_I)``.

    On the negative real axis the purely imaginary (evanescent) root is
    returned and an ``EvanescentWarning`` is issued.
    """
    z = np.asarray(eps, dtype=complex) * np.asarray(mu, dtype=complex)
    if np.any(z == 0):
        raise ValidationError("refractive index undefined for eps*mu = 0")
    if np.any((z.imag == 0) & (z.real < 0)):
        warnings.warn("eps*mu on the negative real axis: evanescent branch", EvanescentWarning, stacklevel=2)
    n = _principal_root(z)
    return _scalarize(n.real, z), _scalarize(n.imag, z)


def complex_index(model: DispersionModel, omega):
    """n(omega) = sqrt(eps mu), principal branch."""
    w = _check_omega(omega)
    n = _principal_root(_response(model, w) * _mu_or_one(model, w))
    return _scalarize(n, omega)


def _mu_or_one(model, w):
    if model.mu_model is None:
        return np.ones_like(w, dtype=complex)
    return _response(model.mu_model, w)


def index_derivative(model: DispersionModel, omega):
    """dn/d omega from the eps and mu derivatives: n' = (eps' mu + eps mu') / 2n."""
    w = _check_omega(omega)
    eps = _response(model, w)
    mu = _mu_or_one(model, w)
    d_eps = _response_derivative(model, w)
    d_mu = np.zeros_like(d_eps) if model.mu_model is None else _response_derivative(model.mu_model, w)
    n = _principal_root(eps * mu)
    return _scalarize((d_eps * mu + eps * d_mu) / (2.0 * n), omega)


def group_index(model: DispersionModel, omega):
    """d(omega n_R)/d omega evaluated from the model derivatives."""
    w = _check_omega(omega)
    n = complex_index(model, w)
    dn = index_derivative(model, w)
    return _scalarize(np.real(n + w * dn), omega)


def group_velocity(model: DispersionModel, omega: float, h: float | None = None) -> float:
    """c / [d(omega n_R)/d omega] by Richardson-extrapolated central differences.

    The default step is ``1e-3 * omega``, shrunk near a resonance so the
    stencil never straddles it.
    """
    omega = float(omega)
    if not math.isfinite(omega) or omega <= 0:
        raise ValidationError("group velocity needs omega > 0")
    if h is None:
        h = _default_step(model, omega)
    if not 0 < h < omega:
        raise ValidationError("finite-difference step must satisfy 0 < h < omega")

    def omega_n(x):
        return x * np.real(complex_index(model, x))

    slope = float(richardson_derivative(omega_n, omega, h))
    if abs(slope) < 1e-12:
        raise AnomalousDispersionError(f"d(omega n_R)/d omega = {slope:.3e} at omega = {omega:g}")
    return C / slope


def _default_step(model: DispersionModel, omega: float) -> float:
    h = 1e-3 * omega
    for m in (model, model.mu_model):
        if m is not None and m.kind is Kind.LORENTZ and m.omega_p > 0:
            scale = max(abs(omega - m.omega_0), m.gamma)
            if scale > 0:
                h = min(h, 0.05 * scale)
    return h


def optical_response(model: DispersionModel, omega: float, h: float | None = None) -> OpticalResponse:
    """Bundle eps, mu, n and v_g at one frequency.

    ``v_g`` is NaN where the group velocity is singular.
    """
    eps = complex(eval_permittivity(model, omega))
    mu = complex(eval_permeability(model, omega))
    n = complex(_principal_root(eps * mu))
    try:
        v_g = group_velocity(model, omega, h)
    except AnomalousDispersionError:
        v_g = math.nan
    return OpticalResponse(float(omega), eps, mu, n.real, n.imag, v_g)


@dataclass(frozen=True)
class KKReport:
    """Outcome of a Kramers-Kronig consistency check.

    ``residual`` is evaluated on the interior grid points ``omega``;
    the two end points are excluded because a truncated principal-value
    integral is log-singular there.
    """

    max_residual: float
    omega: np.ndarray
    residual: np.ndarray
    refinement_difference: float
    converged: bool
    causal: bool


def _kk_residual_on(model: DispersionModel, grid: np.ndarray, chunk: int = 256) -> np.ndarray:
    """eps_R - 1 - (2/pi) P int w' eps_I(w') / (w'^2 - w^2) dw' at interior grid points.

    The singular part is removed by subtracting w eps_I(w) / (w'^2 - w^2),
    whose principal value over [w_min, w_max] is known in closed form; the
    smooth remainder is integrated with Simpson's rule in log-frequency.
    """
    eps = eval_permittivity(model, grid)
    eps_i = eps.imag
    weighted = grid * eps_i
    u = np.log(grid)
    lo, hi = grid[0], grid[-1]

    inner = np.arange(1, grid.size - 1)
    # Limit of the subtracted integrand at w' = w: d(w eps_I)/dw / (2w).
    if model.is_parametric:
        spacing = np.minimum(grid[inner] - grid[inner - 1], grid[inner + 1] - grid[inner])
        step = np.minimum(1e-3 * grid[inner], 0.25 * spacing)
        slope = richardson_derivative(lambda x: x * eval_permittivity(model, x).imag, grid[inner], step)
    else:
        # Pchip flattens its slope at extrema; a C2 spline through the same
        # samples gives a far better derivative for this single term.
        spline = CubicSpline(u, weighted)
        slope = spline(u[inner], 1) / grid[inner]

    out = np.empty(inner.size)
    for start in range(0, inner.size, chunk):
        idx = inner[start : start + chunk]
        a = grid[idx][:, None]
        fa = eps_i[idx][:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            g = (weighted[None, :] - a * fa) / (grid[None, :] ** 2 - a**2)
        rows = np.arange(idx.size)
        g[rows, idx] = slope[start : start + idx.size] / (2.0 * grid[idx])
        regular = simpson(g * grid[None, :], x=u, axis=1)
        a = a[:, 0]
        fa = fa[:, 0]
        subtracted = 0.5 * fa * (np.log(np.abs((hi - a) / (hi + a))) - np.log(np.abs((lo - a) / (lo + a))))
        out[start : start + idx.size] = eps.real[idx] - 1.0 - (2.0 / np.pi) * (regular + subtracted)
    return out


def kramers_kronig_residual(model: DispersionModel, grid, tol: float = 1e-4) -> KKReport:
    """Check the Kramers-Kronig relation for eps on a positive, increasing grid.

    A second evaluation on every other grid point estimates the
    discretization error; if that estimate is comparable to the residual a
    ``ConvergenceWarning`` is issued. ``causal`` is ``max_residual <= tol``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 5:
        raise ValidationError("Kramers-Kronig grid needs at least 5 points")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValidationError("Kramers-Kronig grid must be positive and strictly increasing")
    if grid.size % 2 == 0:
        # Odd length keeps the coarse grid aligned with both end points.
        grid = np.append(grid, grid[-1] * (grid[-1] / grid[-2]))
        if model.kind is Kind.TABULATED and grid[-1] > model.table_range[1]:
            grid = grid[:-2]

    residual = _kk_residual_on(model, grid)
    coarse = _kk_residual_on(model, grid[::2])
    # Interior points of the coarse grid sit at odd positions of the fine interior.
    common = residual[1::2][: coarse.size]
    refinement = float(np.max(np.abs(common - coarse))) if coarse.size else math.inf

    max_res = float(np.max(np.abs(residual)))
    converged = refinement <= max(tol, 0.5 * max_res)
    if not converged:
        warnings.warn(
            f"Kramers-Kronig residual not converged: refinement changes it by {refinement:.3e}",
            ConvergenceWarning,
            stacklevel=2,
        )
    return KKReport(
        max_residual=max_res,
        omega=grid[1:-1],
        residual=residual,
        refinement_difference=refinement,
        converged=converged,
        causal=max_res <= tol,
    )
