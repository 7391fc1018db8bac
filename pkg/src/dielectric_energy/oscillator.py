"""Damped harmonic oscillator parameters and an exact one-step propagator.

Both the deterministic driven-oscillator ledger and the Langevin ensemble
integrate

    x'' + gamma x' + omega_0**2 x = f(t)

with the same scheme: the homogeneous part is advanced by the exact matrix
exponential of the linear system, and the forcing enters through a
quadrature of the Duhamel integral over each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.signal import lfilter

from .errors import ValidationError

__all__ = ["OscillatorParams", "DampedPropagator"]


@dataclass(frozen=True)
class OscillatorParams:
    """One species of bound charges.

    ``omega_p`` fixes the number density through
    ``omega_p**2 = 4 pi N charge**2 / m``; ``omega_c`` is the hard UV cutoff
    of the fluctuating force (infinite for purely classical driving).
    """

    omega_0: float
    gamma: float
    m: float = 1.0
    omega_c: float = math.inf
    omega_p: float = 0.0
    charge: float = 1.0

    def __post_init__(self):
        for name in ("omega_0", "gamma", "m", "omega_p", "charge"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "omega_c", float(self.omega_c))
        if self.m <= 0:
            raise ValidationError("m must be positive")
        if self.omega_0 <= 0:
            raise ValidationError("omega_0 must be positive")
        if self.gamma < 0:
            raise ValidationError("gamma must be non-negative")
        if self.gamma >= 2 * self.omega_0:
            raise ValidationError("oscillator must be underdamped: gamma < 2 omega_0")
        if not self.omega_c > 10 * self.omega_0:
            raise ValidationError("omega_c must exceed 10 omega_0")
        if self.omega_p < 0:
            raise ValidationError("omega_p must be non-negative")
        if self.charge == 0:
            raise ValidationError("charge must be non-zero")

    @property
    def omega_1(self) -> float:
        """Damped oscillation frequency sqrt(omega_0**2 - gamma**2 / 4)."""
        return math.sqrt(self.omega_0**2 - 0.25 * self.gamma**2)

    @property
    def density(self) -> float:
        """Number density N of oscillators implied by omega_p."""
        return self.omega_p**2 * self.m / (4.0 * math.pi * self.charge**2)


class DampedPropagator:
    """Advance ``(x, v)`` by a fixed step ``dt`` exactly for the free motion.

    ``kernel(s)`` returns the response at the end of the step to a unit
    force impulse applied a time ``s`` before the end, i.e. the second
    column of ``exp(A s)``.
    """

    def __init__(self, omega_0: float, gamma: float, dt: float):
        if not dt > 0:
            raise ValidationError("time step must be positive")
        self.omega_0 = float(omega_0)
        self.gamma = float(gamma)
        self.dt = float(dt)
        self.matrix = expm(self._generator() * self.dt)

    def _generator(self) -> np.ndarray:
        return np.array([[0.0, 1.0], [-self.omega_0**2, -self.gamma]])

    def kernel(self, s) -> np.ndarray:
        """Impulse response columns, shape ``(len(s), 2)``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        a = self._generator()
        return np.array([expm(a * si)[:, 1] for si in s])

    def duhamel_weights(self, nodes, weights) -> np.ndarray:
        """Quadrature weights mapping forcing samples to the state increment.

        ``nodes`` are offsets from the start of the step in ``[0, dt]`` and
        ``weights`` the matching quadrature weights on that interval.
        Returns an array of shape ``(len(nodes), 2)``.
        """
        nodes = np.asarray(nodes, dtype=float)
        weights = np.asarray(weights, dtype=float)
        return weights[:, None] * self.kernel(self.dt - nodes)

    def propagate(self, inc_x: np.ndarray, inc_v: np.ndarray, x0=0.0, v0=0.0) -> tuple[np.ndarray, np.ndarray]:
        """Iterate ``y[n+1] = M y[n] + (inc_x[n], inc_v[n])`` along the last axis.

        Returns ``(x, v)`` with one more sample than the increments (the
        initial state first). By Cayley-Hamilton each component obeys
        y[n+1] - tr(M) y[n] + det(M) y[n-1] = u[n] + (M - tr(M)) u[n-1],
        which runs as an IIR filter; the initial state enters as the input
        one step before the first increment.
        """
        inc_x = np.asarray(inc_x, dtype=float)
        inc_v = np.asarray(inc_v, dtype=float)
        shape = inc_x.shape[:-1] + (inc_x.shape[-1] + 1,)
        ux = np.empty(shape)
        uv = np.empty(shape)
        ux[..., 0] = x0
        uv[..., 0] = v0
        ux[..., 1:] = inc_x
        uv[..., 1:] = inc_v
        (m00, m01), (m10, m11) = self.matrix
        trace = m00 + m11
        det = m00 * m11 - m01 * m10
        sx = ux.copy()
        sv = uv.copy()
        sx[..., 1:] += (m00 - trace) * ux[..., :-1] + m01 * uv[..., :-1]
        sv[..., 1:] += m10 * ux[..., :-1] + (m11 - trace) * uv[..., :-1]
        a = [1.0, -trace, det]
        return lfilter([1.0], a, sx, axis=-1), lfilter([1.0], a, sv, axis=-1)

    def run(self, increments: np.ndarray, x0: float = 0.0, v0: float = 0.0) -> np.ndarray:
        """Iterate ``y[n+1] = M y[n] + increments[n]``.

        ``increments`` has shape ``(n_steps, 2)`` or ``(n_steps, 2, batch)``;
        the result includes the initial state and has one more row.
        """
        inc = np.moveaxis(np.asarray(increments, dtype=float), 0, -1)
        x, v = self.propagate(inc[0], inc[1], x0, v0)
        return np.moveaxis(np.stack([x, v]), -1, 0)
