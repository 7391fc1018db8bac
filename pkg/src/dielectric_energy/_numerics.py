"""Small numerical helpers: Richardson differentiation and checked quadrature."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import QuadratureError


def richardson_derivative(f: Callable, x, h):
    """Central difference with one Richardson step, error O(h**4).

    ``f`` may be real or complex valued and vectorized over ``x``.
    """
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)

    def central(step):
        return (f(x + step) - f(x - step)) / (2.0 * step)

    return (4.0 * central(h / 2.0) - central(h)) / 3.0


def checked_quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    rtol: float = 1e-10,
    atol: float = 0.0,
    points: Sequence[float] | None = None,
    limit: int = 500,
    **kwargs,
) -> tuple[float, float]:
    """``scipy.integrate.quad`` that raises instead of warning.

    Breakpoints strictly inside ``(a, b)`` split the range into panels that
    are integrated separately, which also works on infinite ranges where
    QUADPACK refuses ``points``.
    """
    edges = [a]
    if points is not None:
        inner = sorted(p for p in set(points) if a < p < b)
        edges.extend(inner)
    edges.append(b)

    total = 0.0
    error = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        out = quad(f, lo, hi, epsabs=atol, epsrel=rtol, limit=limit, full_output=1, **kwargs)
        total += out[0]
        error += out[1]
    # QUADPACK roundoff messages often accompany good results; gate on the
    # error estimate only.
    if not np.isfinite(total) or error > 10.0 * max(atol, rtol * abs(total)):
        raise QuadratureError(
            f"quadrature error estimate {error:.3e} exceeds tolerance "
            f"(value {total:.6e}, rtol {rtol:g}, atol {atol:g})"
        )
    return total, error
