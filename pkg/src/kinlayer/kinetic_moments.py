"""Closed-form moments of the kinetic Maxwellian and the half-line flux integrals.

The Maxwellian of a layer with depth fraction ``l``, total depth ``h`` and
velocity ``u`` is::

    M(xi) = l / (g pi) * sqrt((2 g h - (xi - u)^2)_+)
          = (l h / c) * chi0((xi - u) / c),      c = sqrt(g h / 2),

with ``chi0(z) = sqrt(1 - z^2 / 4) / pi`` supported on ``[-2, 2]``. Every
function here accepts scalars or numpy arrays and broadcasts.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

# Below this value of 2 g h the Maxwellian is treated as vacuum.
VACUUM_THRESHOLD = np.sqrt(np.finfo(float).tiny)


class ChiPartialMoments(NamedTuple):
    """Integrals of ``z^k chi0(z)`` over an interval, k = 0, 1, 2."""

    m0: np.ndarray | float
    m1: np.ndarray | float
    m2: np.ndarray | float


class HalfFluxes(NamedTuple):
    """Mass and momentum fluxes carried by positive and negative kinetic velocities."""

    f_h_plus: np.ndarray | float
    f_h_minus: np.ndarray | float
    f_q_plus: np.ndarray | float
    f_q_minus: np.ndarray | float


def chi0(z):
    """The compactly supported profile ``sqrt(1 - z^2/4) / pi``."""
    z = np.asarray(z, dtype=float)
    return np.sqrt(np.maximum(1.0 - 0.25 * z * z, 0.0)) / np.pi


def _antiderivatives(z):
    # Substitution z = 2 sin(theta), theta in [-pi/2, pi/2].
    s = np.clip(0.5 * np.asarray(z, dtype=float), -1.0, 1.0)
    theta = np.arcsin(s)
    cos = np.sqrt(np.maximum(1.0 - s * s, 0.0))
    p0 = (theta + s * cos) / np.pi
    p1 = -(4.0 / (3.0 * np.pi)) * cos**3
    # sin(4 theta) = 4 s cos (1 - 2 s^2)
    p2 = (theta - s * cos * (1.0 - 2.0 * s * s)) / np.pi
    return p0, p1, p2


def chi_partial_moments(a, b) -> ChiPartialMoments:
    """Exact ``int_a^b z^k chi0(z) dz`` for k = 0, 1, 2.

    The interval is clipped to the support ``[-2, 2]``; an empty clipped
    interval gives zeros.

    Raises
    ------
    ValueError
        If ``a > b`` anywhere.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a > b):
        raise ValueError("chi_partial_moments requires a <= b")
    a_c = np.clip(a, -2.0, 2.0)
    b_c = np.clip(b, -2.0, 2.0)
    pa = _antiderivatives(a_c)
    pb = _antiderivatives(b_c)
    m = [hi - lo for hi, lo in zip(pb, pa)]
    return ChiPartialMoments(*(_scalar(v) for v in m))


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def maxwellian_density(h, u, l_alpha, g, xi):
    """Pointwise kinetic density ``l / (g pi) * sqrt((2 g h - (xi - u)^2)_+)``."""
    h = np.asarray(h, dtype=float)
    arg = 2.0 * g * h - (np.asarray(xi, dtype=float) - u) ** 2
    return _scalar(l_alpha / (g * np.pi) * np.sqrt(np.maximum(arg, 0.0)))


def half_fluxes(h, u, l_alpha, g) -> HalfFluxes:
    """Kinetic fluxes split by the sign of the kinetic velocity.

    With ``c = sqrt(g h / 2)`` and ``z0 = -u / c`` the positive part integrates
    over ``z in [z0, 2]`` and the negative part over ``[-2, z0]``::

        f_h = l h (u m0 + c m1)
        f_q = l h (u^2 m0 + 2 u c m1 + c^2 m2)

    The two parts sum to ``l h u`` and ``l (h u^2 + g h^2 / 2)``.
    """
    h = np.asarray(h, dtype=float)
    u = np.asarray(u, dtype=float)
    h, u = np.broadcast_arrays(h, u)
    wet = 2.0 * g * h > VACUUM_THRESHOLD
    c = np.sqrt(0.5 * g * np.where(wet, h, 0.0))
    z0 = np.zeros_like(c)
    np.divide(-u, c, out=z0, where=wet)
    z0 = np.clip(z0, -2.0, 2.0)

    plus = chi_partial_moments(z0, np.full_like(z0, 2.0))
    minus = chi_partial_moments(np.full_like(z0, -2.0), z0)
    lh = np.where(wet, l_alpha * h, 0.0)

    def mass(m):
        return lh * (u * m.m0 + c * m.m1)

    def mom(m):
        return lh * (u * u * m.m0 + 2.0 * u * c * m.m1 + c * c * m.m2)

    # Each half-line integrand has a fixed sign; clamp rounding on tiny intervals.
    return HalfFluxes(
        _scalar(np.maximum(mass(plus), 0.0)),
        _scalar(np.minimum(mass(minus), 0.0)),
        _scalar(np.maximum(mom(plus), 0.0)),
        _scalar(np.maximum(mom(minus), 0.0)),
    )
