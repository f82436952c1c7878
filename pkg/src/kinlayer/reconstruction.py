"""Hydrostatic reconstruction and per-layer kinetic interface fluxes.

At the interface between cells ``i`` (left) and ``i + 1`` (right) the bottom is
raised to ``z* = max(z_i, z_{i+1})`` and depths are cut to
``h_i- = (h_i + z_i - z*)_+`` and ``h_{i+1}+ = (h_{i+1} + z_{i+1} - z*)_+``.
The mass flux is the upwind kinetic flux of these reconstructed states. The
momentum flux seen by each neighbour adds the first moment of the topography
correction ``(xi - u)(M_cell - M_reconstructed)``, which is exactly
``g l (h_cell^2 - h_reconstructed^2) / 2``; the two sides differ only where the
bottom is not locally flat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FlowState, Grid1D, LayerPartition, Topography, velocities
from .kinetic_moments import half_fluxes


@dataclass(frozen=True)
class InterfaceStates:
    h_left_star: np.ndarray
    h_right_star: np.ndarray
    z_star: np.ndarray


@dataclass(frozen=True)
class InterfaceFluxes:
    """Per-layer fluxes, arrays of shape ``(N, interfaces)``.

    ``f_q_left`` enters the update of the left cell, ``f_q_right`` the update
    of the right cell. ``f_h`` is shared by both.
    """

    f_h: np.ndarray
    f_q_left: np.ndarray
    f_q_right: np.ndarray


def reconstruct(h_left, h_right, z_left, z_right) -> InterfaceStates:
    z_left = np.asarray(z_left, dtype=float)
    z_right = np.asarray(z_right, dtype=float)
    z_star = np.maximum(z_left, z_right)
    h_left = np.asarray(h_left, dtype=float)
    h_right = np.asarray(h_right, dtype=float)
    # the upper clamp guards rounding in h + z - z* when z = z*
    h_ls = np.minimum(np.maximum(h_left + z_left - z_star, 0.0), h_left)
    h_rs = np.minimum(np.maximum(h_right + z_right - z_star, 0.0), h_right)
    return InterfaceStates(h_ls, h_rs, z_star)


def interface_fluxes(
    h_left, u_left, h_right, u_right, states: InterfaceStates, layers: LayerPartition, g: float
) -> InterfaceFluxes:
    """Kinetic fluxes at interfaces from donor-cell velocities and reconstructed depths.

    Parameters
    ----------
    h_left, h_right : array, shape (m,)
        Total depths of the cells left and right of each interface.
    u_left, u_right : array, shape (N, m)
        Layer velocities of those cells.
    """
    lf = layers.fractions[:, None]
    h_ls = np.asarray(states.h_left_star)[None, :]
    h_rs = np.asarray(states.h_right_star)[None, :]
    from_left = half_fluxes(h_ls, u_left, lf, g)
    from_right = half_fluxes(h_rs, u_right, lf, g)

    f_h = from_left.f_h_plus + from_right.f_h_minus
    f_q = from_left.f_q_plus + from_right.f_q_minus
    h_left = np.asarray(h_left, dtype=float)[None, :]
    h_right = np.asarray(h_right, dtype=float)[None, :]
    corr_left = 0.5 * g * lf * (h_left**2 - h_ls**2)
    corr_right = 0.5 * g * lf * (h_right**2 - h_rs**2)
    return InterfaceFluxes(f_h, f_q + corr_left, f_q + corr_right)


def extend_with_ghosts(state: FlowState, grid: Grid1D, topo: Topography, layers: LayerPartition, dry_tol: float):
    """Cell arrays padded by one ghost cell on each side.

    Periodic grids wrap around. Reflective grids mirror depth and bottom and
    negate the layer velocities.

    Returns ``(h, u, z)`` with shapes ``(n+2,)``, ``(N, n+2)``, ``(n+2,)``.
    """
    h, z = state.h, topo.z_b
    u = velocities(state, layers, dry_tol)
    if grid.boundary == "periodic":
        he = np.concatenate([h[-1:], h, h[:1]])
        ze = np.concatenate([z[-1:], z, z[:1]])
        ue = np.concatenate([u[:, -1:], u, u[:, :1]], axis=1)
    else:
        he = np.concatenate([h[:1], h, h[-1:]])
        ze = np.concatenate([z[:1], z, z[-1:]])
        ue = np.concatenate([-u[:, :1], u, -u[:, -1:]], axis=1)
    return he, ue, ze


def grid_fluxes(state: FlowState, grid: Grid1D, topo: Topography, layers: LayerPartition, g: float, dry_tol: float):
    """Reconstructed states and fluxes at all ``n + 1`` cell edges.

    Edge ``k`` separates extended cells ``k`` and ``k + 1``, so real cell ``i``
    has left edge ``i`` and right edge ``i + 1``. On periodic grids edges 0 and
    ``n`` are the same physical interface and carry identical values.
    """
    he, ue, ze = extend_with_ghosts(state, grid, topo, layers, dry_tol)
    states = reconstruct(he[:-1], he[1:], ze[:-1], ze[1:])
    fluxes = interface_fluxes(he[:-1], ue[:, :-1], he[1:], ue[:, 1:], states, layers, g)
    return states, fluxes
