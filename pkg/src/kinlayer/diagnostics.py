"""Energy, conservation and well-balance instrumentation, plus vertical velocity recovery."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import (
    FlowState,
    Grid1D,
    LayerPartition,
    PhysicalParams,
    Topography,
    check_compatible,
    interface_elevations,
    velocities,
)
from .euler import ExchangeField, euler_step, explicit_step
from .reconstruction import extend_with_ghosts, reconstruct


@dataclass(frozen=True)
class EnergyBudget:
    time: float
    total_mass: float
    total_momentum: float
    total_energy: float
    step_energy_delta: float
    topo_error_bound: float

    def as_dict(self) -> dict:
        return asdict(self)


def layer_energies(state: FlowState, topo: Topography, layers: LayerPartition, g: float, dry_tol: float = 0.0) -> np.ndarray:
    """``E_a = h_a u_a^2 / 2 + g h_a h / 2 + g z_b h_a`` for all layers and cells."""
    hl = layers.fractions[:, None] * state.h[None, :]
    u = velocities(state, layers, dry_tol)
    return 0.5 * hl * u**2 + 0.5 * g * hl * state.h[None, :] + g * topo.z_b[None, :] * hl


def layer_energy(state: FlowState, topo: Topography, layers: LayerPartition, g: float, alpha: int, i: int, dry_tol: float = 0.0) -> float:
    if not (0 <= alpha < layers.count and 0 <= i < state.cell_count):
        raise IndexError(f"layer/cell index ({alpha}, {i}) out of range")
    return float(layer_energies(state, topo, layers, g, dry_tol)[alpha, i])


def total_mass(state: FlowState, grid: Grid1D) -> float:
    return float(np.dot(grid.widths, state.h))


def total_momentum(state: FlowState, grid: Grid1D) -> float:
    return float(np.dot(grid.widths, state.q.sum(axis=0)))


def total_energy(state: FlowState, grid: Grid1D, topo: Topography, layers: LayerPartition, params: PhysicalParams) -> float:
    return float(np.dot(grid.widths, layer_energies(state, topo, layers, params.g, params.dry_tol).sum(axis=0)))


def topo_error_bound(
    state: FlowState,
    grid: Grid1D,
    topo: Topography,
    layers: LayerPartition,
    params: PhysicalParams,
    dt: float,
    constant: float = 1.0,
) -> float:
    """Computable part of the topography error term of the discrete energy inequality.

    ``C sum_i dx_i (sigma_i v_m)^2 g ((h_i - h_{i+1/2-})^2 + (h_i - h_{i-1/2+})^2)``
    with ``sigma_i = dt / dx_i`` and
    ``v_m = max (|u| + 2 sqrt(2 g h))``. The ``dx_i`` weight puts the bound
    in the units of the total energy. Zero on flat topography.
    """
    if topo.is_flat:
        return 0.0
    he, _, ze = extend_with_ghosts(state, grid, topo, layers, params.dry_tol)
    st = reconstruct(he[:-1], he[1:], ze[:-1], ze[1:])
    h = state.h
    # cell i: right edge i + 1 (its left-reconstructed depth), left edge i
    gap_right = h - st.h_left_star[1:]
    gap_left = h - st.h_right_star[:-1]
    u = np.abs(velocities(state, layers, params.dry_tol))
    v_m = float(np.max(u + 2.0 * np.sqrt(2.0 * params.g * h)[None, :]))
    sigma = dt / grid.widths
    terms = grid.widths * (sigma * v_m) ** 2 * params.g * (gap_right**2 + gap_left**2)
    return constant * float(terms.sum())


def energy_budget(
    prev: FlowState,
    nxt: FlowState,
    grid: Grid1D,
    topo: Topography,
    layers: LayerPartition,
    params: PhysicalParams,
    constant: float = 1.0,
) -> EnergyBudget:
    """Totals of ``nxt`` and the energy change and topography bound of the step ``prev -> nxt``."""
    check_compatible(prev, grid, topo, layers)
    check_compatible(nxt, grid, topo, layers)
    e_prev = total_energy(prev, grid, topo, layers, params)
    e_next = total_energy(nxt, grid, topo, layers, params)
    dt = nxt.time - prev.time
    bound = topo_error_bound(prev, grid, topo, layers, params, dt, constant) if dt > 0 else 0.0
    return EnergyBudget(
        time=nxt.time,
        total_mass=total_mass(nxt, grid),
        total_momentum=total_momentum(nxt, grid),
        total_energy=e_next,
        step_energy_delta=e_next - e_prev,
        topo_error_bound=bound,
    )


def well_balance_residual(state: FlowState, grid: Grid1D, topo: Topography, layers: LayerPartition, params: PhysicalParams) -> float:
    """Max-norm change of ``(h, q)`` over one Euler step."""
    nxt = euler_step(state, grid, topo, layers, params)
    return float(max(np.max(np.abs(nxt.h - state.h)), np.max(np.abs(nxt.q - state.q))))


def lake_at_rest(surface: float, topo: Topography, layers: LayerPartition) -> FlowState:
    h = np.maximum(surface - topo.z_b, 0.0)
    return FlowState.at_rest(h, layers)


def vertical_velocity(
    state: FlowState,
    prev_state: FlowState,
    grid: Grid1D,
    topo: Topography,
    layers: LayerPartition,
    dt: float,
    params: PhysicalParams | None = None,
    exchange: ExchangeField | None = None,
) -> np.ndarray:
    """Layer vertical velocities ``w[a, i]`` from the layer-integrated divergence identity.

    With ``Z_a = (z_{a+1/2}^2 - z_{a-1/2}^2) / 2``::

        h_a w_a = (Z_a^new - Z_a^old) / dt + d/dx (Z_a u_a) - z_{a+1/2} G_{a+1/2} + z_{a-1/2} G_{a-1/2}

    The flux derivative is a centred difference on ``state``, interface
    elevations are taken from ``state``, and ``G`` is the exchange field of the
    step ``prev_state -> state`` (recomputed from ``prev_state`` when not given).
    Dry cells get ``w = 0``.
    """
    params = params or PhysicalParams()
    if exchange is None:
        exchange = explicit_step(prev_state, grid, topo, layers, params, dt).exchange
    z_new = interface_elevations(state, topo, layers)
    z_old = interface_elevations(prev_state, topo, layers)
    big_z_new = 0.5 * (z_new[1:] ** 2 - z_new[:-1] ** 2)
    big_z_old = 0.5 * (z_old[1:] ** 2 - z_old[:-1] ** 2)
    flux = big_z_new * velocities(state, layers, params.dry_tol)

    x = grid.centers
    if grid.boundary == "periodic":
        f_l, f_r = np.roll(flux, 1, axis=1), np.roll(flux, -1, axis=1)
        dist = grid.widths + 0.5 * (np.roll(grid.widths, 1) + np.roll(grid.widths, -1))
    else:
        # mirrored ghost: same Z, opposite velocity
        f_l = np.concatenate([-flux[:, :1], flux[:, :-1]], axis=1)
        f_r = np.concatenate([flux[:, 1:], -flux[:, -1:]], axis=1)
        xe = np.concatenate([[2 * grid.edges[0] - x[0]], x, [2 * grid.edges[-1] - x[-1]]])
        dist = xe[2:] - xe[:-2]
    div = (f_r - f_l) / dist

    g_full = exchange.full
    rhs = (big_z_new - big_z_old) / dt + div - z_new[1:] * g_full[1:] + z_new[:-1] * g_full[:-1]
    hl = layers.fractions[:, None] * state.h[None, :]
    w = np.zeros_like(rhs)
    np.divide(rhs, hl, out=w, where=np.broadcast_to(state.h > params.dry_tol, w.shape))
    return w
