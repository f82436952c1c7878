"""IMEX time step of the layer-averaged Euler system.

One step is: time-step selection from the CFL bounds, an explicit kinetic
update of every layer with hydrostatic reconstruction, assembly of the mass
exchange rates between layers, and an implicit per-column solve for the
momentum exchanged through layer interfaces.

Layer and interface indices are 0-based here: layer ``a`` is layer ``a + 1``
of the usual 1-based numbering and interior interface ``a`` sits between layers ``a`` and
``a + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FlowState, Grid1D, LayerPartition, PhysicalParams, Topography, check_compatible, velocities
from .reconstruction import InterfaceFluxes, InterfaceStates, grid_fluxes
from .tridiag import solve_tridiagonal, tridiagonal_to_dense


class CFLViolation(ValueError):
    """A user-supplied time step exceeds the hyperbolic stability bound."""


@dataclass(frozen=True)
class ExchangeField:
    """Mass exchange rates at interior layer interfaces, shape ``(N - 1, cells)``."""

    interior: np.ndarray

    @property
    def full(self) -> np.ndarray:
        """Rates including the zero bottom and surface rows, shape ``(N + 1, cells)``."""
        n = self.interior.shape[-1]
        zero = np.zeros((1, n))
        return np.concatenate([zero, self.interior.reshape(-1, n), zero])

    def divergence(self) -> np.ndarray:
        """Per-layer net exchange ``G_{a+1/2} - G_{a-1/2}``; sums to zero over layers."""
        return np.diff(self.full, axis=0)


@dataclass(frozen=True)
class VerticalSystem:
    """Diagonals of ``I + dt G_N`` for every column, each of shape ``(N, cells)``."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def dense(self, i: int) -> np.ndarray:
        return tridiagonal_to_dense(self.sub[:, i], self.diag[:, i], self.sup[:, i])


@dataclass(frozen=True)
class ExplicitStep:
    h_star: np.ndarray
    q_star: np.ndarray
    h_new: np.ndarray
    exchange: ExchangeField
    dt: float
    interfaces: InterfaceStates
    fluxes: InterfaceFluxes


@dataclass(frozen=True)
class EulerStepResult:
    state: FlowState
    explicit: ExplicitStep

    @property
    def dt(self) -> float:
        return self.explicit.dt


def cfl_bound(state: FlowState, grid: Grid1D, layers: LayerPartition, params: PhysicalParams) -> float:
    """Largest admissible step before the safety factor; ``inf`` on a dry domain.

    Minimum of the flat-bottom bound ``dx / (2 (|u| + sqrt(2gh)))`` and the
    topography bound ``dx / (|u| + 2 sqrt(2gh))``.
    """
    u = np.abs(velocities(state, layers, params.dry_tol))
    a = np.sqrt(2.0 * params.g * state.h)[None, :]
    dx = grid.widths[None, :]
    with np.errstate(divide="ignore"):
        flat = 0.5 * dx / (u + a)
        topo = dx / (u + 2.0 * a)
    return float(min(flat.min(), topo.min()))


def compute_dt(state: FlowState, grid: Grid1D, topo: Topography | None, layers: LayerPartition, params: PhysicalParams) -> float:
    bound = cfl_bound(state, grid, layers, params)
    if not np.isfinite(bound):
        return params.dt_max
    return params.cfl_safety * bound


def upwind_interface_velocity(u_below, u_above, rate):
    """Velocity carried through a layer interface: from below if ``G <= 0``, else from above."""
    return np.where(np.asarray(rate) > 0.0, u_above, u_below)


def explicit_step(
    state: FlowState,
    grid: Grid1D,
    topo: Topography,
    layers: LayerPartition,
    params: PhysicalParams,
    dt: float,
) -> ExplicitStep:
    """Explicit horizontal update of every layer and the resulting exchange rates.

    Raises
    ------
    CFLViolation
        If ``dt`` exceeds :func:`cfl_bound`.
    """
    check_compatible(state, grid, topo, layers)
    bound = cfl_bound(state, grid, layers, params)
    if not dt > 0 or dt > bound * (1.0 + 1e-12):
        raise CFLViolation(f"time step {dt!r} rejected: CFL bound is {bound!r}")

    states, fluxes = grid_fluxes(state, grid, topo, layers, params.g, params.dry_tol)
    sigma = dt / grid.widths
    lf = layers.fractions[:, None]

    mass_diff = fluxes.f_h[:, 1:] - fluxes.f_h[:, :-1]
    h_star = lf * state.h[None, :] - sigma * mass_diff
    q_star = state.q - sigma * (fluxes.f_q_left[:, 1:] - fluxes.f_q_right[:, :-1])
    h_new = h_star.sum(axis=0)

    # dx G_{a+1/2} = sum_{j<=a} (D_j - l_j sum_p D_p), interior interfaces only
    partial = mass_diff - lf * mass_diff.sum(axis=0, keepdims=True)
    rates = np.cumsum(partial, axis=0)[:-1] / grid.widths[None, :]
    return ExplicitStep(h_star, q_star, h_new, ExchangeField(rates), dt, states, fluxes)


def assemble_vertical_system(rates, h_new, layers: LayerPartition, dt: float) -> VerticalSystem:
    """Diagonals of ``A = I + dt G_N`` from interior rates of shape ``(N - 1, cells)``.

    Row ``a`` couples layer ``a`` to its neighbours through the upwind choice
    of interface velocity: a positive rate carries the velocity of the layer
    above, a non-positive one the velocity of the layer below.
    """
    if isinstance(rates, ExchangeField):
        rates = rates.interior
    h_new = np.atleast_1d(np.asarray(h_new, dtype=float))
    rates = np.asarray(rates, dtype=float).reshape(layers.count - 1, h_new.size)
    n = h_new.size
    zero = np.zeros((1, n))
    full = np.concatenate([zero, rates, zero])
    g_pos = np.maximum(full, 0.0)
    g_neg = np.minimum(full, 0.0)
    hl = layers.fractions[:, None] * h_new[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_h = np.where(hl > 0, 1.0 / hl, 0.0)

    # interface above layer a is full[a + 1], below is full[a]
    diag = 1.0 - dt * (g_neg[1:] - g_pos[:-1]) * inv_h
    sup = np.zeros_like(diag)
    sub = np.zeros_like(diag)
    sup[:-1] = -dt * g_pos[1:-1] * inv_h[1:]
    sub[1:] = dt * g_neg[1:-1] * inv_h[:-1]
    return VerticalSystem(sub, diag, sup)


def implicit_vertical_solve(q_star, rates, h_new, layers: LayerPartition, dt: float, dry_tol: float = 0.0):
    """Solve ``A q = q*`` column by column; dry columns return zero momentum.

    ``q_star`` has shape ``(N,)`` for one column or ``(N, cells)``; ``rates``
    the matching interior exchange rates.
    """
    q_star = np.asarray(q_star, dtype=float)
    single = q_star.ndim == 1
    q2 = q_star.reshape(layers.count, -1)
    h_new = np.atleast_1d(np.asarray(h_new, dtype=float))
    if isinstance(rates, ExchangeField):
        rates = rates.interior
    rates = np.asarray(rates, dtype=float)
    if not (np.all(np.isfinite(q2)) and np.all(np.isfinite(rates)) and np.all(np.isfinite(h_new)) and np.isfinite(dt)):
        raise ValueError("implicit_vertical_solve received non-finite input")

    wet = h_new > dry_tol
    out = np.zeros_like(q2)
    if layers.count == 1:
        out[:, wet] = q2[:, wet]
    elif np.any(wet):
        system = assemble_vertical_system(rates.reshape(layers.count - 1, -1)[:, wet], h_new[wet], layers, dt)
        out[:, wet] = solve_tridiagonal(system.sub, system.diag, system.sup, q2[:, wet])
    return out[:, 0] if single else out


def euler_step_detailed(
    state: FlowState,
    grid: Grid1D,
    topo: Topography,
    layers: LayerPartition,
    params: PhysicalParams,
    dt: float | None = None,
) -> EulerStepResult:
    """Advance one IMEX step; ``dt=None`` uses :func:`compute_dt`."""
    if dt is None:
        dt = compute_dt(state, grid, topo, layers, params)
    exp = explicit_step(state, grid, topo, layers, params, dt)
    q_new = implicit_vertical_solve(exp.q_star, exp.exchange, exp.h_new, layers, dt, params.dry_tol)
    new = FlowState(exp.h_new, q_new, state.time + dt)
    return EulerStepResult(new, exp)


def euler_step(state, grid, topo, layers, params, dt=None) -> FlowState:
    return euler_step_detailed(state, grid, topo, layers, params, dt).state


def exchange_bound_holds(result: EulerStepResult, layers: LayerPartition, dry_tol: float, tol: float = 1e-12) -> bool:
    """Check ``1 - 1/l_1 <= dt G_{3/2} / h^{n+1} <= 1`` on every wet cell."""
    if layers.count == 1:
        return True
    exp = result.explicit
    wet = exp.h_new > dry_tol
    ratio = exp.dt * exp.exchange.interior[0, wet] / exp.h_new[wet]
    lower = 1.0 - 1.0 / layers.fractions[0]
    return bool(np.all(ratio >= lower - tol) and np.all(ratio <= 1.0 + tol))
