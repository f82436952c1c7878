"""Viscous and bottom-friction source step, applied after the Euler step.

The step leaves the water depth unchanged and updates layer momenta with a
horizontal diffusion term, a vertical exchange between adjacent layers and a
friction term on the bottom layer. All three act on the midpoint velocity
``u_half = (u_old + u_tilde) / 2`` built from the state before the Euler step
and the state after it.

Two modes are available:

``as_written``
    Every term uses ``u_half``: an explicit update restricted by
    :func:`parabolic_dt`.
``vertical_implicit``
    The horizontal term keeps ``u_half``; the vertical and friction terms use
    ``(u_tilde + u_new) / 2``, giving one tridiagonal solve per column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FlowState, Grid1D, LayerPartition, PhysicalParams, velocities
from .tridiag import solve_tridiagonal

VISCOUS_MODES = ("as_written", "vertical_implicit")


class ParabolicViolation(ValueError):
    """The explicit viscous update was asked to take a step above its stability bound."""


@dataclass(frozen=True)
class ViscousConfig:
    mode: str = "as_written"
    parabolic_safety: float = 0.5

    def __post_init__(self):
        if self.mode not in VISCOUS_MODES:
            raise ValueError(f"viscous mode must be one of {VISCOUS_MODES}, got {self.mode!r}")
        if not 0 < self.parabolic_safety <= 1:
            raise ValueError(f"parabolic_safety must lie in (0, 1], got {self.parabolic_safety!r}")


def friction_coefficient(u_bottom, h, params: PhysicalParams):
    """Navier friction ``k_l + k_t h |u_b|``."""
    return params.k_l + params.k_t * np.asarray(h) * np.abs(u_bottom)


def _interface_depths(hl, wet, boundary):
    # arithmetic mean of neighbouring layer depths; zero next to a dry column
    if boundary == "periodic":
        right, wet_r = np.roll(hl, -1, axis=1), np.roll(wet, -1)
        mean = 0.5 * (hl + right)
        mean[:, ~(wet & wet_r)] = 0.0
        return np.roll(mean, 1, axis=1), mean
    mean = 0.5 * (hl[:, 1:] + hl[:, :-1])
    mean[:, ~(wet[1:] & wet[:-1])] = 0.0
    # mirrored ghosts: the wall face sees the cell's own depth
    left = np.concatenate([hl[:, :1] * wet[0], mean], axis=1)
    right = np.concatenate([mean, hl[:, -1:] * wet[-1]], axis=1)
    return left, right


def _neighbours(u, widths, boundary):
    if boundary == "periodic":
        return (np.roll(u, 1, axis=1), np.roll(u, -1, axis=1),
                np.roll(widths, 1), np.roll(widths, -1))
    u_l = np.concatenate([-u[:, :1], u[:, :-1]], axis=1)
    u_r = np.concatenate([u[:, 1:], -u[:, -1:]], axis=1)
    dx_l = np.concatenate([widths[:1], widths[:-1]])
    dx_r = np.concatenate([widths[1:], widths[-1:]])
    return u_l, u_r, dx_l, dx_r


def horizontal_term(u, hl, wet, grid: Grid1D, mu: float):
    """``8 mu / dx_i (h_{i+1/2} du_{i+1/2} / (dx_i + dx_{i+1}) - h_{i-1/2} du_{i-1/2} / (dx_{i-1} + dx_i))``."""
    if mu == 0:
        return np.zeros_like(u)
    dx = grid.widths
    u_l, u_r, dx_l, dx_r = _neighbours(u, dx, grid.boundary)
    h_face_l, h_face_r = _interface_depths(hl, wet, grid.boundary)
    flux_r = h_face_r * (u_r - u) / (dx + dx_r)
    flux_l = h_face_l * (u - u_l) / (dx_l + dx)
    return 8.0 * mu / dx * (flux_r - flux_l)


def _vertical_coupling(hl, mu):
    # 2 mu / (h_{a+1} + h_a) at each interior layer interface, shape (N - 1, cells)
    s = hl[1:] + hl[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s > 0, 2.0 * mu / s, 0.0)


def vertical_term(u, hl, mu: float):
    if mu == 0 or u.shape[0] == 1:
        return np.zeros_like(u)
    k = _vertical_coupling(hl, mu)
    flux = k * (u[1:] - u[:-1])
    out = np.zeros_like(u)
    out[:-1] += flux
    out[1:] -= flux
    return out


def parabolic_dt(state: FlowState, grid: Grid1D, layers: LayerPartition, params: PhysicalParams, cfg: ViscousConfig) -> float:
    """Stability bound of the explicit viscous update (``inf`` when nothing constrains it).

    ``safety * min(dx^2 / (8 mu), (h_{a+1} + h_a) h_a / (4 mu), 2 h_1 / kappa)``
    over wet columns. In ``vertical_implicit`` mode only the horizontal term
    constrains the step.
    """
    wet = state.h > params.dry_tol
    if not np.any(wet):
        return np.inf
    hl = layers.fractions[:, None] * state.h[None, wet]
    bounds = [np.inf]
    if params.mu > 0:
        bounds.append(float(np.min(grid.widths[wet] ** 2)) / (8.0 * params.mu))
        if cfg.mode == "as_written" and layers.count > 1:
            bounds.append(float(np.min((hl[1:] + hl[:-1]) * hl[:-1])) / (4.0 * params.mu))
    if cfg.mode == "as_written":
        u1 = velocities(state, layers, params.dry_tol)[0, wet]
        kappa = friction_coefficient(u1, state.h[wet], params)
        with np.errstate(divide="ignore"):
            bounds.append(float(np.min(np.where(kappa > 0, 2.0 * hl[0] / kappa, np.inf))))
    return cfg.parabolic_safety * min(bounds)


def viscous_step(
    state_tilde: FlowState,
    state_old: FlowState,
    grid: Grid1D,
    layers: LayerPartition,
    params: PhysicalParams,
    dt: float,
    cfg: ViscousConfig = ViscousConfig(),
) -> FlowState:
    """Apply viscosity and bottom friction over ``dt``; depth is untouched.

    Raises
    ------
    ParabolicViolation
        In ``as_written`` mode, when ``dt`` exceeds :func:`parabolic_dt`
        evaluated on ``state_tilde``.
    """
    if state_tilde.cell_count != state_old.cell_count or state_tilde.layer_count != state_old.layer_count:
        raise ValueError("viscous_step needs two states of the same shape")
    if not params.has_viscous_terms:
        return state_tilde
    bound = parabolic_dt(state_tilde, grid, layers, params, cfg)
    if dt > bound * (1.0 + 1e-12):
        raise ParabolicViolation(f"viscous step dt={dt!r} exceeds parabolic bound {bound!r}")

    h = state_tilde.h
    wet = h > params.dry_tol
    hl = layers.fractions[:, None] * h[None, :]
    u_tilde = velocities(state_tilde, layers, params.dry_tol)
    u_half = 0.5 * (velocities(state_old, layers, params.dry_tol) + u_tilde)
    u_half[:, ~wet] = 0.0
    kappa = np.where(wet, friction_coefficient(u_half[0], h, params), 0.0)

    horiz = horizontal_term(u_half, hl, wet, grid, params.mu)
    if cfg.mode == "as_written":
        step = horiz + vertical_term(u_half, hl, params.mu)
        step[0] -= kappa * u_half[0]
        q_new = state_tilde.q + dt * step
    else:
        q_new = _vertical_implicit(state_tilde.q, u_tilde, hl, horiz, kappa, params.mu, dt, wet)
    q_new[:, ~wet] = 0.0
    return state_tilde.replace(q=q_new)


def _vertical_implicit(q_tilde, u_tilde, hl, horiz, kappa, mu, dt, wet):
    # h v - dt/2 V(v) + dt/2 kappa v_1 = q~ + dt H + dt/2 V(u~) - dt/2 kappa u~_1
    rhs = q_tilde + dt * horiz + 0.5 * dt * vertical_term(u_tilde, hl, mu)
    rhs[0] -= 0.5 * dt * kappa * u_tilde[0]
    n_layers = hl.shape[0]
    diag = hl.copy()
    diag[0] += 0.5 * dt * kappa
    sub = np.zeros_like(hl)
    sup = np.zeros_like(hl)
    if n_layers > 1 and mu > 0:
        k = 0.5 * dt * _vertical_coupling(hl, mu)
        diag[:-1] += k
        diag[1:] += k
        sup[:-1] = -k
        sub[1:] = -k
    v = np.zeros_like(hl)
    v[:, wet] = solve_tridiagonal(sub[:, wet], diag[:, wet], sup[:, wet], rhs[:, wet])
    return hl * v
