"""Reference kinetic scheme evolving the layer densities on a velocity grid.

Test-only. The field stores, for every (layer, cell), the averages of the
kinetic density over uniform bins of the kinetic velocity ``xi``. The grid is
symmetric about 0 with an even bin count, so ``xi = 0`` is a bin edge and the
upwind split ``xi > 0`` / ``xi < 0`` is exact; a mirrored density is the
reversed array.

Bin averages are computed from the antiderivative of ``sqrt(R^2 - s^2)``
directly in ``xi``, independently of the closed-form moment code under test.
Moments are midpoint sums, so the moment error of one step is ``O(dxi^2)``.

Nothing here imports flux or reconstruction code from the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kinlayer.core import FlowState, Grid1D, LayerPartition, PhysicalParams, Topography


@dataclass(frozen=True)
class KineticGrid:
    edges: np.ndarray

    @classmethod
    def covering(cls, states, layers: LayerPartition, g: float, nodes: int, margin: float = 0.5) -> "KineticGrid":
        """Symmetric grid of ``nodes`` bins containing every Maxwellian support of ``states``."""
        if nodes < 64 or nodes % 2:
            raise ValueError("need an even node count of at least 64")
        reach = 0.0
        for s in states:
            u = np.abs(_layer_velocities(s, layers, 0.0))
            reach = max(reach, float(np.max(u + np.sqrt(2.0 * g * s.h)[None, :])))
        half = reach + margin
        return cls(np.linspace(-half, half, nodes + 1))

    @property
    def nodes(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def weight(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def half_width(self) -> float:
        return float(self.edges[-1])


@dataclass(frozen=True)
class KineticField:
    """Bin-averaged densities ``M[a, i, k]``."""

    M: np.ndarray


def _sqrt_antiderivative(s, r):
    # d/ds of this is sqrt(r^2 - s^2) on [-r, r]
    s = np.clip(s, -r, r)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(r > 0, s / np.where(r > 0, r, 1.0), 0.0)
    return 0.5 * (s * np.sqrt(np.maximum(r * r - s * s, 0.0)) + r * r * np.arcsin(np.clip(ratio, -1.0, 1.0)))


def maxwellian_bins(h, u, lf, g, grid: KineticGrid):
    """Bin averages of ``lf / (g pi) sqrt((2 g h - (xi - u)^2)_+)``; broadcasts over leading axes."""
    h = np.asarray(h, dtype=float)[..., None]
    u = np.asarray(u, dtype=float)[..., None]
    lf = np.asarray(lf, dtype=float)[..., None]
    r = np.sqrt(2.0 * g * np.maximum(h, 0.0))
    lo, hi = grid.edges[:-1], grid.edges[1:]
    area = _sqrt_antiderivative(hi - u, r) - _sqrt_antiderivative(lo - u, r)
    return lf / (g * np.pi) * area / grid.weight


def _layer_velocities(state: FlowState, layers: LayerPartition, dry_tol: float):
    hl = layers.fractions[:, None] * state.h[None, :]
    u = np.zeros_like(state.q)
    wet = np.broadcast_to(state.h > dry_tol, u.shape)
    np.divide(state.q, hl, out=u, where=wet)
    return u


def _check_coverage(state, layers, g, grid, dry_tol):
    u = _layer_velocities(state, layers, dry_tol)
    reach = np.abs(u) + np.sqrt(2.0 * g * state.h)[None, :]
    if np.any(reach >= grid.half_width):
        raise ValueError("kinetic grid does not cover the Maxwellian supports")


def project_to_kinetic(state: FlowState, layers: LayerPartition, g: float, grid: KineticGrid, dry_tol: float = 1e-10) -> KineticField:
    _check_coverage(state, layers, g, grid, dry_tol)
    u = _layer_velocities(state, layers, dry_tol)
    lf = np.broadcast_to(layers.fractions[:, None], u.shape)
    return KineticField(maxwellian_bins(np.broadcast_to(state.h, u.shape), u, lf, g, grid))


def moments(field: KineticField, grid: KineticGrid):
    """``(h, q)`` with ``h`` the total depth per cell and ``q[a, i]`` the layer momenta."""
    w = grid.weight
    h_layers = field.M.sum(axis=-1) * w
    q = (field.M * grid.nodes).sum(axis=-1) * w
    return h_layers.sum(axis=0), q


def kinetic_entropy(field: KineticField, grid: Grid1D, kgrid: KineticGrid, topo: Topography, layers: LayerPartition, g: float) -> float:
    """``sum dx dxi l_a H(M_a / l_a, xi, z_b)`` with ``H = xi^2 f / 2 + g^2 pi^2 f^3 / 6 + g z_b f``."""
    lf = layers.fractions[:, None, None]
    f = field.M / lf
    xi = kgrid.nodes[None, None, :]
    z = topo.z_b[None, :, None]
    density = lf * (0.5 * xi**2 * f + g**2 * np.pi**2 / 6.0 * f**3 + g * z * f)
    return float((density.sum(axis=(0, 2)) * grid.widths).sum() * kgrid.weight)


def _padded(a, boundary, mirror_velocity=False):
    # a has cells on axis 1 (after the layer axis) or axis 0 for per-cell arrays
    axis = 1 if a.ndim > 1 else 0
    first = np.take(a, [0], axis=axis)
    last = np.take(a, [-1], axis=axis)
    if boundary == "periodic":
        first, last = last, first
    elif mirror_velocity:
        first, last = -first, -last
    return np.concatenate([first, a, last], axis=axis)


def kinetic_step(
    field: KineticField,
    state: FlowState,
    grid: Grid1D,
    topo: Topography,
    layers: LayerPartition,
    params: PhysicalParams,
    dt: float,
    kgrid: KineticGrid,
):
    """One explicit transport plus implicit exchange step of the kinetic scheme.

    ``field`` is the projection of ``state``; ``state`` supplies the
    reconstructed interface states. Returns ``(new_field, exchange)`` with
    ``exchange`` the interior rates of shape ``(N - 1, cells)``.
    """
    g = params.g
    n_layers, n = state.q.shape
    xi = kgrid.nodes
    w = kgrid.weight
    pos = xi > 0

    h = state.h
    u = _layer_velocities(state, layers, params.dry_tol)
    he = _padded(h, grid.boundary)
    ze = _padded(topo.z_b, grid.boundary)
    ue = _padded(u, grid.boundary, mirror_velocity=True)

    # interface k between padded cells k and k+1, k = 0..n
    zs = np.maximum(ze[:-1], ze[1:])
    h_minus = np.maximum(he[:-1] + ze[:-1] - zs, 0.0)
    h_plus = np.maximum(he[1:] + ze[1:] - zs, 0.0)
    lf = np.broadcast_to(layers.fractions[:, None], (n_layers, n + 1))
    M_minus = maxwellian_bins(np.broadcast_to(h_minus, lf.shape), ue[:, :-1], lf, g, kgrid)
    M_plus = maxwellian_bins(np.broadcast_to(h_plus, lf.shape), ue[:, 1:], lf, g, kgrid)
    M_face = np.where(pos, M_minus, M_plus)

    M = field.M
    # delta M at the right edge of cell i uses that edge's left state, at the left edge its right state
    d_right = (xi - u[..., None]) * (M - M_minus[:, 1:])
    d_left = (xi - u[..., None]) * (M - M_plus[:, :-1])
    sigma = (dt / grid.widths)[None, :, None]
    M_star = M - sigma * (xi * M_face[:, 1:] + d_right - xi * M_face[:, :-1] - d_left)

    # exchange rates from quadrature of the layer mass fluxes
    flux_h = (xi * M_face).sum(axis=-1) * w
    diff = flux_h[:, 1:] - flux_h[:, :-1]
    partial = diff - layers.fractions[:, None] * diff.sum(axis=0, keepdims=True)
    rates = np.cumsum(partial, axis=0)[:-1] / grid.widths[None, :]

    h_new = M_star.sum(axis=(0, 2)) * w
    out = np.zeros_like(M_star)
    for i in range(n):
        if h_new[i] <= params.dry_tol:
            continue
        a = _dense_exchange_matrix(rates[:, i], layers.fractions * h_new[i], dt)
        out[:, i, :] = np.linalg.solve(a, M_star[:, i, :])
    return KineticField(out), rates


def _dense_exchange_matrix(rates, h_layers, dt):
    # row a: -dt G+_{a+1/2}/h_{a+1} M_{a+1} + (1 - dt (G-_{a+1/2} - G+_{a-1/2}) / h_a) M_a + dt G-_{a-1/2}/h_{a-1} M_{a-1}
    n = h_layers.size
    full = np.concatenate([[0.0], rates, [0.0]])
    a = np.eye(n)
    for r in range(n):
        above, below = full[r + 1], full[r]
        a[r, r] = 1.0 - dt * (min(above, 0.0) - max(below, 0.0)) / h_layers[r]
        if r + 1 < n:
            a[r, r + 1] = -dt * max(above, 0.0) / h_layers[r + 1]
        if r > 0:
            a[r, r - 1] = dt * min(below, 0.0) / h_layers[r - 1]
    return a


def step_moments(state, grid, topo, layers, params, dt, nodes, margin=0.5):
    """``(h, q)`` after projecting ``state`` and taking one kinetic step on ``nodes`` bins."""
    kgrid = KineticGrid.covering([state], layers, params.g, nodes, margin)
    field = project_to_kinetic(state, layers, params.g, kgrid, params.dry_tol)
    new, _ = kinetic_step(field, state, grid, topo, layers, params, dt, kgrid)
    return moments(new, kgrid)


def refinement_study(state, grid, topo, layers, params, dt, nodes=(2048, 4096, 8192)):
    """Step moments ``[(h, q), ...]``, one pair per bin count in ``nodes``."""
    return [step_moments(state, grid, topo, layers, params, dt, n) for n in nodes]


def discrepancy(moments_a, moments_b) -> float:
    """Max-norm distance between two ``(h, q)`` pairs."""
    (ha, qa), (hb, qb) = moments_a, moments_b
    return float(max(np.max(np.abs(ha - hb)), np.max(np.abs(qa - qb))))


def richardson(coarse, fine):
    """Second-order extrapolation ``(4 fine - coarse) / 3`` of two ``(h, q)`` pairs."""
    return tuple((4.0 * f - c) / 3.0 for c, f in zip(coarse, fine))
