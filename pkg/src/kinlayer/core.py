"""Domain types shared by the solver: layers, grid, topography, parameters, state.

All types are immutable after construction. Array fields are stored as
read-only float64 copies; producing a new state is the only way to "mutate".
Per-layer fields use the layout ``(layer, cell)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

BOUNDARY_KINDS = ("periodic", "reflective")


def _frozen(values, name: str, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LayerPartition:
    """Fixed vertical partition of the water column into ``N`` layers.

    Fractions are normalized by their sum; a raw sum further than 1e-8 from 1
    emits a warning.
    """

    fractions: np.ndarray

    def __post_init__(self):
        raw = np.array(self.fractions, dtype=float).ravel()
        if raw.size < 1:
            raise ValueError("at least one layer is required")
        if not np.all(np.isfinite(raw)) or np.any(raw <= 0.0):
            raise ValueError(f"layer fractions must be positive, got {raw.tolist()}")
        total = raw.sum()
        if abs(total - 1.0) > 1e-8:
            warnings.warn(
                f"layer fractions sum to {total!r}; normalizing", RuntimeWarning, stacklevel=3
            )
        frac = raw / total
        frac.setflags(write=False)
        object.__setattr__(self, "fractions", frac)

    @classmethod
    def uniform(cls, count: int) -> "LayerPartition":
        if count < 1:
            raise ValueError("layer count must be >= 1")
        return cls(np.full(count, 1.0 / count))

    @property
    def count(self) -> int:
        return int(self.fractions.size)

    def __len__(self):
        return self.count


@dataclass(frozen=True)
class Grid1D:
    """Cell partition of an interval given by strictly increasing edges."""

    edges: np.ndarray
    boundary: str = "periodic"

    def __post_init__(self):
        edges = _frozen(self.edges, "edges", 1)
        if edges.size < 2:
            raise ValueError("a grid needs at least one cell (two edges)")
        if np.any(np.diff(edges) <= 0.0):
            raise ValueError("grid edges must be strictly increasing")
        if self.boundary not in BOUNDARY_KINDS:
            raise ValueError(f"boundary must be one of {BOUNDARY_KINDS}, got {self.boundary!r}")
        object.__setattr__(self, "edges", edges)
        widths = np.diff(edges)
        widths.setflags(write=False)
        object.__setattr__(self, "_widths", widths)

    @classmethod
    def uniform(cls, cells: int, x_min: float = 0.0, x_max: float = 1.0, boundary="periodic"):
        if cells < 1:
            raise ValueError("cell_count must be >= 1")
        return cls(np.linspace(x_min, x_max, cells + 1), boundary)

    @property
    def cell_count(self) -> int:
        return self.edges.size - 1

    @property
    def widths(self) -> np.ndarray:
        return self._widths

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def length(self) -> float:
        return float(self.edges[-1] - self.edges[0])


@dataclass(frozen=True)
class Topography:
    """Time-independent bottom elevation, one value per cell."""

    z_b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z_b", _frozen(self.z_b, "z_b", 1))

    @classmethod
    def flat(cls, cells: int, level: float = 0.0) -> "Topography":
        return cls(np.full(cells, float(level)))

    @property
    def is_flat(self) -> bool:
        return bool(np.all(self.z_b == self.z_b[0]))


@dataclass(frozen=True)
class PhysicalParams:
    """Physical constants and numerical safety parameters.

    ``cfl_safety`` is the factor beta in (0, 1) multiplying the hyperbolic
    time-step bound. ``dry_tol`` is the depth at or below which a cell is dry.
    ``dt_max`` is returned by the time-step control when the domain is dry.
    """

    g: float = 9.81
    mu: float = 0.0
    k_l: float = 0.0
    k_t: float = 0.0
    cfl_safety: float = 0.9
    dry_tol: float = 1e-10
    dt_max: float = 1.0

    def __post_init__(self):
        checks = {
            "g": self.g > 0,
            "mu": self.mu >= 0,
            "k_l": self.k_l >= 0,
            "k_t": self.k_t >= 0,
            "cfl_safety": 0 < self.cfl_safety < 1,
            "dry_tol": self.dry_tol >= 0,
            "dt_max": self.dt_max > 0,
        }
        for name, ok in checks.items():
            value = getattr(self, name)
            if not (ok and np.isfinite(value)):
                raise ValueError(f"invalid physical parameter {name}={value!r}")

    @property
    def has_viscous_terms(self) -> bool:
        return self.mu > 0 or self.k_l > 0 or self.k_t > 0


@dataclass(frozen=True)
class FlowState:
    """Total depth ``h`` per cell and layer momenta ``q[alpha, i] = h_alpha u_alpha``."""

    h: np.ndarray
    q: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        h = _frozen(self.h, "h", 1)
        q = np.array(self.q, dtype=float)
        if q.ndim == 1:
            q = q[None, :]
        q = _frozen(q, "q", 2)
        if q.shape[1] != h.size:
            raise ValueError(f"q has {q.shape[1]} cells but h has {h.size}")
        if np.any(h < 0.0):
            raise ValueError(f"negative depth at cells {np.flatnonzero(h < 0).tolist()}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def at_rest(cls, h, layers: LayerPartition, time: float = 0.0) -> "FlowState":
        h = np.asarray(h, dtype=float)
        return cls(h, np.zeros((layers.count, h.size)), time)

    @classmethod
    def from_velocities(cls, h, u, layers: LayerPartition, dry_tol=0.0, time=0.0):
        """Build a state from per-layer velocities ``u[alpha, i]`` (or one profile for all layers)."""
        h = np.asarray(h, dtype=float)
        u = np.broadcast_to(np.asarray(u, dtype=float), (layers.count, h.size))
        q = layers.fractions[:, None] * h[None, :] * u
        q[:, h <= dry_tol] = 0.0
        return cls(h, q, time)

    @property
    def layer_count(self) -> int:
        return self.q.shape[0]

    @property
    def cell_count(self) -> int:
        return self.h.size

    def replace(self, **changes) -> "FlowState":
        values = {"h": self.h, "q": self.q, "time": self.time}
        values.update(changes)
        return FlowState(**values)

    def dry_momentum_ok(self, dry_tol: float) -> bool:
        return bool(np.all(self.q[:, self.h <= dry_tol] == 0.0))


def check_compatible(state: FlowState, grid: Grid1D, topo: Topography | None, layers: LayerPartition):
    """Raise ``ValueError`` if the pieces of a problem do not share sizes."""
    if state.cell_count != grid.cell_count:
        raise ValueError(f"state has {state.cell_count} cells, grid has {grid.cell_count}")
    if topo is not None and topo.z_b.size != grid.cell_count:
        raise ValueError(f"topography has {topo.z_b.size} cells, grid has {grid.cell_count}")
    if state.layer_count != layers.count:
        raise ValueError(f"state has {state.layer_count} layers, partition has {layers.count}")


def layer_depth(state: FlowState, layers: LayerPartition, alpha: int, i: int) -> float:
    """Depth ``l_alpha * h_i`` of layer ``alpha`` (0-based, bottom first) in cell ``i``."""
    if not (0 <= alpha < layers.count and 0 <= i < state.cell_count):
        raise IndexError(f"layer/cell index ({alpha}, {i}) out of range")
    return float(layers.fractions[alpha] * state.h[i])


def velocity(state: FlowState, layers: LayerPartition, params: PhysicalParams, alpha: int, i: int) -> float:
    """Layer velocity ``q / (l_alpha h)``; zero on dry cells."""
    if not (0 <= alpha < layers.count and 0 <= i < state.cell_count):
        raise IndexError(f"layer/cell index ({alpha}, {i}) out of range")
    h = state.h[i]
    if h <= params.dry_tol:
        return 0.0
    return float(state.q[alpha, i] / (layers.fractions[alpha] * h))


def velocities(state: FlowState, layers: LayerPartition, dry_tol: float) -> np.ndarray:
    """All layer velocities as an ``(N, cells)`` array, zero on dry cells."""
    hl = layers.fractions[:, None] * state.h[None, :]
    wet = state.h > dry_tol
    u = np.zeros_like(state.q)
    np.divide(state.q, hl, out=u, where=np.broadcast_to(wet, u.shape))
    return u


def free_surface(state: FlowState, topo: Topography, i: int | None = None):
    """Free-surface elevation ``h + z_b`` of one cell, or of all cells when ``i`` is None."""
    if i is None:
        return state.h + topo.z_b
    return float(state.h[i] + topo.z_b[i])


def interface_elevations(state: FlowState, topo: Topography, layers: LayerPartition) -> np.ndarray:
    """Layer interface elevations ``z_{alpha+1/2}``, shape ``(N + 1, cells)``; row 0 is the bottom."""
    cum = np.concatenate([[0.0], np.cumsum(layers.fractions)])
    return topo.z_b[None, :] + cum[:, None] * state.h[None, :]
