"""
Layered shear, viscosity and vertical velocity
==============================================

Two layers sliding past each other over a periodic flat bottom. Viscosity
erodes the shear, bottom friction slows the lowest layer, and the vertical
velocity is recovered from the layer mass balance.
"""

# %%
import numpy as np

from kinlayer import (
    FlowState,
    Grid1D,
    LayerPartition,
    PhysicalParams,
    Topography,
    ViscousConfig,
    compute_dt,
    euler_step_detailed,
    vertical_velocity,
    viscous_step,
)
from kinlayer.viscous import parabolic_dt

grid = Grid1D.uniform(100, 0.0, 1.0, "periodic")
topo = Topography.flat(100)
layers = LayerPartition.uniform(2)
params = PhysicalParams(mu=0.01, k_l=0.05)
cfg = ViscousConfig("as_written")

state = FlowState.from_velocities(np.ones(100), [[0.6], [-0.4]], layers)
for n in range(301):
    if n % 100 == 0:
        u = state.q / (layers.fractions[:, None] * state.h)
        print(f"t = {state.time:.4f}  u_1 = {u[0].mean():+.4f}  u_2 = {u[1].mean():+.4f}")
    dt = min(compute_dt(state, grid, topo, layers, params), parabolic_dt(state, grid, layers, params, cfg))
    res = euler_step_detailed(state, grid, topo, layers, params, dt)
    state = viscous_step(res.state, state, grid, layers, params, dt, cfg)

# %%
# A converging flow u = -0.2 x pushes water upward. The recovered w grows
# with height, close to 0.2 times the layer's mean elevation.
grid = Grid1D.uniform(200, -1.0, 1.0, "reflective")
layers = LayerPartition([0.3, 0.3, 0.4])
still = PhysicalParams()
s = FlowState.from_velocities(np.ones(200), -0.2 * grid.centers, layers)
res = euler_step_detailed(s, grid, Topography.flat(200), layers, still)
w = vertical_velocity(res.state, s, grid, Topography.flat(200), layers, res.dt, still, res.explicit.exchange)
z = np.concatenate([[0.0], np.cumsum(layers.fractions)])
for a in range(3):
    print(f"layer {a + 1}: w = {w[a, 100]:.4f}, 0.2 * mean elevation = {0.2 * 0.5 * (z[a] + z[a + 1]):.4f}")
