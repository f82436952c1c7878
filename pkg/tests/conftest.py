import numpy as np
import pytest

from kinlayer.core import FlowState, Grid1D, LayerPartition, PhysicalParams, Topography


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_wet_state(rng, cells, layers: LayerPartition, h_range=(0.5, 1.5), u_scale=1.0):
    h = rng.uniform(*h_range, cells)
    u = rng.uniform(-u_scale, u_scale, (layers.count, cells))
    return FlowState.from_velocities(h, u, layers)


def bump(grid: Grid1D, amplitude=0.4, width=0.8, center=None) -> Topography:
    x = grid.centers
    c = 0.5 * (grid.edges[0] + grid.edges[-1]) if center is None else center
    return Topography(amplitude * np.exp(-(((x - c) / width) ** 2)))


@pytest.fixture
def params():
    return PhysicalParams()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
