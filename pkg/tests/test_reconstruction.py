import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinlayer.core import FlowState, Grid1D, LayerPartition, PhysicalParams, Topography
from kinlayer.euler import explicit_step
from kinlayer.kinetic_moments import half_fluxes
from kinlayer.reconstruction import grid_fluxes, interface_fluxes, reconstruct

from conftest import bump, random_wet_state


def test_reconstruct_step_up_example():
    st_ = reconstruct(1.0, 1.0, 0.0, 0.3)
    assert st_.z_star == 0.3
    assert st_.h_left_star == pytest.approx(0.7, abs=1e-15)
    assert st_.h_right_star == 1.0


def test_reconstruct_flat_bottom_keeps_depths():
    st_ = reconstruct(np.array([0.4, 2.0]), np.array([1.1, 0.0]), np.zeros(2), np.zeros(2))
    np.testing.assert_array_equal(st_.h_left_star, [0.4, 2.0])
    np.testing.assert_array_equal(st_.h_right_star, [1.1, 0.0])


def test_reconstruct_step_above_surface_dries_interface():
    assert reconstruct(1.0, 1.0, 0.0, 2.0).h_left_star == 0.0


@settings(max_examples=300, deadline=None)
@given(
    hl=st.floats(0, 10), hr=st.floats(0, 10), zl=st.floats(-5, 5), zr=st.floats(-5, 5),
)
def test_reconstructed_depths_are_dominated(hl, hr, zl, zr):
    s = reconstruct(hl, hr, zl, zr)
    assert 0.0 <= s.h_left_star <= hl
    assert 0.0 <= s.h_right_star <= hr
    assert s.z_star == max(zl, zr)


def _fluxes_one_interface(hl, ul, hr, ur, zl, zr, layers, g=9.81):
    s = reconstruct(np.array([hl]), np.array([hr]), np.array([zl]), np.array([zr]))
    return interface_fluxes(
        np.array([hl]), np.full((layers.count, 1), ul), np.array([hr]), np.full((layers.count, 1), ur), s, layers, g
    )


def test_flat_interface_fluxes_are_conservative_kinetic_fluxes():
    layers = LayerPartition([0.3, 0.7])
    f = _fluxes_one_interface(1.2, 0.4, 0.8, -0.1, 0.5, 0.5, layers)
    np.testing.assert_array_equal(f.f_q_left, f.f_q_right)
    for a, lf in enumerate(layers.fractions):
        left, right = half_fluxes(1.2, 0.4, lf, 9.81), half_fluxes(0.8, -0.1, lf, 9.81)
        assert f.f_h[a, 0] == pytest.approx(left.f_h_plus + right.f_h_minus, rel=1e-15)
        assert f.f_q_left[a, 0] == pytest.approx(left.f_q_plus + right.f_q_minus, rel=1e-15)


def test_topography_correction_is_first_moment_of_delta_m():
    # the correction equals int xi (xi - u)(M_cell - M_star) dxi, evaluated by direct summation
    layers = LayerPartition([0.25, 0.75])
    g, hl, ul, zl, zr = 9.81, 1.0, 0.3, 0.0, 0.4
    f = _fluxes_one_interface(hl, ul, 1.0, 0.0, zl, zr, layers, g)
    s = reconstruct(hl, 1.0, zl, zr)
    xi = np.linspace(-15, 15, 400001)
    dxi = xi[1] - xi[0]
    for a, lf in enumerate(layers.fractions):
        def m(h):
            return lf / (g * np.pi) * np.sqrt(np.maximum(2 * g * h - (xi - ul) ** 2, 0.0))
        moment = np.sum(xi * (xi - ul) * (m(hl) - m(s.h_left_star))) * dxi
        kinetic = f.f_q_right[a, 0] - 0.5 * g * lf * (1.0 - s.h_right_star**2)
        assert f.f_q_left[a, 0] - kinetic == pytest.approx(moment, rel=1e-6)
        assert f.f_q_left[a, 0] - kinetic == pytest.approx(0.5 * g * lf * (hl**2 - s.h_left_star**2), rel=1e-14)


def test_both_cells_dry_give_zero_fluxes():
    layers = LayerPartition.uniform(3)
    f = _fluxes_one_interface(0.0, 0.0, 0.0, 0.0, 0.0, 1.0, layers)
    assert np.all(f.f_h == 0) and np.all(f.f_q_left == 0) and np.all(f.f_q_right == 0)


@pytest.mark.parametrize("n_layers", [1, 2, 5])
@pytest.mark.parametrize("boundary", ["periodic", "reflective"])
def test_lake_at_rest_flux_balance(n_layers, boundary):
    grid = Grid1D.uniform(60, 0.0, 6.0, boundary)
    topo = bump(grid, amplitude=0.7, width=0.5)
    layers = LayerPartition.uniform(n_layers)
    state = FlowState.at_rest(np.maximum(1.0 - topo.z_b, 0.0), layers)
    _, f = grid_fluxes(state, grid, topo, layers, 9.81, 1e-10)
    np.testing.assert_allclose(f.f_h, 0.0, atol=1e-15)
    np.testing.assert_allclose(f.f_q_left[:, 1:] - f.f_q_right[:, :-1], 0.0, atol=1e-14)


def test_emerged_bump_lake_at_rest_flux_balance():
    # the bump pierces the surface: dry cells in the middle
    grid = Grid1D.uniform(40, 0.0, 4.0, "reflective")
    topo = bump(grid, amplitude=1.5, width=0.6)
    layers = LayerPartition.uniform(2)
    state = FlowState.at_rest(np.maximum(1.0 - topo.z_b, 0.0), layers)
    assert np.any(state.h == 0)
    _, f = grid_fluxes(state, grid, topo, layers, 9.81, 1e-10)
    np.testing.assert_allclose(f.f_h, 0.0, atol=1e-15)
    np.testing.assert_allclose(f.f_q_left[:, 1:] - f.f_q_right[:, :-1], 0.0, atol=1e-14)


def test_mass_flux_telescopes_on_periodic_grid(rng):
    grid = Grid1D.uniform(32, 0.0, 1.0, "periodic")
    layers = LayerPartition.uniform(3)
    state = random_wet_state(rng, 32, layers)
    topo = Topography(rng.uniform(0, 0.2, 32))
    params = PhysicalParams()
    from kinlayer.euler import compute_dt

    exp = explicit_step(state, grid, topo, layers, params, compute_dt(state, grid, topo, layers, params))
    m0 = np.dot(grid.widths, state.h)
    assert abs(np.dot(grid.widths, exp.h_new) - m0) <= 1e-13 * m0
