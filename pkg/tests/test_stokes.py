import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokesdrop import shapes
from stokesdrop.oracle import AnnulusOracle
from stokesdrop.stokes import SolverError, dissipation, moment_functionals, solve


def rot(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


@pytest.mark.parametrize("R", [0.5, 1.0, 3.0])
def test_disk_is_at_rest(R):
    b = shapes.disk(64, R)
    sol = solve(b)
    assert np.abs(sol.boundary_velocity).max() < 1e-12
    np.testing.assert_allclose(sol.pressure_trace, 1 / R, rtol=1e-10)


def test_annulus_matches_closed_form():
    b = shapes.annulus(128, 1.0, 2.0)
    sol = solve(b)
    s = AnnulusOracle(1.0, 2.0).state(0.0)
    v_out, v_in = b.split(sol.normal_velocity)
    np.testing.assert_allclose(v_in, s.u_inner, atol=1e-10)
    np.testing.assert_allclose(v_out, s.u_outer, atol=1e-10)
    np.testing.assert_allclose(sol.pressure_trace, s.pressure, atol=1e-9)
    assert dissipation(sol, b) == pytest.approx(s.dissipation, rel=1e-10)


@pytest.fixture(scope="module")
def ellipse_solution():
    b = shapes.ellipse(128, 2.0, 1.0)
    return b, solve(b)


def test_ellipse_conserves_area_and_dissipates(ellipse_solution):
    b, sol = ellipse_solution
    assert abs(b.weights @ sol.normal_velocity) < 1e-10
    assert dissipation(sol, b) > 0
    # the tips retract and the flanks advance
    assert sol.normal_velocity[0] < 0 < sol.normal_velocity[len(b.nodes) // 4]


def test_gauge_removes_rigid_motion(ellipse_solution):
    b, sol = ellipse_solution
    mean, curl = moment_functionals(sol, b)
    np.testing.assert_allclose(mean, 0.0, atol=1e-10)
    assert abs(curl) < 1e-10


@settings(max_examples=8, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(-3, 3), st.floats(-3, 3))
def test_normal_velocity_is_rigid_motion_invariant(ellipse_solution, phi, dx, dy):
    b, sol = ellipse_solution
    moved = solve(b.transformed(rot(phi), (dx, dy)))
    np.testing.assert_allclose(moved.normal_velocity, sol.normal_velocity, atol=1e-9)


@pytest.mark.parametrize("theta", [0.25, 4.0])
def test_viscosity_scales_velocity(ellipse_solution, theta):
    b, sol = ellipse_solution
    np.testing.assert_allclose(solve(b, theta).normal_velocity, sol.normal_velocity / theta, atol=1e-10)


def test_velocity_is_dilation_invariant(ellipse_solution):
    b, sol = ellipse_solution
    # traction ~ 1/lam and velocity gradients ~ u/lam, so the capillary speed is scale free
    np.testing.assert_allclose(solve(b.scaled(2.0)).normal_velocity, sol.normal_velocity, atol=1e-10)


def test_underresolved_boundary_raises():
    with pytest.raises(SolverError):
        solve(shapes.dumbbell(64, neck=0.1), tol=1e-10)


def test_nonpositive_viscosity_rejected():
    with pytest.raises(ValueError):
        solve(shapes.disk(32), theta=0.0)
