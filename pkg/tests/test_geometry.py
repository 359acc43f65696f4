import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokesdrop import shapes
from stokesdrop.geometry import (CutoffProfile, GeometryError, extended_frame, project, signed_distance,
                                 ubc_radius)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 4.0))
def test_disk_radius_is_exact(R):
    g = ubc_radius(shapes.disk(128, R))
    assert g.r_omega == pytest.approx(R, rel=1e-11)
    assert g.active == "curvature"


def test_annulus_neck_alternative():
    g = ubc_radius(shapes.annulus(128, 1.0, 2.0))
    assert g.r_omega == pytest.approx(0.5, abs=1e-3)
    assert g.active == "neck"
    assert g.neck[2] == pytest.approx(1.0, abs=1e-2)


def test_annulus_thin_hole_is_curvature_limited():
    g = ubc_radius(shapes.annulus(128, 0.3, 2.0))
    assert g.r_omega == pytest.approx(0.3, rel=1e-8)
    assert g.active == "curvature"


def test_ellipse_curvature_alternative():
    g = ubc_radius(shapes.ellipse(256, 2.0, 1.0))
    assert g.r_omega == pytest.approx(0.5, abs=1e-3)
    assert g.active == "curvature"


def test_dumbbell_radius_follows_neck():
    radii = [ubc_radius(shapes.dumbbell(1024, neck=w)).r_omega for w in (0.2, 0.1, 0.05)]
    assert radii[0] > radii[1] > radii[2]
    assert radii[2] == pytest.approx(0.025, rel=0.1)


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.9, 0.9), st.floats(0, 2 * np.pi))
def test_signed_distance_of_disk(s, phi):
    b = shapes.disk(128, 1.0)
    p = (1 + s) * np.array([[np.cos(phi), np.sin(phi)]])
    assert signed_distance(b, p)[0] == pytest.approx(s, abs=1e-10)


def test_projection_outside_tube_rejected():
    g = ubc_radius(shapes.ellipse(128, 2.0, 1.0))
    with pytest.raises(GeometryError):
        project(g, np.array([[0.0, 0.0]]))


def test_extended_frame_on_disk():
    g = ubc_radius(shapes.disk(128, 1.0))
    pts = np.array([[0.5, 0.0], [0.0, -0.7], [1.3, 0.0]])
    fr = extended_frame(g, pts)
    r = np.linalg.norm(pts, axis=1)
    np.testing.assert_allclose(fr.div_normal, 1 / r, rtol=1e-10)
    np.testing.assert_allclose(fr.dtau_div_normal, 0.0, atol=1e-9)


def test_cutoff_profile_is_bounded():
    prof = CutoffProfile()
    s = np.linspace(-1.5, 0.5, 401)
    v = prof(s)
    assert v.min() >= 0 and v.max() <= 1 + 1e-15
    assert prof(np.array([0.0]))[0] == pytest.approx(1.0)
