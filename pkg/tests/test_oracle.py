import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokesdrop.oracle import AnnulusOracle, OracleError


def test_reference_state():
    s = AnnulusOracle(1.0, 2.0).state(0.0)
    assert s.lam == pytest.approx(-1.0)
    assert s.pressure == pytest.approx(1.0)
    assert s.dissipation == pytest.approx(3 * np.pi)
    assert s.r_omega == pytest.approx(0.5)
    assert s.collapse_time == pytest.approx(2 * np.sqrt(3) - 2, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(1.1, 4.0), st.floats(0.0, 0.99))
def test_area_is_conserved(l0, ratio, frac):
    o = AnnulusOracle(l0, ratio * l0)
    s = o.state(frac * o.collapse_time)
    assert s.A == pytest.approx(np.pi * o.area_over_pi, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.0, 0.9))
def test_viscosity_rescales_time(theta, frac):
    base = AnnulusOracle(1.0, 2.0)
    slow = AnnulusOracle(1.0, 2.0, theta)
    t = frac * base.collapse_time
    a, b = base.state(t), slow.state(theta * t)
    assert b.l == pytest.approx(a.l, rel=1e-12)
    assert b.u_inner == pytest.approx(a.u_inner / theta, rel=1e-12)
    assert b.dissipation == pytest.approx(a.dissipation / theta, rel=1e-12)


def test_radii_rate_matches_velocity():
    o = AnnulusOracle(1.0, 2.0)
    t, h = 0.4, 1e-6
    l1, L1 = o.radii(t + h)
    l0, L0 = o.radii(t - h)
    s = o.state(t)
    # the hole boundary moves inward at the outward-normal speed of the domain
    assert (l1 - l0) / (2 * h) == pytest.approx(-s.u_inner, rel=1e-7)
    assert (L1 - L0) / (2 * h) == pytest.approx(s.u_outer, rel=1e-7)


def test_collapse_limit():
    o = AnnulusOracle(1.0, 2.0)
    l, L = o.radii(o.collapse_time)
    assert l == pytest.approx(0.0, abs=1e-12)
    assert L == pytest.approx(np.sqrt(3), rel=1e-12)


@pytest.mark.parametrize("t", [-0.1, 2 * np.sqrt(3) - 2, 2.0])
def test_times_outside_lifespan_rejected(t):
    with pytest.raises(OracleError):
        AnnulusOracle(1.0, 2.0).state(t)


@pytest.mark.parametrize("args", [(2.0, 1.0), (0.0, 1.0), (1.0, 2.0, 0.0)])
def test_bad_radii_rejected(args):
    with pytest.raises(OracleError):
        AnnulusOracle(*args)


def test_velocity_is_divergence_free():
    o = AnnulusOracle(1.0, 2.0)
    rng = np.random.default_rng(0)
    ang = rng.uniform(0, 2 * np.pi, 20)
    rad = rng.uniform(1.1, 1.9, 20)
    x = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    h = 1e-5
    div = sum((o.velocity(x + h * e) - o.velocity(x - h * e))[:, i] / (2 * h)
              for i, e in enumerate(np.eye(2)))
    np.testing.assert_allclose(div, 0.0, atol=1e-8)
