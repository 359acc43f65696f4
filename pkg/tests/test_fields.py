import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokesdrop.fields import (FourierField, TanhStep, biharmonic_field, frobenius_sq, laplacian,
                               monomial_field, random_poly_field)

seeds = st.integers(0, 2**31 - 1)


def fd_check(field, order, pts, h=1e-5, rtol=1e-6):
    """Central differences of order ``order - 1`` against order ``order``."""
    exact = field.derivative(pts, order)
    for i, e in enumerate(np.eye(2)):
        fd = (field.derivative(pts + h * e, order - 1) - field.derivative(pts - h * e, order - 1)) / (2 * h)
        scale = max(1.0, np.abs(exact).max())
        np.testing.assert_allclose(exact[..., i], fd, atol=rtol * scale)


def make(kind, rng):
    if kind == "poly":
        return random_poly_field(rng, degree=4)
    if kind == "fourier":
        return FourierField.random(rng, kmax=3.0, components=2)
    if kind == "biharmonic":
        return biharmonic_field(rng)
    return TanhStep(rng.normal(size=2), 0.1, 0.7)


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from(["poly", "fourier", "biharmonic", "step"]), st.integers(1, 3))
def test_derivatives_match_finite_differences(seed, kind, order):
    rng = np.random.default_rng(seed)
    f = make(kind, rng)
    fd_check(f, order, rng.uniform(-1, 1, (7, 2)))


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 3))
def test_derivative_tensors_are_symmetric(seed, order):
    rng = np.random.default_rng(seed)
    D = make("fourier", rng).derivative(rng.uniform(-1, 1, (5, 2)), order)
    if order >= 2:
        np.testing.assert_allclose(D, np.swapaxes(D, -1, -2), atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_biharmonic_field_is_biharmonic(seed):
    f = biharmonic_field(np.random.default_rng(seed))
    lap = type(f)(np.stack([_lap(c) for c in f.coeffs]))
    bilap = np.stack([_lap(c) for c in lap.coeffs])
    np.testing.assert_allclose(bilap, 0.0, atol=1e-9)


def _lap(c):
    from numpy.polynomial import polynomial as P

    a = P.polyder(c, 2, axis=0) if c.shape[0] > 2 else np.zeros((1, 1))
    b = P.polyder(c, 2, axis=1) if c.shape[1] > 2 else np.zeros((1, 1))
    out = np.zeros(np.maximum(a.shape, b.shape))
    out[: a.shape[0], : a.shape[1]] += a
    out[: b.shape[0], : b.shape[1]] += b
    return out


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(0.2, 5.0), st.integers(0, 3))
def test_scaled_field_chain_rule(seed, lam, order):
    rng = np.random.default_rng(seed)
    f = make("poly", rng)
    x = rng.uniform(-1, 1, (6, 2))
    np.testing.assert_allclose(f.scaled(lam).derivative(lam * x, order), f.derivative(x, order) / lam**order,
                               rtol=1e-12, atol=1e-12)


def test_monomial_values_and_laplacian():
    f = monomial_field({(0, 2, 0): 1.0, (0, 0, 2): 1.0, (1, 1, 1): 3.0})
    x = np.array([[0.5, -2.0]])
    np.testing.assert_allclose(f(x), [[4.25, -3.0]])
    np.testing.assert_allclose(laplacian(f, x), [[4.0, 0.0]])
    assert frobenius_sq(f.gradient(x))[0] == pytest.approx(1 + 16 + 36 + 2.25)
