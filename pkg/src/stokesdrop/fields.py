"""Analytic vector fields with exact derivatives up to third order.

Every field maps points ``(m, 2)`` to values ``(m, k)`` and exposes
``derivative(points, order)`` returning arrays of shape ``(m, k)``,
``(m, k, 2)``, ``(m, k, 2, 2)`` and ``(m, k, 2, 2, 2)`` for orders 0 to 3,
with the differentiation indices last.
"""

from __future__ import annotations

from math import comb

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import convolve2d


class Field:
    components: int

    def derivative(self, points, order: int = 0) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, points) -> np.ndarray:
        return self.derivative(points, 0)

    def gradient(self, points) -> np.ndarray:
        return self.derivative(points, 1)

    def hessian(self, points) -> np.ndarray:
        return self.derivative(points, 2)

    def third(self, points) -> np.ndarray:
        return self.derivative(points, 3)

    def scaled(self, lam: float) -> "ScaledField":
        """``x -> X(x / lam)``, the field carried along a dilation by ``lam``."""
        return ScaledField(self, lam)


class PolyField(Field):
    """``X_i = sum_{p,q} c[i, p, q] x^p y^q``."""

    def __init__(self, coeffs, name: str = "poly"):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim == 2:
            c = c[None]
        self.coeffs = c
        self.components = c.shape[0]
        self.name = name
        self._cache = {(): c}

    def _coeffs(self, word: tuple) -> np.ndarray:
        if word not in self._cache:
            prev = self._coeffs(word[:-1])
            self._cache[word] = npoly.polyder(prev, axis=1 + word[-1]) if prev.shape[1 + word[-1]] > 1 \
                else np.zeros_like(prev[:, :1, :1])
        return self._cache[word]

    def _eval(self, c, pts):
        return np.stack([npoly.polyval2d(pts[:, 0], pts[:, 1], ci) for ci in c], axis=1)

    def derivative(self, points, order: int = 0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        m = len(pts)
        out = np.empty((m, self.components) + (2,) * order)
        for idx in np.ndindex(*(2,) * order):
            word = tuple(sorted(idx))
            out[(slice(None), slice(None)) + idx] = self._eval(self._coeffs(word), pts)
        return out

    def __add__(self, other: "PolyField") -> "PolyField":
        a, b = self.coeffs, other.coeffs
        shape = np.maximum(a.shape, b.shape)
        out = np.zeros(shape)
        out[: a.shape[0], : a.shape[1], : a.shape[2]] += a
        out[: b.shape[0], : b.shape[1], : b.shape[2]] += b
        return PolyField(out, f"{self.name}+{other.name}")


def monomial_field(terms, components: int = 2, name: str = "poly") -> PolyField:
    """Field from ``{(i, p, q): c}``: ``X_i += c x^p y^q``."""
    deg = max(max(p, q) for (_, p, q) in terms) + 1
    c = np.zeros((components, deg, deg))
    for (i, p, q), val in terms.items():
        c[i, p, q] += val
    return PolyField(c, name)


def _z_power(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient grids of ``Re z^n`` and ``Im z^n``."""
    re = np.zeros((n + 1, n + 1))
    im = np.zeros((n + 1, n + 1))
    for p in range(n + 1):
        c = comb(n, p) * (1j) ** (n - p)
        re[p, n - p] = c.real
        im[p, n - p] = c.imag
    return re, im


def biharmonic_field(rng: np.random.Generator, degree: int = 4, name: str = "biharmonic") -> PolyField:
    """Random polynomial field with biharmonic components.

    Components are combinations of ``Re/Im z^n`` and ``|z|^2 Re/Im z^n``.
    """
    size = degree + 3
    out = np.zeros((2, size, size))
    r2 = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    for i in range(2):
        for n in range(1, degree + 1):
            for part in _z_power(n):
                a, b = rng.normal(size=2) / n
                g = np.zeros((size, size))
                g[: n + 1, : n + 1] += a * part
                h = convolve2d(part, r2)
                g[: h.shape[0], : h.shape[1]] += b * h
                out[i] += g
    return PolyField(out, name)


def random_poly_field(rng: np.random.Generator, degree: int = 3, components: int = 2,
                      name: str = "random") -> PolyField:
    c = rng.normal(size=(components, degree + 1, degree + 1))
    p, q = np.indices((degree + 1, degree + 1))
    c[:, p + q > degree] = 0.0
    return PolyField(c, name)


class FourierField(Field):
    """``X_i = sum_j a[i, j] cos(<k_j, x> + phase[i, j])``."""

    def __init__(self, wavevectors, amplitudes, phases, name: str = "fourier"):
        self.k = np.atleast_2d(np.asarray(wavevectors, dtype=float))
        self.a = np.atleast_2d(np.asarray(amplitudes, dtype=float))
        self.phase = np.atleast_2d(np.asarray(phases, dtype=float))
        self.components = self.a.shape[0]
        self.name = name

    @classmethod
    def random(cls, rng: np.random.Generator, kmax: float, modes: int = 6, components: int = 1,
               name: str = "fourier") -> "FourierField":
        ang = rng.uniform(0, 2 * np.pi, modes)
        mag = kmax * np.sqrt(rng.uniform(0, 1, modes))
        k = np.column_stack([mag * np.cos(ang), mag * np.sin(ang)])
        a = rng.normal(size=(components, modes)) / np.sqrt(modes)
        ph = rng.uniform(0, 2 * np.pi, (components, modes))
        return cls(k, a, ph, name)

    def derivative(self, points, order: int = 0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        arg = pts @ self.k.T  # (m, J)
        trig = np.cos(arg[:, None, :] + self.phase[None] + order * np.pi / 2)  # (m, k, J)
        kprod = np.ones(len(self.k))
        for _ in range(order):
            kprod = kprod[..., None] * self.k.reshape((len(self.k),) + (1,) * (kprod.ndim - 1) + (2,))
        return np.einsum("mij,j...->mi...", trig * self.a[None], kprod)


class TanhStep(Field):
    """Scalar ``tanh((<e, x> - c) / s)``: a smooth step across a line."""

    def __init__(self, direction, offset: float, width: float, name: str = "step"):
        e = np.asarray(direction, dtype=float)
        self.e = e / np.linalg.norm(e)
        self.c = float(offset)
        self.s = float(width)
        self.components = 1
        self.name = name

    def derivative(self, points, order: int = 0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        t = np.tanh((pts @ self.e - self.c) / self.s)
        sech2 = 1 - t * t
        scal = [t, sech2, -2 * t * sech2, sech2 * (6 * t * t - 2)][order] / self.s**order
        out = scal[:, None]
        for _ in range(order):
            out = out[..., None] * self.e
        return out


class ScaledField(Field):
    def __init__(self, base: Field, lam: float):
        self.base = base
        self.lam = float(lam)
        self.components = base.components
        self.name = f"{getattr(base, 'name', 'field')}@{lam:g}"

    def derivative(self, points, order: int = 0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float)) / self.lam
        return self.base.derivative(pts, order) / self.lam**order


def frobenius_sq(tensor: np.ndarray) -> np.ndarray:
    """Pointwise squared Frobenius norm over all but the leading axis."""
    return np.sum(tensor.reshape(len(tensor), -1) ** 2, axis=1)


def laplacian(field: Field, points) -> np.ndarray:
    H = field.hessian(points)
    return H[..., 0, 0] + H[..., 1, 1]


def symmetric_part(grad: np.ndarray) -> np.ndarray:
    return 0.5 * (grad + np.swapaxes(grad, -1, -2))


REILLY_FIELDS = {
    "linear": monomial_field({(0, 1, 0): 1.0, (1, 0, 1): -1.0}, name="(x,-y)"),
    "xy": monomial_field({(0, 1, 1): 1.0}, name="(xy,0)"),
    "cubic": monomial_field({(0, 2, 1): 1.0, (1, 3, 0): 0.5, (1, 0, 2): -1.0}, name="(x^2y, x^3/2 - y^2)"),
}
