"""Closed planar curves with spectrally accurate differential geometry.

A curve is stored as ``N`` nodes sampled at the uniform parameter values
``alpha_j = 2 pi j / N``.  All derivatives are taken with respect to that
parameter through the FFT and converted to arclength derivatives by the
speed ``|gamma'(alpha)|``, so node spacing only has to stay moderately
uniform, not exact.

Orientation convention: outer components run counterclockwise, holes run
clockwise.  With this convention the outward normal of the domain is the
clockwise rotation of the traversal tangent, ``nu = (tau_2, -tau_1)``, and
``tau = (-nu_2, nu_1)`` holds for every component.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

MIN_NODES = 16
MAX_SPACING_RATIO = 3.0


class CurveError(ValueError):
    """Raised for invalid curve data (too few nodes, self-intersection)."""


def wavenumbers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, 1.0 / n)


def spectral_derivative(values: np.ndarray, order: int = 1) -> np.ndarray:
    """Derivative of periodic samples w.r.t. the uniform parameter on [0, 2pi).

    ``values`` has the periodic direction on axis 0.
    """
    n = values.shape[0]
    k = wavenumbers(n)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        mult[n // 2] = 0.0
    shape = (n,) + (1,) * (values.ndim - 1)
    coeffs = np.fft.fft(values, axis=0)
    return np.fft.ifft(coeffs * mult.reshape(shape), axis=0).real


def spectral_filter(values: np.ndarray, order: int = 36, strength: float = 36.0) -> np.ndarray:
    """Exponential filter ``exp(-strength (|k|/(n/2))^order)`` along axis 0.

    Damps the modes next to the Nyquist frequency, where a tangential
    zigzag of the nodes aliases into resolved modes of the derivatives.
    """
    n = values.shape[0]
    k = np.abs(wavenumbers(n)) / (n // 2)
    sigma = np.exp(-strength * k**order)
    shape = (n,) + (1,) * (values.ndim - 1)
    return np.fft.ifft(np.fft.fft(values, axis=0) * sigma.reshape(shape), axis=0).real


class TrigInterpolant:
    """Real trigonometric interpolant of periodic samples on [0, 2pi).

    The Nyquist mode of an even-length sample is split symmetrically so the
    interpolant stays real and its derivatives are consistent with
    :func:`spectral_derivative` at the nodes.
    """

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        self.n = values.shape[0]
        self.coeffs = np.fft.fft(values, axis=0) / self.n
        self.k = wavenumbers(self.n)
        self._weights = np.ones(self.n)
        if self.n % 2 == 0:
            # cos(N alpha/2) split across +-N/2
            self._weights[self.n // 2] = 0.5

    def __call__(self, alpha, derivative: int = 0) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        flat = alpha.reshape(-1)
        k = self.k
        coeffs = self.coeffs
        w = self._weights
        if self.n % 2 == 0:
            # mirror the Nyquist mode at +N/2 so the sum is real
            k = np.append(k, self.n / 2)
            coeffs = np.concatenate([coeffs, coeffs[self.n // 2:self.n // 2 + 1]], axis=0)
            w = np.append(w, 0.5)
        mult = (1j * k) ** derivative * w
        out = (np.exp(1j * np.outer(flat, k)) * mult) @ coeffs
        return out.real.reshape(alpha.shape + self.coeffs.shape[1:])


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    """One closed component of a domain boundary.

    Parameters
    ----------
    nodes : (N, 2) array
        Ordered node coordinates; the closing segment is implicit.
    is_hole : bool
        True if this component bounds a hole of the domain.  Holes must be
        stored clockwise, the outer component counterclockwise.
    """

    nodes: np.ndarray
    is_hole: bool = False

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise CurveError(f"nodes must have shape (N, 2), got {nodes.shape}")
        if nodes.shape[0] < MIN_NODES:
            raise CurveError(f"a closed curve needs at least {MIN_NODES} nodes, got {nodes.shape[0]}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def N(self) -> int:
        return self.nodes.shape[0]

    @property
    def dalpha(self) -> float:
        return 2.0 * np.pi / self.N

    @cached_property
    def d1(self) -> np.ndarray:
        return spectral_derivative(self.nodes, 1)

    @cached_property
    def d2(self) -> np.ndarray:
        return spectral_derivative(self.nodes, 2)

    @cached_property
    def speed(self) -> np.ndarray:
        """``|gamma'(alpha)|`` at the nodes."""
        return np.hypot(self.d1[:, 0], self.d1[:, 1])

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoidal arclength weights ``speed * dalpha``."""
        return self.speed * self.dalpha

    @cached_property
    def tangent(self) -> np.ndarray:
        return self.d1 / self.speed[:, None]

    @cached_property
    def normal(self) -> np.ndarray:
        t = self.tangent
        return np.column_stack([t[:, 1], -t[:, 0]])

    @cached_property
    def curvature(self) -> np.ndarray:
        d1, d2 = self.d1, self.d2
        return (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / self.speed**3

    @cached_property
    def length(self) -> float:
        return float(np.sum(self.weights))

    @cached_property
    def signed_area(self) -> float:
        """Area enclosed by the traversal, positive for counterclockwise."""
        x, y = self.nodes[:, 0], self.nodes[:, 1]
        dx, dy = self.d1[:, 0], self.d1[:, 1]
        return float(0.5 * np.sum(x * dy - y * dx) * self.dalpha)

    def d_ds(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        """Arclength derivative along the stored traversal direction."""
        out = np.asarray(values, dtype=float)
        inv_speed = 1.0 / self.speed
        if out.ndim > 1:
            inv_speed = inv_speed.reshape((-1,) + (1,) * (out.ndim - 1))
        for _ in range(order):
            out = spectral_derivative(out, 1) * inv_speed
        return out

    @cached_property
    def dkappa_ds(self) -> np.ndarray:
        return self.d_ds(self.curvature)

    @cached_property
    def spacing(self) -> np.ndarray:
        return np.linalg.norm(np.roll(self.nodes, -1, axis=0) - self.nodes, axis=1)

    @property
    def spacing_ratio(self) -> float:
        s = self.spacing
        return float(s.max() / s.min())

    @cached_property
    def interpolant(self) -> TrigInterpolant:
        return TrigInterpolant(self.nodes)

    def reversed(self) -> "ClosedCurve":
        return ClosedCurve(self.nodes[::-1].copy(), self.is_hole)

    def scaled(self, factor: float) -> "ClosedCurve":
        return ClosedCurve(self.nodes * factor, self.is_hole)

    def transformed(self, rotation: np.ndarray | None = None, shift=(0.0, 0.0)) -> "ClosedCurve":
        nodes = self.nodes if rotation is None else self.nodes @ np.asarray(rotation).T
        return ClosedCurve(nodes + np.asarray(shift, dtype=float), self.is_hole)

    def with_nodes(self, nodes: np.ndarray) -> "ClosedCurve":
        return ClosedCurve(nodes, self.is_hole)


@dataclass(frozen=True, eq=False)
class Boundary:
    """Ordered boundary components: one outer curve followed by its holes."""

    components: tuple[ClosedCurve, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def outer(self) -> ClosedCurve:
        return self.components[0]

    @property
    def holes(self) -> tuple[ClosedCurve, ...]:
        return self.components[1:]

    @property
    def sizes(self) -> list[int]:
        return [c.N for c in self.components]

    @property
    def total_nodes(self) -> int:
        return sum(self.sizes)

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.sizes)])

    def stack(self, name: str) -> np.ndarray:
        """Concatenate a per-component attribute (``'nodes'``, ``'normal'``...)."""
        return np.concatenate([getattr(c, name) for c in self.components], axis=0)

    @cached_property
    def nodes(self) -> np.ndarray:
        return self.stack("nodes")

    @cached_property
    def normals(self) -> np.ndarray:
        return self.stack("normal")

    @cached_property
    def tangents(self) -> np.ndarray:
        return self.stack("tangent")

    @cached_property
    def weights(self) -> np.ndarray:
        return self.stack("weights")

    @cached_property
    def curvature(self) -> np.ndarray:
        return self.stack("curvature")

    @cached_property
    def dkappa_ds(self) -> np.ndarray:
        return self.stack("dkappa_ds")

    def split(self, values: np.ndarray) -> list[np.ndarray]:
        """Split a stacked per-node array back into components."""
        off = self.offsets
        return [values[off[i]:off[i + 1]] for i in range(len(self.components))]

    def d_ds(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        parts = [c.d_ds(v, order) for c, v in zip(self.components, self.split(values))]
        return np.concatenate(parts, axis=0)

    def map(self, fn) -> "Boundary":
        return Boundary(tuple(fn(c) for c in self.components))

    def scaled(self, factor: float) -> "Boundary":
        return self.map(lambda c: c.scaled(factor))

    def transformed(self, rotation=None, shift=(0.0, 0.0)) -> "Boundary":
        return self.map(lambda c: c.transformed(rotation, shift))

    @property
    def min_spacing(self) -> float:
        return float(min(c.spacing.min() for c in self.components))


# --- operations --------------------------------------------------------------


def frame(curve: ClosedCurve) -> tuple[np.ndarray, np.ndarray]:
    """Outward normal and tangent ``(nu, tau)`` at the nodes."""
    return curve.normal, curve.tangent


def curvature(curve: ClosedCurve) -> np.ndarray:
    """Signed curvature ``div_tau nu``; positive on convex outer curves."""
    return curve.curvature


def tangential_derivative(curve: ClosedCurve, values: np.ndarray, order: int = 1) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape[0] != curve.N:
        raise CurveError(f"field has {values.shape[0]} samples, curve has {curve.N} nodes")
    return curve.d_ds(values, order)


def boundary_integral(boundary: Boundary, values: np.ndarray) -> float | np.ndarray:
    """Trapezoidal quadrature of a node field over all components."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] != boundary.total_nodes:
        raise CurveError("field does not match the boundary node count")
    w = boundary.weights
    if values.ndim == 1:
        return float(w @ values)
    return np.tensordot(w, values, axes=(0, 0))


def perimeter_area(boundary: Boundary) -> tuple[float, float]:
    """Total perimeter and enclosed area (holes counted negatively)."""
    P = sum(c.length for c in boundary.components)
    A = sum(c.signed_area for c in boundary.components)
    if A <= 0:
        raise CurveError(f"non-positive enclosed area {A:.3e}; check orientation")
    return float(P), float(A)


def curvature_energies(boundary: Boundary) -> tuple[float, float]:
    """``(int kappa^2, int (d_tau kappa)^2)`` over the boundary."""
    k = boundary.curvature
    dk = boundary.dkappa_ds
    w = boundary.weights
    return float(w @ k**2), float(w @ dk**2)


def resample(curve: ClosedCurve, n: int | None = None) -> ClosedCurve:
    """Redistribute nodes uniformly in arclength using the trigonometric interpolant.

    Node 0 is kept fixed so that repeated resampling of an already
    equidistant curve is the identity.
    """
    n = curve.N if n is None else int(n)
    if n < MIN_NODES:
        raise CurveError(f"cannot resample to {n} < {MIN_NODES} nodes")
    speed = curve.speed
    N = curve.N
    c = np.fft.fft(speed) / N
    k = wavenumbers(N)
    L = float(c[0].real) * 2 * np.pi
    nz = k != 0
    if N % 2 == 0:
        c = c.copy()
        c[N // 2] = 0.0  # drop Nyquist; it integrates to an O(eps) periodic term

    def arclength(alpha):
        alpha = np.atleast_1d(alpha)
        ph = np.exp(1j * np.outer(alpha, k[nz])) - 1.0
        return c[0].real * alpha + (ph @ (c[nz] / (1j * k[nz]))).real

    speed_interp = TrigInterpolant(speed)
    targets = np.arange(n) * (L / n)
    alpha = targets / L * 2 * np.pi
    converged = False
    for _ in range(50):
        resid = arclength(alpha) - targets
        step = resid / speed_interp(alpha)
        alpha = alpha - step
        if converged:
            break
        # quadratic convergence: one more sweep after 1e-12 reaches roundoff
        converged = np.max(np.abs(step)) < 1e-12
    nodes = curve.interpolant(alpha)
    if n == N and np.max(np.abs(alpha - 2 * np.pi * np.arange(n) / n)) < 1e-13:
        nodes = curve.nodes.copy()
    out = ClosedCurve(nodes, curve.is_hole)
    if _polyline_self_intersects(out.nodes):
        raise CurveError("resampled interpolant self-intersects")
    return out


def resample_boundary(boundary: Boundary, sizes: Sequence[int] | None = None) -> Boundary:
    sizes = boundary.sizes if sizes is None else sizes
    return Boundary(tuple(resample(c, n) for c, n in zip(boundary.components, sizes)))


# --- intersection tests --------------------------------------------------------


def _segments(nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return nodes, np.roll(nodes, -1, axis=0)


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _point_segment_distance(p, a, b):
    ab = b - a
    t = np.clip(np.sum((p - a) * ab, axis=-1) / np.maximum(np.sum(ab * ab, axis=-1), 1e-300), 0.0, 1.0)
    proj = a + t[..., None] * ab
    return np.linalg.norm(p - proj, axis=-1)


def segment_pair_distances(a0, a1, b0, b1) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise (broadcast) segment distances and proper-intersection flags."""
    d1 = a1 - a0
    d2 = b1 - b0
    r = b0 - a0
    denom = _cross(d1, d2)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = _cross(r, d2) / denom
        u = _cross(r, d1) / denom
    hit = (np.abs(denom) > 0) & (s >= 0) & (s <= 1) & (u >= 0) & (u <= 1)
    dist = np.minimum.reduce([
        _point_segment_distance(a0, b0, b1),
        _point_segment_distance(a1, b0, b1),
        _point_segment_distance(b0, a0, a1),
        _point_segment_distance(b1, a0, a1),
    ])
    dist = np.where(hit, 0.0, dist)
    return dist, hit


def _polyline_self_intersects(nodes: np.ndarray) -> bool:
    flag, _, _ = _self_pairs(nodes)
    return flag


def _self_pairs(nodes: np.ndarray):
    a0, a1 = _segments(nodes)
    n = len(nodes)
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    if len(i) == 0:
        return False, np.inf, None
    dist, hit = segment_pair_distances(a0[i], a1[i], a0[j], a1[j])
    m = int(np.argmin(dist))
    return bool(hit.any()), float(dist[m]), (int(i[m]), int(j[m]))


@dataclass(frozen=True)
class IntersectionReport:
    intersects: bool
    min_distance: float
    pair: tuple | None  # ((component, segment), (component, segment))


def self_intersects(boundary: Boundary) -> IntersectionReport:
    """Exact segment test over all non-adjacent segment pairs and component pairs.

    Distinct components also count as intersecting when one crosses the
    other or a hole is not contained in the outer curve's interior.
    """
    best = (np.inf, None)
    hit_any = False
    comps = boundary.components
    for ci, c in enumerate(comps):
        hit, dist, pair = _self_pairs(c.nodes)
        hit_any |= hit
        if dist < best[0]:
            best = (dist, ((ci, pair[0]), (ci, pair[1])))
    for ci in range(len(comps)):
        for cj in range(ci + 1, len(comps)):
            a0, a1 = _segments(comps[ci].nodes)
            b0, b1 = _segments(comps[cj].nodes)
            dist, hit = segment_pair_distances(a0[:, None], a1[:, None], b0[None], b1[None])
            hit_any |= bool(hit.any())
            m = np.unravel_index(np.argmin(dist), dist.shape)
            if dist[m] < best[0]:
                best = (float(dist[m]), ((ci, int(m[0])), (cj, int(m[1]))))
    if not hit_any and len(comps) > 1:
        hit_any = not _holes_nested(boundary)
    return IntersectionReport(hit_any, float(best[0]), best[1])


def points_inside(nodes: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Even-odd containment of points in a closed polygon."""
    from matplotlib.path import Path

    return Path(nodes, closed=False).contains_points(np.atleast_2d(points))


def _holes_nested(boundary: Boundary) -> bool:
    outer = boundary.outer.nodes
    holes = boundary.holes
    for h in holes:
        if not np.all(points_inside(outer, h.nodes)):
            return False
    for i, h in enumerate(holes):
        for j, g in enumerate(holes):
            if i != j and np.any(points_inside(h.nodes, g.nodes[:1])):
                return False
    return True


def validate_boundary(boundary: Boundary) -> None:
    """Raise :class:`CurveError` unless the boundary satisfies the type invariants."""
    if len(boundary.components) == 0:
        raise CurveError("boundary has no components")
    if boundary.outer.is_hole or any(not h.is_hole for h in boundary.holes):
        raise CurveError("first component must be the outer curve, the rest holes")
    if boundary.outer.signed_area <= 0:
        raise CurveError("outer component must be counterclockwise")
    if any(h.signed_area >= 0 for h in boundary.holes):
        raise CurveError("hole components must be clockwise")
    rep = self_intersects(boundary)
    if rep.intersects:
        raise CurveError("boundary self-intersects or holes are not nested")
    perimeter_area(boundary)


def orient(nodes: np.ndarray, is_hole: bool) -> ClosedCurve:
    """Build a component with the orientation required by its role."""
    c = ClosedCurve(nodes, is_hole)
    ccw = c.signed_area > 0
    if ccw == is_hole:
        c = c.reversed()
    return c


def boundary_from_polygons(polygons: Sequence[np.ndarray]) -> Boundary:
    """Infer the outer component by containment and orient all components."""
    polys = [np.asarray(p, dtype=float) for p in polygons]
    if len(polys) == 1:
        return Boundary((orient(polys[0], False),))
    counts = []
    for i, p in enumerate(polys):
        inside_others = sum(
            bool(points_inside(q, p[:1])[0]) for j, q in enumerate(polys) if j != i
        )
        counts.append(inside_others)
    outer_idx = [i for i, c in enumerate(counts) if c == 0]
    if len(outer_idx) != 1:
        raise CurveError("could not identify a unique outer component")
    o = outer_idx[0]
    comps = [orient(polys[o], False)] + [orient(p, True) for i, p in enumerate(polys) if i != o]
    return Boundary(tuple(comps))
