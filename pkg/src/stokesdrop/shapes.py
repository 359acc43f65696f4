"""Reference domains used by the scenarios, oracles and tests."""

from __future__ import annotations

import numpy as np

from .curve import Boundary, ClosedCurve, orient, resample


def _alpha(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def circle_nodes(n: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> np.ndarray:
    a = _alpha(n) + phase
    return np.column_stack([center[0] + radius * np.cos(a), center[1] + radius * np.sin(a)])


def disk(n: int = 128, radius: float = 1.0, center=(0.0, 0.0)) -> Boundary:
    return Boundary((ClosedCurve(circle_nodes(n, radius, center)),))


def annulus(n: int = 128, inner: float = 1.0, outer: float = 2.0, n_inner: int | None = None) -> Boundary:
    """Concentric annulus; the hole ring is stored clockwise."""
    n_inner = n if n_inner is None else n_inner
    hole = circle_nodes(n_inner, inner)[::-1].copy()
    return Boundary((ClosedCurve(circle_nodes(n, outer)), ClosedCurve(hole, is_hole=True)))


def ellipse(n: int = 128, a: float = 2.0, b: float = 1.0, equidistant: bool = True) -> Boundary:
    t = _alpha(n)
    c = ClosedCurve(np.column_stack([a * np.cos(t), b * np.sin(t)]))
    if equidistant:
        c = resample(c)
    return Boundary((c,))


def perturbed_circle(n: int = 128, amplitude: float = 0.05, mode: int = 3, radius: float = 1.0,
                     coefficients=None) -> Boundary:
    """Star-shaped curve ``R (1 + sum_m a_m cos(m alpha) + b_m sin(m alpha))``.

    ``coefficients`` is a list of ``(m, a_m)`` or ``(m, a_m, b_m)``; when it is
    omitted a single ``(mode, amplitude)`` term is used.  The curve is
    resampled to equal arclength.
    """
    t = _alpha(n)
    if coefficients is None:
        coefficients = [(mode, amplitude)]
    rho = np.ones(n)
    for term in coefficients:
        m, a = int(term[0]), float(term[1])
        b = float(term[2]) if len(term) > 2 else 0.0
        rho += a * np.cos(m * t) + b * np.sin(m * t)
    rho *= radius
    c = ClosedCurve(np.column_stack([rho * np.cos(t), rho * np.sin(t)]))
    return Boundary((resample(c),))


def dumbbell(n: int = 256, neck: float = 0.2, half_length: float = 2.0, lobe: float = 1.0,
             neck_fraction: float = 0.4, transition: float = 0.4) -> Boundary:
    """Two round-ish lobes joined by a straight channel of width ``neck``.

    The curve is the graph ``x = half_length cos t``, ``y = sin t * h(cos t)``
    where the half-height profile ``h`` equals ``neck / 2`` on the middle part
    of the axis and rises smoothly to ``lobe`` towards the ends.
    """
    t = _alpha(4 * n)
    c = np.cos(t)
    s = np.abs(c)
    # smooth rise from the channel to the lobes
    z = np.clip((s - neck_fraction) / transition, 0.0, 1.0)
    rise = z**3 * (10 - 15 * z + 6 * z**2)
    h = 0.5 * neck + (lobe - 0.5 * neck) * rise
    nodes = np.column_stack([half_length * c, np.sin(t) * h])
    curve = orient(nodes, False)
    return Boundary((resample(curve, n),))


def from_name(name: str, n: int, **params) -> Boundary:
    """Look up a reference shape by name (used by scenario configs)."""
    builders = {
        "disk": disk,
        "circle": disk,
        "annulus": annulus,
        "ellipse": ellipse,
        "perturbed_circle": perturbed_circle,
        "dumbbell": dumbbell,
    }
    if name not in builders:
        raise KeyError(f"unknown shape {name!r}; choose from {sorted(builders)}")
    return builders[name](n, **params)
