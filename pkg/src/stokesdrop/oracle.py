"""Closed-form evolution of a concentric annulus.

A ring ``{l < |x| < L}`` stays concentric under the flow; the velocity is the
potential field ``u = lam x/|x|^2`` with ``lam = -L l / (2 (L - l))`` and the
pressure is the constant ``1/(L - l)``.  Area conservation and the rate of
the inner radius give ``l(t), L(t)`` explicitly.  With viscosity ``theta``
the flow is the ``theta = 1`` flow at time ``t/theta``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class AnnulusState:
    t: float
    theta: float
    l: float
    L: float
    lam: float
    pressure: float
    u_inner: float
    u_outer: float
    P: float
    A: float
    r_omega: float
    k_l2_sq: float
    dissipation: float
    collapse_time: float

    def to_json(self) -> dict:
        return asdict(self)


class AnnulusOracle:
    """Analytic annulus trajectory for initial radii ``l0 < L0``."""

    def __init__(self, l0: float, L0: float, theta: float = 1.0):
        if not (0 < l0 < L0):
            raise OracleError("need 0 < l0 < L0")
        if theta <= 0:
            raise OracleError("theta must be positive")
        self.l0, self.L0, self.theta = float(l0), float(L0), float(theta)
        self.area_over_pi = L0**2 - l0**2
        self.b0 = np.sqrt(self.area_over_pi + l0**2) - l0

    @property
    def collapse_time(self) -> float:
        """Time at which the hole closes, in units of the ``theta``-flow."""
        return float(self.theta * (2 * np.sqrt(self.area_over_pi) - 2 * self.b0))

    def radii(self, t) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float)
        s = t / self.theta
        b = self.b0 + s / 2
        den = 2 * self.b0 + s
        l = (self.area_over_pi - b**2) / den
        L = (self.area_over_pi + b**2) / den
        return l, L

    def r_omega(self, t) -> np.ndarray:
        l, L = self.radii(t)
        return np.minimum(l, (L - l) / 2)

    def state(self, t: float) -> AnnulusState:
        t = float(t)
        if t < 0 or t >= self.collapse_time:
            raise OracleError(f"t must lie in [0, {self.collapse_time:.12g})")
        l, L = (float(x) for x in self.radii(t))
        lam = -L * l / (2 * (L - l))
        p = 1 / (L - l)
        # outward normal velocity: +|lam|/l on the hole, lam/L on the outer ring
        u_in = -lam / l
        u_out = lam / L
        D = np.pi * (L + l) / (L - l) / self.theta
        return AnnulusState(
            t=t, theta=self.theta, l=l, L=L, lam=lam / self.theta, pressure=p,
            u_inner=u_in / self.theta, u_outer=u_out / self.theta,
            P=2 * np.pi * (l + L), A=np.pi * (L * L - l * l),
            r_omega=min(l, (L - l) / 2), k_l2_sq=2 * np.pi * (1 / l + 1 / L),
            dissipation=float(D), collapse_time=self.collapse_time,
        )

    def velocity(self, points, t: float = 0.0) -> np.ndarray:
        """``u = lam x/|x|^2`` at ``points``."""
        st = self.state(t)
        x = np.atleast_2d(np.asarray(points, dtype=float))
        return st.lam * x / np.sum(x * x, axis=1)[:, None]
