"""Per-record diagnostics of a simulation state."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from ..curve import Boundary, curvature_energies, perimeter_area
from ..stokes import FluidSolution, dissipation, evaluate_layer


@dataclass(frozen=True)
class IdentityCheckResult:
    """Two numerical routes to the same quantity and whether they agree.

    ``measure`` is ``relative``, ``absolute``, ``one-sided`` (``left <= right``),
    ``equality``, ``order`` or ``empirical``.  Results with ``enforced=False``
    are reported but do not make a suite fail.
    """

    name: str
    left: float
    right: float
    abs_residual: float
    rel_residual: float
    resolution: str
    tolerance: float
    passed: bool
    measure: str = "relative"
    enforced: bool = True

    @classmethod
    def compare(cls, name, left, right, tol, resolution="", measure="relative", scale=None,
                enforced=True):
        left, right = float(left), float(right)
        a = abs(left - right)
        ref = max(abs(left), abs(right)) if scale is None else float(scale)
        rel = a / ref if ref > 0 else a
        value = a if measure == "absolute" else rel
        return cls(name, left, right, a, rel, str(resolution), float(tol), bool(value <= tol), measure, enforced)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def trapezoid_error(boundary: Boundary, values: np.ndarray) -> float:
    """Difference between the full and the every-other-node trapezoid sums.

    For spectrally resolved data this is an upper estimate of the error of
    the coarser rule and hence a conservative error bar for the full one.
    """
    full = 0.0
    half = 0.0
    for c, v in zip(boundary.components, boundary.split(values)):
        w = c.weights
        full += w @ v
        half += 2 * (w[::2] @ v[::2])
    return float(abs(full - half))


def growth_envelope(t, E0, P0, r0, theta, C):
    """``tan(arctan E0 + C (P0^21 + 1) t / (theta r0^17))``; ``inf`` past the pole."""
    arg = np.arctan(E0) + C * (P0**21 + 1) * np.asarray(t, dtype=float) / (theta * r0**17)
    return np.where(arg < np.pi / 2, np.tan(np.minimum(arg, np.pi / 2 - 1e-300)), np.inf)


@dataclass(frozen=True)
class ReportContext:
    """Initial-state quantities the per-record diagnostics refer back to."""

    P0: float
    A0: float
    r0: float
    E0: float
    theta: float
    calibration: float | None = None
    interior_norms: bool = False

    @classmethod
    def from_state(cls, state, config) -> "ReportContext":
        P0, A0 = perimeter_area(state.boundary)
        _, E0 = curvature_energies(state.boundary)
        return cls(P0, A0, state.geometry.r_omega, E0, config.theta,
                   config.calibration, config.interior_norms)

    @property
    def K0(self) -> float:
        return float(np.tan(0.5 * (np.arctan(self.E0) + np.pi / 2)))

    @property
    def T1(self) -> float:
        if self.calibration is None:
            return float("nan")
        if self.calibration == 0:
            return float("inf")
        return float(self.theta * self.r0**17 / (self.calibration * (self.P0**21 + 1))
                     * (np.arctan(self.K0) - np.arctan(self.E0)))

    @property
    def T_star(self) -> float:
        """``T1`` with ``r0^17`` replaced by ``min(r0^17, r0^27)``."""
        if self.calibration is None:
            return float("nan")
        return self.T1 * min(1.0, self.r0**10)

    def envelope(self, t) -> float:
        if self.calibration is None:
            return float("nan")
        return float(growth_envelope(t, self.E0, self.P0, self.r0, self.theta, self.calibration))


@dataclass
class DiagnosticsRecord:
    """Scalars reported for one simulation state.

    ``sym_energy`` is ``int |e(u)|^2`` by the boundary identity
    ``2 theta int |e(u)|^2 = -int kappa v``; interior norms are over
    ``{d <= -r_t/4}`` and are NaN unless requested.  ``errors`` holds
    estimated numerical errors of the quadrature-based entries.
    ``ratio_sym_energy`` is ``theta ||e(u)|| r^{5/2} / (|Omega_0| P ||kappa||)``
    and ``ratio_hessian`` is ``(theta^2 ||grad^2 u||^2 - r ||d_s kappa||^2)_+ r^2 / (theta^2 ||grad u||^2)``,
    the empirical constants of the two velocity estimates.
    """

    step_index: int
    t: float
    dt: float
    P: float
    A: float
    r: float
    active: str
    kappa_max: float
    k_l2_sq: float
    dk_l2_sq: float
    dissipation: float
    sym_energy: float
    max_normal_speed: float
    traction_residual: float
    area_drift: float
    grad_l2_sq_interior: float = float("nan")
    hess_l2_sq_interior: float = float("nan")
    ratio_sym_energy: float = float("nan")
    ratio_hessian: float = float("nan")
    K0: float = float("nan")
    T1: float = float("nan")
    T_star: float = float("nan")
    envelope: float = float("nan")
    holder: float = float("nan")
    resampled: bool = False
    component_radii: list = field(default_factory=list)
    errors: dict = field(default_factory=dict)
    absent: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {}
        for k, v in dataclasses.asdict(self).items():
            if isinstance(v, float) and not np.isfinite(v):
                out[k] = None
            else:
                out[k] = v
        return out


def interior_norms(sol: FluidSolution, boundary: Boundary, r: float, h: float | None = None):
    """``int |grad u|^2`` and ``int |grad^2 u|^2`` over ``{d <= -r/4}`` on a grid with ``h = r/16``."""
    from ..quadrature import GridQuadrature

    h = r / 16 if h is None else h
    q = GridQuadrature(boundary, h)
    mask = q.projection.distance <= -0.25 * r
    ev = evaluate_layer(sol, boundary, q.points[mask], hessian=True)
    w = q.weights[mask]
    g2 = np.sum(ev.gradient**2, axis=(1, 2))
    h2 = np.sum(ev.hessian**2, axis=(1, 2, 3))
    return float(w @ g2), float(w @ h2)


def report(state, ctx: ReportContext, previous: DiagnosticsRecord | None = None) -> DiagnosticsRecord:
    """Build the diagnostics record of ``state``."""
    b = state.boundary
    sol = state.solution
    geom = state.geometry
    P, A = perimeter_area(b)
    k2, dk2 = curvature_energies(b)
    v = np.asarray(sol.normal_velocity)
    D = float(-b.weights @ (b.curvature * v))
    theta = ctx.theta
    sym = D / (2 * theta)
    errors = {
        "P": trapezoid_error(b, np.ones(b.total_nodes)),
        "k_l2_sq": trapezoid_error(b, b.curvature**2),
        "dk_l2_sq": trapezoid_error(b, b.dkappa_ds**2),
        "dissipation": trapezoid_error(b, b.curvature * v),
        "traction_residual": float(getattr(sol, "traction_residual", 0.0)),
    }
    rec = DiagnosticsRecord(
        step_index=state.step_index, t=float(state.t), dt=float(state.last_dt), P=P, A=A,
        r=geom.r_omega, active=geom.active, kappa_max=geom.kappa_max, k_l2_sq=k2, dk_l2_sq=dk2,
        dissipation=D, sym_energy=sym, max_normal_speed=float(np.max(np.abs(v))),
        traction_residual=float(getattr(sol, "traction_residual", 0.0)),
        area_drift=abs(A - ctx.A0) / ctx.A0, resampled=bool(state.resampled), errors=errors,
        component_radii=[float(np.mean(np.linalg.norm(c.nodes - c.nodes.mean(axis=0), axis=1)))
                         for c in b.components],
    )
    if k2 > 0 and sym >= 0:
        rec.ratio_sym_energy = float(theta * np.sqrt(sym) * geom.r_omega**2.5 / (ctx.A0 * P * np.sqrt(k2)))
    rec.K0 = ctx.K0
    rec.T1 = ctx.T1
    rec.T_star = ctx.T_star
    if ctx.calibration is not None:
        rec.envelope = ctx.envelope(state.t)
    else:
        rec.absent["envelope"] = "no calibration constant configured"
    if previous is not None and state.t > previous.t:
        rec.holder = abs(rec.r - previous.r) / (state.t - previous.t) ** (1 / 3)
    elif previous is None:
        rec.holder = 0.0
    if ctx.interior_norms and isinstance(sol, FluidSolution):
        g2, h2 = interior_norms(sol, b, geom.r_omega)
        rec.grad_l2_sq_interior = g2
        rec.hess_l2_sq_interior = h2
        r = geom.r_omega
        if g2 > 0:
            excess = theta**2 * h2 - r * dk2
            rec.ratio_hessian = float(max(excess, 0.0) * r**2 / (theta**2 * g2))
        rec.absent["collar"] = "collar {-r/4 < d < 0} omitted from interior norms (unaudited)"
    elif not isinstance(sol, FluidSolution):
        rec.absent["interior_norms"] = "prescribed velocity, no flow field"
    return rec
