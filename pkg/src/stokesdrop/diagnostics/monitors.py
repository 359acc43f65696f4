"""Trajectory monitors: Hoelder continuity of the rolling-ball radius,
windowed curvature averages and the Gronwall envelope of ``int (d_s kappa)^2``."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..curve import Boundary, curvature_energies
from .report import IdentityCheckResult, ReportContext, growth_envelope

HOLDER_EXPONENT = 1.0 / 3.0


@dataclass
class HolderTable:
    times: np.ndarray
    radii: np.ndarray
    consecutive: np.ndarray
    sup: float
    argsup: tuple

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.sup) and np.all(np.isfinite(self.consecutive)))

    def to_json(self) -> dict:
        return {"times": self.times.tolist(), "radii": self.radii.tolist(),
                "consecutive": self.consecutive.tolist(), "sup": self.sup,
                "argsup": list(self.argsup), "finite": self.finite}


def holder_table(times: Sequence[float], radii: Sequence[float], exponent: float = HOLDER_EXPONENT) -> HolderTable:
    """``|r_t - r_s| / |t - s|^exponent`` between consecutive records and its sup over all pairs."""
    t = np.asarray(times, dtype=float)
    r = np.asarray(radii, dtype=float)
    if len(t) < 2:
        return HolderTable(t, r, np.zeros(0), 0.0, (0, 0))
    cons = np.abs(np.diff(r)) / np.diff(t) ** exponent
    dt = np.abs(t[:, None] - t[None, :])
    dr = np.abs(r[:, None] - r[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(dt > 0, dr / dt**exponent, 0.0)
    i, j = np.unravel_index(int(np.argmax(q)), q.shape)
    return HolderTable(t, r, cons, float(q[i, j]), (int(min(i, j)), int(max(i, j))))


def window_weights(nodes: np.ndarray, center: np.ndarray, rho: float) -> np.ndarray:
    """Bump ``(1 - |x - x0|^2 / rho^2)_+^2`` supported in the ball ``B_rho(x0)``."""
    s = np.sum((nodes - center) ** 2, axis=1) / rho**2
    return np.clip(1 - s, 0.0, None) ** 2


def windowed_curvature_check(boundary: Boundary, r_omega: float, rho_fractions=(0.1, 0.3, 0.6, 0.9),
                             samples: int = 32) -> IdentityCheckResult:
    """One-sided: ``|kappa(x) - <kappa>_phi| <= sqrt(pi rho) ||d_s kappa||`` on ``B_rho(x0)``.

    ``<kappa>_phi`` is the boundary average of ``kappa`` against a bump in
    ``B_rho(x0)``; every node ``x`` in the ball is tested, for sampled
    ``x0`` and ``rho < r_omega``.  Reports the worst left/right quotient.
    """
    x = boundary.nodes
    w = boundary.weights
    k = boundary.curvature
    _, dk2 = curvature_energies(boundary)
    norm = np.sqrt(dk2)
    idx = np.linspace(0, len(x), samples, endpoint=False).astype(int)
    worst = (0.0, 0.0, 0.0)
    for frac in rho_fractions:
        rho = frac * r_omega
        bound = np.sqrt(np.pi * rho) * norm
        for i in idx:
            phi = window_weights(x, x[i], rho)
            avg = (w * phi) @ k / (w @ phi)
            inside = phi > 0
            dev = float(np.max(np.abs(k[inside] - avg)))
            q = dev / bound if bound > 0 else (0.0 if dev < 1e-12 else np.inf)
            if q >= worst[0]:
                worst = (q, dev, bound)
    q, dev, bound = worst
    return IdentityCheckResult("curvature window average", dev, bound, abs(dev - bound), q,
                               f"N={boundary.total_nodes}, {samples} centres", 1.0,
                               bool(dev <= bound * (1 + 1e-9) + 1e-12), "one-sided")


def curvature_modulus(snapshots: Sequence, rho: float, theta: float = 1.0) -> float:
    """``sup |kappa_t(x) - kappa_s(y)|`` over ``|t - s| <= theta rho^{3/2}`` and ``|x - y| <= rho / 16``."""
    best = 0.0
    window = theta * rho**1.5
    for a in range(len(snapshots)):
        for b in range(a, len(snapshots)):
            sa, sb = snapshots[a], snapshots[b]
            if abs(sb.t - sa.t) > window:
                continue
            d = np.linalg.norm(sa.boundary.nodes[:, None] - sb.boundary.nodes[None], axis=2)
            ii, jj = np.nonzero(d <= rho / 16)
            if len(ii):
                best = max(best, float(np.max(np.abs(sa.kappa[ii] - sb.kappa[jj]))))
    return best


def calibrate_growth(times, dk2, E0: float, P0: float, r0: float, theta: float) -> float:
    """Smallest ``C >= 0`` with ``int (d_s kappa_t)^2 <= growth2(t; C)`` at every record."""
    t = np.asarray(times, dtype=float)
    e = np.asarray(dk2, dtype=float)
    rate = (P0**21 + 1) / (theta * r0**17)
    need = np.arctan(e) - np.arctan(E0)
    pos = (t > 0) & (need > 0)
    if not np.any(pos):
        return 0.0
    return float(np.max(need[pos] / (rate * t[pos])))


@dataclass
class GronwallMonitor:
    calibration: float | None
    K0: float
    T1: float
    T_star: float
    envelope: np.ndarray
    inside: bool | None
    tilde_T0: float
    below_K0_throughout: bool
    holder: HolderTable
    records: int
    notes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d["envelope"] = [None if not np.isfinite(v) else float(v) for v in self.envelope]
        d["holder"] = self.holder.to_json()
        for k in ("T1", "T_star", "tilde_T0"):
            if not np.isfinite(d[k]):
                d[k] = None
        return d


def gronwall_monitor(records: Sequence, ctx: ReportContext) -> GronwallMonitor:
    """Envelope trace, ``K0``, ``T1`` and the sub-``K0`` window of a trajectory.

    ``inside`` is ``None`` for uncalibrated contexts: the envelope is then
    reported but not asserted.
    """
    if len(records) < 3:
        raise ValueError("need at least three records")
    t = np.array([r.t for r in records])
    dk2 = np.array([r.dk_l2_sq for r in records])
    rr = np.array([r.r for r in records])
    K0 = ctx.K0
    notes = {}
    if ctx.calibration is None:
        env = np.full(len(t), np.nan)
        inside = None
        notes["envelope"] = "uncalibrated; reported only"
    else:
        env = growth_envelope(t, ctx.E0, ctx.P0, ctx.r0, ctx.theta, ctx.calibration)
        inside = bool(np.all(dk2 <= env * (1 + 1e-12) + 1e-15))
    ok = (dk2 <= K0) & (rr >= ctx.r0 / 2)
    if ok.all():
        tilde = float(t[-1])
        notes["tilde_T0"] = "condition held up to the last record"
    else:
        first = int(np.argmin(ok))
        tilde = float(t[first - 1]) if first > 0 else 0.0
    return GronwallMonitor(ctx.calibration, K0, ctx.T1, ctx.T_star, env, inside, tilde,
                           bool(np.all(dk2 <= K0)), holder_table(t, rr), len(records), notes)


def extrapolate_collapse(times, radii, window: float = 0.6, degree: int = 3) -> float:
    """First root beyond the last record of a polynomial fit to the hole radius.

    The fit uses records with ``t >= window * t_last``.
    """
    t = np.asarray(times, dtype=float)
    r = np.asarray(radii, dtype=float)
    keep = t >= window * t[-1]
    roots = np.roots(np.polyfit(t[keep], r[keep], degree))
    roots = roots[np.abs(roots.imag) < 1e-12].real
    roots = roots[roots > t[-1]]
    return float(roots.min()) if len(roots) else float("inf")
