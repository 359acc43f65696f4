"""Verification of integral and pointwise identities by two numerical routes.

Each check evaluates the two sides of an identity independently (bulk grid
or collar quadrature against boundary quadrature, time differences against
boundary integrals, finite differences against frame formulas) and returns
:class:`IdentityCheckResult` values.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..curve import Boundary, ClosedCurve, curvature_energies, perimeter_area
from ..fields import Field, frobenius_sq, laplacian
from ..geometry import CutoffProfile, DomainGeometry, cutoff_eta, extended_frame, ubc_radius
from ..quadrature import CollarQuadrature, GridQuadrature
from ..stokes import bulk_dissipation
from .report import IdentityCheckResult

# eighth-order central first-derivative stencil on offsets 1..4
FD_OFFSETS = np.arange(1, 5)
FD_COEFFS = np.array([4 / 5, -1 / 5, 4 / 105, -1 / 280])


def _resolution(boundary: Boundary, **extra) -> str:
    parts = [f"N={'/'.join(str(n) for n in boundary.sizes)}"]
    parts += [f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in extra.items()]
    return ", ".join(parts)


# --- dissipation ----------------------------------------------------------------


def check_dissipation_identity(records: Sequence, tol_interval: float = 1e-3,
                               tol_cumulative: float = 1e-2, floor: float = 1e-10) -> list[IdentityCheckResult]:
    """Perimeter decrements against trapezoidal time integrals of the dissipation.

    Per interval ``P(t_{i+1}) - P(t_i) = -int D dt`` with ``D = -int kappa v``;
    the worst interval and the cumulative balance are reported.  Residuals
    are relative to the larger side but never to less than ``floor P(0)``,
    so equilibria (both sides at round-off level) pass.
    """
    if len(records) < 2:
        raise ValueError("need at least two records")
    t = np.array([r.t for r in records])
    P = np.array([r.P for r in records])
    D = np.array([r.dissipation for r in records])
    dP = np.diff(P)
    integ = 0.5 * (D[1:] + D[:-1]) * np.diff(t)
    small = floor * abs(P[0])
    rel = np.abs(dP + integ) / np.maximum(np.maximum(np.abs(dP), np.abs(integ)), small)
    i = int(np.argmax(rel))
    worst = IdentityCheckResult(
        "dissipation/interval", float(dP[i]), float(-integ[i]), float(abs(dP[i] + integ[i])),
        float(rel[i]), f"{len(records)} records, worst interval t={t[i]:.4g}", tol_interval,
        bool(rel[i] <= tol_interval),
    )
    left, right = P[-1] - P[0], -integ.sum()
    cum = IdentityCheckResult.compare("dissipation/cumulative", left, right, tol_cumulative,
                                      f"{len(records)} records", scale=max(abs(left), abs(right), small))
    return [worst, cum]


def check_dissipation_routes(boundary: Boundary, solution, h: float | None = None,
                             tol: float = 1e-2) -> IdentityCheckResult:
    """Boundary route ``-int kappa v`` against the bulk ``2 theta int |e(u)|^2``."""
    D = float(-boundary.weights @ (boundary.curvature * solution.normal_velocity))
    bulk = bulk_dissipation(solution, boundary, h=h)
    return IdentityCheckResult.compare("dissipation/routes", D, bulk, tol, _resolution(boundary, h=h or 0.0))


# --- evolution identities ----------------------------------------------------


def _advect(boundary: Boundary, law: Callable[[Boundary], np.ndarray], dt: float) -> Boundary:
    """One RK4 step of the node transport ``x' = v(x) nu(x)``."""

    def rhs(b):
        return law(b)[:, None] * b.normals

    def moved(b, disp):
        return Boundary(tuple(ClosedCurve(p, c.is_hole) for p, c in zip(boundary.split(disp), b.components)))

    x0 = boundary.nodes
    k1 = rhs(boundary)
    k2 = rhs(moved(boundary, x0 + 0.5 * dt * k1))
    k3 = rhs(moved(boundary, x0 + 0.5 * dt * k2))
    k4 = rhs(moved(boundary, x0 + dt * k3))
    return moved(boundary, x0 + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4))


def _evolution_functionals(b: Boundary, phi: Field) -> dict:
    w = b.weights
    ph = phi(b.nodes)[:, 0]
    k2, dk2 = curvature_energies(b)
    return {
        "dP/dt": perimeter_area(b)[0],
        "d/dt int phi nu": (w * ph) @ b.normals,
        "d/dt int phi kappa": float(w @ (ph * b.curvature)),
        "d/dt int kappa^2": k2,
        "d/dt int (d_s kappa)^2": dk2,
    }


def _evolution_rates(b: Boundary, v: np.ndarray, phi: Field) -> dict:
    """Right-hand sides written through ``X = v nu`` and its tangential derivatives."""
    w = b.weights
    nu, tau = b.normals, b.tangents
    kap, dkap = b.curvature, b.dkappa_ds
    X = v[:, None] * nu
    dX = b.d_ds(X, 1)
    d2X = b.d_ds(X, 2)
    divX = np.sum(dX * tau, axis=1)
    grad_phi = phi.gradient(b.nodes)[:, 0, :]
    dphi = np.sum(grad_phi * tau, axis=1)
    inner = np.sum(d2X * nu, axis=1) + kap * divX
    return {
        "dP/dt": float(w @ (kap * v)),
        "d/dt int phi nu": (w * np.sum(X * nu, axis=1)) @ grad_phi,
        "d/dt int phi kappa": float(w @ (dphi * np.sum(dX * nu, axis=1) + kap * np.sum(grad_phi * X, axis=1))),
        "d/dt int kappa^2": float(-(w @ (2 * kap * inner + kap**2 * divX))),
        "d/dt int (d_s kappa)^2": float(
            -(w @ (2 * dkap * b.d_ds(inner) + 2 * kap * dkap * b.d_ds(divX)))
            - 3 * (w @ (dkap**2 * divX))
        ),
    }


def check_evolution_identities(boundary: Boundary, law: Callable[[Boundary], np.ndarray], phi: Field,
                               dt: float = 1e-4, tol: float = 1e-4, floor: float = 1e-6,
                               label: str = "") -> list[IdentityCheckResult]:
    """Central time differences of five boundary functionals against their rates.

    ``law`` maps a boundary to the prescribed normal speed at its nodes.  The
    boundary is transported by ``+-dt`` with RK4; the rates are evaluated at
    the centre time.  Relative residuals use ``max(|left|, |right|, floor)``
    so identities whose sides both vanish are judged on an absolute scale.
    """
    plus = _advect(boundary, law, dt)
    minus = _advect(boundary, law, -dt)
    fp = _evolution_functionals(plus, phi)
    fm = _evolution_functionals(minus, phi)
    rates = _evolution_rates(boundary, law(boundary), phi)
    res = []
    for name, rhs in rates.items():
        lhs = (np.asarray(fp[name]) - np.asarray(fm[name])) / (2 * dt)
        lv, rv = np.atleast_1d(lhs), np.atleast_1d(rhs)
        a = float(np.linalg.norm(lv - rv))
        scale = max(float(np.linalg.norm(lv)), float(np.linalg.norm(rv)), floor)
        rel = a / scale
        res.append(IdentityCheckResult(
            f"evolution/{name}" + (f" [{label}]" if label else ""), float(np.linalg.norm(lv)),
            float(np.linalg.norm(rv)), a, rel, _resolution(boundary, dt=dt), tol, bool(rel <= tol),
        ))
    return res


# --- Reilly -----------------------------------------------------------------------


def reilly_sides(boundary: Boundary, field: Field, h: float, geom=None) -> tuple[float, float]:
    """Bulk ``int |grad^2 X|^2 - |Delta X|^2`` and boundary ``-int 2<d_nu X, d_s^2 X> + kappa |grad X|^2``."""
    q = GridQuadrature(boundary if geom is None else geom, h)
    H = field.hessian(q.points)
    lap = H[..., 0, 0] + H[..., 1, 1]
    bulk = q.integrate(frobenius_sq(H) - np.sum(lap**2, axis=1))
    x = boundary.nodes
    G = field.gradient(x)
    dnu = np.einsum("mij,mj->mi", G, boundary.normals)
    d2 = boundary.d_ds(field(x), 2)
    integrand = 2 * np.sum(dnu * d2, axis=1) + boundary.curvature * frobenius_sq(G)
    return float(bulk), float(-(boundary.weights @ integrand))


def verify_reilly(boundary: Boundary, field: Field, h: float = 1 / 256, tol: float = 1e-4,
                  name: str | None = None) -> IdentityCheckResult:
    """Reilly's formula; residuals are measured against ``max(1, |sides|)``."""
    bulk, bnd = reilly_sides(boundary, field, h)
    label = name or getattr(field, "name", "field")
    return IdentityCheckResult.compare(f"reilly/{label}", bulk, bnd, tol, _resolution(boundary, h=h),
                                       scale=max(1.0, abs(bulk), abs(bnd)))


def reilly_convergence(boundary: Boundary, field: Field, hs: Sequence[float], reference: float | None = None):
    """Residuals and observed orders of the bulk route under grid refinement.

    Without ``reference`` the boundary route (spectrally accurate) is the
    reference value.  Cut-cell errors oscillate with the grid phase, so
    besides the pairwise orders the least-squares slope of ``log residual``
    against ``log h`` is returned as the order estimate.
    """
    geom = ubc_radius(boundary)
    res = []
    for h in hs:
        bulk, bnd = reilly_sides(boundary, field, h, geom)
        ref = bnd if reference is None else reference
        res.append(abs(bulk - ref))
    res = np.array(res)
    ratios = np.asarray(hs[:-1]) / np.asarray(hs[1:])
    with np.errstate(divide="ignore", invalid="ignore"):
        orders = np.log(res[:-1] / res[1:]) / np.log(ratios)
    fitted = float(np.polyfit(np.log(hs), np.log(res), 1)[0])
    return res, orders, fitted


# --- frame identities ----------------------------------------------------------


class ConicFrame:
    """Exact extended frame of the ellipse ``(x/a)^2 + (y/b)^2 = 1``.

    The foot parameter is found by a dense search followed by Newton
    iterations; this serves as the finite-difference oracle's frame field.
    """

    def __init__(self, a: float, b: float):
        self.a, self.b = float(a), float(b)
        self._t = np.linspace(0, 2 * np.pi, 2048, endpoint=False)
        self._pts = np.column_stack([a * np.cos(self._t), b * np.sin(self._t)])

    def foot_parameter(self, points) -> np.ndarray:
        p = np.atleast_2d(points)
        d2 = ((p[:, None, :] - self._pts[None]) ** 2).sum(axis=2)
        t = self._t[np.argmin(d2, axis=1)]
        a, b = self.a, self.b
        for _ in range(30):
            c, s = np.cos(t), np.sin(t)
            ex, ey = a * c - p[:, 0], b * s - p[:, 1]
            g1 = -ex * a * s + ey * b * c
            g2 = (a * s) ** 2 + (b * c) ** 2 - ex * a * c - ey * b * s
            step = g1 / g2
            t = t - step
            if np.max(np.abs(step)) < 1e-15:
                break
        return t

    def normal(self, points) -> np.ndarray:
        t = self.foot_parameter(points)
        n = np.column_stack([self.b * np.cos(t), self.a * np.sin(t)])
        return n / np.linalg.norm(n, axis=1)[:, None]

    def tangent(self, points) -> np.ndarray:
        n = self.normal(points)
        return np.column_stack([-n[:, 1], n[:, 0]])

    def vector(self, which: str, points) -> np.ndarray:
        return self.normal(points) if which == "n" else self.tangent(points)


def frame_derivative(fn: Callable, frame, word: str, points, h: float) -> np.ndarray:
    """Iterated directional derivative ``d_{w0} d_{w1} ... fn`` along frame fields.

    ``word`` is read left to right as the order of application from the
    outside in, e.g. ``"nt"`` is ``d_nu (d_tau fn)``.  Each level is an
    eighth-order central difference along the straight line through the
    point in the direction of the frame vector there.
    """
    pts = np.atleast_2d(points)
    if not word:
        return fn(pts)
    V = frame.vector(word[0], pts)
    out = 0.0
    for k, c in zip(FD_OFFSETS, FD_COEFFS):
        fp = frame_derivative(fn, frame, word[1:], pts + k * h * V, h)
        fm = frame_derivative(fn, frame, word[1:], pts - k * h * V, h)
        out = out + c * (fp - fm)
    return out / h


def _pointwise(name, lhs, rhs, tol, resolution) -> IdentityCheckResult:
    lhs = np.asarray(lhs).reshape(len(lhs), -1)
    rhs = np.asarray(rhs).reshape(len(rhs), -1)
    err = np.linalg.norm(lhs - rhs, axis=1)
    scale = np.maximum(1.0, np.maximum(np.linalg.norm(lhs, axis=1), np.linalg.norm(rhs, axis=1)))
    rel = err / scale
    i = int(np.argmax(rel))
    return IdentityCheckResult(name, float(np.linalg.norm(lhs[i])), float(np.linalg.norm(rhs[i])),
                               float(err.max()), float(rel[i]), resolution, tol, bool(rel[i] <= tol))


def tubular_points(geom: DomainGeometry, depths: Sequence[float], per_depth: int = 12) -> np.ndarray:
    """Points ``x - d nu`` above evenly spaced boundary nodes, for the given depths."""
    b = geom.boundary
    idx = np.linspace(0, b.total_nodes, per_depth, endpoint=False).astype(int)
    x, nu = b.nodes[idx], b.normals[idx]
    return np.concatenate([x + d * nu for d in depths])


def verify_frame_identities(geom: DomainGeometry, field: Field, oracle, points, h: float = 2.5e-3,
                            tol: float = 1e-6, label: str = "") -> list[IdentityCheckResult]:
    """Pointwise frame decompositions of derivatives of ``field``.

    Left sides come from the field's exact Cartesian derivatives; right sides
    combine finite-difference directional derivatives along the ``oracle``
    frame with the library's ``div nu`` and ``d_tau div nu``.
    """
    pts = np.atleast_2d(points)
    fr = extended_frame(geom, pts)
    dn = fr.div_normal[:, None]
    dtdn = fr.dtau_div_normal[:, None]
    D = {w: frame_derivative(field, oracle, w, pts, h)
         for w in ("n", "t", "nn", "nt", "tn", "tt", "nnn", "nnt", "ntt", "tnn", "ttt")}
    res_tag = f"{len(pts)} points, h={h:g}"
    tag = f" [{label}]" if label else ""
    out = []
    out.append(_pointwise("frame/change of order" + tag, D["tn"], D["nt"] + dn * D["t"], tol, res_tag))
    out.append(_pointwise("frame/Delta X" + tag, laplacian(field, pts), D["nn"] + D["tt"] + dn * D["n"], tol, res_tag))
    H = field.hessian(pts)
    rhs2 = (np.sum(D["nn"] ** 2, axis=1) + 2 * np.sum(D["nt"] ** 2, axis=1)
            + np.sum((D["tt"] + dn * D["n"]) ** 2, axis=1))
    out.append(_pointwise("frame/|grad^2 X|^2" + tag, frobenius_sq(H), rhs2, tol, res_tag))
    T = field.third(pts)
    a = D["ntt"] + dn * D["nn"] - dn**2 * D["n"]
    rhs3 = (np.sum(D["nnn"] ** 2, axis=1) + 2 * np.sum(D["nnt"] ** 2, axis=1) + np.sum(a**2, axis=1)
            + np.sum((D["tnn"] - 2 * dn * D["nt"]) ** 2, axis=1) + 2 * np.sum(a**2, axis=1)
            + np.sum((D["ttt"] + 3 * dn * D["nt"] + dtdn * D["n"] + dn**2 * D["t"]) ** 2, axis=1))
    out.append(_pointwise("frame/|grad^3 X|^2" + tag, frobenius_sq(T), rhs3, tol, res_tag))
    return out


def verify_div_normal(geom: DomainGeometry, oracle, points, h: float = 2.5e-3, tol: float = 1e-6,
                      label: str = "") -> list[IdentityCheckResult]:
    """``d_nu div nu = -(div nu)^2`` and the ``d_tau div nu`` formula, by differences of ``div nu``."""
    pts = np.atleast_2d(points)
    fr = extended_frame(geom, pts)

    def divn(p):
        return extended_frame(geom, p, check=False).div_normal[:, None]

    dn = frame_derivative(divn, oracle, "n", pts, h)[:, 0]
    dt = frame_derivative(divn, oracle, "t", pts, h)[:, 0]
    tag = f" [{label}]" if label else ""
    res_tag = f"{len(pts)} points, h={h:g}"
    return [
        _pointwise("frame/d_nu div nu" + tag, dn, -fr.div_normal**2, tol, res_tag),
        _pointwise("frame/d_tau div nu" + tag, dt, fr.dtau_div_normal, tol, res_tag),
    ]


def verify_cutoff_identities(geom: DomainGeometry, phi: Field, profile: CutoffProfile | None = None,
                             tol: float = 1e-5, order: int = 12, label: str = "") -> list[IdentityCheckResult]:
    """Boundary integrals of ``phi`` and ``kappa phi`` against cutoff bulk integrals over the collar."""
    profile = profile or CutoffProfile()
    r = geom.r_omega
    cq = CollarQuadrature(geom, profile.outer * r, breaks=[profile.inner * r], order=order)
    eta, deta, _ = cutoff_eta(geom, profile, distance=cq.distance)
    f = phi(cq.points)[:, 0]
    dnf = np.sum(phi.gradient(cq.points)[:, 0, :] * cq.normal, axis=1)
    divn = cq.div_normal
    b = geom.boundary
    fb = phi(b.nodes)[:, 0]
    tag = f" [{label}]" if label else ""
    res_tag = _resolution(b, collar_order=order)
    return [
        IdentityCheckResult.compare("cutoff/int phi" + tag, b.weights @ fb,
                                    cq.integrate(f * deta + eta * dnf + eta * f * divn), tol, res_tag),
        IdentityCheckResult.compare("cutoff/int kappa phi" + tag, b.weights @ (b.curvature * fb),
                                    cq.integrate(eta * dnf * divn + f * deta * divn), tol, res_tag),
    ]


def verify_bulk_curvature_estimate(geom: DomainGeometry, factor: float = 1.5, order: int = 12) -> IdentityCheckResult:
    """One-sided: ``int_{collar r/2} (d_tau div nu)^2 <= factor r int (d_s kappa)^2``.

    With ``d_tau div nu = kappa_s / (1 + d kappa)^3`` and the collar Jacobian
    ``1 + d kappa >= 1/2`` the bound holds with ``factor = 15/4``; the
    smaller ``3/2`` corresponds to the integrand ``kappa_s^2 / (1 + d kappa)^3``.
    """
    r = geom.r_omega
    cq = CollarQuadrature(geom, 0.5 * r, order=order)
    lhs = cq.integrate(cq.dtau_div_normal**2)
    _, dk2 = curvature_energies(geom.boundary)
    rhs = factor * r * dk2
    a = abs(lhs - rhs)
    return IdentityCheckResult(f"frame/bulk curvature estimate ({factor:g} r)", lhs, rhs, a,
                               a / max(abs(rhs), 1e-300), _resolution(geom.boundary, collar_order=order),
                               0.0, bool(lhs <= rhs * (1 + 1e-12) + 1e-14), "one-sided")


def verify_trace_inequality(geom: DomainGeometry, field: Field, p: float = 1.0, h: float = 1 / 256,
                            equality_tol: float | None = None, label: str = "") -> IdentityCheckResult:
    """``int_{bdry} |f|^p <= int (2/r)|f|^p + p |f|^{p-1} |grad f|``.

    With ``equality_tol`` the two sides are additionally required to agree,
    which is the case for constant ``f`` on a disk.
    """
    b = geom.boundary
    r = geom.r_omega
    q = GridQuadrature(geom, h)
    f = np.abs(field(q.points)[:, 0])
    g = np.linalg.norm(field.gradient(q.points)[:, 0, :], axis=1)
    rhs = q.integrate(2 / r * f**p + p * f ** (p - 1) * g)
    lhs = float(b.weights @ np.abs(field(b.nodes)[:, 0]) ** p)
    a = abs(lhs - rhs)
    rel = a / max(abs(rhs), 1e-300)
    passed = lhs <= rhs * (1 + 1e-9)
    measure = "one-sided"
    tol = 0.0
    if equality_tol is not None:
        passed = rel <= equality_tol
        measure = "equality"
        tol = equality_tol
    name = "trace inequality" + (f" [{label}]" if label else "")
    return IdentityCheckResult(name, lhs, rhs, a, rel, _resolution(b, h=h), tol, bool(passed), measure)
