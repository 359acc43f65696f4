"""Interior Stokes flow with surface-tension traction, by a Stokeslet single layer.

The velocity is represented as

    u = S f + sum_k q_k s_k + (a1 - w y', a2 + w x'),

with ``S`` the Stokeslet single layer on all boundary components, ``s_k``
a point source inside hole ``k`` (the single layer carries no net flux
through a hole) and a rigid motion written in coordinates ``x'`` relative
to the boundary centroid.  The density solves the interior traction
equation ``(1/2 + K') f + sum_k q_k t_k = -kappa nu``; the rigid-motion
nullspace and the per-hole normal-density nullspace are removed by a
bordered square system, and the rigid part is fixed by the moment
conditions (zero mean velocity, zero mean vorticity).

The kernel normalisation is that of a fluid with viscosity ``theta``:
``G = (-log r I + r r^T / r^2) / (4 pi theta)``, pressure kernel
``r / (2 pi r^2)`` and stress kernel ``-r r r / (pi r^4)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .curve import Boundary, ClosedCurve, points_inside
from .geometry import upsample_derivatives


class SolverError(RuntimeError):
    """Raised when the bordered system is singular or the tolerance is not reached."""


# --- quadrature pieces --------------------------------------------------------


def kress_weights(n: int) -> np.ndarray:
    """Circulant weights for ``int_0^{2pi} log(4 sin^2((t-s)/2)) phi(s) ds``.

    Returns the ``(n, n)`` matrix ``R[i, j]`` for nodes ``t_i = 2 pi i / n``
    (``n`` even).
    """
    if n % 2:
        raise ValueError("log quadrature needs an even node count")
    m = n // 2
    t = 2 * np.pi * np.arange(n) / n
    k = np.arange(1, m)
    col = -(2 * np.pi / m) * (np.cos(np.outer(t, k)) / k).sum(axis=1) - (np.pi / m**2) * np.cos(m * t)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return col[idx]


def _pair_geometry(targets, sources):
    r = targets[:, None, :] - sources[None, :, :]
    r2 = np.sum(r * r, axis=2)
    return r, r2


def velocity_matrix(boundary: Boundary, theta: float) -> np.ndarray:
    """Boundary velocity of the single layer, ``u = V @ [f_x; f_y]``."""
    x = boundary.nodes
    n = len(x)
    w = boundary.weights
    r, r2 = _pair_geometry(x, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = 0.5 * np.log(r2)
        rxx = r[..., 0] ** 2 / r2
        rxy = r[..., 0] * r[..., 1] / r2
        ryy = r[..., 1] ** 2 / r2
    L = logr * w[None, :]
    off = boundary.offsets
    for ci, c in enumerate(boundary.components):
        sl = slice(off[ci], off[ci + 1])
        m = c.N
        t = 2 * np.pi * np.arange(m) / m
        dt = t[:, None] - t[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            log4sin = np.log(4 * np.sin(dt / 2) ** 2)
            smooth = logr[sl, sl] - 0.5 * log4sin
        np.fill_diagonal(smooth, np.log(c.speed))
        R = kress_weights(m)
        L[sl, sl] = (0.5 * R + (2 * np.pi / m) * smooth) * c.speed[None, :]
        tau = c.tangent
        ii = np.arange(off[ci], off[ci + 1])
        rxx[ii, ii] = tau[:, 0] ** 2
        rxy[ii, ii] = tau[:, 0] * tau[:, 1]
        ryy[ii, ii] = tau[:, 1] ** 2
    c0 = 1.0 / (4 * np.pi * theta)
    V = np.empty((2 * n, 2 * n))
    V[:n, :n] = c0 * (-L + rxx * w[None, :])
    V[:n, n:] = c0 * (rxy * w[None, :])
    V[n:, :n] = V[:n, n:]
    V[n:, n:] = c0 * (-L + ryy * w[None, :])
    return V


def traction_matrix(boundary: Boundary) -> np.ndarray:
    """Interior traction of the single layer, ``t = (1/2 + K') f``."""
    x = boundary.nodes
    n = len(x)
    nu = boundary.normals
    tau = boundary.tangents
    w = boundary.weights
    kap = boundary.curvature
    r, r2 = _pair_geometry(x, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        rn = np.einsum("ijk,ik->ij", r, nu) / r2**2
        kxx = -(1 / np.pi) * r[..., 0] ** 2 * rn
        kxy = -(1 / np.pi) * r[..., 0] * r[..., 1] * rn
        kyy = -(1 / np.pi) * r[..., 1] ** 2 * rn
    ii = np.arange(n)
    diag = -kap / (2 * np.pi)
    kxx[ii, ii] = diag * tau[:, 0] ** 2
    kxy[ii, ii] = diag * tau[:, 0] * tau[:, 1]
    kyy[ii, ii] = diag * tau[:, 1] ** 2
    T = np.empty((2 * n, 2 * n))
    T[:n, :n] = kxx * w[None, :]
    T[:n, n:] = kxy * w[None, :]
    T[n:, :n] = T[:n, n:]
    T[n:, n:] = kyy * w[None, :]
    T[ii, ii] += 0.5
    T[n + ii, n + ii] += 0.5
    return T


def hole_centers(boundary: Boundary) -> np.ndarray:
    """A point well inside every hole, used as the location of its source."""
    out = []
    for h in boundary.holes:
        c = h.nodes.mean(axis=0)
        ok = points_inside(h.nodes, c[None])[0]
        if ok:
            dmin = np.min(np.linalg.norm(h.nodes - c, axis=1))
            ok = dmin > 0.25 * np.max(np.linalg.norm(h.nodes - c, axis=1))
        if not ok:
            # step from the most curved-out node along the normal into the hole
            i = int(np.argmin(h.curvature))
            cand = h.nodes[i] + h.normal[i] * (0.5 / max(abs(h.curvature[i]), 1e-12))
            c = cand
        out.append(c)
    return np.asarray(out).reshape(-1, 2)


def source_velocity(points, center, theta: float) -> np.ndarray:
    r = np.atleast_2d(points) - center
    return r / (2 * np.pi * theta * np.sum(r * r, axis=1)[:, None])


def source_gradient(points, center, theta: float) -> np.ndarray:
    """``grad u[i, j] = d_j u_i`` of the unit source; symmetric and trace free."""
    r = np.atleast_2d(points) - center
    r2 = np.sum(r * r, axis=1)
    eye = np.eye(2)[None]
    return (eye / r2[:, None, None] - 2 * r[:, :, None] * r[:, None, :] / r2[:, None, None] ** 2) / (2 * np.pi * theta)


def source_traction(points, normals, center) -> np.ndarray:
    """Traction ``2 theta e(u) nu`` of the source ``s_k``; independent of theta."""
    return 2 * np.einsum("mij,mj->mi", source_gradient(points, center, 1.0), normals)


# --- solution container -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FluidSolution:
    """Boundary data of the Stokes solution on a fixed boundary.

    Attributes
    ----------
    theta : float
    boundary_velocity : (N, 2) array
    normal_velocity : (N,) array
    pressure_trace : (N,) array
    layer_density : (N, 2) array
    source_strengths : (H,) array
    source_centers : (H, 2) array
    rigid_coefficients : (3,) array
        ``(a1, a2, w)`` of the rigid motion about ``center``.
    center : (2,) array
    traction_residual : float
        Max-norm of the traction error at the midpoints between nodes.
    rcond : float
        LAPACK reciprocal condition estimate of the bordered matrix.
    """

    theta: float
    boundary_velocity: np.ndarray
    normal_velocity: np.ndarray
    pressure_trace: np.ndarray
    layer_density: np.ndarray
    source_strengths: np.ndarray
    source_centers: np.ndarray
    rigid_coefficients: np.ndarray
    center: np.ndarray
    traction_residual: float = np.nan
    rcond: float = np.nan
    border_coefficients: np.ndarray = field(default_factory=lambda: np.zeros(3))


def _rigid_columns(x, center):
    xc = x - center
    n = len(x)
    cols = np.zeros((2 * n, 3))
    cols[:n, 0] = 1.0
    cols[n:, 1] = 1.0
    cols[:n, 2] = -xc[:, 1]
    cols[n:, 2] = xc[:, 0]
    return cols


def _moment_rows(boundary: Boundary, center) -> np.ndarray:
    """Rows mapping boundary velocity to ``(int u_1, int u_2, int curl u)`` over the domain."""
    x = boundary.nodes - center
    nu = boundary.normals
    w = boundary.weights
    n = len(x)
    M = np.zeros((3, 2 * n))
    # int_Omega u_i = int x_i <u, nu>
    M[0, :n] = w * x[:, 0] * nu[:, 0]
    M[0, n:] = w * x[:, 0] * nu[:, 1]
    M[1, :n] = w * x[:, 1] * nu[:, 0]
    M[1, n:] = w * x[:, 1] * nu[:, 1]
    # int_Omega (d1 u2 - d2 u1) = int (u2 nu1 - u1 nu2)
    M[2, :n] = -w * nu[:, 1]
    M[2, n:] = w * nu[:, 0]
    return M


def boundary_centroid(boundary: Boundary) -> np.ndarray:
    w = boundary.weights
    return (w @ boundary.nodes) / w.sum()


def solve(boundary: Boundary, theta: float = 1.0, tol: float = 1e-6, check: bool = True) -> FluidSolution:
    """Solve for the flow driven by the traction ``-kappa nu`` on ``boundary``.

    Parameters
    ----------
    boundary : Boundary
    theta : float
        Viscosity, positive.
    tol : float
        Bound on the midpoint traction residual; exceeded -> :class:`SolverError`
        when ``check`` is set.
    """
    if not theta > 0:
        raise ValueError("viscosity must be positive")
    x = boundary.nodes
    n = len(x)
    nu = boundary.normals
    w = boundary.weights
    H = len(boundary.holes)
    center = boundary_centroid(boundary)
    centers = hole_centers(boundary)

    T = traction_matrix(boundary)
    V = velocity_matrix(boundary, theta)
    src_t = np.zeros((2 * n, H))
    src_u = np.zeros((2 * n, H))
    for k in range(H):
        t = source_traction(x, nu, centers[k])
        u = source_velocity(x, centers[k], theta)
        src_t[:, k] = np.concatenate([t[:, 0], t[:, 1]])
        src_u[:, k] = np.concatenate([u[:, 0], u[:, 1]])
    rigid = _rigid_columns(x, center)
    Mrow = _moment_rows(boundary, center)

    size = 2 * n + H + 6
    A = np.zeros((size, size))
    iq = slice(2 * n, 2 * n + H)
    ic = slice(2 * n + H, 2 * n + H + 3)
    ib = slice(2 * n + H + 3, size)
    # traction rows
    A[:2 * n, :2 * n] = T
    A[:2 * n, iq] = src_t
    A[:2 * n, ib] = rigid
    # gauge rows: zero net force and torque of the density, zero normal density on holes
    g = np.zeros((3 + H, 2 * n))
    g[0, :n] = w
    g[1, n:] = w
    xc = x - center
    g[2, :n] = -w * xc[:, 1]
    g[2, n:] = w * xc[:, 0]
    off = boundary.offsets
    for k in range(H):
        sl = np.arange(off[k + 1], off[k + 2])
        g[3 + k, sl] = w[sl] * nu[sl, 0]
        g[3 + k, n + sl] = w[sl] * nu[sl, 1]
    A[2 * n:2 * n + 3, :2 * n] = g[:3]
    A[2 * n + 3:2 * n + 3 + H, :2 * n] = g[3:]
    # moment rows act on the full boundary velocity
    A[2 * n + 3 + H:, :2 * n] = Mrow @ V
    A[2 * n + 3 + H:, iq] = Mrow @ src_u
    A[2 * n + 3 + H:, ic] = Mrow @ rigid
    # reorder rows so the gauge block sits at the end (cosmetic)
    rhs = np.zeros(size)
    kn = boundary.curvature[:, None] * nu
    rhs[:2 * n] = -np.concatenate([kn[:, 0], kn[:, 1]])

    lu, piv = sla.lu_factor(A, check_finite=False)
    anorm = np.linalg.norm(A, 1)
    rcond = float(sla.lapack.dgecon(lu, anorm, norm="1")[0])
    if not rcond > 1e-14:
        raise SolverError(f"bordered Stokes system is numerically singular (rcond={rcond:.2e})")
    sol = sla.lu_solve((lu, piv), rhs, check_finite=False)
    fvec = sol[:2 * n]
    q = sol[iq]
    c = sol[ic]
    beta = sol[ib]

    uvec = V @ fvec + src_u @ q + rigid @ c
    u = np.column_stack([uvec[:n], uvec[n:]])
    f = np.column_stack([fvec[:n], fvec[n:]])
    tvec = T @ fvec + src_t @ q
    traction = np.column_stack([tvec[:n], tvec[n:]])
    v = np.sum(u * nu, axis=1)
    du = boundary.d_ds(u)
    div_tau = np.sum(du * boundary.tangents, axis=1)
    p = -np.sum(traction * nu, axis=1) - 2 * theta * div_tau

    out = FluidSolution(
        theta=float(theta), boundary_velocity=u, normal_velocity=v, pressure_trace=p,
        layer_density=f, source_strengths=q, source_centers=centers,
        rigid_coefficients=c, center=center, rcond=rcond, border_coefficients=beta,
    )
    res = midpoint_traction_residual(out, boundary)
    object.__setattr__(out, "traction_residual", res)
    if check and res > tol:
        raise SolverError(f"traction residual {res:.2e} exceeds tol {tol:.1e}; increase N")
    return out


# --- evaluation ---------------------------------------------------------------------


def _fine_layer(boundary: Boundary, density: np.ndarray, factor: int):
    """Oversampled nodes, weights and density for off-surface evaluation."""
    xs, ws, fs = [], [], []
    for c, f in zip(boundary.components, boundary.split(density)):
        m = factor * c.N
        g, g1 = upsample_derivatives(c.nodes, m, (0, 1))
        ff = upsample_derivatives(f, m, (0,))[0]
        xs.append(g)
        ws.append(np.hypot(g1[:, 0], g1[:, 1]) * 2 * np.pi / m)
        fs.append(ff)
    return np.concatenate(xs), np.concatenate(ws), np.concatenate(fs)


def midpoint_traction_residual(sol: FluidSolution, boundary: Boundary) -> float:
    """Max-norm traction error at the parameter midpoints between nodes."""
    worst = 0.0
    x, w, f = boundary.nodes, boundary.weights, sol.layer_density
    for c, fc in zip(boundary.components, boundary.split(sol.layer_density)):
        m = 2 * c.N
        g, g1, g2 = upsample_derivatives(c.nodes, m, (0, 1, 2))
        g, g1, g2 = g[1::2], g1[1::2], g2[1::2]
        fm = upsample_derivatives(fc, m, (0,))[0][1::2]
        sp = np.hypot(g1[:, 0], g1[:, 1])
        tau = g1 / sp[:, None]
        nu = np.column_stack([tau[:, 1], -tau[:, 0]])
        kap = (g1[:, 0] * g2[:, 1] - g1[:, 1] * g2[:, 0]) / sp**3
        r, r2 = _pair_geometry(g, x)
        rn = np.einsum("ijk,ik->ij", r, nu) / r2**2
        kr = -(1 / np.pi) * r * (rn * w[None, :])[..., None]
        t = 0.5 * fm + np.einsum("ijk,ij->ik", kr, np.sum(r * f[None], axis=2))
        for k in range(len(sol.source_strengths)):
            t += sol.source_strengths[k] * source_traction(g, nu, sol.source_centers[k])
        worst = max(worst, float(np.max(np.abs(t + kap[:, None] * nu))))
    return worst


@dataclass(frozen=True)
class InteriorEvaluation:
    velocity: np.ndarray
    gradient: np.ndarray  # grad[m, i, j] = d_j u_i
    pressure: np.ndarray
    hessian: np.ndarray | None = None  # hess[m, i, j, k] = d_j d_k u_i


def evaluate_layer(sol: FluidSolution, boundary: Boundary, points, hessian: bool = False,
                   oversample: int = 4, block: int = 2048) -> InteriorEvaluation:
    """Velocity, gradient, pressure (and optionally second derivatives) off the boundary.

    No near-boundary correction is applied; accuracy degrades within a few
    node spacings of the boundary.  Use :func:`evaluate_interior` for the
    checked public entry point.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ys, ws, fs = _fine_layer(boundary, sol.layer_density, oversample)
    wf = fs * ws[:, None]
    c0 = 1.0 / (4 * np.pi * sol.theta)
    m = len(pts)
    U = np.zeros((m, 2))
    G = np.zeros((m, 2, 2))
    P = np.zeros(m)
    Hs = np.zeros((m, 2, 2, 2)) if hessian else None
    eye = np.eye(2)
    for s in range(0, m, block):
        r = pts[s:s + block, None, :] - ys[None]
        r2 = np.sum(r * r, axis=2)
        rf = np.sum(r * wf[None], axis=2)
        inv = 1.0 / r2
        # u_i = c0 [-log r F_i + r_i (r.F) / r^2]
        U[s:s + block] = c0 * (
            -0.5 * np.einsum("mn,ni->mi", np.log(r2), wf) + np.einsum("mni,mn->mi", r, rf * inv)
        )
        # d_j u_i = c0 [-r_j F_i / r^2 + (F_j r_i + r_j... )]
        # d_j [r_i (r.F)/r^2] = delta_ij (r.F)/r^2 + r_i F_j / r^2 - 2 r_i r_j (r.F)/r^4
        g = -np.einsum("mn,mnj,ni->mij", inv, r, wf)
        g += np.einsum("mn,ij->mij", rf * inv, eye)
        g += np.einsum("mni,nj,mn->mij", r, wf, inv)
        g -= 2 * np.einsum("mni,mnj,mn->mij", r, r, rf * inv**2)
        G[s:s + block] = c0 * g
        P[s:s + block] = np.sum(rf * inv, axis=1) / (2 * np.pi)
        if hessian:
            inv2 = inv**2
            inv3 = inv**3
            # d_k of -r_j F_i / r^2
            h = -np.einsum("mn,jk,ni->mijk", inv, eye, wf)
            h += 2 * np.einsum("mn,mnj,mnk,ni->mijk", inv2, r, r, wf)
            # d_k of delta_ij (r.F)/r^2
            h += np.einsum("ij,nk,mn->mijk", eye, wf, inv)
            h -= 2 * np.einsum("ij,mnk,mn->mijk", eye, r, rf * inv2)
            # d_k of r_i F_j / r^2
            h += np.einsum("ik,nj,mn->mijk", eye, wf, inv)
            h -= 2 * np.einsum("mni,nj,mnk,mn->mijk", r, wf, r, inv2)
            # d_k of -2 r_i r_j (r.F)/r^4
            h -= 2 * np.einsum("ik,mnj,mn->mijk", eye, r, rf * inv2)
            h -= 2 * np.einsum("jk,mni,mn->mijk", eye, r, rf * inv2)
            h -= 2 * np.einsum("mni,mnj,nk,mn->mijk", r, r, wf, inv2)
            h += 8 * np.einsum("mni,mnj,mnk,mn->mijk", r, r, r, rf * inv3)
            Hs[s:s + block] = c0 * h
    # sources and rigid motion
    for k in range(len(sol.source_strengths)):
        q = sol.source_strengths[k]
        cen = sol.source_centers[k]
        U += q * source_velocity(pts, cen, sol.theta)
        G += q * source_gradient(pts, cen, sol.theta)
        if hessian:
            Hs += q * _source_hessian(pts, cen, sol.theta)
    a1, a2, om = sol.rigid_coefficients
    xc = pts - sol.center
    U[:, 0] += a1 - om * xc[:, 1]
    U[:, 1] += a2 + om * xc[:, 0]
    G[:, 0, 1] += -om
    G[:, 1, 0] += om
    return InteriorEvaluation(U, G, P, Hs)


def _source_hessian(points, center, theta):
    r = np.atleast_2d(points) - center
    r2 = np.sum(r * r, axis=1)
    eye = np.eye(2)
    # u_i = r_i / r^2 ; d_j u_i = delta_ij/r^2 - 2 r_i r_j / r^4
    h = -2 * np.einsum("ij,mk->mijk", eye, r) / r2[:, None, None, None] ** 2
    h -= 2 * (np.einsum("ik,mj->mijk", eye, r) + np.einsum("jk,mi->mijk", eye, r)) / r2[:, None, None, None] ** 2
    h += 8 * np.einsum("mi,mj,mk->mijk", r, r, r) / r2[:, None, None, None] ** 3
    return h / (2 * np.pi * theta)


def evaluate_interior(sol: FluidSolution, boundary: Boundary, points, hessian: bool = False,
                      band: float | None = None) -> InteriorEvaluation:
    """Checked interior evaluation of ``(u, grad u, p)``.

    Points must lie inside the domain at depth at least ``band`` (default:
    two of the largest node spacings).
    """
    from .geometry import Projector

    pts = np.atleast_2d(np.asarray(points, dtype=float))
    band = 2 * max(float(c.spacing.max()) for c in boundary.components) if band is None else band
    d = Projector(boundary).query(pts).distance
    if np.any(d > -band):
        raise ValueError("evaluation points must lie inside the domain outside the near-boundary band")
    return evaluate_layer(sol, boundary, pts, hessian=hessian)


def boundary_gradient(sol: FluidSolution, boundary: Boundary) -> np.ndarray:
    """Full velocity gradient on the boundary from the boundary data alone.

    ``d_tau u`` is differentiated spectrally; the normal derivative follows
    from incompressibility (normal part) and the vanishing tangential
    traction (tangential part).
    """
    u = sol.boundary_velocity
    nu, tau = boundary.normals, boundary.tangents
    du_t = boundary.d_ds(u)
    a = np.sum(du_t * tau, axis=1)
    b = np.sum(du_t * nu, axis=1)
    du_n = (-a)[:, None] * nu + (-b)[:, None] * tau
    return du_n[:, :, None] * nu[:, None, :] + du_t[:, :, None] * tau[:, None, :]


def dissipation(sol: FluidSolution, boundary: Boundary) -> float:
    """``-int kappa <u, nu>`` over the boundary; equals ``2 theta int |e(u)|^2``."""
    return float(-boundary.weights @ (boundary.curvature * sol.normal_velocity))


def moment_functionals(sol: FluidSolution, boundary: Boundary) -> tuple[np.ndarray, float]:
    """Boundary reductions of ``int u`` and ``int (d1 u2 - d2 u1)`` over the domain."""
    u = sol.boundary_velocity
    n = len(u)
    M = _moment_rows(boundary, np.zeros(2))
    vals = M @ np.concatenate([u[:, 0], u[:, 1]])
    return vals[:2], float(vals[2])


def _component_interpolants(boundary: Boundary, values: np.ndarray):
    from .curve import TrigInterpolant

    return [TrigInterpolant(v) for v in boundary.split(values)]


def velocity_gradient(sol: FluidSolution, boundary: Boundary, points, projection=None) -> np.ndarray:
    """``grad u`` at interior points, including the near-boundary band.

    Points deeper than two local node spacings use the layer potential
    directly.  In the band, each component of ``grad u`` is interpolated
    along the normal line through the point by a cubic through the exact
    boundary value (:func:`boundary_gradient`) and three layer-potential
    values at depths ``delta``, ``1.5 delta`` and ``2 delta``.
    """
    from .geometry import Projector

    pts = np.atleast_2d(np.asarray(points, dtype=float))
    proj = Projector(boundary).query(pts) if projection is None else projection
    spacing = np.array([c.spacing.max() for c in boundary.components])
    delta = 2 * spacing[proj.component]
    depth = -proj.distance
    deep = depth >= delta
    out = np.empty((len(pts), 2, 2))
    if deep.any():
        out[deep] = evaluate_layer(sol, boundary, pts[deep]).gradient
    band = ~deep
    if band.any():
        gb = boundary_gradient(sol, boundary).reshape(-1, 4)
        interps = _component_interpolants(boundary, gb)
        comp = proj.component[band]
        alpha = proj.alpha[band]
        g0 = np.empty((band.sum(), 4))
        for ci, ip in enumerate(interps):
            sel = comp == ci
            if sel.any():
                g0[sel] = ip(alpha[sel])
        foot = proj.foot[band]
        nu = proj.normal[band]
        dl = delta[band]
        ts = np.array([1.0, 1.5, 2.0])
        probe = foot[:, None, :] - (dl[:, None] * ts[None, :])[..., None] * nu[:, None, :]
        gi = evaluate_layer(sol, boundary, probe.reshape(-1, 2)).gradient.reshape(-1, 3, 4)
        # Lagrange cubic in s = t / delta through s = 0, 1, 1.5, 2
        s = depth[band] / dl
        nodes = np.array([0.0, 1.0, 1.5, 2.0])
        vals = np.concatenate([g0[:, None, :], gi], axis=1)
        res = np.zeros((len(s), 4))
        for a in range(4):
            la = np.ones_like(s)
            for b in range(4):
                if b != a:
                    la *= (s - nodes[b]) / (nodes[a] - nodes[b])
            res += la[:, None] * vals[:, a, :]
        out[band] = res.reshape(-1, 2, 2)
    return out


def bulk_dissipation(sol: FluidSolution, boundary: Boundary, h: float | None = None, quad=None) -> float:
    """Grid quadrature of ``2 theta int |e(u)|^2``, the cross-check for :func:`dissipation`."""
    from .quadrature import GridQuadrature

    if quad is None:
        if h is None:
            h = min(c.spacing.min() for c in boundary.components) / 2
        quad = GridQuadrature(boundary, h)
    g = velocity_gradient(sol, boundary, quad.points, quad.projection)
    e = 0.5 * (g + np.swapaxes(g, 1, 2))
    return 2 * sol.theta * quad.integrate(np.sum(e * e, axis=(1, 2)))
