"""Empirical constants of the geometry-quantified functional inequalities.

For each inequality the reported number is ``max_trials LHS / RHS`` with the
unnamed constant set to one, so it is the smallest constant consistent with
the sampled fields.  All right sides use ``r = r_Omega``, ``|Omega|`` and the
perimeter ``P``; bulk integrals use :class:`GridQuadrature`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np

from ..curve import Boundary, perimeter_area
from ..fields import (Field, FourierField, PolyField, TanhStep, biharmonic_field, frobenius_sq,
                      monomial_field, random_poly_field, symmetric_part)
from ..geometry import CutoffProfile, DomainGeometry, cutoff_eta, ubc_radius
from ..quadrature import GridQuadrature

INEQUALITIES = (
    "poincare", "poincare_raw", "gn_l2", "gn_linf", "korn", "korn_cutoff",
    "korn_poincare_mean", "korn_poincare_sym", "interior_regularity",
)
# ratio(lam Omega) = lam^e ratio(Omega); only the raw Poincare constant is dimensional
SCALING_EXPONENT = {name: 0 for name in INEQUALITIES}
SCALING_EXPONENT["poincare_raw"] = 2
# a side below this fraction of the field's own size counts as zero
DEGENERATE = 1e-10


@dataclass
class InequalityRow:
    domain: str
    inequality: str
    ratio: float
    lhs: float
    rhs: float
    argmax_field: str
    trials: int
    r_omega: float
    perimeter: float
    area: float
    h: float
    scale: float = 1.0

    def to_json(self) -> dict:
        return asdict(self)


class DomainSample:
    """Grid quadrature and geometric scalars of one domain."""

    def __init__(self, name: str, boundary: Boundary, h_factor: float = 16.0, h_max: float = 1 / 32,
                 geom: DomainGeometry | None = None):
        self.name = name
        self.boundary = boundary
        self.geom = ubc_radius(boundary) if geom is None else geom
        self.r = self.geom.r_omega
        self.P, self.A = perimeter_area(boundary)
        self.h = min(self.r / h_factor, h_max)
        self.quad = GridQuadrature(self.geom, self.h)
        self.w = self.quad.weights
        self.x = self.quad.points

    @cached_property
    def distance(self) -> np.ndarray:
        return self.quad.projection.distance

    @cached_property
    def eta(self) -> np.ndarray:
        return cutoff_eta(self.geom, CutoffProfile(), distance=self.distance)[0]

    def integral(self, values) -> float:
        return float(self.w @ values)

    def mean(self, values):
        return np.tensordot(self.w, values, axes=(0, 0)) / self.w.sum()

    @property
    def extent(self) -> float:
        nodes = self.boundary.nodes
        return float(np.max(np.ptp(nodes, axis=0)))

    @property
    def center(self) -> np.ndarray:
        return self.boundary.nodes.mean(axis=0)


# --- field families ----------------------------------------------------------------


def scalar_fields(dom: DomainSample, rng: np.random.Generator, trials: int) -> list[Field]:
    """Linear fields, smooth steps across the domain and random band-limited fields."""
    ext = dom.extent
    c = dom.center
    out: list[Field] = [
        monomial_field({(0, 1, 0): 1.0}, components=1, name="x"),
        monomial_field({(0, 0, 1): 1.0}, components=1, name="y"),
    ]
    for wfrac in (0.02, 0.05, 0.1, 0.25):
        for ang in (0.0, np.pi / 2):
            e = np.array([np.cos(ang), np.sin(ang)])
            out.append(TanhStep(e, float(e @ c), wfrac * ext, name=f"step({ang:.2f},{wfrac})"))
    for i in range(trials):
        out.append(FourierField.random(rng, kmax=8.0 / ext, modes=6, name=f"fourier{i}"))
    return out


def vector_fields(dom: DomainSample, rng: np.random.Generator, trials: int) -> list[Field]:
    """Rigid rotation, shears and random polynomial and band-limited vector fields."""
    ext = dom.extent
    out: list[Field] = [
        monomial_field({(0, 0, 1): -1.0, (1, 1, 0): 1.0}, name="rotation"),
        monomial_field({(0, 0, 1): 1.0}, name="shear"),
    ]
    for i in range(trials):
        p = random_poly_field(rng, degree=3, name=f"poly{i}")
        out.append(PolyField(p.coeffs * (ext / 2) ** -np.add.outer(np.arange(4), np.arange(4)),
                             name=p.name))
        out.append(FourierField.random(rng, kmax=8.0 / ext, modes=6, components=2, name=f"fourier{i}"))
    return out


def biharmonic_fields(dom: DomainSample, rng: np.random.Generator, trials: int) -> list[Field]:
    ext = dom.extent
    out = []
    for i in range(trials):
        p = biharmonic_field(rng, degree=4, name=f"biharmonic{i}")
        d = p.coeffs.shape[1]
        out.append(PolyField(p.coeffs * (ext / 2) ** -np.add.outer(np.arange(d), np.arange(d)), name=p.name))
    return out


# --- ratios --------------------------------------------------------------------------


def _l2sq(dom, a):
    return dom.integral(frobenius_sq(a))


def scalar_ratios(dom: DomainSample, f: Field) -> dict:
    """``(lhs, rhs)`` pairs of the scalar inequalities for ``f``."""
    v = f(dom.x)[:, 0]
    g = f.gradient(dom.x)[:, 0, :]
    H = f.hessian(dom.x)[:, 0]
    r, A, P = dom.r, dom.A, dom.P
    var = dom.integral((v - dom.mean(v)) ** 2)
    g2 = _l2sq(dom, g)
    f_l2 = np.sqrt(dom.integral(v * v))
    h_l2 = np.sqrt(_l2sq(dom, H))
    interp = np.sqrt(h_l2 * f_l2) + f_l2 / r
    sup = max(np.max(np.abs(v)), np.max(np.abs(f(dom.boundary.nodes)[:, 0])))
    return {
        "poincare": (var, A * P / r * g2),
        "poincare_raw": (var, g2),
        "gn_l2": (np.sqrt(g2), interp),
        "gn_linf": (sup, interp),
    }


def vector_ratios(dom: DomainSample, X: Field) -> dict:
    v = X(dom.x)
    G = X.gradient(dom.x)
    S = symmetric_part(G)
    r, A, P = dom.r, dom.A, dom.P
    eta = dom.eta
    spt = eta > 0
    Gm = dom.mean(G)
    Sm = dom.mean(S)
    # remove the rotation that makes the mean gradient symmetric
    skew = 0.5 * (Gm[1, 0] - Gm[0, 1])
    Gs = G - skew * np.array([[0.0, -1.0], [1.0, 0.0]])
    g2 = _l2sq(dom, G)
    kp = A * P / r**3
    return {
        "korn": (g2, _l2sq(dom, S) + _l2sq(dom, v) / r**2, g2),
        "korn_cutoff": (dom.integral(eta * frobenius_sq(G)),
                        dom.integral(eta * frobenius_sq(S)) + dom.integral(spt * frobenius_sq(v)) / r**2, g2),
        "korn_poincare_mean": (_l2sq(dom, G - Gm), kp * _l2sq(dom, S - Sm), kp * g2),
        "korn_poincare_sym": (_l2sq(dom, Gs), kp * _l2sq(dom, symmetric_part(Gs)), kp * _l2sq(dom, Gs)),
    }


def interior_ratio(dom: DomainSample, X: Field, rho_factor: float = 0.25) -> tuple[float, float]:
    rho = rho_factor * dom.r
    inner = dom.distance < -rho
    lhs = dom.integral(inner * frobenius_sq(X.third(dom.x)))
    rhs = (dom.integral(frobenius_sq(X.hessian(dom.x))) / rho**2
           + dom.integral(frobenius_sq(X.gradient(dom.x))) / rho**4
           + dom.integral(frobenius_sq(X(dom.x))) / rho**6)
    return lhs, rhs


def ritz_basis(dom: DomainSample, lam: float = 1.0, degree: int = 5,
               widths=(0.025, 0.05, 0.1, 0.2, 0.4)) -> list[Field]:
    """Monomials and axis-aligned smooth steps, in coordinates of the unscaled domain.

    ``lam`` dilates the whole basis so that a rescaled domain gets the
    dilated basis of the original.  Steps narrower than ``2 h`` are left
    out: on the grid their gradient is unresolved and the Rayleigh quotient
    of such a step is spurious.
    """
    ext = dom.extent / lam
    c = dom.center / lam
    out: list[Field] = []
    for p in range(degree + 1):
        for q in range(degree + 1 - p):
            if p + q:
                out.append(monomial_field({(0, p, q): (2 / ext) ** (p + q)}, components=1))
    for w in widths:
        if w * dom.extent < 2 * dom.h:
            continue
        for e in ((1.0, 0.0), (0.0, 1.0)):
            e = np.array(e)
            for off in (-w, 0.0, w):
                out.append(TanhStep(e, float(e @ c) + off * ext, w * ext))
    return [f.scaled(lam) for f in out] if lam != 1.0 else out


def poincare_ritz(dom: DomainSample, lam: float = 1.0) -> tuple[float, str]:
    """Largest ``int |f - mean f|^2 / int |grad f|^2`` over the span of :func:`ritz_basis`.

    This is the top eigenvalue of the pencil of the two Gram matrices and
    bounds every member of the span from above.
    """
    basis = ritz_basis(dom, lam)
    V = np.column_stack([f(dom.x)[:, 0] for f in basis])
    G = np.stack([f.gradient(dom.x)[:, 0, :] for f in basis], axis=1)  # (m, n, 2)
    V = V - dom.mean(V)
    W = dom.w
    A = V.T @ (W[:, None] * V)
    B = np.einsum("m,mik,mjk->ij", W, G, G)
    # drop directions where B is numerically singular
    d, U = np.linalg.eigh(B)
    keep = d > d.max() * 1e-12
    T = U[:, keep] / np.sqrt(d[keep])
    mu = np.linalg.eigvalsh(T.T @ A @ T)
    return float(mu[-1]), f"ritz[{len(basis)}]"


def domain_table(dom: DomainSample, trials: int = 6, seed: int = 0, fields: dict | None = None,
                 scale: float = 1.0) -> list[InequalityRow]:
    """Empirical constants of every inequality on one domain.

    ``fields`` (keys ``scalar``, ``vector``, ``biharmonic``) overrides the
    sampled families; it is how a rescaled domain reuses the same fields.
    """
    if fields is None:
        rng = np.random.default_rng(seed)
        fields = {
            "scalar": scalar_fields(dom, rng, trials),
            "vector": vector_fields(dom, rng, trials),
            "biharmonic": biharmonic_fields(dom, rng, trials),
        }
    best: dict = {}

    def update(name, lhs, rhs, label, size=None):
        if size is not None and rhs <= DEGENERATE * size:
            return  # both sides vanish for this field
        ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else np.inf)
        if name not in best or ratio > best[name][0]:
            best[name] = (ratio, lhs, rhs, label)

    for f in fields["scalar"]:
        for name, (l, r) in scalar_ratios(dom, f).items():
            update(name, l, r, f.name)
    for X in fields["vector"]:
        for name, (l, r, size) in vector_ratios(dom, X).items():
            update(name, l, r, X.name, size)
    for X in fields["biharmonic"]:
        update("interior_regularity", *interior_ratio(dom, X), X.name)
    ritz, ritz_label = poincare_ritz(dom, fields.get("ritz_scale", 1.0))
    update("poincare_raw", ritz, 1.0, ritz_label)
    update("poincare", ritz * dom.r, dom.A * dom.P, ritz_label)
    counts = {"scalar": len(fields["scalar"]), "vector": len(fields["vector"]),
              "biharmonic": len(fields["biharmonic"])}
    kind = {"poincare": "scalar", "poincare_raw": "scalar", "gn_l2": "scalar", "gn_linf": "scalar",
            "interior_regularity": "biharmonic"}
    return [
        InequalityRow(dom.name, name, float(best[name][0]), float(best[name][1]), float(best[name][2]),
                      best[name][3], counts[kind.get(name, "vector")], dom.r, dom.P, dom.A, dom.h, scale)
        for name in INEQUALITIES
    ]


def sample_fields(dom: DomainSample, trials: int = 6, seed: int = 0) -> dict:
    """Field families for :func:`domain_table`, reusable on a rescaled copy."""
    rng = np.random.default_rng(seed)
    return {
        "scalar": scalar_fields(dom, rng, trials),
        "vector": vector_fields(dom, rng, trials),
        "biharmonic": biharmonic_fields(dom, rng, trials),
    }


def scaled_fields(fields: dict, lam: float) -> dict:
    out = {k: [f.scaled(lam) for f in v] for k, v in fields.items() if k != "ritz_scale"}
    out["ritz_scale"] = fields.get("ritz_scale", 1.0) * lam
    return out


def rescaling_check(name: str, boundary: Boundary, lam: float = 2.0, trials: int = 4, seed: int = 0,
                    h_factor: float = 16.0, h_max: float = 1 / 32):
    """Tables on ``Omega`` and ``lam Omega`` with dilated fields and grid.

    Returns both tables and the largest relative difference of the ratios.
    """
    base = DomainSample(name, boundary, h_factor, h_max)
    flds = sample_fields(base, trials, seed)
    t0 = domain_table(base, fields=flds)
    big_b = boundary.scaled(lam)
    big = DomainSample(name, big_b, h_factor, h_max * lam)
    t1 = domain_table(big, fields=scaled_fields(flds, lam), scale=lam)
    diff = max(abs(a.ratio * lam ** SCALING_EXPONENT[a.inequality] - b.ratio) / max(abs(b.ratio), 1e-300)
               for a, b in zip(t0, t1))
    return t0, t1, float(diff)


def reference_domains(level: int = 1) -> dict[str, Boundary]:
    """Disk, ellipse, annulus and three dumbbells with necks 0.4, 0.2 and 0.05."""
    from .. import shapes

    n = 128 * level
    return {
        "disk": shapes.disk(n),
        "ellipse(2,1)": shapes.ellipse(2 * n, 2.0, 1.0),
        "annulus(1,2)": shapes.annulus(n, 1.0, 2.0),
        "dumbbell(0.4)": shapes.dumbbell(4 * n, neck=0.4),
        "dumbbell(0.2)": shapes.dumbbell(4 * n, neck=0.2),
        "dumbbell(0.05)": shapes.dumbbell(8 * n, neck=0.05),
    }


def inequality_table(domains: dict[str, Boundary] | None = None, trials: int = 6, seed: int = 0,
                     h_factor: float = 16.0, h_max: float = 1 / 32) -> list[InequalityRow]:
    domains = reference_domains() if domains is None else domains
    rows = []
    for name, b in domains.items():
        rows += domain_table(DomainSample(name, b, h_factor, h_max), trials, seed)
    return rows


def poincare_growth(rows: list[InequalityRow], wide: str = "dumbbell(0.4)", narrow: str = "dumbbell(0.05)",
                    which: str = "poincare_raw") -> float:
    """Ratio of the empirical constants of two domains."""
    get = {(r.domain, r.inequality): r.ratio for r in rows}
    return get[(narrow, which)] / get[(wide, which)]


def format_table(rows: list[InequalityRow]) -> str:
    domains = list(dict.fromkeys(r.domain for r in rows))
    names = list(dict.fromkeys(r.inequality for r in rows))
    get = {(r.domain, r.inequality): r.ratio for r in rows}
    head = f"{'inequality':<22}" + "".join(f"{d:>16}" for d in domains)
    lines = [head, "-" * len(head)]
    for n in names:
        lines.append(f"{n:<22}" + "".join(f"{get.get((d, n), np.nan):>16.5g}" for d in domains))
    return "\n".join(lines)
