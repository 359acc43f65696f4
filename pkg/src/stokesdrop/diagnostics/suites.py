"""Named verification suites driving the identity and inequality checks.

``level`` scales resolution: 0 is a quick smoke run, 1 the default, 2 and
above refine grids and node counts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .. import shapes
from ..fields import REILLY_FIELDS, FourierField, monomial_field, random_poly_field
from ..geometry import ubc_radius
from ..oracle import AnnulusOracle
from ..stokes import solve
from .identities import (ConicFrame, check_dissipation_identity, check_dissipation_routes,
                         check_evolution_identities, reilly_convergence, tubular_points,
                         verify_bulk_curvature_estimate, verify_cutoff_identities, verify_div_normal,
                         verify_frame_identities, verify_reilly, verify_trace_inequality)
from .inequalities import INEQUALITIES, format_table, poincare_growth, reference_domains, rescaling_check
from .monitors import windowed_curvature_check
from .report import IdentityCheckResult

SUITES = ("reilly", "frame", "inequalities", "evolution", "dissipation")


@dataclass
class SuiteResult:
    name: str
    results: list[IdentityCheckResult]
    seconds: float
    table: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results if r.enforced)

    def summary(self) -> str:
        w = max([len(r.name) for r in self.results] + [10])
        lines = [f"suite {self.name}: {'PASS' if self.passed else 'FAIL'} ({self.seconds:.1f} s)"]
        for r in self.results:
            flag = ("ok" if r.passed else "FAIL") if r.enforced else ("info" if r.passed else "info*")
            lines.append(f"  {r.name:<{w}}  {r.left:>14.8g}  {r.right:>14.8g}  "
                         f"rel={r.rel_residual:9.2e}  tol={r.tolerance:8.1e}  [{r.measure}] {flag}")
        if self.table:
            lines += ["", self.table]
        return "\n".join(lines)


def _grid_h(level: int) -> float:
    return 1 / (64 * 2**level)


def reilly_suite(level: int = 1) -> list[IdentityCheckResult]:
    """Reilly's formula on the unit disk and its grid convergence on an ellipse."""
    h = 1 / 256 if level >= 1 else 1 / 128
    disk = shapes.disk(256 if level >= 1 else 128)
    out = [
        verify_reilly(disk, REILLY_FIELDS["linear"], h, tol=1e-8),
        verify_reilly(disk, REILLY_FIELDS["xy"], h, tol=1e-4),
        verify_reilly(disk, REILLY_FIELDS["cubic"], h, tol=1e-3),
    ]
    ell = shapes.ellipse(256, 2.0, 1.0)
    out.append(verify_reilly(ell, REILLY_FIELDS["xy"], h, tol=1e-3, name="(xy,0) ellipse"))
    hs = [1 / 16, 1 / 32, 1 / 64, 1 / 128] + ([1 / 256] if level >= 1 else [])
    res, _, order = reilly_convergence(ell, REILLY_FIELDS["xy"], hs)
    out.append(IdentityCheckResult(
        "reilly/(xy,0) ellipse grid order", order, 2.0, float(res[-1]), float(res[-1]),
        "h=" + ",".join(f"1/{round(1 / x)}" for x in hs), 2.0, bool(order >= 2.0), "order"))
    return out


def frame_suite(level: int = 1, seed: int = 1) -> list[IdentityCheckResult]:
    """Pointwise frame decompositions, cutoff identities and the explicit-constant bounds."""
    rng = np.random.default_rng(seed)
    n = 256 if level >= 1 else 128
    out = []
    for name, b, oracle in (("disk", shapes.disk(n), ConicFrame(1.0, 1.0)),
                            ("ellipse", shapes.ellipse(n, 2.0, 1.0), ConicFrame(2.0, 1.0))):
        g = ubc_radius(b)
        r = g.r_omega
        pts = tubular_points(g, [-0.6 * r, -0.3 * r, 0.3 * r], 8)
        X = random_poly_field(rng, 3)
        out += verify_frame_identities(g, X, oracle, pts, label=f"{name}, cubic")
        out += verify_frame_identities(g, FourierField.random(rng, 2.0, 4, components=2), oracle, pts,
                                       label=f"{name}, fourier")
        out += verify_div_normal(g, oracle, pts, label=name)
        phi = monomial_field({(0, 2, 0): 1.0, (0, 0, 1): 0.5, (0, 1, 1): 0.3}, components=1)
        out += verify_cutoff_identities(g, phi, label=name)
    disk = ubc_radius(shapes.disk(256))
    one = monomial_field({(0, 0, 0): 1.0}, components=1)
    out.append(verify_trace_inequality(disk, one, h=1 / 256, equality_tol=1e-8, label="f=1 on unit disk"))
    for name, b in (("ellipse", shapes.ellipse(256, 2.0, 1.0)), ("annulus", shapes.annulus(128, 1.0, 2.0))):
        g = ubc_radius(b)
        f = FourierField.random(rng, 3.0, 5)
        out.append(verify_trace_inequality(g, f, h=1 / 128, label=name))
        out.append(verify_bulk_curvature_estimate(g, factor=15 / 4))
        stated = verify_bulk_curvature_estimate(g, factor=1.5)
        out.append(IdentityCheckResult(**{**stated.to_json(), "enforced": False}))
    for name, b in (("ellipse", shapes.ellipse(256, 2.0, 1.0)),
                    ("perturbed circle", shapes.perturbed_circle(256, 0.1, 3)),
                    ("dumbbell(0.2)", shapes.dumbbell(512, neck=0.2))):
        g = ubc_radius(b)
        res = windowed_curvature_check(b, g.r_omega)
        out.append(IdentityCheckResult(**{**res.to_json(), "name": f"{res.name} [{name}]"}))
    return out


def inequality_suite(level: int = 1, trials: int = 6, seed: int = 0, lam: float = 2.0):
    """Empirical-constant table, its dilation invariance and the neck growth of the Poincare constant.

    Every row is reported, not enforced; the invariance and growth checks are
    reported alongside.
    """
    domains = reference_domains(max(level, 1))
    rows, worst = [], 0.0
    for name, b in domains.items():
        t0, _, diff = rescaling_check(name, b, lam=lam, trials=trials, seed=seed)
        rows += t0
        worst = max(worst, diff)
    out = [IdentityCheckResult(f"inequality/{r.inequality} [{r.domain}]", r.lhs, r.rhs, 0.0, r.ratio,
                               f"h={r.h:g}, {r.trials} fields", 0.0, True, "empirical", False)
           for r in rows]
    out.append(IdentityCheckResult("inequality/dilation invariance", worst, 0.0, worst, worst,
                                   f"lambda={lam:g}, {len(INEQUALITIES)} ratios x {len(domains)} domains",
                                   1e-12, bool(worst <= 1e-12), "absolute", False))
    g = poincare_growth(rows)
    out.append(IdentityCheckResult("inequality/poincare growth neck 0.4 -> 0.05", g, 4.0, 0.0, g,
                                   "raw constant, Ritz maximiser", 4.0, bool(g >= 4.0), "order", False))
    return out, format_table(rows), rows


def evolution_suite(level: int = 1) -> list[IdentityCheckResult]:
    """Five boundary evolution identities under prescribed normal speeds."""
    n = 256 if level >= 1 else 128
    phi = monomial_field({(0, 2, 0): 1.0, (0, 0, 1): 0.5, (0, 1, 1): 0.3}, components=1)
    laws = (("v=-1", lambda b: -np.ones(b.total_nodes)),
            ("v=kappa", lambda b: b.curvature),
            ("v=0.3cos3a", lambda b: 0.3 * np.cos(3 * np.arctan2(b.nodes[:, 1], b.nodes[:, 0]))))
    out = []
    for name, b in (("circle", shapes.disk(n, 1.3)), ("ellipse", shapes.ellipse(n, 2.0, 1.0))):
        for lname, law in laws:
            out += check_evolution_identities(b, law, phi, dt=1e-4, tol=1e-4, label=f"{name}, {lname}")
    return out


def dissipation_suite(level: int = 1) -> list[IdentityCheckResult]:
    """Both dissipation routes on the annulus and the perimeter balance of a short run."""
    from ..evolve import ScenarioConfig, run

    n = 128 * max(level, 1)
    b = shapes.annulus(n, 1.0, 2.0)
    sol = solve(b, 1.0)
    exact = AnnulusOracle(1.0, 2.0).state(0.0).dissipation
    D = float(-b.weights @ (b.curvature * sol.normal_velocity))
    out = [
        IdentityCheckResult.compare("dissipation/boundary route vs 3 pi", D, exact, 1e-2, f"N={n}/ring"),
        check_dissipation_routes(b, sol, h=_grid_h(level), tol=1e-2),
    ]
    out.append(IdentityCheckResult.compare("dissipation/bulk route vs 3 pi", out[1].right, exact, 1e-2,
                                           out[1].resolution))
    cfg = ScenarioConfig(shape={"type": "annulus", "inner": 1.0, "outer": 2.0}, N=n, t_end=0.1,
                         fixed_dt=0.005)
    traj = run(cfg)
    out += check_dissipation_identity(traj.records)
    return out


def run_suite(name: str, level: int = 1) -> list[SuiteResult]:
    """Run one suite (or ``all``) and return timed results."""
    names = SUITES if name == "all" else (name,)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite {unknown[0]!r}; choose from {', '.join(SUITES + ('all',))}")
    out = []
    for n in names:
        t0 = time.perf_counter()
        table, extra = "", {}
        if n == "inequalities":
            res, table, rows = inequality_suite(level)
            extra["rows"] = [r.to_json() for r in rows]
        else:
            res = {"reilly": reilly_suite, "frame": frame_suite, "evolution": evolution_suite,
                   "dissipation": dissipation_suite}[n](level)
        out.append(SuiteResult(n, res, time.perf_counter() - t0, table, extra))
    return out
