"""Deterministic SVG rendering of boundaries and snapshots."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

from .curve import Boundary  # noqa: E402
from .geometry import DomainGeometry, ubc_radius  # noqa: E402

STYLE = {
    "svg.hashsalt": "stokesdrop",
    "svg.fonttype": "none",
    "path.simplify": False,
    "font.size": 9,
}
OUTER = {"color": "#1f3b73", "lw": 1.4, "ls": "-"}
HOLE = {"color": "#b8431f", "lw": 1.4, "ls": "--"}


def ubc_ball(geom: DomainGeometry) -> tuple[np.ndarray, float]:
    """Centre and radius of a tangent ball realising ``r_omega``.

    Curvature-limited domains get the osculating ball at the node of largest
    ``|kappa|``; neck-limited ones the ball at the first node of the neck pair.
    """
    b = geom.boundary
    x, nu, k = b.nodes, b.normals, b.curvature
    r = geom.r_omega
    if geom.active == "curvature" or geom.neck is None:
        i = int(np.argmax(np.abs(k)))
        side = -1.0 if k[i] >= 0 else 1.0
    else:
        i = int(np.argmin(np.linalg.norm(x - geom.neck[0], axis=1)))
        j = int(np.argmin(np.linalg.norm(x - geom.neck[1], axis=1)))
        side = -1.0 if (x[j] - x[i]) @ nu[i] < 0 else 1.0
    return x[i] + side * r * nu[i], r


def draw_boundary(ax, boundary: Boundary, normals: bool = False, normal_scale: float | None = None,
                  stride: int | None = None):
    for c in boundary.components:
        pts = np.vstack([c.nodes, c.nodes[:1]])
        style = HOLE if c.is_hole else OUTER
        ax.plot(pts[:, 0], pts[:, 1], **style, label="hole" if c.is_hole else "outer")
    if normals:
        scale = normal_scale or 0.04 * float(np.sum(boundary.weights))
        step = stride or max(1, boundary.total_nodes // 64)
        x, nu = boundary.nodes[::step], boundary.normals[::step]
        ax.quiver(x[:, 0], x[:, 1], nu[:, 0] * scale, nu[:, 1] * scale, angles="xy",
                  scale_units="xy", scale=1.0, width=0.002, color="#555555")


def render(boundary: Boundary, path, normals: bool = False, show_ubc: bool = False,
           title: str | None = None, size: float = 4.0) -> Path:
    """Write ``boundary`` to an SVG file; identical input gives identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(size, size))
        draw_boundary(ax, boundary, normals=normals)
        if show_ubc:
            geom = ubc_radius(boundary)
            c, r = ubc_ball(geom)
            ax.add_patch(Circle(c, r, fill=False, color="#2a7f3f", lw=1.0, ls=":"))
            ax.plot(*c, "+", color="#2a7f3f")
        ax.set_aspect("equal")
        ax.autoscale_view()
        if title:
            ax.set_title(title)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
        plt.close(fig)
    return path
