# SPDX-License-Identifier: AGPL-3.0-only
import attr
import jinja2
import numpy as np

import unfold.util as uutil
from unfold.errors import MismatchedFiles

env = jinja2.Environment(
    loader=jinja2.PackageLoader("unfold", "templates"),
    autoescape=jinja2.select_autoescape(["j2"]),
    keep_trailing_newline=True,
)


@attr.s(frozen=True)
class RenderStyle:
    size = attr.ib(default=400.0)
    margin = attr.ib(default=0.05)
    node_radius = attr.ib(default=3.0)
    node_color = attr.ib(default="#1f2d3d")
    edge_color = attr.ib(default="#8a939c")
    edge_width = attr.ib(default=1.0)
    aug_color = attr.ib(default="#d6336c")
    aug_width = attr.ib(default=1.6)


def fit_viewport(coords, size, margin):
    """
    Scales coordinates uniformly into a ``size`` square leaving ``margin``
    (a fraction of ``size``) free on every side. The y axis points up.
    """
    X = np.asarray(coords, dtype=float)
    lo = X.min(axis=0)
    extent = float(np.ptp(X, axis=0).max())
    usable = size * (1 - 2 * margin)
    scale = usable / extent if extent > 0 else 0.0
    P = (X - lo) * scale
    # center the shorter side
    P += (usable - np.ptp(P, axis=0)) / 2 + size * margin
    P[:, 1] = size - P[:, 1]
    return P


def _scene(g, layout, style):
    coords = getattr(layout, "coords", layout)
    if len(coords) != g.n:
        raise MismatchedFiles(f"layout has {len(coords)} nodes, graph has "
                              f"{g.n}")
    P = fit_viewport(coords, style.size, style.margin)
    # augmenting edges are drawn last so they stay visible
    edges = [{"x1": P[e.u, 0], "y1": P[e.u, 1], "x2": P[e.v, 0],
              "y2": P[e.v, 1], "aug": e.aug}
             for e in sorted(g.edges, key=lambda e: e.aug)]
    return {"edges": edges, "nodes": [tuple(p) for p in P]}


def render_svg(g, layout, title=None, style=RenderStyle()):
    return env.get_template("drawing.svg.j2").render(
        width=style.size, height=style.size, title=title, caption=None,
        offset=None, style=style, **_scene(g, layout, style))


def render_summary(panels, title, style=RenderStyle()):
    """
    Places drawings side by side; ``panels`` holds ``(caption, graph,
    layout)`` triples.
    """
    scenes = []
    for i, (caption, g, layout) in enumerate(panels):
        scene = _scene(g, layout, style)
        scene.update(caption=caption, offset=(i * style.size, 0.0))
        scenes.append(scene)
    return env.get_template("summary.svg.j2").render(
        total_width=style.size * max(len(scenes), 1), width=style.size,
        height=style.size, title=title, panels=scenes, style=style)


def write_svg(text, fpath):
    uutil.write_atomic(fpath, text)
