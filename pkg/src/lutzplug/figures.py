"""Figure emitters: profile-curve overlays, necklace level sets on the
disc, and the extended foliation on the annulus chart.  Everything feeds
the deterministic SVG canvas, so re-running a command reproduces the same
bytes."""

from __future__ import annotations

import numpy as np
from skimage import measure

from .curves import ProfileCurve
from .insertion import AnnulusMorse
from .plug import MorseNecklace
from .svg import SvgCanvas

ACCENT = "#c0392b"
BASE = "#1a1a1a"
FAINT = "#7f8c8d"


def _sample_trace(curve: ProfileCurve, samples: int) -> np.ndarray:
    lo, hi = float(curve.domain[0]), float(curve.domain[1])
    rs = np.linspace(lo, hi, samples)
    data = curve.sample(rs)
    return np.stack([data["h1"], data["h2"]], axis=-1)


def curve_overlay_figure(
    original: ProfileCurve,
    rationalized: ProfileCurve | None,
    path,
    vertices=None,
    samples: int = 600,
) -> None:
    """The curves traced in the (h1, h2) plane, rationalization overlaid."""
    traces = [_sample_trace(original, samples)]
    if rationalized is not None:
        traces.append(_sample_trace(rationalized, samples))
    allpts = np.concatenate(traces)
    lo = allpts.min(axis=0)
    hi = allpts.max(axis=0)
    margin = 0.15 * float(np.max(hi - lo) or 1.0)
    canvas = SvgCanvas(
        (lo[0] - margin, lo[1] - margin, hi[0] + margin, hi[1] + margin)
    )
    canvas.line((lo[0] - margin, 0.0), (hi[0] + margin, 0.0),
                stroke=FAINT, stroke_width=0.8)
    canvas.line((0.0, lo[1] - margin), (0.0, hi[1] + margin),
                stroke=FAINT, stroke_width=0.8)
    canvas.polyline(traces[0], stroke=BASE, stroke_width=1.6)
    if rationalized is not None:
        canvas.polyline(traces[1], stroke=ACCENT, stroke_width=1.3, dash="6,3")
        if vertices is not None:
            for r in vertices:
                h1, h2 = rationalized.h(float(r))
                canvas.dot((h1, h2), radius_px=3.0, fill=ACCENT)
    canvas.dot(traces[0][0], radius_px=3.5, fill=BASE)
    canvas.write(path)


def _grid_contours(values: np.ndarray, xs: np.ndarray, ys: np.ndarray, levels):
    """World-coordinate contour polylines of a sampled scalar field."""
    out = []
    dx = xs[1] - xs[0]
    dy = ys[1] - ys[0]
    for level in levels:
        for contour in measure.find_contours(values, level):
            pts = np.empty_like(contour)
            pts[:, 0] = xs[0] + contour[:, 0] * dx
            pts[:, 1] = ys[0] + contour[:, 1] * dy
            out.append((level, pts))
    return out


def _levels(values: np.ndarray, count: int) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo
    return np.linspace(lo + 0.04 * span, hi - 0.04 * span, count)


def necklace_figure(
    necklace: MorseNecklace, path, levels: int = 14, grid: int = 321
) -> None:
    """Level sets of the invariant function on the unit disc."""
    xs = np.linspace(-1.0, 1.0, grid)
    ys = np.linspace(-1.0, 1.0, grid)
    xg, yg = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([xg, yg], axis=-1)
    vals = necklace(pts.reshape(-1, 2)).reshape(grid, grid)
    canvas = SvgCanvas((-1.1, -1.1, 1.1, 1.1))
    inside = lambda p: p[0] ** 2 + p[1] ** 2 <= 1.0  # noqa: E731
    for _, contour in _grid_contours(vals, xs, ys, _levels(vals, levels)):
        keep = np.array([inside(p) for p in contour])
        start = 0
        for i in range(len(contour) + 1):
            if i == len(contour) or not keep[i]:
                if i - start >= 2:
                    canvas.polyline(contour[start:i], stroke=FAINT,
                                    stroke_width=0.8)
                start = i + 1
    canvas.circle((0.0, 0.0), 1.0, stroke=BASE, stroke_width=1.6)
    canvas.circle((0.0, 0.0), necklace.ring_radius, stroke=ACCENT,
                  stroke_width=0.9, dash="4,3")
    for center in necklace.bead_centers:
        canvas.dot(center, radius_px=3.0, fill=ACCENT)
    canvas.write(path)


def annulus_figure(
    annulus: AnnulusMorse, path, levels: int = 16, grid: int = 321
) -> None:
    """Level sets of the extended function on the chart [-1, 1] x [0, 1]."""
    xs = np.linspace(-0.999, 0.999, grid)
    ys = np.linspace(0.0, 1.0, grid)
    xg, yg = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([xg, yg], axis=-1)
    vals = annulus(pts.reshape(-1, 2)).reshape(grid, grid)
    canvas = SvgCanvas((-1.08, -0.06, 1.08, 1.06))
    for _, contour in _grid_contours(vals, xs, ys, _levels(vals, levels)):
        canvas.polyline(contour, stroke=FAINT, stroke_width=0.8)
    canvas.rect_world((-1.0, 0.0), (1.0, 1.0), stroke=BASE, stroke_width=1.6)
    canvas.polyline(annulus.seam_curve(512), stroke=ACCENT, stroke_width=1.4)
    canvas.dot((0.0, 0.0), radius_px=3.5, fill=ACCENT)
    canvas.dot((0.0, 1.0), radius_px=3.5, fill=ACCENT)
    for center in annulus.chart_coords(annulus.necklace.bead_centers):
        canvas.dot(center, radius_px=2.5, fill=BASE)
    canvas.write(path)


def embedding_figure(embedding, path, rings: int = 5, spokes: int = 12) -> None:
    """Image of the embedded disc in the chart, with an equal-area grid."""
    canvas = SvgCanvas((-1.08, -0.06, 1.08, 1.06))
    canvas.rect_world((-1.0, 0.0), (1.0, 1.0), stroke=BASE, stroke_width=1.6)
    t = np.linspace(0.0, 2.0 * np.pi, 512)
    rho = embedding.disc_radius
    for k in range(1, rings + 1):
        r = rho * np.sqrt(k / rings)  # equal-area radii
        circle = np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)
        style = dict(stroke=FAINT, stroke_width=0.8)
        if k == rings:
            style = dict(stroke=ACCENT, stroke_width=1.4)
        canvas.polyline(embedding.map(circle), **style)
    ss = np.linspace(0.02, 1.0, 64)
    for j in range(spokes):
        ang = 2.0 * np.pi * j / spokes
        ray = rho * np.stack([ss * np.cos(ang), ss * np.sin(ang)], axis=-1)
        canvas.polyline(embedding.map(ray), stroke=FAINT, stroke_width=0.6)
    canvas.dot(embedding.map(np.zeros((1, 2)))[0], radius_px=3.0, fill=BASE)
    canvas.write(path)
