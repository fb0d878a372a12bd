"""Hand-rolled SVG figures: sweep panels, grouped variance bars, profiles.

Plain string assembly, no plotting dependency. Every renderer returns the
SVG document as a string; ``write`` puts one on disk.
"""

from __future__ import annotations

import numpy as np

VIEW_LO, VIEW_HI = -1.05, 1.05  # fixed frame so traversal motion is comparable

_BAR_COLORS = ["#4c78a8", "#f58518", "#e45756", "#72b7b2", "#54a24b",
               "#eeca3b", "#b279a2", "#ff9da6", "#9d755d", "#bab0ac"]


def write(svg: str, path) -> None:
    with open(str(path), "w") as f:
        f.write(svg)


def _doc(width: int, height: int, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">')
    return "\n".join([head, *body, "</svg>"])


def _polyline(pts, stroke: str, width: float = 1.0, dash: str | None = None) -> str:
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
            f'stroke-width="{width}"{extra}/>')


def _circle(x, y, r, fill) -> str:
    return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{fill}"/>'


def _rect(x, y, w, h, fill) -> str:
    return f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" fill="{fill}"/>'


def _text(x, y, s, size=10, anchor="start") -> str:
    return (f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" '
            f'font-family="sans-serif" text-anchor="{anchor}">{s}</text>')


def _frame_mapper(x0: float, y0: float, side: float):
    """Map normalized coords in [VIEW_LO, VIEW_HI] to a pixel box (y flipped)."""
    span = VIEW_HI - VIEW_LO

    def to_px(p):
        px = x0 + (p[0] - VIEW_LO) / span * side
        py = y0 + (VIEW_HI - p[1]) / span * side
        return px, py

    return to_px


def render_sweep_panel(frames, columns: int = 7, side: int = 120) -> str:
    """Grid of decoded encounters, one mini-frame per sweep value.

    Each frame draws both trajectories with a green start and red end
    marker and light connecting lines at matched time indices.
    """
    pad, label_h = 8, 14
    rows = (len(frames) + columns - 1) // columns
    width = columns * (side + pad) + pad
    height = rows * (side + label_h + pad) + pad
    body = []
    for n, (value, enc) in enumerate(frames):
        cx = pad + (n % columns) * (side + pad)
        cy = pad + (n // columns) * (side + label_h + pad)
        to_px = _frame_mapper(cx, cy, side)
        body.append(f'<rect x="{cx}" y="{cy}" width="{side}" height="{side}" '
                    f'fill="#fcfcfc" stroke="#cccccc"/>')
        for t in range(enc.length):
            body.append(_polyline([to_px(enc.s1[t]), to_px(enc.s2[t])], "#dddddd", 0.5))
        for seq, color in ((enc.s1, "#4c78a8"), (enc.s2, "#f58518")):
            body.append(_polyline([to_px(p) for p in seq], color, 1.2))
            body.append(_circle(*to_px(seq[0]), 3, "#2ca02c"))
            body.append(_circle(*to_px(seq[-1]), 3, "#d62728"))
        body.append(_text(cx + side / 2, cy + side + 11, f"{value:+.2f}",
                          size=10, anchor="middle"))
    return _doc(width, height, body)


def render_disentanglement_bars(profile) -> str:
    """One panel per target code: K groups of M sigma bars (output variance).

    Mirrors the grouped-bar layout of the scan figures: within each output
    code, one bar per input sigma, colored by sigma.
    """
    K, M, _ = profile.output_variance.shape
    bar_w, gap, group_gap = 4, 1, 10
    group_w = M * (bar_w + gap) + group_gap
    panel_w = K * group_w + 60
    panel_h, pad = 90, 24
    width = panel_w + 2 * pad
    height = K * (panel_h + pad) + pad
    vmax = max(profile.output_variance.max(), 1e-12)
    body = []
    for i in range(K):
        oy = pad + i * (panel_h + pad)
        body.append(_text(4, oy + panel_h / 2, f"code {i}", size=10))
        body.append(f'<line x1="50" y1="{oy + panel_h}" x2="{width - pad}" '
                    f'y2="{oy + panel_h}" stroke="#999999"/>')
        for j in range(K):
            gx = 50 + j * group_w
            for m in range(M):
                h = panel_h * float(profile.output_variance[i, m, j]) / vmax
                x = gx + m * (bar_w + gap)
                body.append(_rect(x, oy + panel_h - h, bar_w, max(h, 0.3),
                                  _BAR_COLORS[m % len(_BAR_COLORS)]))
            body.append(_text(gx + group_w / 2 - group_gap / 2, oy + panel_h + 11,
                              str(j), size=9, anchor="middle"))
    return _doc(width, height, body)


def render_prior_metric_bars(profile) -> str:
    """K panels of per-code normalized variance with one code pinned."""
    table = profile.normalized_variance
    K = len(table)
    bar_w, gap = 10, 4
    panel_w = K * (bar_w + gap) + 60
    panel_h, pad = 70, 22
    width = panel_w + 2 * pad
    height = K * (panel_h + pad) + pad
    vmax = max(table.max(), 1e-12)
    body = []
    for k in range(K):
        oy = pad + k * (panel_h + pad)
        body.append(_text(4, oy + panel_h / 2, f"fix {k}", size=10))
        for j in range(K):
            h = panel_h * float(table[k, j]) / vmax
            x = 50 + j * (bar_w + gap)
            fill = "#d62728" if j == k else "#4c78a8"
            body.append(_rect(x, oy + panel_h - h, bar_w, max(h, 0.3), fill))
    return _doc(width, height, body)


def _line_panel(body, values, x0, y0, w, h, color, reference=None, title=""):
    lo = float(min(values.min(), reference.min() if reference is not None else values.min()))
    hi = float(max(values.max(), reference.max() if reference is not None else values.max()))
    if hi - lo < 1e-12:
        hi = lo + 1e-12
    n = len(values)

    def to_px(t, v):
        px = x0 + (t / max(n - 1, 1)) * w
        py = y0 + h - (v - lo) / (hi - lo) * h
        return px, py

    body.append(f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" '
                f'fill="#fcfcfc" stroke="#cccccc"/>')
    if reference is not None:
        body.append(_polyline([to_px(t, v) for t, v in enumerate(reference)],
                              "#222222", 1.0, dash="4,3"))
    body.append(_polyline([to_px(t, v) for t, v in enumerate(values)], color, 1.4))
    body.append(_text(x0, y0 - 6, f"{title}  [{lo:.3g}, {hi:.3g}]", size=11))


def render_rationality(report) -> str:
    """Stacked distance / speed / direction-change panels, dashed reference."""
    w, h, pad, top = 460, 110, 18, 26
    width = w + 2 * pad
    height = 3 * (h + top) + pad
    ref = report.reference or {}
    body = []
    panels = [("distance", report.distance, "#4c78a8"),
              ("speed", report.speed, "#f58518"),
              ("direction change (deg)", report.direction, "#54a24b")]
    for idx, (title, values, color) in enumerate(panels):
        y0 = top + idx * (h + top)
        key = title.split(" ")[0]
        _line_panel(body, np.asarray(values), pad, y0, w, h, color,
                    reference=ref.get(key), title=title)
    return _doc(width, height, body)


def render_history(history) -> str:
    """Total/recon/KL training curves on one jointly scaled panel."""
    w, h, pad, top = 460, 160, 18, 26
    arr = np.asarray(history, dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    if hi - lo < 1e-12:
        hi = lo + 1e-12
    n = len(arr)
    body = [f'<rect x="{pad}" y="{top}" width="{w}" height="{h}" '
            f'fill="#fcfcfc" stroke="#cccccc"/>',
            _text(pad, top - 6, f"loss: total / recon / kl  [{lo:.3g}, {hi:.3g}]", size=11)]
    for col, color in enumerate(["#4c78a8", "#f58518", "#54a24b"]):
        pts = [(pad + (t / max(n - 1, 1)) * w,
                top + h - (v - lo) / (hi - lo) * h) for t, v in enumerate(arr[:, col])]
        body.append(_polyline(pts, color, 1.3))
    return _doc(w + 2 * pad, h + top + pad, body)
