"""Best-effort SVG emission; the CSVs remain the data contract.

The impulse-response "shotgun" view overlays every per-history path with
low opacity, one panel per response target, so the darkness of a region
shows where the paths concentrate.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

PANEL_W, PANEL_H, PAD = 360, 150, 36


def _panel(buf, paths, x0, y0, title):
    lo = float(np.min(paths))
    hi = float(np.max(paths))
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    span = hi - lo
    lo -= 0.05 * span
    hi += 0.05 * span
    H = paths.shape[1] - 1

    def xm(h):
        return x0 + PANEL_W * (h / max(H, 1))

    def ym(v):
        return y0 + PANEL_H * (1.0 - (v - lo) / (hi - lo))

    buf.write(
        f'<rect x="{x0}" y="{y0}" width="{PANEL_W}" height="{PANEL_H}" '
        'fill="white" stroke="#999"/>\n'
    )
    if lo < 0.0 < hi:
        zy = ym(0.0)
        buf.write(
            f'<line x1="{x0}" y1="{zy:.2f}" x2="{x0 + PANEL_W}" y2="{zy:.2f}" '
            'stroke="#bbb" stroke-dasharray="4 3"/>\n'
        )
    opacity = max(0.02, min(0.5, 12.0 / max(1, paths.shape[0])))
    for k in range(paths.shape[0]):
        pts = " ".join(f"{xm(h):.2f},{ym(paths[k, h]):.2f}" for h in range(H + 1))
        buf.write(
            f'<polyline points="{pts}" fill="none" stroke="#13406a" '
            f'stroke-opacity="{opacity:.3f}" stroke-width="1.2"/>\n'
        )
    buf.write(
        f'<text x="{x0 + 4}" y="{y0 + 14}" font-family="sans-serif" '
        f'font-size="12" fill="#222">{title}</text>\n'
    )
    buf.write(
        f'<text x="{x0 + 2}" y="{y0 + PANEL_H - 3}" font-family="sans-serif" '
        f'font-size="9" fill="#666">{lo:.2f}</text>\n'
        f'<text x="{x0 + 2}" y="{y0 + 26}" font-family="sans-serif" '
        f'font-size="9" fill="#666">{hi:.2f}</text>\n'
    )


def shotgun_svg(path, result, names, include_weights: bool = True) -> None:
    """Write one panel per response target, all histories overlaid."""
    d = len(names)
    M = result.paths.shape[2] - d if include_weights else 0
    targets = list(names) + [f"alpha_{m + 1}" for m in range(M)]
    rows = len(targets)
    width = PANEL_W + 2 * PAD
    height = rows * (PANEL_H + PAD) + PAD
    buf = io.StringIO()
    buf.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n<rect width="100%" height="100%" fill="white"/>\n'
    )
    for j, title in enumerate(targets):
        _panel(buf, result.paths[:, :, j], PAD, PAD + j * (PANEL_H + PAD), title)
    buf.write("</svg>\n")
    Path(path).write_text(buf.getvalue())
