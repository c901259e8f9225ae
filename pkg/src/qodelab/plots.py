"""Tiny dependency-free SVG line plots."""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
W, H, PAD = 640, 400, 60


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_plot_svg(
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
    logy: bool = False,
) -> str:
    xs = np.asarray(x, dtype=float)
    tx = np.log10 if logx else (lambda a: a)
    ty = np.log10 if logy else (lambda a: a)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    X = tx(xs)
    finite = [ty(v[v > 0]) if logy else v for v in ys.values()]
    allv = np.concatenate([f[np.isfinite(f)] for f in finite] + [np.zeros(0)])
    ylo, yhi = (float(allv.min()), float(allv.max())) if allv.size else (0.0, 1.0)
    xlo, xhi = float(X.min()), float(X.max())
    if yhi == ylo:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5

    def px(v):
        return PAD + (v - xlo) / (xhi - xlo) * (W - 2 * PAD)

    def py(v):
        return H - PAD - (v - ylo) / (yhi - ylo) * (H - 2 * PAD)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
           f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
           f'<text x="{W / 2}" y="{PAD / 2}" text-anchor="middle">{title}</text>',
           f'<text x="{W / 2}" y="{H - 15}" text-anchor="middle">{xlabel}{" (log10)" if logx else ""}</text>',
           f'<text x="15" y="{H / 2}" transform="rotate(-90 15 {H / 2})" text-anchor="middle">'
           f'{ylabel}{" (log10)" if logy else ""}</text>']
    for frac in (0.0, 0.5, 1.0):
        xv, yv = xlo + frac * (xhi - xlo), ylo + frac * (yhi - ylo)
        out.append(f'<text x="{px(xv):.1f}" y="{H - PAD + 16}" text-anchor="middle">{_fmt(xv)}</text>')
        out.append(f'<text x="{PAD - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{_fmt(yv)}</text>')
    for i, (name, v) in enumerate(ys.items()):
        color = PALETTE[i % len(PALETTE)]
        with np.errstate(divide="ignore", invalid="ignore"):
            Y = ty(v)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(X, Y) if np.isfinite(a) and np.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{W - PAD - 4}" y="{PAD + 14 * (i + 1)}" text-anchor="end" fill="{color}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
