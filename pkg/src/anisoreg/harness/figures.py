"""Deterministic SVG figures: cusp regions, their decompositions, decay plots."""

from __future__ import annotations

from pathlib import Path
from typing import Callable

import numpy as np

from ..geometry import ExponentVector, aniso_box, slab
from ..kernels import CuspParams, in_gamma

SIZE = 400
MARGIN = 40


def _f(x: float) -> str:
    return f"{x:.2f}"


def _header(title: str) -> list:
    w = SIZE + 2 * MARGIN
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{w}" viewBox="0 0 {w} {w}">',
        f"<title>{title}</title>",
        f'<rect x="0" y="0" width="{w}" height="{w}" fill="white"/>',
    ]


def raster_layers(layers: list, extent: float, n: int = 200) -> list:
    """Rectangles for each ``(mask_function, colour)`` layer on ``[-extent, extent]^2``.

    Masks are evaluated at cell centres; horizontal runs are merged.
    """
    h = 2.0 * extent / n
    c = -extent + (np.arange(n) + 0.5) * h
    Z = np.stack(np.meshgrid(c, c[::-1], indexing="xy"), axis=-1)  # row 0 is the top
    cell = SIZE / n
    out = []
    for mask_fn, colour in layers:
        m = np.asarray(mask_fn(Z), dtype=bool)
        for i in range(n):
            row = m[i]
            j = 0
            while j < n:
                if row[j]:
                    k = j
                    while k < n and row[k]:
                        k += 1
                    out.append(
                        f'<rect x="{_f(MARGIN + j * cell)}" y="{_f(MARGIN + i * cell)}" '
                        f'width="{_f((k - j) * cell)}" height="{_f(cell)}" fill="{colour}"/>'
                    )
                    j = k
                else:
                    j += 1
    return out


def _frame(extent: float) -> list:
    s = [f'<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>']
    mid = MARGIN + SIZE / 2
    s.append(f'<line x1="{MARGIN}" y1="{_f(mid)}" x2="{MARGIN + SIZE}" y2="{_f(mid)}" stroke="black" stroke-width="0.5"/>')
    s.append(f'<line x1="{_f(mid)}" y1="{MARGIN}" x2="{_f(mid)}" y2="{MARGIN + SIZE}" stroke="black" stroke-width="0.5"/>')
    s.append(f'<text x="{MARGIN}" y="{MARGIN + SIZE + 16}" font-size="12">{-extent:g}</text>')
    s.append(f'<text x="{MARGIN + SIZE - 12}" y="{MARGIN + SIZE + 16}" font-size="12">{extent:g}</text>')
    return s


def _svg(title: str, extent: float, layers: list, caption: str, n: int = 200) -> str:
    parts = _header(title) + raster_layers(layers, extent, n) + _frame(extent)
    parts.append(f'<text x="{MARGIN}" y="{MARGIN - 12}" font-size="13">{caption}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def gamma_mask(params: CuspParams, x=(0.0, 0.0)) -> Callable:
    x = np.asarray(x, dtype=float)
    return lambda Z: in_gamma(Z - x, params)


def shaded_fraction(params: CuspParams, extent: float = 1.0, n: int = 200) -> float:
    """Fraction of ``[-extent, extent]^2`` covered by the cusp region, on the figure raster."""
    h = 2.0 * extent / n
    c = -extent + (np.arange(n) + 0.5) * h
    Z = np.stack(np.meshgrid(c, c, indexing="ij"), axis=-1)
    return float(np.mean(in_gamma(Z, params)))


def gamma_figure(alphas, params: CuspParams, extent: float = 1.0) -> str:
    a1, a2 = alphas
    cap = f"cusp region, alpha = ({a1:g}, {a2:g}), gamma = {params.gamma:.4g}"
    return _svg("cusp region", extent, [(gamma_mask(params), "#808080")], cap)


def tail_figure(alphas, params: CuspParams, r: float, x0=(0.0, 0.0), extent: float = 1.0) -> str:
    """Complement of the first-axis slab and its part inside the cusp region."""
    ev = ExponentVector(tuple(alphas))
    s = slab(x0, r, 0, ev)
    outside = lambda Z: ~s.contains(Z)  # noqa: E731
    both = lambda Z: outside(Z) & gamma_mask(params, x0)(Z)  # noqa: E731
    cap = f"slab complement (light) and its cusp part (dark), r = {r:g}"
    return _svg("tail set", extent, [(outside, "#d0d0d0"), (both, "#606060")], cap)


def ab_masks(alphas, params: CuspParams, r: float, x=(0.0, 0.0)) -> tuple:
    """Masks of the two halves of ``M_r(x)`` intersected with the cusp region around ``x``.

    Inside ``M_1(x)`` each half is a cusp; outside it the halves are the two
    diagonal cones.
    """
    ev = ExponentVector(tuple(alphas))
    x = np.asarray(x, dtype=float)
    Mr = aniso_box(x, r, ev)
    M1 = aniso_box(x, 1.0, ev)

    def A(Z):
        z = np.abs(Z - x)
        inner = M1.contains(Z) & (z[..., 1] <= z[..., 0] ** (1.0 / params.b1))
        outer = ~M1.contains(Z) & (z[..., 1] <= z[..., 0])
        return Mr.contains(Z) & (inner | outer)

    def B(Z):
        z = np.abs(Z - x)
        inner = M1.contains(Z) & (z[..., 0] <= z[..., 1] ** (1.0 / params.b2))
        outer = ~M1.contains(Z) & (z[..., 0] <= z[..., 1])
        return Mr.contains(Z) & (inner | outer)

    return A, B, lambda Z: Mr.contains(Z) & gamma_mask(params, x)(Z)


def ab_figure(alphas, params: CuspParams, r: float, x=(0.0, 0.0), extent: float = 2.0) -> str:
    A, B, _ = ab_masks(alphas, params, r, x)
    cap = f"A (blue) and B (red) at r = {r:g}, x = ({x[0]:g}, {x[1]:g})"
    return _svg("cusp decomposition", extent, [(A, "#3060c0"), (B, "#c03030")], cap)


def decay_figure(radii, curves: list, title: str = "oscillation decay") -> str:
    """Log-log plot of oscillation against radius, one polyline per curve."""
    radii = np.asarray(radii, dtype=float)
    vals = np.concatenate([np.asarray(c, dtype=float) for c in curves]) if curves else np.ones(1)
    vals = vals[vals > 0]
    lo = np.floor(np.log10(vals.min())) if vals.size else -1.0
    hi = np.ceil(np.log10(vals.max())) if vals.size else 0.0
    hi = max(hi, lo + 1)
    lx = np.log10(radii)
    x0, x1 = lx.min(), lx.max()
    if x1 == x0:
        x1 = x0 + 1

    def px(v):
        return MARGIN + (v - x0) / (x1 - x0) * SIZE

    def py(v):
        return MARGIN + (hi - v) / (hi - lo) * SIZE

    parts = _header(title)
    parts.append(f'<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>')
    for c in curves:
        c = np.asarray(c, dtype=float)
        ok = c > 0
        pts = " ".join(f"{_f(px(a))},{_f(py(np.log10(b)))}" for a, b in zip(lx[ok], c[ok]))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#3060c0" stroke-width="1"/>')
    parts.append(f'<text x="{MARGIN}" y="{MARGIN - 12}" font-size="13">{title}: log10 osc in [{lo:g}, {hi:g}] vs log10 r</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_figures(report, kind: str | None = None, out: str | Path = ".") -> list:
    """Write the report's SVGs of ``kind`` (all kinds if None).  Returns written paths."""
    if report is None or not report.figures:
        return []
    kinds = sorted(report.figures) if kind is None else [kind]
    written = []
    out = Path(out)
    for k in kinds:
        files = report.figures.get(k, {})
        if not files:
            continue
        out.mkdir(parents=True, exist_ok=True)
        for name in sorted(files):
            path = out / f"{report.prefix}-{name}"
            path.write_text(files[name])
            written.append(path)
    return written
