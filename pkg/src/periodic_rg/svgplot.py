"""Minimal hand-written SVG output for polygons and time series."""

from xml.sax.saxutils import escape

import numpy as np

WIDTH = 480
HEIGHT = 360
PAD = 40


class _Frame:
    def __init__(self, lo, hi, x0, y0, w, h):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        span = np.where(hi - lo > 0, hi - lo, 1.0)
        self.lo, self.hi = lo - 0.1 * span, hi + 0.1 * span
        self.x0, self.y0, self.w, self.h = x0, y0, w, h

    def __call__(self, x, y):
        px = self.x0 + (x - self.lo[0]) / (self.hi[0] - self.lo[0]) * self.w
        py = self.y0 + self.h - (y - self.lo[1]) / (self.hi[1] - self.lo[1]) * self.h
        return f"{px:.2f},{py:.2f}"


def _axes(fr, label=None):
    out = [f'<rect x="{fr.x0}" y="{fr.y0}" width="{fr.w}" height="{fr.h}" fill="none" stroke="#888"/>']
    fmt = lambda v: f"{v:.3g}"
    out.append(f'<text x="{fr.x0}" y="{fr.y0 + fr.h + 14}" font-size="10">{fmt(fr.lo[0])}</text>')
    out.append(f'<text x="{fr.x0 + fr.w}" y="{fr.y0 + fr.h + 14}" font-size="10" text-anchor="end">{fmt(fr.hi[0])}</text>')
    out.append(f'<text x="{fr.x0 - 4}" y="{fr.y0 + fr.h}" font-size="10" text-anchor="end">{fmt(fr.lo[1])}</text>')
    out.append(f'<text x="{fr.x0 - 4}" y="{fr.y0 + 10}" font-size="10" text-anchor="end">{fmt(fr.hi[1])}</text>')
    if label:
        out.append(f'<text x="{fr.x0 + fr.w / 2}" y="{fr.y0 - 6}" font-size="12" text-anchor="middle">{escape(label)}</text>')
    return out


def _doc(body, width=WIDTH, height=HEIGHT):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n' + "\n".join(body) + "\n</svg>\n")


def polygons(layers, title=None):
    """Filled polygons; ``layers`` is a list of (vertices, fill, stroke, opacity).

    The view box is the joint bounding box plus a 10% margin.
    """
    pts = np.vstack([np.asarray(v) for v, *_ in layers])
    fr = _Frame(pts.min(axis=0), pts.max(axis=0), PAD, PAD, WIDTH - 2 * PAD, HEIGHT - 2 * PAD)
    body = _axes(fr, title)
    for verts, fill, stroke, opacity in layers:
        path = " L ".join(fr(x, y) for x, y in verts)
        body.append(f'<path d="M {path} Z" fill="{fill}" fill-opacity="{opacity}" stroke="{stroke}"/>')
    return _doc(body)


def time_series(panels, title=None):
    """Stacked step plots.

    ``panels`` is a list of dicts with ``series`` = [(t, values, colour, dashed)]
    and an optional ``label``.
    """
    ph = (HEIGHT * 1.0 - PAD * (len(panels) + 1)) / len(panels)
    body = []
    if title:
        body.append(f'<text x="{WIDTH / 2}" y="14" font-size="13" text-anchor="middle">{escape(title)}</text>')
    for i, panel in enumerate(panels):
        ts = np.concatenate([np.asarray(s[0], dtype=float) for s in panel["series"]])
        vs = np.concatenate([np.asarray(s[1], dtype=float) for s in panel["series"]])
        vs = vs[np.isfinite(vs)]
        fr = _Frame([ts.min(), vs.min()], [ts.max() + 1, vs.max()], PAD, PAD + i * (ph + PAD), WIDTH - 2 * PAD, ph)
        body += _axes(fr, panel.get("label"))
        for t, vals, colour, dashed in panel["series"]:
            pts = []
            for tt, vv in zip(t, vals):
                if np.isfinite(vv):
                    pts += [fr(tt, vv), fr(tt + 1, vv)]
            dash = ' stroke-dasharray="4,3"' if dashed else ""
            body.append(f'<polyline points="{" ".join(pts)}" fill="none" stroke="{colour}"{dash}/>')
    return _doc(body)
