"""CSV and SVG writers for trajectories and bifurcation diagrams.

Numbers are written with 17 significant digits so a float survives a
write/read round trip bit for bit. SVG output is plain text assembled by
hand with fixed number formatting, so identical input gives identical bytes.
"""
from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import OutputError
from .model import FlowMode

WIDTH, HEIGHT = 960, 600
FONT_SIZE = 12
MARGIN = dict(left=80, right=150, top=40, bottom=60)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _fmt(x):
    if x is None:
        return ""
    return "%.17g" % x


def _write(path, text):
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None


# --------------------------------------------------------------------------
# CSV

def trajectory_columns(traj):
    spec = traj.spec
    a, g = spec.asset_names, spec.group_names
    cols = ["t"] + [f"P.{x}" for x in a]
    cols += [f"zeta1.{x}.{y}" for x in a for y in g]
    cols += [f"zeta2.{x}.{y}" for x in a for y in g]
    if traj.mode is FlowMode.CLOSED_FLOW:
        cols += [f"M.{y}" for y in g] + [f"N.{x}.{y}" for x in a for y in g]
    cols += [f"W.{y}" for y in g]
    return cols


def trajectory_table(traj):
    k = len(traj)
    parts = [traj.times[:, None], traj.prices, traj.trend.reshape(k, -1), traj.value.reshape(k, -1)]
    if traj.mode is FlowMode.CLOSED_FLOW:
        parts += [traj.cash, traj.shares.reshape(k, -1)]
    parts.append(traj.wealth)
    return np.hstack(parts)


def emit_trajectory_csv(traj, path):
    if len(traj) == 0:
        raise ValueError("empty trajectory: nothing to write")
    table = trajectory_table(traj)
    lines = [",".join(trajectory_columns(traj))]
    lines += [",".join(map(_fmt, row)) for row in table.tolist()]
    _write(path, "\n".join(lines) + "\n")


def diagram_columns(diagram):
    return (["param"] + [f"amplitude.{x}" for x in diagram.asset_names]
            + ["max_real", "frequency", "period", "status"])


def emit_diagram_csv(diagram, path):
    if not diagram.samples:
        raise ValueError("empty bifurcation diagram: nothing to write")
    meta = dict(diagram.metadata)
    meta["parameter"] = diagram.parameter_path
    meta["threshold_eigen"] = _fmt(diagram.threshold_eigen) or "none"
    meta["threshold_amplitude"] = _fmt(diagram.threshold_amplitude) or "none"
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.append(",".join(diagram_columns(diagram)))
    for s in diagram.samples:
        row = [_fmt(s.param)] + [_fmt(float(a)) for a in s.amplitude]
        row += [_fmt(s.max_real), _fmt(s.frequency), _fmt(s.period), s.status.replace(",", ";")]
        lines.append(",".join(row))
    _write(path, "\n".join(lines) + "\n")


def read_csv(path):
    """(metadata dict, header list, rows) with numeric cells as floats,
    empty cells as None and anything else left as text."""
    meta, header, rows = {}, None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append([_parse_cell(c) for c in line.split(",")])
    return meta, header, rows


def _parse_cell(cell):
    if cell == "":
        return None
    try:
        return float(cell)
    except ValueError:
        return cell


# --------------------------------------------------------------------------
# SVG

def nice_ticks(lo, hi, target=6):
    """Round tick positions covering [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("non-finite axis range")
    if hi <= lo:
        pad = abs(lo) * 0.05 or 1.0
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw)
    first = math.floor(lo / step) * step
    last = math.ceil(hi / step) * step
    count = int(round((last - first) / step))
    return [first + i * step for i in range(count + 1)]


def _num(x):
    return f"{x:.2f}"


def _label(v):
    return f"{v:.6g}"


class _Canvas:
    def __init__(self, title, xlabel, ylabel, xr, yr):
        self.xt = nice_ticks(*xr)
        self.yt = nice_ticks(*yr)
        self.x0, self.x1 = self.xt[0], self.xt[-1]
        self.y0, self.y1 = self.yt[0], self.yt[-1]
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
        self.out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="{FONT_SIZE}">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2:.2f}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>',
        ]
        self._axes(xlabel, ylabel)
        self.legend = []

    def sx(self, x):
        return MARGIN["left"] + (x - self.x0) / (self.x1 - self.x0) * self.pw

    def sy(self, y):
        return MARGIN["top"] + (self.y1 - y) / (self.y1 - self.y0) * self.ph

    def _axes(self, xlabel, ylabel):
        L, T = MARGIN["left"], MARGIN["top"]
        B = T + self.ph
        o = self.out
        o.append(f'<rect x="{L}" y="{T}" width="{self.pw}" height="{self.ph}" fill="none" stroke="black"/>')
        for x in self.xt:
            X = _num(self.sx(x))
            o.append(f'<line x1="{X}" y1="{B}" x2="{X}" y2="{B + 5}" stroke="black"/>')
            o.append(f'<text x="{X}" y="{B + 18}" text-anchor="middle">{_label(x)}</text>')
        for y in self.yt:
            Y = _num(self.sy(y))
            o.append(f'<line x1="{L - 5}" y1="{Y}" x2="{L}" y2="{Y}" stroke="black"/>')
            o.append(f'<text x="{L - 8}" y="{Y}" text-anchor="end" dominant-baseline="middle">{_label(y)}</text>')
        o.append(f'<text x="{L + self.pw / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
        cy = T + self.ph / 2
        o.append(f'<text x="18" y="{cy:.2f}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {cy:.2f})">{escape(ylabel)}</text>')

    def polyline(self, x, y, color, name, width=1.5):
        pts = " ".join(f"{_num(self.sx(a))},{_num(self.sy(b))}" for a, b in zip(x, y)
                       if math.isfinite(b))
        self.out.append(f'<polyline class="series" fill="none" stroke="{color}" '
                        f'stroke-width="{width}" points="{pts}"/>')
        self.legend.append((name, color))

    def markers(self, x, y, color):
        for a, b in zip(x, y):
            if math.isfinite(b):
                self.out.append(f'<circle cx="{_num(self.sx(a))}" cy="{_num(self.sy(b))}" r="2.5" fill="{color}"/>')

    def hline(self, y, label):
        Y = _num(self.sy(y))
        self.out.append(f'<line class="reference" x1="{MARGIN["left"]}" y1="{Y}" '
                        f'x2="{MARGIN["left"] + self.pw}" y2="{Y}" stroke="black" stroke-dasharray="6,4"/>')
        self.legend.append((label, None))

    def vline(self, x, label):
        X = _num(self.sx(x))
        self.out.append(f'<line class="threshold" x1="{X}" y1="{MARGIN["top"]}" x2="{X}" '
                        f'y2="{MARGIN["top"] + self.ph}" stroke="black" stroke-dasharray="3,3"/>')
        self.out.append(f'<text x="{X}" y="{MARGIN["top"] - 4}" text-anchor="middle">{escape(label)}</text>')

    def finish(self):
        x = WIDTH - MARGIN["right"] + 12
        for k, (name, color) in enumerate(self.legend):
            y = MARGIN["top"] + 12 + 18 * k
            dash = '' if color else ' stroke-dasharray="6,4"'
            self.out.append(f'<line x1="{x}" y1="{y}" x2="{x + 20}" y2="{y}" '
                            f'stroke="{color or "black"}" stroke-width="1.5"{dash}/>')
            self.out.append(f'<text x="{x + 26}" y="{y}" dominant-baseline="middle">{escape(name)}</text>')
        return "\n".join(self.out + ["</svg>"]) + "\n"


def _range(*arrays):
    vals = np.concatenate([np.ravel(a) for a in arrays])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        raise ValueError("nothing finite to plot")
    return float(vals.min()), float(vals.max())


def render_trajectory_svg(traj, kind="price"):
    """``kind``: price (with dashed fundamental line), sentiment or wealth."""
    if len(traj) == 0:
        raise ValueError("empty trajectory: nothing to plot")
    spec = traj.spec
    t = traj.times
    if kind == "price":
        Pa = spec.packed.Pa
        c = _Canvas("Prices", "time (days)", "price (currency per unit)",
                    (t[0], t[-1]), _range(traj.prices, Pa))
        for i, name in enumerate(spec.asset_names):
            c.polyline(t, traj.prices[:, i], PALETTE[i % len(PALETTE)], name)
        for value in sorted(set(Pa.tolist())):
            c.hline(value, f"fundamental {value:g}")
    elif kind == "sentiment":
        c = _Canvas("Sentiments", "time (days)", "sentiment (dimensionless)",
                    (t[0], t[-1]), _range(traj.trend, traj.value))
        k = 0
        for i, a in enumerate(spec.asset_names):
            for j, g in enumerate(spec.group_names):
                for arr, tag in ((traj.trend, "trend"), (traj.value, "value")):
                    if np.any(arr[:, i, j] != 0):
                        c.polyline(t, arr[:, i, j], PALETTE[k % len(PALETTE)], f"{tag} {a}/{g}")
                        k += 1
    elif kind == "wealth":
        c = _Canvas("Wealth fractions", "time (days)", "fraction of total wealth",
                    (t[0], t[-1]), _range(traj.wealth))
        for j, name in enumerate(spec.group_names):
            c.polyline(t, traj.wealth[:, j], PALETTE[j % len(PALETTE)], name)
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    return c.finish()


def render_diagram_svg(diagram):
    if not diagram.samples:
        raise ValueError("empty bifurcation diagram: nothing to plot")
    x = diagram.params
    amps = diagram.amplitudes
    c = _Canvas("Bifurcation diagram", diagram.parameter_path,
                "oscillation amplitude (currency per unit)", (x[0], x[-1]), _range(amps, [0.0]))
    for i, name in enumerate(diagram.asset_names):
        color = PALETTE[i % len(PALETTE)]
        c.polyline(x, amps[:, i], color, name)
        c.markers(x, amps[:, i], color)
    if diagram.threshold_eigen is not None:
        c.vline(diagram.threshold_eigen, f"threshold {diagram.threshold_eigen:.4g}")
    return c.finish()


def emit_svg(obj, path, plot_kind=None):
    """Write a trajectory (``plot_kind`` price/sentiment/wealth) or a
    bifurcation diagram as SVG."""
    from .bifurcation import BifurcationDiagram

    if isinstance(obj, BifurcationDiagram):
        text = render_diagram_svg(obj)
    else:
        text = render_trajectory_svg(obj, plot_kind or "price")
    _write(path, text)
