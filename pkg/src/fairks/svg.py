"""Minimal deterministic SVG line plots (linear or logarithmic y axis)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#c0392b", "#1f4e9c", "#1f4e9c", "#222222", "#27803b", "#8e44ad")
DASHES = ("", "2,3", "7,4", "", "4,2,1,2", "1,1")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str
    color: str | None = None
    dash: str | None = None


@dataclass
class Figure:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    logy: bool = False
    width: int = 640
    height: int = 420
    series: list = field(default_factory=list)

    def add(self, x, y, label: str, color: str | None = None, dash: str | None = None) -> "Figure":
        self.series.append(Series(np.asarray(x, float), np.asarray(y, float), label, color, dash))
        return self

    def render(self) -> str:
        return render(self)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(render(self))


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _label(v: float) -> str:
    if v == 0:
        return "0"
    a = abs(v)
    if 1e-3 <= a < 1e4:
        return f"{v:g}"
    return f"{v:.0e}"


def render(fig: Figure) -> str:
    W, H = fig.width, fig.height
    ml, mr, mt, mb = 70, 20, 36, 50
    pw, ph = W - ml - mr, H - mt - mb
    xs, ys = [], []
    for s in fig.series:
        ok = np.isfinite(s.x) & np.isfinite(s.y)
        if fig.logy:
            ok &= s.y > 0
        xs.append(s.x[ok])
        ys.append(np.log10(s.y[ok]) if fig.logy else s.y[ok])
    allx = np.concatenate(xs) if xs else np.array([0.0, 1.0])
    ally = np.concatenate(ys) if ys else np.array([0.0, 1.0])
    if allx.size == 0:
        allx, ally = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    if fig.logy:
        y0, y1 = math.floor(y0), math.ceil(y1)
    else:
        pad = 0.05 * (y1 - y0)
        y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#000" stroke-width="1"/>',
    ]
    for t in _nice_ticks(x0, x1):
        X = px(t)
        out.append(f'<line x1="{_fmt(X)}" y1="{mt + ph}" x2="{_fmt(X)}" y2="{mt + ph + 5}" stroke="#000"/>')
        out.append(
            f'<text x="{_fmt(X)}" y="{mt + ph + 18}" font-size="11" text-anchor="middle">{_label(t)}</text>'
        )
    if fig.logy:
        step = max(1, int(math.ceil((y1 - y0) / 8)))
        yt = [float(e) for e in range(int(y0), int(y1) + 1, step)]
        labels = [f"1e{int(e)}" for e in yt]
    else:
        yt = _nice_ticks(y0, y1)
        labels = [_label(t) for t in yt]
    for t, lab in zip(yt, labels):
        Y = py(t)
        out.append(f'<line x1="{ml - 5}" y1="{_fmt(Y)}" x2="{ml}" y2="{_fmt(Y)}" stroke="#000"/>')
        out.append(f'<text x="{ml - 8}" y="{_fmt(Y + 4)}" font-size="11" text-anchor="end">{lab}</text>')
    for i, (s, sx, sy) in enumerate(zip(fig.series, xs, ys)):
        if sx.size == 0:
            continue
        color = s.color or PALETTE[i % len(PALETTE)]
        dash = s.dash if s.dash is not None else DASHES[i % len(DASHES)]
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(sx, sy))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{extra} points="{pts}"/>')
        ly = mt + 14 + 16 * i
        out.append(
            f'<line x1="{ml + pw - 150}" y1="{ly}" x2="{ml + pw - 125}" y2="{ly}" stroke="{color}"'
            f' stroke-width="1.5"{extra}/>'
        )
        out.append(f'<text x="{ml + pw - 120}" y="{ly + 4}" font-size="11">{escape(s.label)}</text>')
    out.append(f'<text x="{W / 2:.1f}" y="20" font-size="14" text-anchor="middle">{escape(fig.title)}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{H - 10}" font-size="12" text-anchor="middle">{escape(fig.xlabel)}</text>')
    out.append(
        f'<text x="16" y="{mt + ph / 2:.1f}" font-size="12" text-anchor="middle"'
        f' transform="rotate(-90 16 {mt + ph / 2:.1f})">{escape(fig.ylabel)}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
