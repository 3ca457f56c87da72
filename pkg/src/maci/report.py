"""CSV and SVG output for curve tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from html import escape
from pathlib import Path

import numpy as np

from .exact import CurveTable


def fmt(x) -> str:
    """Ten significant digits, the precision of every number we write."""
    return f"{float(x):.10g}"


@dataclass
class OutputBundle:
    csv_path: Path
    svg_path: Path | None = None
    metadata: dict = field(default_factory=dict)


def write_csv(path, columns: dict, metadata: dict) -> None:
    """Write ``#``-prefixed ``key=value`` lines, a header row, then the columns."""
    names = list(columns)
    cols = [np.asarray(columns[k], dtype=float) for k in names]
    lengths = {c.size for c in cols}
    if len(lengths) != 1:
        raise ValueError("columns must have equal length")
    lines = [f"# {k}={v}" for k, v in metadata.items()]
    lines.append(",".join(names))
    lines += [",".join(fmt(c[i]) for c in cols) for i in range(cols[0].size)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path):
    """Inverse of :func:`write_csv`: returns ``(metadata, columns)``."""
    metadata, header, rows = {}, None, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            metadata[key] = value
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append([float(v) for v in line.split(",")])
    data = np.array(rows).reshape(-1, len(header))
    return metadata, {name: data[:, i] for i, name in enumerate(header)}


def curve_columns(table: CurveTable) -> dict:
    cols = {"gamma": table.gammas}
    if all(row.cp is not None for row in table.rows):
        cols["cp"] = table.cp
    if all(row.sel is not None for row in table.rows):
        cols["sel"] = table.sel
    return cols


# ---------------------------------------------------------------------------
# svg
# ---------------------------------------------------------------------------

_COLOURS = ("#1f4e9c", "#c0392b", "#27804b", "#8e44ad")
_W, _PANEL_H = 640, 300
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 20, 36, 46


def _nice_ticks(lo, hi, count=5):
    span = hi - lo
    raw = span / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=raw)
    ticks = np.arange(np.ceil(lo / step) * step, hi + 0.5 * step, step)
    eps = 1e-9 * span
    return ticks[(ticks >= lo - eps) & (ticks <= hi + eps)]


def _panel(x, series, ylabel, title, ref, y0):
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for _, y in series]
    ymin = min(np.nanmin(y) for y in ys)
    ymax = max(np.nanmax(y) for y in ys)
    if ref is not None:
        ymin, ymax = min(ymin, ref), max(ymax, ref)
    pad = 0.08 * (ymax - ymin) if ymax > ymin else 0.01
    ymin, ymax = ymin - pad, ymax + pad
    xmin, xmax = float(x.min()), float(x.max())
    if xmax == xmin:
        xmax = xmin + 1.0
    pw, ph = _W - _LEFT - _RIGHT, _PANEL_H - _TOP - _BOTTOM

    def sx(v):
        return _LEFT + (v - xmin) / (xmax - xmin) * pw

    def sy(v):
        return y0 + _TOP + (ymax - v) / (ymax - ymin) * ph

    out = [f'<text x="{_W / 2}" y="{y0 + 22}" text-anchor="middle" font-size="14">{escape(title)}</text>'] if title else []
    out += [f'<rect x="{_LEFT}" y="{y0 + _TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>']
    for tx in _nice_ticks(xmin, xmax):
        out.append(f'<line x1="{sx(tx):.2f}" y1="{y0 + _TOP + ph}" x2="{sx(tx):.2f}" y2="{y0 + _TOP + ph + 5}" stroke="#333"/>')
        out.append(f'<text x="{sx(tx):.2f}" y="{y0 + _TOP + ph + 18}" text-anchor="middle" font-size="11">{tx:g}</text>')
    for ty in _nice_ticks(ymin, ymax):
        out.append(f'<line x1="{_LEFT - 5}" y1="{sy(ty):.2f}" x2="{_LEFT}" y2="{sy(ty):.2f}" stroke="#333"/>')
        out.append(f'<text x="{_LEFT - 8}" y="{sy(ty) + 4:.2f}" text-anchor="end" font-size="11">{ty:.4g}</text>')
    out.append(f'<text x="{_W / 2}" y="{y0 + _PANEL_H - 8}" text-anchor="middle" font-size="12">|&#947;|</text>')
    out.append(f'<text x="16" y="{y0 + _TOP + ph / 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {y0 + _TOP + ph / 2})">{escape(ylabel)}</text>')
    if ref is not None:
        out.append(f'<line x1="{_LEFT}" y1="{sy(ref):.2f}" x2="{_LEFT + pw}" y2="{sy(ref):.2f}" '
                   f'stroke="#888" stroke-dasharray="5,4"/>')
    for i, ((label, _), y) in enumerate(zip(series, ys)):
        colour = _COLOURS[i % len(_COLOURS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y) if np.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.6" points="{pts}"/>')
        if label:
            ly = y0 + _TOP + 16 + 16 * i
            out.append(f'<line x1="{_W - _RIGHT - 150}" y1="{ly - 4}" x2="{_W - _RIGHT - 126}" y2="{ly - 4}" '
                       f'stroke="{colour}" stroke-width="1.6"/>')
            out.append(f'<text x="{_W - _RIGHT - 120}" y="{ly}" font-size="11">{escape(label)}</text>')
    return out


def svg_panels(x, panels) -> str:
    """Stacked line-plot panels sharing the |gamma| axis.

    ``panels`` is a list of dicts with keys ``series`` (list of
    ``(label, y)``), ``ylabel``, ``title`` and optional ``ref`` (a value
    drawn as a dashed horizontal rule).
    """
    height = _PANEL_H * len(panels)
    body = []
    for i, panel in enumerate(panels):
        body += _panel(x, panel["series"], panel["ylabel"], panel.get("title", ""),
                       panel.get("ref"), i * _PANEL_H)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{height}" '
            f'viewBox="0 0 {_W} {height}" font-family="sans-serif">\n'
            + "\n".join(body) + "\n</svg>\n")


def curve_svg(table: CurveTable, nominal: float, title: str) -> str:
    panels = []
    if all(row.cp is not None for row in table.rows):
        panels.append({"series": [("", table.cp)], "ylabel": "coverage probability",
                       "title": title, "ref": nominal})
    if all(row.sel is not None for row in table.rows):
        panels.append({"series": [("", table.sel)], "ylabel": "scaled expected length",
                       "title": title if not panels else "", "ref": 1.0})
    return svg_panels(table.gammas, panels)
