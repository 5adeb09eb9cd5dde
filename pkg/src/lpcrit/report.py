"""Deterministic JSON, CSV and SVG output for certificates and reports."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

SCHEMA_VERSION = 1
CSV_COLUMNS = ("layer", "partial_mass_lower", "partial_sine_upper", "partial_shift_upper")
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _plain(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return _plain(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def to_json(payload: Mapping, command: str) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "command": command, **payload}
    return json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n"


def to_csv(curves: Mapping[str, Sequence[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in zip(*(curves[c] for c in CSV_COLUMNS)):
        w.writerow([int(row[0]), *(repr(float(v)) for v in row[1:])])
    return buf.getvalue()


def line_chart(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    title: str,
    xlabel: str,
    ylabel: str,
    hlines: Sequence[tuple[float, str]] = (),
    width: int = 640,
    height: int = 400,
) -> str:
    """A self-contained SVG line chart with linear axes."""
    left, right, top, bottom = 70, 20, 40, 50
    xs = np.concatenate([np.asarray(x, dtype=float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, dtype=float) for _, y in series.values()] + [[v for v, _ in hlines]])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = min(0.0, float(ys.min())), float(ys.max())
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 * 1.05 if y1 > y0 else y0 + 1
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{px(xv):.1f}" y="{top + ph + 16}" text-anchor="middle">{xv:.4g}</text>')
        out.append(f'<text x="{left - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.4g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">{_esc(ylabel)}</text>'
    )
    for v, label in hlines:
        out.append(
            f'<line x1="{left}" y1="{py(v):.2f}" x2="{left + pw}" y2="{py(v):.2f}" '
            'stroke="gray" stroke-dasharray="4 3"/>'
        )
        out.append(f'<text x="{left + pw - 4}" y="{py(v) - 4:.2f}" text-anchor="end" fill="gray">{_esc(label)}</text>')
    for i, (label, (x, y)) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{left + 10}" y="{top + 14 + 16 * i}" fill="{color}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def report_svgs(curves: Mapping[str, np.ndarray], thresholds: Sequence[float], kind: str) -> dict[str, str]:
    layer = curves["layer"]
    mass = line_chart(
        {"certified lower bound of partial p-mass": (layer, curves["partial_mass_lower"])},
        f"{kind}: p-mass by layer (lower bounds)",
        "layer",
        "partial sum",
        hlines=[(m, f"M = {m:g}") for m in thresholds],
    )
    bounded = line_chart(
        {
            "partial sine mass (upper)": (layer, curves["partial_sine_upper"]),
            "partial shift mass (upper)": (layer, curves["partial_shift_upper"]),
        },
        f"{kind}: sine and shift sums by layer",
        "layer",
        "partial sum",
    )
    return {"mass.svg": mass, "sine_shift.svg": bounded}


def write_outputs(out_dir: str | Path, files: Mapping[str, str]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in sorted(files.items()):
        path = out / name
        path.write_text(text, encoding="utf-8")
        paths.append(path)
    return paths
