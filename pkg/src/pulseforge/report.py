"""Artifact writers: CSV/JSON metric tables and SVG fidelity histograms.

All writers are pure functions of their inputs, so reruns with equal inputs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from xml.sax.saxutils import escape

import numpy as np

from pulseforge import __version__
from pulseforge.metrics import CSV_COLUMNS, FidelityHistogram, MetricReport, haar_pdf


def provenance(seed: int, device_digest: str, **extra) -> dict:
    meta = {"tool": "pulseforge", "version": __version__, "seed": seed, "device_digest": device_digest}
    meta.update(extra)
    return meta


def provenance_line(meta: dict) -> str:
    """``# key=value ...`` comment placed above CSV headers."""
    return "# " + " ".join(f"{k}={meta[k]}" for k in sorted(meta)) + "\n"


def reports_csv(reports: list[MetricReport], meta: dict) -> str:
    buf = io.StringIO()
    buf.write(provenance_line(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def _json_ready(value):
    if isinstance(value, float):
        return None if not np.isfinite(value) else round(value, 12)
    if isinstance(value, dict):
        return {k: _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, np.generic):
        return _json_ready(value.item())
    return value


def to_json(payload: dict) -> str:
    return json.dumps(_json_ready(payload), indent=2, sort_keys=True) + "\n"


def reports_json(reports: list[MetricReport], meta: dict) -> str:
    return to_json({"meta": meta, "reports": [r.to_dict() for r in reports]})


def rows_csv(header: list[str], rows, meta: dict, fmt: str = "{:.12f}") -> str:
    buf = io.StringIO()
    buf.write(provenance_line(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt.format(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def histogram_svg(hist: FidelityHistogram, title: str, meta: dict, width: int = 480, height: int = 300) -> str:
    """Bar chart of the sampled fidelity density with the Haar density curve on top."""
    left, right, top, bottom = 50, 10, 30, 35
    pw, ph = width - left - right, height - top - bottom
    bin_width = hist.edges[1] - hist.edges[0]
    density = hist.frequencies / bin_width
    xs = np.linspace(0.0, 1.0, 201)
    haar = np.array([haar_pdf(x, hist.dim) for x in xs])
    ymax = float(max(density.max(initial=0.0), haar.max(), 1e-12)) * 1.05

    def sx(x):
        return left + pw * x

    def sy(y):
        return top + ph * (1.0 - min(y, ymax) / ymax)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<!-- {escape(provenance_line(meta)[2:].strip())} -->",
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for a, d in zip(hist.edges[:-1], density):
        if d <= 0:
            continue
        x0, x1 = sx(a), sx(a + bin_width)
        y = sy(d)
        out.append(
            f'<rect x="{x0:.2f}" y="{y:.2f}" width="{x1 - x0:.2f}" height="{top + ph - y:.2f}" '
            'fill="#7fa7d9" stroke="#3d6a9e" stroke-width="0.5"/>'
        )
    points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, haar))
    out.append(f'<polyline points="{points}" fill="none" stroke="#c0392b" stroke-width="1.5"/>')
    out.append(
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>'
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>'
    )
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        out.append(
            f'<text x="{sx(t):.2f}" y="{top + ph + 15}" font-size="10" text-anchor="middle">{t:g}</text>'
        )
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 5}" font-size="11" text-anchor="middle">fidelity</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="18" font-size="12" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{left - 5}" y="{top + 10}" font-size="10" text-anchor="end">{ymax:.2f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
