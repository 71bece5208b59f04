"""Standalone SVG figures: correlation heatmap, Shapley strip plots, metric scatter."""
from __future__ import annotations

import datetime as _dt
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np


def _colour(t: float) -> str:
    """Blue (0) -> white (0.5) -> red (1)."""
    t = float(np.clip(t, 0.0, 1.0))
    if t < 0.5:
        a = t / 0.5
        r, g, b = 59 + a * (255 - 59), 76 + a * (255 - 76), 192 + a * (255 - 192)
    else:
        a = (t - 0.5) / 0.5
        r, g, b = 255 - a * (255 - 180), 255 - a * (255 - 4), 255 - a * (255 - 38)
    return f"#{int(round(r)):02x}{int(round(g)):02x}{int(round(b)):02x}"


def _doc(width: int, height: int, body: list[str], timestamp: bool) -> str:
    head = ['<?xml version="1.0" encoding="UTF-8"?>']
    if timestamp:
        head.append(f"<!-- generated {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')} -->")
    head.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
                f'viewBox="0 0 {width} {height}" font-family="sans-serif">')
    head.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    return "\n".join(head + body + ["</svg>", ""])


def correlation_heatmap(names: Sequence[str], r: np.ndarray, path, cell: int = 6,
                        timestamp: bool = True) -> Path:
    n = len(names)
    label_w = 130
    w = h = label_w + n * cell + 20
    body = []
    for i in range(n):
        for j in range(n):
            v = r[i, j]
            fill = "#ffffff" if not np.isfinite(v) else _colour((v + 1) / 2)
            body.append(f'<rect x="{label_w + j * cell}" y="{label_w + i * cell}" width="{cell}" '
                        f'height="{cell}" fill="{fill}"/>')
    if cell >= 5:
        fs = max(4, cell - 1)
        for i, name in enumerate(names):
            body.append(f'<text x="{label_w - 2}" y="{label_w + i * cell + cell - 1}" font-size="{fs}" '
                        f'text-anchor="end">{escape(name)}</text>')
    body.append('<text x="10" y="16" font-size="12">Pearson r (blue -1, white 0, red +1)</text>')
    return _write(path, _doc(w, h, body, timestamp))


def shap_strips(features: Sequence[str], phis: Sequence[np.ndarray], values: Sequence[np.ndarray], path,
                timestamp: bool = True) -> Path:
    """One row per feature: phi on x, points coloured by feature-value percentile."""
    rows = len(features)
    label_w, plot_w, row_h = 170, 420, 18
    w, h = label_w + plot_w + 30, 50 + rows * row_h + 30
    allphi = np.concatenate([np.ravel(p) for p in phis]) if rows else np.zeros(1)
    lim = float(np.abs(allphi).max()) or 1.0
    x0 = label_w + plot_w / 2

    def px(v):
        return x0 + v / lim * (plot_w / 2 - 5)

    body = ['<text x="10" y="20" font-size="12">Shapley values (colour: feature value percentile)</text>',
            f'<line x1="{x0:.2f}" y1="35" x2="{x0:.2f}" y2="{40 + rows * row_h}" stroke="#888"/>']
    for k, (name, phi, val) in enumerate(zip(features, phis, values)):
        y = 45 + k * row_h
        body.append(f'<text x="{label_w - 6}" y="{y + 4}" font-size="10" text-anchor="end">{escape(name)}</text>')
        val = np.asarray(val, dtype=np.float64)
        ranks = np.argsort(np.argsort(val, kind="stable"), kind="stable")
        pct = ranks / max(1, val.size - 1)
        for p, q in zip(np.ravel(phi), pct):
            body.append(f'<circle cx="{px(p):.2f}" cy="{y}" r="2" fill="{_colour(q)}" fill-opacity="0.8"/>')
    yb = 45 + rows * row_h
    body.append(f'<text x="{label_w}" y="{yb + 10}" font-size="9">{-lim:.3g}</text>')
    body.append(f'<text x="{label_w + plot_w}" y="{yb + 10}" font-size="9" text-anchor="end">{lim:.3g}</text>')
    return _write(path, _doc(w, h, body, timestamp))


def metric_scatter(auc: Sequence[float], other: Sequence[float], clusters: Sequence[int | None], path,
                   ylabel: str = "accuracy", timestamp: bool = True) -> Path:
    palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]
    w, h, m = 420, 380, 50
    body = [f'<rect x="{m}" y="20" width="{w - m - 20}" height="{h - m - 20}" fill="none" stroke="#444"/>',
            f'<text x="{w / 2}" y="{h - 10}" font-size="11" text-anchor="middle">mean AUC</text>',
            f'<text x="14" y="{h / 2}" font-size="11" transform="rotate(-90 14 {h / 2})" '
            f'text-anchor="middle">{escape(ylabel)}</text>']
    for a, o, c in zip(auc, other, clusters):
        x = m + float(a) * (w - m - 20)
        y = 20 + (1 - float(o)) * (h - m - 20)
        col = "#333333" if c is None else palette[int(c) % len(palette)]
        body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{col}"/>')
    return _write(path, _doc(w, h, body, timestamp))


def _write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
