"""Rotation-invariant uniform local binary patterns and the VAR contrast measure."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import UnusablePatchError

# interpolated neighbour minus centre counts as ">= 0" above this
SIGN_EPS = 1e-12
DEFAULT_VAR_EDGES = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2)


@dataclass(frozen=True)
class LBPConfig:
    scales: tuple[tuple[int, float], ...] = ((8, 1.0), (16, 2.0))
    var_points: int = 8
    var_radius: float = 1.0
    var_bins: int = 7
    # inner bin edges for the VAR histogram; fit them on training data with fit_var_edges
    var_edges: tuple[float, ...] | None = field(default=None)

    @property
    def n_features(self) -> int:
        return sum(p + 2 for p, _ in self.scales) + self.var_bins

    @property
    def edges(self) -> np.ndarray:
        if self.var_edges is not None:
            e = np.asarray(self.var_edges, dtype=np.float64)
        else:
            e = np.asarray(DEFAULT_VAR_EDGES[: self.var_bins - 1], dtype=np.float64)
        if e.size != self.var_bins - 1:
            raise ValueError(f"need {self.var_bins - 1} VAR edges, got {e.size}")
        return e

    def with_edges(self, edges) -> "LBPConfig":
        return LBPConfig(self.scales, self.var_points, self.var_radius, self.var_bins,
                         tuple(float(v) for v in edges))


def _snap(v: float) -> float:
    r = round(v)
    return float(r) if abs(v - r) < 1e-12 else v


def neighbour_offsets(points: int, radius: float) -> np.ndarray:
    """(points, 2) array of (drow, dcol) on a circle, counter-clockwise from +col.

    When ``points`` is a multiple of 4 the other quadrants are exact copies of
    the first rotated by 90 degrees, so a 90-degree rotation of the image is an
    exact cyclic shift of the code bits.
    """
    if points % 4 == 0:
        q = points // 4
        first = [(_snap(-radius * math.sin(2 * math.pi * p / points)),
                  _snap(radius * math.cos(2 * math.pi * p / points))) for p in range(q)]
        out = list(first)
        cur = first
        for _ in range(3):
            cur = [(-dc, dr) for dr, dc in cur]
            out.extend(cur)
        return np.array(out, dtype=np.float64) + 0.0
    return np.array([(_snap(-radius * math.sin(2 * math.pi * p / points)),
                      _snap(radius * math.cos(2 * math.pi * p / points))) for p in range(points)])


def _margin(offsets: np.ndarray) -> tuple[int, int, int, int]:
    lo = np.floor(offsets).astype(int)
    hi = np.where(offsets - lo > 0, lo + 1, lo)
    return (-min(0, lo[:, 0].min()), max(0, hi[:, 0].max()),
            -min(0, lo[:, 1].min()), max(0, hi[:, 1].max()))


def neighbour_differences(grid, points: int, radius: float, margin=None) -> np.ndarray:
    """(points, H', W') interpolated neighbour minus centre for every interior pixel.

    ``margin`` (top, bottom, left, right) fixes the interior region; by default
    it is the smallest one that keeps every bilinear corner inside the grid.
    """
    g = np.asarray(grid, dtype=np.float64)
    offs = neighbour_offsets(points, radius)
    top, bottom, left, right = _margin(offs) if margin is None else margin
    h, w = g.shape
    hh, ww = h - top - bottom, w - left - right
    if hh <= 0 or ww <= 0:
        raise UnusablePatchError(f"{h}x{w} grid too small for LBP radius {radius}")
    centre = g[top:top + hh, left:left + ww]
    out = np.empty((points, hh, ww))
    for k, (dr, dc) in enumerate(offs):
        r0, c0 = math.floor(dr), math.floor(dc)
        fr, fc = dr - r0, dc - c0
        acc = np.zeros((hh, ww))
        for rr, cc, wgt in ((r0, c0, (1 - fr) * (1 - fc)), (r0, c0 + 1, (1 - fr) * fc),
                            (r0 + 1, c0, fr * (1 - fc)), (r0 + 1, c0 + 1, fr * fc)):
            if wgt == 0:
                continue
            nb = g[top + rr:top + rr + hh, left + cc:left + cc + ww]
            acc += wgt * (nb - centre)
        out[k] = acc
    return out


def riu2_codes(diffs: np.ndarray) -> np.ndarray:
    """Map neighbour differences to riu2 codes: #ones for uniform patterns, else P+1."""
    bits = (diffs >= -SIGN_EPS).astype(np.int64)
    p = bits.shape[0]
    transitions = (bits != np.roll(bits, 1, axis=0)).sum(axis=0)
    ones = bits.sum(axis=0)
    return np.where(transitions <= 2, ones, p + 1)


def riu2_histogram(grid, points: int, radius: float) -> np.ndarray:
    codes = riu2_codes(neighbour_differences(grid, points, radius))
    h = np.bincount(codes.ravel(), minlength=points + 2).astype(np.float64)
    return h / h.sum()


def local_variance(grid, points: int = 8, radius: float = 1.0) -> np.ndarray:
    """VAR_{P,R}: population variance of the P interpolated neighbours, per interior pixel."""
    d = neighbour_differences(grid, points, radius)
    return d.var(axis=0).ravel()


def var_histogram(values: np.ndarray, edges) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.float64)
    idx = np.searchsorted(edges, values, side="left")
    h = np.bincount(idx, minlength=edges.size + 1).astype(np.float64)
    return h / h.sum()


def fit_var_edges(var_samples, bins: int = 7) -> tuple[float, ...]:
    """Inner quantile edges of the pooled VAR values (training data only)."""
    pooled = np.concatenate([np.ravel(v) for v in var_samples])
    if pooled.size == 0:
        raise ValueError("no VAR values to fit edges on")
    qs = np.arange(1, bins) / bins
    return tuple(float(v) for v in np.quantile(pooled, qs))


def lbp_riu2_part(grid, config: LBPConfig = LBPConfig()) -> tuple[np.ndarray, np.ndarray]:
    """The riu2 histograms of every scale, concatenated, plus the raw VAR values."""
    g = np.asarray(grid, dtype=np.float64)
    if min(g.shape) < 7:
        raise UnusablePatchError(f"{g.shape[0]}x{g.shape[1]} grid too small for LBP (need 7x7)")
    hists = [riu2_histogram(g, p, r) for p, r in config.scales]
    return np.concatenate(hists), local_variance(g, config.var_points, config.var_radius)


def lbp_features(grid, config: LBPConfig = LBPConfig()) -> np.ndarray:
    riu2, var = lbp_riu2_part(grid, config)
    return np.concatenate([riu2, var_histogram(var, config.edges)])
