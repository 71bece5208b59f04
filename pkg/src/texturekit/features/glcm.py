"""Grey-level co-occurrence matrices and Haralick's 14 texture statistics.

Grey levels are indexed 1..N_g in the formulas (this matters for the sum
average f6 and its dependants). Entropies use log base 2 with 0*log(0) = 0.
"""
from __future__ import annotations

import numpy as np

from ..errors import UnusablePatchError

DIRECTIONS = (0, 45, 90, 135)
N_HARALICK = 14

# (row, col) step for a unit distance; rows grow downwards
_STEP = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}


def quantize(grid, levels: int) -> np.ndarray:
    """Uniform bins over the grid's own [min, max]; a constant grid maps to bin 0."""
    g = np.asarray(grid, dtype=np.float64)
    lo, hi = g.min(), g.max()
    if hi == lo:
        return np.zeros(g.shape, dtype=np.intp)
    q = np.floor((g - lo) / (hi - lo) * levels).astype(np.intp)
    return np.clip(q, 0, levels - 1)


def glcm_from_quantized(q: np.ndarray, levels: int, distance: int, direction: int) -> np.ndarray:
    if direction not in _STEP:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction}")
    dr, dc = (s * distance for s in _STEP[direction])
    h, w = q.shape
    r0, r1 = max(0, -dr), h - max(0, dr)
    c0, c1 = max(0, -dc), w - max(0, dc)
    if r1 <= r0 or c1 <= c0:
        raise UnusablePatchError(
            f"{h}x{w} grid has no pixel pair at distance {distance}, direction {direction}")
    a = q[r0:r1, c0:c1].ravel()
    b = q[r0 + dr:r1 + dr, c0 + dc:c1 + dc].ravel()
    counts = np.bincount(a * levels + b, minlength=levels * levels).reshape(levels, levels)
    counts = counts + counts.T
    return counts / counts.sum()


def compute_glcm(grid, levels: int = 32, distance: int = 1, direction: int = 0) -> np.ndarray:
    if levels < 2:
        raise ValueError("levels must be >= 2")
    return glcm_from_quantized(quantize(grid, levels), levels, distance, direction)


def _entropy(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def haralick_single(p: np.ndarray) -> np.ndarray:
    """f1..f14 for one normalized GLCM; undefined entries come back as NaN."""
    p = np.asarray(p, dtype=np.float64)
    ng = p.shape[0]
    i = np.arange(1, ng + 1, dtype=np.float64)
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mux, muy = i @ px, i @ py
    sdx = np.sqrt(((i - mux) ** 2) @ px)
    sdy = np.sqrt(((i - muy) ** 2) @ py)

    ii, jj = np.meshgrid(i, i, indexing="ij")
    diff = np.abs(ii - jj).astype(np.intp)
    summ = (ii + jj).astype(np.intp)
    p_sum = np.bincount(summ.ravel(), weights=p.ravel(), minlength=2 * ng + 1)  # index k = i + j
    p_diff = np.bincount(diff.ravel(), weights=p.ravel(), minlength=ng)
    k = np.arange(p_sum.size, dtype=np.float64)
    n = np.arange(ng, dtype=np.float64)

    f = np.full(N_HARALICK, np.nan)
    f[0] = (p * p).sum()
    f[1] = (n * n) @ p_diff
    if sdx * sdy > 0:
        f[2] = ((ii * jj * p).sum() - mux * muy) / (sdx * sdy)
    f[3] = (((ii - mux) ** 2) * p).sum()
    f[4] = (p / (1.0 + (ii - jj) ** 2)).sum()
    f[5] = k @ p_sum
    f[6] = ((k - f[5]) ** 2) @ p_sum
    f[7] = _entropy(p_sum)
    hxy = _entropy(p)
    f[8] = hxy
    mud = n @ p_diff
    f[9] = ((n - mud) ** 2) @ p_diff
    f[10] = _entropy(p_diff)

    hx, hy = _entropy(px), _entropy(py)
    outer = np.outer(px, py)
    mask = p > 0
    hxy1 = float(-(p[mask] * np.log2(outer[mask])).sum())
    hxy2 = _entropy(outer)
    if max(hx, hy) > 0:
        f[11] = (hxy - hxy1) / max(hx, hy)
    # 2**(-2 dH) with dH in bits equals exp(-2 dH) with dH in nats
    f[12] = np.sqrt(max(0.0, 1.0 - 2.0 ** (-2.0 * (hxy2 - hxy))))
    f[13] = max_correlation_coefficient(p)
    return f


# indirection so tests can simulate a failing eigensolver
_eigvalsh = np.linalg.eigvalsh


def max_correlation_coefficient(p: np.ndarray) -> float:
    """sqrt of the second-largest eigenvalue of Q(i,j) = sum_k p(i,k) p(j,k) / (px(i) py(k)).

    For a symmetric GLCM, Q is similar to A A^T with A = D^-1/2 P D^-1/2, which
    is symmetric positive semi-definite, so a symmetric eigensolver suffices.
    """
    px = p.sum(axis=1)
    occ = px > 0
    if occ.sum() < 2:
        return np.nan
    sub = p[np.ix_(occ, occ)]
    s = 1.0 / np.sqrt(px[occ])
    a = sub * s[:, None] * s[None, :]
    try:
        ev = _eigvalsh(a @ a.T)
    except np.linalg.LinAlgError:
        return np.nan
    if not np.all(np.isfinite(ev)):
        return np.nan
    return float(np.sqrt(max(0.0, np.sort(ev)[-2])))


def haralick_features(glcms) -> np.ndarray:
    """Direction-averaged f1..f14; a feature is NaN only if undefined in every direction."""
    per_dir = np.array([haralick_single(p) for p in glcms])
    valid = np.isfinite(per_dir)
    cnt = valid.sum(axis=0)
    tot = np.where(valid, per_dir, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(cnt > 0, tot / np.maximum(cnt, 1), np.nan)


def glcm_set(grid, levels: int = 32, distance: int = 1) -> list[np.ndarray]:
    q = quantize(grid, levels)
    return [glcm_from_quantized(q, levels, distance, d) for d in DIRECTIONS]
