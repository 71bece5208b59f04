"""Compiled exhaustive split search for tree growth."""
import numpy as np
from numba import njit


@njit(cache=True)
def best_split(X, idx, feats, yw, w, min_leaf):
    """Lowest weighted child Gini over every threshold of the columns ``feats``.

    ``feats`` must be ascending; ties resolve to the first column, then the
    lowest threshold. Returns (position in feats, threshold, impurity), with
    position -1 when no admissible split exists.
    """
    n = idx.shape[0]
    vals = np.empty(n)
    ws = np.empty(n)
    ps = np.empty(n)
    best = np.inf
    best_col = -1
    best_thr = 0.0
    for c in range(feats.shape[0]):
        f = feats[c]
        for r in range(n):
            vals[r] = X[idx[r], f]
        order = np.argsort(vals, kind="mergesort")
        cw = 0.0
        cp = 0.0
        for r in range(n):
            o = order[r]
            cw += w[idx[o]]
            cp += yw[idx[o]]
            ws[r] = cw
            ps[r] = cp
        W = ws[n - 1]
        P = ps[n - 1]
        for i in range(min_leaf - 1, n - min_leaf):
            a = vals[order[i]]
            b = vals[order[i + 1]]
            if not a < b:
                continue
            wl = ws[i]
            pl = ps[i]
            wr = W - wl
            pr = P - pl
            # n * Gini * weight per side: 2 p (w - p) / w
            imp = (2.0 * pl * (wl - pl) / wl + 2.0 * pr * (wr - pr) / wr) / W
            if imp < best:
                best = imp
                best_col = c
                thr = 0.5 * (a + b)
                if not (a <= thr and thr < b):
                    thr = a
                best_thr = thr
    return best_col, best_thr, best
