"""Path-dependent TreeSHAP (polynomial-time path-weight algorithm), compiled with numba.

The forest is packed into flat arrays; ``offsets[t]`` is tree t's root. Node
children indices are tree-local.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _extend(pd, pz, po, pw, ud, zero, one, feat):
    pd[ud] = feat
    pz[ud] = zero
    po[ud] = one
    pw[ud] = 1.0 if ud == 0 else 0.0
    for i in range(ud - 1, -1, -1):
        pw[i + 1] += one * pw[i] * (i + 1) / (ud + 1)
        pw[i] = zero * pw[i] * (ud - i) / (ud + 1)


@njit(cache=True)
def _unwind(pd, pz, po, pw, ud, k):
    one = po[k]
    zero = pz[k]
    nxt = pw[ud]
    for i in range(ud - 1, -1, -1):
        if one != 0.0:
            tmp = pw[i]
            pw[i] = nxt * (ud + 1) / ((i + 1) * one)
            nxt = tmp - pw[i] * zero * (ud - i) / (ud + 1)
        else:
            pw[i] = pw[i] * (ud + 1) / (zero * (ud - i))
    for i in range(k, ud):
        pd[i] = pd[i + 1]
        pz[i] = pz[i + 1]
        po[i] = po[i + 1]


@njit(cache=True)
def _unwound_sum(pz, po, pw, ud, k):
    one = po[k]
    zero = pz[k]
    nxt = pw[ud]
    total = 0.0
    for i in range(ud - 1, -1, -1):
        if one != 0.0:
            tmp = nxt * (ud + 1) / ((i + 1) * one)
            total += tmp
            nxt = pw[i] - tmp * zero * (ud - i) / (ud + 1)
        else:
            total += (pw[i] / zero) / ((ud - i) / (ud + 1))
    return total


@njit(cache=True)
def _tree_shap(base, depth, x, feature, threshold, left, right, value, cover, phi):
    """Depth-first walk with an explicit stack (numba cannot safely cache recursion).

    Row ``L`` of the path buffers holds the path at the node currently open at
    depth ``L``, after removing that node's feature if it was already on the
    path; its children copy from that row.
    """
    D = depth + 2
    pd = np.empty((D, D + 1), np.int64)
    pz = np.empty((D, D + 1))
    po = np.empty((D, D + 1))
    pw = np.empty((D, D + 1))
    ud_at = np.empty(D, np.int64)
    S = 2 * D + 2
    s_node = np.empty(S, np.int64)
    s_level = np.empty(S, np.int64)
    s_zero = np.empty(S)
    s_one = np.empty(S)
    s_feat = np.empty(S, np.int64)
    sp = 0
    s_node[0] = 0
    s_level[0] = 0
    s_zero[0] = 1.0
    s_one[0] = 1.0
    s_feat[0] = -1
    sp = 1
    while sp > 0:
        sp -= 1
        node = s_node[sp]
        L = s_level[sp]
        ud = 0
        if L > 0:
            ud = ud_at[L - 1] + 1
            for i in range(ud):
                pd[L, i] = pd[L - 1, i]
                pz[L, i] = pz[L - 1, i]
                po[L, i] = po[L - 1, i]
                pw[L, i] = pw[L - 1, i]
        _extend(pd[L], pz[L], po[L], pw[L], ud, s_zero[sp], s_one[sp], s_feat[sp])

        g = base + node
        f = feature[g]
        if f < 0:
            for i in range(1, ud + 1):
                w = _unwound_sum(pz[L], po[L], pw[L], ud, i)
                phi[pd[L, i]] += w * (po[L, i] - pz[L, i]) * value[g]
            continue
        if x[f] <= threshold[g]:
            hot = left[g]
            cold = right[g]
        else:
            hot = right[g]
            cold = left[g]
        w = cover[g]
        hot_zero = cover[base + hot] / w
        cold_zero = cover[base + cold] / w
        in_zero = 1.0
        in_one = 1.0
        k = 1
        while k <= ud:
            if pd[L, k] == f:
                break
            k += 1
        if k <= ud:
            in_zero = pz[L, k]
            in_one = po[L, k]
            _unwind(pd[L], pz[L], po[L], pw[L], ud, k)
            ud -= 1
        ud_at[L] = ud
        # cold first so the hot branch is walked first
        s_node[sp] = cold
        s_level[sp] = L + 1
        s_zero[sp] = cold_zero * in_zero
        s_one[sp] = 0.0
        s_feat[sp] = f
        sp += 1
        s_node[sp] = hot
        s_level[sp] = L + 1
        s_zero[sp] = hot_zero * in_zero
        s_one[sp] = in_one
        s_feat[sp] = f
        sp += 1


@njit(cache=True)
def forest_shap(X, offsets, depths, feature, threshold, left, right, value, cover, n_features):
    """(n_samples, n_features) Shapley values of the forest's mean output."""
    n = X.shape[0]
    n_trees = offsets.shape[0]
    out = np.zeros((n, n_features))
    for s in range(n):
        phi = np.zeros(n_features)
        for t in range(n_trees):
            _tree_shap(offsets[t], depths[t], X[s], feature, threshold, left, right, value, cover, phi)
        for j in range(n_features):
            out[s, j] = phi[j] / n_trees
    return out
