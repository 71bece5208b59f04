"""Soft-margin SVM trained by SMO with second-order working-set selection,
plus Platt scaling for probabilities.
"""
from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ConfigError, DataError

TAU = 1e-12


@dataclass(frozen=True)
class SVMParams:
    kernel: str = "rbf"
    C: float = 1.0
    gamma: float | None = None        # rbf only; None -> 1 / n_features
    tolerance: float = 1e-3
    max_iterations: int = 100_000

    def __post_init__(self):
        if self.kernel not in ("linear", "rbf"):
            raise ConfigError(f"kernel must be 'linear' or 'rbf', got {self.kernel!r}")
        if not self.C > 0:
            raise ConfigError("C must be > 0")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be > 0")
        if self.gamma is not None and not self.gamma > 0:
            raise ConfigError("gamma must be > 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def config_id(self) -> str:
        g = "auto" if self.gamma is None else repr(self.gamma)
        return f"svm-{self.kernel}-C{self.C!r}" + (f"-g{g}" if self.kernel == "rbf" else "")


def kernel_matrix(A: np.ndarray, B: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
    if kernel == "linear":
        return A @ B.T
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * (A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


@dataclass(eq=False)
class SVMModel:
    params: SVMParams
    feature_names: tuple[str, ...]
    support_vectors: np.ndarray       # standardized coordinates
    dual_coef: np.ndarray             # alpha_i * y_i
    bias: float
    gamma: float
    column_mean: np.ndarray
    column_scale: np.ndarray
    platt_a: float
    platt_b: float
    converged: bool
    iterations: int
    train_fingerprint: str = ""
    objective_trace: list = field(default_factory=list, repr=False)
    extra: dict = field(default_factory=dict)

    kind = "svm"

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def _prep(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise DataError(f"model expects {self.n_features} features, got {X.shape[1]}")
        X = np.where(np.isfinite(X), X, 0.0)
        return (X - self.column_mean) / self.column_scale

    def decision_function(self, X) -> np.ndarray:
        Z = self._prep(X)
        if self.support_vectors.shape[0] == 0:
            return np.full(Z.shape[0], self.bias)
        K = kernel_matrix(Z, self.support_vectors, self.params.kernel, self.gamma)
        return K @ self.dual_coef + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return platt_apply(self.decision_function(X), self.platt_a, self.platt_b)


def platt_apply(f: np.ndarray, a: float, b: float) -> np.ndarray:
    z = a * f + b
    # numerically stable logistic of -z
    out = np.empty_like(z)
    pos = z >= 0
    ez = np.exp(-z[pos])
    out[pos] = ez / (1.0 + ez)
    out[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
    return out


def platt_fit(f: np.ndarray, y: np.ndarray, max_iter: int = 100) -> tuple[float, float]:
    """Newton fit of P(y=1|f) = 1 / (1 + exp(A f + B)) with Platt's smoothed targets."""
    f = np.asarray(f, dtype=np.float64)
    n_pos = int((y == 1).sum())
    n_neg = y.size - n_pos
    t = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))
    a, b = 0.0, np.log((n_neg + 1.0) / (n_pos + 1.0))

    def nll(a_, b_):
        z = a_ * f + b_
        return float(np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-z)), (t - 1) * z + np.log1p(np.exp(z)))))

    cur = nll(a, b)
    for _ in range(max_iter):
        p = platt_apply(f, a, b)
        d1 = t - p                      # dL/dz
        d2 = p * (1 - p)
        g = np.array([f @ d1, d1.sum()])
        H = np.array([[f @ (d2 * f), (d2 * f).sum()], [(d2 * f).sum(), d2.sum()]]) + 1e-12 * np.eye(2)
        if np.abs(g).max() < 1e-5:
            break
        step = np.linalg.solve(H, -g)
        s = 1.0
        while s >= 1e-10:
            na, nb = a + s * step[0], b + s * step[1]
            new = nll(na, nb)
            if new < cur + 1e-4 * s * (g @ step):
                a, b, cur = na, nb, new
                break
            s /= 2
        else:
            break
    return float(a), float(b)


def smo(K: np.ndarray, y: np.ndarray, C: float, tol: float, max_iter: int):
    """Solve the SVM dual with libsvm-style pairwise updates.

    Returns (alpha, rho, converged, iterations, objective_trace); the decision
    function is sum_i alpha_i y_i K(x_i, x) - rho.
    """
    n = y.size
    yf = y.astype(np.float64)
    alpha = np.zeros(n)
    G = -np.ones(n)                    # gradient of 1/2 a'Qa - e'a, Q = yy'K
    QD = np.diag(K).copy()
    trace = [0.0]
    converged = False
    it = 0
    while it < max_iter:
        up = ((yf > 0) & (alpha < C)) | ((yf < 0) & (alpha > 0))
        low = ((yf > 0) & (alpha > 0)) | ((yf < 0) & (alpha < C))
        score = -yf * G
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        gmax = score[i]
        gmin = score[low].min()
        if gmax - gmin < tol:
            converged = True
            break
        cand = low & (score < gmax)
        b = gmax - score[cand]
        a = QD[i] + QD[cand] - 2.0 * K[i, cand]
        a = np.where(a > 0, a, TAU)
        j = int(np.flatnonzero(cand)[np.argmin(-(b * b) / a)])

        Qij = yf[i] * yf[j] * K[i, j]
        ai, aj = alpha[i], alpha[j]
        if yf[i] != yf[j]:
            quad = QD[i] + QD[j] + 2.0 * Qij
            quad = quad if quad > 0 else TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = QD[i] + QD[j] - 2.0 * Qij
            quad = quad if quad > 0 else TAU
            delta = (G[i] - G[j]) / quad
            s = ai + aj
            ni, nj = ai - delta, aj + delta
            if s > C:
                if ni > C:
                    ni, nj = C, s - C
            elif nj < 0:
                nj, ni = 0.0, s
            if s > C:
                if nj > C:
                    nj, ni = C, s - C
            elif ni < 0:
                ni, nj = 0.0, s
        dai, daj = ni - ai, nj - aj
        alpha[i], alpha[j] = ni, nj
        G += yf * (K[:, i] * (yf[i] * dai) + K[:, j] * (yf[j] * daj))
        it += 1
        trace.append(-0.5 * float(alpha @ (G - 1.0)))

    free = (alpha > 0) & (alpha < C)
    yG = yf * G
    if free.any():
        rho = float(yG[free].mean())
    else:
        ub = np.inf
        lb = -np.inf
        at_up = ((yf > 0) & (alpha >= C)) | ((yf < 0) & (alpha <= 0))
        at_low = ((yf > 0) & (alpha <= 0)) | ((yf < 0) & (alpha >= C))
        if at_up.any():
            lb = yG[at_up].max()
        if at_low.any():
            ub = yG[at_low].min()
        rho = float((ub + lb) / 2) if np.isfinite(ub) and np.isfinite(lb) else float(ub if np.isfinite(ub) else lb)
    return alpha, rho, converged, it, trace


def train_svm(X, y, params: SVMParams = SVMParams(), feature_names=None) -> SVMModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("cannot train an SVM on an empty design matrix")
    if set(np.unique(y)) != {0, 1}:
        raise DataError("SVM training needs both classes")
    if not np.all(np.isfinite(X)):
        raise DataError("design matrix has non-finite values; impute before training")
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    Z = (X - mean) / scale
    gamma = params.gamma if params.gamma is not None else 1.0 / X.shape[1]
    K = kernel_matrix(Z, Z, params.kernel, gamma)
    ys = np.where(y == 1, 1.0, -1.0)
    alpha, rho, converged, iters, trace = smo(K, ys, params.C, params.tolerance, params.max_iterations)
    sv = alpha > 0
    dec = K[:, sv] @ (alpha[sv] * ys[sv]) - rho
    a, b = platt_fit(dec, y)
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{i}" for i in range(X.shape[1]))
    h = hashlib.sha256(np.ascontiguousarray(X, "<f8").tobytes() + np.ascontiguousarray(y, "<i8").tobytes())
    return SVMModel(params, names, Z[sv], alpha[sv] * ys[sv], -rho, gamma, mean, scale, a, b,
                    converged, iters, h.hexdigest(), trace)
