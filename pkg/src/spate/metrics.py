"""Encoding-quality diagnostics computed directly on probability embeddings.

All functions take ``P`` as an ``(N, D)`` matrix of embeddings (rows on the
simplex) and integer labels ``y``.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import UndefinedMetricError
from .numerics import EPS, RngStream

METRIC_NAMES = ("CKTA", "Fisher", "Inter/Intra", "Sil", "H_norm", "TVpair", "TVpair_norm")

DEFAULT_N_PAIRS = 200


def _prep(P, y=None, need_classes=True):
    P = np.asarray(P, dtype=float)
    if y is None:
        return P, None
    y = np.asarray(y)
    if len(y) != len(P):
        raise UndefinedMetricError("P and y have different lengths")
    if need_classes and len(np.unique(y)) < 2:
        raise UndefinedMetricError("metric needs at least two classes")
    return P, y


def distance_matrix(P) -> np.ndarray:
    return squareform(pdist(np.asarray(P, dtype=float)))


def median_gamma(P, D=None) -> float:
    """RBF width ``1 / (2 m^2)`` from the median off-diagonal distance ``m``."""
    P = np.asarray(P, dtype=float)
    if len(P) < 2:
        raise UndefinedMetricError("median heuristic needs at least two points")
    d = pdist(P) if D is None else D[np.triu_indices(len(P), 1)]
    m = float(np.median(d))
    if m < 1e-12:
        return 1.0
    return 1.0 / (2.0 * m * m + EPS)


def _center(M):
    return M - M.mean(axis=0, keepdims=True) - M.mean(axis=1, keepdims=True) + M.mean()


def alignment(K, Y) -> float:
    """Centred alignment of two kernel matrices."""
    Kc, Yc = _center(np.asarray(K, float)), _center(np.asarray(Y, float))
    return float(np.sum(Kc * Yc) / (np.linalg.norm(Kc) * np.linalg.norm(Yc) + EPS))


def ckta(P, y, D=None) -> float:
    P, y = _prep(P, y)
    D = distance_matrix(P) if D is None else D
    K = np.exp(-median_gamma(P, D) * D ** 2)
    Y = (y[:, None] == y[None, :]).astype(float)
    return alignment(K, Y)


def fisher(P, y) -> float:
    P, y = _prep(P, y)
    mu = P.mean(axis=0)
    s_b = s_w = 0.0
    for c in np.unique(y):
        rows = P[y == c]
        mc = rows.mean(axis=0)
        s_b += len(rows) * float(np.sum((mc - mu) ** 2))
        s_w += float(np.sum((rows - mc) ** 2))
    return s_b / (s_w + EPS)


def inter_intra(P, y, D=None) -> float:
    P, y = _prep(P, y)
    D = distance_matrix(P) if D is None else D
    iu = np.triu_indices(len(y), 1)
    d = D[iu]
    same = y[iu[0]] == y[iu[1]]
    if not same.any():
        raise UndefinedMetricError("no same-class pairs (every class is a singleton)")
    if same.all():
        raise UndefinedMetricError("no cross-class pairs")
    return float(d[~same].mean() / (d[same].mean() + EPS))


def silhouette_samples(P, y, D=None) -> np.ndarray:
    P, y = _prep(P, y)
    D = distance_matrix(P) if D is None else D
    classes = np.unique(y)
    onehot = (y[:, None] == classes[None, :]).astype(float)
    sizes = onehot.sum(axis=0)
    sums = D @ onehot  # distance from each point to every class, self-distance is 0
    own = np.searchsorted(classes, y)
    n_own = sizes[own]
    a = np.where(n_own > 1, sums[np.arange(len(y)), own] / np.maximum(n_own - 1, 1), 0.0)
    means = sums / sizes
    means[np.arange(len(y)), own] = np.inf
    b = means.min(axis=1)
    s = (b - a) / (np.maximum(a, b) + EPS)
    return np.where(n_own > 1, s, 0.0)


def silhouette(P, y, D=None) -> float:
    return float(silhouette_samples(P, y, D).mean())


def entropy_norm(p, n: int | None = None) -> float:
    """Base-2 Shannon entropy divided by the qubit count (rows are averaged if ``p`` is 2-D)."""
    p = np.asarray(p, dtype=float)
    if n is None:
        n = int(round(np.log2(p.shape[-1])))
    h = -np.sum(p * np.log2(p + EPS), axis=-1)
    return float(np.mean(h)) / n


def tv_distance(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p, float) - np.asarray(q, float))))


def sample_pairs(N: int, n_pairs: int, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Distinct unordered index pairs drawn without replacement (all pairs if fewer exist)."""
    iu = np.triu_indices(N, 1)
    total = len(iu[0])
    if n_pairs >= total:
        return iu
    pick = np.sort(rng.generator().choice(total, size=n_pairs, replace=False))
    return iu[0][pick], iu[1][pick]


def tvpair(P, n_pairs: int = DEFAULT_N_PAIRS, rng: RngStream | None = None,
           n: int | None = None) -> tuple[float, float]:
    """Mean total-variation distance over sampled pairs, and that mean divided by ``n``."""
    P = np.asarray(P, dtype=float)
    if len(P) < 2:
        raise UndefinedMetricError("TVpair needs at least two embeddings")
    rng = RngStream(0) if rng is None else rng
    if n is None:
        n = int(round(np.log2(P.shape[1])))
    i, j = sample_pairs(len(P), n_pairs, rng)
    tv = 0.5 * np.abs(P[i] - P[j]).sum(axis=1)
    mean = float(tv.mean())
    return mean, mean / n


def all_metrics(P, y, n_qubits: int, n_pairs: int = DEFAULT_N_PAIRS,
                rng: RngStream | None = None) -> dict[str, float]:
    """Every diagnostic for one embedding set, keyed by :data:`METRIC_NAMES`."""
    P, y = _prep(P, y)
    D = distance_matrix(P)
    tv, tv_norm = tvpair(P, n_pairs, rng, n_qubits)
    return {
        "CKTA": ckta(P, y, D),
        "Fisher": fisher(P, y),
        "Inter/Intra": inter_intra(P, y, D),
        "Sil": silhouette(P, y, D),
        "H_norm": entropy_norm(P, n_qubits),
        "TVpair": tv,
        "TVpair_norm": tv_norm,
    }
