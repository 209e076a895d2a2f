"""Deterministic randomness, feature scaling and PCA.

Everything here is fitted on training rows only; the ``*_fit_apply`` helpers
take the train and test splits separately so the caller cannot accidentally
fit on test data.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

# numerical floor used wherever a formula needs a small stabilizer
EPS = 1e-10

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Keyed random stream addressed by an explicit context path.

    The output depends only on ``(key, path)``: two streams with the same
    key and path produce identical numbers no matter when or where they are
    created, which keeps results independent of the execution schedule.
    Backed by the counter-based Philox generator seeded through
    :class:`numpy.random.SeedSequence` with the path as ``spawn_key``.
    """

    key: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "key", int(self.key) & _MASK64)
        path = tuple(int(p) for p in self.path)
        if any(p < 0 for p in path):
            raise InvalidArgumentError(f"path labels must be non-negative, got {path}")
        object.__setattr__(self, "path", path)

    def child(self, *labels: int) -> RngStream:
        return RngStream(self.key, self.path + tuple(int(l) for l in labels))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(entropy=self.key, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))

    def uniforms(self, n: int) -> np.ndarray:
        return self.generator().random(n)

    def gaussians(self, n: int) -> np.ndarray:
        """First ``n`` standard normals of the stream (Box-Muller on uniforms)."""
        m = (n + 1) // 2
        u = self.uniforms(2 * m)
        u1 = 1.0 - u[0::2]  # (0, 1], keeps log finite
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * m)
        z[0::2] = r * np.cos(2.0 * np.pi * u2)
        z[1::2] = r * np.sin(2.0 * np.pi * u2)
        return z[:n]


def rng_gaussian(stream: RngStream) -> float:
    return float(stream.gaussians(1)[0])


@dataclass
class ScalerStats:
    kind: str  # "standard" or "minmax"
    a: np.ndarray  # means or mins
    b: np.ndarray  # stds or maxs

    def apply(self, X):
        X = np.asarray(X, dtype=float)
        if self.kind == "standard":
            return (X - self.a) / self.b
        span = self.b - self.a
        safe = np.where(span > 0, span, 1.0)
        out = np.where(span > 0, (X - self.a) / safe, 0.0)
        return np.clip(out, 0.0, 1.0)


def _as_2d(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] == 0:
        raise InvalidArgumentError("training matrix is empty")
    return X


def standardize_fit(X_train) -> ScalerStats:
    X_train = _as_2d(X_train)
    mean = X_train.mean(axis=0)
    std = X_train.std(axis=0)  # population std
    std = np.where(std > 0, std, 1.0)
    return ScalerStats("standard", mean, std)


def standardize_fit_apply(X_train, X_test):
    stats = standardize_fit(X_train)
    return stats.apply(X_train), stats.apply(X_test), stats


def minmax_fit(X_train) -> ScalerStats:
    X_train = _as_2d(X_train)
    return ScalerStats("minmax", X_train.min(axis=0), X_train.max(axis=0))


def minmax_fit_apply(X_train, X_test):
    """Scale to [0, 1] with train bounds; test values are clamped.

    Constant training columns map to 0.
    """
    stats = minmax_fit(X_train)
    return stats.apply(X_train), stats.apply(X_test), stats


@dataclass
class PcaModel:
    components: np.ndarray  # (d, k), orthonormal columns
    mean: np.ndarray  # (d,)
    explained_variance: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def k(self) -> int:
        return self.components.shape[1]

    def transform(self, X):
        return (np.asarray(X, dtype=float) - self.mean) @ self.components

    def inverse_transform(self, Z):
        return np.asarray(Z, dtype=float) @ self.components.T + self.mean


def pca_fit(X_train, k: int) -> PcaModel:
    """Top-``k`` principal axes from the eigendecomposition of the covariance.

    Each component is sign-fixed so that its largest-magnitude entry is
    positive, which makes the projection reproducible across platforms.
    """
    X_train = _as_2d(X_train)
    n, d = X_train.shape
    if not 1 <= k <= d:
        raise InvalidArgumentError(f"k must be in [1, {d}], got {k}")
    if n < 2:
        raise InvalidArgumentError("PCA needs at least 2 training rows")
    mean = X_train.mean(axis=0)
    Xc = X_train - mean
    cov = Xc.T @ Xc / (n - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:k]
    comps = evecs[:, order]
    pivot = np.argmax(np.abs(comps), axis=0)
    signs = np.sign(comps[pivot, np.arange(k)])
    signs[signs == 0] = 1.0
    return PcaModel(comps * signs, mean, np.clip(evals[order], 0.0, None))


def pca_apply(model: PcaModel, X):
    return model.transform(X)
