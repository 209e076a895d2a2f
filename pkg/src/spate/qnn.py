"""Hybrid QNN classifier: frozen encoder prefix, strongly-entangling ansatz,
truncated readout, trained with Adam on parameter-shift gradients.

Readout uses the first ``m = ceil(log2 C)`` qubits of the register. The
``2**m`` readout distribution is truncated to its first ``C`` entries and
renormalised to give class probabilities.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import rankdata

from . import sim
from .encoders import EncoderConfig, encode_states
from .errors import InvalidArgumentError
from .numerics import EPS, RngStream
from .sim import GateOp

SHIFT = np.pi / 2

_INIT, _SHUFFLE = 0, 1


@dataclass
class TrainConfig:
    steps: int = 120
    batch_size: int = 32
    lr: float = 0.15
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    layers: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise InvalidArgumentError("steps must be at least 1")
        if self.batch_size < 1:
            raise InvalidArgumentError("batch_size must be at least 1")
        if self.layers < 1:
            raise InvalidArgumentError("layers must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainedModel:
    encoder: EncoderConfig
    params: np.ndarray  # (layers, n_qubits, 3)
    n_qubits: int
    n_classes: int
    readout: list[int]
    loss_trace: list[float] = field(default_factory=list)


def readout_size(n_classes: int) -> int:
    return max(1, math.ceil(math.log2(n_classes)))


def entangler_range(layer: int, n: int) -> int:
    return layer % (n - 1) + 1


def ansatz_apply(state: sim.StateVector, params) -> sim.StateVector:
    """Strongly-entangling layers: ROT on every qubit, then a CNOT ring.

    ``params`` has shape ``extra + (L, n, 3)``; any ``extra`` axes are
    broadcast in front of the state's batch axes, so a stack of parameter
    sets evolves the same inputs in one pass.
    """
    params = np.asarray(params, dtype=float)
    L, n = params.shape[-3], params.shape[-2]
    if params.shape[-1] != 3 or n != state.n:
        raise InvalidArgumentError(f"params shape {params.shape} does not fit a {state.n}-qubit register")
    pad = (1,) * len(state.batch_shape)
    extra = params.shape[:-3]

    def angle(l, q, k):
        return params[..., l, q, k].reshape(extra + pad)

    amps = state.amps
    for l in range(L):
        for q in range(n):
            U = sim.rot_matrix(angle(l, q, 0), angle(l, q, 1), angle(l, q, 2))
            amps = sim.apply_matrix(amps, n, U, q)
        if n > 1:
            r = entangler_range(l, n)
            for q in range(n):
                amps = sim.apply_controlled(amps, n, sim.gate_matrix(GateOp("CNOT", (q + r) % n, q)), q, (q + r) % n)
    return sim.StateVector(n, amps)


def readout_probs(states: np.ndarray, n: int, params, m: int) -> np.ndarray:
    """Readout distribution averaged over the seed axis; ``states`` is ``(B, S, 2**n)``."""
    out = ansatz_apply(sim.StateVector(n, states), params)
    return sim.marginal_probabilities(out, range(m)).mean(axis=-2)


def class_probs(r, n_classes: int) -> np.ndarray:
    r = np.asarray(r, dtype=float)[..., :n_classes]
    return r / (r.sum(axis=-1, keepdims=True) + EPS)


def cross_entropy(probs, y) -> float:
    probs = np.asarray(probs, dtype=float)
    y = np.asarray(y)
    return float(-np.mean(np.log(probs[np.arange(len(y)), y] + EPS)))


def _loss_grad_wrt_readout(r, y, n_classes):
    """dL/dr for the truncate-renormalise-cross-entropy chain."""
    B = len(y)
    rows = np.arange(B)
    rc = r[:, :n_classes]
    s = rc.sum(axis=1) + EPS
    r_y = rc[rows, y]
    p_y = r_y / s
    dl_dp = -1.0 / (B * (p_y + EPS))
    g = np.zeros_like(r)
    g[:, :n_classes] = (dl_dp * (-r_y / s ** 2))[:, None]
    g[rows, y] += dl_dp / s
    return g


def loss_and_grad(states, y, params, n: int, n_classes: int):
    """Batch loss and its exact gradient w.r.t. every ansatz angle.

    Each angle enters through a single Pauli rotation, so
    ``dr/dtheta = (r(theta + pi/2) - r(theta - pi/2)) / 2`` holds exactly for
    the readout distribution ``r``; all shifted circuits run as one stacked
    batch and the readout derivative is chained through the loss analytically.
    """
    params = np.asarray(params, dtype=float)
    y = np.asarray(y)
    m = readout_size(n_classes)
    P = params.size
    shifts = np.concatenate([np.eye(P), -np.eye(P)]) * SHIFT
    stacked = np.concatenate([params[None], params[None] + shifts.reshape((2 * P,) + params.shape)])
    r_all = readout_probs(states, n, stacked, m)  # (1 + 2P, B, 2^m)
    r = r_all[0]
    dr = 0.5 * (r_all[1:P + 1] - r_all[P + 1:])
    g = _loss_grad_wrt_readout(r, y, n_classes)
    grad = np.einsum("pbc,bc->p", dr, g).reshape(params.shape)
    return cross_entropy(class_probs(r, n_classes), y), grad


def parameter_shift_grad(states, y, params, n: int, n_classes: int) -> np.ndarray:
    return loss_and_grad(states, y, params, n, n_classes)[1]


def batch_loss(states, y, params, n: int, n_classes: int) -> float:
    r = readout_probs(states, n, params, readout_size(n_classes))
    return cross_entropy(class_probs(r, n_classes), y)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros_like(cls, params) -> AdamState:
        return cls(np.zeros_like(params), np.zeros_like(params))


def adam_step(params, grad, state: AdamState, t: int, lr: float = 0.15, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> np.ndarray:
    """One bias-corrected Adam update; ``state`` moments are updated in place."""
    if t < 1:
        raise InvalidArgumentError("Adam step counter starts at 1")
    state.m = beta1 * state.m + (1 - beta1) * grad
    state.v = beta2 * state.v + (1 - beta2) * grad * grad
    m_hat = state.m / (1 - beta1 ** t)
    v_hat = state.v / (1 - beta2 ** t)
    return params - lr * m_hat / (np.sqrt(v_hat) + eps)


def init_params(layers: int, n: int, rng: RngStream) -> np.ndarray:
    u = rng.child(_INIT).uniforms(layers * n * 3)
    return (2 * np.pi * u).reshape(layers, n, 3)


def minibatches(n_samples: int, batch_size: int, steps: int, rng: RngStream):
    """Index batches for ``steps`` updates; reshuffled from a seeded stream every epoch."""
    epoch, out = 0, []
    while len(out) < steps:
        perm = rng.child(_SHUFFLE, epoch).generator().permutation(n_samples)
        for lo in range(0, n_samples, batch_size):
            out.append(perm[lo:lo + batch_size])
            if len(out) == steps:
                break
        epoch += 1
    return out


def fit_states(states, y, n: int, n_classes: int, encoder: EncoderConfig, cfg: TrainConfig,
               rng: RngStream | None = None) -> TrainedModel:
    """Train on pre-encoded states (the encoder is frozen, so it runs only once).

    Initial angles and minibatch order come from ``rng``, which defaults to
    ``RngStream(cfg.seed)``.
    """
    rng = RngStream(cfg.seed) if rng is None else rng
    y = np.asarray(y)
    if len(y) == 0:
        raise InvalidArgumentError("training split is empty")
    m = readout_size(n_classes)
    if m > n:
        raise InvalidArgumentError(f"{n_classes} classes need {m} readout qubits, register has {n}")
    params = init_params(cfg.layers, n, rng)
    opt = AdamState.zeros_like(params)
    trace = []
    for t, idx in enumerate(minibatches(len(y), cfg.batch_size, cfg.steps, rng), start=1):
        loss, grad = loss_and_grad(states[idx], y[idx], params, n, n_classes)
        trace.append(loss)
        params = adam_step(params, grad, opt, t, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
    return TrainedModel(encoder, params, n, n_classes, list(range(m)), trace)


def train(X, y, encoder: EncoderConfig, cfg: TrainConfig, streams=None, n_classes: int | None = None,
          rng: RngStream | None = None) -> TrainedModel:
    y = np.asarray(y)
    if len(y) == 0:
        raise InvalidArgumentError("training split is empty")
    n_classes = int(y.max()) + 1 if n_classes is None else n_classes
    n, states = encode_states(X, encoder, streams)
    return fit_states(states, y, n, n_classes, encoder, cfg, rng)


def predict_states(states, model: TrainedModel) -> np.ndarray:
    r = readout_probs(states, model.n_qubits, model.params, len(model.readout))
    return class_probs(r, model.n_classes)


def predict_proba(X, model: TrainedModel, streams=None) -> np.ndarray:
    _, states = encode_states(X, model.encoder, streams)
    return predict_states(states, model)


def forward(x, model: TrainedModel, stream: RngStream | None = None) -> np.ndarray:
    """Class probabilities of a single sample."""
    streams = None if stream is None else [stream]
    return predict_proba(np.asarray(x, dtype=float)[None, :], model, streams)[0]


def rank_auc(scores, positive) -> float:
    """Area under the ROC curve via the rank-sum statistic (ties get average ranks)."""
    positive = np.asarray(positive, dtype=bool)
    n_pos, n_neg = positive.sum(), (~positive).sum()
    if n_pos == 0 or n_neg == 0:
        raise InvalidArgumentError("AUC needs both positive and negative samples")
    ranks = rankdata(scores)
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def _prec_rec(y, pred, c):
    tp = np.sum((pred == c) & (y == c))
    npred, ntrue = np.sum(pred == c), np.sum(y == c)
    return (tp / npred if npred else 0.0), (tp / ntrue if ntrue else 0.0)


def classification_report(y, probs, n_classes: int) -> dict[str, float]:
    """Accuracy, precision, recall and AUC; binary for two classes, macro otherwise."""
    y = np.asarray(y)
    probs = np.asarray(probs, dtype=float)
    pred = np.argmax(probs, axis=1)
    acc = float(np.mean(pred == y))
    if n_classes == 2:
        prec, rec = _prec_rec(y, pred, 1)
        auc = rank_auc(probs[:, 1], y == 1)
    else:
        labels = np.union1d(y, pred)
        pr = np.array([_prec_rec(y, pred, c) for c in labels])
        prec, rec = pr[:, 0].mean(), pr[:, 1].mean()
        aucs = []
        for c in range(n_classes):
            pos = y == c
            if pos.all() or not pos.any():
                warnings.warn(f"class {c} absent from (or alone in) the split; skipped in macro AUC")
                continue
            aucs.append(rank_auc(probs[:, c], pos))
        auc = float(np.mean(aucs)) if aucs else float("nan")
    return {"accuracy": acc, "precision": float(prec), "recall": float(rec), "auc": float(auc)}


def evaluate(X, y, model: TrainedModel, streams=None) -> dict[str, float]:
    if len(y) == 0:
        raise InvalidArgumentError("test split is empty")
    return classification_report(y, predict_proba(X, model, streams), model.n_classes)
