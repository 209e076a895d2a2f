"""State-preparation circuits (SPATE, angle, amplitude) and their embeddings.

An embedding is the exact computational-basis distribution of the prepared
state. SPATE registers put the ``d`` feature qubits first (indices
``0..d-1``) followed by the ``n_t`` time qubits.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import sim
from .errors import CapacityError, DegenerateInputError, InvalidArgumentError
from .numerics import RngStream
from .sim import GateOp
from .spikes import LifConfig, SpateParams, extract_params, extract_params_batch, spike_noise

KINDS = ("spate", "angle", "amplitude")

DEFAULT_BETA_SCALE = 0.5
DEFAULT_SEEDS = 3

_CHUNK = 256


@dataclass
class EncoderConfig:
    kind: str
    n_qubits: int | None = None  # angle / amplitude register size
    beta_scale: float = DEFAULT_BETA_SCALE
    seeds: int = DEFAULT_SEEDS
    lif: LifConfig = field(default_factory=LifConfig)

    def __post_init__(self):
        self.kind = self.kind.lower()
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown encoder {self.kind!r}; choose from {KINDS}")
        if self.beta_scale <= 0:
            raise InvalidArgumentError("beta_scale must be positive")
        if self.seeds < 1:
            raise InvalidArgumentError("need at least one seed")

    def total_qubits(self, d: int) -> int:
        if self.kind == "spate":
            return d + self.lif.n_t
        return self.n_qubits if self.n_qubits is not None else d

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "n_qubits": self.n_qubits}
        if self.kind == "spate":
            out.update(beta_scale=self.beta_scale, seeds=self.seeds, lif=self.lif.to_dict())
        return out


def _check_capacity(n: int):
    if not 1 <= n <= sim.MAX_QUBITS:
        raise CapacityError(f"encoder needs {n} qubits; the simulator supports 1..{sim.MAX_QUBITS}")


def spate_circuit(params: SpateParams, beta_scale: float) -> list[GateOp]:
    d, n_t = params.d, params.n_t
    gates = [GateOp("H", d + k) for k in range(n_t)]
    for i in range(d):
        gates.append(GateOp("RX", i, params=(params.alpha[..., i],)))
        gates.append(GateOp("RZ", i, params=(params.phi[..., i],)))
    for i in range(d):
        for k in range(n_t):
            gates.append(GateOp("CRZ", d + k, i, (beta_scale * params.bins[..., i, k],)))
    return gates


def spate_prepare(params: SpateParams, beta_scale: float = DEFAULT_BETA_SCALE) -> sim.StateVector:
    n = params.d + params.n_t
    _check_capacity(n)
    batch = params.alpha.shape[:-1]
    return sim.run(sim.zero_state(n, batch), spate_circuit(params, beta_scale))


def angle_prepare(X, n: int | None = None) -> sim.StateVector:
    """RX(x_i) on qubit i; ``X`` is ``batch + (d,)``.

    With a register larger than ``d`` the extra qubits stay in ``|0>``.
    """
    X = np.asarray(X, dtype=float)
    d = X.shape[-1]
    n = d if n is None else n
    _check_capacity(n)
    if d > n:
        raise CapacityError(f"{d} features do not fit on {n} angle-encoded qubits")
    gates = [GateOp("RX", i, params=(X[..., i],)) for i in range(d)]
    return sim.run(sim.zero_state(n, X.shape[:-1]), gates)


def angle_embed(X, n: int | None = None) -> np.ndarray:
    return sim.probabilities(angle_prepare(X, n))


def amplitude_prepare(X, n: int) -> sim.StateVector:
    """Zero-pad or truncate to ``2**n`` entries, then l2-normalise into amplitudes."""
    _check_capacity(n)
    X = np.asarray(X, dtype=float)
    D = 2 ** n
    if X.shape[-1] >= D:
        v = X[..., :D]
    else:
        v = np.zeros(X.shape[:-1] + (D,))
        v[..., : X.shape[-1]] = X
    if np.any(np.linalg.norm(v, axis=-1) == 0):
        raise DegenerateInputError("all-zero vector after padding/truncation")
    return sim.load_amplitudes(n, v)


def amplitude_embed(X, n: int) -> np.ndarray:
    return sim.probabilities(amplitude_prepare(X, n))


def spate_embed(x, cfg: EncoderConfig, base_rng: RngStream) -> np.ndarray:
    """Seed-averaged SPATE embedding of a single sample.

    Seed ``s`` uses ``base_rng.child(s)``. Without LIF noise every seed gives
    the same circuit, so it is evaluated once.
    """
    if cfg.kind != "spate":
        raise InvalidArgumentError("spate_embed needs a SPATE encoder config")
    n_seeds = cfg.seeds if cfg.lif.sigma > 0 else 1
    acc = None
    for s in range(n_seeds):
        p = sim.probabilities(spate_prepare(extract_params(x, cfg.lif, base_rng.child(s)), cfg.beta_scale))
        acc = p if acc is None else acc + p
    return acc / n_seeds


def spate_params_batch(X, cfg: EncoderConfig, streams=None, seeds: int | None = None,
                       noise=None) -> list[SpateParams]:
    """Per-seed parameters for every row; ``streams[b]`` is row b's base stream.

    ``noise`` optionally supplies the pre-drawn LIF noise of each seed (see
    :func:`seed_noise`), in which case ``streams`` is not consulted.
    """
    n_seeds = (cfg.seeds if seeds is None else seeds) if cfg.lif.sigma > 0 else 1
    out = []
    for s in range(n_seeds):
        if noise is not None:
            out.append(extract_params_batch(X, cfg.lif, noise=noise[s]))
        else:
            if streams is None:
                raise InvalidArgumentError("SPATE encoding needs per-sample RNG streams")
            out.append(extract_params_batch(X, cfg.lif, [st.child(s) for st in streams]))
    return out


def seed_noise(streams, d: int, n_steps: int, seeds: int) -> list[np.ndarray]:
    """LIF noise for seeds ``0..seeds-1``, reusable across LIF constants."""
    return [spike_noise([st.child(s) for st in streams], d, n_steps) for s in range(seeds)]


def spate_embed_batch(X, cfg: EncoderConfig, streams=None, seeds: int | None = None,
                      noise=None) -> np.ndarray:
    """Row-wise :func:`spate_embed`; ``seeds`` overrides ``cfg.seeds`` (used in tuning)."""
    X = np.asarray(X, dtype=float)
    _check_capacity(X.shape[1] + cfg.lif.n_t)
    per_seed = spate_params_batch(X, cfg, streams, seeds, noise)
    out = np.zeros((X.shape[0], 2 ** (X.shape[1] + cfg.lif.n_t)))
    for params in per_seed:
        for lo in range(0, X.shape[0], _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            out[sl] += sim.probabilities(spate_prepare(params[sl], cfg.beta_scale))
    return out / len(per_seed)


def encode_states(X, cfg: EncoderConfig, streams=None) -> tuple[int, np.ndarray]:
    """Prepared encoder states for a batch, shape ``(B, S, 2**n)``.

    ``S`` is the number of seed-conditioned circuits (1 for the baselines);
    downstream readouts average over that axis, which is exactly the
    measurement statistics of the seed mixture.
    """
    X = np.asarray(X, dtype=float)
    if cfg.kind == "angle":
        st = angle_prepare(X, cfg.n_qubits)
        return st.n, st.amps[:, None, :]
    if cfg.kind == "amplitude":
        n = cfg.n_qubits if cfg.n_qubits is not None else X.shape[1]
        st = amplitude_prepare(X, n)
        return st.n, st.amps[:, None, :]
    if streams is None:
        raise InvalidArgumentError("SPATE encoding needs per-sample RNG streams")
    n = X.shape[1] + cfg.lif.n_t
    _check_capacity(n)
    per_seed = spate_params_batch(X, cfg, streams)
    amps = np.stack([spate_prepare(p, cfg.beta_scale).amps for p in per_seed], axis=1)
    return n, amps


def embed(X, cfg: EncoderConfig, streams=None, seeds: int | None = None, noise=None) -> np.ndarray:
    """Probability-vector embeddings for every row of ``X``."""
    X = np.asarray(X, dtype=float)
    if cfg.kind == "angle":
        return angle_embed(X, cfg.n_qubits)
    if cfg.kind == "amplitude":
        return amplitude_embed(X, cfg.n_qubits if cfg.n_qubits is not None else X.shape[1])
    return spate_embed_batch(X, cfg, streams, seeds, noise)
