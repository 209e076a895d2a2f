"""Exact dense statevector simulation.

Bit ordering: qubit 0 is the most significant bit of the basis index, so for
``n`` qubits the basis state ``|b_0 b_1 ... b_{n-1}>`` has index
``sum(b_q << (n - 1 - q))``. Every other module addresses qubits through this
convention.

Amplitude arrays may carry leading batch axes: ``amps`` has shape
``batch + (2**n,)``. Gate angles may be arrays that broadcast against the
batch shape, which lets one call evolve many samples (or many shifted
parameter sets) with different angles at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DegenerateInputError, InvalidArgumentError

MAX_QUBITS = 12

ONE_QUBIT = ("H", "RX", "RY", "RZ", "ROT")
TWO_QUBIT = ("CNOT", "CRZ")
_N_PARAMS = {"H": 0, "RX": 1, "RY": 1, "RZ": 1, "ROT": 3, "CNOT": 0, "CRZ": 1}

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass
class StateVector:
    n: int
    amps: np.ndarray

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.amps.shape[:-1]

    def copy(self) -> StateVector:
        return StateVector(self.n, self.amps.copy())


@dataclass(frozen=True)
class GateOp:
    kind: str
    target: int
    control: int | None = None
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in _N_PARAMS:
            raise InvalidArgumentError(f"unknown gate {self.kind!r}")
        if len(self.params) != _N_PARAMS[self.kind]:
            raise InvalidArgumentError(f"{self.kind} takes {_N_PARAMS[self.kind]} angle(s), got {len(self.params)}")
        if (self.kind in TWO_QUBIT) != (self.control is not None):
            raise InvalidArgumentError(f"{self.kind}: control qubit {'required' if self.kind in TWO_QUBIT else 'not allowed'}")
        if self.control is not None and self.control == self.target:
            raise InvalidArgumentError("control and target must differ")


def _check_n(n: int):
    if not 1 <= n <= MAX_QUBITS:
        raise CapacityError(f"register size must be in [1, {MAX_QUBITS}], got {n}")


def zero_state(n: int, batch_shape: tuple[int, ...] = ()) -> StateVector:
    _check_n(n)
    amps = np.zeros(tuple(batch_shape) + (2 ** n,), dtype=complex)
    amps[..., 0] = 1.0
    return StateVector(n, amps)


def load_amplitudes(n: int, vector) -> StateVector:
    """State with amplitudes ``vector / ||vector||`` (normalized along the last axis)."""
    _check_n(n)
    v = np.asarray(vector)
    if v.shape[-1] != 2 ** n:
        raise InvalidArgumentError(f"expected {2 ** n} amplitudes, got {v.shape[-1]}")
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise DegenerateInputError("cannot load a zero-norm amplitude vector")
    return StateVector(n, (v / norm).astype(complex))


# -- single-qubit matrices; angles broadcast, result shape angle.shape + (2, 2)

def rx_matrix(theta):
    t = np.asarray(theta, dtype=float) / 2
    c, s = np.cos(t), np.sin(t)
    m = np.empty(t.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = c
    m[..., 0, 1] = -1j * s
    m[..., 1, 0] = -1j * s
    m[..., 1, 1] = c
    return m


def ry_matrix(theta):
    t = np.asarray(theta, dtype=float) / 2
    c, s = np.cos(t), np.sin(t)
    m = np.empty(t.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = c
    m[..., 0, 1] = -s
    m[..., 1, 0] = s
    m[..., 1, 1] = c
    return m


def rz_matrix(theta):
    t = np.asarray(theta, dtype=float) / 2
    m = np.zeros(t.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = np.exp(-1j * t)
    m[..., 1, 1] = np.exp(1j * t)
    return m


def rot_matrix(a, b, c):
    """RZ(c) @ RY(b) @ RZ(a)."""
    return rz_matrix(c) @ ry_matrix(b) @ rz_matrix(a)


def gate_matrix(gate: GateOp) -> np.ndarray:
    """2x2 matrix of a single-qubit gate, or of the target action of a controlled one."""
    k = gate.kind
    if k == "H":
        return _H
    if k == "RX":
        return rx_matrix(gate.params[0])
    if k == "RY":
        return ry_matrix(gate.params[0])
    if k in ("RZ", "CRZ"):
        return rz_matrix(gate.params[0])
    if k == "ROT":
        return rot_matrix(*gate.params)
    if k == "CNOT":
        return _X
    raise InvalidArgumentError(f"unknown gate {k!r}")


def apply_matrix(amps: np.ndarray, n: int, U: np.ndarray, target: int) -> np.ndarray:
    """Apply a (possibly batched) 2x2 matrix ``U`` to ``target``."""
    batch = amps.shape[:-1]
    psi = amps.reshape(batch + (2 ** target, 2, 2 ** (n - target - 1)))
    return (U[..., None, :, :] @ psi).reshape(np.broadcast_shapes(batch, U.shape[:-2]) + (2 ** n,))


def apply_controlled(amps: np.ndarray, n: int, U: np.ndarray, control: int, target: int) -> np.ndarray:
    batch = amps.shape[:-1]
    out_batch = np.broadcast_shapes(batch, U.shape[:-2])
    out = np.broadcast_to(amps, out_batch + amps.shape[-1:]).copy()
    t = out.reshape(out_batch + (2,) * n)
    nb = len(out_batch)
    idx = [slice(None)] * (nb + n)
    idx[nb + control] = 1
    sub = t[tuple(idx)]  # control fixed to 1; target axis shifts down by one if after control
    tax = target - (1 if target > control else 0)
    sub = np.moveaxis(sub, nb + tax, -1)[..., None]  # (..., rest..., 2, 1)
    Ub = U.reshape(U.shape[:-2] + (1,) * (n - 2) + (2, 2))
    new = (Ub @ sub)[..., 0]
    t[tuple(idx)] = np.moveaxis(new, -1, nb + tax)
    return out


def _check_gate(n: int, gate: GateOp):
    for q in (gate.target, gate.control):
        if q is not None and not 0 <= q < n:
            raise InvalidArgumentError(f"qubit index {q} out of range for {n} qubits")


def apply(state: StateVector, gate: GateOp) -> StateVector:
    """Return a new state with ``gate`` applied."""
    _check_gate(state.n, gate)
    U = gate_matrix(gate)
    if gate.control is None:
        amps = apply_matrix(state.amps, state.n, U, gate.target)
    else:
        amps = apply_controlled(state.amps, state.n, U, gate.control, gate.target)
    return StateVector(state.n, amps)


def run(state: StateVector, gates) -> StateVector:
    for g in gates:
        state = apply(state, g)
    return state


def probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amps) ** 2


def marginal_probabilities(state: StateVector, qubits) -> np.ndarray:
    """Distribution over ``qubits``; the listed order sets the bit order of the result."""
    qubits = [int(q) for q in qubits]
    n = state.n
    if len(set(qubits)) != len(qubits):
        raise InvalidArgumentError(f"duplicate qubit in {qubits}")
    if any(not 0 <= q < n for q in qubits):
        raise InvalidArgumentError(f"qubit index out of range in {qubits}")
    p = probabilities(state)
    batch = p.shape[:-1]
    nb = len(batch)
    t = p.reshape(batch + (2,) * n)
    rest = tuple(nb + q for q in range(n) if q not in qubits)
    t = t.sum(axis=rest)
    # remaining axes are in ascending qubit order; permute to the requested order
    kept = sorted(qubits)
    perm = list(range(nb)) + [nb + kept.index(q) for q in qubits]
    return t.transpose(perm).reshape(batch + (2 ** len(qubits),))
