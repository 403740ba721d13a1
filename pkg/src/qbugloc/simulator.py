"""Dense statevector simulation of segment prefixes.

Basis states are ordered by the integer value of the bitstring with qubit 0
as the least significant bit, so amplitude ``j`` belongs to the state whose
qubit ``q`` reads ``(j >> q) & 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Gate, GateKind, QuantumProgram

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_SINGLE = {
    GateKind.H: _H,
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
}


def zero_state(n: int) -> np.ndarray:
    state = np.zeros(2**n, dtype=complex)
    state[0] = 1.0
    return state


def _num_qubits(state: np.ndarray) -> int:
    n = int(state.size).bit_length() - 1
    if 2**n != state.size:
        raise ValueError(f"state length {state.size} is not a power of two")
    return n


def apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    """Return a new state with ``gate`` applied; the input is not modified."""
    n = _num_qubits(state)
    # tensor axis for qubit q is n-1-q (qubit 0 is the last, fastest axis)
    psi = state.reshape([2] * n).copy()

    def idx(assign):
        sl = [slice(None)] * n
        for q, v in assign.items():
            sl[n - 1 - q] = v
        return tuple(sl)

    kind, qs = gate.kind, gate.qubits
    if kind in _SINGLE:
        axis = n - 1 - qs[0]
        psi = np.moveaxis(np.tensordot(_SINGLE[kind], psi, axes=([1], [axis])), 0, axis)
    elif kind is GateKind.CX:
        c, t = qs
        a, b = idx({c: 1, t: 0}), idx({c: 1, t: 1})
        psi[a], psi[b] = psi[b].copy(), psi[a].copy()
    elif kind is GateKind.CZ:
        psi[idx({qs[0]: 1, qs[1]: 1})] *= -1
    elif kind is GateKind.CCX:
        c1, c2, t = qs
        a, b = idx({c1: 1, c2: 1, t: 0}), idx({c1: 1, c2: 1, t: 1})
        psi[a], psi[b] = psi[b].copy(), psi[a].copy()
    else:  # pragma: no cover
        raise ValueError(f"unsupported gate {kind}")
    return np.ascontiguousarray(psi).reshape(-1)


def apply_segment(state: np.ndarray, gates) -> np.ndarray:
    for g in gates:
        state = apply_gate(state, g)
    return state


def run_prefix(prog: QuantumProgram, x: int) -> np.ndarray:
    """Output state of segments ``1..x`` applied to ``|0...0>``."""
    prog._check_index(x)
    state = zero_state(prog.qubit_count)
    for seg in prog.segments[:x]:
        state = apply_segment(state, seg.gates)
    return state


def prefix_states(prog: QuantumProgram) -> list[np.ndarray]:
    """Output states of every prefix, element ``x-1`` for segment ``x``."""
    out = []
    state = zero_state(prog.qubit_count)
    for seg in prog.segments:
        state = apply_segment(state, seg.gates)
        out.append(state)
    return out


def exact_distribution(state: np.ndarray) -> np.ndarray:
    probs = np.abs(state) ** 2
    return probs / probs.sum()


def prefix_distributions(prog: QuantumProgram) -> list[np.ndarray]:
    return [exact_distribution(s) for s in prefix_states(prog)]


@dataclass
class MeasurementHistogram:
    counts: np.ndarray

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: MeasurementHistogram) -> MeasurementHistogram:
        return MeasurementHistogram(self.counts + other.counts)

    def to_dict(self) -> dict[int, int]:
        return {int(i): int(c) for i, c in enumerate(self.counts) if c}

    @classmethod
    def from_dict(cls, counts: dict, size: int) -> MeasurementHistogram:
        arr = np.zeros(size, dtype=np.int64)
        for k, v in counts.items():
            arr[int(k)] = v
        return cls(arr)


def sample_counts(probs: np.ndarray, shots: int, rng: np.random.Generator) -> MeasurementHistogram:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = np.clip(probs, 0.0, None)
    return MeasurementHistogram(rng.multinomial(shots, p / p.sum()).astype(np.int64))


def sample_measurements(state: np.ndarray, shots: int, rng: np.random.Generator) -> MeasurementHistogram:
    return sample_counts(exact_distribution(state), shots, rng)
