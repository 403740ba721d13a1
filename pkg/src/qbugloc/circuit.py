"""Segmented quantum programs over a fixed gate set.

Circuit file format (one statement per line, ``#`` starts a comment)::

    qubits 3
    seg
    h 0
    h 1
    seg
    ccx 0 1 2

Segments are numbered from 1 in file order.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import accumulate


class ProgramError(ValueError):
    """Raised for malformed programs or circuit files."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GateKind(enum.Enum):
    H = "h"
    X = "x"
    Z = "z"
    S = "s"
    T = "t"
    CX = "cx"
    CZ = "cz"
    CCX = "ccx"

    @property
    def arity(self) -> int:
        return _ARITY[self]


_ARITY = {
    GateKind.H: 1,
    GateKind.X: 1,
    GateKind.Z: 1,
    GateKind.S: 1,
    GateKind.T: 1,
    GateKind.CX: 2,
    GateKind.CZ: 2,
    GateKind.CCX: 3,
}


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != self.kind.arity:
            raise ProgramError(
                f"{self.kind.value} takes {self.kind.arity} qubit(s), got {len(self.qubits)}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ProgramError(f"duplicate qubit index in {self.kind.value} {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ProgramError(f"negative qubit index in {self.kind.value} {self.qubits}")

    def __str__(self) -> str:
        return " ".join([self.kind.value, *map(str, self.qubits)])


@dataclass(frozen=True)
class Segment:
    gates: tuple[Gate, ...]
    index: int

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if not self.gates:
            raise ProgramError(f"segment {self.index} has no gates")

    def __len__(self) -> int:
        return len(self.gates)


@dataclass(frozen=True)
class QuantumProgram:
    qubit_count: int
    segments: tuple[Segment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if self.qubit_count < 1:
            raise ProgramError("qubit count must be positive")
        if len(self.segments) < 2:
            raise ProgramError(f"need at least 2 segments, got {len(self.segments)}")
        for pos, seg in enumerate(self.segments, start=1):
            if seg.index != pos:
                raise ProgramError(f"segment indices must be 1..l, found {seg.index} at {pos}")
            for gate in seg.gates:
                if max(gate.qubits) >= self.qubit_count:
                    raise ProgramError(
                        f"qubit index out of range in '{gate}' (n={self.qubit_count})"
                    )

    @classmethod
    def from_gates(cls, qubit_count: int, segments) -> QuantumProgram:
        """Build a program from nested lists of gates, numbering segments from 1."""
        return cls(
            qubit_count,
            tuple(Segment(tuple(gates), i) for i, gates in enumerate(segments, start=1)),
        )

    @property
    def length(self) -> int:
        return len(self.segments)

    def segment(self, x: int) -> Segment:
        self._check_index(x)
        return self.segments[x - 1]

    def gate_counts(self) -> list[int]:
        return [gate_count(s) for s in self.segments]

    def prefix_costs(self) -> list[int]:
        """Cumulative gate counts, ``[c_1, ..., c_l]``."""
        return list(accumulate(self.gate_counts()))

    def replace_gate(self, x: int, position: int, gate: Gate) -> QuantumProgram:
        seg = self.segment(x)
        gates = list(seg.gates)
        gates[position] = gate
        segments = list(self.segments)
        segments[x - 1] = Segment(tuple(gates), x)
        return QuantumProgram(self.qubit_count, tuple(segments))

    def _check_index(self, x: int) -> None:
        if not 1 <= x <= len(self.segments):
            raise IndexError(f"segment index {x} outside 1..{len(self.segments)}")


def gate_count(seg: Segment) -> int:
    return len(seg.gates)


def prefix_cost(prog: QuantumProgram, x: int) -> int:
    """Number of gates executed to prepare the output of segment ``x``."""
    prog._check_index(x)
    return sum(gate_count(s) for s in prog.segments[:x])


def parse_program(text: str) -> QuantumProgram:
    qubit_count = None
    segments: list[list[Gate]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        head = head.lower()
        if head == "qubits":
            if qubit_count is not None:
                raise ProgramError("duplicate 'qubits' header", lineno)
            if len(args) != 1 or not args[0].isdigit():
                raise ProgramError("expected 'qubits <n>'", lineno)
            qubit_count = int(args[0])
            continue
        if qubit_count is None:
            raise ProgramError("missing 'qubits <n>' header", lineno)
        if head == "seg":
            if args:
                raise ProgramError("'seg' takes no arguments", lineno)
            segments.append([])
            continue
        try:
            kind = GateKind(head)
        except ValueError:
            raise ProgramError(f"unknown gate '{head}'", lineno) from None
        if not segments:
            raise ProgramError("gate before first 'seg'", lineno)
        try:
            qubits = tuple(int(a) for a in args)
        except ValueError:
            raise ProgramError(f"bad qubit index in '{line}'", lineno) from None
        try:
            gate = Gate(kind, qubits)
        except ProgramError as exc:
            raise ProgramError(str(exc), lineno) from None
        if max(gate.qubits) >= qubit_count:
            raise ProgramError(f"qubit index out of range in '{gate}' (n={qubit_count})", lineno)
        segments[-1].append(gate)

    if qubit_count is None:
        raise ProgramError("missing 'qubits <n>' header")
    for i, gates in enumerate(segments, start=1):
        if not gates:
            raise ProgramError(f"segment {i} has no gates")
    return QuantumProgram.from_gates(qubit_count, segments)


def serialize_program(prog: QuantumProgram) -> str:
    lines = [f"qubits {prog.qubit_count}"]
    for seg in prog.segments:
        lines.append("seg")
        lines.extend(str(g) for g in seg.gates)
    return "\n".join(lines) + "\n"


def load_program(path) -> QuantumProgram:
    with open(path, encoding="utf-8") as f:
        return parse_program(f.read())


def save_program(prog: QuantumProgram, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize_program(prog))
