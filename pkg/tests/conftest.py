import numpy as np
import pytest

from qbugloc.circuit import Gate, GateKind, QuantumProgram


def chain_program(gate_counts, bug=None):
    """One-qubit program of ``z 0`` gates; ``bug`` swaps one gate of that segment to ``x 0``.

    Every prefix from the bug onward then reads |1> instead of |0>, so the
    ground truth is exactly ``bug``.
    """
    segments = []
    for x, g in enumerate(gate_counts, start=1):
        gates = [Gate(GateKind.Z, (0,))] * g
        if x == bug:
            gates = [Gate(GateKind.X, (0,))] + gates[1:]
        segments.append(gates)
    return QuantumProgram.from_gates(1, segments)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
