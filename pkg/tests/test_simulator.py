import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import chi2_sf, dense_run
from qbugloc.circuit import Gate, GateKind, parse_program
from qbugloc.harness import GenSpec, generate_program
from qbugloc.simulator import (
    MeasurementHistogram,
    apply_gate,
    apply_segment,
    exact_distribution,
    run_prefix,
    sample_measurements,
    zero_state,
)
from qbugloc.stattest import chi_square

GROVER_2Q = """\
qubits 2
seg
h 0
h 1
seg
cz 0 1
seg
h 0
h 1
x 0
x 1
cz 0 1
x 0
x 1
h 0
h 1
"""


def test_hadamard_on_zero():
    out = apply_gate(zero_state(1), Gate(GateKind.H, (0,)))
    np.testing.assert_allclose(out, [1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-12)


def test_x_flips():
    out = apply_gate(zero_state(1), Gate(GateKind.X, (0,)))
    np.testing.assert_allclose(out, [0, 1], atol=0)


def test_cx_control_is_qubit_zero():
    state = np.zeros(4, dtype=complex)
    state[0b01] = 1  # qubit 0 set
    out = apply_gate(state, Gate(GateKind.CX, (0, 1)))
    np.testing.assert_allclose(out, np.eye(4)[0b11], atol=0)
    # control clear: unchanged
    state = np.zeros(4, dtype=complex)
    state[0b10] = 1
    np.testing.assert_allclose(apply_gate(state, Gate(GateKind.CX, (0, 1))), state, atol=0)


def test_apply_gate_does_not_mutate_input():
    state = zero_state(2)
    apply_gate(state, Gate(GateKind.X, (1,)))
    np.testing.assert_array_equal(state, zero_state(2))


def _random_gates(rng, n, count):
    kinds = [k for k in GateKind if k.arity <= n]
    out = []
    for _ in range(count):
        k = kinds[rng.integers(len(kinds))]
        out.append(Gate(k, tuple(int(q) for q in rng.choice(n, k.arity, replace=False))))
    return out


def test_matches_dense_matrix_oracle(rng):
    for _ in range(100):
        n = int(rng.integers(1, 5))
        gates = _random_gates(rng, n, 30)
        state = apply_segment(zero_state(n), gates)
        ref = dense_run([(g.kind.value, g.qubits) for g in gates], n)
        np.testing.assert_allclose(state, ref, atol=1e-10)


def test_norm_preserved_random_circuits(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        state = zero_state(n)
        for g in _random_gates(rng, n, 50):
            state = apply_gate(state, g)
            assert abs(1 - np.sum(np.abs(state) ** 2)) <= 1e-10


@pytest.mark.parametrize("kind", [GateKind.H, GateKind.X, GateKind.Z, GateKind.CX, GateKind.CZ, GateKind.CCX])
def test_self_inverse_gates(kind, rng):
    n = 4
    for _ in range(20):
        state = apply_segment(zero_state(n), _random_gates(rng, n, 20))
        qubits = tuple(int(q) for q in rng.choice(n, kind.arity, replace=False))
        g = Gate(kind, qubits)
        np.testing.assert_allclose(apply_gate(apply_gate(state, g), g), state, atol=1e-10)


def test_grover_uniform_then_marked():
    prog = parse_program(GROVER_2Q)
    np.testing.assert_allclose(exact_distribution(run_prefix(prog, 1)), [0.25] * 4, atol=1e-12)
    # the phase oracle leaves the Z-basis distribution unchanged
    np.testing.assert_allclose(exact_distribution(run_prefix(prog, 2)), [0.25] * 4, atol=1e-12)
    final = exact_distribution(run_prefix(prog, 3))
    assert abs(final[0b11] - 1.0) <= 1e-9


def test_run_prefix_compositional(rng):
    prog = generate_program(GenSpec(qubit_count=4, segment_count=6), rng)
    for x in range(2, prog.length + 1):
        step = apply_segment(run_prefix(prog, x - 1), prog.segment(x).gates)
        np.testing.assert_allclose(run_prefix(prog, x), step, atol=1e-12)


def test_run_prefix_range():
    prog = parse_program(GROVER_2Q)
    with pytest.raises(IndexError):
        run_prefix(prog, 0)
    with pytest.raises(IndexError):
        run_prefix(prog, 4)


def test_exact_distribution_basics():
    np.testing.assert_allclose(exact_distribution(zero_state(1)), [1, 0])
    plus = np.array([1, 1]) / np.sqrt(2)
    np.testing.assert_allclose(exact_distribution(plus), [0.5, 0.5], atol=1e-12)


def test_sample_point_mass(rng):
    hist = sample_measurements(zero_state(1), 100, rng)
    assert hist.to_dict() == {0: 100}
    assert hist.shots == 100


def test_sampling_deterministic_per_seed():
    plus = np.array([1, 1, 1, 1]) / 2
    a = sample_measurements(plus, 500, np.random.default_rng(3))
    b = sample_measurements(plus, 500, np.random.default_rng(3))
    np.testing.assert_array_equal(a.counts, b.counts)


def test_law_of_large_numbers():
    plus = np.array([1, 1]) / np.sqrt(2)
    hist = sample_measurements(plus, 10**6, np.random.default_rng(11))
    assert abs(hist.counts[0] / 10**6 - 0.5) <= 0.002


def test_sample_frequencies_fit_distribution():
    # aggregate over seeds: p-values of the sampler against its own source
    probs = exact_distribution(run_prefix(parse_program(GROVER_2Q), 1))
    skewed = np.array([0.1, 0.2, 0.3, 0.4])
    for p in (probs, skewed):
        pvals = []
        for seed in range(20):
            hist = sample_measurements(np.sqrt(p), 10**5, np.random.default_rng(seed))
            stat = float(((hist.counts - 10**5 * p) ** 2 / (10**5 * p)).sum())
            pvals.append(chi2_sf(stat, 3))
            assert chi_square(hist, p)[2] == pytest.approx(pvals[-1], abs=1e-9)
        assert min(pvals) > 0.001 / 20


def test_histogram_json_round_trip():
    hist = MeasurementHistogram(np.array([0, 3, 0, 7]))
    assert MeasurementHistogram.from_dict(hist.to_dict(), 4).counts.tolist() == [0, 3, 0, 7]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sampling_total_equals_shots(seed):
    rng = np.random.default_rng(seed)
    state = apply_segment(zero_state(3), _random_gates(rng, 3, 15))
    shots = int(rng.integers(1, 5000))
    assert sample_measurements(state, shots, rng).shots == shots
