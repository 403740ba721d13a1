"""Independent reference computations used by the tests.

Nothing here imports the code under test's numerics.
"""
import itertools

import mpmath as mp
import numpy as np


def chi2_sf(stat, dof):
    if dof == 0:
        return 1.0
    return float(mp.gammainc(mp.mpf(dof) / 2, mp.mpf(stat) / 2, mp.inf, regularized=True))


def chi2_critical(alpha, dof):
    f = lambda c: mp.gammainc(mp.mpf(dof) / 2, c / 2, mp.inf, regularized=True) - alpha
    return mp.findroot(f, dof + 2 * mp.sqrt(2 * dof))


def ncx2_sf(x, dof, nc):
    """Poisson mixture of central chi-square tails."""
    half = mp.mpf(nc) / 2
    top = int(half + 12 * mp.sqrt(half) + 60)  # Poisson tail beyond this is negligible
    weight = lambda j: mp.exp(-half + j * mp.log(half) - mp.loggamma(j + 1)) if half else int(j == 0)
    return float(mp.fsum(
        weight(j) * mp.gammainc((dof + 2 * j) / mp.mpf(2), mp.mpf(x) / 2, mp.inf, regularized=True)
        for j in range(top)
    ))


def brute_force_middle(costs, lo, hi):
    """Literal argmin with smallest-index tie-break, 1-based costs."""
    best = None
    for x in range(lo, hi):
        left = sum(costs[i - 1] for i in range(lo, x))
        right = sum(costs[i - 1] for i in range(x + 1, hi))
        key = (abs(left - right), x)
        best = key if best is None or key < best else best
    return best[1]


# dense-matrix simulator, qubit 0 least significant
_I = np.eye(2)
_P0 = np.diag([1, 0])
_P1 = np.diag([0, 1])
_MATS = {
    "h": np.array([[1, 1], [1, -1]]) / np.sqrt(2),
    "x": np.array([[0, 1], [1, 0]]),
    "z": np.diag([1, -1]),
    "s": np.diag([1, 1j]),
    "t": np.diag([1, np.exp(1j * np.pi / 4)]),
}


def _kron_ops(ops, n):
    """ops: dict qubit -> 2x2; qubit 0 is the rightmost kron factor."""
    out = np.array([[1.0 + 0j]])
    for q in reversed(range(n)):
        out = np.kron(out, ops.get(q, _I))
    return out


def dense_unitary(kind, qubits, n):
    if kind in _MATS:
        return _kron_ops({qubits[0]: _MATS[kind]}, n)
    controls, target = qubits[:-1], qubits[-1]
    flip = _MATS["x"] if kind in ("cx", "ccx") else _MATS["z"]
    total = np.zeros((2**n, 2**n), dtype=complex)
    for bits in itertools.product([0, 1], repeat=len(controls)):
        ops = {c: (_P1 if b else _P0) for c, b in zip(controls, bits)}
        if all(bits):
            ops[target] = flip
        total += _kron_ops(ops, n)
    return total


def dense_run(gates, n):
    """gates: iterable of (kind, qubits)."""
    state = np.zeros(2**n, dtype=complex)
    state[0] = 1
    for kind, qubits in gates:
        state = dense_unitary(kind, qubits, n) @ state
    return state
