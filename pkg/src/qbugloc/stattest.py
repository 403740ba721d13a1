"""Adaptive chi-square testing of segment prefixes against oracle distributions."""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .circuit import QuantumProgram, prefix_cost
from .simulator import MeasurementHistogram, exact_distribution, run_prefix, sample_counts

# oracle probabilities below this are treated as exactly zero
ZERO_PROB = 1e-12
# Cochran's rule: pool bins whose expected count is below this
MIN_EXPECTED = 5.0


class Decision(str, enum.Enum):
    BUG = "Bug"
    NO_BUG = "NoBug"
    INCONCLUSIVE = "Inconclusive"


class Mode(str, enum.Enum):
    SUFFICIENT = "Sufficient"
    EARLY = "Early"


@dataclass(frozen=True)
class TestThresholds:
    p_bug_sufficient: float = 0.05
    power_bug_sufficient: float = 0.8
    p_nobug_sufficient: float = 0.8
    p_bug_early: float = 0.1
    p_nobug_early: float = 0.6
    alpha_nominal: float = 0.05
    shot_limit: int = 100_000
    initial_shots: int = 100

    __test__ = False

    def __post_init__(self):
        if not self.p_bug_early > self.p_bug_sufficient:
            raise ValueError("early bug threshold must be laxer than the sufficient one")
        if not self.p_nobug_early < self.p_nobug_sufficient:
            raise ValueError("early no-bug threshold must be laxer than the sufficient one")
        if not 0 < self.alpha_nominal < 1:
            raise ValueError("alpha_nominal must lie in (0, 1)")
        if self.initial_shots < 1 or self.shot_limit < self.initial_shots:
            raise ValueError("need 1 <= initial_shots <= shot_limit")

    def batches(self):
        """Batch sizes: initial, doubling, truncated so the total hits shot_limit."""
        total, size = 0, self.initial_shots
        while total < self.shot_limit:
            size = min(size, self.shot_limit - total)
            yield size
            total += size
            size *= 2

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TestVerdict:
    decision: Decision
    p_value: float
    power: float | None
    shots_used: int
    gates_executed: int
    mode: Mode
    segment: int = 0
    histogram: MeasurementHistogram | None = field(default=None, compare=False, repr=False)

    __test__ = False

    def to_dict(self) -> dict:
        return {
            "segment": self.segment,
            "decision": self.decision.value,
            "p_value": self.p_value,
            "power": self.power,
            "shots": self.shots_used,
            "gates": self.gates_executed,
            "mode": self.mode.value,
        }


class ImpossibleOutcome(Exception):
    """An outcome with zero oracle probability was observed."""


def _bin_groups(expected: np.ndarray, shots: int) -> list[np.ndarray]:
    """Group outcome indices into chi-square bins.

    Zero-probability outcomes are dropped. Outcomes with expected count below
    ``MIN_EXPECTED`` are pooled; an undersized pool is merged into the smallest
    remaining bin.
    """
    support = np.flatnonzero(expected > ZERO_PROB)
    big = support[expected[support] * shots >= MIN_EXPECTED]
    small = support[expected[support] * shots < MIN_EXPECTED]
    groups = [np.array([i]) for i in big]
    if small.size:
        if expected[small].sum() * shots >= MIN_EXPECTED or not groups:
            groups.append(small)
        else:
            j = min(range(len(groups)), key=lambda k: expected[groups[k]].sum())
            groups[j] = np.concatenate([groups[j], small])
    return groups


def _validate(expected: np.ndarray) -> np.ndarray:
    expected = np.asarray(expected, dtype=float)
    if abs(expected.sum() - 1.0) > 1e-9:
        raise ValueError(f"expected distribution sums to {expected.sum()}, not 1")
    return expected


def chi_square(hist: MeasurementHistogram, expected) -> tuple[float, int, float]:
    """Pearson goodness-of-fit test of ``hist`` against ``expected``.

    Returns ``(statistic, dof, p_value)``. A histogram whose retained bins
    collapse to a single one yields ``(0.0, 0, 1.0)``. Raises
    ``ImpossibleOutcome`` if a zero-probability outcome has counts.
    """
    expected = _validate(expected)
    counts = np.asarray(hist.counts)
    if counts.shape != expected.shape:
        raise ValueError("histogram and distribution sizes differ")
    if counts[expected <= ZERO_PROB].any():
        raise ImpossibleOutcome
    shots = int(counts.sum())
    groups = _bin_groups(expected, shots)
    if len(groups) < 2:
        return 0.0, 0, 1.0
    obs = np.array([counts[g].sum() for g in groups], dtype=float)
    exp = np.array([expected[g].sum() for g in groups]) * shots
    exp *= shots / exp.sum()
    statistic = float(((obs - exp) ** 2 / exp).sum())
    dof = len(groups) - 1
    return statistic, dof, float(stats.chi2.sf(statistic, dof))


def chi_square_power(expected, observed_freqs, shots: int, alpha_nominal: float = 0.05) -> float:
    """Post-hoc power of the goodness-of-fit test.

    Noncentrality is ``shots * sum((q - p)**2 / p)`` over the same bins the
    test uses, with ``q`` the observed frequencies.
    """
    expected = _validate(expected)
    q = np.asarray(observed_freqs, dtype=float)
    groups = _bin_groups(expected, shots)
    if len(groups) < 2:
        return float(alpha_nominal)
    p_b = np.array([expected[g].sum() for g in groups])
    q_b = np.array([q[g].sum() for g in groups])
    p_b /= p_b.sum()
    dof = len(groups) - 1
    nc = float(shots * ((q_b - p_b) ** 2 / p_b).sum())
    crit = stats.chi2.isf(alpha_nominal, dof)
    if nc == 0.0:
        return float(alpha_nominal)
    return float(min(1.0, max(0.0, stats.ncx2.sf(crit, dof, nc))))


def _decide(p: float, power: float | None, mode: Mode, th: TestThresholds) -> Decision | None:
    if mode is Mode.EARLY:
        if p < th.p_bug_early:
            return Decision.BUG
        if p >= th.p_nobug_early:
            return Decision.NO_BUG
        return None
    if p < th.p_bug_sufficient and power is not None and power >= th.power_bug_sufficient:
        return Decision.BUG
    if p >= th.p_nobug_sufficient:
        return Decision.NO_BUG
    return None


def run_adaptive_test(
    actual,
    expected,
    cost: int,
    mode: Mode,
    thresholds: TestThresholds,
    rng: np.random.Generator,
    segment: int = 0,
) -> TestVerdict:
    """Sample ``actual`` in growing batches until the verdict settles.

    ``cost`` is the number of gates one shot executes.
    """
    expected = _validate(expected)
    hist = MeasurementHistogram(np.zeros(expected.size, dtype=np.int64))
    p_value, power = 1.0, None
    for batch in thresholds.batches():
        hist = hist + sample_counts(actual, batch, rng)
        shots = hist.shots
        try:
            _, _, p_value = chi_square(hist, expected)
        except ImpossibleOutcome:
            return TestVerdict(Decision.BUG, 0.0, 1.0, shots, shots * cost, mode, segment, hist)
        power = None
        if mode is Mode.SUFFICIENT and p_value < thresholds.p_bug_sufficient:
            power = chi_square_power(
                expected, hist.counts / shots, shots, thresholds.alpha_nominal
            )
        decision = _decide(p_value, power, mode, thresholds)
        if decision is not None:
            return TestVerdict(decision, p_value, power, shots, shots * cost, mode, segment, hist)
    return TestVerdict(
        Decision.INCONCLUSIVE, p_value, power, hist.shots, hist.shots * cost, mode, segment, hist
    )


def adaptive_test(
    prog_under_test: QuantumProgram,
    oracle,
    x: int,
    mode: Mode,
    thresholds: TestThresholds | None = None,
    rng: np.random.Generator | None = None,
) -> TestVerdict:
    """Test prefix ``x`` of ``prog_under_test`` against an oracle.

    ``oracle`` is either a reference ``QuantumProgram`` or a callable mapping
    a segment index to its expected output distribution.
    """
    thresholds = thresholds or TestThresholds()
    rng = rng if rng is not None else np.random.default_rng()
    if isinstance(oracle, QuantumProgram):
        expected = exact_distribution(run_prefix(oracle, x))
    else:
        expected = np.asarray(oracle(x), dtype=float)
    actual = exact_distribution(run_prefix(prog_under_test, x))
    cost = prefix_cost(prog_under_test, x)
    return run_adaptive_test(actual, expected, cost, mode, thresholds, rng, segment=x)
