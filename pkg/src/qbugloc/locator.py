"""Locating the buggy segment: cost-based search plus the naive baselines.

The cost-based search descends the tree using relaxed (early) tests, then
confirms the candidate at a leaf with full-accuracy tests of ``s_{x-1}`` and
``s_x``. A run of ``lookback_run_length`` same-direction edges triggers a
full-accuracy re-test of the last opposite edge. A refuted edge is pinned to
its corrected direction and the descent restarts from the root, reusing
every verdict already measured.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circuit import QuantumProgram
from .simulator import prefix_distributions
from .stattest import Decision, Mode, TestThresholds, TestVerdict, run_adaptive_test
from .tree import SearchTree, build_tree, build_tree_from_costs, naive_middle

log = logging.getLogger(__name__)

Tester = Callable[[int, Mode], TestVerdict]

LEFT, RIGHT = "L", "R"


class Method(str, enum.Enum):
    COST_BINARY = "CostBinary"
    NAIVE_BINARY = "NaiveBinary"
    LINEAR = "Linear"


@dataclass(frozen=True)
class LocatorConfig:
    lookback_run_length: int = 3
    thresholds: TestThresholds = field(default_factory=TestThresholds)
    max_restarts: int | None = None  # None means the segment count
    gate_budget: int | None = None  # optional cap on total executed gates per run

    def __post_init__(self):
        if self.lookback_run_length < 1:
            raise ValueError("lookback_run_length must be >= 1")


@dataclass
class Edge:
    node: int
    segment: int
    direction: str
    verdict: TestVerdict
    confirmed: bool = False
    pinned: bool = False

    def to_dict(self) -> dict:
        v = self.verdict
        return {
            "node": self.node,
            "segment": self.segment,
            "direction": self.direction,
            "p": v.p_value,
            "power": v.power,
            "shots": v.shots_used,
            "mode": v.mode.value,
            "confirmed": self.confirmed,
            "pinned": self.pinned,
        }


@dataclass
class TestRecord:
    purpose: str  # descent, lookback, finalize, linear
    verdict: TestVerdict

    __test__ = False


@dataclass
class SearchTrace:
    path: list[Edge] = field(default_factory=list)
    tests: list[TestRecord] = field(default_factory=list)
    restarts: int = 0
    lookbacks: int = 0
    total_gates: int = 0

    def record(self, purpose: str, verdict: TestVerdict) -> None:
        self.tests.append(TestRecord(purpose, verdict))
        self.total_gates += verdict.gates_executed

    def to_dict(self) -> dict:
        return {
            "edges": [e.to_dict() for e in self.path],
            "tests": [{"purpose": t.purpose, **t.verdict.to_dict()} for t in self.tests],
            "restarts": self.restarts,
            "lookbacks": self.lookbacks,
            "total_gates": self.total_gates,
        }


@dataclass
class LocateResult:
    located_segment: int | None
    trace: SearchTrace
    method: Method
    success: bool | None = None
    reason: str = ""

    @property
    def failed(self) -> bool:
        return self.located_segment is None

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "located_segment": self.located_segment,
            "success": self.success,
            "reason": self.reason,
            "trace": self.trace.to_dict(),
        }


class StatisticalTester:
    """Adaptive chi-square tests of ``program`` prefixes against ``reference``."""

    def __init__(self, program, reference, thresholds=None, rng=None):
        check_segmentation(program, reference)
        self.actual = prefix_distributions(program)
        self.expected = prefix_distributions(reference)
        self.costs = program.prefix_costs()
        self.thresholds = thresholds or TestThresholds()
        self.rng = rng if rng is not None else np.random.default_rng()

    def __call__(self, x: int, mode: Mode) -> TestVerdict:
        return run_adaptive_test(
            self.actual[x - 1],
            self.expected[x - 1],
            self.costs[x - 1],
            mode,
            self.thresholds,
            self.rng,
            segment=x,
        )


class ExactTester:
    """Error-free verdicts from exact distribution comparison, one shot per test."""

    def __init__(self, program, reference, tol: float = 1e-9):
        check_segmentation(program, reference)
        self.actual = prefix_distributions(program)
        self.expected = prefix_distributions(reference)
        self.costs = program.prefix_costs()
        self.tol = tol

    def __call__(self, x: int, mode: Mode) -> TestVerdict:
        tvd = 0.5 * np.abs(self.actual[x - 1] - self.expected[x - 1]).sum()
        bug = tvd > self.tol
        return TestVerdict(
            Decision.BUG if bug else Decision.NO_BUG,
            0.0 if bug else 1.0,
            1.0 if bug else None,
            1,
            self.costs[x - 1],
            mode,
            segment=x,
        )


def check_segmentation(program: QuantumProgram, reference: QuantumProgram) -> None:
    if program.qubit_count != reference.qubit_count:
        raise ValueError(
            f"qubit counts differ: {program.qubit_count} vs {reference.qubit_count}"
        )
    if program.gate_counts() != reference.gate_counts():
        raise ValueError("programs do not share the same segmentation")


class _Restart(Exception):
    pass


class _Failure(Exception):
    pass


class _CostBinarySearch:
    def __init__(self, tree: SearchTree, config: LocatorConfig, tester: Tester, length: int):
        self.tree = tree
        self.config = config
        self.tester = tester
        self.length = length
        self.by_middle = {n.middle: n for n in tree.internal_nodes()}
        self.edges: dict[int, Edge] = {}
        self.sufficient: dict[int, TestVerdict] = {}
        self.trace = SearchTrace()

    def run(self) -> LocateResult:
        max_restarts = self.length if self.config.max_restarts is None else self.config.max_restarts
        while True:
            try:
                x = self._descend()
                self._finalize(x)
            except _Restart:
                self.trace.restarts += 1
                if self.trace.restarts > max_restarts:
                    return self._fail("too many restarts")
                continue
            except _Failure as exc:
                return self._fail(str(exc))
            return LocateResult(x, self.trace, Method.COST_BINARY)

    def _fail(self, reason: str) -> LocateResult:
        log.debug("cost-based search failed: %s", reason)
        return LocateResult(None, self.trace, Method.COST_BINARY, reason=reason)

    def _measure(self, x: int, mode: Mode, purpose: str) -> TestVerdict:
        verdict = self.tester(x, mode)
        self.trace.record(purpose, verdict)
        if verdict.decision is Decision.INCONCLUSIVE:
            raise _Failure(f"inconclusive test of s_{x}")
        budget = self.config.gate_budget
        if budget is not None and self.trace.total_gates > budget:
            raise _Failure("gate budget exhausted")
        return verdict

    def _sufficient(self, x: int, purpose: str) -> TestVerdict:
        if x not in self.sufficient:
            self.sufficient[x] = self._measure(x, Mode.SUFFICIENT, purpose)
        return self.sufficient[x]

    def _edge(self, node) -> Edge:
        if node.id not in self.edges:
            verdict = self._measure(node.middle, Mode.EARLY, "descent")
            direction = LEFT if verdict.decision is Decision.BUG else RIGHT
            self.edges[node.id] = Edge(node.id, node.middle, direction, verdict)
        return self.edges[node.id]

    def _descend(self) -> int:
        path = self.trace.path = []
        node = self.tree.root
        while not node.is_leaf:
            edge = self._edge(node)
            path.append(edge)
            self._look_back(path)
            node = node.left if edge.direction == LEFT else node.right
        return node.lo

    def _look_back(self, path: list[Edge]) -> None:
        k = self.config.lookback_run_length
        if len(path) < k:
            return
        direction = path[-1].direction
        if any(e.direction != direction for e in path[-k:]):
            return
        opposite = next((e for e in reversed(path) if e.direction != direction), None)
        if opposite is None or opposite.confirmed:
            return
        self.trace.lookbacks += 1
        verdict = self._sufficient(opposite.segment, "lookback")
        self._settle(opposite.segment, verdict)

    def _settle(self, x: int, verdict: TestVerdict) -> None:
        """Confirm or pin the edge of the node testing ``s_x``; restart if it flips."""
        node = self.by_middle[x]
        edge = self.edges[node.id]
        direction = LEFT if verdict.decision is Decision.BUG else RIGHT
        if direction == edge.direction:
            edge.confirmed = True
            return
        log.debug("edge at node %d (s_%d) refuted, pinning %s", node.id, x, direction)
        self.edges[node.id] = Edge(node.id, x, direction, verdict, confirmed=True, pinned=True)
        raise _Restart

    def _finalize(self, x: int) -> None:
        if x > 1:
            self._settle(x - 1, self._sufficient(x - 1, "finalize"))
        verdict = self._sufficient(x, "finalize")
        if x == self.length:
            if verdict.decision is not Decision.BUG:
                raise _Failure(f"no bug detected at s_{x}")
            return
        self._settle(x, verdict)


def locate(
    prog_under_test: QuantumProgram,
    reference_prog: QuantumProgram,
    tree: SearchTree | None = None,
    config: LocatorConfig | None = None,
    rng: np.random.Generator | None = None,
    tester: Tester | None = None,
) -> LocateResult:
    """Cost-based binary search with early determination, finalization and looking back."""
    check_segmentation(prog_under_test, reference_prog)
    config = config or LocatorConfig()
    tree = tree or build_tree(reference_prog)
    if tester is None:
        tester = StatisticalTester(prog_under_test, reference_prog, config.thresholds, rng)
    return _CostBinarySearch(tree, config, tester, reference_prog.length).run()


def _sufficient_only(method: Method, tester: Tester, segments, budget=None):
    """Shared loop for the baselines: ``segments`` is a generator fed the last verdict."""
    trace = SearchTrace()
    verdict = None
    step = 0
    try:
        while True:
            x = segments.send(verdict)
            step += 1
            verdict = tester(x, Mode.SUFFICIENT)
            trace.record("baseline", verdict)
            if verdict.decision is Decision.INCONCLUSIVE:
                return LocateResult(None, trace, method, reason=f"inconclusive test of s_{x}")
            if budget is not None and trace.total_gates > budget:
                return LocateResult(None, trace, method, reason="gate budget exhausted")
            direction = LEFT if verdict.decision is Decision.BUG else RIGHT
            trace.path.append(Edge(step, x, direction, verdict, confirmed=True))
    except StopIteration as stop:
        located = stop.value
    if located is None:
        return LocateResult(None, trace, method, reason="no bug detected")
    return LocateResult(located, trace, method)


def _linear_order(length):
    for x in range(1, length + 1):
        verdict = yield x
        if verdict.decision is Decision.BUG:
            return x
    return None


def _bisect_order(tree: SearchTree):
    node = tree.root
    while not node.is_leaf:
        verdict = yield node.middle
        node = node.left if verdict.decision is Decision.BUG else node.right
    return node.lo


def locate_linear(
    prog_under_test: QuantumProgram,
    reference_prog: QuantumProgram,
    thresholds: TestThresholds | None = None,
    rng: np.random.Generator | None = None,
    tester: Tester | None = None,
    gate_budget: int | None = None,
) -> LocateResult:
    """Test ``s_1, s_2, ...`` at full accuracy; the first bug verdict wins."""
    check_segmentation(prog_under_test, reference_prog)
    if tester is None:
        tester = StatisticalTester(prog_under_test, reference_prog, thresholds, rng)
    return _sufficient_only(
        Method.LINEAR, tester, _linear_order(reference_prog.length), gate_budget
    )


def locate_naive_binary(
    prog_under_test: QuantumProgram,
    reference_prog: QuantumProgram,
    thresholds: TestThresholds | None = None,
    rng: np.random.Generator | None = None,
    tester: Tester | None = None,
    gate_budget: int | None = None,
) -> LocateResult:
    """Plain bisection on segment indices, every test at full accuracy."""
    check_segmentation(prog_under_test, reference_prog)
    if tester is None:
        tester = StatisticalTester(prog_under_test, reference_prog, thresholds, rng)
    tree = build_tree_from_costs(reference_prog.prefix_costs(), split=naive_middle)
    return _sufficient_only(Method.NAIVE_BINARY, tester, _bisect_order(tree), gate_budget)
