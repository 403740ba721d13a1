"""Random programs, gate-replacement bugs, and the three-method comparison."""
from __future__ import annotations

import csv
import io
import json
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .circuit import Gate, GateKind, QuantumProgram
from .locator import (
    LocateResult,
    LocatorConfig,
    Method,
    StatisticalTester,
    locate,
    locate_linear,
    locate_naive_binary,
)
from .simulator import prefix_distributions
from .stattest import TestThresholds
from .tree import build_tree

log = logging.getLogger(__name__)

GATE_KINDS = list(GateKind)


@dataclass(frozen=True)
class GenSpec:
    qubit_count: int = 5
    segment_count: int = 8
    gates_per_segment: tuple[int, int] = (4, 8)
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "gates_per_segment", tuple(self.gates_per_segment))
        lo, hi = self.gates_per_segment
        if self.qubit_count < 1:
            raise ValueError("qubit_count must be >= 1")
        if self.segment_count < 2:
            raise ValueError("segment_count must be >= 2")
        if not 1 <= lo <= hi:
            raise ValueError(f"bad gates_per_segment range {self.gates_per_segment}")

    @classmethod
    def from_dict(cls, d: dict) -> GenSpec:
        return cls(**d)


def generate_program(spec: GenSpec, rng: np.random.Generator | None = None) -> QuantumProgram:
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    n = spec.qubit_count
    kinds = [k for k in GATE_KINDS if k.arity <= n]
    lo, hi = spec.gates_per_segment
    segments = []
    for _ in range(spec.segment_count):
        gates = []
        for _ in range(int(rng.integers(lo, hi + 1))):
            kind = kinds[int(rng.integers(len(kinds)))]
            qubits = rng.choice(n, size=kind.arity, replace=False)
            gates.append(Gate(kind, tuple(int(q) for q in qubits)))
        segments.append(gates)
    return QuantumProgram.from_gates(n, segments)


@dataclass(frozen=True)
class InjectedBug:
    segment: int
    gate_position: int
    original: Gate
    replacement: Gate
    ground_truth_segment: int

    def to_dict(self) -> dict:
        return {
            "segment": self.segment,
            "gate_position": self.gate_position,
            "original": str(self.original),
            "replacement": str(self.replacement),
            "ground_truth_segment": self.ground_truth_segment,
        }


class InjectionFailed(RuntimeError):
    pass


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - q).sum())


def ground_truth_segment(reference: QuantumProgram, mutant: QuantumProgram, delta: float) -> int | None:
    """Smallest prefix whose output distribution differs by more than ``delta`` in TVD."""
    for x, (p, q) in enumerate(
        zip(prefix_distributions(reference), prefix_distributions(mutant)), start=1
    ):
        if total_variation(p, q) > delta:
            return x
    return None


def mutate(prog: QuantumProgram, segment: int, position: int, kind: GateKind, delta: float = 0.05):
    """Replace one gate's kind, keeping its qubits.

    Returns ``(mutant, bug)``, or ``None`` if no prefix distribution moves by
    more than ``delta``.
    """
    original = prog.segment(segment).gates[position]
    if kind is original.kind:
        raise ValueError("replacement must differ from the original gate")
    replacement = Gate(kind, original.qubits)
    mutant = prog.replace_gate(segment, position, replacement)
    truth = ground_truth_segment(prog, mutant, delta)
    if truth is None:
        return None
    return mutant, InjectedBug(segment, position, original, replacement, truth)


def try_inject_bug(prog: QuantumProgram, rng: np.random.Generator, delta: float = 0.05):
    """One random gate replacement; ``None`` when rejected."""
    segment = int(rng.integers(1, prog.length + 1))
    gates = prog.segment(segment).gates
    position = int(rng.integers(len(gates)))
    original = gates[position]
    candidates = [k for k in GATE_KINDS if k.arity == original.kind.arity and k is not original.kind]
    if not candidates:
        return None
    kind = candidates[int(rng.integers(len(candidates)))]
    return mutate(prog, segment, position, kind, delta)


def inject_bug(
    prog: QuantumProgram,
    rng: np.random.Generator,
    delta: float = 0.05,
    max_attempts: int = 100,
) -> tuple[QuantumProgram, InjectedBug]:
    for _ in range(max_attempts):
        result = try_inject_bug(prog, rng, delta)
        if result is not None:
            return result
    raise InjectionFailed(f"no Z-visible bug after {max_attempts} attempts")


@dataclass(frozen=True)
class ExperimentConfig:
    gen: GenSpec = field(default_factory=GenSpec)
    thresholds: TestThresholds = field(default_factory=TestThresholds)
    lookback_run_length: int = 3
    max_restarts: int | None = None
    gate_budget: int | None = None
    trials: int = 100
    delta: float = 0.05
    seed: int = 0
    max_inject_attempts: int = 100

    @property
    def locator(self) -> LocatorConfig:
        return LocatorConfig(
            self.lookback_run_length, self.thresholds, self.max_restarts, self.gate_budget
        )

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        d = dict(d)
        if "gen" in d:
            d["gen"] = GenSpec.from_dict(d["gen"])
        if "thresholds" in d:
            d["thresholds"] = TestThresholds(**d["thresholds"])
        if "locator" in d:
            d.update(d.pop("locator"))
        return cls(**d)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gen"]["gates_per_segment"] = list(self.gen.gates_per_segment)
        return d


METHODS = (Method.COST_BINARY, Method.NAIVE_BINARY, Method.LINEAR)


def trial_seeds(master: int, trial: int) -> dict[str, np.random.SeedSequence]:
    """Independent per-trial streams, derived by counter from the master seed."""
    gen, inject, *methods = np.random.SeedSequence(master, spawn_key=(trial,)).spawn(5)
    return {"generate": gen, "inject": inject, **{m.value: s for m, s in zip(METHODS, methods)}}


def run_methods(mutant, reference, config: ExperimentConfig, seeds) -> dict[Method, LocateResult]:
    th = config.thresholds
    tree = build_tree(reference)

    def tester(method):
        return StatisticalTester(mutant, reference, th, np.random.default_rng(seeds[method.value]))

    return {
        Method.COST_BINARY: locate(
            mutant, reference, tree, config.locator, tester=tester(Method.COST_BINARY)
        ),
        Method.NAIVE_BINARY: locate_naive_binary(
            mutant, reference, tester=tester(Method.NAIVE_BINARY), gate_budget=config.gate_budget
        ),
        Method.LINEAR: locate_linear(
            mutant, reference, tester=tester(Method.LINEAR), gate_budget=config.gate_budget
        ),
    }


@dataclass
class TrialRecord:
    trial: int
    skipped: bool
    bug: InjectedBug | None = None
    results: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "trial": self.trial,
            "skipped": self.skipped,
            "bug": self.bug.to_dict() if self.bug else None,
            "results": self.results,
        }


def run_trial(config: ExperimentConfig, trial: int) -> TrialRecord:
    seeds = trial_seeds(config.seed, trial)
    reference = generate_program(config.gen, np.random.default_rng(seeds["generate"]))
    try:
        mutant, bug = inject_bug(
            reference,
            np.random.default_rng(seeds["inject"]),
            config.delta,
            config.max_inject_attempts,
        )
    except InjectionFailed as exc:
        log.warning("trial %d skipped: %s", trial, exc)
        return TrialRecord(trial, skipped=True)
    results = {}
    for method, res in run_methods(mutant, reference, config, seeds).items():
        res.success = res.located_segment == bug.ground_truth_segment
        results[method.value] = res.to_dict()
    return TrialRecord(trial, False, bug, results)


def _run_trial_args(args):
    return run_trial(*args)


@dataclass
class MethodSummary:
    method: str
    trials: int
    successes: int
    success_prob: float
    mean_gates: float | None
    std_gates: float | None


def summarize(records: list[TrialRecord]) -> list[MethodSummary]:
    """Per-method success rate and cost statistics over successful trials.

    ``std_gates`` is the population standard deviation.
    """
    done = [r for r in records if not r.skipped]
    out = []
    for m in METHODS:
        gates = [r.results[m.value]["trace"]["total_gates"] for r in done if r.results[m.value]["success"]]
        out.append(
            MethodSummary(
                m.value,
                len(done),
                len(gates),
                len(gates) / len(done) if done else 0.0,
                statistics.fmean(gates) if gates else None,
                statistics.pstdev(gates) if gates else None,
            )
        )
    return out


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    summary: list[MethodSummary]
    records: list[TrialRecord]

    def method(self, name) -> MethodSummary:
        name = name.value if isinstance(name, Method) else name
        return next(s for s in self.summary if s.method == name)

    @property
    def skipped(self) -> int:
        return sum(r.skipped for r in self.records)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "summary": [asdict(s) for s in self.summary],
            "skipped_trials": [r.trial for r in self.records if r.skipped],
            "trials": [r.to_dict() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["method", "trials", "successes", "success_prob", "mean_gates", "std_gates"]
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        for s in self.summary:
            writer.writerow(asdict(s))
        return buf.getvalue()


def run_experiment(config: ExperimentConfig, parallelism: int = 1) -> ExperimentReport:
    args = [(config, t) for t in range(config.trials)]
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(_run_trial_args, args, chunksize=max(1, len(args) // (4 * parallelism))))
    else:
        records = [run_trial(*a) for a in args]
    return ExperimentReport(config, summarize(records), records)
