"""Locate the buggy segment of a segmented quantum program."""
from .circuit import (
    Gate,
    GateKind,
    ProgramError,
    QuantumProgram,
    Segment,
    gate_count,
    parse_program,
    prefix_cost,
    serialize_program,
)
from .locator import (
    ExactTester,
    LocateResult,
    LocatorConfig,
    Method,
    StatisticalTester,
    locate,
    locate_linear,
    locate_naive_binary,
)
from .return_risk import ReturnRiskQuery, posterior_return_probability
from .stattest import (
    Decision,
    Mode,
    TestThresholds,
    TestVerdict,
    adaptive_test,
    chi_square,
    chi_square_power,
)
from .tree import SearchNode, SearchTree, build_tree, select_middle

__version__ = "0.1.0"
