"""Cost-based binary search tree over segment indices."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .circuit import QuantumProgram


def split_imbalance(costs: Sequence[int], lo: int, hi: int, x: int) -> int:
    """``|sum(c[lo..x-1]) - sum(c[x+1..hi-1])|`` with 1-based ``costs``."""
    left = sum(costs[i - 1] for i in range(lo, x))
    right = sum(costs[i - 1] for i in range(x + 1, hi))
    return abs(left - right)


def select_middle(costs: Sequence[int], lo: int = 1, hi: int | None = None) -> int:
    """Index of the tested segment for target range ``[lo, hi]``.

    ``costs[i-1]`` is the full prefix cost of segment ``i``. Minimizes
    :func:`split_imbalance` over ``x`` in ``[lo, hi-1]``; ties go to the
    smaller ``x``.
    """
    hi = len(costs) if hi is None else hi
    if hi <= lo:
        raise ValueError(f"empty search range [{lo}, {hi}]")
    # running sums keep this linear in the range length
    left = 0
    right = sum(costs[i - 1] for i in range(lo + 1, hi))
    best_x, best = lo, abs(left - right)
    for x in range(lo + 1, hi):
        left += costs[x - 2]
        right -= costs[x - 1]
        val = abs(left - right)
        if val < best:
            best_x, best = x, val
    return best_x


@dataclass
class SearchNode:
    id: int
    lo: int
    hi: int
    middle: int | None = None
    left: SearchNode | None = field(default=None, repr=False)
    right: SearchNode | None = field(default=None, repr=False)
    depth: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.lo == self.hi

    @property
    def target_range(self) -> tuple[int, int]:
        return self.lo, self.hi

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "range": [self.lo, self.hi],
            "middle": self.middle,
            "left": self.left.id if self.left else None,
            "right": self.right.id if self.right else None,
        }


@dataclass
class SearchTree:
    root: SearchNode
    nodes: dict[int, SearchNode]

    def leaves(self) -> list[SearchNode]:
        out = []

        def walk(node):
            if node.is_leaf:
                out.append(node)
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return out

    def internal_nodes(self) -> list[SearchNode]:
        return [n for n in self.nodes.values() if not n.is_leaf]

    def depth(self) -> int:
        return max(n.depth for n in self.nodes.values())

    def to_json(self) -> str:
        return json.dumps([self.nodes[i].to_dict() for i in sorted(self.nodes)], indent=2)


def build_tree_from_costs(costs: Sequence[int], split=None) -> SearchTree:
    """Build the tree for prefix costs ``costs``; ``split(costs, lo, hi)`` picks middles.

    Node ids are assigned in preorder starting at 1.
    """
    split = split or select_middle
    if len(costs) < 2:
        raise ValueError("need at least two segments")
    nodes: dict[int, SearchNode] = {}

    def build(lo, hi, depth):
        node = SearchNode(len(nodes) + 1, lo, hi, depth=depth)
        nodes[node.id] = node
        if lo < hi:
            node.middle = split(costs, lo, hi)
            node.left = build(lo, node.middle, depth + 1)
            node.right = build(node.middle + 1, hi, depth + 1)
        return node

    root = build(1, len(costs), 0)
    return SearchTree(root, nodes)


def build_tree(prog: QuantumProgram) -> SearchTree:
    return build_tree_from_costs(prog.prefix_costs())


def naive_middle(costs: Sequence[int], lo: int, hi: int) -> int:
    return (lo + hi) // 2
