"""Posterior probability that an early-determined edge will be revisited."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ReturnRiskQuery:
    """An early decision at a node testing ``s_x`` of ``l`` segments.

    ``w`` counts the L edges from that node's edge to the end of the path,
    which has ``path_length`` edges in total.
    """

    l: int
    x: int
    w: int
    alpha: float
    beta: float
    path_length: int | None = None

    def __post_init__(self):
        if not 1 <= self.x <= self.l - 1:
            raise ValueError(f"x must lie in 1..l-1, got x={self.x}, l={self.l}")
        if not 0 <= self.alpha < 1:
            raise ValueError("alpha must lie in [0, 1)")
        if not 0 <= self.beta < 1:
            raise ValueError("beta must lie in [0, 1)")
        if self.w < 1:
            raise ValueError("w must be >= 1")
        if self.path_length is not None and self.w > self.path_length:
            raise ValueError("w cannot exceed the path length")


def posterior_return_probability(q: ReturnRiskQuery) -> float:
    """``((l - x) / l) * (alpha / (1 - beta))**w``, clipped to [0, 1].

    The marginal is approximated by its largest term, the path that narrows
    down the bug correctly; the ``(1 - alpha)`` factors of the remaining
    edges cancel, so the path length does not enter.
    """
    prior = (q.l - q.x) / q.l
    value = prior * (q.alpha / (1.0 - q.beta)) ** q.w
    return min(1.0, max(0.0, value))


def risk_table(l: int, x: int, ws, alphas, betas) -> list[dict]:
    rows = []
    for w in ws:
        for a in alphas:
            for b in betas:
                p = posterior_return_probability(ReturnRiskQuery(l, x, w, a, b))
                rows.append({"l": l, "x": x, "w": w, "alpha": a, "beta": b, "p_return": p})
    return rows
