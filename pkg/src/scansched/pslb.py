"""Positional scan load balancing along one line of nodes.

The W work units of a line are indexed 0..W-1 in node-rank order. A unit with
index u belongs to the node whose normalized power interval contains u/W:
destination(u) is the greatest position j with lam[j] <= u/W. Zero-power
positions own empty intervals and are never selected. Comparisons cross-
multiply integers, so boundaries are exact.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .scan import PowerProfile

__all__ = [
    "LineState",
    "UnitMove",
    "UnitMovePlan",
    "unit_destination",
    "line_targets",
    "balance_line",
    "assign_tasks",
]


def unit_destination(u: int, lam: Sequence, w_total: int) -> int:
    """Destination position of work unit u among len(lam) positions.

    Args:
        u: global unit index, 0 <= u < w_total.
        lam: exclusive scan of normalized powers, lam[0] == 0, non-decreasing.
        w_total: total work units on the line, > 0.
    """
    if w_total <= 0:
        raise ValueError("total work must be positive")
    if not 0 <= u < w_total:
        raise ValueError(f"unit index {u} outside [0, {w_total})")
    if not lam or lam[0] != 0:
        raise ValueError("lam must start at 0")
    f = Fraction(u, w_total)
    return bisect_right(lam, f) - 1


def _destination_scaled(numerator: int, denominator: int, profile: PowerProfile) -> int:
    # greatest j with scaled_prefix[j] / scaled_total <= numerator / denominator
    x = (numerator * profile.scaled_total) // denominator
    return bisect_right(profile.scaled_prefix, x) - 1


def line_targets(profile: PowerProfile, w_total: int) -> tuple:
    """Exact per-position unit counts for a total of w_total units.

    Position j receives the number of unit indices falling inside its
    interval, which keeps every count within one unit of the ideal share
    w_total * gamma[j] and sums to w_total exactly.
    """
    if w_total < 0:
        raise ValueError("total work must be non-negative")
    total = profile.scaled_total
    bounds = [-((-p * w_total) // total) for p in profile.scaled_prefix]
    bounds.append(w_total)
    return tuple(bounds[j + 1] - bounds[j] for j in range(len(profile.scaled_prefix)))


@dataclass(frozen=True)
class LineState:
    """Current unit loads of one line, rank order."""

    nodes: tuple
    loads: tuple
    profile: PowerProfile

    def __post_init__(self) -> None:
        if not (len(self.nodes) == len(self.loads) == len(self.profile.taus)):
            raise ValueError("nodes, loads and profile must agree in length")
        if any(l < 0 for l in self.loads):
            raise ValueError("negative load")
        for nid, load, tau in zip(self.nodes, self.loads, self.profile.taus):
            if tau == 0 and load != 0:
                raise ValueError(f"virtual position {nid!r} carries load")

    @property
    def total(self) -> int:
        return sum(self.loads)


@dataclass(frozen=True)
class UnitMove:
    src: int
    dst: int
    count: int


@dataclass(frozen=True)
class UnitMovePlan:
    moves: tuple

    @property
    def moved_units(self) -> int:
        return sum(m.count for m in self.moves)


def balance_line(state: LineState) -> UnitMovePlan:
    """Unit-level moves that turn the current loads into line_targets.

    Works by intersecting each source node's current unit interval with each
    destination's target interval, so a balanced line yields no moves and the
    plan is idempotent.
    """
    w = state.total
    if w == 0:
        return UnitMovePlan(moves=())
    targets = line_targets(state.profile, w)
    t_bounds = [0]
    for t in targets:
        t_bounds.append(t_bounds[-1] + t)
    moves = []
    cursor = 0
    dst = 0
    for src, load in enumerate(state.loads):
        lo, hi = cursor, cursor + load
        cursor = hi
        while lo < hi:
            while t_bounds[dst + 1] <= lo:
                dst += 1
            take = min(hi, t_bounds[dst + 1]) - lo
            if dst != src:
                moves.append(UnitMove(src=src, dst=dst, count=take))
            lo += take
    return UnitMovePlan(moves=tuple(moves))


def assign_tasks(tasks: Sequence, profile: PowerProfile, w_total: int) -> list:
    """Destination position for each indivisible task on the line.

    tasks must already be ordered by (current node rank, task id); their unit
    indices are assigned cumulatively from the beta values and each task goes
    wherever its first unit goes. The resulting per-position load deviates
    from the ideal share by strictly less than the largest beta on the line.

    Returns a list of positions aligned with the input order.
    """
    total_beta = sum(t.beta for t in tasks)
    if total_beta != w_total:
        raise ValueError(f"declared total {w_total} but tasks sum to {total_beta}")
    out = []
    first_unit = 0
    for t in tasks:
        if t.beta <= 0:
            raise ValueError(f"task {t.id!r} has non-positive size")
        out.append(_destination_scaled(first_unit, w_total, profile))
        first_unit += t.beta
    return out
