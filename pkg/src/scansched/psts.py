"""Hierarchical scan-based task scheduling across a hyper-grid.

Balancing recurses over the grid: at each level the sibling slices are
treated as hyper-nodes with aggregate load and power, slices holding more
than their power share become senders, the rest receivers. Every sender node
keeps a proportional prefix of its own units and the migrating remainder
forms one stream, concatenated in slice-rank then node-rank order, which is
partitioned across receivers by their deficits in rank order. A receiver
places incoming units by their offset inside its share through its own
normalized power intervals, independently of how it rebalances the units it
already holds. Tasks are indivisible: a task always follows its first work
unit.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from math import prod
from typing import Iterable, Mapping, Optional, Sequence

from .scan import ScanResult, exclusive_scan, scaled_weights, _as_fraction
from .topology import HyperGrid

__all__ = [
    "Role",
    "SliceSummary",
    "PlannedTask",
    "Move",
    "MigrationPlan",
    "RoutedStream",
    "StreamSegment",
    "LevelScans",
    "GroupScans",
    "classify_slices",
    "sender_split",
    "route_migrations",
    "hierarchical_scans",
    "plan",
    "apply",
]


class Role(Enum):
    SENDER = "sender"
    RECEIVER = "receiver"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class SliceSummary:
    rank: int
    load: int
    power: Fraction
    gamma: Fraction
    target: int
    role: Role

    @property
    def surplus(self) -> int:
        """Signed excess over the target; senders positive, receivers negative."""
        return self.load - self.target


@dataclass(frozen=True)
class PlannedTask:
    """A task as the planner sees it: size, packet count and current node."""

    id: str
    beta: int
    mu: int
    node: str


@dataclass(frozen=True)
class Move:
    task_id: str
    src: str
    dst: str


@dataclass(frozen=True)
class MigrationPlan:
    moves: tuple
    units: int
    packets: int

    def serialize(self) -> str:
        lines = [f"move {m.task_id} {m.src} {m.dst}" for m in self.moves]
        lines.append(f"summary units={self.units} packets={self.packets} moves={len(self.moves)}")
        return "\n".join(lines) + "\n"


def _apportion(total: int, weights: Sequence[int], weight_sum: int) -> list:
    """Integer shares of total proportional to weights.

    Floor shares first, then the largest fractional remainders absorb the
    leftover; remainder ties favor the lower index. Shares sum to total
    exactly and each is within one unit of the exact proportion.
    """
    if weight_sum <= 0:
        raise ValueError("weights must sum to a positive value")
    if total < 0:
        raise ValueError("cannot apportion a negative total")
    shares = []
    rems = []
    for w in weights:
        if w < 0:
            raise ValueError("negative weight")
        q, r = divmod(total * w, weight_sum)
        shares.append(q)
        rems.append(r)
    leftover = total - sum(shares)
    for i in sorted(range(len(weights)), key=lambda i: (-rems[i], i))[:leftover]:
        shares[i] += 1
    return shares


def classify_slices(loads: Sequence[int], powers: Sequence) -> tuple:
    """Per-slice summaries for one level: target, role and surplus.

    Targets apportion the level's total load by normalized slice power, so
    surpluses always sum to zero.
    """
    if len(loads) != len(powers):
        raise ValueError("loads and powers must agree in length")
    fr = [_as_fraction(p) for p in powers]
    if any(p < 0 for p in fr):
        raise ValueError("negative power")
    weights, _, weight_sum = scaled_weights(fr)
    if weight_sum == 0:
        raise ValueError("all slice powers are zero")
    total = sum(loads)
    targets = _apportion(total, weights, weight_sum)
    pi = sum(fr, Fraction(0))
    out = []
    for rank, (load, power, target) in enumerate(zip(loads, fr, targets)):
        if load < 0:
            raise ValueError("negative load")
        if load > target:
            role = Role.SENDER
        elif load < target:
            role = Role.RECEIVER
        else:
            role = Role.NEUTRAL
        out.append(
            SliceSummary(rank=rank, load=load, power=power, gamma=power / pi, target=target, role=role)
        )
    return tuple(out)


def sender_split(loads: Sequence[int], target: int) -> tuple:
    """Split a sender's per-node loads into kept and migrating unit counts.

    Each node keeps its proportional share of the slice target (floor plus
    largest-remainder top-up, ties to the lower rank); kept units are the
    node's first units in local order, the rest migrate.
    """
    total = sum(loads)
    if not 0 <= target <= total:
        raise ValueError(f"target {target} outside [0, {total}]")
    kept = _apportion(target, list(loads), total)
    migrating = tuple(l - k for l, k in zip(loads, kept))
    return tuple(kept), migrating


@dataclass(frozen=True)
class StreamSegment:
    receiver: int
    offset: int
    count: int


@dataclass(frozen=True)
class RoutedStream:
    """Routing of the concatenated migrating stream onto receivers.

    segments[i] lists, for source node i of the stream, contiguous runs of
    its migrating units as (receiver index, offset inside the receiver's
    share, unit count). start_offsets[i] is the offset of the node's first
    migrating unit inside its receiver's share.
    """

    segments: tuple
    start_offsets: tuple
    boundaries: tuple


def route_migrations(migrating: Sequence[int], deficits: Sequence[int]) -> RoutedStream:
    if sum(migrating) != sum(deficits):
        raise ValueError(
            f"stream of {sum(migrating)} units cannot fill deficits of {sum(deficits)}"
        )
    if any(m < 0 for m in migrating) or any(d < 0 for d in deficits):
        raise ValueError("negative unit count")
    bounds = [0]
    for d in deficits:
        bounds.append(bounds[-1] + d)
    total = bounds[-1]
    segments = []
    starts = []
    g = 0
    for m in migrating:
        r = bisect_right(bounds, g) - 1
        if r >= len(deficits):
            r = len(deficits) - 1
        starts.append(g - bounds[r])
        node_segments = []
        remaining = m
        while remaining > 0:
            r = bisect_right(bounds, g) - 1
            take = min(g + remaining, bounds[r + 1]) - g
            node_segments.append(StreamSegment(receiver=r, offset=g - bounds[r], count=take))
            g += take
            remaining -= take
        segments.append(tuple(node_segments))
    return RoutedStream(segments=tuple(segments), start_offsets=tuple(starts), boundaries=tuple(bounds))


@dataclass(frozen=True)
class GroupScans:
    loads: ScanResult
    powers: ScanResult


@dataclass(frozen=True)
class LevelScans:
    level: int
    groups: tuple


def hierarchical_scans(hg: HyperGrid, loads: Mapping, taus: Mapping) -> tuple:
    """Exclusive load and power scans for every level of the grid.

    Level 1 scans the nodes of each line; level k scans the k-1 dimensional
    sub-slice totals inside each k-dimensional group. The single group of the
    top level carries the grid totals W and Pi.
    """
    dims = hg.shape.dims
    d = len(dims)
    rank_loads = []
    rank_taus = []
    for nid in hg.placement:
        if nid is None:
            rank_loads.append(0)
            rank_taus.append(Fraction(0))
        else:
            rank_loads.append(loads.get(nid, 0))
            rank_taus.append(_as_fraction(taus[nid]))
    levels = []
    for level in range(1, d + 1):
        group_span = prod(dims[d - level:])
        sub_span = 1 if level == 1 else prod(dims[d - level + 1:])
        groups = []
        for gstart in range(0, hg.capacity, group_span):
            sub_loads = []
            sub_taus = []
            for sstart in range(gstart, gstart + group_span, sub_span):
                sub_loads.append(sum(rank_loads[sstart:sstart + sub_span]))
                sub_taus.append(sum(rank_taus[sstart:sstart + sub_span], Fraction(0)))
            groups.append(GroupScans(loads=exclusive_scan(sub_loads), powers=exclusive_scan(sub_taus)))
        levels.append(LevelScans(level=level, groups=tuple(groups)))
    return tuple(levels)


class _PlanContext:
    __slots__ = ("placement", "taus", "assignments", "trace")

    def __init__(self, placement, taus, trace) -> None:
        self.placement = placement
        self.taus = taus  # Fraction per rank, 0 for virtual cells
        self.assignments = []  # (task, dest node id) in emission order
        self.trace = trace


def _ceil_bounds(prefix: Sequence[int], weight_sum: int, total_units: int) -> list:
    """Interval boundaries ceil(prefix/weight_sum * total_units), plus the end."""
    bounds = [-((-p * total_units) // weight_sum) for p in prefix]
    bounds.append(total_units)
    return bounds


def _place_line(ctx: _PlanContext, start: int, length: int, node_tasks: Mapping, streams) -> None:
    ranks = range(start, start + length)
    taus = [ctx.taus[r] for r in ranks]
    weights, prefix, weight_sum = scaled_weights(taus)
    retained = []
    for r in ranks:
        retained.extend(node_tasks.get(r, ()))
    if weight_sum == 0:
        if retained or any(items for items, _ in streams):
            raise ValueError("tasks assigned to a line with no processing power")
        return
    w_retained = sum(t.beta for t in retained)
    line_trace = {"start": start, "retained": [], "streams": []} if ctx.trace is not None else None
    first_unit = 0
    for t in retained:
        pos = bisect_right(prefix, (first_unit * weight_sum) // w_retained) - 1
        first_unit += t.beta
        dest = ctx.placement[start + pos]
        ctx.assignments.append((t, dest))
        if line_trace is not None:
            line_trace["retained"].append((t.id, pos))
    for items, share in streams:
        stream_trace = []
        for t, offset in items:
            pos = bisect_right(prefix, (offset * weight_sum) // share) - 1
            dest = ctx.placement[start + pos]
            ctx.assignments.append((t, dest))
            if line_trace is not None:
                stream_trace.append((t.id, pos))
        if line_trace is not None:
            line_trace["streams"].append(stream_trace)
    if ctx.trace is not None:
        ctx.trace.append(("line", line_trace))


def _recurse(ctx: _PlanContext, dims: tuple, start: int, node_tasks: dict, streams: list) -> None:
    if len(dims) == 1:
        _place_line(ctx, start, dims[0], node_tasks, streams)
        return
    q = dims[0]
    sub_span = prod(dims[1:])
    slice_starts = [start + k * sub_span for k in range(q)]
    slice_powers = [
        sum((ctx.taus[r] for r in range(s, s + sub_span)), Fraction(0)) for s in slice_starts
    ]
    weights, prefix, weight_sum = scaled_weights(slice_powers)
    has_tasks = bool(node_tasks) or any(items for items, _ in streams)
    if weight_sum == 0:
        if has_tasks:
            raise ValueError("tasks assigned to a region with no processing power")
        return
    slice_loads = []
    for k, s in enumerate(slice_starts):
        slice_loads.append(
            sum(t.beta for r in range(s, s + sub_span) for t in node_tasks.get(r, ()))
        )
    w_group = sum(slice_loads)
    targets = _apportion(w_group, weights, weight_sum)

    receivers = [k for k in range(q) if slice_loads[k] < targets[k]]
    deficits = [targets[k] - slice_loads[k] for k in receivers]
    bounds = [0]
    for d_ in deficits:
        bounds.append(bounds[-1] + d_)

    kept_tasks: dict = {}
    received: dict = {k: [] for k in receivers}
    stream_base = 0
    route_trace = [] if ctx.trace is not None else None
    for k, s in enumerate(slice_starts):
        slice_ranks = range(s, s + sub_span)
        if slice_loads[k] <= targets[k]:
            for r in slice_ranks:
                if r in node_tasks:
                    kept_tasks[r] = node_tasks[r]
            continue
        node_loads = [sum(t.beta for t in node_tasks.get(r, ())) for r in slice_ranks]
        kept_counts, migrating = sender_split(node_loads, targets[k])
        for idx, r in enumerate(slice_ranks):
            tasks_here = node_tasks.get(r, ())
            if not tasks_here:
                continue
            keep_here = kept_counts[idx]
            staying = []
            f = 0
            for t in tasks_here:
                if f < keep_here:
                    staying.append(t)
                else:
                    g = stream_base + (f - keep_here)
                    ri = bisect_right(bounds, g) - 1
                    received[receivers[ri]].append((t, g - bounds[ri]))
                    if route_trace is not None:
                        route_trace.append((t.id, g, receivers[ri]))
                f += t.beta
            if staying:
                kept_tasks[r] = staying
            stream_base += migrating[idx]
    if ctx.trace is not None:
        ctx.trace.append(("route", {"start": start, "dims": dims, "stream": route_trace}))

    # Partition incoming streams across the slices by power intervals, then
    # hand each slice its shares plus any sibling-migration stream.
    sub_streams: list = [[] for _ in range(q)]
    for items, share in streams:
        cuts = _ceil_bounds(prefix, weight_sum, share)
        parts: list = [[] for _ in range(q)]
        for t, offset in items:
            k = bisect_right(cuts, offset) - 1
            if k >= q:
                k = q - 1
            parts[k].append((t, offset - cuts[k]))
        for k in range(q):
            width = cuts[k + 1] - cuts[k]
            if parts[k]:
                sub_streams[k].append((parts[k], width))
    for ri, k in enumerate(receivers):
        if received[k]:
            sub_streams[k].append((received[k], deficits[ri]))

    for k, s in enumerate(slice_starts):
        sub_tasks = {r: kept_tasks[r] for r in range(s, s + sub_span) if r in kept_tasks}
        _recurse(ctx, dims[1:], s, sub_tasks, sub_streams[k])


def plan(hg: HyperGrid, tasks: Sequence, taus: Mapping, *, trace: Optional[list] = None) -> MigrationPlan:
    """Compute the migration plan balancing tasks across the grid.

    Args:
        hg: grid with node placement.
        tasks: PlannedTask sequence; every task must sit on a placed real node.
        taus: processing power per node id.
        trace: optional list collecting per-line placement details for tests.

    The plan is a pure function of its inputs: node order follows grid rank,
    unit indexing inside a node follows task-id order.
    """
    rank_by_id = hg.rank_by_id
    rank_taus = []
    for nid in hg.placement:
        rank_taus.append(_as_fraction(taus[nid]) if nid is not None else Fraction(0))
    seen = set()
    node_tasks: dict = {}
    for t in tasks:
        if t.id in seen:
            raise ValueError(f"duplicate task id {t.id!r}")
        seen.add(t.id)
        if not isinstance(t.beta, int) or t.beta < 1:
            raise ValueError(f"task {t.id!r} must have a positive integer size")
        rank = rank_by_id.get(t.node)
        if rank is None:
            raise ValueError(f"task {t.id!r} sits on unplaced node {t.node!r}")
        if rank_taus[rank] == 0:
            raise ValueError(f"task {t.id!r} sits on a powerless node {t.node!r}")
        node_tasks.setdefault(rank, []).append(t)
    for lst in node_tasks.values():
        lst.sort(key=lambda t: t.id)
    ctx = _PlanContext(hg.placement, rank_taus, trace)
    _recurse(ctx, tuple(hg.shape.dims), 0, node_tasks, [])
    moves = tuple(
        Move(task_id=t.id, src=t.node, dst=dest)
        for t, dest in ctx.assignments
        if dest != t.node
    )
    units = 0
    packets = 0
    moved_ids = {m.task_id for m in moves}
    for t in tasks:
        if t.id in moved_ids:
            units += t.beta
            packets += t.mu
    return MigrationPlan(moves=moves, units=units, packets=packets)


def apply(plan_: MigrationPlan, tasks: Sequence, nodes: Optional[Iterable] = None) -> tuple:
    """Execute a plan on a task set, returning the relocated tasks.

    Order and multiset of tasks are preserved; only node fields change.
    """
    by_id = {}
    for t in tasks:
        if t.id in by_id:
            raise ValueError(f"duplicate task id {t.id!r}")
        by_id[t.id] = t
    known = set(nodes) if nodes is not None else None
    dest = {}
    for m in plan_.moves:
        if m.task_id in dest:
            raise ValueError(f"task {m.task_id!r} moved twice")
        t = by_id.get(m.task_id)
        if t is None:
            raise ValueError(f"plan references unknown task {m.task_id!r}")
        if t.node != m.src:
            raise ValueError(f"task {m.task_id!r} is on {t.node!r}, not {m.src!r}")
        if m.src == m.dst:
            raise ValueError(f"task {m.task_id!r} moves to its own node")
        if known is not None and m.dst not in known:
            raise ValueError(f"move destination {m.dst!r} is not a known node")
        dest[m.task_id] = m.dst
    return tuple(replace(t, node=dest[t.id]) if t.id in dest else t for t in tasks)
