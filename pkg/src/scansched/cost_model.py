"""Closed-form balancing cost model and crossover estimation.

One balancing pass over a grid of shape [p_1, ..., p_d] takes
2 * (p_1 + ... + p_d - d) communication steps: every level runs one gather
scan and one distribution sweep along lines of p_i nodes, each p_i - 1 hops.
A step costs p + q seconds (transfer plus bookkeeping), so dimension choice
alone decides the cost for a fixed node budget; the hypercube-style shape of
ceil(log2 n) binary extents is the minimum.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from statistics import median
from typing import Optional, Sequence

from .scan import _as_fraction
from .topology import ClusterGraph, GridShape, HyperGrid, embed, hypercube_shape, optimal_dimension
from .workload import TaskSpec

__all__ = [
    "StepCosts",
    "algorithm_steps",
    "algorithm_cost",
    "optimal_cost",
    "ShapeCost",
    "OptimalityReport",
    "verify_optimality",
    "calibrate_costs",
    "ConcentrateScenario",
    "BurstScenario",
    "CrossoverQuery",
    "CrossoverResult",
    "estimate_crossover",
]


@dataclass(frozen=True)
class StepCosts:
    """Per-step transfer cost p and bookkeeping cost q, seconds."""

    p: Fraction
    q: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _as_fraction(self.p))
        object.__setattr__(self, "q", _as_fraction(self.q))
        if self.p < 0 or self.q < 0:
            raise ValueError("step costs must be non-negative")

    @property
    def per_step(self) -> Fraction:
        return self.p + self.q


def algorithm_steps(shape: GridShape) -> int:
    return 2 * (sum(shape.dims) - shape.d)


def algorithm_cost(shape: GridShape, costs: StepCosts) -> Fraction:
    """Seconds for one balancing pass over the given shape."""
    return algorithm_steps(shape) * costs.per_step


def optimal_cost(n_real: int, costs: StepCosts) -> Fraction:
    """Cost of the best shape for n_real nodes: 2 * ceil(log2 n) steps."""
    if n_real < 2:
        raise ValueError("optimal cost needs at least two nodes")
    return algorithm_cost(hypercube_shape(n_real), costs)


@dataclass(frozen=True)
class ShapeCost:
    dims: tuple
    capacity: int
    steps: int
    total_seconds: Fraction


@dataclass(frozen=True)
class OptimalityReport:
    n_real: int
    optimal_steps: int
    shapes: tuple

    @property
    def all_at_least_optimal(self) -> bool:
        return all(s.steps >= self.optimal_steps for s in self.shapes)

    @property
    def ties(self) -> tuple:
        return tuple(s for s in self.shapes if s.steps == self.optimal_steps)


def _factorizations(lo: int, hi: int):
    """Multisets of factors >= 2 (non-decreasing) with product in [lo, hi]."""
    out = []

    def walk(prefix: list, product: int, min_factor: int) -> None:
        if len(prefix) >= 2 and product >= lo:
            out.append(tuple(prefix))
        f = min_factor
        while product * f <= hi:
            prefix.append(f)
            walk(prefix, product * f, f)
            prefix.pop()
            f += 1

    walk([], 1, 2)
    return out


def verify_optimality(n_real: int, costs: StepCosts, max_capacity_slack: float = 1.0) -> OptimalityReport:
    """Exhaustive shape enumeration confirming the hypercube-style minimum.

    Enumerates every multi-dimensional shape whose capacity lies between
    n_real and 2^ceil(log2 n_real) (stretched by max_capacity_slack), plus
    the 1-D shape [n_real], and reports the step count of each.
    """
    if n_real < 2:
        raise ValueError("need at least two nodes")
    if max_capacity_slack < 1.0:
        raise ValueError("capacity slack must be at least 1.0")
    cap_hi = int((1 << optimal_dimension(n_real)) * max_capacity_slack)
    entries = []
    for dims in _factorizations(n_real, cap_hi):
        shape = GridShape(dims)
        entries.append(
            ShapeCost(
                dims=dims,
                capacity=shape.capacity,
                steps=algorithm_steps(shape),
                total_seconds=algorithm_cost(shape, costs),
            )
        )
    line = GridShape((n_real,))
    entries.append(
        ShapeCost(
            dims=line.dims,
            capacity=n_real,
            steps=algorithm_steps(line),
            total_seconds=algorithm_cost(line, costs),
        )
    )
    entries.sort(key=lambda s: (s.steps, s.capacity, s.dims))
    optimal_steps = 2 * optimal_dimension(n_real)
    return OptimalityReport(n_real=n_real, optimal_steps=optimal_steps, shapes=tuple(entries))


def calibrate_costs(graph: ClusterGraph, p: Optional[Fraction] = None, q: Optional[Fraction] = None) -> StepCosts:
    """Step costs from cluster medians; explicit values pass through verbatim.

    p defaults to packet_bits over the median real link bandwidth, q to the
    reciprocal of the median real node power.
    """
    if p is None:
        bandwidths = [l.bandwidth for l in graph.links if l.bandwidth > 0]
        if not bandwidths:
            raise ValueError("cluster has no real links to calibrate from")
        p = Fraction(graph.packet_bits) / median(bandwidths)
    if q is None:
        taus = [n.tau for n in graph.nodes if n.tau > 0]
        if not taus:
            raise ValueError("cluster has no real nodes to calibrate from")
        q = Fraction(1) / median(taus)
    return StepCosts(p=_as_fraction(p), q=_as_fraction(q))


@dataclass(frozen=True)
class ConcentrateScenario:
    """Fixed task budget whose placement skews onto the first node.

    At skew 0 the m tasks spread evenly; at skew 1 they all sit on the lowest
    node. Arrival time is zero for every task, so the instance isolates the
    placement imbalance.
    """

    m: int
    beta: int = 1
    mu: int = 1

    def build(self, node_ids: Sequence[str], skew: Fraction) -> tuple:
        if not 0 <= skew <= 1:
            raise ValueError("skew must lie in [0, 1]")
        n = len(node_ids)
        weights = [(1 - skew) + (skew * n if i == 0 else 0) for i in range(n)]
        counts = _rational_apportion(self.m, weights)
        tasks = []
        idx = 0
        width = len(str(self.m))
        for nid, count in zip(node_ids, counts):
            for _ in range(count):
                tasks.append(
                    TaskSpec(
                        id=f"c{idx:0{width}d}",
                        origin=nid,
                        beta=self.beta,
                        mu=self.mu,
                        arrival=Fraction(0),
                    )
                )
                idx += 1
        return tuple(tasks)


@dataclass(frozen=True)
class BurstScenario:
    """Balanced backlog plus a burst of unit tasks landing on the first node.

    Every node starts with backlog_per_node tasks of size beta; the skew
    controls the burst as a fraction of the total backlog units.
    """

    backlog_per_node: int
    beta: int = 1
    mu: int = 1

    def build(self, node_ids: Sequence[str], skew: Fraction) -> tuple:
        if skew < 0:
            raise ValueError("skew must be non-negative")
        n = len(node_ids)
        backlog_units = n * self.backlog_per_node * self.beta
        burst = int(skew * backlog_units)
        tasks = []
        width = len(str(backlog_units + burst + n))
        idx = 0
        for nid in node_ids:
            for _ in range(self.backlog_per_node):
                tasks.append(
                    TaskSpec(id=f"b{idx:0{width}d}", origin=nid, beta=self.beta, mu=self.mu, arrival=Fraction(0))
                )
                idx += 1
        for _ in range(burst):
            tasks.append(
                TaskSpec(id=f"x{idx:0{width}d}", origin=node_ids[0], beta=1, mu=self.mu, arrival=Fraction(0))
            )
            idx += 1
        return tuple(tasks)


def _rational_apportion(total: int, weights: Sequence[Fraction]) -> list:
    from .psts import _apportion
    from .scan import scaled_weights

    fr = [_as_fraction(w) for w in weights]
    ints, _, wsum = scaled_weights(fr)
    if wsum == 0:
        raise ValueError("weights sum to zero")
    return _apportion(total, ints, wsum)


@dataclass(frozen=True)
class CrossoverQuery:
    """Inputs for locating the imbalance where one balancing pass pays off."""

    cluster: ClusterGraph
    shape: GridShape
    scenario: object
    costs: StepCosts
    seed: int = 0
    skew_lo: Fraction = Fraction(0)
    skew_hi: Fraction = Fraction(1)
    rel_width: Fraction = Fraction(1, 1000)
    max_iterations: int = 40


@dataclass(frozen=True)
class CrossoverResult:
    """Outcome of the bisection.

    status is "found" when the benefit first exceeds the pass overhead inside
    the bounds, "always" when even the lower bound benefits, "never" when the
    upper bound does not. phi is the relative makespan excess
    (unbalanced - balanced) / balanced at the reported skew.
    """

    status: str
    phi: Optional[Fraction]
    skew: Optional[Fraction]
    iterations: int
    benefit: Optional[Fraction]
    overhead: Optional[Fraction]
    monotone: bool


@dataclass(frozen=True)
class _Probe:
    beneficial: bool
    phi: Fraction
    benefit: Fraction
    overhead: Fraction


def _probe(query: CrossoverQuery, hg: HyperGrid, skew: Fraction) -> _Probe:
    from . import psts
    from .simulator import Policy, simulate

    cluster = query.cluster
    tasks = query.scenario.build(cluster.real_ids, skew)
    baseline = simulate(cluster, hg, tasks, Policy.none(), query.costs)
    quiet = tuple(replace(t, mu=0) for t in tasks)
    balanced = simulate(cluster, hg, quiet, Policy.at(0), StepCosts(0, 0))
    benefit = baseline.makespan - balanced.makespan
    placed = [PlannedTaskView(t) for t in tasks]
    plan_ = psts.plan(hg, placed, cluster.tau_by_id)
    transfer = Fraction(0)
    if plan_.moves:
        from .simulator import transfer_seconds

        by_id = {t.id: t for t in tasks}
        transfer = max(
            transfer_seconds(cluster, by_id[m.task_id].mu, m.src, m.dst) for m in plan_.moves
        )
    overhead = algorithm_cost(query.shape, query.costs) + transfer
    phi = Fraction(0) if balanced.makespan == 0 else benefit / balanced.makespan
    return _Probe(beneficial=benefit >= overhead, phi=phi, benefit=benefit, overhead=overhead)


class PlannedTaskView:
    """Adapter presenting a TaskSpec at its origin to the planner."""

    __slots__ = ("id", "beta", "mu", "node")

    def __init__(self, task: TaskSpec) -> None:
        self.id = task.id
        self.beta = task.beta
        self.mu = task.mu
        self.node = task.origin


def estimate_crossover(query: CrossoverQuery) -> CrossoverResult:
    """Bisect the skew axis for the least imbalance worth one pass.

    Assumes the benefit grows with the skew parameter; the probes taken
    during the search are checked for that and any violation is flagged in
    the result instead of being silently accepted.
    """
    hg = embed(query.cluster, query.shape)
    lo, hi = _as_fraction(query.skew_lo), _as_fraction(query.skew_hi)
    if not lo < hi:
        raise ValueError("skew bounds must satisfy lo < hi")
    probes: dict = {}

    def at(s: Fraction) -> _Probe:
        if s not in probes:
            probes[s] = _probe(query, hg, s)
        return probes[s]

    first = at(lo)
    last = at(hi)
    iterations = 0
    if first.beneficial:
        status, skew, phi = "always", lo, first.phi
    elif not last.beneficial:
        status, skew, phi = "never", hi, last.phi
    else:
        while iterations < query.max_iterations and (hi - lo) > query.rel_width * hi:
            mid = (lo + hi) / 2
            iterations += 1
            if at(mid).beneficial:
                hi = mid
            else:
                lo = mid
        status, skew, phi = "found", hi, at(hi).phi
    ordered = sorted(probes.items())
    benefits = [p.benefit for _, p in ordered]
    monotone = all(a <= b for a, b in zip(benefits, benefits[1:]))
    chosen = probes[skew]
    return CrossoverResult(
        status=status,
        phi=phi,
        skew=skew,
        iterations=iterations,
        benefit=chosen.benefit,
        overhead=chosen.overhead,
        monotone=monotone,
    )
