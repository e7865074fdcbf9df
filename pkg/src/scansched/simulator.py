"""Discrete-event simulation of FIFO clusters with optional rebalancing.

Nodes serve their queues non-preemptively at beta / tau seconds per task.
A rebalancing pass freezes every queue for the closed-form pass duration,
re-plans the waiting tasks (in-service work is never interrupted), then ships
the moved tasks concurrently, each at mu * packet_bits over the bottleneck
bandwidth of its route. All clocks are exact rationals, so equal-time ties
resolve by a fixed event priority instead of float luck.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import count
from math import isinf
from typing import Optional, Sequence

from . import psts
from .cost_model import StepCosts, algorithm_cost
from .scan import _as_fraction
from .topology import ClusterGraph, HyperGrid, bottleneck_bandwidth
from .workload import TaskSpec

__all__ = [
    "Policy",
    "SimulationReport",
    "REPORT_COLUMNS",
    "simulate",
    "speedup",
    "transfer_seconds",
    "SweepConfig",
    "SweepResult",
    "sweep",
    "report_row",
    "format_cell",
]

_PRIO_COMPLETE = 0
_PRIO_ARRIVE = 1
_PRIO_REBALANCE = 2
_PRIO_WAKE = 3


@dataclass(frozen=True)
class Policy:
    """When, if ever, the scheduler runs a balancing pass."""

    kind: str
    param: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if self.kind not in ("none", "psts_at", "psts_on_arrival"):
            raise ValueError(f"unknown policy {self.kind!r}")
        if self.kind == "none":
            if self.param is not None:
                raise ValueError("policy none takes no parameter")
        else:
            if self.param is None:
                raise ValueError(f"policy {self.kind} needs a parameter")
            object.__setattr__(self, "param", _as_fraction(self.param))
            if self.param < 0:
                raise ValueError(f"policy {self.kind} parameter must be non-negative")

    @staticmethod
    def none() -> "Policy":
        return Policy("none")

    @staticmethod
    def at(time) -> "Policy":
        """One pass at the given simulation time."""
        return Policy("psts_at", _as_fraction(time))

    @staticmethod
    def on_arrival(threshold) -> "Policy":
        """A pass after any arrival that leaves the waiting-load imbalance above threshold."""
        return Policy("psts_on_arrival", _as_fraction(threshold))

    @staticmethod
    def parse(text: str) -> "Policy":
        if text == "none":
            return Policy.none()
        for kind in ("psts_at", "psts_on_arrival"):
            if text.startswith(kind + ":"):
                try:
                    param = Fraction(text[len(kind) + 1 :])
                except (ValueError, ZeroDivisionError):
                    raise ValueError(f"bad policy parameter in {text!r}") from None
                return Policy(kind, param)
        raise ValueError(f"unknown policy {text!r}; expected none, psts_at:<t> or psts_on_arrival:<phi>")

    @property
    def label(self) -> str:
        if self.kind == "none":
            return "none"
        return f"{self.kind}:{_fmt_rational(self.param)}"


def _fmt_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


REPORT_COLUMNS = (
    "policy",
    "n_nodes",
    "dims",
    "m_tasks",
    "seed",
    "makespan",
    "mean_response",
    "max_response",
    "overhead",
    "migrated_units",
    "migrated_packets",
    "imbalance",
    "speedup",
    "crossover",
)


@dataclass(frozen=True)
class SimulationReport:
    """Aggregate outcome of one run.

    imbalance is the static estimate over the initial placement: the highest
    per-node finish time divided by the ideal shared finish time, minus one.
    overhead sums, per pass, the freeze duration plus the slowest transfer.
    """

    policy: str
    n_nodes: int
    dims: str
    m_tasks: int
    seed: Optional[int]
    makespan: Fraction
    mean_response: Optional[Fraction]
    max_response: Optional[Fraction]
    overhead: Fraction
    migrated_units: int
    migrated_packets: int
    imbalance: Fraction
    passes: int
    completion_times: tuple


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return f"{float(value):.12g}"
    return str(value)


def report_row(report: SimulationReport, speedup_value=None, crossover=None) -> list:
    """One CSV row in REPORT_COLUMNS order."""
    cross_cell = None
    if crossover is not None:
        cross_cell = format_cell(crossover.phi) if crossover.status == "found" else crossover.status
    cells = [
        report.policy,
        report.n_nodes,
        report.dims,
        report.m_tasks,
        report.seed,
        report.makespan,
        report.mean_response,
        report.max_response,
        report.overhead,
        report.migrated_units,
        report.migrated_packets,
        report.imbalance,
        speedup_value,
        cross_cell,
    ]
    return [cell if isinstance(cell, str) else format_cell(cell) for cell in cells]


def transfer_seconds(cluster: ClusterGraph, mu: int, src: str, dst: str, _cache: Optional[dict] = None) -> Fraction:
    """Wall time to ship mu packets from src to dst."""
    if src == dst or mu == 0:
        return Fraction(0)
    if _cache is not None and (src, dst) in _cache:
        width = _cache[(src, dst)]
    else:
        width = bottleneck_bandwidth(cluster, src, dst)
        if _cache is not None:
            _cache[(src, dst)] = width
    if isinf(width):
        return Fraction(0)
    return Fraction(mu * cluster.packet_bits) / width


class _Simulation:
    def __init__(
        self,
        cluster: ClusterGraph,
        hg: HyperGrid,
        tasks: Sequence[TaskSpec],
        policy: Policy,
        costs: StepCosts,
        seed: Optional[int],
    ) -> None:
        self.cluster = cluster
        self.hg = hg
        self.tasks = tuple(tasks)
        self.policy = policy
        self.costs = costs
        self.seed = seed
        self.order = [nid for nid in hg.placement if nid is not None]
        known = set(self.order)
        seen = set()
        for t in self.tasks:
            if t.id in seen:
                raise ValueError(f"duplicate task id {t.id!r}")
            seen.add(t.id)
            if t.origin not in known:
                raise ValueError(f"task {t.id}: origin {t.origin!r} is not a placed node")
        self.tau = cluster.tau_by_id
        self.heap: list = []
        self.seq = count()
        self.queues = {nid: deque() for nid in self.order}
        self.busy: dict = {nid: None for nid in self.order}
        self.frozen_until = Fraction(0)
        self.completions: dict = {}
        self.overhead = Fraction(0)
        self.migrated_units = 0
        self.migrated_packets = 0
        self.passes = 0
        self.width_cache: dict = {}

    def push(self, time: Fraction, prio: int, kind: str, payload) -> None:
        heapq.heappush(self.heap, (time, prio, next(self.seq), kind, payload))

    def run(self) -> SimulationReport:
        for t in self.tasks:
            self.push(t.arrival, _PRIO_ARRIVE, "arrive", t)
        if self.policy.kind == "psts_at":
            self.push(self.policy.param, _PRIO_REBALANCE, "rebalance", None)
        while self.heap:
            now = self.heap[0][0]
            arrived = False
            woke = False
            while self.heap and self.heap[0][0] == now:
                _, _, _, kind, payload = heapq.heappop(self.heap)
                if kind == "complete":
                    nid, tid = payload
                    state = self.busy[nid]
                    if state is not None and state[0] == tid and state[1] == now:
                        self.busy[nid] = None
                        self.completions[tid] = now
                elif kind == "arrive":
                    self.queues[payload.origin].append(payload)
                    arrived = True
                elif kind == "transfer":
                    task, dst = payload
                    self.queues[dst].append(task)
                elif kind == "rebalance":
                    self.rebalance(now)
                elif kind == "wake":
                    woke = True
            if self.policy.kind == "psts_on_arrival" and (arrived or woke):
                self.maybe_trigger(now)
            self.dispatch(now)
        return self.report()

    def dispatch(self, now: Fraction) -> None:
        if now < self.frozen_until:
            return
        for nid in self.order:
            if self.busy[nid] is None and self.queues[nid]:
                task = self.queues[nid].popleft()
                finish = now + Fraction(task.beta) / self.tau[nid]
                self.busy[nid] = (task.id, finish)
                self.push(finish, _PRIO_COMPLETE, "complete", (nid, task.id))

    def waiting_imbalance(self) -> Optional[Fraction]:
        load = {nid: sum(t.beta for t in q) for nid, q in self.queues.items()}
        total = sum(load.values())
        if total == 0:
            return None
        pi = sum(self.tau[nid] for nid in self.order)
        peak = max(Fraction(load[nid]) / self.tau[nid] for nid in self.order)
        return peak * pi / total - 1

    def maybe_trigger(self, now: Fraction) -> None:
        if now < self.frozen_until:
            return
        phi_hat = self.waiting_imbalance()
        if phi_hat is not None and phi_hat > self.policy.param:
            self.rebalance(now)

    def rebalance(self, now: Fraction) -> None:
        pass_cost = algorithm_cost(self.hg.shape, self.costs)
        planned = []
        holder = {}
        for nid in self.order:
            for task in self.queues[nid]:
                planned.append(psts.PlannedTask(id=task.id, beta=task.beta, mu=task.mu, node=nid))
                holder[task.id] = task
        plan_ = psts.plan(self.hg, planned, self.tau)
        self.passes += 1
        self.frozen_until = now + pass_cost
        for nid in self.order:
            state = self.busy[nid]
            if state is not None:
                tid, finish = state
                self.busy[nid] = (tid, finish + pass_cost)
                self.push(finish + pass_cost, _PRIO_COMPLETE, "complete", (nid, tid))
        moved_from: dict = {}
        slowest = Fraction(0)
        for move in plan_.moves:
            task = holder[move.task_id]
            moved_from.setdefault(move.src, set()).add(move.task_id)
            hop = transfer_seconds(self.cluster, task.mu, move.src, move.dst, self.width_cache)
            slowest = max(slowest, hop)
            self.push(now + pass_cost + hop, _PRIO_ARRIVE, "transfer", (task, move.dst))
        for nid, gone in moved_from.items():
            self.queues[nid] = deque(t for t in self.queues[nid] if t.id not in gone)
        if pass_cost > 0:
            self.push(now + pass_cost, _PRIO_WAKE, "wake", None)
        self.overhead += pass_cost + slowest
        self.migrated_units += plan_.units
        self.migrated_packets += plan_.packets

    def static_imbalance(self) -> Fraction:
        load = {nid: 0 for nid in self.order}
        for t in self.tasks:
            load[t.origin] += t.beta
        total = sum(load.values())
        if total == 0:
            return Fraction(0)
        pi = sum(self.tau[nid] for nid in self.order)
        peak = max(Fraction(load[nid]) / self.tau[nid] for nid in self.order)
        return peak * pi / total - 1

    def report(self) -> SimulationReport:
        by_id = {t.id: t for t in self.tasks}
        pairs = tuple(sorted(self.completions.items()))
        responses = [done - by_id[tid].arrival for tid, done in pairs]
        makespan = max(self.completions.values()) if self.completions else Fraction(0)
        mean_resp = sum(responses, Fraction(0)) / len(responses) if responses else None
        max_resp = max(responses) if responses else None
        return SimulationReport(
            policy=self.policy.label,
            n_nodes=self.hg.n_real,
            dims=str(self.hg.shape),
            m_tasks=len(self.tasks),
            seed=self.seed,
            makespan=makespan,
            mean_response=mean_resp,
            max_response=max_resp,
            overhead=self.overhead,
            migrated_units=self.migrated_units,
            migrated_packets=self.migrated_packets,
            imbalance=self.static_imbalance(),
            passes=self.passes,
            completion_times=pairs,
        )


def simulate(
    cluster: ClusterGraph,
    hg: HyperGrid,
    tasks: Sequence[TaskSpec],
    policy: Policy,
    costs: StepCosts,
    seed: Optional[int] = None,
) -> SimulationReport:
    """Run the cluster to completion and return aggregate metrics."""
    return _Simulation(cluster, hg, tasks, policy, costs, seed).run()


def speedup(baseline: SimulationReport, balanced: SimulationReport) -> Fraction:
    """Makespan ratio baseline / balanced for two runs of the same instance."""
    same = ("n_nodes", "dims", "m_tasks", "seed")
    for name in same:
        if getattr(baseline, name) != getattr(balanced, name):
            raise ValueError(f"reports describe different instances ({name} differs)")
    if balanced.makespan == 0:
        if baseline.makespan == 0:
            return Fraction(1)
        raise ValueError("balanced run finished instantly but baseline did not")
    return baseline.makespan / balanced.makespan


@dataclass(frozen=True)
class SweepConfig:
    """Scaling experiment: same workload recipe across cluster sizes."""

    node_counts: tuple
    p: Fraction
    q: Fraction
    shape_kind: str = "hypercube"
    m: int = 1024
    beta: int = 4
    mu: int = 1
    origin_fraction: Fraction = Fraction(1, 2)
    bandwidth: Fraction = Fraction(10**6)
    packet_bits: int = 1000
    seed: int = 0
    with_crossover: bool = True

    def __post_init__(self) -> None:
        for name in ("p", "q", "origin_fraction", "bandwidth"):
            object.__setattr__(self, name, _as_fraction(getattr(self, name)))
        object.__setattr__(self, "node_counts", tuple(self.node_counts))
        if self.shape_kind not in ("hypercube", "line"):
            raise ValueError("shape_kind must be hypercube or line")
        if not self.node_counts:
            raise ValueError("need at least one node count")
        if any(n < 2 for n in self.node_counts):
            raise ValueError("sweep clusters need at least two nodes")
        if not 0 < self.origin_fraction <= 1:
            raise ValueError("origin_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class SweepResult:
    n_nodes: int
    baseline: SimulationReport
    balanced: SimulationReport
    speedup: Fraction
    crossover: Optional[object]

    def row(self) -> list:
        return report_row(self.balanced, speedup_value=self.speedup, crossover=self.crossover)


def sweep(config: SweepConfig) -> list:
    """Run the instance family over the configured node counts.

    Each cluster is a chain of equal-power nodes embedded in the configured
    shape; the workload concentrates its origins on the first
    origin_fraction of the nodes, runs once without balancing and once with
    a single pass at time zero, and optionally locates the crossover
    imbalance for the same shape and costs.
    """
    from .cost_model import ConcentrateScenario, CrossoverQuery, estimate_crossover
    from .rng import derive_seed
    from .topology import GridShape, chain_cluster, embed, hypercube_shape
    from .workload import DistSpec, WorkloadSpec, generate_workload

    costs = StepCosts(config.p, config.q)
    results = []
    for index, n in enumerate(config.node_counts):
        cluster = chain_cluster(n, bandwidth=config.bandwidth, packet_bits=config.packet_bits)
        shape = hypercube_shape(n) if config.shape_kind == "hypercube" else GridShape((n,))
        hg = embed(cluster, shape)
        seed_i = derive_seed(config.seed, index)
        pool_size = max(1, -(-n * config.origin_fraction.numerator // config.origin_fraction.denominator))
        pool = cluster.real_ids[: min(n, pool_size)]
        spec = WorkloadSpec(
            m=config.m,
            beta=DistSpec("uniform", config.beta, config.beta),
            mu=DistSpec("uniform", config.mu, config.mu),
            seed=seed_i,
        )
        tasks = generate_workload(spec, pool)
        baseline = simulate(cluster, hg, tasks, Policy.none(), costs, seed=seed_i)
        balanced = simulate(cluster, hg, tasks, Policy.at(0), costs, seed=seed_i)
        ratio = speedup(baseline, balanced)
        crossover = None
        if config.with_crossover:
            scenario = ConcentrateScenario(m=config.m, beta=config.beta, mu=config.mu)
            query = CrossoverQuery(cluster=cluster, shape=shape, scenario=scenario, costs=costs)
            crossover = estimate_crossover(query)
        results.append(
            SweepResult(n_nodes=n, baseline=baseline, balanced=balanced, speedup=ratio, crossover=crossover)
        )
    return results
