"""Task set generation and the on-disk task list format.

A task is (id, origin node, beta work units, mu packets, arrival seconds).
Generation is driven entirely by the portable generator in rng, so a given
spec and seed produce byte-identical task files on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .rng import PoissonSampler, SplitMix64, exponential_gap
from .scan import _as_fraction

__all__ = [
    "TaskSpec",
    "DistSpec",
    "ArrivalSpec",
    "WorkloadSpec",
    "generate_workload",
    "parse_tasks",
    "serialize_tasks",
    "parse_gen_spec",
    "total_work",
]


@dataclass(frozen=True)
class TaskSpec:
    """One schedulable task."""

    id: str
    origin: str
    beta: int
    mu: int
    arrival: Fraction

    def __post_init__(self) -> None:
        if not self.id or not all(c.isalnum() or c in "_-" for c in self.id):
            raise ValueError(f"bad task id {self.id!r}")
        if not isinstance(self.beta, int) or self.beta < 1:
            raise ValueError(f"task {self.id}: beta must be a positive integer")
        if not isinstance(self.mu, int) or self.mu < 0:
            raise ValueError(f"task {self.id}: mu must be a non-negative integer")
        object.__setattr__(self, "arrival", _as_fraction(self.arrival))
        if self.arrival < 0:
            raise ValueError(f"task {self.id}: arrival must be non-negative")


def total_work(tasks: Sequence[TaskSpec]) -> int:
    return sum(t.beta for t in tasks)


@dataclass(frozen=True)
class DistSpec:
    """Integer distribution: uniform over [a, b] or Poisson with mean a."""

    kind: str
    a: Fraction
    b: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "poisson"):
            raise ValueError(f"unknown distribution {self.kind!r}")
        object.__setattr__(self, "a", _as_fraction(self.a))
        if self.kind == "uniform":
            if self.b is None:
                raise ValueError("uniform distribution needs two bounds")
            object.__setattr__(self, "b", _as_fraction(self.b))
            if self.a > self.b:
                raise ValueError("uniform bounds out of order")
            if self.a.denominator != 1 or self.b.denominator != 1:
                raise ValueError("uniform bounds must be integers")
        else:
            if self.b is not None:
                raise ValueError("poisson distribution takes a single mean")
            if self.a <= 0:
                raise ValueError("poisson mean must be positive")


@dataclass(frozen=True)
class ArrivalSpec:
    """Arrival process: uniform over a window [a, b] or Poisson at rate a."""

    kind: str
    a: Fraction
    b: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if self.kind not in ("window", "poisson"):
            raise ValueError(f"unknown arrival process {self.kind!r}")
        object.__setattr__(self, "a", _as_fraction(self.a))
        if self.kind == "window":
            if self.b is None:
                raise ValueError("window arrivals need two bounds")
            object.__setattr__(self, "b", _as_fraction(self.b))
            if not 0 <= self.a <= self.b:
                raise ValueError("arrival window out of order")
        else:
            if self.b is not None:
                raise ValueError("poisson arrivals take a single rate")
            if self.a <= 0:
                raise ValueError("poisson rate must be positive")


@dataclass(frozen=True)
class WorkloadSpec:
    """Complete recipe for a reproducible task set."""

    m: int
    beta: DistSpec = field(default_factory=lambda: DistSpec("uniform", 1, 1))
    mu: DistSpec = field(default_factory=lambda: DistSpec("uniform", 1, 1))
    arrivals: ArrivalSpec = field(default_factory=lambda: ArrivalSpec("window", 0, 0))
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 0:
            raise ValueError("task count must be non-negative")


def _sample_dist(dist: DistSpec, rng: SplitMix64, sampler: Optional[PoissonSampler], floor: int) -> int:
    if dist.kind == "uniform":
        value = rng.randint(int(dist.a), int(dist.b))
    else:
        value = sampler.sample(rng)
    return max(floor, value)


def generate_workload(spec: WorkloadSpec, node_ids: Sequence[str]) -> tuple:
    """Draw spec.m tasks with origins uniform over node_ids.

    Per task the draws happen in a fixed order (origin, beta, mu, arrival
    term) so adding fields later cannot silently reshuffle existing streams.
    Sizes are clamped to at least one unit, packet counts to at least zero.
    """
    if not node_ids:
        raise ValueError("need at least one origin node")
    rng = SplitMix64(spec.seed)
    beta_sampler = PoissonSampler(spec.beta.a) if spec.beta.kind == "poisson" else None
    mu_sampler = PoissonSampler(spec.mu.a) if spec.mu.kind == "poisson" else None
    width = max(1, len(str(max(spec.m - 1, 0))))
    tasks = []
    clock = Fraction(0)
    for i in range(spec.m):
        origin = node_ids[rng.randint(0, len(node_ids) - 1)]
        beta = _sample_dist(spec.beta, rng, beta_sampler, 1)
        mu = _sample_dist(spec.mu, rng, mu_sampler, 0)
        if spec.arrivals.kind == "window":
            arrival = rng.uniform(spec.arrivals.a, spec.arrivals.b)
        else:
            clock += exponential_gap(rng, spec.arrivals.a)
            arrival = clock
        tasks.append(TaskSpec(id=f"t{i:0{width}d}", origin=origin, beta=beta, mu=mu, arrival=arrival))
    return tuple(tasks)


def _format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def serialize_tasks(tasks: Sequence[TaskSpec]) -> str:
    lines = ["# task <id> <origin> <beta> <mu> <arrival>"]
    for t in tasks:
        lines.append(f"task {t.id} {t.origin} {t.beta} {t.mu} {_format_rational(t.arrival)}")
    return "\n".join(lines) + "\n"


def parse_tasks(text: str) -> tuple:
    """Parse a task list; raises ValueError naming the offending line."""
    tasks = []
    seen = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "task":
            raise ValueError(f"line {line_no}: unknown directive {parts[0]!r}")
        if len(parts) != 6:
            raise ValueError(f"line {line_no}: expected 'task <id> <origin> <beta> <mu> <arrival>'")
        _, tid, origin, beta_s, mu_s, arrival_s = parts
        if tid in seen:
            raise ValueError(f"line {line_no}: duplicate task id {tid!r}")
        seen.add(tid)
        try:
            beta = int(beta_s)
            mu = int(mu_s)
            arrival = Fraction(arrival_s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"line {line_no}: {exc}") from None
        try:
            tasks.append(TaskSpec(id=tid, origin=origin, beta=beta, mu=mu, arrival=arrival))
        except ValueError as exc:
            raise ValueError(f"line {line_no}: {exc}") from None
    return tuple(tasks)


def parse_gen_spec(text: str) -> WorkloadSpec:
    """Parse a compact generation recipe.

    Example: "m=4000,beta=uniform:1:100,mu=poisson:5,arrivals=window:0:100,seed=42".
    m is required; beta and mu default to the constant 1, arrivals to a
    zero-width window at time zero, seed to 0.
    """
    fields: dict = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ValueError(f"bad generator field {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        if key in fields:
            raise ValueError(f"duplicate generator field {key!r}")
        fields[key] = value.strip()
    unknown = set(fields) - {"m", "beta", "mu", "arrivals", "seed"}
    if unknown:
        raise ValueError(f"unknown generator fields: {', '.join(sorted(unknown))}")
    if "m" not in fields:
        raise ValueError("generator spec needs m=<count>")
    try:
        m = int(fields["m"])
        seed = int(fields.get("seed", "0"))
    except ValueError as exc:
        raise ValueError(str(exc)) from None
    kwargs: dict = {"m": m, "seed": seed}
    for key in ("beta", "mu"):
        if key in fields:
            kwargs[key] = _parse_dist(fields[key])
    if "arrivals" in fields:
        kwargs["arrivals"] = _parse_arrivals(fields["arrivals"])
    return WorkloadSpec(**kwargs)


def _split_spec(value: str, what: str):
    parts = value.split(":")
    kind = parts[0]
    try:
        args = [Fraction(p) for p in parts[1:]]
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"bad {what} parameters in {value!r}") from None
    return kind, args


def _parse_dist(value: str) -> DistSpec:
    kind, args = _split_spec(value, "distribution")
    if kind == "uniform" and len(args) == 2:
        return DistSpec("uniform", args[0], args[1])
    if kind == "poisson" and len(args) == 1:
        return DistSpec("poisson", args[0])
    raise ValueError(f"expected uniform:<lo>:<hi> or poisson:<mean>, got {value!r}")


def _parse_arrivals(value: str) -> ArrivalSpec:
    kind, args = _split_spec(value, "arrival")
    if kind == "window" and len(args) == 2:
        return ArrivalSpec("window", args[0], args[1])
    if kind == "poisson" and len(args) == 1:
        return ArrivalSpec("poisson", args[0])
    raise ValueError(f"expected window:<lo>:<hi> or poisson:<rate>, got {value!r}")
