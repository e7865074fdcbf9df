"""Exclusive prefix scans and normalized processing-power profiles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Optional, Sequence


@dataclass(frozen=True)
class ScanResult:
    """Exclusive prefix sums: prefix[i] = sum of values[:i]."""

    prefix: tuple
    total: object

    def __len__(self) -> int:
        return len(self.prefix)


def exclusive_scan(values: Iterable) -> ScanResult:
    prefix = []
    running = 0
    for v in values:
        prefix.append(running)
        running = running + v
    return ScanResult(prefix=tuple(prefix), total=running)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    raise TypeError(f"cannot interpret {x!r} as a rational number")


@dataclass(frozen=True)
class PowerProfile:
    """Normalized power view of one line (or one level) of nodes.

    gammas[i] is the node's share of the total power and lam is the exclusive
    scan of the gammas, so node i owns the half-open interval
    [lam[i], lam[i+1]) of the unit index space scaled to [0, 1). Zero-power
    (virtual) entries own empty intervals.

    scaled_prefix/scaled_total mirror lam with a common denominator cleared,
    so destination lookups can run in pure integer arithmetic:
    lam[i] == scaled_prefix[i] / scaled_total.
    """

    taus: tuple
    pi: Fraction
    gammas: tuple
    lam: tuple
    scaled_taus: tuple
    scaled_prefix: tuple
    scaled_total: int


def power_profile(taus: Sequence) -> PowerProfile:
    """Build the normalized profile for a sequence of processing powers.

    Args:
        taus: per-node powers, non-negative rationals; zero marks a virtual
            node. At least one power must be positive.
    """
    fr = tuple(_as_fraction(t) for t in taus)
    if not fr:
        raise ValueError("empty power sequence")
    if any(t < 0 for t in fr):
        raise ValueError("powers must be non-negative")
    pi = sum(fr, Fraction(0))
    if pi == 0:
        raise ValueError("all powers are zero")
    denom = lcm(*(t.denominator for t in fr))
    scaled = tuple(int(t * denom) for t in fr)
    prefix = []
    running = 0
    for w in scaled:
        prefix.append(running)
        running += w
    gammas = tuple(t / pi for t in fr)
    lam = tuple(Fraction(p, running) for p in prefix)
    return PowerProfile(
        taus=fr,
        pi=pi,
        gammas=gammas,
        lam=lam,
        scaled_taus=scaled,
        scaled_prefix=tuple(prefix),
        scaled_total=running,
    )


def slice_load(tasks: Iterable, slice_ids, universe: Optional[set] = None) -> int:
    """Total work units held by nodes of one slice.

    tasks are objects with .node and .beta. When universe is given, any task
    sitting on a node outside it is an error.
    """
    ids = set(slice_ids)
    total = 0
    for t in tasks:
        if universe is not None and t.node not in universe:
            raise ValueError(f"task {t.id!r} references unknown node {t.node!r}")
        if t.node in ids:
            total += t.beta
    return total


def scaled_weights(values: Sequence[Fraction]) -> tuple[tuple[int, ...], tuple[int, ...], int]:
    """Clear denominators of rational weights; returns (weights, prefix, total)."""
    if not values:
        return (), (0,), 0
    denom = lcm(*(v.denominator for v in values))
    ints = tuple(int(v * denom) for v in values)
    prefix = []
    running = 0
    for w in ints:
        prefix.append(running)
        running += w
    return ints, tuple(prefix), running
