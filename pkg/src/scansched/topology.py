"""Cluster descriptions and hyper-grid embeddings.

A cluster is an irregular weighted graph of compute nodes. Scheduling runs on
a regular view of it: the real nodes are embedded into a d-dimensional
hyper-grid (row-major cell order), padding unused cells with virtual nodes of
zero power so the grid is always full.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import prod
from typing import Optional, Sequence

from .scan import _as_fraction

__all__ = [
    "TopologyError",
    "TopologyParseError",
    "NodeSpec",
    "LinkSpec",
    "ClusterGraph",
    "GridShape",
    "HyperGrid",
    "optimal_dimension",
    "hypercube_shape",
    "embed",
    "linearize",
    "delinearize",
    "slices",
    "bottleneck_bandwidth",
    "parse_topology",
    "serialize_topology",
    "chain_cluster",
]


class TopologyError(ValueError):
    """Invalid cluster or grid structure."""


class TopologyParseError(ValueError):
    """Malformed topology or task file; carries a 1-based line number."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _check_id(token: str) -> str:
    if not token or not token.isalnum():
        raise TopologyError(f"identifier {token!r} is not an alphanumeric token")
    return token


@dataclass(frozen=True)
class NodeSpec:
    """One compute node. tau is work units per second; zero means virtual."""

    id: str
    tau: Fraction

    @property
    def is_virtual(self) -> bool:
        return self.tau == 0


@dataclass(frozen=True)
class LinkSpec:
    """Undirected link; bandwidth is bits per second, zero means virtual."""

    a: str
    b: str
    bandwidth: Fraction

    def pair(self) -> frozenset:
        return frozenset((self.a, self.b))


@dataclass(frozen=True)
class ClusterGraph:
    nodes: tuple
    links: tuple
    packet_bits: int

    def __post_init__(self) -> None:
        ids = [n.id for n in self.nodes]
        for i in ids:
            _check_id(i)
        if len(set(ids)) != len(ids):
            raise TopologyError("duplicate node ids")
        if not isinstance(self.packet_bits, int) or self.packet_bits <= 0:
            raise TopologyError("packet size must be a positive integer of bits")
        known = set(ids)
        seen_pairs = set()
        for link in self.links:
            if link.a == link.b:
                raise TopologyError(f"self link on {link.a!r}")
            if link.a not in known or link.b not in known:
                raise TopologyError(f"link references unknown node: {link.a!r}-{link.b!r}")
            if link.bandwidth < 0:
                raise TopologyError("negative bandwidth")
            p = link.pair()
            if p in seen_pairs:
                raise TopologyError(f"duplicate link {link.a!r}-{link.b!r}")
            seen_pairs.add(p)
        for n in self.nodes:
            if n.tau < 0:
                raise TopologyError(f"negative power on node {n.id!r}")
        real = self.real_ids
        if real and len(self._reachable_from(real[0])) != len(real):
            raise TopologyError("real nodes do not form a connected subgraph")

    @cached_property
    def tau_by_id(self) -> dict:
        return {n.id: n.tau for n in self.nodes}

    @cached_property
    def real_ids(self) -> tuple:
        """Ids of nodes with positive power, in ascending id order."""
        return tuple(sorted(n.id for n in self.nodes if not n.is_virtual))

    @cached_property
    def real_adjacency(self) -> dict:
        """Adjacency over real nodes through links of positive bandwidth."""
        adj: dict = {i: [] for i in self.real_ids}
        virtual = {n.id for n in self.nodes if n.is_virtual}
        for link in self.links:
            if link.bandwidth == 0:
                continue
            if link.a in virtual or link.b in virtual:
                continue
            adj[link.a].append((link.b, link.bandwidth))
            adj[link.b].append((link.a, link.bandwidth))
        for lst in adj.values():
            lst.sort(key=lambda e: e[0])
        return adj

    def _reachable_from(self, start: str) -> set:
        adj = self.real_adjacency
        seen = {start}
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            for nxt, _ in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen


@dataclass(frozen=True)
class GridShape:
    """Extent per dimension, outermost first; row-major cell order."""

    dims: tuple

    def __post_init__(self) -> None:
        if not self.dims:
            raise TopologyError("shape needs at least one dimension")
        if any(not isinstance(p, int) or p < 1 for p in self.dims):
            raise TopologyError("dimension extents must be positive integers")
        if len(self.dims) >= 2 and any(p < 2 for p in self.dims):
            raise TopologyError("multi-dimensional shapes need every extent >= 2")

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def capacity(self) -> int:
        return prod(self.dims)

    def __str__(self) -> str:
        return "x".join(str(p) for p in self.dims)


def optimal_dimension(n_real: int) -> int:
    """Grid dimension minimizing the balancing step count for n_real nodes."""
    if n_real < 1:
        raise TopologyError("node count must be positive")
    if n_real == 1:
        return 1
    return (n_real - 1).bit_length()


def hypercube_shape(n_real: int) -> GridShape:
    if n_real < 2:
        raise TopologyError("hypercube shape needs at least two nodes")
    return GridShape(dims=(2,) * optimal_dimension(n_real))


def linearize(shape: GridShape, coord: Sequence[int]) -> int:
    if len(coord) != shape.d:
        raise TopologyError("coordinate arity does not match shape")
    rank = 0
    for c, p in zip(coord, shape.dims):
        if not 0 <= c < p:
            raise TopologyError(f"coordinate {tuple(coord)} out of range for {shape}")
        rank = rank * p + c
    return rank


def delinearize(shape: GridShape, rank: int) -> tuple:
    if not 0 <= rank < shape.capacity:
        raise TopologyError(f"rank {rank} out of range for {shape}")
    coord = []
    for p in reversed(shape.dims):
        coord.append(rank % p)
        rank //= p
    return tuple(reversed(coord))


@dataclass(frozen=True)
class HyperGrid:
    """A shape plus the placement of node ids into row-major cells.

    placement[rank] is a node id or None for a virtual (padding) cell.
    """

    shape: GridShape
    placement: tuple

    def __post_init__(self) -> None:
        if len(self.placement) != self.shape.capacity:
            raise TopologyError("placement length must equal grid capacity")
        real = [p for p in self.placement if p is not None]
        if len(set(real)) != len(real):
            raise TopologyError("node placed twice")

    @property
    def capacity(self) -> int:
        return self.shape.capacity

    @cached_property
    def rank_by_id(self) -> dict:
        return {nid: r for r, nid in enumerate(self.placement) if nid is not None}

    def node_at(self, rank: int) -> Optional[str]:
        return self.placement[rank]

    @property
    def n_real(self) -> int:
        return len(self.rank_by_id)


def _bfs_order(graph: ClusterGraph) -> list:
    """Real node ids in breadth-first order from the lowest id.

    Neighbors are visited in ascending id order so the embedding is a pure
    function of the graph.
    """
    real = graph.real_ids
    if not real:
        return []
    adj = graph.real_adjacency
    start = real[0]
    order = [start]
    seen = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for nxt, _ in adj[cur]:
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    return order


def embed(graph: ClusterGraph, shape: Optional[GridShape] = None) -> HyperGrid:
    """Embed the real nodes of a cluster into a hyper-grid.

    Cells are filled in row-major rank order following breadth-first order
    from the lowest node id; leftover cells become virtual padding at the
    tail. Default shape is the hypercube-style shape of minimal step count
    (a single-cell line for a one-node cluster).
    """
    order = _bfs_order(graph)
    n = len(order)
    if n == 0:
        raise TopologyError("cluster has no real nodes")
    if shape is None:
        shape = GridShape((1,)) if n == 1 else hypercube_shape(n)
    if shape.capacity < n:
        raise TopologyError(
            f"shape {shape} holds {shape.capacity} cells but {n} real nodes need placing"
        )
    placement = tuple(order) + (None,) * (shape.capacity - n)
    return HyperGrid(shape=shape, placement=placement)


def slices(hg: HyperGrid, level: int) -> tuple:
    """Parallel slices produced by splitting the grids of one level.

    Level d splits the full grid along its leading axis; level k in between
    splits each k-dimensional sub-grid the same way; level 1 enumerates the
    1-D lines themselves. Every slice is a contiguous run of ranks, returned
    in rank order, and each level's slices partition the grid.
    """
    d = hg.shape.d
    if not 1 <= level <= d:
        raise TopologyError(f"level must be in [1, {d}]")
    dims = hg.shape.dims
    if level == 1:
        piece_dims = dims[d - 1:]
    else:
        piece_dims = dims[d - level + 1:]
    piece_size = prod(piece_dims)
    pieces = []
    for start in range(0, hg.capacity, piece_size):
        pieces.append(
            HyperGrid(shape=GridShape(piece_dims), placement=hg.placement[start:start + piece_size])
        )
    return tuple(pieces)


def bottleneck_bandwidth(graph: ClusterGraph, src: str, dst: str):
    """Widest-path bandwidth between two real nodes.

    Maximizes, over all paths, the minimum link bandwidth along the path.
    Returns math.inf when src and dst are the same node.
    """
    tau = graph.tau_by_id
    for nid in (src, dst):
        if nid not in tau:
            raise TopologyError(f"unknown node {nid!r}")
    if src == dst:
        return math.inf
    adj = graph.real_adjacency
    if src not in adj or dst not in adj:
        raise TopologyError("bottleneck bandwidth is defined between real nodes")
    best = {src: None}  # None stands for +infinity at the source
    heap = [(Fraction(0), src)]  # negated width; source gets priority 0
    settled = set()
    while heap:
        neg_width, cur = heapq.heappop(heap)
        if cur in settled:
            continue
        settled.add(cur)
        if cur == dst:
            return -neg_width
        cur_width = best[cur]
        for nxt, bw in adj[cur]:
            width = bw if cur_width is None else min(cur_width, bw)
            if nxt not in settled and (nxt not in best or best[nxt] < width):
                best[nxt] = width
                heapq.heappush(heap, (-width, nxt))
    raise TopologyError(f"no path between {src!r} and {dst!r}")


def parse_topology(text: str) -> ClusterGraph:
    """Parse the line-oriented topology format.

    Directives: ``packetbits <w>`` exactly once, ``node <id> <tau>`` and
    ``link <id1> <id2> <bandwidth>``. ``#`` starts a comment; blank lines are
    ignored. Errors carry the offending line number.
    """
    packet_bits: Optional[int] = None
    nodes: list = []
    links: list = []
    node_ids: set = set()
    link_pairs: set = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0]
        if kind == "packetbits":
            if len(tokens) != 2:
                raise TopologyParseError(line_no, "packetbits takes exactly one value")
            if packet_bits is not None:
                raise TopologyParseError(line_no, "packetbits given more than once")
            try:
                packet_bits = int(tokens[1])
            except ValueError:
                raise TopologyParseError(line_no, f"bad packet size {tokens[1]!r}") from None
            if packet_bits <= 0:
                raise TopologyParseError(line_no, "packet size must be positive")
        elif kind == "node":
            if len(tokens) != 3:
                raise TopologyParseError(line_no, "node takes an id and a power")
            nid = tokens[1]
            if not nid.isalnum():
                raise TopologyParseError(line_no, f"bad node id {nid!r}")
            try:
                tau = Fraction(tokens[2])
            except (ValueError, ZeroDivisionError):
                raise TopologyParseError(line_no, f"bad power {tokens[2]!r}") from None
            if tau < 0:
                raise TopologyParseError(line_no, "power must be non-negative")
            if nid in node_ids:
                raise TopologyParseError(line_no, f"duplicate node id {nid!r}")
            node_ids.add(nid)
            nodes.append(NodeSpec(id=nid, tau=tau))
        elif kind == "link":
            if len(tokens) != 4:
                raise TopologyParseError(line_no, "link takes two ids and a bandwidth")
            a, b = tokens[1], tokens[2]
            for endpoint in (a, b):
                if endpoint not in node_ids:
                    raise TopologyParseError(line_no, f"link references unknown node {endpoint!r}")
            if a == b:
                raise TopologyParseError(line_no, f"self link on {a!r}")
            if (min(a, b), max(a, b)) in link_pairs:
                raise TopologyParseError(line_no, f"duplicate link {a!r}-{b!r}")
            link_pairs.add((min(a, b), max(a, b)))
            try:
                bw = Fraction(tokens[3])
            except (ValueError, ZeroDivisionError):
                raise TopologyParseError(line_no, f"bad bandwidth {tokens[3]!r}") from None
            if bw < 0:
                raise TopologyParseError(line_no, "bandwidth must be non-negative")
            links.append(LinkSpec(a=a, b=b, bandwidth=bw))
        else:
            raise TopologyParseError(line_no, f"unknown directive {kind!r}")
    if packet_bits is None:
        raise TopologyParseError(len(text.splitlines()) or 1, "missing packetbits directive")
    return ClusterGraph(nodes=tuple(nodes), links=tuple(links), packet_bits=packet_bits)


def _format_fraction(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def serialize_topology(graph: ClusterGraph) -> str:
    """Canonical text for a cluster; parse(serialize(g)) reproduces g."""
    out = [f"packetbits {graph.packet_bits}"]
    for n in sorted(graph.nodes, key=lambda n: n.id):
        out.append(f"node {n.id} {_format_fraction(n.tau)}")
    for l in sorted(graph.links, key=lambda l: (l.a, l.b)):
        out.append(f"link {l.a} {l.b} {_format_fraction(l.bandwidth)}")
    return "\n".join(out) + "\n"


def chain_cluster(
    n: int,
    taus: Optional[Sequence] = None,
    bandwidth=Fraction(10**6),
    packet_bits: int = 1000,
    prefix: str = "n",
) -> ClusterGraph:
    """Synthetic chain cluster helper: n nodes linked in id order."""
    if n < 1:
        raise TopologyError("need at least one node")
    if taus is None:
        taus = [Fraction(1)] * n
    if len(taus) != n:
        raise TopologyError("need one power per node")
    width = len(str(n - 1)) if n > 1 else 1
    ids = [f"{prefix}{i:0{width}d}" for i in range(n)]
    bw = _as_fraction(bandwidth)
    nodes = tuple(NodeSpec(id=i, tau=_as_fraction(t)) for i, t in zip(ids, taus))
    links = tuple(LinkSpec(a=ids[i], b=ids[i + 1], bandwidth=bw) for i in range(n - 1))
    return ClusterGraph(nodes=nodes, links=links, packet_bits=packet_bits)
