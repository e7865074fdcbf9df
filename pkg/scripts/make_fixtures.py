"""Regenerate the checked-in 18-node walkthrough fixture.

The cluster is a chain of three rows of six nodes with deliberately uneven
powers; the task file puts a fixed unit-task backlog on every node. Running
one balancing pass over this instance drains every queue to exactly 80
units per unit of power, so the outputs make a compact end-to-end check.
"""

from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from scansched.topology import ClusterGraph, LinkSpec, NodeSpec, serialize_topology
from scansched.workload import TaskSpec, serialize_tasks

POWERS = {
    "v11": 3, "v12": 4, "v13": 5, "v14": 2, "v15": 1, "v16": 5,
    "v21": 1, "v22": 2, "v23": 2, "v24": 1, "v25": 1, "v26": 3,
    "v31": 5, "v32": 1, "v33": 4, "v34": 2, "v35": 6, "v36": 2,
}

BACKLOG = {
    "v11": 250, "v12": 300, "v13": 150, "v14": 100, "v15": 50, "v16": 150,
    "v21": 200, "v22": 300, "v23": 100, "v24": 400, "v25": 300, "v26": 700,
    "v31": 200, "v32": 50, "v33": 50, "v34": 200, "v35": 300, "v36": 200,
}


def build_cluster() -> ClusterGraph:
    ids = sorted(POWERS)
    nodes = tuple(NodeSpec(id=i, tau=Fraction(POWERS[i])) for i in ids)
    links = tuple(LinkSpec(a=ids[i], b=ids[i + 1], bandwidth=Fraction(10**6)) for i in range(len(ids) - 1))
    return ClusterGraph(nodes=nodes, links=links, packet_bits=1000)


def build_tasks() -> tuple:
    tasks = []
    for nid in sorted(BACKLOG):
        for k in range(BACKLOG[nid]):
            tasks.append(TaskSpec(id=f"{nid}x{k:03d}", origin=nid, beta=1, mu=1, arrival=Fraction(0)))
    return tuple(tasks)


def main() -> None:
    root = Path(__file__).resolve().parents[1] / "fixtures"
    root.mkdir(exist_ok=True)
    (root / "grid18.topo").write_text(serialize_topology(build_cluster()), encoding="utf-8")
    (root / "backlog4000.tasks").write_text(serialize_tasks(build_tasks()), encoding="utf-8")
    print(f"wrote {root / 'grid18.topo'} and {root / 'backlog4000.tasks'}")


if __name__ == "__main__":
    main()
