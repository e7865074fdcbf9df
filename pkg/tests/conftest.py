from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest

from scansched import psts
from scansched.topology import GridShape, embed, parse_topology
from scansched.workload import parse_tasks

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"

# 18-node walkthrough instance: three rows of six, uneven powers, a fixed
# unit-task backlog per node. One pass balances it to exactly 80 units per
# unit of power.
GRID18_POWERS = {
    "v11": 3, "v12": 4, "v13": 5, "v14": 2, "v15": 1, "v16": 5,
    "v21": 1, "v22": 2, "v23": 2, "v24": 1, "v25": 1, "v26": 3,
    "v31": 5, "v32": 1, "v33": 4, "v34": 2, "v35": 6, "v36": 2,
}
GRID18_BACKLOG = {
    "v11": 250, "v12": 300, "v13": 150, "v14": 100, "v15": 50, "v16": 150,
    "v21": 200, "v22": 300, "v23": 100, "v24": 400, "v25": 300, "v26": 700,
    "v31": 200, "v32": 50, "v33": 50, "v34": 200, "v35": 300, "v36": 200,
}
LINE1_POWERS = (3, 4, 5, 2, 1, 5)
LINE1_LOADS = (250, 300, 150, 100, 50, 150)
LINE2_LOADS = (200, 300, 100, 400, 300, 700)


@pytest.fixture(scope="session")
def grid18_cluster():
    return parse_topology((FIXTURES / "grid18.topo").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def grid18_tasks():
    return parse_tasks((FIXTURES / "backlog4000.tasks").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def grid18(grid18_cluster):
    return embed(grid18_cluster, GridShape((3, 6)))


@pytest.fixture(scope="session")
def grid18_plan(grid18_cluster, grid18, grid18_tasks):
    views = tuple(
        psts.PlannedTask(id=t.id, beta=t.beta, mu=t.mu, node=t.origin) for t in grid18_tasks
    )
    return psts.plan(grid18, views, grid18_cluster.tau_by_id), views


def final_loads(plan_, views, node_ids):
    placed = psts.apply(plan_, views)
    out = {nid: 0 for nid in node_ids}
    for t in placed:
        out[t.node] += t.beta
    return out
