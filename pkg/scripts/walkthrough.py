"""Narrated balancing pass over the bundled 18-node fixture.

Prints the hierarchical scans, the top-level classification, the sender's
kept/migrating split, the final per-node loads after plan plus apply, and
the simulated makespan with and without the pass.
"""

from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from scansched import psts
from scansched.cost_model import StepCosts
from scansched.simulator import Policy, simulate, speedup
from scansched.topology import GridShape, embed, parse_topology
from scansched.workload import parse_tasks

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    cluster = parse_topology((ROOT / "fixtures" / "grid18.topo").read_text(encoding="utf-8"))
    tasks = parse_tasks((ROOT / "fixtures" / "backlog4000.tasks").read_text(encoding="utf-8"))
    hg = embed(cluster, GridShape((3, 6)))
    taus = cluster.tau_by_id

    loads = {nid: 0 for nid in cluster.real_ids}
    for t in tasks:
        loads[t.origin] += t.beta
    print("initial loads per line:")
    for start in range(0, 18, 6):
        row = hg.placement[start : start + 6]
        print(" ", {nid: loads[nid] for nid in row})

    top = psts.hierarchical_scans(hg, loads, taus)[-1].groups[0]
    print(f"level-2 load scan {top.loads.prefix} total {top.loads.total}")
    print(f"level-2 power scan {top.powers.prefix} total {top.powers.total}")

    summaries = psts.classify_slices(
        [sum(loads[n] for n in hg.placement[s : s + 6]) for s in range(0, 18, 6)],
        [sum(taus[n] for n in hg.placement[s : s + 6]) for s in range(0, 18, 6)],
    )
    for s in summaries:
        print(f"line {s.rank + 1}: load {s.load} target {s.target} -> {s.role.value}")

    sender = summaries[1]
    line2 = hg.placement[6:12]
    kept, migrating = psts.sender_split([loads[n] for n in line2], sender.target)
    print(f"sender keeps {kept}, migrates {migrating}")
    deficits = [s.target - s.load for s in summaries if s.role is psts.Role.RECEIVER]
    routed = psts.route_migrations(migrating, deficits)
    print(f"stream start offsets {routed.start_offsets}")

    views = [psts.PlannedTask(id=t.id, beta=t.beta, mu=t.mu, node=t.origin) for t in tasks]
    plan_ = psts.plan(hg, views, taus)
    moved = psts.apply(plan_, views)
    final = {nid: 0 for nid in cluster.real_ids}
    for t in moved:
        final[t.node] += t.beta
    print(f"plan: {len(plan_.moves)} moves, {plan_.units} units, {plan_.packets} packets")
    print("final loads (all equal 80 per unit power):")
    for start in range(0, 18, 6):
        row = hg.placement[start : start + 6]
        print(" ", {nid: f"{final[nid]} = 80*{taus[nid]}" for nid in row})

    costs = StepCosts(Fraction(1, 1000), Fraction(1, 2000))
    base = simulate(cluster, hg, tasks, Policy.none(), costs)
    bal = simulate(cluster, hg, tasks, Policy.at(0), costs)
    print(f"makespan without pass {float(base.makespan):.3f}s, with pass {float(bal.makespan):.3f}s")
    print(f"speedup {float(speedup(base, bal)):.3f}, pass overhead {float(bal.overhead):.3f}s")


if __name__ == "__main__":
    main()
