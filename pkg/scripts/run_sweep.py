"""Scaling study: speedup of one balancing pass across cluster sizes.

For each node count the script builds an equal-power chain, embeds it in a
binary hyper-grid, drops a fixed task budget onto the first half of the
nodes, and compares a run without balancing against one pass at time zero.
It also bisects, per size, the least imbalance at which a pass pays for
itself. Results land in results/sweep.csv.
"""

from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from scansched.cli import _csv_text
from scansched.simulator import REPORT_COLUMNS, SweepConfig, sweep


def main() -> None:
    config = SweepConfig(
        node_counts=(2, 4, 8, 16, 32, 64),
        p=Fraction(20),
        q=Fraction(0),
        m=1024,
        beta=4,
        origin_fraction=Fraction(1, 2),
        seed=0,
    )
    results = sweep(config)
    out = Path(__file__).resolve().parents[1] / "results"
    out.mkdir(exist_ok=True)
    path = out / "sweep.csv"
    path.write_text(_csv_text(REPORT_COLUMNS, [r.row() for r in results]), encoding="utf-8")
    print(f"{'n':>4} {'speedup':>9} {'crossover phi':>14}")
    for r in results:
        phi = f"{float(r.crossover.phi):.4f}" if r.crossover and r.crossover.phi is not None else "-"
        print(f"{r.n_nodes:>4} {float(r.speedup):>9.4f} {phi:>14}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
