"""Scan-based dynamic task balancing for heterogeneous clusters.

The package maps a cluster onto a virtual hyper-grid, balances work with
prefix-scan arithmetic (both at the work-unit and the indivisible-task
level), prices a balancing pass with a closed-form step count, and ships a
discrete-event simulator for measuring when a pass pays off.
"""

from .cost_model import (
    BurstScenario,
    ConcentrateScenario,
    CrossoverQuery,
    CrossoverResult,
    StepCosts,
    algorithm_cost,
    algorithm_steps,
    calibrate_costs,
    estimate_crossover,
    optimal_cost,
    verify_optimality,
)
from .pslb import LineState, UnitMove, UnitMovePlan, assign_tasks, balance_line, line_targets, unit_destination
from .psts import MigrationPlan, Move, PlannedTask, apply, hierarchical_scans, plan
from .scan import PowerProfile, ScanResult, exclusive_scan, power_profile, slice_load
from .simulator import (
    REPORT_COLUMNS,
    Policy,
    SimulationReport,
    SweepConfig,
    SweepResult,
    simulate,
    speedup,
    sweep,
)
from .topology import (
    ClusterGraph,
    GridShape,
    HyperGrid,
    LinkSpec,
    NodeSpec,
    TopologyError,
    TopologyParseError,
    bottleneck_bandwidth,
    chain_cluster,
    embed,
    hypercube_shape,
    optimal_dimension,
    parse_topology,
    serialize_topology,
    slices,
)
from .workload import (
    ArrivalSpec,
    DistSpec,
    TaskSpec,
    WorkloadSpec,
    generate_workload,
    parse_gen_spec,
    parse_tasks,
    serialize_tasks,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalSpec",
    "BurstScenario",
    "ClusterGraph",
    "ConcentrateScenario",
    "CrossoverQuery",
    "CrossoverResult",
    "DistSpec",
    "GridShape",
    "HyperGrid",
    "LineState",
    "LinkSpec",
    "MigrationPlan",
    "Move",
    "NodeSpec",
    "PlannedTask",
    "Policy",
    "PowerProfile",
    "REPORT_COLUMNS",
    "ScanResult",
    "SimulationReport",
    "StepCosts",
    "SweepConfig",
    "SweepResult",
    "TaskSpec",
    "TopologyError",
    "TopologyParseError",
    "UnitMove",
    "UnitMovePlan",
    "WorkloadSpec",
    "algorithm_cost",
    "algorithm_steps",
    "apply",
    "assign_tasks",
    "balance_line",
    "bottleneck_bandwidth",
    "calibrate_costs",
    "chain_cluster",
    "embed",
    "estimate_crossover",
    "exclusive_scan",
    "generate_workload",
    "hierarchical_scans",
    "hypercube_shape",
    "line_targets",
    "optimal_cost",
    "optimal_dimension",
    "parse_gen_spec",
    "parse_tasks",
    "parse_topology",
    "plan",
    "power_profile",
    "serialize_tasks",
    "serialize_topology",
    "simulate",
    "slice_load",
    "slices",
    "speedup",
    "sweep",
    "unit_destination",
    "verify_optimality",
]
