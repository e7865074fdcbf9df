from fractions import Fraction

import pytest

from scansched.pslb import LineState, assign_tasks, balance_line, line_targets, unit_destination
from scansched.psts import PlannedTask
from scansched.scan import power_profile

from conftest import LINE1_LOADS, LINE1_POWERS


@pytest.fixture(scope="module")
def line1():
    return power_profile(LINE1_POWERS)


def test_unit_destination_boundaries_line1(line1):
    # intervals for W=1000: [0,150) [150,350) [350,600) [600,700) [700,750) [750,1000)
    expectations = {
        0: 0, 149: 0, 150: 1, 349: 1, 350: 2, 599: 2,
        600: 3, 699: 3, 700: 4, 749: 4, 750: 5, 999: 5,
    }
    for u, j in expectations.items():
        assert unit_destination(u, line1.lam, 1000) == j


def test_unit_destination_validates_range(line1):
    with pytest.raises(ValueError):
        unit_destination(-1, line1.lam, 1000)
    with pytest.raises(ValueError):
        unit_destination(1000, line1.lam, 1000)
    with pytest.raises(ValueError):
        unit_destination(0, line1.lam, 0)


def test_unit_destination_skips_zero_power_positions():
    p = power_profile([0, 2, 0, 2, 0])
    dests = {unit_destination(u, p.lam, 8) for u in range(8)}
    assert dests == {1, 3}
    assert unit_destination(0, p.lam, 8) == 1
    assert unit_destination(4, p.lam, 8) == 3


def test_line_targets_line1(line1):
    assert line_targets(line1, 1000) == (150, 200, 250, 100, 50, 250)
    assert line_targets(line1, 0) == (0, 0, 0, 0, 0, 0)


def test_line_targets_sum_and_rounding():
    p = power_profile([1, 1, 1])
    assert line_targets(p, 10) == (4, 3, 3)
    assert sum(line_targets(p, 10)) == 10


def test_line_targets_match_unit_destinations(line1):
    w = 1000
    counts = [0] * len(line1.taus)
    for u in range(w):
        counts[unit_destination(u, line1.lam, w)] += 1
    assert tuple(counts) == line_targets(line1, w)


def test_balance_line_reaches_targets(line1):
    state = LineState(nodes=tuple("abcdef"), loads=LINE1_LOADS, profile=line1)
    plan = balance_line(state)
    result = list(LINE1_LOADS)
    for m in plan.moves:
        assert m.count > 0 and m.src != m.dst
        result[m.src] -= m.count
        result[m.dst] += m.count
    assert tuple(result) == line_targets(line1, 1000)
    assert sum(result) == 1000


def test_balance_line_idempotent(line1):
    targets = line_targets(line1, 1000)
    state = LineState(nodes=tuple("abcdef"), loads=targets, profile=line1)
    assert balance_line(state).moves == ()


def test_balance_line_empty():
    p = power_profile([1, 2])
    state = LineState(nodes=("a", "b"), loads=(0, 0), profile=p)
    assert balance_line(state).moves == ()


def test_line_state_rejects_loaded_virtual_position():
    p = power_profile([1, 0])
    with pytest.raises(ValueError):
        LineState(nodes=("a", "b"), loads=(1, 1), profile=p)


def test_assign_tasks_first_unit_rule():
    # two tasks of sizes 6 and 4 over two equal nodes: first units 0 and 6,
    # targets [5,5], so the first task stays and the second goes right
    p = power_profile([1, 1])
    tasks = [PlannedTask(id="a", beta=6, mu=0, node="x"), PlannedTask(id="b", beta=4, mu=0, node="x")]
    assert assign_tasks(tasks, p, 10) == [0, 1]


def test_assign_tasks_single_indivisible_task_stays():
    p = power_profile([1, 1])
    tasks = [PlannedTask(id="a", beta=10, mu=0, node="x")]
    assert assign_tasks(tasks, p, 10) == [0]


def test_assign_tasks_validates_total():
    p = power_profile([1, 1])
    tasks = [PlannedTask(id="a", beta=3, mu=0, node="x")]
    with pytest.raises(ValueError):
        assign_tasks(tasks, p, 4)


def test_assign_tasks_deviation_below_beta_max(line1):
    tasks = []
    sizes = [7, 3, 9, 1, 1, 4, 8, 2, 6, 5] * 20
    for i, b in enumerate(sizes):
        tasks.append(PlannedTask(id=f"t{i:03d}", beta=b, mu=0, node="x"))
    w = sum(sizes)
    positions = assign_tasks(tasks, line1, w)
    loads = [0] * len(line1.taus)
    for t, j in zip(tasks, positions):
        loads[j] += t.beta
    targets = line_targets(line1, w)
    beta_max = max(sizes)
    assert all(abs(l - t) < beta_max for l, t in zip(loads, targets))


def test_assign_tasks_monotone(line1):
    tasks = [PlannedTask(id=f"t{i}", beta=(i % 4) + 1, mu=0, node="x") for i in range(60)]
    w = sum(t.beta for t in tasks)
    positions = assign_tasks(tasks, line1, w)
    assert positions == sorted(positions)
