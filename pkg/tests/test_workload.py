from fractions import Fraction

import pytest

from scansched.workload import (
    ArrivalSpec,
    DistSpec,
    TaskSpec,
    WorkloadSpec,
    generate_workload,
    parse_gen_spec,
    parse_tasks,
    serialize_tasks,
    total_work,
)


def test_task_spec_validation():
    t = TaskSpec(id="t1", origin="a", beta=3, mu=0, arrival=Fraction(1, 2))
    assert t.arrival == Fraction(1, 2)
    with pytest.raises(ValueError):
        TaskSpec(id="t1", origin="a", beta=0, mu=0, arrival=0)
    with pytest.raises(ValueError):
        TaskSpec(id="t1", origin="a", beta=1, mu=-1, arrival=0)
    with pytest.raises(ValueError):
        TaskSpec(id="t1", origin="a", beta=1, mu=0, arrival=-1)
    with pytest.raises(ValueError):
        TaskSpec(id="bad id", origin="a", beta=1, mu=0, arrival=0)


def test_dist_spec_validation():
    DistSpec("uniform", 1, 9)
    DistSpec("poisson", Fraction(5, 2))
    with pytest.raises(ValueError):
        DistSpec("uniform", 9, 1)
    with pytest.raises(ValueError):
        DistSpec("uniform", 1)
    with pytest.raises(ValueError):
        DistSpec("poisson", 0)
    with pytest.raises(ValueError):
        DistSpec("normal", 1, 2)


def test_arrival_spec_validation():
    ArrivalSpec("window", 0, 10)
    ArrivalSpec("poisson", 2)
    with pytest.raises(ValueError):
        ArrivalSpec("window", 5, 1)
    with pytest.raises(ValueError):
        ArrivalSpec("poisson", 0)


def test_generate_workload_counts_and_clamps():
    spec = WorkloadSpec(
        m=200,
        beta=DistSpec("poisson", Fraction(1, 2)),  # often samples 0, clamped to 1
        mu=DistSpec("uniform", 0, 3),
        arrivals=ArrivalSpec("window", 0, 10),
        seed=11,
    )
    tasks = generate_workload(spec, ("a", "b", "c"))
    assert len(tasks) == 200
    assert all(t.beta >= 1 for t in tasks)
    assert all(0 <= t.mu <= 3 for t in tasks)
    assert all(0 <= t.arrival <= 10 for t in tasks)
    assert {t.origin for t in tasks} == {"a", "b", "c"}
    assert len({t.id for t in tasks}) == 200


def test_generate_workload_deterministic():
    spec = WorkloadSpec(m=50, beta=DistSpec("uniform", 1, 9), seed=3)
    a = generate_workload(spec, ("x", "y"))
    b = generate_workload(spec, ("x", "y"))
    assert serialize_tasks(a) == serialize_tasks(b)
    c = generate_workload(WorkloadSpec(m=50, beta=DistSpec("uniform", 1, 9), seed=4), ("x", "y"))
    assert serialize_tasks(a) != serialize_tasks(c)


def test_generate_workload_poisson_arrivals_increase():
    spec = WorkloadSpec(m=80, arrivals=ArrivalSpec("poisson", Fraction(3)), seed=5)
    tasks = generate_workload(spec, ("a",))
    arrivals = [t.arrival for t in tasks]
    assert all(b > a for a, b in zip(arrivals, arrivals[1:]))
    assert arrivals[0] > 0


def test_generate_workload_needs_nodes():
    with pytest.raises(ValueError):
        generate_workload(WorkloadSpec(m=1), ())


def test_serialize_parse_round_trip():
    tasks = (
        TaskSpec(id="a1", origin="n0", beta=3, mu=2, arrival=Fraction(0)),
        TaskSpec(id="a2", origin="n1", beta=1, mu=0, arrival=Fraction(7, 3)),
    )
    text = serialize_tasks(tasks)
    assert parse_tasks(text) == tasks
    assert "task a2 n1 1 0 7/3" in text


def test_parse_tasks_reports_line_numbers():
    with pytest.raises(ValueError, match="line 2"):
        parse_tasks("task a n0 1 0 0\ntask a n0 1 0 0\n")
    with pytest.raises(ValueError, match="line 1"):
        parse_tasks("task a n0 one 0 0\n")
    with pytest.raises(ValueError, match="line 3"):
        parse_tasks("# header\n\njob a n0 1 0 0\n")
    with pytest.raises(ValueError, match="line 1"):
        parse_tasks("task a n0 1 0\n")


def test_parse_tasks_ignores_comments():
    tasks = parse_tasks("# hi\ntask a n0 2 1 0 # trailing\n\n")
    assert len(tasks) == 1
    assert tasks[0].beta == 2


def test_total_work():
    tasks = parse_tasks("task a n0 2 0 0\ntask b n0 5 0 0\n")
    assert total_work(tasks) == 7


def test_parse_gen_spec_full():
    spec = parse_gen_spec("m=4000,beta=uniform:1:100,mu=poisson:5,arrivals=window:0:100,seed=42")
    assert spec.m == 4000
    assert spec.beta == DistSpec("uniform", 1, 100)
    assert spec.mu == DistSpec("poisson", 5)
    assert spec.arrivals == ArrivalSpec("window", 0, 100)
    assert spec.seed == 42


def test_parse_gen_spec_defaults():
    spec = parse_gen_spec("m=10")
    assert spec.beta == DistSpec("uniform", 1, 1)
    assert spec.mu == DistSpec("uniform", 1, 1)
    assert spec.arrivals == ArrivalSpec("window", 0, 0)
    assert spec.seed == 0


def test_parse_gen_spec_errors():
    with pytest.raises(ValueError):
        parse_gen_spec("beta=uniform:1:2")  # m missing
    with pytest.raises(ValueError):
        parse_gen_spec("m=5,m=6")
    with pytest.raises(ValueError):
        parse_gen_spec("m=5,shape=2x2")
    with pytest.raises(ValueError):
        parse_gen_spec("m=5,beta=normal:0:1")
    with pytest.raises(ValueError):
        parse_gen_spec("m=5,arrivals=poisson:0:1")
