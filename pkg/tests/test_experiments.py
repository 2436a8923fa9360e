from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fogalloc.experiments import (
    GridRow,
    SweepRow,
    TrendSpec,
    assert_trends,
    emit_csv,
    run_availability_sweep,
    run_cost_sweep,
    run_experiment,
    trend_spec_for,
)
from fogalloc.model import min_replicas
from fogalloc.scenario import (
    FixedCost,
    ScenarioError,
    ScenarioSpec,
    UniformIntCost,
    UserRange,
    load_scenario,
)
from fogalloc.solver import Status


def strip_wall_time(csv_text):
    return [line.rsplit(",", 1)[0] for line in csv_text.splitlines()]


def fig5_base(**kw):
    spec = ScenarioSpec(server_count=30, server_capacity=50, demand=2, cost_model=FixedCost(10),
                        availability=0.9, service_level=0.9, multicast_bound=30)
    return replace(spec, **kw)


def test_fixed_sweep_is_linear():
    spec = load_scenario("fig2-fixed")
    rows = run_cost_sweep(spec)
    assert [r.user_count for r in rows] == list(range(1, 51))
    assert all(r.status == Status.Optimal and r.total_cost == 20 * r.user_count for r in rows)
    assert all(r.avg_cost_per_unit == 10 for r in rows)
    assert assert_trends(rows, trend_spec_for(spec)) == []


def test_fixed_sweep_saturates_past_total_capacity():
    spec = replace(load_scenario("fig2-fixed"), user_range=UserRange(249, 252))
    rows = run_cost_sweep(spec)
    assert [r.status for r in rows] == [Status.Optimal, Status.Optimal,
                                        Status.Infeasible, Status.Infeasible]
    assert rows[2].total_cost is None and rows[2].avg_cost_per_unit is None


def test_grid_replication_costs():
    rows = run_availability_sweep(fig5_base(), [0.5, 0.9], [0.5, 0.9], user_count=10)
    cost = {(r.availability, r.service_level): r.total_cost for r in rows}
    assert cost[(0.5, 0.9)] == 10 * 2 * 10 * 4 == 800
    assert cost[(0.9, 0.5)] == 200
    assert assert_trends(rows, TrendSpec(grid_monotone=True)) == []


def test_grid_cells_over_capacity_are_infeasible():
    # k = 4 replicas at p=0.5, l=0.9; 4 * 250 * 2 = 2000 > 30 * 50
    rows = run_availability_sweep(fig5_base(), [0.5], [0.8, 0.9], user_count=250)
    assert [(r.status, r.total_cost) for r in rows] == [(Status.Optimal, 15000.0),
                                                        (Status.Infeasible, None)]


def test_grid_rejects_out_of_range_values():
    with pytest.raises(ScenarioError):
        run_availability_sweep(fig5_base(), [1.0], [0.5], user_count=1)


@given(st.integers(1, 6), st.floats(0.3, 0.95), st.floats(0.3, 0.95),
       st.integers(1, 3), st.integers(0, 20), st.integers(1, 8))
@settings(max_examples=60, deadline=None)
def test_homogeneous_optimum_is_analytic(n_srv, p, l, d, c, users):
    k = min_replicas(p, l)
    spec = ScenarioSpec(server_count=n_srv, server_capacity=d * users, demand=d,
                        cost_model=FixedCost(c), availability=p, service_level=l,
                        multicast_bound=n_srv, user_range=UserRange(users, users))
    (row,) = run_cost_sweep(spec)
    if k > n_srv:
        assert row.status == Status.Infeasible
    else:
        assert row.status == Status.Optimal and row.total_cost == users * d * c * k


def test_trend_check_names_the_offending_pair():
    rows = run_cost_sweep(replace(load_scenario("fig2-uniform"), user_range=UserRange(1, 5)))
    corrupted = list(rows)
    corrupted[3] = replace(rows[3], total_cost=rows[2].total_cost - 1)
    (v,) = assert_trends(corrupted, TrendSpec())
    assert v.check == "nondecreasing_cost" and (v.first, v.second) == ("U=3", "U=4")


def test_grid_trend_catches_cost_rising_with_availability():
    good = GridRow(1, Status.Optimal, 20.0, 10.0, 1, 0.0, availability=0.5, service_level=0.5)
    bad = GridRow(1, Status.Optimal, 40.0, 20.0, 1, 0.0, availability=0.9, service_level=0.5)
    (v,) = assert_trends([good, bad], TrendSpec(grid_monotone=True))
    assert v.check == "nonincreasing_in_availability"


def test_linearity_violation_detected():
    spec = load_scenario("fig2-fixed")
    row = SweepRow(3, Status.Optimal, 61.0, 61 / 6, 3, 0.0)
    (v,) = assert_trends([row], trend_spec_for(spec))
    assert v.check == "linearity"


def test_emit_csv_format():
    assert emit_csv([]) == "user_count,status,total_cost,avg_cost_per_unit,nodes,wall_time\n"
    ok = SweepRow(5, Status.Optimal, 100.0, 10.0, 7, 0.25)
    bad = SweepRow(250, Status.Infeasible, None, None, 0, 0.5)
    lines = emit_csv([ok, bad]).splitlines()
    assert lines[1] == "5,Optimal,100.000,10.0000,7,0.250000"
    assert lines[2] == "250,Infeasible,,,0,0.500000"
    grid = GridRow(1, Status.Optimal, 20.0, 10.0, 1, 0.0, availability=0.9, service_level=0.5)
    assert emit_csv([grid]).splitlines()[0].startswith("availability,service_level,user_count")


def test_sweep_reproducible():
    spec = replace(load_scenario("fig2-normal3"), user_range=UserRange(1, 30, 3))
    assert strip_wall_time(emit_csv(run_cost_sweep(spec))) == \
        strip_wall_time(emit_csv(run_cost_sweep(spec)))


def test_uniform_costs_beat_fixed_when_unsaturated():
    fixed = replace(load_scenario("fig2-fixed"), user_range=UserRange(10, 10))
    uniform = replace(fixed, cost_model=UniformIntCost(1, 19))
    wins = sum(run_cost_sweep(uniform.with_seed(s))[0].total_cost <= run_cost_sweep(fixed)[0].total_cost
               for s in range(30))
    assert wins >= 24


@pytest.mark.parametrize("preset", ["fig2", "fig4", "fig5"])
def test_presets_pass_their_trend_checks(preset):
    result = run_experiment(preset)
    assert result.violations == []


def test_fig5_preset_has_infeasible_cells():
    csv_text = run_experiment("fig5").csv
    assert ",Infeasible," in csv_text and ",Optimal," in csv_text


def test_experiment_rejects_bad_documents(tmp_path):
    with pytest.raises(ScenarioError):
        run_experiment("fig9")
    broken = tmp_path / "broken.json"
    broken.write_text('{"experiment": "cost_sweep", "scenarios": [{"server_count": 1}]}')
    with pytest.raises(ScenarioError):
        run_experiment(str(broken))
    garbled = tmp_path / "garbled.json"
    garbled.write_text("{not json")
    with pytest.raises(ScenarioError):
        run_experiment(str(garbled))
