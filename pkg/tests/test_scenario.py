import copy
import dataclasses
import importlib.resources

import pytest

from resgrid.errors import ParseError, ValidationError
from resgrid.scenario import (
    load_scenario,
    oracle_check,
    run_scenario,
    scenario_from_dict,
)

FIXTURE = importlib.resources.files("resgrid") / "scenarios/two_island_wildfire.yaml"


def minimal_dict():
    return {
        "seed": 1,
        "run": {"horizon": 3, "dt_hours": 1.0},
        "topology": {
            "regions": [{"id": 1, "name": "only", "base_demand_kw": 50}],
            "lines": [{"from": 1, "to": "main", "capacity_kw": 100,
                       "main_tie": True}],
        },
        "agents": {
            "demand": [{"id": 10, "region": 1, "load_max_kw": 50,
                        "utility_weight": 1.0}],
        },
    }


def test_fixture_parses_with_expected_counts():
    sc = load_scenario(str(FIXTURE))
    assert sc.name == "two_island_wildfire"
    assert len(sc.topology.regions) == 6
    assert len(sc.storage_agents) == 3
    assert len(sc.demand_agents) == 4
    assert sc.horizon == 24
    assert sc.mode == "resilient"


def test_missing_file_is_parse_error():
    with pytest.raises(ParseError):
        load_scenario("/no/such/scenario.yaml")


def test_minimal_scenario_runs_flat():
    sc = scenario_from_dict(minimal_dict())
    assert sc.horizon == 3
    result = run_scenario(sc)
    assert all(s.index == 1.0 for s in result.timeline)
    assert result.report.monetary_loss == 0.0


def test_zero_xi_rejected_with_field_path():
    raw = minimal_dict()
    raw["market"] = {"xi": 0}
    with pytest.raises(ValidationError, match="market.xi"):
        scenario_from_dict(raw)


def test_agent_in_unknown_region_rejected():
    raw = minimal_dict()
    raw["agents"]["demand"][0]["region"] = 9
    with pytest.raises(ValidationError, match="region"):
        scenario_from_dict(raw)


def test_duplicate_agent_ids_rejected():
    raw = minimal_dict()
    raw["agents"]["storage"] = [
        {"id": 10, "region": 1, "soc_kwh": 5, "soc_max_kwh": 10,
         "discharge_limit_kw": 2},
    ]
    with pytest.raises(ValidationError, match="unique"):
        scenario_from_dict(raw)


def test_bad_edge_prob_key_rejected():
    raw = minimal_dict()
    raw["hazard"] = {"ignition": [1], "edge_probs": {"nonsense": 0.5}}
    with pytest.raises(ValidationError, match="edge_probs"):
        scenario_from_dict(raw)


def test_unknown_mode_rejected():
    raw = minimal_dict()
    raw["mode"] = "turbo"
    with pytest.raises(ValidationError, match="mode"):
        scenario_from_dict(raw)


def test_run_is_deterministic(tmp_path):
    sc = load_scenario(str(FIXTURE))
    out_a = run_scenario(sc).write_outputs(tmp_path / "a", fmt="json")
    out_b = run_scenario(sc).write_outputs(tmp_path / "b", fmt="json")
    for pa, pb in zip(out_a, out_b):
        assert pa.read_bytes() == pb.read_bytes()


def test_seed_changes_hazard_path():
    sc = load_scenario(str(FIXTURE))
    a = run_scenario(sc)
    b = run_scenario(dataclasses.replace(sc, seed=sc.seed + 1))
    assert [s.burning for s in a.slots] != [s.burning for s in b.slots]


def test_resilient_dominates_baseline_on_fixture():
    sc = load_scenario(str(FIXTURE))
    res = run_scenario(sc)
    base = run_scenario(dataclasses.replace(sc, mode="baseline"))
    assert res.report.p_min >= base.report.p_min
    assert res.report.loss_area <= base.report.loss_area
    assert not base.transactions


def test_served_never_exceeds_demand():
    result = run_scenario(load_scenario(str(FIXTURE)))
    for slot in result.slots:
        for rid, served in slot.served.items():
            assert 0.0 <= served <= slot.demanded[rid] + 1e-9


def test_burning_regions_are_unserved():
    result = run_scenario(load_scenario(str(FIXTURE)))
    for slot in result.slots:
        for rid in slot.burning:
            assert slot.served[rid] == 0.0


def test_transactions_match_soc_trajectories():
    """Event-sourcing audit: replaying every transaction log reproduces the
    recorded SoC endpoints and delivered energy exactly."""
    result = run_scenario(load_scenario(str(FIXTURE)))
    sc = load_scenario(str(FIXTURE))
    eta = {s.id: s.eta_d for s in sc.storage_agents}
    soc = dict(result.soc_initial)
    energy = {}
    for _, log in result.logs:
        log.validate()
        soc, energy = log.replay(soc, eta, energy)
    for sid, traj in result.soc_trajectory.items():
        assert soc[sid] == traj[-1]
    for did, delivered in result.energy_delivered.items():
        assert energy.get(did, 0.0) == delivered


def test_soc_stays_within_bounds():
    sc = load_scenario(str(FIXTURE))
    result = run_scenario(sc)
    bounds = {s.id: (s.soc_min, s.soc_max) for s in sc.storage_agents}
    for sid, traj in result.soc_trajectory.items():
        lo, hi = bounds[sid]
        assert all(lo - 1e-9 <= v <= hi + 1e-9 for v in traj)


def test_oracle_check_on_fixture():
    report = oracle_check(load_scenario(str(FIXTURE)))
    assert report["solves"] > 0
    assert report["max_relative_gap"] <= 5e-2


def test_report_dict_shape():
    result = run_scenario(load_scenario(str(FIXTURE)))
    d = result.report_dict()
    assert d["scenario"] == "two_island_wildfire"
    assert len(d["eight_point_curve"]) == 8
    assert d["t_d"] <= d["t_m"]


def test_csv_outputs_written(tmp_path):
    result = run_scenario(load_scenario(str(FIXTURE)))
    written = result.write_outputs(tmp_path, fmt="csv")
    names = {p.name for p in written}
    assert names == {"timeline.csv", "solver.csv", "transactions.csv",
                     "report.json"}
    header = (tmp_path / "timeline.csv").read_text().splitlines()[0]
    assert header == "t,served_kW,demanded_kW,index"
