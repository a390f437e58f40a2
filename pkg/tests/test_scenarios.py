import json

import pytest

from epilim.scenarios import (
    PROFILES,
    SCENARIOS,
    Check,
    Report,
    reports_to_json,
    run_all,
    scenario_capped_product,
    scenario_slice_envelope,
    scenario_necessity_construction,
)


def test_report_schema_and_ordering():
    r = Report("x", 3, "quick", [Check.equal("b", 1.0, 1.0, 0.0, "s"), Check.at_most("a", 0.0, 1.0, 0.0, "s")], 1.5)
    d = r.to_dict()
    assert d["report_v"] == 1 and [c["name"] for c in d["checks"]] == ["a", "b"]
    assert "wall_time" not in d and r.to_dict(timing=True)["wall_time"] == 1.5


def test_infinite_gaps_fail():
    c = Check.equal("inf", float("inf"), 0.0, 1e9, "s")
    assert not c.passed and json.loads(json.dumps(c.to_dict()))["gap"] == "inf"


def test_example_is_seed_independent_and_exact():
    a, b = scenario_capped_product(seed=0), scenario_capped_product(seed=9, depth=7)
    assert a.passed and b.passed
    assert {c.name: c.lhs for c in a.checks}["semicontinuity-gap"] == 1.0


def test_example_refuses_coarse_depth():
    with pytest.raises(ValueError):
        scenario_capped_product(depth=5)


@pytest.mark.parametrize("build", [scenario_slice_envelope, scenario_necessity_construction])
def test_quick_scenarios_pass_and_repeat(build):
    a, b = build(seed=1, profile="quick"), build(seed=1, profile="quick")
    assert a.passed, [c.name for c in a.checks if not c.passed]
    assert a.to_json() == b.to_json()


def test_run_all_rejects_unknowns():
    with pytest.raises(ValueError):
        run_all(0, "medium")
    with pytest.raises(ValueError):
        run_all(0, "quick", ["nope"])


def test_run_all_quick_is_green():
    code, reports = run_all(seed=5, profile="quick")
    assert code == 0 and sorted(r.scenario for r in reports) == sorted(SCENARIOS)
    assert json.loads(reports_to_json(reports))["pass"]


def test_profiles_are_ordered():
    q, f = PROFILES["quick"], PROFILES["full"]
    assert f["random_instances"] >= 1000 and q["random_instances"] < f["random_instances"]
