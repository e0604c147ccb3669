import os
from pathlib import Path

import pytest

import datamarket

SCENARIOS = Path(os.environ.get("DATAMARKET_SCENARIO_DIR", Path(__file__).resolve().parents[2] / "scenarios"))


def test_month_long_subscription():
    report = datamarket.run_scenario_file(str(SCENARIOS / "month.yaml"))
    (contract,) = report["contracts"]
    assert contract["transfers"] == 1488
    assert contract["full_settlements"] == 14
    assert contract["partial_settlements"] == 1
    assert contract["revenue"] == "29.76"
    assert contract["status"] == "completed"
    assert report["max_abs_residual"] == "0.00"


def test_runs_are_repeatable(tmp_path):
    text = (SCENARIOS / "month.yaml").read_text()
    a = datamarket.run_scenario(text, seed=9)
    b = datamarket.run_scenario(text, seed=9)
    assert a["digest"] == b["digest"]
    datamarket.run_scenario_file(str(SCENARIOS / "month.yaml"), metrics_out=str(tmp_path))
    assert (tmp_path / "contracts.txt").read_text().startswith("contract|address|")


def test_bad_scenario_raises():
    with pytest.raises(datamarket.ScenarioError):
        datamarket.run_scenario("duration: 10\nbrokers: []\n")
    with pytest.raises(ValueError):
        datamarket.validate_scenario("duration: [1\n")


def test_match_pairs():
    listings = [
        {"id": 1, "data_type": "T", "unit_cost": "0.02", "sampling_frequency": 30},
        {"id": 2, "data_type": "T", "unit_cost": "0.05", "sampling_frequency": 30},
        {"id": 3, "data_type": "H", "unit_cost": "0.01", "sampling_frequency": 30},
    ]
    queries = [{"id": 10, "data_type": "T", "budget": "0.03", "frequency_required": 30}]
    assert datamarket.match_pairs(listings, queries) == [(10, 1)]


def test_negotiate():
    single = datamarket.negotiate("consumer", "0.03", ["0.02"], ["0.015"])
    assert single == {"state": "accepted", "rounds": 0, "winner": 0, "price": "0.02"}
    many = datamarket.negotiate("consumer", "0.03", ["0.025", "0.028"], ["0.02", "0.01"])
    assert many["state"] in ("accepted", "failed")
    assert many["rounds"] <= 5


def test_reputation_and_admission():
    assert datamarket.apply_reputation("1.00", ["dispute_lodged", "dispute_at_fault"]) == "0.70"
    out = datamarket.vote_broker_admission(4, {1: "accept", 2: "challenge"}, {1: 3, 2: 1}, [1, 2, 3])
    assert out["admitted"] is True
