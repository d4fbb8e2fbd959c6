# -*- coding: utf-8 -*-
from types import SimpleNamespace

import pytest

from experiments.run_acceptance import ENTRY_LEVELS, ORACLE_PATH, AcceptanceRunner
from src.expdyn.report_writer import read_report, write_report


def _outcome(fractions, grid=100, t_max=100_000):
    return {"reports": {str(x): SimpleNamespace(fraction=f) for x, f in zip(ENTRY_LEVELS, fractions)},
            "monotone_x": True, "monotone_t": True, "grid": grid, "t_max": t_max}


@pytest.fixture
def runner(fast_config, tmp_path):
    return AcceptanceRunner(fast_config, str(tmp_path / "results"))


def test_committed_oracle_covers_every_level():
    oracle = read_report(str(ORACLE_PATH))
    assert (oracle["grid"], oracle["t_max"]) == (100, 100_000)
    fractions = [oracle["fractions"][str(x)] for x in ENTRY_LEVELS]
    assert all(0.0 < f <= 1.0 for f in fractions)
    assert fractions == sorted(fractions, reverse=True)
    for x in ENTRY_LEVELS:
        assert oracle["entered"][str(x)] / oracle["total"] == pytest.approx(oracle["fractions"][str(x)], abs=1e-6)


def test_entry_gate_uses_half_the_oracle(runner):
    oracle = read_report(str(ORACLE_PATH))["fractions"]
    half = [0.5 * oracle[str(x)] for x in ENTRY_LEVELS]
    assert runner.check_entry_stats(_outcome(half))["passed"]
    below = [h - 0.01 for h in half]
    assert not runner.check_entry_stats(_outcome(below))["passed"]


def test_missing_oracle_fails_instead_of_recording(runner, tmp_path):
    missing = tmp_path / "nowhere.json"
    details = runner.check_entry_stats(_outcome([1.0, 1.0, 1.0]), oracle_path=missing)
    assert details["passed"] is False
    assert "missing" in details["error"]
    assert not missing.exists()


def test_oracle_for_other_settings_fails(runner, tmp_path):
    path = tmp_path / "oracle.json"
    write_report({"grid": 50, "t_max": 100_000, "fractions": {str(x): 0.1 for x in ENTRY_LEVELS}}, "json", str(path))
    details = runner.check_entry_stats(_outcome([1.0, 1.0, 1.0]), oracle_path=path)
    assert details["passed"] is False
    assert "grid=50" in details["error"]


def test_quick_run_checks_monotonicity_only(fast_config, tmp_path):
    quick = AcceptanceRunner(fast_config, str(tmp_path / "results"), quick=True)
    outcome = _outcome([0.0, 0.0, 0.0], grid=30, t_max=5000)
    assert quick.check_entry_stats(outcome)["passed"]
    outcome["monotone_x"] = False
    assert not quick.check_entry_stats(outcome)["passed"]
