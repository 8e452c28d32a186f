import json

import pytest

from canyon_sim.config import RunConfig, parse_seed
from canyon_sim.errors import ConfigError
from canyon_sim.pathloss import SConvention
from canyon_sim.smallscale import DEFAULT_TABLE
from canyon_sim.validation import SUITES, run_validation, select_suites


def test_select_suites():
    assert select_suites(None) == list(SUITES)
    assert select_suites(["pathloss"]) == ["pathloss"]
    assert select_suites(["stats,morphology"]) == ["morphology", "stats"]
    with pytest.raises(ValueError, match="nope"):
        select_suites(["nope"])


def test_every_suite_passes_on_defaults():
    report = run_validation()
    assert report.passed, [f"{r.suite}: {r.name}: {r.detail}" for r in report.failures]
    assert {r.suite for r in report.results} == set(SUITES)
    doc = report.to_dict()
    assert doc["n_failed"] == 0 and doc["n_checks"] == len(report.results)


def test_corrupted_table_names_the_entry():
    bad = DEFAULT_TABLE.with_overrides({"NLOS.aoa.alpha": -1.0})
    report = run_validation(["smallscale"], bad)
    assert not report.passed
    assert all(r.suite == "smallscale" for r in report.results)
    assert any("NLOS.aoa" in r.detail for r in report.failures)


# -- run configuration ------------------------------------------------------------

def test_seed_precedence(monkeypatch):
    cfg = RunConfig.from_dict({"seed": 5})
    monkeypatch.setenv("CANYON_SIM_SEED", "9")
    assert cfg.seed("3") == 3
    assert cfg.seed(None) == 5
    assert RunConfig().seed(None) == 9
    monkeypatch.delenv("CANYON_SIM_SEED")
    assert RunConfig().seed(None) == 0


@pytest.mark.parametrize("value", ["-1", str(2 ** 64), "abc", 1.5, True])
def test_bad_seeds(value):
    with pytest.raises(ConfigError):
        parse_seed(value, "test")


def test_seed_accepts_u64_and_hex():
    assert parse_seed(str(2 ** 64 - 1), "t") == 2 ** 64 - 1
    assert parse_seed("0x10", "t") == 16


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="bogus"):
        RunConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigError, match="k_e"):
        RunConfig.from_dict({"pathloss": {"k_e": 1}})


def test_pathloss_section(tmp_path):
    cfg = RunConfig.from_dict({"pathloss": {"carrier_frequency_ghz": 28.0,
                                            "breakpoint_distance_m": 70.0}})
    pl = cfg.pathloss()
    assert pl.carrier_frequency == 28.0 and pl.breakpoint_distance == 70.0
    assert cfg.pathloss("normalized").s_convention is SConvention.NORMALIZED_S
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"pathloss": {"s_convention": "sideways"}}).pathloss()


def test_relative_paths_resolve_against_config(tmp_path):
    (tmp_path / "r.json").write_text(json.dumps({
        "region_area_m2": 100.0, "buildings": [{"height_m": 58.0, "footprint_area_m2": 125.0}]}))
    (tmp_path / "cfg.json").write_text(json.dumps({"region": "r.json"}))
    env = RunConfig.load(str(tmp_path / "cfg.json")).env()
    assert env.s == 30.0


def test_environment_sources():
    assert RunConfig.from_dict({"s": 45}).env().s_norm == 1.0
    assert RunConfig.from_dict({"preset": "LCL"}).env().s == 15.0
    with pytest.raises(ConfigError, match="no environment"):
        RunConfig().env()
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"s": "high"}).env()


def test_bad_config_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{\n  'x': 1}")
    with pytest.raises(ConfigError, match="line 2"):
        RunConfig.load(str(p))
    with pytest.raises(ConfigError, match="cannot read"):
        RunConfig.load(str(tmp_path / "absent.json"))
