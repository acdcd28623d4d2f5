import json

import pytest

from fakebell.config import (
    INTERCEPT_RESEND,
    SCENARIOS,
    TWIN_FSG_ACTIVE,
    config_from_dict,
    default_config,
    load_config,
)
from fakebell.errors import ConfigError


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_roundtrip(scenario):
    cfg = default_config(scenario, n_pairs=123, seed=9)
    again = config_from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again.to_dict() == cfg.to_dict()


def test_partial_config_takes_defaults():
    cfg = config_from_dict({"scenario": TWIN_FSG_ACTIVE, "fsg": {"q": 0.5}})
    assert cfg.analyzers["alice"].is_active
    assert cfg.detectors["bob"].click_threshold == 0.7
    assert cfg.fsg.program.q == 0.5
    assert cfg.window_ns == 5


def test_threshold_follows_analyzer_choice():
    cfg = config_from_dict({"scenario": "twin_fsg_passive", "analyzers": {"bob": {"choice": "active"}}})
    assert cfg.detectors["bob"].click_threshold == 0.7
    assert cfg.detectors["alice"].click_threshold == 0.35


def test_explicit_matrix():
    from fakebell.sources import fsg_program

    cfg = config_from_dict({"scenario": "twin_fsg_passive", "fsg": {"matrix": fsg_program(0.25).as_list()}})
    assert cfg.fsg.program.q == pytest.approx(0.25)


def test_intercept_has_eve():
    cfg = default_config(INTERCEPT_RESEND)
    assert cfg.eve_active and "eve" in cfg.analyzers
    assert not config_from_dict({"scenario": INTERCEPT_RESEND, "eve": {"enabled": False}}).eve_active


@pytest.mark.parametrize(
    "bad",
    [
        {},
        {"scenario": "nope"},
        {"scenario": "genuine", "schema_version": 99},
        {"scenario": "genuine", "bogus": 1},
        {"scenario": "genuine", "n_pairs": 0},
        {"scenario": "genuine", "n_pairs": 1.5},
        {"scenario": "genuine", "source": {"visibility": 2}},
        {"scenario": "genuine", "detectors": {"alice": {"eta": -1}}},
        {"scenario": "genuine", "detectors": {"alice": {"speed": 1}}},
        {"scenario": "genuine", "analyzers": {"bob": {"choice": "magic"}}},
        {"scenario": "twin_fsg_passive", "fsg": {"q": 3}},
        {"scenario": "twin_fsg_passive", "fsg": {"q": 0.1, "matrix": [[0]]}},
        {"scenario": "twin_fsg_passive", "q_sweep": [0.1, 1.2]},
        {"scenario": "genuine", "seed": -1},
    ],
)
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        config_from_dict(bad)


def test_load_config_errors(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
