import json
import math
from dataclasses import replace

import numpy as np
import pytest

from fakebell import coincidence as cc
from fakebell.config import (
    config_from_dict,
    GENUINE,
    INTERCEPT_RESEND,
    SCENARIOS,
    TWIN_FSG_ACTIVE,
    TWIN_FSG_PASSIVE,
    default_config,
)
from fakebell.detectors import DetectorParams, respond_faked
from fakebell.errors import ConfigError, UndefinedCorrelatorError
from fakebell.optics import PulsePolarization, faked_power_map
from fakebell.runner import analyze, run, simulate, sweep
from fakebell.sources import ALICE_ANGLES, BOB_ANGLES, FakedState

from oracles import active_off_pattern_fraction


def small(scenario, n=20_000, **kw):
    return default_config(scenario, n_pairs=n, **kw)


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_same_seed_same_report(scenario):
    r1 = run(small(scenario, seed=3))
    r2 = run(small(scenario, seed=3))
    assert r1.to_json() == r2.to_json()
    for party in r1.streams:
        np.testing.assert_array_equal(r1.streams[party].time, r2.streams[party].time)
    assert run(small(scenario, seed=4)).to_json() != r1.to_json()


def test_passive_fsg_pairs_everything():
    r = run(small(TWIN_FSG_PASSIVE))
    assert (r.tally.unmatched_a, r.tally.unmatched_b) == (0, 0)
    assert r.efficiency == (1.0, 1.0)
    assert r.tally.off_pattern_count() == 0


def test_lossy_genuine_leaves_singles():
    cfg = small(GENUINE)
    cfg = replace(cfg, detectors={p: DetectorParams(eta=0.6) for p in ("alice", "bob")})
    r = run(cfg)
    assert r.tally.unmatched_a > 0 and r.tally.unmatched_b > 0
    eff = 0.6
    assert abs(r.efficiency[0] - eff) <= 3 * math.sqrt(eff * (1 - eff) / len(r.streams["alice"]))


def test_dark_counts_enter_the_stream():
    cfg = small(GENUINE)
    cfg = replace(cfg, detectors={p: DetectorParams(dark_rate=1e5) for p in ("alice", "bob")})
    r = run(cfg)
    dark = np.sum(r.streams["alice"].emission < 0)
    duration_s = r.streams["alice"].time.max() * 1e-9
    assert abs(dark - 1e5 * duration_s) <= 3 * math.sqrt(1e5 * duration_s) + 1
    assert r.streams["alice"].is_sorted()


def test_pipeline_agrees_with_scalar_detector_model():
    cfg = small(TWIN_FSG_PASSIVE, n=3000)
    streams, side = simulate(cfg)
    rng = np.random.default_rng(0)
    for party, angles in (("alice", ALICE_ANGLES), ("bob", BOB_ANGLES)):
        s = streams[party]
        ana = cfg.analyzers[party]
        idx = side["sent_labels"][s.emission] // 4 if party == "alice" else side["sent_labels"][s.emission] % 4
        for e, pol_idx, basis, outcome in zip(s.emission, idx, s.basis, s.outcome):
            trig, blind = faked_power_map(FakedState(PulsePolarization.linear(angles[pol_idx])), ana)
            (ch,) = respond_faked(trig, blind, cfg.detectors[party], rng)
            assert (basis, outcome) == (ch // 2, ana.outcome(ch // 2, ch % 2))


def test_active_clicks_follow_plate_setting():
    cfg = small(TWIN_FSG_ACTIVE, n=10_000)
    streams, side = simulate(cfg)
    a = streams["alice"]
    sent_a = side["sent_labels"][a.emission] // 4
    # a click only happens when the plate basis equals the sent polarization's basis
    np.testing.assert_array_equal(a.basis, sent_a // 2)
    np.testing.assert_array_equal(a.outcome, 1 - sent_a % 2)
    # settings are constant over blocks of block_length emissions
    block = cfg.analyzers["alice"].block_length
    by_block = {}
    for e, b in zip(a.emission, a.basis):
        assert by_block.setdefault(e // block, b) == b


def test_active_imperfection_matches_enumeration():
    eps = 0.05
    cfg = small(TWIN_FSG_ACTIVE, n=200_000)
    cfg = replace(cfg, detectors={p: DetectorParams(click_threshold=0.7, imperfection_eps=eps) for p in ("alice", "bob")})
    r = run(cfg)
    p = active_off_pattern_fraction(eps)
    n = r.tally.sent_vs_detected.sum()
    assert abs(r.tally.off_pattern_fraction() - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_active_perfect_has_no_off_pattern():
    assert run(small(TWIN_FSG_ACTIVE, n=100_000)).tally.off_pattern_count() == 0


def test_eve_copied_into_bob():
    r = run(small(INTERCEPT_RESEND))
    assert r.eve_agreement == 1.0
    assert "eve" in r.streams


def test_monitor_flags():
    assert not run(small(GENUINE)).alarm
    assert run(small(INTERCEPT_RESEND)).alarm
    assert not run(replace(small(INTERCEPT_RESEND), eve_enabled=False)).alarm
    assert run(small(TWIN_FSG_ACTIVE)).alarm
    r = run(replace(small(TWIN_FSG_PASSIVE), alarm_threshold=math.inf))
    assert not r.alarm
    assert r.mean_power["bob"] == pytest.approx(0.6)


def test_zero_pairs_is_reported():
    cfg = replace(small(GENUINE, n=100), detectors={"alice": DetectorParams(eta=0.0), "bob": DetectorParams()})
    with pytest.raises(UndefinedCorrelatorError):
        run(cfg)


def test_sweep_points_seeded_by_index():
    cfg = small(TWIN_FSG_PASSIVE, n=5000, seed=11)
    rep = sweep(cfg, [0.0, 0.5])
    again = run(cfg.with_q(0.5), seed=np.random.SeedSequence([11, 1]))
    assert rep.rows[1]["S_observed"] == again.chsh.S
    assert rep.to_csv().splitlines()[0] == "q,S_programmed,S_observed,dS"
    with pytest.raises(ConfigError):
        sweep(cfg, [])


def test_report_json_fields():
    d = json.loads(run(small(TWIN_FSG_PASSIVE)).to_json())
    assert {"config", "chsh", "coincidences", "efficiency", "monitor", "faked_pairs"} <= set(d)
    assert d["coincidences"]["pairs"] == sum(np.ravel(d["coincidences"]["counts"]))


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_analyze_reproduces_run(tmp_path, scenario):
    r = run(small(scenario))
    r.write(tmp_path, emit_events=True)
    rep = analyze(tmp_path / "alice_events.csv", tmp_path / "bob_events.csv", r.config.window_ns)
    assert rep.to_json() == json.dumps(r.analysis_dict(), indent=2) + "\n"


def test_analyze_empty_files(tmp_path):
    for name in ("a.csv", "b.csv"):
        (tmp_path / name).write_text("time_ns,party,basis,outcome\n")
    with pytest.raises(UndefinedCorrelatorError):
        analyze(tmp_path / "a.csv", tmp_path / "b.csv")


def test_active_dark_counts_follow_plate():
    cfg = config_from_dict(
        {
            "scenario": "genuine",
            "n_pairs": 20_000,
            "analyzers": {"alice": {"choice": "active", "block_length": 100}},
            "detectors": {"alice": {"dark_rate": 2e5}},
        }
    )
    streams, side = simulate(cfg)
    a = streams["alice"]
    dark = a.emission < 0
    assert dark.sum() > 0
    slot = np.maximum(np.searchsorted(side["times"], a.time[dark], side="right") - 1, 0)
    np.testing.assert_array_equal(a.basis[dark], side["schedules"]["alice"][slot])
