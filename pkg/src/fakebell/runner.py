"""Experiment orchestration: emission, analysis, matching and statistics.

Every run is single-process and driven by one seed. Emissions are processed
in fixed-size chunks so memory stays flat for long runs; the chunk size is
part of the random-draw order and must not change between runs that are
expected to agree bit for bit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import coincidence as cc
from .chsh import ChshResult, chsh_from_tally
from .config import GENUINE, INTERCEPT_RESEND, RunConfig
from .detectors import (
    AnalyzerConfig,
    DetectorParams,
    active_basis_sequence,
    add_wrong_clicks,
    dark_counts,
    faked_clicks,
    PowerMonitor,
    settings_per_emission,
)
from .errors import ConfigError
from .eve import intercept_batch
from .optics import (
    N_ACTIVE_CHANNELS,
    N_PASSIVE_CHANNELS,
    active_trigger_maps,
    circular_maps,
    passive_trigger_maps,
)
from .sources import ALICE_ANGLES, BOB_ANGLES, born_samples, emission_times, sample_faked_indices

CHUNK = 1 << 18
# Order of the independent random streams spawned from the run seed.
_STREAMS = ("times", "source", "alice", "bob", "eve", "settings", "dark_alice", "dark_bob")


@dataclass
class _PartyEvents:
    """Chunks of one party's clicks, assembled into a stream at the end."""

    party: str
    chunks: list = field(default_factory=list)
    monitor: PowerMonitor = field(default_factory=PowerMonitor)

    def add(self, time, basis, outcome, emission):
        self.chunks.append((time, basis, outcome, emission))

    def stream(self) -> cc.EventStream:
        if not self.chunks:
            return cc.EventStream.empty(self.party)
        cols = [np.concatenate(c) for c in zip(*self.chunks)]
        return cc.EventStream(self.party, *cols)


@dataclass
class RunReport:
    config: RunConfig
    chsh: ChshResult
    tally: cc.CoincidenceTally
    efficiency: tuple[float, float]
    alarm: bool
    mean_power: dict
    eve_agreement: float | None = None
    streams: dict = field(default_factory=dict, repr=False)

    def analysis_dict(self) -> dict:
        return analysis_section(self.chsh, self.tally, self.efficiency)

    def to_dict(self) -> dict:
        d = {
            "schema_version": 1,
            "config": self.config.to_dict(),
            **self.analysis_dict(),
            "monitor": {
                "alarm": self.alarm,
                "alarm_threshold": self.config.alarm_threshold,
                "mean_power": self.mean_power,
            },
        }
        if self.tally.sent_vs_detected is not None:
            d["faked_pairs"] = {
                "off_pattern_count": self.tally.off_pattern_count(),
                "off_pattern_fraction": self.tally.off_pattern_fraction(),
            }
        if self.eve_agreement is not None:
            d["eve"] = {"bob_matches_eve": self.eve_agreement}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def write(self, out_dir, emit_events: bool = False) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / "report.json"]
        written[0].write_text(self.to_json())
        if self.tally.sent_vs_detected is not None:
            cc.write_matrix_csv(self.tally.sent_vs_detected, out / "fig4_matrix.csv")
            written.append(out / "fig4_matrix.csv")
        if emit_events:
            for party, stream in self.streams.items():
                path = out / f"{party}_events.csv"
                cc.write_events_csv(stream, path)
                written.append(path)
        return written


def analysis_section(result: ChshResult, tally: cc.CoincidenceTally, eff) -> dict:
    return {
        "chsh": result.to_dict(),
        "coincidences": {
            "pairs": tally.n_pairs,
            "unmatched_a": tally.unmatched_a,
            "unmatched_b": tally.unmatched_b,
            "counts": tally.counts_as_list(),
        },
        "efficiency": {"alice": eff[0], "bob": eff[1]},
    }


def _rngs(seed) -> dict:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    return {name: np.random.default_rng(child) for name, child in zip(_STREAMS, ss.spawn(len(_STREAMS)))}


def _schedule(analyzer: AnalyzerConfig, n: int, rng) -> np.ndarray | None:
    if not analyzer.is_active:
        return None
    n_blocks = math.ceil(n / analyzer.block_length)
    return settings_per_emission(active_basis_sequence(rng, n_blocks, analyzer.block_length), analyzer.block_length, n)


def _choose_bases(analyzer, schedule, sl, rng):
    if schedule is not None:
        return schedule[sl]
    return rng.integers(0, 2, sl.stop - sl.start).astype(np.int8)


def _record_genuine(sink, analyzer, params, times, offset, basis, sign, rng):
    """Lossy detection of genuine photons (sign +1 parallel port, -1 perpendicular)."""
    rows = np.flatnonzero(rng.random(basis.size) < params.eta)
    port = (sign[rows] < 0).astype(np.int8)
    sink.add(times[rows], basis[rows], analyzer.outcome(basis[rows], port), rows + offset)
    sink.monitor.add(np.zeros((basis.size, 1)))


def _record_faked(sink, analyzer, params, times, offset, trigger_deg, fsg, schedule_slice, stray_extra, stray_u, sent=None):
    """Blinded-detector response to faked states; ``sent`` masks rows where a state arrived."""
    m = trigger_deg.size
    if analyzer.is_active:
        trig = active_trigger_maps(trigger_deg, fsg.trigger_power, analyzer.analysis_angle(schedule_slice))
        nch = N_ACTIVE_CHANNELS
    else:
        trig = passive_trigger_maps(trigger_deg, fsg.trigger_power, analyzer.party_rotation_deg)
        nch = N_PASSIVE_CHANNELS
    blind = circular_maps(fsg.blinding_power_per_channel, nch, m)
    if sent is not None:
        blind[~sent] = 0.0
        trig[~sent] = 0.0
        stray_extra = stray_extra & sent
    clicks = faked_clicks(trig, blind, params)
    stray = add_wrong_clicks(clicks, stray_extra, stray_u) & ~clicks
    fired = clicks | stray
    rows, ch = np.nonzero(fired)
    # Intended clicks precede stray ones within an emission.
    order = np.lexsort((ch, stray[rows, ch], rows))
    rows, ch = rows[order], ch[order]
    basis, port = analyzer.channel_basis_port(ch, None if schedule_slice is None else schedule_slice[rows])
    sink.add(times[rows], np.asarray(basis, dtype=np.int8), analyzer.outcome(basis, port), rows + offset)
    sink.monitor.add(blind)


def _stray_masks(params_a: DetectorParams, params_b: DetectorParams, m: int, rng):
    """Per-pair imperfection: at most one party of a faked pair gets a stray click."""
    eps = 0.5 * (params_a.imperfection_eps + params_b.imperfection_eps)
    p_alice = 0.5 if eps == 0 else params_a.imperfection_eps / (2 * eps)
    imperfect = rng.random(m) < eps
    on_alice = rng.random(m) < p_alice
    return imperfect & on_alice, imperfect & ~on_alice


def simulate(config: RunConfig, seed=None) -> tuple[dict, dict]:
    """Event streams plus per-emission side data for one run."""
    rngs = _rngs(config.seed if seed is None else seed)
    n = int(config.n_pairs)
    times = emission_times(config.source.pair_rate, n, rngs["times"], int(config.dead_time_ns))
    ana_a, ana_b = config.analyzers["alice"], config.analyzers["bob"]
    det_a, det_b = config.detectors["alice"], config.detectors["bob"]
    sched_a = _schedule(ana_a, n, rngs["settings"])
    sched_b = _schedule(ana_b, n, rngs["settings"])
    alice, bob, eve = _PartyEvents("alice"), _PartyEvents("bob"), _PartyEvents("eve")
    sent_labels = np.empty(n, dtype=np.int8) if config.is_fsg else None
    eve_detection = np.full((n, 2), -1, dtype=np.int8) if config.eve_active else None
    V = config.source.visibility

    for start in range(0, n, CHUNK):
        sl = slice(start, min(n, start + CHUNK))
        t = times[sl]
        m = t.size
        if config.is_fsg:
            ia, ib = sample_faked_indices(config.fsg.program, m, rngs["source"])
            sent_labels[sl] = 4 * ia + ib
            extra_a, extra_b = _stray_masks(det_a, det_b, m, rngs["source"])
            u_a = rngs["alice"].random(m)
            u_b = rngs["bob"].random(m)
            sa = None if sched_a is None else sched_a[sl]
            sb = None if sched_b is None else sched_b[sl]
            _record_faked(alice, ana_a, det_a, t, start, ALICE_ANGLES[ia], config.fsg, sa, extra_a, u_a)
            _record_faked(bob, ana_b, det_b, t, start, BOB_ANGLES[ib], config.fsg, sb, extra_b, u_b)
            continue

        basis_a = _choose_bases(ana_a, sched_a, sl, rngs["alice"])
        alpha = ana_a.analysis_angle(basis_a)
        if not config.eve_active:
            basis_b = _choose_bases(ana_b, sched_b, sl, rngs["bob"])
            a, b = born_samples(V, alpha, ana_b.analysis_angle(basis_b), rngs["source"], size=m)
            _record_genuine(alice, ana_a, det_a, t, start, basis_a, a, rngs["alice"])
            _record_genuine(bob, ana_b, det_b, t, start, basis_b, b, rngs["bob"])
            continue

        batch = intercept_batch(V, alpha, rngs["eve"], config.analyzers["eve"], config.detectors["eve"])
        _record_genuine(alice, ana_a, det_a, t, start, basis_a, batch.alice_outcome, rngs["alice"])
        rows = np.flatnonzero(batch.detected)
        eve.add(t[rows], batch.eve_basis[rows], batch.eve_outcome[rows], rows + start)
        eve_detection[sl][rows, 0] = batch.eve_basis[rows]
        eve_detection[sl][rows, 1] = batch.eve_outcome[rows]
        extra = rngs["bob"].random(m) < det_b.imperfection_eps
        u_b = rngs["bob"].random(m)
        sb = None if sched_b is None else sched_b[sl]
        _record_faked(bob, ana_b, det_b, t, start, batch.trigger_deg, config.fsg, sb, extra, u_b, sent=batch.detected)

    duration = int(times[-1]) + 1 if n else 0
    streams = {"alice": alice.stream(), "bob": bob.stream()}
    for party, key, sched in (("alice", "dark_alice", sched_a), ("bob", "dark_bob", sched_b)):
        dark = dark_counts(config.detectors[party], duration, rngs[key], party)
        if len(dark):
            if sched is not None:
                # behind a plate only the current setting's two detectors exist
                slot = np.maximum(np.searchsorted(times, dark.time, side="right") - 1, 0)
                dark.basis = sched[slot]
            streams[party] = streams[party].merged(dark)
    if config.eve_active:
        streams["eve"] = eve.stream()
    side = {
        "sent_labels": sent_labels,
        "eve_detection": eve_detection,
        "monitors": {"alice": alice.monitor, "bob": bob.monitor},
        "schedules": {"alice": sched_a, "bob": sched_b},
        "times": times,
    }
    return streams, side


def _sent_for_pairs(sent_labels, stream_a, pairs):
    emission = stream_a.emission[pairs[:, 0]]
    labels = np.full(emission.size, -1, dtype=np.int64)
    known = emission >= 0
    labels[known] = sent_labels[emission[known]]
    return labels


def run(config: RunConfig, seed=None) -> RunReport:
    """Simulate one scenario and reduce it to a CHSH report.

    ``seed`` overrides ``config.seed`` and may be a ``numpy.random.SeedSequence``.
    """
    streams, side = simulate(config, seed)
    a, b = streams["alice"], streams["bob"]
    matching = cc.match(a, b, int(config.window_ns))
    sent = None
    if side["sent_labels"] is not None:
        sent = _sent_for_pairs(side["sent_labels"], a, matching.pairs)
    tally = cc.tally(a, b, matching, sent)
    eff = cc.efficiency(len(matching.pairs), len(a), len(b))
    result = chsh_from_tally(tally, eff)

    mean_power = {}
    alarm = False
    for party, monitor in side["monitors"].items():
        mean_power[party] = monitor.mean
        alarm |= monitor.alarm(config.alarm_threshold)

    agreement = None
    if side["eve_detection"] is not None:
        em = b.emission[matching.pairs[:, 1]]
        ok = em >= 0
        eve_bo = side["eve_detection"][em[ok]]
        bob_bo = np.stack([b.basis[matching.pairs[ok, 1]], b.outcome[matching.pairs[ok, 1]]], axis=1)
        agreement = float(np.mean(np.all(eve_bo == bob_bo, axis=1))) if ok.any() else 0.0

    return RunReport(config, result, tally, eff, bool(alarm), mean_power, agreement, streams)


@dataclass
class SweepReport:
    rows: list
    reports: list = field(repr=False, default_factory=list)

    def to_csv(self) -> str:
        lines = ["q,S_programmed,S_observed,dS"]
        lines += [f"{r['q']!r},{r['S_programmed']!r},{r['S_observed']!r},{r['dS']!r}" for r in self.rows]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"schema_version": 1, "sweep": self.rows}

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "fig3_sweep.csv").write_text(self.to_csv())
        (out / "report.json").write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return [out / "fig3_sweep.csv", out / "report.json"]


def sweep(config: RunConfig, q_values=None) -> SweepReport:
    """One run per q, each seeded from (config.seed, index of q)."""
    qs = list(config.q_sweep if q_values is None else q_values)
    if not qs:
        raise ConfigError("sweep needs at least one q value")
    rows, reports = [], []
    for idx, q in enumerate(qs):
        rep = run(config.with_q(q), seed=np.random.SeedSequence([int(config.seed), idx]))
        rows.append(
            {
                "q": float(q),
                "S_programmed": 4.0 * float(q),
                "S_observed": rep.chsh.S,
                "dS": rep.chsh.dS,
                "efficiency": list(rep.efficiency),
                "alarm": rep.alarm,
            }
        )
        reports.append(rep)
    return SweepReport(rows, reports)


@dataclass
class AnalysisReport:
    chsh: ChshResult
    tally: cc.CoincidenceTally
    efficiency: tuple[float, float]

    def to_dict(self) -> dict:
        return analysis_section(self.chsh, self.tally, self.efficiency)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json())
        return [out / "report.json"]


def analyze_streams(a: cc.EventStream, b: cc.EventStream, window_ns: int) -> AnalysisReport:
    matching = cc.match(a, b, window_ns)
    tally = cc.tally(a, b, matching)
    eff = cc.efficiency(len(matching.pairs), len(a), len(b))
    return AnalysisReport(chsh_from_tally(tally, eff), tally, eff)


def analyze(path_a, path_b, window_ns: int = 5) -> AnalysisReport:
    """Offline pipeline from two exported event files onward."""
    return analyze_streams(cc.read_events_csv(path_a), cc.read_events_csv(path_b), window_ns)
