"""Run configuration: scenario defaults and the JSON config file."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .detectors import (
    ACTIVE,
    DEFAULT_ALARM_THRESHOLD,
    DEFAULT_LABELS,
    PASSIVE,
    SWAPPED_B1_LABELS,
    AnalyzerConfig,
    DetectorParams,
)
from .errors import ConfigError
from .sources import (
    BOB_ROTATION_DEG,
    DEFAULT_BLINDING_PER_CHANNEL,
    DEFAULT_TRIGGER_POWER,
    FsgProgram,
    SourceConfig,
    fsg_program,
)

SCHEMA_VERSION = 1

GENUINE = "genuine"
INTERCEPT_RESEND = "intercept_resend"
TWIN_FSG_PASSIVE = "twin_fsg_passive"
TWIN_FSG_ACTIVE = "twin_fsg_active"
SCENARIOS = (GENUINE, INTERCEPT_RESEND, TWIN_FSG_PASSIVE, TWIN_FSG_ACTIVE)
FSG_SCENARIOS = (TWIN_FSG_PASSIVE, TWIN_FSG_ACTIVE)

DEFAULT_WINDOW_NS = 5
# Dead time of the photodetector that triggers each emission; keeps distinct
# emissions further apart than the coincidence window.
DEFAULT_DEAD_TIME_NS = 50
DEFAULT_N_PAIRS = 100_000


@dataclass(frozen=True)
class FsgSettings:
    program: FsgProgram = field(default_factory=lambda: fsg_program(1.0 / math.sqrt(2.0)))
    trigger_power: float = DEFAULT_TRIGGER_POWER
    blinding_power_per_channel: float = DEFAULT_BLINDING_PER_CHANNEL


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    seed: int = 0
    n_pairs: int = DEFAULT_N_PAIRS
    source: SourceConfig = field(default_factory=SourceConfig)
    fsg: FsgSettings = field(default_factory=FsgSettings)
    detectors: dict = field(default_factory=dict)
    analyzers: dict = field(default_factory=dict)
    window_ns: int = DEFAULT_WINDOW_NS
    dead_time_ns: int = DEFAULT_DEAD_TIME_NS
    eve_enabled: bool = False
    q_sweep: tuple | None = None
    alarm_threshold: float = DEFAULT_ALARM_THRESHOLD

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {', '.join(SCENARIOS)}")
        if int(self.n_pairs) < 1:
            raise ConfigError("n_pairs must be at least 1")
        if int(self.window_ns) < 0 or int(self.dead_time_ns) < 0:
            raise ConfigError("window_ns and dead_time_ns must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for party in ("alice", "bob"):
            if party not in self.detectors or party not in self.analyzers:
                raise ConfigError(f"missing detector or analyzer section for {party}")
        if self.scenario == INTERCEPT_RESEND and "eve" not in self.analyzers:
            raise ConfigError("intercept_resend needs an analyzer for eve")
        if self.q_sweep is not None:
            for q in self.q_sweep:
                if not -1.0 <= q <= 1.0:
                    raise ConfigError(f"sweep value q={q} outside [-1, 1]")

    @property
    def is_fsg(self) -> bool:
        return self.scenario in FSG_SCENARIOS

    @property
    def eve_active(self) -> bool:
        return self.scenario == INTERCEPT_RESEND and self.eve_enabled

    def with_q(self, q: float) -> "RunConfig":
        return replace(self, fsg=replace(self.fsg, program=fsg_program(q)))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "seed": int(self.seed),
            "n_pairs": int(self.n_pairs),
            "window_ns": int(self.window_ns),
            "dead_time_ns": int(self.dead_time_ns),
            "source": asdict(self.source),
            "fsg": {
                "q": self.fsg.program.q,
                "trigger_power": self.fsg.trigger_power,
                "blinding_power_per_channel": self.fsg.blinding_power_per_channel,
            },
            "detectors": {p: asdict(d) for p, d in sorted(self.detectors.items())},
            "analyzers": {
                p: {**asdict(a), "outcome_labels": [list(r) for r in a.outcome_labels]}
                for p, a in sorted(self.analyzers.items())
            },
            "eve": {"enabled": self.eve_enabled},
            "q_sweep": None if self.q_sweep is None else list(self.q_sweep),
            "monitor": {"alarm_threshold": self.alarm_threshold},
        }


def default_config(scenario: str, **overrides) -> RunConfig:
    """Scenario with the default analyzers and detectors filled in.

    Genuine and intercept-resend runs swap Bob's basis-1 labels so a perfect
    singlet-like source reaches S = +2*sqrt(2); faked-state runs label the
    first polarization of every basis as outcome 1.
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    choice = ACTIVE if scenario == TWIN_FSG_ACTIVE else PASSIVE
    bob_labels = DEFAULT_LABELS if scenario in FSG_SCENARIOS else SWAPPED_B1_LABELS
    analyzers = {
        "alice": AnalyzerConfig(choice, 0.0, DEFAULT_LABELS),
        "bob": AnalyzerConfig(choice, BOB_ROTATION_DEG, bob_labels),
    }
    detectors = {
        "alice": DetectorParams.default_for(choice),
        "bob": DetectorParams.default_for(choice),
    }
    if scenario == INTERCEPT_RESEND:
        analyzers["eve"] = AnalyzerConfig(PASSIVE, BOB_ROTATION_DEG, SWAPPED_B1_LABELS)
        detectors["eve"] = DetectorParams.default_for(PASSIVE)
    overrides.setdefault("eve_enabled", scenario == INTERCEPT_RESEND)
    return RunConfig(scenario=scenario, analyzers=analyzers, detectors=detectors, **overrides)


_TOP_KEYS = {
    "schema_version", "scenario", "seed", "n_pairs", "window_ns", "dead_time_ns",
    "source", "fsg", "detectors", "analyzers", "eve", "q_sweep", "monitor",
}


def _section(d, name, allowed):
    sec = d.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be an object")
    unknown = set(sec) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {', '.join(sorted(unknown))}")
    return sec


def config_from_dict(d: dict) -> RunConfig:
    """Build a config from parsed JSON; absent fields take the scenario defaults."""
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}")
    if "scenario" not in d:
        raise ConfigError("config needs a 'scenario'")
    try:
        base = default_config(d["scenario"])
        kw = {}
        for key in ("seed", "n_pairs", "window_ns", "dead_time_ns"):
            if key in d:
                if not isinstance(d[key], int) or isinstance(d[key], bool):
                    raise ConfigError(f"{key} must be an integer")
                kw[key] = d[key]
        src = _section(d, "source", ("visibility", "pair_rate"))
        kw["source"] = replace(base.source, **src)
        fsg = _section(d, "fsg", ("q", "matrix", "trigger_power", "blinding_power_per_channel"))
        if "q" in fsg and "matrix" in fsg:
            raise ConfigError("give either fsg.q or fsg.matrix, not both")
        program = base.fsg.program
        if "q" in fsg:
            program = fsg_program(float(fsg["q"]))
        elif "matrix" in fsg:
            program = FsgProgram.from_matrix(fsg["matrix"])
        kw["fsg"] = FsgSettings(
            program,
            float(fsg.get("trigger_power", base.fsg.trigger_power)),
            float(fsg.get("blinding_power_per_channel", base.fsg.blinding_power_per_channel)),
        )
        anas = dict(base.analyzers)
        for party, sec in _section(d, "analyzers", ("alice", "bob", "eve")).items():
            sec = _section({party: sec}, party, AnalyzerConfig.__dataclass_fields__)
            if "outcome_labels" in sec:
                sec["outcome_labels"] = tuple(tuple(r) for r in sec["outcome_labels"])
            anas[party] = replace(anas.get(party, AnalyzerConfig()), **sec)
        kw["analyzers"] = anas
        # Detector defaults follow the party's analyzer (click threshold differs).
        dets = {}
        det_secs = _section(d, "detectors", ("alice", "bob", "eve"))
        for party in sorted(set(base.detectors) | set(det_secs)):
            sec = _section({party: det_secs.get(party)}, party, DetectorParams.__dataclass_fields__)
            choice = anas.get(party, AnalyzerConfig()).choice
            dets[party] = DetectorParams.default_for(choice, **sec)
        kw["detectors"] = dets
        eve = _section(d, "eve", ("enabled",))
        if "enabled" in eve:
            kw["eve_enabled"] = bool(eve["enabled"])
        if d.get("q_sweep") is not None:
            kw["q_sweep"] = tuple(float(q) for q in d["q_sweep"])
        mon = _section(d, "monitor", ("alarm_threshold",))
        if "alarm_threshold" in mon:
            kw["alarm_threshold"] = float(mon["alarm_threshold"])
        return replace(base, **kw)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data)
