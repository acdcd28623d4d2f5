"""Avalanche-photodiode and analyzer-assembly model.

Genuine photons click with probability ``eta`` in the port the photon took.
Faked states are judged by a sharp rule: a channel clicks when it is held
blinded by the circular beam and its share of the trigger pulse crosses
``click_threshold``. A small ``imperfection_eps`` adds a stray click on a
random wrong channel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coincidence import DetectionEvent, EventStream  # noqa: F401  (re-exported)
from .optics import BASIS_OFFSET_DEG

PASSIVE = "passive"
ACTIVE = "active"
DEFAULT_LABELS = ((1, 0), (1, 0))
# Bob's genuine-source labels: the basis-1 ports are swapped so V = 1 gives S = +2*sqrt(2).
SWAPPED_B1_LABELS = ((1, 0), (0, 1))
# 7.25e6 coincidences over 4561 plate positions.
DEFAULT_BLOCK_LENGTH = math.ceil(7.25e6 / 4561)
DEFAULT_CLICK_THRESHOLD = {PASSIVE: 0.35, ACTIVE: 0.7}
DEFAULT_BLIND_THRESHOLD = 0.1
DEFAULT_ALARM_THRESHOLD = 0.05


@dataclass(frozen=True)
class DetectorParams:
    eta: float = 1.0
    dark_rate: float = 0.0  # counts per second, per analyzer
    click_threshold: float = DEFAULT_CLICK_THRESHOLD[PASSIVE]
    blind_threshold: float = DEFAULT_BLIND_THRESHOLD
    imperfection_eps: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if self.dark_rate < 0:
            raise ValueError("dark_rate must be non-negative")
        if not self.click_threshold > 0 or not self.blind_threshold > 0:
            raise ValueError("thresholds must be positive")
        if not 0.0 <= self.imperfection_eps <= 1.0:
            raise ValueError("imperfection_eps must lie in [0, 1]")

    @classmethod
    def default_for(cls, choice: str, **overrides) -> "DetectorParams":
        """Defaults with the click threshold centred in the faking window of ``choice``."""
        overrides.setdefault("click_threshold", DEFAULT_CLICK_THRESHOLD[choice])
        return cls(**overrides)


@dataclass(frozen=True)
class AnalyzerConfig:
    """Polarization analyzer in front of one party's detectors.

    ``outcome_labels[basis]`` gives the outcome bit reported by the parallel
    and the perpendicular port, in that order.
    """

    choice: str = PASSIVE
    party_rotation_deg: float = 0.0
    outcome_labels: tuple = DEFAULT_LABELS
    block_length: int = DEFAULT_BLOCK_LENGTH

    def __post_init__(self):
        if self.choice not in (PASSIVE, ACTIVE):
            raise ValueError(f"analyzer choice must be {PASSIVE!r} or {ACTIVE!r}")
        labels = tuple(tuple(int(v) for v in row) for row in self.outcome_labels)
        if len(labels) != 2 or any(sorted(row) != [0, 1] for row in labels):
            raise ValueError("outcome_labels must map each basis' two ports onto {0, 1}")
        object.__setattr__(self, "outcome_labels", labels)
        if int(self.block_length) < 1:
            raise ValueError("block_length must be at least 1")

    @property
    def is_active(self) -> bool:
        return self.choice == ACTIVE

    @property
    def n_channels(self) -> int:
        return 2 if self.is_active else 4

    def analysis_angle(self, basis):
        return self.party_rotation_deg + BASIS_OFFSET_DEG * np.asarray(basis)

    def outcome(self, basis, port):
        """Outcome bit of ``port`` (0 parallel, 1 perpendicular) in ``basis``; elementwise."""
        table = np.asarray(self.outcome_labels, dtype=np.int8)
        return table[np.asarray(basis, dtype=np.intp), np.asarray(port, dtype=np.intp)]

    def port(self, basis, outcome):
        """Inverse of :meth:`outcome`."""
        table = np.asarray(self.outcome_labels, dtype=np.int8)
        b = np.asarray(basis, dtype=np.intp)
        return np.where(table[b, 0] == np.asarray(outcome), 0, 1)

    def channel_basis_port(self, channel, setting=None):
        """(basis, port) of a channel; active analyzers take the basis from the plate ``setting``."""
        channel = np.asarray(channel)
        if self.is_active:
            return np.broadcast_to(np.asarray(setting), channel.shape), channel
        return channel // 2, channel % 2


def faked_clicks(trigger_maps, blinding_maps, params: DetectorParams) -> np.ndarray:
    """Threshold response of blinded detectors; boolean array shaped like the maps."""
    trigger_maps = np.asarray(trigger_maps, dtype=float)
    blinding_maps = np.asarray(blinding_maps, dtype=float)
    if trigger_maps.shape != blinding_maps.shape:
        raise ValueError(
            f"trigger map {trigger_maps.shape} and blinding map {blinding_maps.shape} differ in channels"
        )
    return (blinding_maps >= params.blind_threshold) & (trigger_maps >= params.click_threshold)


def add_wrong_clicks(clicks: np.ndarray, extra: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Mark one uniformly chosen non-clicked channel in each row where ``extra`` is set.

    ``u`` holds one uniform [0, 1) draw per row. Returns the stray-click mask.
    """
    clicks = np.atleast_2d(clicks)
    idle = ~clicks
    n_idle = idle.sum(axis=1)
    rows = np.flatnonzero(np.asarray(extra) & (n_idle > 0))
    stray = np.zeros_like(clicks)
    if rows.size:
        pick = np.minimum((np.asarray(u)[rows] * n_idle[rows]).astype(np.int64), n_idle[rows] - 1)
        rank = np.cumsum(idle[rows], axis=1) - 1
        hit = idle[rows] & (rank == pick[:, None])
        stray[rows] = hit
    return stray


def respond_faked(trigger_map, blinding_map, params: DetectorParams, rng: np.random.Generator) -> set[int]:
    """Channels that click for one faked state."""
    clicks = faked_clicks(np.atleast_2d(trigger_map), np.atleast_2d(blinding_map), params)
    if rng.random() < params.imperfection_eps:
        clicks = clicks | add_wrong_clicks(clicks, np.array([True]), np.array([rng.random()]))
    return set(np.flatnonzero(clicks[0]).tolist())


def respond_genuine(
    outcome: int,
    basis: int,
    params: DetectorParams,
    rng: np.random.Generator,
    analyzer: AnalyzerConfig | None = None,
) -> tuple[int, int] | None:
    """(basis, outcome bit) of a detected photon, or None when it is lost.

    ``outcome`` is +1 for the parallel port and -1 for the perpendicular one.
    """
    analyzer = analyzer or AnalyzerConfig()
    if rng.random() >= params.eta:
        return None
    port = 0 if outcome > 0 else 1
    return basis, int(analyzer.outcome(basis, port))


def dark_counts(params: DetectorParams, duration_ns: int, rng: np.random.Generator, party: str = "alice") -> EventStream:
    """Poissonian dark clicks spread uniformly over time and channels."""
    if duration_ns < 0:
        raise ValueError("duration must be non-negative")
    n = int(rng.poisson(params.dark_rate * duration_ns * 1e-9)) if params.dark_rate > 0 else 0
    if n == 0:
        return EventStream.empty(party)
    times = np.sort(rng.integers(0, max(duration_ns, 1), n))
    channel = rng.integers(0, 4, n)
    return EventStream(party, times, channel // 2, channel % 2)


def active_basis_sequence(rng: np.random.Generator, n_blocks: int, block_length: int) -> np.ndarray:
    """Unbiased i.i.d. plate settings, one per block of ``block_length`` emissions."""
    if n_blocks < 0:
        raise ValueError("n_blocks must be non-negative")
    if block_length < 1:
        raise ValueError("block_length must be at least 1")
    return rng.integers(0, 2, n_blocks).astype(np.int8)


def settings_per_emission(settings: np.ndarray, block_length: int, n: int) -> np.ndarray:
    return np.repeat(settings, block_length)[:n]


class PowerMonitor:
    """Running time-average of the total optical power entering an analyzer."""

    def __init__(self):
        self.total = 0.0
        self.slots = 0

    def add(self, maps) -> "PowerMonitor":
        maps = np.atleast_2d(np.asarray(maps, dtype=float))
        self.total += float(maps.sum())
        self.slots += maps.shape[0]
        return self

    @property
    def mean(self) -> float:
        return self.total / self.slots if self.slots else 0.0

    def alarm(self, alarm_threshold: float = DEFAULT_ALARM_THRESHOLD) -> bool:
        return self.mean > alarm_threshold


def power_monitor(blinding_maps, alarm_threshold: float = DEFAULT_ALARM_THRESHOLD) -> bool:
    """Raise the alarm when the mean optical power entering the analyzer exceeds the threshold.

    ``blinding_maps`` is one ``(slots, channels)`` array or an iterable of such chunks.
    """
    monitor = PowerMonitor()
    for chunk in [blinding_maps] if isinstance(blinding_maps, np.ndarray) else blinding_maps:
        monitor.add(chunk)
    return monitor.alarm(alarm_threshold)
