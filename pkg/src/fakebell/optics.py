"""Polarization routing through the analyzer optics.

All angles are in degrees. Power is in arbitrary units and the optics are
lossless, so every power map sums to the power that entered the analyzer.

Channel order of a passive (beamsplitter) analyzer::

    0: basis 0, parallel port     (H for Alice, H~ for Bob)
    1: basis 0, perpendicular     (V)
    2: basis 1, parallel port     (+)
    3: basis 1, perpendicular     (-)

An active (half-wave plate) analyzer has two channels: parallel and
perpendicular to the analysis angle selected by the plate.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .detectors import AnalyzerConfig
    from .sources import FakedState

BASIS_OFFSET_DEG = 45.0
N_PASSIVE_CHANNELS = 4
N_ACTIVE_CHANNELS = 2


@dataclass(frozen=True)
class PulsePolarization:
    """Linear polarization at ``angle`` (mod 180) or circular when ``angle`` is None."""

    angle: float | None = None

    def __post_init__(self):
        if self.angle is not None:
            object.__setattr__(self, "angle", float(self.angle) % 180.0)

    @classmethod
    def linear(cls, angle_deg: float) -> "PulsePolarization":
        return cls(float(angle_deg))

    @classmethod
    def circular(cls) -> "PulsePolarization":
        return cls(None)

    @property
    def is_circular(self) -> bool:
        return self.angle is None

    def __repr__(self):
        if self.is_circular:
            return "Circular"
        return f"Linear({self.angle:g})"


def malus(pol_deg, analyzer_deg):
    """Fraction of linearly polarized power transmitted to the parallel port.

    Works elementwise on arrays. The perpendicular port receives ``1 - malus``.
    """
    delta = np.deg2rad(np.asarray(pol_deg, dtype=float) - np.asarray(analyzer_deg, dtype=float))
    return np.cos(delta) ** 2


def analyzer_fractions(pol: PulsePolarization, analyzer_angle_deg: float) -> tuple[float, float]:
    """Split of ``pol`` between the parallel and perpendicular ports of a polarizer."""
    if pol.is_circular:
        return 0.5, 0.5
    f = float(malus(pol.angle, analyzer_angle_deg))
    return f, 1.0 - f


def passive_trigger_maps(trigger_deg, power, rotation_deg=0.0):
    """Per-channel trigger power behind a passive analyzer, shape ``(n, 4)``.

    The 50/50 beamsplitter halves the power, then each arm is analyzed at
    ``rotation_deg`` (basis 0) or ``rotation_deg + 45`` (basis 1).
    """
    trigger_deg = np.atleast_1d(np.asarray(trigger_deg, dtype=float))
    half = 0.5 * np.broadcast_to(np.asarray(power, dtype=float), trigger_deg.shape)
    f0 = malus(trigger_deg, rotation_deg)
    f1 = malus(trigger_deg, rotation_deg + BASIS_OFFSET_DEG)
    return np.stack([half * f0, half * (1.0 - f0), half * f1, half * (1.0 - f1)], axis=-1)


def active_trigger_maps(trigger_deg, power, analysis_deg):
    """Per-channel trigger power behind an active analyzer, shape ``(n, 2)``."""
    trigger_deg = np.atleast_1d(np.asarray(trigger_deg, dtype=float))
    full = np.broadcast_to(np.asarray(power, dtype=float), trigger_deg.shape)
    f = malus(trigger_deg, analysis_deg)
    f = np.broadcast_to(f, trigger_deg.shape)
    return np.stack([full * f, full * (1.0 - f)], axis=-1)


def circular_maps(power_per_channel, n_channels, n=1):
    """Circularly polarized power spreads evenly over every channel, shape ``(n, n_channels)``."""
    p = np.reshape(np.asarray(power_per_channel, dtype=float), (-1, 1))
    return np.array(np.broadcast_to(p, (n, n_channels)))


def faked_power_map(
    fs: FakedState,
    analyzer: AnalyzerConfig,
    active_angle_deg: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Trigger and blinding power maps for one faked state entering ``analyzer``.

    ``active_angle_deg`` is the analysis angle set by the half-wave plate and
    must be given exactly when the analyzer is active.
    """
    from .errors import ConfigError

    if fs.trigger_polarization.is_circular:
        raise ValueError("faked-state trigger must be linearly polarized")
    if analyzer.is_active:
        if active_angle_deg is None:
            raise ConfigError("active analyzer needs the plate's analysis angle")
        trig = active_trigger_maps(fs.trigger_polarization.angle, fs.trigger_power, active_angle_deg)[0]
        blind = circular_maps(fs.blinding_power_per_channel, N_ACTIVE_CHANNELS)[0]
    else:
        if active_angle_deg is not None:
            raise ConfigError("passive analyzer takes no plate angle")
        trig = passive_trigger_maps(
            fs.trigger_polarization.angle, fs.trigger_power, analyzer.party_rotation_deg
        )[0]
        blind = circular_maps(fs.blinding_power_per_channel, N_PASSIVE_CHANNELS)[0]
    return trig, blind
