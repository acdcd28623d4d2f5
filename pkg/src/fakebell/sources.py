"""Photon-pair and faked-state-pair emission.

Two kinds of emitters feed the analyzers: a genuine polarization-entangled
pair source reduced to a single visibility parameter, and a twin faked-state
generator (FSG) that sends bright pulse pairs drawn from a programmed joint
polarization distribution. Both fire at Poissonian emission times.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .optics import PulsePolarization

# Faked-state polarization families, in matrix row/column order.
POLARIZATION_NAMES = ("H", "V", "+", "-")
ALICE_ANGLES = np.array([0.0, 90.0, 45.0, 135.0])
BOB_ROTATION_DEG = 22.5
BOB_ANGLES = ALICE_ANGLES + BOB_ROTATION_DEG

# One effective visibility reproducing S = 2.381 (S = 2*sqrt(2)*V).
DEFAULT_VISIBILITY = 0.8418
DEFAULT_PAIR_RATE = 1e6  # pairs per second
DEFAULT_TRIGGER_POWER = 1.0
DEFAULT_BLINDING_PER_CHANNEL = 0.15


@dataclass(frozen=True)
class SourceConfig:
    visibility: float = DEFAULT_VISIBILITY
    pair_rate: float = DEFAULT_PAIR_RATE

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")
        if not self.pair_rate > 0:
            raise ValueError(f"pair_rate must be positive, got {self.pair_rate}")


@dataclass(frozen=True)
class FakedState:
    """A bright linearly polarized trigger pulse on top of a circular blinding beam."""

    trigger_polarization: PulsePolarization
    trigger_power: float = DEFAULT_TRIGGER_POWER
    blinding_power_per_channel: float = DEFAULT_BLINDING_PER_CHANNEL

    def __post_init__(self):
        if self.trigger_polarization.is_circular:
            raise ValueError("trigger polarization must be linear")
        if not self.trigger_power > 0:
            raise ValueError("trigger_power must be positive")
        if self.blinding_power_per_channel < 0:
            raise ValueError("blinding power cannot be negative")


def _pattern(q: float) -> np.ndarray:
    x = (1.0 + q) / 16.0
    y = (1.0 - q) / 16.0
    return np.array(
        [
            [x, y, x, y],
            [y, x, y, x],
            [x, y, y, x],
            [y, x, x, y],
        ]
    )


@dataclass(frozen=True)
class FsgProgram:
    """Joint frequencies of the polarization pair sent to Alice (rows) and Bob (columns).

    Rows are Alice's H, V, +, -; columns are Bob's rotated H~, V~, +~, -~.
    """

    q: float
    matrix: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def from_matrix(cls, matrix, tol: float = 1e-12) -> "FsgProgram":
        """Rebuild a program from its 4x4 matrix, checking the x/y pattern."""
        m = np.asarray(matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"FSG matrix must be 4x4, got shape {m.shape}")
        q = 16.0 * m[0, 0] - 1.0
        if not -1.0 - tol <= q <= 1.0 + tol or not np.allclose(m, _pattern(q), rtol=0, atol=tol):
            raise ValueError("matrix does not follow the FSG x/y pattern")
        return fsg_program(min(1.0, max(-1.0, q)))

    def as_list(self) -> list[list[float]]:
        return self.matrix.tolist()


def fsg_program(q: float) -> FsgProgram:
    if not -1.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [-1, 1], got {q}")
    m = _pattern(float(q))
    m.setflags(write=False)
    return FsgProgram(float(q), m)


def expected_S(program: FsgProgram) -> float:
    """CHSH value implied by the program's matrix, first polarization of each basis counted as outcome 1."""
    p = program.matrix
    E = {}
    for ba in (0, 1):
        for bb in (0, 1):
            block = p[2 * ba : 2 * ba + 2, 2 * bb : 2 * bb + 2]
            E[ba, bb] = (block[0, 0] - block[0, 1] - block[1, 0] + block[1, 1]) / block.sum()
    return E[0, 0] + E[1, 0] + E[0, 1] - E[1, 1]


def sample_faked_indices(program: FsgProgram, n: int, rng: np.random.Generator):
    """Draw ``n`` pairs; returns Alice's and Bob's polarization indices (0..3)."""
    flat = rng.choice(16, size=n, p=program.matrix.ravel())
    return flat // 4, flat % 4


def sample_faked_pair(program: FsgProgram, rng: np.random.Generator):
    a, b = sample_faked_indices(program, 1, rng)
    return (
        PulsePolarization.linear(ALICE_ANGLES[a[0]]),
        PulsePolarization.linear(BOB_ANGLES[b[0]]),
    )


def emission_times(rate: float, n_events: int, rng: np.random.Generator, dead_time_ns: int = 0):
    """Sorted integer-nanosecond emission times of a Poisson process.

    ``rate`` is in events per second. A non-zero ``dead_time_ns`` adds a fixed
    dead time after every event (the trigger photodetector cannot fire again
    sooner), so consecutive events are at least that far apart. Gaps that
    would collapse two events onto the same nanosecond are re-drawn.
    """
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    if n_events < 0 or dead_time_ns < 0:
        raise ValueError("n_events and dead_time_ns must be non-negative")
    if n_events == 0:
        return np.empty(0, dtype=np.int64)
    mean_gap_ns = 1e9 / rate
    gaps = rng.exponential(mean_gap_ns, n_events) + dead_time_ns
    while True:
        times = np.floor(np.cumsum(gaps)).astype(np.int64)
        dup = np.flatnonzero(np.diff(times) == 0) + 1
        if dup.size == 0:
            return times
        gaps[dup] = rng.exponential(mean_gap_ns, dup.size) + dead_time_ns


def born_samples(V: float, alpha_deg, beta_deg, rng: np.random.Generator, size=None):
    """Vectorized outcomes with P(a, b) = (1 + a*b*V*cos 2(alpha - beta)) / 4.

    Outcomes are +1 for the parallel port, -1 for the perpendicular one.
    """
    if not 0.0 <= V <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {V}")
    alpha = np.asarray(alpha_deg, dtype=float)
    beta = np.asarray(beta_deg, dtype=float)
    if size is None:
        size = np.broadcast_shapes(alpha.shape, beta.shape)
    corr = V * np.cos(np.deg2rad(2.0 * (alpha - beta)))
    a = np.where(rng.random(size) < 0.5, 1, -1).astype(np.int8)
    same = rng.random(size) < 0.5 * (1.0 + corr)
    b = np.where(same, a, -a).astype(np.int8)
    return a, b


def born_sample(V: float, alpha_deg: float, beta_deg: float, rng: np.random.Generator):
    a, b = born_samples(V, alpha_deg, beta_deg, rng, size=1)
    return int(a[0]), int(b[0])
