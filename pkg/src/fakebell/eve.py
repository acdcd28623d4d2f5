"""Intercept-resend eavesdropper on Bob's fiber.

Eve analyzes Bob's photon with an apparatus identical to Bob's and re-sends
a faked state polarized along the port she saw, which Bob's blinded
detectors then reproduce click for click.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detectors import SWAPPED_B1_LABELS, AnalyzerConfig, DetectorParams
from .optics import PulsePolarization
from .sources import BOB_ROTATION_DEG, FakedState, born_samples


def default_eve_analyzer() -> AnalyzerConfig:
    return AnalyzerConfig(party_rotation_deg=BOB_ROTATION_DEG, outcome_labels=SWAPPED_B1_LABELS)


@dataclass(frozen=True)
class InterceptRecord:
    eve_basis: int
    eve_outcome: int
    resent: FakedState
    time: int = 0


@dataclass
class InterceptBatch:
    alice_outcome: np.ndarray  # +1 / -1, parallel / perpendicular port
    eve_basis: np.ndarray
    eve_port: np.ndarray
    eve_outcome: np.ndarray
    detected: np.ndarray  # Eve saw the photon and re-sent a faked state
    trigger_deg: np.ndarray


def intercept_batch(
    V: float,
    alice_angle_deg,
    rng: np.random.Generator,
    analyzer: AnalyzerConfig | None = None,
    params: DetectorParams | None = None,
) -> InterceptBatch:
    analyzer = analyzer or default_eve_analyzer()
    alice_angle_deg = np.atleast_1d(np.asarray(alice_angle_deg, dtype=float))
    n = alice_angle_deg.size
    basis = rng.integers(0, 2, n).astype(np.int8)
    eve_angle = analyzer.analysis_angle(basis)
    a, e = born_samples(V, alice_angle_deg, eve_angle, rng, size=n)
    if params is None or params.eta >= 1.0:
        detected = np.ones(n, dtype=bool)
    else:
        detected = rng.random(n) < params.eta
    port = (e < 0).astype(np.int8)
    return InterceptBatch(
        alice_outcome=a,
        eve_basis=basis,
        eve_port=port,
        eve_outcome=analyzer.outcome(basis, port),
        detected=detected,
        trigger_deg=(eve_angle + 90.0 * port) % 180.0,
    )


def intercept_resend(
    V: float,
    alice_angle_deg: float,
    rng: np.random.Generator,
    analyzer: AnalyzerConfig | None = None,
    params: DetectorParams | None = None,
    time_ns: int = 0,
):
    """Alice's outcome (+1/-1) and Eve's record; the record is None when Eve lost the photon."""
    b = intercept_batch(V, alice_angle_deg, rng, analyzer, params)
    alice = int(b.alice_outcome[0])
    if not b.detected[0]:
        return alice, None
    resent = FakedState(PulsePolarization.linear(b.trigger_deg[0]))
    return alice, InterceptRecord(int(b.eve_basis[0]), int(b.eve_outcome[0]), resent, time_ns)
