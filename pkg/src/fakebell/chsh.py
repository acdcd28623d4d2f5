"""Correlation functions, the CHSH value and their Poisson uncertainties."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import UndefinedCorrelatorError

CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
ALGEBRAIC_BOUND = 4.0

# Correlator keys with (Alice basis, Bob basis) and sign in S.
SETTINGS = {
    "AB": ((0, 0), +1),
    "A'B": ((1, 0), +1),
    "AB'": ((0, 1), +1),
    "A'B'": ((1, 1), -1),
}


class Classification(str, Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"
    SUPERQUANTUM = "superquantum"


@dataclass(frozen=True)
class Correlator:
    E: float
    dE: float
    counts: tuple[int, int, int, int]  # N11, N10, N01, N00

    def to_dict(self) -> dict:
        return {"E": self.E, "dE": self.dE, "counts": list(self.counts)}


def correlation(n11: int, n10: int, n01: int, n00: int) -> Correlator:
    """E = (N11 - N10 - N01 + N00) / N with each count treated as Poisson.

    The uncertainty propagates sqrt(N_i) through the partial derivatives
    dE/dN_i = (s_i - E) / N, s_i being the sign of N_i in the numerator.
    """
    counts = tuple(int(c) for c in (n11, n10, n01, n00))
    if any(c < 0 for c in counts):
        raise ValueError("counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise UndefinedCorrelatorError("correlator needs at least one coincidence")
    signs = (1, -1, -1, 1)
    E = sum(s * c for s, c in zip(signs, counts)) / total
    var = sum((s - E) ** 2 * c for s, c in zip(signs, counts)) / total**2
    return Correlator(E, math.sqrt(var), counts)


def classify(S: float) -> Classification:
    a = abs(S)
    if a > ALGEBRAIC_BOUND + 1e-12:
        raise ValueError(f"|S| = {a} exceeds the algebraic maximum of 4")
    if a <= CLASSICAL_BOUND:
        return Classification.CLASSICAL
    if a <= TSIRELSON_BOUND:
        return Classification.QUANTUM
    return Classification.SUPERQUANTUM


@dataclass(frozen=True)
class ChshResult:
    correlators: dict[str, Correlator]
    S: float
    dS: float
    classification: Classification
    efficiency: tuple[float, float] | None = field(default=None)

    def to_dict(self) -> dict:
        return {
            "S": self.S,
            "dS": self.dS,
            "classification": self.classification.value,
            "efficiency": None if self.efficiency is None else list(self.efficiency),
            "correlators": {k: c.to_dict() for k, c in self.correlators.items()},
        }


def chsh(correlators, efficiency=None) -> ChshResult:
    """S = E_AB + E_A'B + E_AB' - E_A'B'.

    ``correlators`` is a mapping keyed ``AB``, ``A'B``, ``AB'``, ``A'B'`` or a
    sequence in that order.
    """
    if not isinstance(correlators, dict):
        correlators = list(correlators)
        if len(correlators) != 4:
            raise ValueError(f"CHSH needs four correlators, got {len(correlators)}")
        correlators = dict(zip(SETTINGS, correlators))
    missing = [k for k in SETTINGS if k not in correlators]
    if missing:
        raise ValueError(f"missing correlators: {', '.join(missing)}")
    S = sum(sign * correlators[k].E for k, (_, sign) in SETTINGS.items())
    dS = math.sqrt(sum(correlators[k].dE ** 2 for k in SETTINGS))
    ordered = {k: correlators[k] for k in SETTINGS}
    eff = None if efficiency is None else tuple(float(e) for e in efficiency)
    return ChshResult(ordered, S, dS, classify(S), eff)


def chsh_from_tally(tally, efficiency=None) -> ChshResult:
    """CHSH result from a :class:`~fakebell.coincidence.CoincidenceTally`."""
    correlators = {}
    for key, ((ba, bb), _) in SETTINGS.items():
        try:
            correlators[key] = correlation(*tally.cell_counts(ba, bb))
        except UndefinedCorrelatorError:
            raise UndefinedCorrelatorError(
                f"no coincidences for setting {key} (Alice basis {ba}, Bob basis {bb}); "
                f"{tally.n_pairs} pairs matched in total"
            ) from None
    return chsh(correlators, efficiency)
