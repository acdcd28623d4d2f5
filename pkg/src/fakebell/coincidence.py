"""Time-tag streams, coincidence matching and tallies.

A stream holds one party's clicks as parallel numpy arrays sorted by
integer-nanosecond timestamp. Matching pairs clicks across two streams with a
greedy forward sweep; the tally then bins the pairs by basis and outcome.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numba
import numpy as np

from .errors import StreamFormatError

PARTIES = ("alice", "bob", "eve")
CSV_HEADER = ("time_ns", "party", "basis", "outcome")
# Side label order used for the 16x16 faked-pair matrix: H, V, +, - i.e.
# (basis 0, out 1), (basis 0, out 0), (basis 1, out 1), (basis 1, out 0).
SIDE_LABELS = ("H", "V", "+", "-")


@dataclass(frozen=True)
class DetectionEvent:
    time: int
    party: str
    basis: int
    outcome: int

    def __post_init__(self):
        if self.basis not in (0, 1) or self.outcome not in (0, 1):
            raise ValueError("basis and outcome must be 0 or 1")
        if self.time < 0:
            raise ValueError("event time must be non-negative")


def _as_array(values, dtype):
    return np.ascontiguousarray(np.asarray(values, dtype=dtype).ravel())


@dataclass
class EventStream:
    """Clicks of a single party.

    ``emission`` links each click back to the emitted pair that caused it
    (-1 for dark counts and for streams read from disk).
    """

    party: str
    time: np.ndarray
    basis: np.ndarray
    outcome: np.ndarray
    emission: np.ndarray = field(default=None)

    def __post_init__(self):
        self.time = _as_array(self.time, np.int64)
        self.basis = _as_array(self.basis, np.int8)
        self.outcome = _as_array(self.outcome, np.int8)
        if self.emission is None:
            self.emission = np.full(self.time.size, -1, dtype=np.int64)
        else:
            self.emission = _as_array(self.emission, np.int64)
        n = self.time.size
        if not (self.basis.size == self.outcome.size == self.emission.size == n):
            raise StreamFormatError("stream columns differ in length")

    def __len__(self):
        return self.time.size

    @classmethod
    def empty(cls, party: str) -> "EventStream":
        return cls(party, [], [], [])

    @classmethod
    def from_events(cls, events, party: str | None = None) -> "EventStream":
        events = list(events)
        if party is None:
            party = events[0].party if events else "alice"
        return cls(
            party,
            [e.time for e in events],
            [e.basis for e in events],
            [e.outcome for e in events],
        )

    def events(self) -> list[DetectionEvent]:
        return [
            DetectionEvent(int(t), self.party, int(b), int(o))
            for t, b, o in zip(self.time, self.basis, self.outcome)
        ]

    def is_sorted(self) -> bool:
        return bool(np.all(np.diff(self.time) >= 0))

    def merged(self, other: "EventStream") -> "EventStream":
        """Both streams' events in one time-sorted stream; ties keep ``self`` first."""
        time = np.concatenate([self.time, other.time])
        order = np.argsort(time, kind="stable")
        return EventStream(
            self.party,
            time[order],
            np.concatenate([self.basis, other.basis])[order],
            np.concatenate([self.outcome, other.outcome])[order],
            np.concatenate([self.emission, other.emission])[order],
        )


class MatchResult(NamedTuple):
    pairs: np.ndarray  # (k, 2) indices into stream a and stream b
    unmatched_a: int
    unmatched_b: int


@numba.njit(cache=True)
def _greedy_match(ta, tb, window, out_a, out_b):
    i = 0
    j = 0
    k = 0
    na = ta.size
    nb = tb.size
    while i < na and j < nb:
        if tb[j] < ta[i] - window:
            j += 1
        elif ta[i] < tb[j] - window:
            i += 1
        else:
            out_a[k] = i
            out_b[k] = j
            k += 1
            i += 1
            j += 1
    return k


def _times(stream):
    if isinstance(stream, EventStream):
        return stream.time
    return _as_array(stream, np.int64)


def match(stream_a, stream_b, window_ns: int) -> MatchResult:
    """Pair events of two sorted streams that lie within ``window_ns`` of each other.

    Each event of ``stream_a`` in time order takes the earliest still-unused
    event of ``stream_b`` inside the window. Accepts streams or bare time arrays.
    """
    if window_ns < 0:
        raise ValueError("window_ns must be non-negative")
    ta = _times(stream_a)
    tb = _times(stream_b)
    for name, t in (("a", ta), ("b", tb)):
        if t.size > 1 and np.any(np.diff(t) < 0):
            raise StreamFormatError(f"stream {name} is not sorted by time")
    n = min(ta.size, tb.size)
    out_a = np.empty(n, dtype=np.int64)
    out_b = np.empty(n, dtype=np.int64)
    k = _greedy_match(ta, tb, np.int64(window_ns), out_a, out_b)
    pairs = np.stack([out_a[:k], out_b[:k]], axis=1)
    return MatchResult(pairs, ta.size - k, tb.size - k)


def efficiency(pairs_count: int, total_a: int, total_b: int) -> tuple[float, float]:
    """Paired detections over all detections, per side; 0/0 counts as 0."""
    if pairs_count < 0 or pairs_count > total_a or pairs_count > total_b:
        raise ValueError(
            f"pair count {pairs_count} inconsistent with totals ({total_a}, {total_b})"
        )
    eta_a = pairs_count / total_a if total_a else 0.0
    eta_b = pairs_count / total_b if total_b else 0.0
    return eta_a, eta_b


def side_index(basis, outcome):
    """Position of a (basis, outcome) detection in H, V, +, - order."""
    return 2 * np.asarray(basis, dtype=np.int64) + 1 - np.asarray(outcome, dtype=np.int64)


@dataclass
class CoincidenceTally:
    counts: np.ndarray  # [basis_a, basis_b, outcome_a, outcome_b]
    unmatched_a: int = 0
    unmatched_b: int = 0
    sent_vs_detected: np.ndarray | None = None  # rows: sent pair, cols: detected pair

    @property
    def n_pairs(self) -> int:
        return int(self.counts.sum())

    def cell_counts(self, basis_a: int, basis_b: int) -> tuple[int, int, int, int]:
        """(N11, N10, N01, N00) for one basis combination."""
        c = self.counts[basis_a, basis_b]
        return int(c[1, 1]), int(c[1, 0]), int(c[0, 1]), int(c[0, 0])

    def off_pattern_count(self, expected_columns=None) -> int:
        """Coincidences landing outside the detected cell each sent pair should produce.

        ``expected_columns[row]`` is that cell's column; the diagonal by default,
        which is right whenever both sides count the first polarization of each
        basis as outcome 1.
        """
        if self.sent_vs_detected is None:
            raise ValueError("tally has no sent-vs-detected matrix")
        m = self.sent_vs_detected
        cols = np.arange(16) if expected_columns is None else np.asarray(expected_columns)
        return int(m.sum() - m[np.arange(16), cols].sum())

    def off_pattern_fraction(self, expected_columns=None) -> float:
        total = int(self.sent_vs_detected.sum()) if self.sent_vs_detected is not None else 0
        if total == 0:
            return 0.0
        return self.off_pattern_count(expected_columns) / total

    def counts_as_list(self) -> list:
        return self.counts.tolist()


def tally(stream_a: EventStream, stream_b: EventStream, matching: MatchResult, sent_labels=None) -> CoincidenceTally:
    """Bin matched pairs by (basis, outcome) on both sides.

    ``sent_labels`` holds, per pair, the faked pair that was sent as
    ``4 * alice_index + bob_index`` (-1 to leave a pair out of the matrix).
    """
    ia = matching.pairs[:, 0]
    ib = matching.pairs[:, 1]
    ba, oa = stream_a.basis[ia], stream_a.outcome[ia]
    bb, ob = stream_b.basis[ib], stream_b.outcome[ib]
    counts = np.zeros((2, 2, 2, 2), dtype=np.int64)
    np.add.at(counts, (ba, bb, oa, ob), 1)
    matrix = None
    if sent_labels is not None:
        labels = np.asarray(sent_labels, dtype=np.int64)
        if labels.shape != (ia.size,):
            raise ValueError(f"{labels.size} sent labels for {ia.size} pairs")
        if np.any((labels < -1) | (labels > 15)):
            raise ValueError("sent labels must lie in 0..15 or be -1")
        keep = labels >= 0
        cols = 4 * side_index(ba, oa) + side_index(bb, ob)
        matrix = np.zeros((16, 16), dtype=np.int64)
        np.add.at(matrix, (labels[keep], cols[keep]), 1)
    return CoincidenceTally(counts, matching.unmatched_a, matching.unmatched_b, matrix)


def write_events_csv(stream: EventStream, path) -> None:
    path = Path(path)
    lines = [",".join(CSV_HEADER)]
    party = stream.party
    lines.extend(
        f"{t},{party},{b},{o}"
        for t, b, o in zip(stream.time.tolist(), stream.basis.tolist(), stream.outcome.tolist())
    )
    path.write_text("\n".join(lines) + "\n")


def read_events_csv(path, party: str | None = None) -> EventStream:
    """Parse an event file; errors carry the 1-based line number."""
    path = Path(path)
    times, bases, outcomes = [], [], []
    seen_party = party
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return EventStream.empty(party or "alice")
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise StreamFormatError(f"expected header {','.join(CSV_HEADER)}", line=1)
        last = -1
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise StreamFormatError(f"expected 4 fields, got {len(row)}", line=lineno)
            try:
                t, b, o = int(row[0]), int(row[2]), int(row[3])
            except ValueError as exc:
                raise StreamFormatError(f"non-integer field ({exc})", line=lineno) from None
            p = row[1].strip()
            if p not in PARTIES:
                raise StreamFormatError(f"unknown party {p!r}", line=lineno)
            if seen_party is None:
                seen_party = p
            elif p != seen_party:
                raise StreamFormatError(f"party {p!r} in a {seen_party!r} stream", line=lineno)
            if b not in (0, 1) or o not in (0, 1):
                raise StreamFormatError("basis and outcome must be 0 or 1", line=lineno)
            if t < last:
                raise StreamFormatError("rows are not sorted by time_ns", line=lineno)
            if t < 0:
                raise StreamFormatError("negative timestamp", line=lineno)
            last = t
            times.append(t)
            bases.append(b)
            outcomes.append(o)
    return EventStream(seen_party or "alice", times, bases, outcomes)


def matrix_row_labels() -> list[str]:
    return [f"{a}|{b}~" for a in SIDE_LABELS for b in SIDE_LABELS]


def write_matrix_csv(matrix: np.ndarray, path) -> None:
    """16x16 sent-vs-detected counts with row and column labels."""
    labels = matrix_row_labels()
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sent\\detected", *labels])
        for label, row in zip(labels, np.asarray(matrix).tolist()):
            w.writerow([label, *row])
