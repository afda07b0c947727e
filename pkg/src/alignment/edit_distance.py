"""
Threshold-bounded edit distance between a read and a reference window

SEMANTICS (shared by both functions in this module):
    distance = min over prefixes P of the window of Levenshtein(read, P)

The read is consumed completely, the window start is anchored at the candidate
position and the window end is free. Unit costs for substitution, insertion
and deletion. A position where either string holds N is a mismatch, even N
against N. A window shorter than ``len(read) + d_limit`` (end of the genome)
is allowed; the missing bases simply cost one edit each.

``start_slack = k`` additionally lets the alignment begin at any of the first
k + 1 window positions at no cost, i.e. the result is the minimum of the
anchored distances over starts 0..k. The aligner uses this to absorb anchor
drift caused by an indel in front of the first matching seed.

ALGORITHM:
``bounded_distance`` keeps, for every edit count e and diagonal k (reference
index minus read index), only the furthest read row reachable with e edits,
extending along exact matches between edit steps. Work is proportional to
read_length x (distance + 1) and working space to the number of diagonals
(d_limit + start_slack). Once e would exceed ``d_limit`` it gives up and
returns ``EXCEEDS_LIMIT`` without finishing the table.

``full_dp_distance`` is the O(n*m) textbook table, kept as the test oracle.
"""

from dataclasses import dataclass
from typing import List, Optional, Union

# Returned by bounded_distance when the distance is larger than d_limit
EXCEEDS_LIMIT = None

DistanceOutcome = Optional[int]
Sequence = Union[str, bytes]

_N = ord("N")
_UNREACHED = -1


@dataclass
class KernelCounters:
    """Work counters for bounded_distance (cells touched, calls, early exits)"""

    calls: int = 0
    exceeded: int = 0
    cells: int = 0

    def merge(self, other: "KernelCounters") -> None:
        self.calls += other.calls
        self.exceeded += other.exceeded
        self.cells += other.cells


def _as_bytes(sequence: Sequence) -> bytes:
    return sequence.encode("ascii") if isinstance(sequence, str) else sequence


def bounded_distance(
    read: Sequence,
    reference_window: Sequence,
    d_limit: int,
    start_slack: int = 0,
    counters: Optional[KernelCounters] = None,
) -> DistanceOutcome:
    """
    Semi-global edit distance if it is at most ``d_limit``

    Args:
        read: Read bases (str or ASCII bytes)
        reference_window: Reference bases starting at the candidate position
        d_limit: Largest distance of interest (>= 0)
        start_slack: Number of leading window bases that may be skipped for free
        counters: Optional work counters, updated in place

    Returns:
        The distance, or ``EXCEEDS_LIMIT`` (None) when it is larger than d_limit

    Raises:
        ValueError: negative d_limit or start_slack
    """
    if d_limit < 0:
        raise ValueError(f"d_limit must be non-negative, got {d_limit}")
    if start_slack < 0:
        raise ValueError(f"start_slack must be non-negative, got {start_slack}")

    p = _as_bytes(read)
    t = _as_bytes(reference_window)
    n = len(p)
    m = len(t)
    cells = 0

    if counters is not None:
        counters.calls += 1

    if n == 0:
        return 0

    # Diagonal k = j - i lives at slot k + offset
    offset = d_limit + 1
    width = 2 * d_limit + start_slack + 3
    max_k = min(start_slack, m)
    current: List[int] = [_UNREACHED] * width

    # e = 0: free starts on diagonals 0..start_slack
    for k in range(0, max_k + 1):
        i = 0
        limit = min(n, m - k)
        while i < limit and p[i] == t[i + k] and p[i] != _N:
            i += 1
        cells += i + 1
        if i == n:
            if counters is not None:
                counters.cells += cells
            return 0
        current[k + offset] = i

    low_k, high_k = 0, max_k
    for e in range(1, d_limit + 1):
        previous = current
        current = [_UNREACHED] * width
        low_k = max(low_k - 1, -n)
        high_k = min(high_k + 1, m)
        for k in range(low_k, high_k + 1):
            slot = k + offset

            # fewer edits already reached this row
            row = previous[slot]
            best = row
            # substitution: (i, j) -> (i + 1, j + 1)
            if row != _UNREACHED and row < n and row + k < m:
                best = row + 1
            # read insertion: diagonal k + 1 -> k, (i, j) -> (i + 1, j)
            row = previous[slot + 1]
            if row != _UNREACHED and row < n and row + 1 > best:
                best = row + 1
            # deletion from read: diagonal k - 1 -> k, (i, j) -> (i, j + 1)
            row = previous[slot - 1]
            if row != _UNREACHED and row + k <= m and row > best:
                best = row

            if best == _UNREACHED:
                continue

            i = best
            limit = min(n, m - k)
            start = i
            while i < limit and p[i] == t[i + k] and p[i] != _N:
                i += 1
            cells += i - start + 1
            if i == n:
                if counters is not None:
                    counters.cells += cells
                return e
            current[slot] = i

    if counters is not None:
        counters.cells += cells
        counters.exceeded += 1
    return EXCEEDS_LIMIT


def full_dp_distance(read: Sequence, reference_window: Sequence, start_slack: int = 0) -> int:
    """
    Exact semi-global distance via the full dynamic-programming table

    Same semantics as ``bounded_distance`` without a limit; O(n*m) time.
    """
    p = _as_bytes(read)
    t = _as_bytes(reference_window)
    n, m = len(p), len(t)

    # row[j] = distance of read[:i] against window[:j] (start skip allowed up to start_slack)
    row = [max(0, j - start_slack) for j in range(m + 1)]
    for i in range(1, n + 1):
        base = p[i - 1]
        new_row = [i] + [0] * m
        for j in range(1, m + 1):
            cost = 0 if base == t[j - 1] and base != _N else 1
            new_row[j] = min(row[j - 1] + cost, row[j] + 1, new_row[j - 1] + 1)
        row = new_row
    return min(row)
