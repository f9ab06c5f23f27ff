"""Signal-level aggregation: max-over-bits arrival, ranking, criticality
groups, and design TNS/WNS.

Groups follow the 5%/40%/70% split: rank positions up to ceil(0.05*n)
form group 1, up to ceil(0.40*n) group 2, up to ceil(0.70*n) group 3,
the rest group 4. Ranks are descending by arrival with average-rank ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bog import parse_bit_name
from .errors import EmptySignalSet, UnparseableBitName


def average_ranks_desc(values) -> list[float]:
    """Rank 1 = largest value; equal values share the average rank."""
    order = sorted(range(len(values)), key=lambda i: (-values[i], i))
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def group_bounds(n: int) -> tuple[int, int, int]:
    return (math.ceil(0.05 * n), math.ceil(0.40 * n), math.ceil(0.70 * n))


def group_for_rank(rank: float, n: int) -> int:
    c1, c2, c3 = group_bounds(n)
    if rank <= c1:
        return 1
    if rank <= c2:
        return 2
    if rank <= c3:
        return 3
    return 4


def groups_from_values(values) -> list[int]:
    """Criticality group per item, ranking descending by value."""
    n = len(values)
    ranks = average_ranks_desc(values)
    return [group_for_rank(r, n) for r in ranks]


@dataclass(frozen=True)
class SignalTiming:
    name: str
    bit_arrivals: tuple[float, ...]
    signal_at: float         # max of bit arrivals
    slack: float
    rank: float              # average-rank, descending by signal_at
    group: int               # 1..4


@dataclass(frozen=True)
class DesignTiming:
    design: str
    wns: float
    tns: float
    endpoint_count: int
    violating_count: int


def aggregate_signals(bit_arrivals: dict[str, float], clock_period: float,
                      design: str = "") -> list[SignalTiming]:
    """Fold per-bit arrivals into signal-level timing records.

    Bit names must parse as "signal[k]"; primary-output bits behave as
    one-bit signals. Result is sorted by (rank, name).
    """
    del design
    by_signal: dict[str, dict[int, float]] = {}
    for name, at in bit_arrivals.items():
        try:
            sig, bit = parse_bit_name(name)
        except ValueError as exc:
            raise UnparseableBitName(str(exc)) from None
        by_signal.setdefault(sig, {})[bit] = at
    if not by_signal:
        raise EmptySignalSet("no bit arrivals to aggregate")

    names = sorted(by_signal)
    ats = [max(by_signal[s].values()) for s in names]
    ranks = average_ranks_desc(ats)
    n = len(names)
    out = []
    for name, at, rank in zip(names, ats, ranks):
        bits = by_signal[name]
        out.append(SignalTiming(
            name=name,
            bit_arrivals=tuple(bits[k] for k in sorted(bits)),
            signal_at=at,
            slack=clock_period - at,
            rank=rank,
            group=group_for_rank(rank, n),
        ))
    out.sort(key=lambda s: (s.rank, s.name))
    return out


def compute_design_timing(signals: list[SignalTiming], clock_period: float,
                          design: str = "") -> DesignTiming:
    """WNS/TNS from signal arrivals under the given clock period."""
    if not signals:
        raise EmptySignalSet("cannot compute design timing of an empty signal set")
    slacks = [clock_period - s.signal_at for s in signals]
    wns = min(0.0, min(slacks))
    tns = sum(min(0.0, s) for s in slacks)
    return DesignTiming(
        design=design,
        wns=wns,
        tns=tns,
        endpoint_count=len(signals),
        violating_count=sum(1 for s in slacks if s < 0),
    )


__all__ = [
    "SignalTiming", "DesignTiming", "average_ranks_desc", "group_bounds",
    "group_for_rank", "groups_from_values", "aggregate_signals",
    "compute_design_timing",
]
