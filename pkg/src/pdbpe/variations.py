"""Series variations derived from a discretized sequence.

Four views of each symbol sequence are mined independently: the sequence
itself, a run-collapsed form, a run-collapsed form that keeps duration
information relative to the typical run length, and the sequence of
step-to-step changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


def run_lengths(symbols: Sequence[int]) -> list[tuple[int, int, int]]:
    """Maximal constant runs as (symbol, start_index, length) triples."""
    runs: list[tuple[int, int, int]] = []
    n = len(symbols)
    i = 0
    while i < n:
        j = i + 1
        while j < n and symbols[j] == symbols[i]:
            j += 1
        runs.append((int(symbols[i]), i, j - i))
        i = j
    return runs


def apply_rcs(symbols: Sequence[int]) -> list[int]:
    """Collapse each maximal constant run to a single symbol.

    [1,1,2,2,2,0,0,0,4] -> [1,2,0,4]. Output has no two equal adjacent
    symbols; applying it twice is a no-op.
    """
    out: list[int] = []
    for sym in symbols:
        if not out or out[-1] != sym:
            out.append(int(sym))
    return out


@dataclass(frozen=True)
class RcsmMedians:
    """Per-symbol typical run lengths fitted on training sequences.

    Symbols never seen in training default to a median of 1.
    """

    medians: dict[int, int] = field(default_factory=dict)

    def median_for(self, symbol: int) -> int:
        return self.medians.get(int(symbol), 1)


def fit_rcsm_medians(corpus: Iterable[Sequence[int]]) -> RcsmMedians:
    """Collect run lengths per symbol across all training sequences and take
    the lower median (element at index (n-1)//2 of the sorted lengths)."""
    lengths: dict[int, list[int]] = {}
    for seq in corpus:
        for sym, _start, length in run_lengths(seq):
            lengths.setdefault(sym, []).append(length)
    medians = {}
    for sym, vals in lengths.items():
        vals.sort()
        medians[sym] = vals[(len(vals) - 1) // 2]
    return RcsmMedians(medians=medians)


def apply_rcsm(symbols: Sequence[int], medians: RcsmMedians) -> list[int]:
    """Run collapse that keeps a coarse duration signal.

    A run of symbol s emits one copy when its length is at most the fitted
    median for s, and exactly two copies otherwise (never more).
    [1,1,2,2,2,0,0,0,4] with all medians 2 -> [1,2,2,0,0,4].
    """
    out: list[int] = []
    for sym, _start, length in run_lengths(symbols):
        out.append(sym)
        if length > medians.median_for(sym):
            out.append(sym)
    return out


def apply_autoregressive(symbols: Sequence[int]) -> list[int]:
    """First differences of the symbol sequence: y[t] = x[t+1] - x[t].

    [1,1,2,2,2,0,0,0,4] -> [0,1,0,0,-2,0,0,4]. A length-1 input yields an
    empty output (the series then contributes no features for this view).
    """
    arr = np.asarray(symbols, dtype=np.int64)
    if arr.size <= 1:
        return []
    return np.diff(arr).tolist()


def offset_encode(diffs: Sequence[int], K: int) -> list[int]:
    """Shift signed step symbols into [0, 2K-2] for the miner."""
    off = K - 1
    return [int(d) + off for d in diffs]


def offset_decode(symbols: Sequence[int], K: int) -> list[int]:
    """Undo offset_encode, restoring signed step symbols for display."""
    off = K - 1
    return [int(s) - off for s in symbols]
