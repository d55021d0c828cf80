"""Pair-merge pattern mining over symbol corpora.

The miner repeatedly replaces the most frequent adjacent symbol pair with a
fresh symbol, growing a vocabulary of variable-length patterns. Occurrences
are counted non-overlapping, scanning left to right, so a run of the same
symbol of length L holds floor(L/2) occurrences of its self-pair. Merging
stops when the best pair's frequency drops below max(N*P, T*U), where N is
the training series count and T the initial number of adjacent pair slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DataError


@dataclass(frozen=True)
class MergeRule:
    """One learned merge: (left, right) -> new_symbol.

    train_frequency is the pair's corpus frequency at merge time;
    train_series_support is the number of distinct training series containing
    the pair at merge time.
    """

    new_symbol: int
    left: int
    right: int
    train_frequency: int
    train_series_support: int


@dataclass(eq=False)
class Vocabulary:
    """Base alphabet plus an ordered list of merge rules.

    New symbols are numbered contiguously from base_size. Diagnostics from
    fitting are kept for reporting: n_series (N), initial_pair_slots (T),
    and the stopping threshold max(N*P, T*U).
    """

    base_size: int
    rules: tuple[MergeRule, ...]
    n_series: int = 0
    initial_pair_slots: int = 0
    stop_threshold: float = 0.0
    _ranks: dict[tuple[int, int], int] | None = field(default=None, repr=False)
    _decoded: dict[int, tuple[int, ...]] = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return self.base_size + len(self.rules)

    def pair_ranks(self) -> dict[tuple[int, int], int]:
        if self._ranks is None:
            self._ranks = {(r.left, r.right): i for i, r in enumerate(self.rules)}
        return self._ranks

    def decode(self, symbol: int) -> tuple[int, ...]:
        """Expand a symbol to its base-alphabet sequence."""
        symbol = int(symbol)
        if 0 <= symbol < self.base_size:
            return (symbol,)
        if not self.base_size <= symbol < self.size:
            raise DataError(f"unknown symbol {symbol} for vocabulary of size {self.size}")
        cached = self._decoded.get(symbol)
        if cached is None:
            rule = self.rules[symbol - self.base_size]
            cached = self.decode(rule.left) + self.decode(rule.right)
            self._decoded[symbol] = cached
        return cached


def _series_pair_counts(seq: Sequence[int]) -> dict[tuple[int, int], int]:
    """Non-overlapping pair counts for one sequence.

    Walks maximal runs: a run of symbol a with length L contributes L//2 to
    (a, a), and each run boundary contributes one occurrence of the distinct
    pair it forms.
    """
    counts: dict[tuple[int, int], int] = {}
    n = len(seq)
    i = 0
    while i < n:
        a = seq[i]
        j = i + 1
        while j < n and seq[j] == a:
            j += 1
        if j - i >= 2:
            key = (a, a)
            counts[key] = counts.get(key, 0) + ((j - i) >> 1)
        if j < n:
            key = (a, seq[j])
            counts[key] = counts.get(key, 0) + 1
        i = j
    return counts


def _replace_pair(seq: Sequence[int], left: int, right: int, new: int) -> list[int]:
    """Replace non-overlapping (left, right) occurrences, left to right."""
    out: list[int] = []
    append = out.append
    n = len(seq)
    last = n - 1
    i = 0
    while i < n:
        if i < last and seq[i] == left and seq[i + 1] == right:
            append(new)
            i += 2
        else:
            append(seq[i])
            i += 1
    return out


def count_pairs(corpus: Iterable[Sequence[int]]) -> dict[tuple[int, int], tuple[int, int]]:
    """Corpus-wide pair statistics: (left, right) -> (frequency, series_support).

    Frequency uses the non-overlapping left-to-right convention; support is
    the number of distinct series with at least one occurrence. Pairs never
    cross series boundaries.
    """
    totals: dict[tuple[int, int], int] = {}
    support: dict[tuple[int, int], int] = {}
    for seq in corpus:
        for key, cnt in _series_pair_counts(list(seq)).items():
            totals[key] = totals.get(key, 0) + cnt
            support[key] = support.get(key, 0) + 1
    return {key: (cnt, support[key]) for key, cnt in totals.items()}


def fit_bpe(corpus: Iterable[Sequence[int]], base_size: int,
            n_series: int | None = None, P: float = 0.20, U: float = 0.001,
            return_encoded: bool = False):
    """Learn a merge-rule vocabulary from a symbol corpus.

    Each iteration merges the globally most frequent pair (ties broken by the
    lexicographically smallest (left, right)) and assigns it the next symbol
    id from base_size upward. Pair counts are maintained incrementally: only
    series containing the merged pair are rescanned. An empty corpus yields
    an empty vocabulary.

    Returns the Vocabulary, or (Vocabulary, encoded_corpus) when
    return_encoded is set; the encoded corpus is each input sequence in its
    end-of-training form.
    """
    seqs = [list(seq) for seq in corpus]
    for seq in seqs:
        for sym in seq:
            if not 0 <= sym < base_size:
                raise DataError(f"corpus symbol {sym} outside base alphabet "
                                f"[0, {base_size})")
    N = len(seqs) if n_series is None else n_series
    T = sum(len(seq) - 1 for seq in seqs if len(seq) > 1)
    threshold = max(N * P, T * U)

    per_series = [_series_pair_counts(seq) for seq in seqs]
    totals: dict[tuple[int, int], int] = {}
    holders: dict[tuple[int, int], set[int]] = {}
    for idx, counts in enumerate(per_series):
        for key, cnt in counts.items():
            totals[key] = totals.get(key, 0) + cnt
            holders.setdefault(key, set()).add(idx)

    rules: list[MergeRule] = []
    next_symbol = base_size
    while totals:
        # Most frequent pair; ties go to the smallest (left, right).
        (left, right), freq = min(totals.items(), key=lambda kv: (-kv[1], kv[0]))
        if freq < threshold:
            break
        pair = (left, right)
        support = len(holders[pair])
        for idx in sorted(holders[pair]):
            old = per_series[idx]
            seqs[idx] = _replace_pair(seqs[idx], left, right, next_symbol)
            new = _series_pair_counts(seqs[idx])
            per_series[idx] = new
            for key, cnt in old.items():
                ncnt = new.get(key)
                if ncnt == cnt:
                    continue
                t = totals[key] - cnt + (ncnt or 0)
                if t:
                    totals[key] = t
                else:
                    del totals[key]
                if ncnt is None:
                    hs = holders[key]
                    hs.discard(idx)
                    if not hs:
                        del holders[key]
            for key, cnt in new.items():
                if key in old:
                    continue
                totals[key] = totals.get(key, 0) + cnt
                holders.setdefault(key, set()).add(idx)
        rules.append(MergeRule(new_symbol=next_symbol, left=left, right=right,
                               train_frequency=freq, train_series_support=support))
        next_symbol += 1

    vocab = Vocabulary(base_size=base_size, rules=tuple(rules), n_series=N,
                       initial_pair_slots=T, stop_threshold=threshold)
    if return_encoded:
        return vocab, seqs
    return vocab


def encode(symbols: Sequence[int], vocab: Vocabulary) -> list[int]:
    """Apply the vocabulary's merge rules to a base-alphabet sequence.

    Rules fire in learned order; at each step the lowest-ranked rule whose
    pair is present replaces all its non-overlapping occurrences, which is
    equivalent to one exhaustive pass per rule (later merges never recreate
    an earlier rule's pair). Input symbols outside the base alphabet are a
    hard error. Applied to a training sequence, this reproduces its
    end-of-training form exactly.
    """
    seq = []
    for sym in symbols:
        sym = int(sym)
        if not 0 <= sym < vocab.base_size:
            raise DataError(f"symbol {sym} outside base alphabet "
                            f"[0, {vocab.base_size})")
        seq.append(sym)
    ranks = vocab.pair_ranks()
    if not ranks:
        return seq
    while len(seq) >= 2:
        best = None
        prev = seq[0]
        for cur in seq[1:]:
            rank = ranks.get((prev, cur))
            if rank is not None and (best is None or rank < best):
                best = rank
            prev = cur
        if best is None:
            break
        rule = vocab.rules[best]
        seq = _replace_pair(seq, rule.left, rule.right, rule.new_symbol)
    return seq


def decode_pattern(symbol: int, vocab: Vocabulary) -> tuple[int, ...]:
    """Expand a vocabulary symbol into its base-alphabet sequence."""
    return vocab.decode(symbol)
