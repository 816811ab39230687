"""Alignment quality metrics: accuracy, confidence, and complexity.

Accuracy is measured by sum-of-pairs scores (reference-free and
reference-based), the column score, and pattern misalignment scores
aggregated into a frequency-weighted overall misalignment score.
Confidence is the entropy-based information score, per column and
averaged over the whole alignment.  Complexity is the gap fraction,
bounded below by the padding any alignment needs and above by the
one-occurrence-per-column worst case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .aligner import DEFAULT_SCHEME, ScoringScheme
from .core import (
    GAP,
    Alignment,
    DegenerateReferenceError,
    EventLog,
    SourceMismatchError,
    SymbolCount,
    ThresholdTooHighError,
    column_histogram,
    require_valid,
)

__all__ = [
    "Pattern",
    "PatternCensus",
    "ComplexityResult",
    "ConsensusEntry",
    "MetricReport",
    "METRIC_ORDER",
    "ref_free_sps",
    "ref_based_sps",
    "column_score",
    "extract_patterns",
    "misalignment_score",
    "overall_misalignment_score",
    "information_score",
    "overall_information_score",
    "alignment_complexity",
    "consensus_sequence",
    "count_heuristic_errors",
    "most_frequent_pattern",
    "evaluate_alignment",
]


class Pattern(tuple):
    """A contiguous, gap-free activity subsequence of length >= 2."""

    __slots__ = ()

    def __new__(cls, symbols: Sequence[str]) -> "Pattern":
        items = tuple(str(s) for s in symbols)
        if len(items) < 2:
            raise ValueError(f"pattern needs at least 2 activities, got {len(items)}")
        if GAP in items:
            raise ValueError("patterns never contain the gap symbol")
        return super().__new__(cls, items)

    def __repr__(self) -> str:
        return "<" + ", ".join(self) + ">"


class PatternCensus:
    """Occurrence counts of every contiguous subsequence within bounds.

    Overlapping occurrences count, and counting is log-wide.  Entries
    are stored as packed code arrays keyed by their raw bytes, which
    keeps million-entry censuses cheap; iteration decodes to
    :class:`Pattern` on demand.
    """

    def __init__(
        self,
        alphabet: tuple[str, ...],
        counts: dict[bytes, int],
        dtype: np.dtype,
        min_len: int,
        max_len: int,
    ) -> None:
        self.alphabet = alphabet
        self._counts = counts
        self._dtype = dtype
        self.min_len = min_len
        self.max_len = max_len
        self.f_max = max(counts.values()) if counts else 0

    def __len__(self) -> int:
        return len(self._counts)

    def __bool__(self) -> bool:
        return bool(self._counts)

    def _decode(self, key: bytes) -> Pattern:
        codes = np.frombuffer(key, dtype=self._dtype)
        return Pattern(self.alphabet[c] for c in codes)

    def _encode(self, pattern: Sequence[str]) -> bytes | None:
        try:
            codes = np.array([self.alphabet.index(s) for s in pattern], dtype=self._dtype)
        except ValueError:
            return None
        return codes.tobytes()

    def count(self, pattern: Sequence[str]) -> int:
        key = self._encode(pattern)
        return self._counts.get(key, 0) if key is not None else 0

    def __contains__(self, pattern: Sequence[str]) -> bool:
        return self.count(pattern) > 0

    def items(self) -> Iterator[tuple[Pattern, int]]:
        for key, n in self._counts.items():
            yield self._decode(key), n

    def eligible(self, threshold: float) -> list[tuple[Pattern, int]]:
        """Patterns occurring strictly more often than ``threshold``."""
        return [(self._decode(k), n) for k, n in self._counts.items() if n > threshold]

    def length_frequency_table(self, buckets: int = 10) -> dict[tuple[int, int], int]:
        """Pattern counts keyed by (pattern length, frequency bucket).

        The bucket index is floor(buckets * f_p / f_max), with the upper
        edge folded into the last bucket.
        """
        if not self._counts:
            return {}
        size = np.dtype(self._dtype).itemsize
        table: dict[tuple[int, int], int] = {}
        for key, n in self._counts.items():
            bucket = min(int(buckets * n / self.f_max), buckets - 1)
            entry = (len(key) // size, bucket)
            table[entry] = table.get(entry, 0) + 1
        return table


def extract_patterns(log: EventLog, min_len: int = 2, max_len: int | None = None) -> PatternCensus:
    """Count every contiguous activity subsequence of bounded length.

    Sliding windows of each length are stacked across traces and
    deduplicated in one sort per length, so the census stays vectorized
    even for long traces.
    """
    if len(log) == 0:
        raise ValueError("cannot extract patterns from an empty log")
    if min_len < 2:
        raise ValueError(f"min_len must be >= 2, got {min_len}")
    longest = log.max_trace_length
    if max_len is None:
        max_len = longest
    if max_len < min_len:
        raise ValueError(f"max_len {max_len} below min_len {min_len}")

    n_symbols = len(log.alphabet)
    dtype = np.dtype(np.uint8) if n_symbols <= 256 else np.dtype(np.uint16)
    counts: dict[bytes, int] = {}
    for m in range(min_len, min(max_len, longest) + 1):
        chunks = [
            np.lib.stride_tricks.sliding_window_view(codes, m)
            for codes in log.trace_codes
            if codes.size >= m
        ]
        if not chunks:
            continue
        windows = np.ascontiguousarray(np.vstack(chunks).astype(dtype))
        unique, freq = np.unique(windows, axis=0, return_counts=True)
        for row, n in zip(unique, freq):
            counts[row.tobytes()] = int(n)
    return PatternCensus(log.alphabet, counts, dtype, min_len, max_len)


def ref_free_sps(alignment: Alignment, scheme: ScoringScheme = DEFAULT_SCHEME) -> float:
    """Sum over columns and row pairs of match/mismatch/gap scores.

    Gap-vs-gap pairs contribute nothing.  Under the default scheme the
    result is integral.
    """
    require_valid(alignment)
    counts = _kernels.column_counts(alignment.codes, len(alignment.source.alphabet))
    return _kernels.sps_from_counts(counts, scheme.match, scheme.mismatch, scheme.gap)


def _check_same_source(a: Alignment, ref: Alignment) -> None:
    if a.source != ref.source:
        raise SourceMismatchError("alignments do not share a source log")


def _occurrence_ids(a: Alignment) -> np.ndarray:
    """(R, L) global occurrence ids (offset + ordinal), -1 for gaps."""
    offsets = np.concatenate([[0], np.cumsum(a.source.lengths[:-1])])
    return np.where(a.grid >= 0, a.grid + offsets[:, None], -1)


def _pair_keys(a: Alignment) -> np.ndarray:
    """Sorted array of encoded same-column occurrence pairs."""
    ids = _occurrence_ids(a)
    total = int(a.source.lengths.sum())
    keys = []
    for j in range(a.length):
        col = np.sort(ids[:, j][ids[:, j] >= 0])
        if col.size < 2:
            continue
        lo, hi = np.triu_indices(col.size, k=1)
        keys.append(col[lo] * total + col[hi])
    if not keys:
        return np.empty(0, dtype=np.int64)
    return np.sort(np.concatenate(keys))


def ref_based_sps(a: Alignment, ref: Alignment) -> float:
    """Fraction of the reference's aligned pairs preserved by ``a``.

    A pair is two occurrences sharing a column; identity is by
    occurrence, so repeated activities of one type stay distinct.
    """
    _check_same_source(a, ref)
    require_valid(a)
    require_valid(ref)
    ref_pairs = _pair_keys(ref)
    if ref_pairs.size == 0:
        raise DegenerateReferenceError("reference alignment has no aligned pairs")
    mine = _pair_keys(a)
    common = np.intersect1d(mine, ref_pairs, assume_unique=True)
    return common.size / ref_pairs.size


def _column_sets(a: Alignment) -> list[frozenset[int]]:
    ids = _occurrence_ids(a)
    return [frozenset(ids[:, j][ids[:, j] >= 0].tolist()) for j in range(a.length)]


def column_score(a: Alignment, ref: Alignment) -> float:
    """Fraction of columns whose occurrence set matches a reference column.

    Occurrence sets of distinct columns are disjoint, so each reference
    column can match at most one result column.
    """
    _check_same_source(a, ref)
    require_valid(a)
    require_valid(ref)
    ref_columns = set(_column_sets(ref))
    mine = _column_sets(a)
    correct = sum(1 for col in mine if col in ref_columns)
    return correct / len(mine)


def _instance_starts(trace_codes: np.ndarray, pattern_codes: np.ndarray) -> np.ndarray:
    """Start ordinals of (possibly overlapping) pattern occurrences."""
    m = pattern_codes.size
    if trace_codes.size < m:
        return np.empty(0, dtype=np.int64)
    windows = np.lib.stride_tricks.sliding_window_view(trace_codes, m)
    return np.nonzero((windows == pattern_codes).all(axis=1))[0].astype(np.int64)


def misalignment_score(alignment: Alignment, pattern: Sequence[str]) -> float:
    """Summed pairwise misalignment of a pattern's instances.

    For each trace pair, instances are matched in start order; a matched
    pair contributes the column distance between the instance starts,
    plus 1 when either instance faces a gap or an activity outside the
    pattern in the other trace.  Unmatched instances contribute 1 each.
    A pattern absent from every trace scores 0.
    """
    require_valid(alignment)
    pattern = Pattern(pattern)
    log = alignment.source
    code_of = log.code_of
    if any(s not in code_of for s in pattern):
        return 0.0
    pattern_codes = np.array([code_of[s] for s in pattern], dtype=np.int64)

    starts = [_instance_starts(codes, pattern_codes) for codes in log.trace_codes]
    n_starts = np.array([s.size for s in starts], dtype=np.int64)
    if n_starts.sum() == 0:
        return 0.0
    width = max(1, int(n_starts.max()))
    starts_padded = np.zeros((len(log), width), dtype=np.int64)
    for i, s in enumerate(starts):
        starts_padded[i, : s.size] = s

    in_pattern = np.zeros(len(log.alphabet), dtype=np.bool_)
    in_pattern[pattern_codes] = True
    return float(
        _kernels.ms_pattern(
            starts_padded,
            n_starts,
            alignment.column_of,
            alignment.codes,
            len(pattern),
            in_pattern,
        )
    )


def overall_misalignment_score(
    alignment: Alignment,
    census: PatternCensus,
    tf_ratio: float = 0.40,
) -> float:
    """Frequency-weighted mean misalignment over eligible patterns.

    Patterns with occurrence count strictly above ``tf_ratio * f_max``
    are eligible; each contributes its misalignment score weighted by
    its frequency relative to the most frequent pattern.
    """
    if not census:
        raise ValueError("pattern census is empty")
    if not 0.0 < tf_ratio <= 1.0:
        raise ValueError(f"tf_ratio must be in (0, 1], got {tf_ratio}")
    threshold = tf_ratio * census.f_max
    chosen = census.eligible(threshold)
    if not chosen:
        raise ThresholdTooHighError(
            f"no pattern occurs more than {threshold:g} times; lower tf_ratio below {tf_ratio}"
        )
    total = 0.0
    for pattern, f_p in chosen:
        total += misalignment_score(alignment, pattern) * (f_p / census.f_max)
    return total / len(chosen)


def most_frequent_pattern(census: PatternCensus) -> Pattern:
    """Highest-count pattern; ties go to the shortest, then lexicographic."""
    if not census:
        raise ValueError("pattern census is empty")
    best: tuple[int, int, Pattern] | None = None
    for pattern, n in census.items():
        key = (-n, len(pattern), pattern)
        if best is None or key < best:
            best = key
    return best[2]


def information_score(histogram: Mapping[str, SymbolCount], n_types: int) -> float:
    """1 - (column entropy / maximum entropy), in [0, 1].

    The gap counts as a symbol, so the entropy ceiling is
    log2(n_types + 1) for a log with n_types activity types.
    """
    if n_types < 1:
        raise ValueError(f"need at least one activity type, got {n_types}")
    entropy = 0.0
    for symbol_count in histogram.values():
        p = symbol_count.frequency
        if p > 0:
            entropy -= p * np.log2(p)
    e_max = np.log2(n_types + 1)
    return float(np.clip(1.0 - entropy / e_max, 0.0, 1.0))


def overall_information_score(alignment: Alignment) -> float:
    """Length-normalized cumulative column entropy, as a score in [0, 1].

    Algebraically the mean of the per-column information scores; both
    evaluations are computed and must agree to 1e-12.
    """
    require_valid(alignment)
    n_types = len(alignment.source.alphabet)
    counts = _kernels.column_counts(alignment.codes, n_types)
    entropies = _kernels.entropy_per_column(counts)
    e_max = np.log2(n_types + 1)
    ois = 1.0 - entropies.sum() / (e_max * alignment.length)
    per_column = [
        information_score(column_histogram(alignment, j), n_types)
        for j in range(alignment.length)
    ]
    assert abs(ois - float(np.mean(per_column))) < 1e-12
    return float(ois)


class ComplexityResult(NamedTuple):
    value: float
    lower_bound: float
    upper_bound: float


def alignment_complexity(alignment: Alignment) -> ComplexityResult:
    """Gap fraction 1 - M/(N*L) with its structural bounds.

    The lower bound is forced by padding every trace to the longest
    one; the upper bound is reached when each column holds a single
    occurrence.
    """
    require_valid(alignment)
    m = alignment.source.total_activities
    n = alignment.n_rows
    length = alignment.length
    value = 1.0 - m / (n * length)
    lower = 1.0 - m / (n * alignment.l_min)
    upper = 1.0 - 1.0 / n
    result = ComplexityResult(value, lower, upper)
    if not lower - 1e-12 <= value <= upper + 1e-12:
        raise AssertionError(f"complexity {value} outside bounds [{lower}, {upper}]")
    return result


class ConsensusEntry(NamedTuple):
    column: int
    label: str
    tied: bool


def consensus_sequence(alignment: Alignment, majority: float = 0.5) -> list[ConsensusEntry]:
    """Per-column strict-majority activities, in column order.

    A column contributes its most frequent non-gap label only when that
    label's frequency over all rows strictly exceeds ``majority``; label
    ties are broken lexicographically and flagged.
    """
    require_valid(alignment)
    if not 0.0 < majority <= 1.0:
        raise ValueError(f"majority must be in (0, 1], got {majority}")
    n_rows = alignment.n_rows
    out: list[ConsensusEntry] = []
    for j in range(alignment.length):
        histogram = column_histogram(alignment, j)
        best_count = 0
        winners: list[str] = []
        for symbol, sc in histogram.items():
            if symbol == GAP:
                continue
            if sc.count > best_count:
                best_count = sc.count
                winners = [symbol]
            elif sc.count == best_count:
                winners.append(symbol)
        if best_count / n_rows > majority:
            out.append(ConsensusEntry(j, min(winners), len(winners) > 1))
    return out


def count_heuristic_errors(a: Alignment, ref: Alignment) -> int:
    """Occurrences whose same-column partner set differs from the reference."""
    _check_same_source(a, ref)
    require_valid(a)
    require_valid(ref)

    def membership(al: Alignment) -> dict[int, frozenset[int]]:
        out: dict[int, frozenset[int]] = {}
        for column in _column_sets(al):
            for occ in column:
                out[occ] = column
        return out

    mine = membership(a)
    theirs = membership(ref)
    return sum(1 for occ, column in mine.items() if column != theirs[occ])


METRIC_ORDER = (
    "ref_free_sps",
    "ref_based_sps",
    "column_score",
    "ms_top",
    "oms",
    "ois",
    "complexity",
)


@dataclass
class MetricReport:
    """All metric values for one alignment, reference metrics optional."""

    ref_free_sps: float
    ms_top: float
    oms: float
    ois: float
    complexity: ComplexityResult
    consensus: list[ConsensusEntry]
    top_pattern: Pattern
    ref_based_sps: float | None = None
    column_score: float | None = None
    n_e: int | None = None
    tf_ratio: float = 0.40
    majority: float = 0.5
    scheme: ScoringScheme = field(default_factory=ScoringScheme)

    def values(self) -> dict[str, float | None]:
        """Metric values keyed in report order."""
        return {
            "ref_free_sps": self.ref_free_sps,
            "ref_based_sps": self.ref_based_sps,
            "column_score": self.column_score,
            "ms_top": self.ms_top,
            "oms": self.oms,
            "ois": self.ois,
            "complexity": self.complexity.value,
        }


def evaluate_alignment(
    alignment: Alignment,
    reference: Alignment | None = None,
    scheme: ScoringScheme = DEFAULT_SCHEME,
    tf_ratio: float = 0.40,
    majority: float = 0.5,
    census: PatternCensus | None = None,
) -> MetricReport:
    """Compute the full metric suite for one alignment.

    Reference-based metrics are filled only when a reference sharing the
    source log is supplied.  The pattern census defaults to the source
    log's full census and can be passed in when evaluating many
    alignments of the same log.
    """
    require_valid(alignment)
    if census is None:
        census = extract_patterns(alignment.source)
    top = most_frequent_pattern(census)
    report = MetricReport(
        ref_free_sps=ref_free_sps(alignment, scheme),
        ms_top=misalignment_score(alignment, top),
        oms=overall_misalignment_score(alignment, census, tf_ratio),
        ois=overall_information_score(alignment),
        complexity=alignment_complexity(alignment),
        consensus=consensus_sequence(alignment, majority),
        top_pattern=top,
        tf_ratio=tf_ratio,
        majority=majority,
        scheme=scheme,
    )
    if reference is not None:
        report.ref_based_sps = ref_based_sps(alignment, reference)
        report.column_score = column_score(alignment, reference)
        report.n_e = count_heuristic_errors(alignment, reference)
    return report
