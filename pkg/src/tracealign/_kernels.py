"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

The backend is chosen at import time.  Set ``TRACEALIGN_NUMBA=0`` to
force the numpy path (useful for debugging and for benchmarking the
jit speedup); anything else uses numba when it is importable.

Both backends compute bit-identical tables: fill-order tie-breaking is
done with the same comparisons on the same float64 values, so traceback
pointers agree exactly.
"""

from __future__ import annotations

import os

import numpy as np


def _numba_requested() -> bool:
    value = os.environ.get("TRACEALIGN_NUMBA", "1").strip().lower()
    return value not in {"0", "false", "no", "off"}


_HAVE_NUMBA = False
if _numba_requested():
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _HAVE_NUMBA = False

BACKEND = "numba" if _HAVE_NUMBA else "numpy"


def using_numba() -> bool:
    return _HAVE_NUMBA


# Traceback pointer codes. Fill order prefers DIAG (consume one symbol of
# each side), then UP (consume from the first side only), then LEFT.
DIAG, UP, LEFT = 0, 1, 2


# ---------------------------------------------------------------------------
# Pairwise global alignment over integer-coded sequences.


def _nw_fill_py(a, b, match, mismatch, gap):
    """DP table + traceback pointers, sweeping anti-diagonals in numpy."""
    la, lb = a.size, b.size
    h = np.empty((la + 1, lb + 1), dtype=np.float64)
    ptr = np.empty((la + 1, lb + 1), dtype=np.uint8)
    h[0, :] = gap * np.arange(lb + 1)
    h[:, 0] = gap * np.arange(la + 1)
    ptr[0, :] = LEFT
    ptr[:, 0] = UP
    ptr[0, 0] = DIAG
    if la == 0 or lb == 0:
        return h, ptr
    sub = np.where(a[:, None] == b[None, :], match, mismatch)
    for d in range(2, la + lb + 1):
        lo = max(1, d - lb)
        hi = min(la, d - 1)
        if lo > hi:
            continue
        i = np.arange(lo, hi + 1)
        j = d - i
        diag = h[i - 1, j - 1] + sub[i - 1, j - 1]
        up = h[i - 1, j] + gap
        left = h[i, j - 1] + gap
        best = np.maximum(diag, np.maximum(up, left))
        h[i, j] = best
        ptr[i, j] = np.where(diag == best, DIAG, np.where(up == best, UP, LEFT))
    return h, ptr


def _nw_fill_loops(a, b, match, mismatch, gap):
    la, lb = a.size, b.size
    h = np.empty((la + 1, lb + 1), dtype=np.float64)
    ptr = np.empty((la + 1, lb + 1), dtype=np.uint8)
    ptr[0, 0] = DIAG
    h[0, 0] = 0.0
    for j in range(1, lb + 1):
        h[0, j] = gap * j
        ptr[0, j] = LEFT
    for i in range(1, la + 1):
        h[i, 0] = gap * i
        ptr[i, 0] = UP
        for j in range(1, lb + 1):
            sub = match if a[i - 1] == b[j - 1] else mismatch
            best = h[i - 1, j - 1] + sub
            p = DIAG
            up = h[i - 1, j] + gap
            if up > best:
                best = up
                p = UP
            left = h[i, j - 1] + gap
            if left > best:
                best = left
                p = LEFT
            h[i, j] = best
            ptr[i, j] = p
    return h, ptr


def _nw_scores_loops(padded, lengths, match, mismatch, gap):
    """All-pairs best alignment scores; rolling two-row DP, no traceback."""
    n = lengths.size
    width = padded.shape[1]
    out = np.zeros((n, n), dtype=np.float64)
    prev = np.empty(width + 1, dtype=np.float64)
    cur = np.empty(width + 1, dtype=np.float64)
    for i in range(n):
        la = lengths[i]
        for j in range(i + 1, n):
            lb = lengths[j]
            for col in range(lb + 1):
                prev[col] = gap * col
            for row in range(1, la + 1):
                cur[0] = gap * row
                ai = padded[i, row - 1]
                for col in range(1, lb + 1):
                    sub = match if ai == padded[j, col - 1] else mismatch
                    best = prev[col - 1] + sub
                    up = prev[col] + gap
                    if up > best:
                        best = up
                    left = cur[col - 1] + gap
                    if left > best:
                        best = left
                    cur[col] = best
                prev, cur = cur, prev
            out[i, j] = prev[lb]
            out[j, i] = prev[lb]
    return out


def _nw_scores_py(padded, lengths, match, mismatch, gap):
    n = lengths.size
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        a = padded[i, : lengths[i]]
        for j in range(i + 1, n):
            b = padded[j, : lengths[j]]
            h, _ = _nw_fill_py(a, b, match, mismatch, gap)
            out[i, j] = out[j, i] = h[-1, -1]
    return out


# ---------------------------------------------------------------------------
# Profile-profile alignment: the pair scores are precomputed into S and
# the per-column gap-insertion costs into ga/gb, so the kernel is shape-
# agnostic (identical recurrence to the pairwise DP).


def _profile_fill_py(s, ga, gb):
    la, lb = s.shape
    h = np.empty((la + 1, lb + 1), dtype=np.float64)
    ptr = np.empty((la + 1, lb + 1), dtype=np.uint8)
    h[0, 0] = 0.0
    h[0, 1:] = np.cumsum(gb)
    h[1:, 0] = np.cumsum(ga)
    ptr[0, :] = LEFT
    ptr[:, 0] = UP
    ptr[0, 0] = DIAG
    for d in range(2, la + lb + 1):
        lo = max(1, d - lb)
        hi = min(la, d - 1)
        if lo > hi:
            continue
        i = np.arange(lo, hi + 1)
        j = d - i
        diag = h[i - 1, j - 1] + s[i - 1, j - 1]
        up = h[i - 1, j] + ga[i - 1]
        left = h[i, j - 1] + gb[j - 1]
        best = np.maximum(diag, np.maximum(up, left))
        h[i, j] = best
        ptr[i, j] = np.where(diag == best, DIAG, np.where(up == best, UP, LEFT))
    return h, ptr


def _profile_fill_loops(s, ga, gb):
    la, lb = s.shape
    h = np.empty((la + 1, lb + 1), dtype=np.float64)
    ptr = np.empty((la + 1, lb + 1), dtype=np.uint8)
    h[0, 0] = 0.0
    ptr[0, 0] = DIAG
    acc = 0.0
    for j in range(1, lb + 1):
        acc += gb[j - 1]
        h[0, j] = acc
        ptr[0, j] = LEFT
    acc = 0.0
    for i in range(1, la + 1):
        acc += ga[i - 1]
        h[i, 0] = acc
        ptr[i, 0] = UP
        for j in range(1, lb + 1):
            best = h[i - 1, j - 1] + s[i - 1, j - 1]
            p = DIAG
            up = h[i - 1, j] + ga[i - 1]
            if up > best:
                best = up
                p = UP
            left = h[i, j - 1] + gb[j - 1]
            if left > best:
                best = left
                p = LEFT
            h[i, j] = best
            ptr[i, j] = p
    return h, ptr


def traceback(ptr):
    """Walk a pointer table from the bottom-right corner.

    Returns two index arrays of equal length: for each output column the
    consumed position of the first/second side, or -1 where that side
    takes a gap.
    """
    i = ptr.shape[0] - 1
    j = ptr.shape[1] - 1
    first: list[int] = []
    second: list[int] = []
    while i > 0 or j > 0:
        p = ptr[i, j]
        if i > 0 and j > 0 and p == DIAG:
            first.append(i - 1)
            second.append(j - 1)
            i -= 1
            j -= 1
        elif i > 0 and (p == UP or j == 0):
            first.append(i - 1)
            second.append(-1)
            i -= 1
        else:
            first.append(-1)
            second.append(j - 1)
            j -= 1
    first.reverse()
    second.reverse()
    return np.asarray(first, dtype=np.int64), np.asarray(second, dtype=np.int64)


# ---------------------------------------------------------------------------
# Misalignment scoring for one pattern.


def _ms_pattern_loops(starts, n_starts, col_of, codes_grid, pat_len, in_pattern):
    """Sum of pairwise misalignment contributions for one pattern.

    starts:     (N, S) instance start ordinals per trace, -1 padded
    n_starts:   (N,)   instance counts
    col_of:     (N, W) ordinal -> column map
    codes_grid: (N, L) activity codes with -1 gaps
    in_pattern: (K,)   membership mask over the alphabet
    """
    n = n_starts.size
    total = 0.0
    for i in range(n):
        ci = n_starts[i]
        for j in range(i + 1, n):
            cj = n_starts[j]
            k = ci if ci < cj else cj
            for t in range(k):
                si = starts[i, t]
                sj = starts[j, t]
                d = col_of[i, si] - col_of[j, sj]
                if d < 0:
                    d = -d
                delta = 0
                for u in range(pat_len):
                    facing = codes_grid[j, col_of[i, si + u]]
                    if facing < 0 or not in_pattern[facing]:
                        delta = 1
                        break
                if delta == 0:
                    for u in range(pat_len):
                        facing = codes_grid[i, col_of[j, sj + u]]
                        if facing < 0 or not in_pattern[facing]:
                            delta = 1
                            break
                total += d + delta
            unmatched = ci - cj
            if unmatched < 0:
                unmatched = -unmatched
            total += unmatched
    return total


# ---------------------------------------------------------------------------
# Column statistics (vectorized numpy on both backends).


def column_counts(codes_grid: np.ndarray, n_symbols: int) -> np.ndarray:
    """(L, n_symbols+1) per-column symbol counts; column 0 counts gaps."""
    n_rows, length = codes_grid.shape
    if length == 0:
        return np.zeros((0, n_symbols + 1), dtype=np.int64)
    width = n_symbols + 1
    flat = (np.arange(length)[None, :] * width + (codes_grid + 1)).ravel()
    counts = np.bincount(flat, minlength=length * width)
    return counts.reshape(length, width)


def sps_from_counts(counts: np.ndarray, match: float, mismatch: float, gap: float) -> float:
    """Sum-of-pairs score from per-column counts; gap/gap pairs score 0."""
    occupied = counts[:, 1:]
    match_pairs = int((occupied * (occupied - 1) // 2).sum())
    non_gap = occupied.sum(axis=1)
    all_pairs = int((non_gap * (non_gap - 1) // 2).sum())
    gap_pairs = int((counts[:, 0] * non_gap).sum())
    return match * match_pairs + mismatch * (all_pairs - match_pairs) + gap * gap_pairs


def entropy_per_column(counts: np.ndarray) -> np.ndarray:
    """Shannon entropy (bits) of each column's symbol distribution."""
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        freq = counts / totals
        terms = np.where(counts > 0, -freq * np.log2(freq, where=counts > 0), 0.0)
    return terms.sum(axis=1)


# ---------------------------------------------------------------------------
# Backend selection.

if _HAVE_NUMBA:
    _nw_fill_jit = njit(cache=True)(_nw_fill_loops)
    _nw_scores_jit = njit(cache=True)(_nw_scores_loops)
    _profile_fill_jit = njit(cache=True)(_profile_fill_loops)
    _ms_pattern_jit = njit(cache=True)(_ms_pattern_loops)

    nw_fill = _nw_fill_jit
    nw_scores = _nw_scores_jit
    profile_fill = _profile_fill_jit
    ms_pattern = _ms_pattern_jit
else:
    _nw_fill_jit = None
    _nw_scores_jit = None
    _profile_fill_jit = None
    _ms_pattern_jit = None

    nw_fill = _nw_fill_py
    nw_scores = _nw_scores_py
    profile_fill = _profile_fill_py
    ms_pattern = _ms_pattern_loops


def warmup() -> None:
    """Trigger jit compilation on tiny inputs (no-op on the numpy path)."""
    a = np.array([0, 1], dtype=np.int64)
    b = np.array([0, 2], dtype=np.int64)
    nw_fill(a, b, 1.0, -1.0, 0.0)
    padded = np.stack([a, b])
    nw_scores(padded, np.array([2, 2], dtype=np.int64), 1.0, -1.0, 0.0)
    s = np.zeros((2, 2), dtype=np.float64)
    profile_fill(s, np.zeros(2), np.zeros(2))
    ms_pattern(
        np.zeros((2, 1), dtype=np.int64),
        np.zeros(2, dtype=np.int64),
        np.zeros((2, 2), dtype=np.int64),
        padded,
        1,
        np.ones(3, dtype=np.bool_),
    )
