#!/usr/bin/env python3
"""Benchmark the jitted alignment kernels against the pure-numpy fallback.

Usage:
    python3 benchmarks/bench_kernels.py [--traces N] [--length L] [--repeats R]

Times the three hot paths (pairwise DP table, all-pairs score matrix,
per-pattern misalignment scoring) on a random log, once per backend.
The first jit call is excluded via a warmup run.  Also times the two
numpy-vectorized stages (pattern census, full metric pass) for context;
those are backend-independent.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tracealign import EventLog, Trace, _kernels, extract_patterns, progressive_align
from tracealign.metrics import misalignment_score, most_frequent_pattern


def bench(func, *args, repeats: int = 5) -> float:
    func(*args)  # warmup (jit compilation on the numba path)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        func(*args)
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def random_log(n_traces: int, length: int, n_types: int = 14, seed: int = 0) -> EventLog:
    rng = np.random.default_rng(seed)
    alphabet = [f"act{i:02d}" for i in range(n_types)]
    return EventLog(
        [
            Trace(f"t{i}", [alphabet[int(c)] for c in rng.integers(0, n_types, size=length)])
            for i in range(n_traces)
        ]
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--traces", type=int, default=50)
    parser.add_argument("--length", type=int, default=100)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    log = random_log(args.traces, args.length)
    a, b = log.trace_codes[0], log.trace_codes[1]
    print(f"log: {args.traces} traces x {args.length} activities, backend={_kernels.BACKEND}")

    pairs = []
    if _kernels.using_numba():
        pairs.append(("nw_fill", _kernels._nw_fill_jit, _kernels._nw_fill_py, (a, b, 1.0, -1.0, 0.0)))
        pairs.append(
            (
                "nw_scores (all pairs)",
                _kernels._nw_scores_jit,
                _kernels._nw_scores_py,
                (log.padded_codes, log.lengths, 1.0, -1.0, 0.0),
            )
        )
    else:
        print("numba disabled or unavailable; timing the numpy path only")
        pairs.append(("nw_fill", None, _kernels._nw_fill_py, (a, b, 1.0, -1.0, 0.0)))
        pairs.append(
            (
                "nw_scores (all pairs)",
                None,
                _kernels._nw_scores_py,
                (log.padded_codes, log.lengths, 1.0, -1.0, 0.0),
            )
        )

    print(f"\n{'kernel':<24} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, jit_fn, py_fn, call_args in pairs:
        t_py = bench(py_fn, *call_args, repeats=args.repeats)
        if jit_fn is None:
            print(f"{name:<24} {t_py * 1e3:>10.2f}ms {'-':>12} {'-':>9}")
        else:
            t_jit = bench(jit_fn, *call_args, repeats=args.repeats)
            print(
                f"{name:<24} {t_py * 1e3:>10.2f}ms {t_jit * 1e3:>10.2f}ms"
                f" {t_py / t_jit:>8.1f}x"
            )

    # End-to-end stages under the active backend.
    t_align = bench(progressive_align, log, repeats=max(1, args.repeats // 2))
    census = extract_patterns(log)
    t_census = bench(extract_patterns, log, repeats=max(1, args.repeats // 2))
    alignment = progressive_align(log)
    top = most_frequent_pattern(census)
    t_ms = bench(misalignment_score, alignment, top, repeats=args.repeats)
    print(f"\n{'stage (active backend)':<24} {'median':>12}")
    print(f"{'progressive_align':<24} {t_align * 1e3:>10.1f}ms")
    print(f"{'extract_patterns':<24} {t_census * 1e3:>10.1f}ms")
    print(f"{'misalignment_score':<24} {t_ms * 1e3:>10.2f}ms")


if __name__ == "__main__":
    main()
