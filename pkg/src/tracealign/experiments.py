"""Validation harness: controlled error injection and correlation studies.

The methodology: fix a reference alignment, inject known numbers of
single-occurrence relocations to get alignments of graded quality,
label each with its heuristic-error count against the reference, and
correlate every metric with that count.  Synthetic logs come from
block-structured generative process models, five of which ship with the
package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence, Union

import numpy as np

from .aligner import DEFAULT_SCHEME, ScoringScheme, consensus_reference
from .core import (
    Alignment,
    DegenerateReferenceError,
    EventLog,
    ModelSpecError,
    ThresholdTooHighError,
    Trace,
    UndefinedCorrelationError,
)
from .metrics import (
    METRIC_ORDER,
    Pattern,
    PatternCensus,
    alignment_complexity,
    column_score,
    count_heuristic_errors,
    extract_patterns,
    misalignment_score,
    most_frequent_pattern,
    overall_information_score,
    overall_misalignment_score,
    ref_based_sps,
    ref_free_sps,
)

__all__ = [
    "PerturbedAlignment",
    "ActivityBlock",
    "SequenceBlock",
    "ChoiceBlock",
    "ParallelBlock",
    "LoopBlock",
    "ProcessModelSpec",
    "CorrelationReport",
    "perturb",
    "generate_log",
    "pearson",
    "correlation_experiment",
    "tf_ratio_sweep",
    "bundled_model_names",
    "load_bundled_model",
]


# ---------------------------------------------------------------------------
# Error injection.


@dataclass(frozen=True)
class PerturbedAlignment:
    alignment: Alignment
    injected_moves: int
    seed: int


def _compact(grid: np.ndarray) -> np.ndarray:
    keep = (grid >= 0).any(axis=0)
    return grid[:, keep]


def perturb(reference: Alignment, moves: int, seed: int = 0) -> PerturbedAlignment:
    """Apply exactly ``moves`` random legal single-occurrence relocations.

    Each move picks an occupied cell uniformly and slides it into a gap
    cell of the adjacent gap run on either side (so it never crosses
    another occurrence of its row).  When both neighbors are occupied or
    the row edge blocks the way, a fresh gap column is inserted next to
    the cell and the occurrence moves into it.  All-gap columns are
    compacted afterwards; the underlying traces are untouched.
    """
    if moves < 0:
        raise ValueError(f"moves must be >= 0, got {moves}")
    grid = np.array(reference.grid)
    if moves == 0:
        return PerturbedAlignment(Alignment(reference.source, grid), 0, seed)
    rng = np.random.default_rng(seed)
    for _ in range(moves):
        rows, cols = np.nonzero(grid >= 0)
        pick = int(rng.integers(rows.size))
        i, j = int(rows[pick]), int(cols[pick])
        length = grid.shape[1]

        targets: list[int] = []
        col = j - 1
        while col >= 0 and grid[i, col] < 0:
            targets.append(col)
            col -= 1
        col = j + 1
        while col < length and grid[i, col] < 0:
            targets.append(col)
            col += 1

        if targets:
            target = int(targets[int(rng.integers(len(targets)))])
            grid[i, target] = grid[i, j]
            grid[i, j] = -1
        else:
            insert_at = j if rng.integers(2) == 0 else j + 1
            column = np.full((grid.shape[0], 1), -1, dtype=np.int64)
            grid = np.concatenate([grid[:, :insert_at], column, grid[:, insert_at:]], axis=1)
            source = insert_at + 1 if insert_at == j else j
            grid[i, insert_at] = grid[i, source]
            grid[i, source] = -1
    return PerturbedAlignment(Alignment(reference.source, _compact(grid)), moves, seed)


# ---------------------------------------------------------------------------
# Block-structured generative process models.


@dataclass(frozen=True)
class ActivityBlock:
    label: str


@dataclass(frozen=True)
class SequenceBlock:
    children: tuple["Block", ...]


@dataclass(frozen=True)
class ChoiceBlock:
    children: tuple["Block", ...]
    probabilities: tuple[float, ...]


@dataclass(frozen=True)
class ParallelBlock:
    children: tuple["Block", ...]


@dataclass(frozen=True)
class LoopBlock:
    child: "Block"
    continue_probability: float


Block = Union[ActivityBlock, SequenceBlock, ChoiceBlock, ParallelBlock, LoopBlock]


def _validate_block(block: Block) -> None:
    if isinstance(block, ActivityBlock):
        if not block.label:
            raise ModelSpecError("activity block needs a label")
    elif isinstance(block, SequenceBlock) or isinstance(block, ParallelBlock):
        if not block.children:
            raise ModelSpecError(f"{type(block).__name__} needs children")
        for child in block.children:
            _validate_block(child)
    elif isinstance(block, ChoiceBlock):
        if len(block.children) != len(block.probabilities):
            raise ModelSpecError("choice children and probabilities differ in count")
        if not block.children:
            raise ModelSpecError("choice block needs children")
        if any(p < 0 for p in block.probabilities):
            raise ModelSpecError("choice probabilities must be non-negative")
        if abs(sum(block.probabilities) - 1.0) > 1e-9:
            raise ModelSpecError(f"choice probabilities sum to {sum(block.probabilities)!r}, not 1")
        for child in block.children:
            _validate_block(child)
    elif isinstance(block, LoopBlock):
        if not 0.0 <= block.continue_probability < 1.0:
            raise ModelSpecError(
                f"loop continue probability must be in [0, 1), got {block.continue_probability}"
            )
        _validate_block(block.child)
    else:
        raise ModelSpecError(f"unknown block {block!r}")


@dataclass(frozen=True)
class ProcessModelSpec:
    """Recursive block tree describing a family of traces."""

    name: str
    root: Block

    def __post_init__(self) -> None:
        _validate_block(self.root)

    def to_dict(self) -> dict:
        return {"format": "tracealign-model", "version": 1, "name": self.name,
                "model": _block_to_dict(self.root)}

    @classmethod
    def from_dict(cls, data: dict) -> "ProcessModelSpec":
        if data.get("format") != "tracealign-model":
            raise ModelSpecError("not a tracealign model document")
        if data.get("version") != 1:
            raise ModelSpecError(f"unsupported model version {data.get('version')!r}")
        return cls(str(data.get("name", "model")), _block_from_dict(data["model"]))


def _block_to_dict(block: Block) -> dict:
    if isinstance(block, ActivityBlock):
        return {"kind": "activity", "label": block.label}
    if isinstance(block, SequenceBlock):
        return {"kind": "sequence", "children": [_block_to_dict(c) for c in block.children]}
    if isinstance(block, ChoiceBlock):
        return {
            "kind": "choice",
            "children": [_block_to_dict(c) for c in block.children],
            "probabilities": list(block.probabilities),
        }
    if isinstance(block, ParallelBlock):
        return {"kind": "parallel", "children": [_block_to_dict(c) for c in block.children]}
    if isinstance(block, LoopBlock):
        return {
            "kind": "loop",
            "child": _block_to_dict(block.child),
            "continue_probability": block.continue_probability,
        }
    raise ModelSpecError(f"unknown block {block!r}")


def _block_from_dict(data: dict) -> Block:
    try:
        kind = data["kind"]
    except (TypeError, KeyError):
        raise ModelSpecError(f"block without a kind: {data!r}") from None
    if kind == "activity":
        return ActivityBlock(str(data["label"]))
    if kind == "sequence":
        return SequenceBlock(tuple(_block_from_dict(c) for c in data["children"]))
    if kind == "choice":
        return ChoiceBlock(
            tuple(_block_from_dict(c) for c in data["children"]),
            tuple(float(p) for p in data["probabilities"]),
        )
    if kind == "parallel":
        return ParallelBlock(tuple(_block_from_dict(c) for c in data["children"]))
    if kind == "loop":
        return LoopBlock(_block_from_dict(data["child"]), float(data["continue_probability"]))
    raise ModelSpecError(f"unknown block kind {kind!r}")


def _sample_block(block: Block, rng: np.random.Generator) -> list[str]:
    if isinstance(block, ActivityBlock):
        return [block.label]
    if isinstance(block, SequenceBlock):
        out: list[str] = []
        for child in block.children:
            out.extend(_sample_block(child, rng))
        return out
    if isinstance(block, ChoiceBlock):
        idx = int(rng.choice(len(block.children), p=np.asarray(block.probabilities)))
        return _sample_block(block.children[idx], rng)
    if isinstance(block, ParallelBlock):
        parts = [_sample_block(child, rng) for child in block.children]
        return _interleave(parts, rng)
    if isinstance(block, LoopBlock):
        out = _sample_block(block.child, rng)
        while rng.random() < block.continue_probability:
            out.extend(_sample_block(block.child, rng))
        return out
    raise ModelSpecError(f"unknown block {block!r}")


def _interleave(parts: list[list[str]], rng: np.random.Generator) -> list[str]:
    """Uniform random interleaving preserving each part's internal order."""
    remaining = [len(p) for p in parts]
    positions = [0] * len(parts)
    out: list[str] = []
    total = sum(remaining)
    for _ in range(total):
        weights = np.asarray(remaining, dtype=np.float64)
        idx = int(rng.choice(len(parts), p=weights / weights.sum()))
        out.append(parts[idx][positions[idx]])
        positions[idx] += 1
        remaining[idx] -= 1
    return out


def generate_log(spec: ProcessModelSpec, n_traces: int, seed: int = 0) -> EventLog:
    """Sample ``n_traces`` independent traces from a process model."""
    if n_traces < 1:
        raise ValueError(f"n_traces must be >= 1, got {n_traces}")
    rng = np.random.default_rng(seed)
    width = len(str(n_traces - 1))
    traces = []
    for i in range(n_traces):
        activities = _sample_block(spec.root, rng)
        traces.append(Trace(f"case_{i:0{width}d}", activities))
    return EventLog(traces)


# ---------------------------------------------------------------------------
# Bundled models (desk-scale stand-ins for realistic process families).

_BUNDLED = ("triage", "claims", "checkout", "onboarding", "diagnostics")


def bundled_model_names() -> tuple[str, ...]:
    return _BUNDLED


def load_bundled_model(name: str) -> ProcessModelSpec:
    if name not in _BUNDLED:
        raise KeyError(f"unknown bundled model {name!r}; have {_BUNDLED}")
    text = resources.files("tracealign.data").joinpath(f"{name}.json").read_text()
    return ProcessModelSpec.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Correlation study.


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 3:
        raise ValueError(f"need at least 3 points, got {x.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("correlation undefined: zero variance")
    return float(np.clip((dx * dy).sum() / (sx * sy), -1.0, 1.0))


@dataclass
class SamplePoint:
    sample_id: int
    moves: int
    n_e: int
    metrics: dict[str, float | None]


@dataclass
class CorrelationReport:
    """Per-metric correlation with the heuristic-error count."""

    coefficients: dict[str, float | None]
    notes: dict[str, str]
    samples: list[SamplePoint]
    parameters: dict[str, object] = field(default_factory=dict)


def _stratified_moves(samples: int, max_moves: int) -> list[int]:
    return [int(round(v)) for v in np.linspace(0.0, max_moves, samples)]


def _sample_metrics(
    alignment: Alignment,
    reference: Alignment,
    census: PatternCensus,
    scheme: ScoringScheme,
    tf_ratio: float,
) -> dict[str, float | None]:
    values: dict[str, float | None] = {
        "ref_free_sps": ref_free_sps(alignment, scheme),
        "ms_top": misalignment_score(alignment, most_frequent_pattern(census)),
        "ois": overall_information_score(alignment),
        "complexity": alignment_complexity(alignment).value,
    }
    try:
        values["ref_based_sps"] = ref_based_sps(alignment, reference)
    except DegenerateReferenceError:
        values["ref_based_sps"] = None
    values["column_score"] = column_score(alignment, reference)
    try:
        values["oms"] = overall_misalignment_score(alignment, census, tf_ratio)
    except ThresholdTooHighError:
        values["oms"] = None
    return values


def correlation_experiment(
    log: EventLog,
    scheme: ScoringScheme = DEFAULT_SCHEME,
    samples: int = 30,
    max_moves: int = 30,
    tf_ratio: float = 0.40,
    seed: int = 0,
    k: int = 8,
) -> CorrelationReport:
    """Correlate each metric against injected heuristic-error counts.

    A consensus reference is built first; ``samples`` perturbations with
    move counts spread evenly over [0, max_moves] are generated from
    per-sample seeds, labeled with their heuristic-error count, and
    every metric's Pearson coefficient against that count is reported.
    A metric whose correlation is undefined is reported with a note
    instead of aborting the others.
    """
    if samples < 10:
        raise ValueError(f"need at least 10 samples, got {samples}")
    reference = consensus_reference(log, scheme, k=k, seed=seed)
    census = extract_patterns(log)
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(samples)]

    points: list[SamplePoint] = []
    for idx, moves in enumerate(_stratified_moves(samples, max_moves)):
        perturbed = perturb(reference, moves, seeds[idx])
        n_e = count_heuristic_errors(perturbed.alignment, reference)
        metrics = _sample_metrics(perturbed.alignment, reference, census, scheme, tf_ratio)
        points.append(SamplePoint(idx, moves, n_e, metrics))

    coefficients: dict[str, float | None] = {}
    notes: dict[str, str] = {}
    n_e_values = [p.n_e for p in points]
    for name in METRIC_ORDER:
        series = [p.metrics[name] for p in points]
        if any(v is None for v in series):
            coefficients[name] = None
            notes[name] = "metric undefined on some samples"
            continue
        try:
            coefficients[name] = pearson(n_e_values, series)
        except UndefinedCorrelationError as exc:
            coefficients[name] = None
            notes[name] = str(exc)
    return CorrelationReport(
        coefficients=coefficients,
        notes=notes,
        samples=points,
        parameters={
            "samples": samples,
            "max_moves": max_moves,
            "tf_ratio": tf_ratio,
            "seed": seed,
            "k": k,
            "scheme": {"match": scheme.match, "mismatch": scheme.mismatch, "gap": scheme.gap},
        },
    )


def tf_ratio_sweep(
    log: EventLog,
    ratios: Sequence[float],
    scheme: ScoringScheme = DEFAULT_SCHEME,
    samples: int = 30,
    max_moves: int = 30,
    seed: int = 0,
    k: int = 8,
) -> dict[float, float | None]:
    """Correlation of the overall misalignment score at several thresholds.

    The perturbed samples are generated once and shared across ratios;
    per-pattern misalignment scores are cached per sample, so only the
    eligibility cut and the weighting change between ratios.  A ratio
    whose eligible set is empty maps to ``None``.
    """
    reference = consensus_reference(log, scheme, k=k, seed=seed)
    census = extract_patterns(log)
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(samples)]
    lowest = min(ratios)
    widest = census.eligible(lowest * census.f_max)

    n_e_values: list[int] = []
    ms_cache: list[dict[Pattern, float]] = []
    for idx, moves in enumerate(_stratified_moves(samples, max_moves)):
        perturbed = perturb(reference, moves, seeds[idx])
        n_e_values.append(count_heuristic_errors(perturbed.alignment, reference))
        ms_cache.append(
            {p: misalignment_score(perturbed.alignment, p) for p, _ in widest}
        )

    out: dict[float, float | None] = {}
    for ratio in ratios:
        threshold = ratio * census.f_max
        chosen = [(p, f) for p, f in widest if f > threshold]
        if not chosen:
            out[ratio] = None
            continue
        series = [
            sum(cache[p] * (f / census.f_max) for p, f in chosen) / len(chosen)
            for cache in ms_cache
        ]
        try:
            out[ratio] = pearson(n_e_values, series)
        except UndefinedCorrelationError:
            out[ratio] = None
    return out
