"""Multi-trace alignment and alignment-quality evaluation for event logs."""

from ._kernels import BACKEND, using_numba
from .aligner import (
    DEFAULT_SCHEME,
    GuideTree,
    Profile,
    ScoringScheme,
    align_profiles,
    build_guide_tree,
    consensus_reference,
    distance_matrix,
    pairwise_align,
    progressive_align,
)
from .core import (
    GAP,
    Activity,
    Alignment,
    Cell,
    DegenerateReferenceError,
    EventLog,
    InvalidAlignmentError,
    ModelSpecError,
    OccurrenceId,
    SourceMismatchError,
    SymbolCount,
    ThresholdTooHighError,
    Trace,
    TraceAlignError,
    UndefinedCorrelationError,
    Violation,
    column_histogram,
    strip_gaps,
    validate_alignment,
)
from .experiments import (
    ActivityBlock,
    ChoiceBlock,
    CorrelationReport,
    LoopBlock,
    ParallelBlock,
    PerturbedAlignment,
    ProcessModelSpec,
    SequenceBlock,
    bundled_model_names,
    correlation_experiment,
    generate_log,
    load_bundled_model,
    pearson,
    perturb,
    tf_ratio_sweep,
)
from .metrics import (
    ComplexityResult,
    ConsensusEntry,
    MetricReport,
    Pattern,
    PatternCensus,
    alignment_complexity,
    column_score,
    consensus_sequence,
    count_heuristic_errors,
    evaluate_alignment,
    extract_patterns,
    information_score,
    misalignment_score,
    most_frequent_pattern,
    overall_information_score,
    overall_misalignment_score,
    ref_based_sps,
    ref_free_sps,
)

__version__ = "0.1.0"
