import numpy as np
import pytest

from conftest import random_log
from tracealign import (
    ActivityBlock,
    Alignment,
    ChoiceBlock,
    EventLog,
    LoopBlock,
    ModelSpecError,
    ParallelBlock,
    ProcessModelSpec,
    SequenceBlock,
    Trace,
    UndefinedCorrelationError,
    bundled_model_names,
    correlation_experiment,
    count_heuristic_errors,
    generate_log,
    load_bundled_model,
    pearson,
    perturb,
    progressive_align,
    strip_gaps,
    tf_ratio_sweep,
    validate_alignment,
)


def spearman(xs, ys):
    def ranks(values):
        order = np.argsort(values, kind="stable")
        out = np.empty(len(values), dtype=np.float64)
        i = 0
        values = np.asarray(values, dtype=np.float64)
        sorted_values = values[order]
        while i < len(values):
            j = i
            while j + 1 < len(values) and sorted_values[j + 1] == sorted_values[i]:
                j += 1
            out[order[i : j + 1]] = (i + j) / 2 + 1
            i = j + 1
        return out

    return pearson(ranks(xs), ranks(ys))


def lower_bound_alignment() -> Alignment:
    log = EventLog([Trace("t0", list("abcd")), Trace("t1", list("efg")), Trace("t2", list("hi"))])
    return Alignment.from_label_rows(
        log, [list("abcd"), ["e", "f", "g", "-"], ["h", "i", "-", "-"]]
    )


class TestPerturb:
    def test_zero_moves_is_identity(self):
        ref = lower_bound_alignment()
        for seed in range(5):
            assert perturb(ref, 0, seed).alignment == ref

    def test_one_move_relocates_one_occurrence(self):
        ref = lower_bound_alignment()
        result = perturb(ref, 1, seed=4).alignment
        changed = 0
        for i in range(ref.n_rows):
            for ordinal in range(len(ref.source.traces[i])):
                if ref.column_of[i, ordinal] != result.column_of[i, ordinal]:
                    changed += 1
        assert changed == 1
        assert strip_gaps(result) == strip_gaps(ref)

    def test_results_stay_valid_and_roundtrip(self):
        rng = np.random.default_rng(40)
        for _ in range(20):
            log = random_log(rng, n_traces=int(rng.integers(2, 6)))
            ref = progressive_align(log)
            moves = int(rng.integers(0, 12))
            result = perturb(ref, moves, int(rng.integers(1 << 30)))
            assert result.injected_moves == moves
            assert validate_alignment(result.alignment) == []
            assert strip_gaps(result.alignment) == log

    def test_deterministic_per_seed(self):
        ref = lower_bound_alignment()
        assert perturb(ref, 7, 123).alignment == perturb(ref, 7, 123).alignment

    def test_error_count_grows_with_moves(self):
        rng = np.random.default_rng(41)
        log = random_log(rng, n_traces=6, min_len=4, max_len=9)
        ref = progressive_align(log)
        moves = list(range(0, 30))
        errors = [
            count_heuristic_errors(perturb(ref, m, seed=1000 + m).alignment, ref) for m in moves
        ]
        assert spearman(moves, errors) > 0.8

    def test_rejects_negative_moves(self):
        with pytest.raises(ValueError):
            perturb(lower_bound_alignment(), -1)


def seq(*parts):
    return SequenceBlock(tuple(parts))


class TestGenerateLog:
    def test_sequence_is_deterministic_shape(self):
        spec = ProcessModelSpec("s", seq(ActivityBlock("a"), ActivityBlock("b"), ActivityBlock("c")))
        log = generate_log(spec, 10, seed=5)
        for trace in log.traces:
            assert trace.labels == ("a", "b", "c")

    def test_choice_frequencies_within_binomial_bounds(self):
        spec = ProcessModelSpec(
            "c", ChoiceBlock((ActivityBlock("a"), ActivityBlock("b")), (0.5, 0.5))
        )
        log = generate_log(spec, 1000, seed=6)
        n_a = sum(1 for t in log.traces if t.labels == ("a",))
        assert 440 <= n_a <= 560  # 3 sigma around 500

    def test_parallel_preserves_child_order(self):
        spec = ProcessModelSpec(
            "p", ParallelBlock((seq(ActivityBlock("a"), ActivityBlock("b")), ActivityBlock("c")))
        )
        log = generate_log(spec, 300, seed=7)
        seen_positions = set()
        for trace in log.traces:
            labels = list(trace.labels)
            assert sorted(labels) == ["a", "b", "c"]
            assert labels.index("a") < labels.index("b")
            seen_positions.add(labels.index("c"))
        assert seen_positions == {0, 1, 2}

    def test_loop_emits_at_least_once(self):
        spec = ProcessModelSpec("l", LoopBlock(ActivityBlock("a"), 0.6))
        log = generate_log(spec, 200, seed=8)
        lengths = [len(t) for t in log.traces]
        assert min(lengths) >= 1
        assert max(lengths) > 1

    def test_deterministic_per_seed(self):
        spec = load_bundled_model("triage")
        assert generate_log(spec, 20, seed=9) == generate_log(spec, 20, seed=9)
        assert generate_log(spec, 20, seed=9) != generate_log(spec, 20, seed=10)

    def test_case_ids_are_unique(self):
        spec = ProcessModelSpec("s", ActivityBlock("a"))
        log = generate_log(spec, 12, seed=1)
        assert len({t.case_id for t in log.traces}) == 12

    def test_rejects_zero_traces(self):
        spec = ProcessModelSpec("s", ActivityBlock("a"))
        with pytest.raises(ValueError):
            generate_log(spec, 0)


class TestModelSpec:
    def test_roundtrip_through_dict(self):
        spec = load_bundled_model("claims")
        assert ProcessModelSpec.from_dict(spec.to_dict()) == spec

    def test_choice_probabilities_must_sum_to_one(self):
        with pytest.raises(ModelSpecError, match="sum"):
            ProcessModelSpec(
                "bad", ChoiceBlock((ActivityBlock("a"), ActivityBlock("b")), (0.5, 0.4))
            )

    def test_loop_probability_below_one(self):
        with pytest.raises(ModelSpecError):
            ProcessModelSpec("bad", LoopBlock(ActivityBlock("a"), 1.0))

    def test_unknown_version_rejected(self):
        spec = load_bundled_model("triage")
        data = spec.to_dict()
        data["version"] = 2
        with pytest.raises(ModelSpecError, match="version"):
            ProcessModelSpec.from_dict(data)


class TestBundledModels:
    def test_five_models_at_desk_scale(self):
        names = bundled_model_names()
        assert len(names) == 5
        for name in names:
            log = generate_log(load_bundled_model(name), 25, seed=2)
            assert 6 <= len(log.alphabet) <= 15

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            load_bundled_model("nope")


class TestPearson:
    def test_perfect_positive(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        assert pearson(xs, [2 * x + 1 for x in xs]) == pytest.approx(1.0)

    def test_perfect_negative(self):
        xs = [1.0, 2.0, 3.0]
        assert pearson(xs, [-x for x in xs]) == pytest.approx(-1.0)

    def test_hand_computed_half(self):
        assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)

    def test_zero_variance_rejected(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_short_input_rejected(self):
        with pytest.raises(ValueError):
            pearson([1, 2], [1, 2])


@pytest.fixture(scope="module")
def small_log():
    return generate_log(load_bundled_model("diagnostics"), 15, seed=3)


class TestCorrelationExperiment:
    def test_deterministic(self, small_log):
        a = correlation_experiment(small_log, samples=10, max_moves=12, seed=11, k=2)
        b = correlation_experiment(small_log, samples=10, max_moves=12, seed=11, k=2)
        assert a.coefficients == b.coefficients
        assert [(p.n_e, p.metrics) for p in a.samples] == [(p.n_e, p.metrics) for p in b.samples]

    def test_zero_max_moves_reports_undefined(self, small_log):
        report = correlation_experiment(small_log, samples=10, max_moves=0, seed=11, k=2)
        assert all(value is None for value in report.coefficients.values())
        assert all("zero variance" in note for note in report.notes.values())

    def test_expected_signs(self, small_log):
        report = correlation_experiment(small_log, samples=14, max_moves=25, seed=11, k=2)
        assert report.coefficients["oms"] > 0
        assert report.coefficients["ref_based_sps"] < 0
        assert report.coefficients["ref_free_sps"] < 0

    def test_sample_table_shape(self, small_log):
        report = correlation_experiment(small_log, samples=10, max_moves=10, seed=11, k=2)
        assert len(report.samples) == 10
        assert report.samples[0].moves == 0
        assert report.samples[0].n_e == 0
        assert report.samples[0].metrics["ref_based_sps"] == 1.0

    def test_requires_ten_samples(self, small_log):
        with pytest.raises(ValueError):
            correlation_experiment(small_log, samples=5)


class TestTfRatioSweep:
    def test_sweep_is_deterministic_and_defined_below_one(self):
        log = generate_log(load_bundled_model("onboarding"), 12, seed=4)
        ratios = (0.2, 0.4, 1.0)
        a = tf_ratio_sweep(log, ratios, samples=10, max_moves=15, seed=12, k=2)
        b = tf_ratio_sweep(log, ratios, samples=10, max_moves=15, seed=12, k=2)
        assert a == b
        assert a[0.2] is not None
        assert a[0.4] is not None
        # Strict eligibility makes the threshold at f_max unreachable.
        assert a[1.0] is None

    def test_matches_correlation_experiment_at_same_ratio(self):
        log = generate_log(load_bundled_model("checkout"), 12, seed=5)
        sweep = tf_ratio_sweep(log, (0.4,), samples=10, max_moves=15, seed=13, k=2)
        report = correlation_experiment(
            log, samples=10, max_moves=15, tf_ratio=0.4, seed=13, k=2
        )
        assert sweep[0.4] == pytest.approx(report.coefficients["oms"])
