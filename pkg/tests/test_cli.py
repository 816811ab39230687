import json

import pytest

from tracealign import load_bundled_model, strip_gaps
from tracealign.cli import main
from tracealign.formats import read_alignment, read_log, write_model


@pytest.fixture
def model_path(tmp_path):
    path = tmp_path / "model.json"
    write_model(load_bundled_model("diagnostics"), path)
    return path


@pytest.fixture
def log_path(tmp_path, model_path):
    path = tmp_path / "sample.log"
    assert main(["gen-log", str(model_path), "-n", "12", "--seed", "3", "-o", str(path)]) == 0
    return path


@pytest.fixture
def alignment_path(tmp_path, log_path):
    path = tmp_path / "sample.aln"
    assert main(["align", str(log_path), "-o", str(path)]) == 0
    return path


class TestAlign:
    def test_alignment_roundtrips_to_input(self, log_path, alignment_path):
        assert strip_gaps(read_alignment(alignment_path)) == read_log(log_path)

    def test_missing_input_fails_with_diagnostic(self, tmp_path, capsys):
        code = main(["align", str(tmp_path / "absent.log"), "-o", str(tmp_path / "out.aln")])
        captured = capsys.readouterr()
        assert code == 1
        assert captured.err.count("\n") == 1
        assert "absent.log" in captured.err

    def test_reserved_label_in_log_rejected(self, tmp_path, capsys):
        bad = tmp_path / "bad.log"
        bad.write_text("c1\ta,-\nc2\ta\n")
        code = main(["align", str(bad), "-o", str(tmp_path / "out.aln")])
        assert code == 1
        assert "reserved" in capsys.readouterr().err


class TestEvaluate:
    def test_self_reference_report(self, alignment_path, capsys):
        code = main(
            ["evaluate", str(alignment_path), "--reference", str(alignment_path), "-f", "json"]
        )
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert data["accuracy"]["ref_based_sps"] == 1.0
        assert data["accuracy"]["column_score"] == 1.0
        assert data["accuracy"]["n_e"] == 0

    def test_human_and_json_values_agree(self, alignment_path, tmp_path, capsys):
        json_out = tmp_path / "report.json"
        assert main(["evaluate", str(alignment_path), "-f", "json", "-o", str(json_out)]) == 0
        assert main(["evaluate", str(alignment_path)]) == 0
        human = capsys.readouterr().out
        data = json.loads(json_out.read_text())
        assert f"{data['confidence']['ois']:.6f}" in human
        assert f"{data['accuracy']['oms']:.6f}" in human
        assert f"{data['complexity']['value']:.6f}" in human

    def test_threshold_error_is_single_line(self, alignment_path, capsys):
        code = main(["evaluate", str(alignment_path), "--tf-ratio", "1.0"])
        captured = capsys.readouterr()
        assert code == 1
        assert captured.err.startswith("tracealign: error:")
        assert captured.err.count("\n") == 1


class TestPatterns:
    def test_csv_table(self, log_path, capsys):
        assert main(["patterns", str(log_path), "-f", "csv"]) == 0
        out = capsys.readouterr().out
        header, *rows = out.strip().splitlines()
        assert header == "length,bucket_low_pct,bucket_high_pct,patterns"
        assert rows

    def test_human_table(self, log_path, capsys):
        assert main(["patterns", str(log_path)]) == 0
        assert "f_max=" in capsys.readouterr().out


class TestPerturbCommand:
    def test_seed_is_printed_and_output_valid(self, alignment_path, tmp_path, capsys):
        out = tmp_path / "perturbed.aln"
        code = main(["perturb", str(alignment_path), "--moves", "4", "--seed", "9", "-o", str(out)])
        assert code == 0
        assert "seed: 9" in capsys.readouterr().out
        perturbed = read_alignment(out)
        reference = read_alignment(alignment_path)
        assert strip_gaps(perturbed) == strip_gaps(reference)


class TestGenLog:
    def test_generates_requested_traces(self, log_path):
        assert len(read_log(log_path)) == 12

    def test_rejects_bad_model(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"format": "tracealign-model", "version": 1,
                                   "name": "x", "model": {"kind": "wat"}}))
        code = main(["gen-log", str(bad), "-n", "3", "-o", str(tmp_path / "x.log")])
        assert code == 1
        assert "wat" in capsys.readouterr().err


class TestCorrelate:
    def test_emits_table_and_report(self, log_path, tmp_path, capsys):
        csv_path = tmp_path / "samples.csv"
        report_path = tmp_path / "report.json"
        code = main(
            [
                "correlate", str(log_path),
                "--samples", "10", "--max-moves", "8", "--seed", "4", "-k", "2",
                "-o", str(csv_path), "--report", str(report_path),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "seed: 4" in out
        header = csv_path.read_text().splitlines()[0]
        assert header.startswith("sample_id,n_e,ref_free_sps,")
        data = json.loads(report_path.read_text())
        assert set(data["coefficients"]) == {
            "ref_free_sps", "ref_based_sps", "column_score", "ms_top", "oms", "ois", "complexity",
        }

    def test_byte_identical_reruns(self, log_path, tmp_path):
        outputs = []
        for run in range(2):
            csv_path = tmp_path / f"samples_{run}.csv"
            report_path = tmp_path / f"report_{run}.json"
            assert main(
                [
                    "correlate", str(log_path),
                    "--samples", "10", "--max-moves", "8", "--seed", "4", "-k", "2",
                    "-o", str(csv_path), "--report", str(report_path),
                ]
            ) == 0
            outputs.append((csv_path.read_bytes(), report_path.read_bytes()))
        assert outputs[0] == outputs[1]


class TestDeterminismAcrossCommands:
    def test_seeded_commands_are_byte_reproducible(self, model_path, tmp_path):
        files = []
        for run in range(2):
            log_path = tmp_path / f"log_{run}.log"
            aln_path = tmp_path / f"aln_{run}.aln"
            ref_path = tmp_path / f"ref_{run}.aln"
            pert_path = tmp_path / f"pert_{run}.aln"
            assert main(["gen-log", str(model_path), "-n", "10", "--seed", "21", "-o", str(log_path)]) == 0
            assert main(["align", str(log_path), "-o", str(aln_path)]) == 0
            assert main(["consensus", str(log_path), "-k", "3", "--seed", "21", "-o", str(ref_path)]) == 0
            assert main(["perturb", str(aln_path), "--moves", "5", "--seed", "21", "-o", str(pert_path)]) == 0
            files.append(
                tuple(p.read_bytes() for p in (log_path, aln_path, ref_path, pert_path))
            )
        assert files[0] == files[1]
