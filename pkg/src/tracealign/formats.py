"""Versioned file formats for logs, alignments, models, and reports.

Log files carry one trace per line: ``case_id<TAB>label,label,...``.
Alignment files carry one row per trace: ``case_id<TAB>cell<TAB>...``
with ``-`` as the gap cell and a ``#L=<columns>`` header.  Both start
with a version line (``#tracealign-log v1`` / ``#tracealign-alignment
v1``); parsers accept missing version lines as v1 but reject any other
version explicitly.  Model specs and metric reports are JSON documents
with explicit version fields.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO

from .core import GAP, Alignment, EventLog, Trace, TraceAlignError, validate_alignment
from .experiments import CorrelationReport, ProcessModelSpec
from .metrics import METRIC_ORDER, MetricReport

LOG_MAGIC = "#tracealign-log"
ALIGNMENT_MAGIC = "#tracealign-alignment"
FORMAT_VERSION = "v1"
REPORT_SCHEMA_VERSION = 1


class FileFormatError(TraceAlignError):
    """Malformed input file; carries path, line, and column."""

    def __init__(self, path: object, line: int, column: int, message: str) -> None:
        self.path = str(path)
        self.line = line
        self.column = column
        super().__init__(f"{path}:{line}:{column}: {message}")


def _check_version(path: object, line_no: int, line: str, magic: str) -> None:
    token = line.split()
    if len(token) != 2 or token[1] != FORMAT_VERSION:
        raise FileFormatError(
            path, line_no, 1, f"unsupported {magic[1:]} version {line[len(magic):].strip()!r}"
        )


# ---------------------------------------------------------------------------
# Event logs.


def write_log(log: EventLog, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{LOG_MAGIC} {FORMAT_VERSION}\n")
        for trace in log.traces:
            for label in trace.activities:
                if "," in label:
                    raise ValueError(
                        f"label {label!r} contains a comma and cannot be serialized"
                    )
            fh.write(f"{trace.case_id}\t{','.join(trace.activities)}\n")


def read_log(path: str | Path) -> EventLog:
    traces: list[Trace] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if line.startswith(LOG_MAGIC):
                _check_version(path, line_no, line, LOG_MAGIC)
                continue
            if line.startswith(ALIGNMENT_MAGIC):
                raise FileFormatError(path, line_no, 1, "this is an alignment file, not a log")
            if not line or line.startswith("#"):
                continue
            if "\t" not in line:
                raise FileFormatError(
                    path, line_no, 1, "expected 'case_id<TAB>activity,activity,...'"
                )
            case_id, _, rest = line.partition("\t")
            if case_id in seen:
                raise FileFormatError(path, line_no, 1, f"duplicate case id {case_id!r}")
            seen.add(case_id)
            labels = rest.split(",")
            column = len(case_id) + 2
            activities = []
            for label in labels:
                if not label:
                    raise FileFormatError(path, line_no, column, "empty activity label")
                if label == GAP:
                    raise FileFormatError(
                        path, line_no, column, f"label {GAP!r} is reserved for gaps"
                    )
                activities.append(label)
                column += len(label) + 1
            try:
                traces.append(Trace(case_id, activities))
            except ValueError as exc:
                raise FileFormatError(path, line_no, 1, str(exc)) from None
    if not traces:
        raise FileFormatError(path, 1, 1, "log file contains no traces")
    return EventLog(traces)


# ---------------------------------------------------------------------------
# Alignments.


def write_alignment(alignment: Alignment, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{ALIGNMENT_MAGIC} {FORMAT_VERSION}\n")
        fh.write(f"#L={alignment.length}\n")
        for i, trace in enumerate(alignment.source.traces):
            cells = [alignment.label_at(i, j) for j in range(alignment.length)]
            fh.write(trace.case_id + "\t" + "\t".join(cells) + "\n")


def read_alignment(path: str | Path) -> Alignment:
    """Parse an alignment file; the source log is recovered from the rows."""
    length: int | None = None
    case_ids: list[str] = []
    rows: list[list[str]] = []
    row_lines: list[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if line.startswith(ALIGNMENT_MAGIC):
                _check_version(path, line_no, line, ALIGNMENT_MAGIC)
                continue
            if line.startswith("#L="):
                try:
                    length = int(line[3:])
                except ValueError:
                    raise FileFormatError(path, line_no, 4, f"bad column count {line[3:]!r}")
                continue
            if not line or line.startswith("#"):
                continue
            if length is None:
                raise FileFormatError(path, line_no, 1, "missing #L= header before rows")
            parts = line.split("\t")
            if len(parts) != length + 1:
                raise FileFormatError(
                    path, line_no, 1, f"expected {length} cells, found {len(parts) - 1}"
                )
            case_ids.append(parts[0])
            rows.append(parts[1:])
            row_lines.append(line_no)
    if not rows:
        raise FileFormatError(path, 1, 1, "alignment file contains no rows")

    traces = []
    for case_id, row, line_no in zip(case_ids, rows, row_lines):
        labels = [cell for cell in row if cell != GAP]
        try:
            traces.append(Trace(case_id, labels))
        except ValueError as exc:
            raise FileFormatError(path, line_no, 1, str(exc)) from None
    try:
        log = EventLog(traces)
        alignment = Alignment.from_label_rows(log, rows)
    except ValueError as exc:
        raise FileFormatError(path, 1, 1, str(exc)) from None
    violations = validate_alignment(alignment)
    if violations:
        raise FileFormatError(path, 1, 1, f"invalid alignment: {violations[0].message}")
    return alignment


# ---------------------------------------------------------------------------
# Model specs.


def write_model(spec: ProcessModelSpec, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_model(path: str | Path) -> ProcessModelSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(path, exc.lineno, exc.colno, exc.msg) from None
    return ProcessModelSpec.from_dict(data)


# ---------------------------------------------------------------------------
# Metric reports.


def _format_value(value: float | int | None) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, int):
        return str(value)
    return f"{value:.6f}"


def report_to_dict(report: MetricReport) -> dict:
    return {
        "format": "tracealign-report",
        "schema_version": REPORT_SCHEMA_VERSION,
        "accuracy": {
            "ref_based_sps": report.ref_based_sps,
            "ref_free_sps": report.ref_free_sps,
            "column_score": report.column_score,
            "ms_top": report.ms_top,
            "top_pattern": list(report.top_pattern),
            "oms": report.oms,
            "n_e": report.n_e,
        },
        "confidence": {"ois": report.ois},
        "complexity": {
            "value": report.complexity.value,
            "lower_bound": report.complexity.lower_bound,
            "upper_bound": report.complexity.upper_bound,
        },
        "consensus": [
            {"column": e.column, "label": e.label, "tied": e.tied} for e in report.consensus
        ],
        "parameters": {
            "tf_ratio": report.tf_ratio,
            "majority": report.majority,
            "match": report.scheme.match,
            "mismatch": report.scheme.mismatch,
            "gap": report.scheme.gap,
        },
    }


def render_report_human(report: MetricReport) -> str:
    """Plain-text report ordered accuracy, then confidence, then complexity."""
    lines = ["alignment evaluation", "", "accuracy"]
    if report.ref_based_sps is not None:
        lines.append(f"  ref_based_sps   {_format_value(report.ref_based_sps)}")
    lines.append(f"  ref_free_sps    {_format_value(report.ref_free_sps)}")
    if report.column_score is not None:
        lines.append(f"  column_score    {_format_value(report.column_score)}")
    lines.append(f"  ms_top          {_format_value(report.ms_top)}   pattern {report.top_pattern!r}")
    lines.append(f"  oms             {_format_value(report.oms)}")
    if report.n_e is not None:
        lines.append(f"  n_e             {report.n_e}")
    lines.append("confidence")
    lines.append(f"  ois             {_format_value(report.ois)}")
    lines.append("complexity")
    lines.append(
        f"  value           {_format_value(report.complexity.value)}"
        f"   bounds [{_format_value(report.complexity.lower_bound)},"
        f" {_format_value(report.complexity.upper_bound)}]"
    )
    consensus = " ".join(e.label + ("*" if e.tied else "") for e in report.consensus)
    lines.append(f"consensus        {consensus or '(empty)'}")
    return "\n".join(lines) + "\n"


def write_report(report: MetricReport, stream: IO[str], fmt: str = "human") -> None:
    if fmt == "json":
        json.dump(report_to_dict(report), stream, indent=2, sort_keys=True)
        stream.write("\n")
    elif fmt == "human":
        stream.write(render_report_human(report))
    else:
        raise ValueError(f"unknown report format {fmt!r}")


# ---------------------------------------------------------------------------
# Correlation sample tables.


def write_samples_csv(report: CorrelationReport, path: str | Path) -> None:
    """Delimited sample table: sample_id, n_e, then one column per metric."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("sample_id,n_e," + ",".join(METRIC_ORDER) + "\n")
        for point in report.samples:
            cells = [str(point.sample_id), str(point.n_e)]
            for name in METRIC_ORDER:
                value = point.metrics[name]
                cells.append("" if value is None else repr(float(value)))
            fh.write(",".join(cells) + "\n")


def correlation_to_dict(report: CorrelationReport) -> dict:
    return {
        "format": "tracealign-correlation",
        "schema_version": REPORT_SCHEMA_VERSION,
        "coefficients": report.coefficients,
        "notes": report.notes,
        "parameters": report.parameters,
        "samples": [
            {"sample_id": p.sample_id, "moves": p.moves, "n_e": p.n_e, "metrics": p.metrics}
            for p in report.samples
        ],
    }
