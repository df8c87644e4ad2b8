"""
Human (rich table) and machine (JSON lines) renderings of a metrics report,
plus the run summary written next to them.
"""
import io
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from rich.console import Console
from rich.table import Table

from sexism_detector.evaluation.experiment import MetricsReport
from sexism_detector.schema.report_schema import REPORT_KEYS, AggregateRow, ReportRow

logger = logging.getLogger(__name__)

TEXT_WIDTH = 120


def _metric(mean: Optional[float], std: Optional[float]) -> str:
    if mean is None:
        return "-"
    return f"{mean:.4f} ± {std:.4f}"


def report_title(report: MetricsReport) -> str:
    header = report.header
    if header is None:
        return "Model performances"
    dataset = header.dataset + (" (bundled fixture substituted)" if header.substituted_fixture else "")
    return (
        f"Model performances on {dataset}: {header.n_train} train / {header.n_test} test, "
        f"split seed {header.split_seed}, seeds {header.seeds}"
    )


def build_table(report: MetricsReport) -> Table:
    """One row per ladder row with mean ± std over seeds."""
    table = Table(title=report_title(report), show_lines=True)
    table.add_column("Model", style="cyan")
    table.add_column("Description", style="bold")
    table.add_column("Precision", justify="right")
    table.add_column("Recall", justify="right")
    table.add_column("F1", justify="right", style="magenta")
    table.add_column("Seeds", justify="right")
    table.add_column("Status")

    for aggregate in report.aggregates:
        status_style = "bright_green" if aggregate.status == "ok" else "red"
        table.add_row(
            aggregate.model,
            aggregate.description,
            _metric(aggregate.precision_mean, aggregate.precision_std),
            _metric(aggregate.recall_mean, aggregate.recall_std),
            _metric(aggregate.f1_mean, aggregate.f1_std),
            f"{aggregate.n_seeds}/{aggregate.n_seeds + aggregate.n_failed}",
            f"[{status_style}]{aggregate.status}[/{status_style}]",
        )
    return table


def render_text(report: MetricsReport, width: int = TEXT_WIDTH) -> str:
    """The table as plain text, without colour codes."""
    buffer = io.StringIO()
    console = Console(file=buffer, width=width, color_system=None, force_terminal=False)
    console.print(build_table(report))
    if report.header and report.header.notes:
        for note in report.header.notes:
            console.print(f"note: {note}")
    return buffer.getvalue()


def print_report(report: MetricsReport, console: Optional[Console] = None) -> None:
    (console or Console()).print(build_table(report))


def row_record(row: ReportRow) -> Dict[str, Any]:
    """Report keys of one seed row; wall-clock goes to the run summary instead."""
    record = row.model_dump()
    record["wallclock_s"] = None
    return {key: record[key] for key in REPORT_KEYS}


def aggregate_record(aggregate: AggregateRow) -> Dict[str, Any]:
    return {"aggregate": True, **aggregate.model_dump()}


def report_lines(report: MetricsReport) -> List[str]:
    """JSON lines: every seed row of a ladder row, then its aggregate."""
    lines = []
    for result in report.results:
        lines.extend(json.dumps(row_record(row), ensure_ascii=False) for row in result.rows)
        lines.append(json.dumps(aggregate_record(result.aggregate), ensure_ascii=False))
    return lines


def write_report(report: MetricsReport, out_path: Union[str, Path]) -> Dict[str, Path]:
    """
    Write the JSONL report to out_path and the text table next to it (.txt).

    Returns:
        Mapping of file role to written path
    """
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    text_path = out_path.with_suffix(".txt")

    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        for line in report_lines(report):
            f.write(line + "\n")
    with open(text_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(render_text(report))

    logger.info(f"Report saved to: {out_path}")
    return {"jsonl": out_path, "text": text_path}


def experiment_timings(report: MetricsReport) -> List[Dict[str, Any]]:
    """Per-seed wall-clock, epochs and predicted-positive rate."""
    return [
        {
            "model": row.model,
            "seed": row.seed,
            "status": row.status,
            "epochs": row.epochs,
            "wallclock_s": row.wallclock_s,
            "predicted_positive_rate": row.predicted_positive_rate,
        }
        for row in report.rows
    ]


def write_run_summary(
    path: Union[str, Path],
    report: Optional[MetricsReport],
    start_time: datetime,
    end_time: datetime,
    warnings: Sequence[str] = (),
    errors: Sequence[Any] = (),
    files: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Write run_summary.json: timing, data provenance, per-experiment timings,
    warnings and errors.
    """
    summary = {
        "start_time": start_time.isoformat(),
        "end_time": end_time.isoformat(),
        "runtime_seconds": (end_time - start_time).total_seconds(),
        "data": report.header.model_dump() if report and report.header else None,
        "experiments": experiment_timings(report) if report else [],
        "warnings": list(warnings),
        "errors": [list(e) if isinstance(e, tuple) else e for e in errors],
        "files": {k: str(v) for k, v in (files or {}).items()},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=4, ensure_ascii=False)
    logger.info(f"Run summary saved to: {path}")
    return path
