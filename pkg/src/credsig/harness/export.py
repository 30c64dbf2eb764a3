"""Write bench reports as CSV or as a self-contained SVG line chart."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from pathlib import Path

from ..errors import CredsigError
from .bench import BenchReport, BenchRow

COLUMNS = ("scheme", "operation", "n_blocks", "fraction", "mean_ns", "p95_ns", "artifact_size_bytes")


class ExportError(CredsigError):
    pass


def report_to_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(COLUMNS)
    for r in report.rows:
        writer.writerow([r.scheme, r.operation, r.n_blocks, repr(r.fraction), repr(r.mean_ns), repr(r.p95_ns),
                         r.artifact_size_bytes])
    return buf.getvalue()


def report_from_csv(text: str) -> BenchReport:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != COLUMNS:
        raise ExportError(f"unexpected CSV header {header!r}")
    rows = [BenchRow(s, op, int(n), float(f), float(m), float(p), int(size))
            for s, op, n, f, m, p, size in reader]
    return BenchReport(rows)


def _plot_svg(report: BenchReport, path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = defaultdict(lambda: defaultdict(list))
    for r in report.rows:
        series[(r.scheme, r.operation)][r.n_blocks].append(r)

    fig, (ax_size, ax_time) = plt.subplots(1, 2, figsize=(11, 4.2))
    for (scheme, op), by_n in sorted(series.items()):
        ns = sorted(by_n)
        size = [sum(r.artifact_size_bytes for r in by_n[n]) / len(by_n[n]) for n in ns]
        mean_ms = [sum(r.mean_ns for r in by_n[n]) / len(by_n[n]) / 1e6 for n in ns]
        ax_size.plot(ns, size, marker="o", label=f"{scheme} {op}")
        ax_time.plot(ns, mean_ms, marker="o", label=f"{scheme} {op}")
    ax_size.set(xlabel="blocks", ylabel="artifact size (bytes)", title="Size vs blocks")
    ax_time.set(xlabel="blocks", ylabel="mean time (ms)", title="Time vs blocks", yscale="log")
    if series:
        ax_time.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def export_report(report: BenchReport, fmt: str, path) -> Path:
    path = Path(path)
    try:
        if fmt == "csv":
            path.write_text(report_to_csv(report), encoding="utf-8", newline="")
        elif fmt == "svg-plot":
            _plot_svg(report, path)
        else:
            raise ExportError(f"unknown export format {fmt!r}; expected csv or svg-plot")
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return path


def read_report(path) -> BenchReport:
    path = Path(path)
    try:
        return report_from_csv(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ExportError(f"cannot read {path}: {exc}") from exc
