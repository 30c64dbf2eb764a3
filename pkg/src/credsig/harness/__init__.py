from .bench import BenchConfig, BenchReport, BenchRow, run_bench
from .export import export_report, read_report, report_from_csv, report_to_csv
