"""Matrix/certificate readers and report writers."""

from src.io.loader import load_certificates, load_matrix, parse_matrix_text
from src.io.report import format_certificate, format_outcome, sweep_csv, write_sweep_workbook

__all__ = [
    "load_certificates",
    "load_matrix",
    "parse_matrix_text",
    "format_certificate",
    "format_outcome",
    "sweep_csv",
    "write_sweep_workbook",
]
