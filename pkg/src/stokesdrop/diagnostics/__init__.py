"""Per-record diagnostics, identity checks, inequality tables and monitors."""

from .report import DiagnosticsRecord, IdentityCheckResult, ReportContext, report

__all__ = ["DiagnosticsRecord", "IdentityCheckResult", "ReportContext", "report"]
