from .report import NOT_AVAILABLE, BandRow, CategoryRow, Direction, EvalReport, MetricSummary

__all__ = ["NOT_AVAILABLE", "BandRow", "CategoryRow", "Direction", "EvalReport", "MetricSummary"]
