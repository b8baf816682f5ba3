from .evaluation_service import (
    EvaluationService,
    analyze_by_indegree,
    analyze_by_relation_category,
    build_report,
    evaluate,
    filtered_rank,
    filtered_ranks,
)

__all__ = [
    "EvaluationService",
    "analyze_by_indegree",
    "analyze_by_relation_category",
    "build_report",
    "evaluate",
    "filtered_rank",
    "filtered_ranks",
]
