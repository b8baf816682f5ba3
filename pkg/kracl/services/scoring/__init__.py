from .projection import init_head, project, score_all

__all__ = ["init_head", "project", "score_all"]
