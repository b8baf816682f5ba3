from .head import HeadKind, HeadParams

__all__ = ["HeadKind", "HeadParams"]
