from functools import wraps
from typing import Any, Callable
import time

from .metrics import STAGE_DURATION


def timed(stage: str):
    """
    Decorator observing the wrapped call's wall time in the stage histogram.

    Args:
        stage: Label value under which the duration is recorded
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            start_time = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                STAGE_DURATION.labels(stage=stage).observe(time.perf_counter() - start_time)
        return wrapper
    return decorator
