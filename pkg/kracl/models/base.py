from typing import Any

import numpy as np
from pydantic import BaseModel


class ArrayModel(BaseModel):
    """Base for domain types that carry numpy arrays or engine tensors."""

    model_config = {
        "arbitrary_types_allowed": True,
        "populate_by_name": True,
    }


def int_array(values: Any, columns: int = 0) -> np.ndarray:
    """Coerce to a contiguous int64 array; ``columns`` fixes the row width of empty input."""
    array = np.ascontiguousarray(np.asarray(values, dtype=np.int64))
    if array.size == 0 and columns:
        return array.reshape(0, columns)
    return array

