"""Small array helpers shared across modules."""

from __future__ import annotations

import numpy as np


def readonly(a: np.ndarray) -> np.ndarray:
    """Contiguous, write-protected view-or-copy of a.

    Domain objects hold read-only arrays so instances can be shared
    across threads without defensive copying.
    """
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a
