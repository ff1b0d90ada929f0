"""cfgrid-ml: array-in, array-out bindings over the cfgrid core."""

from .binding import BoundTokenBatch, DPOGrads, DPOLosses, bind_dpo, bind_tokenize

__all__ = [
    "BoundTokenBatch",
    "DPOGrads",
    "DPOLosses",
    "bind_dpo",
    "bind_tokenize",
]
