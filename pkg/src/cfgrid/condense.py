"""Height condensation of voxel grids into per-column tokens.

Each occupied (i, j) column of the voxel grid becomes one token: every
member voxel's feature is first rotated by its absolute height index k
(so height information survives the pooling), then the column is
averaged in ascending-k order. Horizontal position is attached
afterwards by adding a Fourier embedding of the column's world (x, y)
center, and an optional token budget keeps the densest columns.

Tokens are always serialized in row-major (i, j) order, so a fixed
input grid yields a bit-identical token sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .arrays import readonly as _readonly
from .errors import EmptySceneError, NumericValidationError
from .positional import FourierConfig, RoPEConfig, fourier_embed, rope_rotate
from .voxels import VoxelGrid

DEFAULT_MAX_TOKENS = 750


class CFGToken(NamedTuple):
    column: tuple[int, int]
    xy: tuple[float, float]
    feature: np.ndarray
    source_voxel_count: int
    anchored: bool


@dataclass(frozen=True)
class CondensedFeatureGrid:
    """Column tokens in row-major (i, j) order.

    Parallel arrays: col_indices (M, 2), xy (M, 2) world meters,
    features (M, d), counts (M,) source voxels per token, anchored
    (M,). voxel_total counts voxels before condensation and
    retained_voxel_total the voxels covered by kept tokens.
    """

    col_indices: np.ndarray
    xy: np.ndarray
    features: np.ndarray
    counts: np.ndarray
    anchored: np.ndarray
    voxel_total: int
    retained_voxel_total: int

    def __post_init__(self):
        cols = _readonly(np.asarray(self.col_indices, dtype=np.int64).reshape(-1, 2))
        xy = _readonly(np.asarray(self.xy, dtype=np.float64).reshape(-1, 2))
        features = _readonly(np.asarray(self.features, dtype=np.float64))
        counts = _readonly(np.asarray(self.counts, dtype=np.int64).reshape(-1))
        anchored = _readonly(np.asarray(self.anchored, dtype=bool).reshape(-1))
        m = len(cols)
        if not (len(xy) == len(features) == len(counts) == len(anchored) == m):
            raise NumericValidationError("token arrays disagree on length")
        if m and counts.min() < 1:
            raise NumericValidationError("tokens must cover at least one voxel")
        if self.retained_voxel_total > self.voxel_total:
            raise NumericValidationError(
                f"retained voxels {self.retained_voxel_total} exceed total {self.voxel_total}"
            )
        for name, val in (
            ("col_indices", cols),
            ("xy", xy),
            ("features", features),
            ("counts", counts),
            ("anchored", anchored),
        ):
            object.__setattr__(self, name, val)

    @property
    def token_count(self) -> int:
        return len(self.col_indices)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def preservation_rate(self) -> float:
        if self.voxel_total == 0:
            return 1.0
        return self.retained_voxel_total / self.voxel_total

    def tokens(self) -> list[CFGToken]:
        """List view of the token records."""
        return [
            CFGToken(
                (int(i), int(j)),
                (float(x), float(y)),
                self.features[n],
                int(self.counts[n]),
                bool(self.anchored[n]),
            )
            for n, ((i, j), (x, y)) in enumerate(zip(self.col_indices, self.xy))
        ]


@dataclass(frozen=True)
class CFGStats:
    """Token-to-voxel compression and voxel coverage of the kept tokens."""

    compression_rate: float
    preservation_rate: float
    token_count: int
    voxel_count: int


def condense(grid: VoxelGrid, rope_cfg: RoPEConfig) -> CondensedFeatureGrid:
    """Collapse each occupied column into one height-aware token.

    Within a column every voxel feature is rotated by its absolute
    height index k before the mean, accumulated in ascending-k order.
    A token is anchored if any member voxel is. The token's (x, y) is
    the world center of its column.
    """
    d = grid.dim
    if len(grid) == 0:
        return CondensedFeatureGrid(
            np.zeros((0, 2), np.int64),
            np.zeros((0, 2)),
            np.zeros((0, d)),
            np.zeros(0, np.int64),
            np.zeros(0, bool),
            voxel_total=0,
            retained_voxel_total=0,
        )

    # grid rows are lex-sorted by (i, j, k): columns are contiguous and
    # already ascending in k, so ordered accumulation falls out of bincount
    cols, inverse = np.unique(grid.indices[:, :2], axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    rotated = rope_rotate(grid.features, grid.indices[:, 2].astype(np.float64), rope_cfg)
    member_counts = np.bincount(inverse, minlength=len(cols))
    sums = np.stack(
        [
            np.bincount(inverse, weights=rotated[:, c], minlength=len(cols))
            for c in range(d)
        ],
        axis=1,
    )
    features = sums / member_counts[:, None]
    anchored = np.bincount(inverse, weights=grid.anchored.astype(np.float64)) > 0
    xy = grid.origin[:2] + (cols + 0.5) * grid.voxel_size
    total = len(grid)
    return CondensedFeatureGrid(
        cols, xy, features, member_counts, anchored,
        voxel_total=total, retained_voxel_total=total,
    )


def apply_horizontal_pe(
    cfg: CondensedFeatureGrid, fourier_cfg: FourierConfig
) -> CondensedFeatureGrid:
    """Add the Fourier embedding of each token's (x, y) to its feature."""
    if cfg.token_count == 0:
        return cfg
    features = fourier_embed(cfg.features, cfg.xy, fourier_cfg)
    return CondensedFeatureGrid(
        cfg.col_indices, cfg.xy, features, cfg.counts, cfg.anchored,
        voxel_total=cfg.voxel_total, retained_voxel_total=cfg.retained_voxel_total,
    )


def enforce_budget(
    cfg: CondensedFeatureGrid, max_tokens: int = DEFAULT_MAX_TOKENS
) -> CondensedFeatureGrid:
    """Keep at most max_tokens tokens, preferring dense columns.

    Overflow keeps the tokens with the highest source voxel counts,
    ties broken by ascending lexicographic (i, j); kept tokens stay in
    row-major order. Within budget the grid passes through unchanged.
    """
    if max_tokens < 1:
        raise NumericValidationError(f"token budget must be >= 1, got {max_tokens}")
    if cfg.token_count <= max_tokens:
        return cfg
    order = np.lexsort((cfg.col_indices[:, 1], cfg.col_indices[:, 0], -cfg.counts))
    keep = np.sort(order[:max_tokens])
    return CondensedFeatureGrid(
        cfg.col_indices[keep],
        cfg.xy[keep],
        cfg.features[keep],
        cfg.counts[keep],
        cfg.anchored[keep],
        voxel_total=cfg.voxel_total,
        retained_voxel_total=int(cfg.counts[keep].sum()),
    )


def compute_stats(grid: VoxelGrid, cfg: CondensedFeatureGrid) -> CFGStats:
    """Compression and preservation ratios of a condensed grid."""
    voxel_count = len(grid)
    if voxel_count == 0:
        raise EmptySceneError("scene contains no occupied voxels")
    if cfg.voxel_total != voxel_count:
        raise NumericValidationError(
            f"token grid covers {cfg.voxel_total} voxels but grid holds {voxel_count}"
        )
    return CFGStats(
        compression_rate=cfg.token_count / voxel_count,
        preservation_rate=cfg.retained_voxel_total / cfg.voxel_total,
        token_count=cfg.token_count,
        voxel_count=voxel_count,
    )
