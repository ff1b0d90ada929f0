"""Sparse voxelization of point-feature clouds.

A grid stores only occupied voxels. Each point lands in the voxel
floor((p - origin) / voxel_size) per axis; a point exactly on a
boundary belongs to the voxel floating-point floor assigns it to, with
no epsilon nudging. Per-voxel features are arithmetic means of member
features, accumulated in cloud order so results are reproducible.

Anchor injection marks a spatial region of interest by adding a vector
to the features of stored voxels inside the region. Injection never
creates voxels and never mutates its input grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arrays import readonly as _readonly
from .errors import DimMismatchError, NumericValidationError
from .geometry import PointFeatureCloud

DEFAULT_VOXEL_SIZE = 0.2


@dataclass(frozen=True)
class VoxelGridConfig:
    """Grid resolution and origin policy.

    origin None means auto: the cloud's min corner floored to the
    voxel lattice, so grids are reproducible under world offsets
    smaller than a voxel.
    """

    voxel_size: float = DEFAULT_VOXEL_SIZE
    origin: tuple[float, float, float] | None = None

    def __post_init__(self):
        if not np.isfinite(self.voxel_size) or self.voxel_size <= 0:
            raise NumericValidationError(f"voxel_size must be positive, got {self.voxel_size}")
        if self.origin is not None:
            o = tuple(float(v) for v in self.origin)
            if len(o) != 3 or not all(np.isfinite(v) for v in o):
                raise NumericValidationError(f"origin must be 3 finite values, got {self.origin}")
            object.__setattr__(self, "origin", o)


@dataclass(frozen=True)
class VoxelGrid:
    """Occupied voxels in lexicographic (i, j, k) index order.

    Parallel arrays: indices (N, 3) int, features (N, d), counts (N,),
    anchored (N,). Every stored voxel has count >= 1.
    """

    config: VoxelGridConfig
    origin: np.ndarray
    indices: np.ndarray
    features: np.ndarray
    counts: np.ndarray
    anchored: np.ndarray = field(default=None)

    def __post_init__(self):
        origin = _readonly(np.asarray(self.origin, dtype=np.float64).reshape(3))
        indices = _readonly(np.asarray(self.indices, dtype=np.int64).reshape(-1, 3))
        features = _readonly(np.asarray(self.features, dtype=np.float64))
        counts = _readonly(np.asarray(self.counts, dtype=np.int64).reshape(-1))
        anchored = self.anchored
        if anchored is None:
            anchored = np.zeros(len(indices), dtype=bool)
        anchored = _readonly(np.asarray(anchored, dtype=bool).reshape(-1))
        n = len(indices)
        if not (len(features) == len(counts) == len(anchored) == n):
            raise NumericValidationError("voxel arrays disagree on length")
        if n and counts.min() < 1:
            raise NumericValidationError("stored voxels must have count >= 1")
        if not np.isfinite(features).all():
            raise NumericValidationError("voxel features contain non-finite values")
        for name, val in (
            ("origin", origin),
            ("indices", indices),
            ("features", features),
            ("counts", counts),
            ("anchored", anchored),
        ):
            object.__setattr__(self, name, val)

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def voxel_size(self) -> float:
        return self.config.voxel_size

    def centers(self) -> np.ndarray:
        """World-frame voxel centers, one row per stored voxel."""
        return self.origin + (self.indices + 0.5) * self.voxel_size

    def cells(self) -> dict[tuple[int, int, int], tuple[np.ndarray, int, bool]]:
        """Mapping view: (i, j, k) -> (feature, count, anchored)."""
        return {
            (int(i), int(j), int(k)): (self.features[n], int(self.counts[n]), bool(self.anchored[n]))
            for n, (i, j, k) in enumerate(self.indices)
        }


@dataclass(frozen=True)
class AnchorRegion:
    """Region of interest plus the vector to add to voxels inside it.

    Exactly one of (box_min, box_max) or indices selects the region.
    The box is closed and membership is tested on voxel centers, which
    is unambiguous for boxes not aligned to the grid.
    """

    anchor_vector: np.ndarray
    box_min: tuple[float, float, float] | None = None
    box_max: tuple[float, float, float] | None = None
    indices: tuple[tuple[int, int, int], ...] | None = None

    def __post_init__(self):
        vec = _readonly(np.asarray(self.anchor_vector, dtype=np.float64).reshape(-1))
        if not np.isfinite(vec).all():
            raise NumericValidationError("anchor vector contains non-finite values")
        object.__setattr__(self, "anchor_vector", vec)
        has_box = self.box_min is not None or self.box_max is not None
        if has_box == (self.indices is not None):
            raise NumericValidationError("region needs exactly one of a box or an index set")
        if has_box:
            if self.box_min is None or self.box_max is None:
                raise NumericValidationError("box region needs both corners")
            lo = np.asarray(self.box_min, dtype=np.float64).reshape(3)
            hi = np.asarray(self.box_max, dtype=np.float64).reshape(3)
            if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
                raise NumericValidationError("box corners must be finite")
            if (lo > hi).any():
                raise NumericValidationError(f"box min {lo} exceeds max {hi}")
            object.__setattr__(self, "box_min", tuple(lo))
            object.__setattr__(self, "box_max", tuple(hi))
        else:
            idx = tuple(tuple(int(v) for v in entry) for entry in self.indices)
            if any(len(entry) != 3 for entry in idx):
                raise NumericValidationError("index entries must be (i, j, k) triples")
            object.__setattr__(self, "indices", idx)


def voxelize(cloud: PointFeatureCloud, config: VoxelGridConfig | None = None) -> VoxelGrid:
    """Pool a cloud into a sparse grid of per-voxel mean features.

    Voxels are emitted in lexicographic (i, j, k) order. Feature sums
    accumulate in cloud order, so identical clouds produce bit-identical
    grids. An empty cloud yields an empty grid.
    """
    if config is None:
        config = VoxelGridConfig()
    vs = config.voxel_size
    d = cloud.dim
    if len(cloud) == 0:
        origin = np.array(config.origin) if config.origin else np.zeros(3)
        return VoxelGrid(
            config, origin, np.zeros((0, 3), np.int64), np.zeros((0, d)), np.zeros(0, np.int64)
        )

    if config.origin is not None:
        origin = np.array(config.origin, dtype=np.float64)
    else:
        origin = np.floor(cloud.points.min(axis=0) / vs) * vs

    idx = np.floor((cloud.points - origin) / vs).astype(np.int64)
    unique, inverse = np.unique(idx, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    counts = np.bincount(inverse, minlength=len(unique))
    # bincount accumulates sequentially over the input, i.e. in cloud order
    sums = np.stack(
        [
            np.bincount(inverse, weights=cloud.features[:, c], minlength=len(unique))
            for c in range(d)
        ],
        axis=1,
    )
    features = sums / counts[:, None]
    return VoxelGrid(config, origin, unique, features, counts)


def inject_anchor(grid: VoxelGrid, region: AnchorRegion) -> VoxelGrid:
    """Add the region's anchor vector to stored voxels inside it.

    Returns a new grid; voxels outside the region are untouched and
    voxels absent from the grid are not created.
    """
    if len(region.anchor_vector) != grid.dim:
        raise DimMismatchError(
            f"anchor vector dim {len(region.anchor_vector)} != grid dim {grid.dim}"
        )
    if region.indices is not None:
        wanted = set(region.indices)
        mask = np.fromiter(
            ((int(i), int(j), int(k)) in wanted for i, j, k in grid.indices),
            dtype=bool,
            count=len(grid),
        )
    else:
        centers = grid.centers()
        lo = np.array(region.box_min)
        hi = np.array(region.box_max)
        mask = ((centers >= lo) & (centers <= hi)).all(axis=1)

    features = grid.features.copy()
    features[mask] += region.anchor_vector
    return VoxelGrid(
        grid.config,
        grid.origin,
        grid.indices,
        features,
        grid.counts,
        grid.anchored | mask,
    )


def grid_stats(grid: VoxelGrid) -> tuple[int, int]:
    """(occupied voxel count, distinct occupied (i, j) column count)."""
    if len(grid) == 0:
        return 0, 0
    columns = np.unique(grid.indices[:, :2], axis=0)
    return len(grid), len(columns)
