"""Pinhole camera models and depth-map back-projection.

Coordinate conventions used throughout:

    Pixel frame:  origin at the top-left corner, u to the right (width W),
                  v downward (height H). A pixel q = (u, v) indexes
                  depth[v, u].
    Camera frame: right-handed, x right, y down, z forward along the
                  optical axis. Depth values are z-depths in meters,
                  not ray lengths.
    World frame:  reached through a 4x4 homogeneous camera-to-world
                  matrix T; a camera-frame point c maps to R @ c + t
                  where R is the upper-left 3x3 block and t the
                  translation column.

A pixel q with valid depth z lifts to the camera-frame point
z * [(u - cx) / fx, (v - cy) / fy, 1] and from there into the world
frame through T. Depth values that are zero, negative, or non-finite
mark sensor holes and are dropped, never clamped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arrays import readonly as _readonly
from .errors import (
    BehindCameraError,
    DimMismatchError,
    InvalidDepthError,
    NumericValidationError,
)

POSE_ORTHO_TOL = 1e-5


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics: focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        values = (self.fx, self.fy, self.cx, self.cy)
        if not all(np.isfinite(v) for v in values):
            raise NumericValidationError(f"non-finite intrinsics {values}")
        if self.fx <= 0 or self.fy <= 0:
            raise NumericValidationError(
                f"focal lengths must be positive, got fx={self.fx} fy={self.fy}"
            )

    @property
    def matrix(self) -> np.ndarray:
        """The 3x3 intrinsic matrix."""
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


@dataclass(frozen=True)
class CameraPose:
    """4x4 homogeneous camera-to-world transform.

    The rotation block must be orthonormal to within 1e-5 with
    determinant within 1e-5 of +1, and the bottom row must be exactly
    [0, 0, 0, 1].
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (4, 4):
            raise NumericValidationError(f"pose must be 4x4, got {m.shape}")
        if not np.isfinite(m).all():
            raise NumericValidationError("pose contains non-finite values")
        if not np.array_equal(m[3], [0.0, 0.0, 0.0, 1.0]):
            raise NumericValidationError(f"pose bottom row must be [0,0,0,1], got {m[3]}")
        r = m[:3, :3]
        ortho_err = np.abs(r.T @ r - np.eye(3)).max()
        if ortho_err > POSE_ORTHO_TOL:
            raise NumericValidationError(
                f"rotation block not orthonormal (max deviation {ortho_err:.3g})"
            )
        det = np.linalg.det(r)
        if abs(det - 1.0) > POSE_ORTHO_TOL:
            raise NumericValidationError(f"rotation determinant {det:.8f} is not +1")
        object.__setattr__(self, "matrix", _readonly(m))

    @classmethod
    def identity(cls) -> "CameraPose":
        return cls(np.eye(4))

    @property
    def rotation(self) -> np.ndarray:
        return self.matrix[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.matrix[:3, 3]


@dataclass(frozen=True)
class DepthMap:
    """H x W z-depths in meters. Values <= 0 or non-finite are invalid."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise NumericValidationError(f"depth map must be 2-d, got shape {v.shape}")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def valid_mask(self) -> np.ndarray:
        """Boolean H x W mask of usable depths."""
        v = self.values
        return np.isfinite(v) & (v > 0.0)


@dataclass(frozen=True)
class FeatureMap:
    """h x w x d feature activations from a 2D encoder.

    d must be even: the vertical position rotation downstream operates
    on channel pairs.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 3:
            raise NumericValidationError(f"feature map must be 3-d, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise NumericValidationError("feature map contains non-finite values")
        d = v.shape[2]
        if d <= 0 or d % 2 != 0:
            raise NumericValidationError(f"feature dim must be positive and even, got {d}")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def dim(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True)
class FramedCapture:
    """One posed view: depth at full resolution plus its feature map.

    The feature map may be coarser than the depth map (h <= H, w <= W);
    cell boundaries need not fall on integer pixels.
    """

    intrinsics: CameraIntrinsics
    pose: CameraPose
    depth: DepthMap
    features: FeatureMap
    frame_id: str

    def __post_init__(self):
        if self.depth.height < self.features.height or self.depth.width < self.features.width:
            raise NumericValidationError(
                f"depth resolution {self.depth.height}x{self.depth.width} smaller than "
                f"feature resolution {self.features.height}x{self.features.width}"
            )


@dataclass(frozen=True)
class PointFeatureCloud:
    """World-frame points with aligned feature vectors and provenance."""

    points: np.ndarray
    features: np.ndarray
    frame_ids: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            feats = feats.reshape(len(pts), -1)
        ids = np.asarray(self.frame_ids)
        if not (len(pts) == len(feats) == len(ids)):
            raise DimMismatchError(
                f"points ({len(pts)}), features ({len(feats)}) and frame ids "
                f"({len(ids)}) must have equal length"
            )
        if not np.isfinite(pts).all():
            raise NumericValidationError("cloud contains non-finite coordinates")
        object.__setattr__(self, "points", _readonly(pts))
        object.__setattr__(self, "features", _readonly(feats))
        object.__setattr__(self, "frame_ids", _readonly(ids))

    @classmethod
    def empty(cls, dim: int = 0) -> "PointFeatureCloud":
        return cls(
            np.zeros((0, 3)), np.zeros((0, dim)), np.zeros(0, dtype="U1")
        )

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return len(self.points)


def _lift_to_world(us, vs, zs, intrinsics: CameraIntrinsics, pose: CameraPose):
    """Elementwise pixel-to-world lift; identical rounding for scalars
    and arrays, which keeps the per-pixel and per-frame paths bit-equal."""
    xc = (us - intrinsics.cx) / intrinsics.fx * zs
    yc = (vs - intrinsics.cy) / intrinsics.fy * zs
    zc = zs
    r = pose.rotation
    t = pose.translation
    xw = r[0, 0] * xc + r[0, 1] * yc + r[0, 2] * zc + t[0]
    yw = r[1, 0] * xc + r[1, 1] * yc + r[1, 2] * zc + t[1]
    zw = r[2, 0] * xc + r[2, 1] * yc + r[2, 2] * zc + t[2]
    return xw, yw, zw


def back_project_pixel(
    q: tuple[float, float],
    depth: float,
    intrinsics: CameraIntrinsics,
    pose: CameraPose,
) -> np.ndarray:
    """Lift pixel q = (u, v) with z-depth into a world-frame point."""
    if not np.isfinite(depth) or depth <= 0.0:
        raise InvalidDepthError(f"depth {depth} is not a valid positive depth")
    u, v = float(q[0]), float(q[1])
    xw, yw, zw = _lift_to_world(u, v, float(depth), intrinsics, pose)
    return np.array([xw, yw, zw])


def project_point(
    point: np.ndarray,
    intrinsics: CameraIntrinsics,
    pose: CameraPose,
) -> tuple[tuple[float, float], float]:
    """Exact algebraic inverse of :func:`back_project_pixel`.

    Returns ((u, v), depth). The camera-frame point is recovered with a
    linear solve against the full pose matrix, so the round trip holds
    even when the rotation block is orthonormal only to tolerance.
    """
    p = np.asarray(point, dtype=np.float64).reshape(3)
    cam = np.linalg.solve(pose.matrix, np.array([p[0], p[1], p[2], 1.0]))
    zc = cam[2]
    if zc <= 0.0:
        raise BehindCameraError(f"camera-frame depth {zc} is not positive")
    u = intrinsics.fx * cam[0] / zc + intrinsics.cx
    v = intrinsics.fy * cam[1] / zc + intrinsics.cy
    return (float(u), float(v)), float(zc)


def back_project_frame(capture: FramedCapture) -> PointFeatureCloud:
    """Back-project one frame and align coordinates to the feature grid.

    Each feature cell (r, c) covers the half-open pixel rectangle
    [r*H/h, (r+1)*H/h) x [c*W/w, (c+1)*W/w). The cell's 3D coordinate
    is the mean of the back-projected coordinates of its valid-depth
    pixels, accumulated in row-major pixel order; cells with no valid
    pixel are omitted. Each kept cell carries the cell's feature vector
    and the frame id.
    """
    depth = capture.depth
    feats = capture.features
    H, W = depth.height, depth.width
    h, w, d = feats.height, feats.width, feats.dim

    valid = depth.valid_mask().ravel()
    if not valid.any():
        return PointFeatureCloud.empty(d)

    vs, us = np.divmod(np.arange(H * W, dtype=np.int64), W)
    # pixel v lies in cell row r iff r*H/h <= v < (r+1)*H/h, i.e. r = v*h // H
    rows = (vs * h) // H
    cols = (us * w) // W
    cell_ids = (rows * w + cols)[valid]

    xw, yw, zw = _lift_to_world(
        us[valid].astype(np.float64),
        vs[valid].astype(np.float64),
        depth.values.ravel()[valid],
        capture.intrinsics,
        capture.pose,
    )

    n_cells = h * w
    counts = np.bincount(cell_ids, minlength=n_cells)
    sums = np.stack(
        [np.bincount(cell_ids, weights=c, minlength=n_cells) for c in (xw, yw, zw)],
        axis=1,
    )
    kept = counts > 0
    points = sums[kept] / counts[kept, None]
    features = feats.values.reshape(n_cells, d)[kept]
    frame_ids = np.full(int(kept.sum()), capture.frame_id, dtype="U64")
    return PointFeatureCloud(points, features, frame_ids)


def merge_clouds(clouds: list[PointFeatureCloud]) -> PointFeatureCloud:
    """Concatenate clouds in input order.

    Order is part of the contract: downstream pooling accumulates in
    cloud order, so merging must be deterministic.
    """
    if not clouds:
        return PointFeatureCloud.empty()
    dims = {c.dim for c in clouds if len(c) > 0}
    if len(dims) > 1:
        raise DimMismatchError(f"clouds disagree on feature dim: {sorted(dims)}")
    dim = dims.pop() if dims else clouds[0].dim
    nonempty = [c for c in clouds if len(c) > 0]
    if not nonempty:
        return PointFeatureCloud.empty(dim)
    return PointFeatureCloud(
        np.concatenate([c.points for c in nonempty]),
        np.concatenate([c.features for c in nonempty]),
        np.concatenate([c.frame_ids for c in nonempty]),
    )
