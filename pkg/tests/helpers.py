"""Shared random-instance builders for the test suite."""

import numpy as np

from cfgrid import CameraIntrinsics, CameraPose, PointFeatureCloud


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Proper rotation matrix, orthonormal to machine precision."""
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_pose(rng: np.random.Generator, span: float = 5.0) -> CameraPose:
    m = np.eye(4)
    m[:3, :3] = random_rotation(rng)
    m[:3, 3] = rng.uniform(-span, span, 3)
    return CameraPose(m)


def random_intrinsics(rng: np.random.Generator) -> CameraIntrinsics:
    return CameraIntrinsics(
        fx=float(rng.uniform(100.0, 1000.0)),
        fy=float(rng.uniform(100.0, 1000.0)),
        cx=float(rng.uniform(100.0, 500.0)),
        cy=float(rng.uniform(100.0, 500.0)),
    )


def random_cloud(rng: np.random.Generator, n: int, d: int, span: float = 4.0) -> PointFeatureCloud:
    return PointFeatureCloud(
        rng.uniform(-span, span, (n, 3)),
        rng.standard_normal((n, d)),
        np.array([f"frame-{i % 5}" for i in range(n)]),
    )
