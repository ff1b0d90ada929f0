"""Synthetic scenes with closed-form voxel occupancy.

The generator builds straight-down captures of flat layers so the
expected voxel and column counts are computable exactly:

- Frames come in tiles of three sharing one camera (x, y); the three
  frames of a tile image flat layers at heights 0.05, 0.45, and 0.85
  meters, which land in height indices 0, 2, and 4 of a 0.2 m grid.
- Each feature cell is a 2x2 pixel block, and the per-frame focal
  length is chosen so one cell footprint is exactly one voxel column
  wide. Cell center coordinates sit near the 0.25 fraction of their
  voxel, far from boundaries, so floating-point noise cannot flip an
  index. A small random scene offset keeps the grid origin exercise
  honest without touching boundaries.
- Successive tiles shift by the tile width in x, so tiles occupy
  disjoint column ranges.
- Frame 0's top-left cell has its four depths zeroed (a sensor hole),
  removing exactly one voxel, and one column if the scene has a
  single frame.

With N frames of h x w feature cells:

    expected voxels  = N*h*w - 1
    expected columns = ceil(N/3)*h*w   (minus 1 if N == 1)
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NumericValidationError
from .tensorio import write_tensor

VOXEL_SIZE = 0.2
CAMERA_HEIGHT = 2.0
LAYER_HEIGHTS = (0.05, 0.45, 0.85)
LAYER_Z_INDICES = (0, 2, 4)


@dataclass(frozen=True)
class SynthSummary:
    """What the generator wrote and what tokenization must find."""

    manifest_path: Path
    frames: int
    cells: int
    dim: int
    seed: int
    expected_voxels: int
    expected_columns: int


def generate_scene(
    out_dir: str | Path,
    seed: int = 0,
    frames: int = 6,
    cells: int = 8,
    dim: int = 16,
) -> SynthSummary:
    """Write depth/feature tensors plus a manifest into out_dir.

    Identical arguments produce byte-identical files; different seeds
    differ in both the scene offset and the feature values.
    """
    if frames < 1:
        raise NumericValidationError(f"need at least one frame, got {frames}")
    if cells < 1:
        raise NumericValidationError(f"need at least one cell per side, got {cells}")
    if dim <= 0 or dim % 2 != 0:
        raise NumericValidationError(f"feature dim must be positive and even, got {dim}")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    h = w = cells
    side = 2 * cells  # depth resolution; each cell is a 2x2 pixel block
    s = VOXEL_SIZE
    # scene offset small enough that every cell center keeps its voxel
    x0, y0 = rng.uniform(-0.02, 0.02, size=2)

    entries = []
    for n in range(frames):
        tile = n // 3
        layer = LAYER_HEIGHTS[n % 3]
        z_cam = CAMERA_HEIGHT - layer
        # one 2-pixel cell spans exactly one voxel in world x/y
        focal = 2.0 * z_cam / s
        tx = x0 + tile * w * s + (w / 2.0) * s
        ty = y0 + (h / 2.0 - 0.5) * s
        pose = [
            1.0, 0.0, 0.0, tx,
            0.0, -1.0, 0.0, ty,
            0.0, 0.0, -1.0, CAMERA_HEIGHT,
            0.0, 0.0, 0.0, 1.0,
        ]

        depth = np.full((side, side), z_cam, dtype=np.float32)
        if n == 0:
            depth[0:2, 0:2] = 0.0  # sensor hole: drops cell (0, 0)
        features = rng.standard_normal((h, w, dim)).astype(np.float32)

        depth_name = f"frame-{n:03d}.depth.cfgt"
        feat_name = f"frame-{n:03d}.feat.cfgt"
        write_tensor(out_dir / depth_name, depth)
        write_tensor(out_dir / feat_name, features)
        entries.append(
            {
                "frame_id": f"frame-{n:03d}",
                "depth": depth_name,
                "features": feat_name,
                "intrinsics": {
                    "fx": focal,
                    "fy": focal,
                    "cx": float(cells),
                    "cy": float(cells),
                },
                "pose": pose,
            }
        )

    manifest = {
        "voxel_size": s,
        "rope_base": 10000.0,
        "fourier_seed": seed,
        "frames": entries,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    tiles = (frames + 2) // 3
    expected_voxels = frames * h * w - 1
    expected_columns = tiles * h * w - (1 if frames == 1 else 0)
    return SynthSummary(
        manifest_path=manifest_path,
        frames=frames,
        cells=cells,
        dim=dim,
        seed=seed,
        expected_voxels=expected_voxels,
        expected_columns=expected_columns,
    )
