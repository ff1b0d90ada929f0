"""End-to-end tokenization: manifest in, scene tokens out.

The stages are back-projection per frame, order-preserving merge,
voxelization, optional anchor injection, height condensation with
rotary encoding, horizontal Fourier embedding, and budget enforcement.
The command-line tool and the in-process bindings both call
tokenize_scene, so their outputs are identical down to the bit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .condense import (
    CFGStats,
    CondensedFeatureGrid,
    apply_horizontal_pe,
    compute_stats,
    condense,
    enforce_budget,
)
from .errors import EmptySceneError, ShapeMismatchError
from .geometry import (
    DepthMap,
    FeatureMap,
    FramedCapture,
    PointFeatureCloud,
    back_project_frame,
    merge_clouds,
)
from .manifest import FrameEntry, SceneManifest
from .positional import FourierConfig, RoPEConfig
from .tensorio import read_tensor, read_tensors
from .tokenfile import TokenFileData
from .voxels import AnchorRegion, VoxelGrid, VoxelGridConfig, inject_anchor, voxelize


@dataclass(frozen=True)
class TokenizeResult:
    grid: VoxelGrid
    cfg: CondensedFeatureGrid
    stats: CFGStats
    token_file: TokenFileData


def load_capture(entry: FrameEntry) -> FramedCapture:
    """Materialize one frame's tensors from disk."""
    depth = DepthMap(read_tensor(entry.depth_path))
    features = FeatureMap(read_tensor(entry.features_path))
    return FramedCapture(
        intrinsics=entry.intrinsics,
        pose=entry.pose,
        depth=depth,
        features=features,
        frame_id=entry.frame_id,
    )


def _load_fourier(manifest: SceneManifest, dim: int) -> FourierConfig:
    if manifest.fourier_weights is not None:
        cfg = FourierConfig.from_tensors(read_tensors(manifest.fourier_weights))
        if cfg.dim != dim:
            raise ShapeMismatchError(
                f"fourier weights are for dim {cfg.dim}, scene features have dim {dim}"
            )
        return cfg
    seed = manifest.fourier_seed if manifest.fourier_seed is not None else 0
    return FourierConfig.from_seed(dim, input_dim=2, seed=seed)


def build_cloud(manifest: SceneManifest) -> PointFeatureCloud:
    """Back-project every frame and merge in manifest order."""
    clouds = [back_project_frame(load_capture(entry)) for entry in manifest.frames]
    return merge_clouds(clouds)


def tokenize_cloud(cloud: PointFeatureCloud, manifest: SceneManifest) -> TokenizeResult:
    """Voxelize, condense, embed, and clip an already-merged cloud."""
    grid = voxelize(cloud, VoxelGridConfig(voxel_size=manifest.voxel_size))
    if manifest.anchor is not None:
        anchor = manifest.anchor
        region = AnchorRegion(
            anchor_vector=read_tensor(anchor.vector_path),
            box_min=anchor.box_min,
            box_max=anchor.box_max,
            indices=anchor.indices,
        )
        grid = inject_anchor(grid, region)
    if len(grid) == 0:
        raise EmptySceneError("no valid depth samples; the scene has no occupied voxels")

    rope_cfg = RoPEConfig(dim=grid.dim, base=manifest.rope_base)
    cfg = condense(grid, rope_cfg)
    cfg = apply_horizontal_pe(cfg, _load_fourier(manifest, grid.dim))
    cfg = enforce_budget(cfg, manifest.max_tokens)
    stats = compute_stats(grid, cfg)
    return TokenizeResult(
        grid=grid,
        cfg=cfg,
        stats=stats,
        token_file=TokenFileData.from_condensed(grid, cfg, stats),
    )


def tokenize_scene(manifest: SceneManifest) -> TokenizeResult:
    """Full pipeline from a parsed manifest."""
    return tokenize_cloud(build_cloud(manifest), manifest)
