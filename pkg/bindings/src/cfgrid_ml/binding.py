"""In-process bindings for ML pipelines.

The functions here are thin shims over the cfgrid core: they accept
either a scene manifest path or in-memory arrays, run the exact same
pipeline as the command-line tool, and hand the results back as
contiguous numeric arrays. Nothing is recomputed or re-serialized, so
binding outputs are bit-equal to the token files the CLI writes.

Arrays are handed over zero-copy whenever they are already contiguous
float64 (the core guarantees this for its outputs); they arrive marked
read-only. Errors surface as the core's exception types, each carrying
a stable ``code`` string and ``exit_code``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from cfgrid import (
    CFGStats,
    InputError,
    PointFeatureCloud,
    SceneDPOBatch,
    SceneDPOConfig,
    SceneManifest,
    load_manifest,
    tokenize_cloud,
    tokenize_scene,
)
from cfgrid import grad as _core_grad
from cfgrid import loss as _core_loss


@dataclass(frozen=True)
class BoundTokenBatch:
    """Scene tokens as parallel contiguous arrays.

    features (count, d) float64, xy (count, 2) world meters,
    col_indices (count, 2) int64, plus the run's compression stats.
    """

    features: np.ndarray
    xy: np.ndarray
    col_indices: np.ndarray
    stats: CFGStats

    def __post_init__(self):
        object.__setattr__(self, "features", np.ascontiguousarray(self.features, np.float64))
        object.__setattr__(self, "xy", np.ascontiguousarray(self.xy, np.float64))
        object.__setattr__(self, "col_indices", np.ascontiguousarray(self.col_indices, np.int64))

    @property
    def count(self) -> int:
        return len(self.features)

    @property
    def dim(self) -> int:
        return self.features.shape[1]


class DPOLosses(NamedTuple):
    total: float
    answer_contrast: float
    scene_contrast: float
    nll: float


class DPOGrads(NamedTuple):
    lp_pos: np.ndarray
    lp_negans: np.ndarray
    lp_negscene: np.ndarray


def _as_batch(result) -> BoundTokenBatch:
    return BoundTokenBatch(
        features=result.cfg.features,
        xy=result.cfg.xy,
        col_indices=result.cfg.col_indices,
        stats=result.stats,
    )


def bind_tokenize(
    source,
    features: np.ndarray | None = None,
    *,
    frame_ids=None,
    voxel_size: float | None = None,
    max_tokens: int | None = None,
    rope_base: float | None = None,
    fourier_seed: int | None = None,
    fourier_weights: str | Path | None = None,
) -> BoundTokenBatch:
    """Tokenize a scene given a manifest path or in-memory arrays.

    source is either a manifest path (str or Path) or an (N, 3) array
    of world points, in which case ``features`` must hold the matching
    (N, d) array. Keyword settings override the manifest's values; in
    array mode they override the library defaults.
    """
    if isinstance(source, (str, Path)):
        if features is not None or frame_ids is not None:
            raise InputError("features and frame_ids only apply to array input")
        manifest = load_manifest(source)
    else:
        if features is None:
            raise InputError("array input requires a features array")
        points = np.asarray(source, dtype=np.float64)
        if frame_ids is None:
            frame_ids = np.full(len(points), "in-memory")
        manifest = SceneManifest(frames=())

    manifest = manifest.with_overrides(
        voxel_size=voxel_size,
        max_tokens=max_tokens,
        rope_base=rope_base,
        fourier_seed=fourier_seed,
        fourier_weights=fourier_weights,
    )
    if isinstance(source, (str, Path)):
        return _as_batch(tokenize_scene(manifest))
    cloud = PointFeatureCloud(points, np.asarray(features, dtype=np.float64), frame_ids)
    return _as_batch(tokenize_cloud(cloud, manifest))


def bind_dpo(
    lp_pos,
    lp_negans,
    lp_negscene,
    *,
    ref_pos=None,
    ref_negans=None,
    ref_negscene=None,
    config: SceneDPOConfig | None = None,
) -> tuple[DPOLosses, DPOGrads]:
    """Loss terms and per-sample gradients for a contrast batch.

    Identical numerics to the core: the same batch through the CLI's
    loss command prints the same values this returns.
    """
    batch = SceneDPOBatch(
        lp_pos=lp_pos,
        lp_negans=lp_negans,
        lp_negscene=lp_negscene,
        ref_pos=ref_pos,
        ref_negans=ref_negans,
        ref_negscene=ref_negscene,
    )
    losses = DPOLosses(*_core_loss(batch, config))
    grads = DPOGrads(*(np.ascontiguousarray(g) for g in _core_grad(batch, config)))
    return losses, grads
