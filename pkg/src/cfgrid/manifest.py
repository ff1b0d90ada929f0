"""Scene manifests: the on-disk description of a capture session.

A manifest is a JSON object:

    {
      "voxel_size": 0.2,
      "max_tokens": 750,
      "rope_base": 10000.0,
      "fourier_seed": 0,              // or "fourier_weights": "pe.cfgt"
      "frames": [
        {
          "frame_id": "frame-000",
          "depth": "frame-000.depth.cfgt",      // H x W tensor, meters
          "features": "frame-000.feat.cfgt",    // h x w x d tensor
          "intrinsics": {"fx": .., "fy": .., "cx": .., "cy": ..},
          "pose": [16 numbers, row-major camera-to-world]
        }, ...
      ],
      "anchor": {                      // optional region of interest
        "box_min": [x, y, z], "box_max": [x, y, z],
        // or "indices": [[i, j, k], ...]
        "vector": "anchor.cfgt"        // d values to add inside
      }
    }

Tensor paths are resolved relative to the manifest's directory. All
settings are optional and default to voxel_size 0.2, max_tokens 750,
rope_base 10000, fourier_seed 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .condense import DEFAULT_MAX_TOKENS
from .errors import InputError
from .geometry import CameraIntrinsics, CameraPose
from .positional import DEFAULT_ROPE_BASE
from .voxels import DEFAULT_VOXEL_SIZE


@dataclass(frozen=True)
class FrameEntry:
    frame_id: str
    depth_path: Path
    features_path: Path
    intrinsics: CameraIntrinsics
    pose: CameraPose


@dataclass(frozen=True)
class AnchorEntry:
    vector_path: Path
    box_min: tuple[float, float, float] | None = None
    box_max: tuple[float, float, float] | None = None
    indices: tuple[tuple[int, int, int], ...] | None = None


@dataclass(frozen=True)
class SceneManifest:
    frames: tuple[FrameEntry, ...]
    voxel_size: float = DEFAULT_VOXEL_SIZE
    max_tokens: int = DEFAULT_MAX_TOKENS
    rope_base: float = DEFAULT_ROPE_BASE
    fourier_seed: int | None = 0
    fourier_weights: Path | None = None
    anchor: AnchorEntry | None = None

    def with_overrides(
        self,
        voxel_size: float | None = None,
        max_tokens: int | None = None,
        rope_base: float | None = None,
        fourier_seed: int | None = None,
        fourier_weights: str | Path | None = None,
    ) -> "SceneManifest":
        """Apply command-line overrides on top of the file's settings."""
        out = self
        if voxel_size is not None:
            out = replace(out, voxel_size=voxel_size)
        if max_tokens is not None:
            out = replace(out, max_tokens=max_tokens)
        if rope_base is not None:
            out = replace(out, rope_base=rope_base)
        if fourier_weights is not None:
            out = replace(out, fourier_weights=Path(fourier_weights), fourier_seed=None)
        elif fourier_seed is not None:
            out = replace(out, fourier_seed=fourier_seed, fourier_weights=None)
        return out


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise InputError(f"{context} is missing required field {key!r}")
    return mapping[key]


def _resolve(base: Path, value, context: str) -> Path:
    if not isinstance(value, str) or not value:
        raise InputError(f"{context} must be a nonempty path string")
    path = (base / value).resolve() if not Path(value).is_absolute() else Path(value)
    if not path.is_file():
        raise InputError(f"{context} references a missing file: {path}")
    return path


def _parse_frame(entry: dict, base: Path, position: int) -> FrameEntry:
    context = f"frame entry {position}"
    if not isinstance(entry, dict):
        raise InputError(f"{context} must be an object")
    frame_id = _require(entry, "frame_id", context)
    if not isinstance(frame_id, str) or not frame_id:
        raise InputError(f"{context} frame_id must be a nonempty string")
    intr = _require(entry, "intrinsics", context)
    try:
        intrinsics = CameraIntrinsics(
            fx=float(_require(intr, "fx", f"{context} intrinsics")),
            fy=float(_require(intr, "fy", f"{context} intrinsics")),
            cx=float(_require(intr, "cx", f"{context} intrinsics")),
            cy=float(_require(intr, "cy", f"{context} intrinsics")),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"{context} has non-numeric intrinsics: {exc}") from exc
    pose_values = _require(entry, "pose", context)
    if not isinstance(pose_values, list) or len(pose_values) != 16:
        raise InputError(f"{context} pose must be a list of 16 numbers")
    pose = CameraPose(np.array(pose_values, dtype=np.float64).reshape(4, 4))
    return FrameEntry(
        frame_id=frame_id,
        depth_path=_resolve(base, _require(entry, "depth", context), f"{context} depth"),
        features_path=_resolve(base, _require(entry, "features", context), f"{context} features"),
        intrinsics=intrinsics,
        pose=pose,
    )


def _parse_anchor(entry: dict, base: Path) -> AnchorEntry:
    context = "anchor entry"
    if not isinstance(entry, dict):
        raise InputError(f"{context} must be an object")
    vector_path = _resolve(base, _require(entry, "vector", context), f"{context} vector")
    has_box = "box_min" in entry or "box_max" in entry
    has_indices = "indices" in entry
    if has_box == has_indices:
        raise InputError(f"{context} needs exactly one of a box or an index list")
    if has_box:
        lo = _require(entry, "box_min", context)
        hi = _require(entry, "box_max", context)
        for name, val in (("box_min", lo), ("box_max", hi)):
            if not isinstance(val, list) or len(val) != 3:
                raise InputError(f"{context} {name} must be a list of 3 numbers")
        return AnchorEntry(
            vector_path=vector_path,
            box_min=tuple(float(v) for v in lo),
            box_max=tuple(float(v) for v in hi),
        )
    indices = entry["indices"]
    if not isinstance(indices, list):
        raise InputError(f"{context} indices must be a list of [i, j, k] triples")
    parsed = []
    for pos, triple in enumerate(indices):
        if not isinstance(triple, list) or len(triple) != 3:
            raise InputError(f"{context} index {pos} must be an [i, j, k] triple")
        parsed.append(tuple(int(v) for v in triple))
    return AnchorEntry(vector_path=vector_path, indices=tuple(parsed))


def load_manifest(path: str | Path) -> SceneManifest:
    """Parse and validate a manifest file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read manifest {path}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputError(f"manifest {path} must hold a JSON object")
    base = path.resolve().parent

    frames_raw = _require(raw, "frames", f"manifest {path}")
    if not isinstance(frames_raw, list):
        raise InputError(f"manifest {path} frames must be a list")
    frames = tuple(_parse_frame(entry, base, pos) for pos, entry in enumerate(frames_raw))

    if "fourier_seed" in raw and "fourier_weights" in raw:
        raise InputError(f"manifest {path} sets both fourier_seed and fourier_weights")
    fourier_weights = None
    fourier_seed: int | None = 0
    if "fourier_weights" in raw:
        fourier_weights = _resolve(base, raw["fourier_weights"], f"manifest {path} fourier_weights")
        fourier_seed = None
    elif "fourier_seed" in raw:
        fourier_seed = int(raw["fourier_seed"])

    anchor = _parse_anchor(raw["anchor"], base) if "anchor" in raw else None

    try:
        return SceneManifest(
            frames=frames,
            voxel_size=float(raw.get("voxel_size", DEFAULT_VOXEL_SIZE)),
            max_tokens=int(raw.get("max_tokens", DEFAULT_MAX_TOKENS)),
            rope_base=float(raw.get("rope_base", DEFAULT_ROPE_BASE)),
            fourier_seed=fourier_seed,
            fourier_weights=fourier_weights,
            anchor=anchor,
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"manifest {path} has a non-numeric setting: {exc}") from exc
