"""Scene tokenization of posed RGBD captures into condensed feature grids.

The pipeline back-projects per-frame depth into world-frame points
aligned to each frame's 2D feature map, pools the points into a sparse
voxel grid, condenses each vertical column into one height-aware token,
attaches horizontal position embeddings, and enforces a token budget.
A closed-form preference loss over (answer, scene) contrasts and an
answer-template coverage metric round out the toolkit.
"""

from .condense import (
    CFGStats,
    CFGToken,
    CondensedFeatureGrid,
    DEFAULT_MAX_TOKENS,
    apply_horizontal_pe,
    compute_stats,
    condense,
    enforce_budget,
)
from .dpo import (
    SceneDPOBatch,
    SceneDPOConfig,
    accuracy_metrics,
    finite_difference_check,
    grad,
    load_batch_file,
    loss,
)
from .errors import (
    BehindCameraError,
    CfgridError,
    DimMismatchError,
    EmptyCorpusError,
    EmptySceneError,
    InputError,
    InvalidDepthError,
    MissingReferenceError,
    NumericValidationError,
    ShapeMismatchError,
)
from .geometry import (
    CameraIntrinsics,
    CameraPose,
    DepthMap,
    FeatureMap,
    FramedCapture,
    PointFeatureCloud,
    back_project_frame,
    back_project_pixel,
    merge_clouds,
    project_point,
)
from .manifest import SceneManifest, load_manifest
from .pipeline import TokenizeResult, build_cloud, tokenize_cloud, tokenize_scene
from .positional import (
    DEFAULT_ROPE_BASE,
    FourierConfig,
    RoPEConfig,
    fourier_embed,
    rope_relative_check,
    rope_rotate,
)
from .synth import SynthSummary, generate_scene
from .templates import (
    TemplateReport,
    TemplateRule,
    TemplateRules,
    normalize_answer,
    top_k_coverage,
)
from .tensorio import read_tensor, read_tensors, write_tensor, write_tensors
from .tokenfile import TokenFileData
from .voxels import (
    AnchorRegion,
    DEFAULT_VOXEL_SIZE,
    VoxelGrid,
    VoxelGridConfig,
    grid_stats,
    inject_anchor,
    voxelize,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorRegion",
    "BehindCameraError",
    "CFGStats",
    "CFGToken",
    "CameraIntrinsics",
    "CameraPose",
    "CfgridError",
    "CondensedFeatureGrid",
    "DEFAULT_MAX_TOKENS",
    "DEFAULT_ROPE_BASE",
    "DEFAULT_VOXEL_SIZE",
    "DepthMap",
    "DimMismatchError",
    "EmptyCorpusError",
    "EmptySceneError",
    "FeatureMap",
    "FourierConfig",
    "FramedCapture",
    "InputError",
    "InvalidDepthError",
    "MissingReferenceError",
    "NumericValidationError",
    "PointFeatureCloud",
    "RoPEConfig",
    "SceneDPOBatch",
    "SceneDPOConfig",
    "SceneManifest",
    "ShapeMismatchError",
    "SynthSummary",
    "TemplateReport",
    "TemplateRule",
    "TemplateRules",
    "TokenFileData",
    "TokenizeResult",
    "VoxelGrid",
    "VoxelGridConfig",
    "accuracy_metrics",
    "apply_horizontal_pe",
    "back_project_frame",
    "back_project_pixel",
    "build_cloud",
    "compute_stats",
    "condense",
    "enforce_budget",
    "finite_difference_check",
    "fourier_embed",
    "generate_scene",
    "grad",
    "grid_stats",
    "inject_anchor",
    "load_batch_file",
    "load_manifest",
    "loss",
    "merge_clouds",
    "normalize_answer",
    "project_point",
    "read_tensor",
    "read_tensors",
    "rope_relative_check",
    "rope_rotate",
    "tokenize_cloud",
    "tokenize_scene",
    "top_k_coverage",
    "voxelize",
    "write_tensor",
    "write_tensors",
]
