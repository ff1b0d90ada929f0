"""Error hierarchy shared by the library and the CLI.

Every error carries a stable ``code`` string so that callers (including
out-of-process consumers of the CLI) can react without parsing messages,
and an ``exit_code`` used by the command-line front end:

    1  unreadable or ill-formed input
    2  empty scene (no occupied voxels)
    3  numeric validation failure
"""


class CfgridError(Exception):
    """Base class for all library errors."""

    code = "error"
    exit_code = 1


class InputError(CfgridError):
    """Unreadable, truncated, or ill-formed input file."""

    code = "input-error"


class InvalidDepthError(CfgridError):
    """Depth value is zero, negative, or non-finite."""

    code = "invalid-depth"


class BehindCameraError(CfgridError):
    """Point has non-positive camera-frame depth."""

    code = "behind-camera"


class DimMismatchError(CfgridError):
    """Feature dimensions of two operands disagree."""

    code = "dim-mismatch"


class ShapeMismatchError(CfgridError):
    """Array shapes are inconsistent with the configuration."""

    code = "shape-mismatch"


class MissingReferenceError(CfgridError):
    """Referenced mode requested but reference log-probs are absent."""

    code = "missing-reference"


class EmptySceneError(CfgridError):
    """The scene produced no occupied voxels."""

    code = "empty-scene"
    exit_code = 2


class EmptyCorpusError(CfgridError):
    """The answer corpus contains no entries."""

    code = "empty-corpus"


class NumericValidationError(CfgridError):
    """A numeric invariant failed (pose orthonormality, non-finite
    values, or a stored statistic that does not match recomputation)."""

    code = "numeric-validation"
    exit_code = 3
