"""Closed-form preference loss over answer and scene contrasts.

Each sample carries three policy log-probabilities for a question q:

    lp_pos      log pi(a+ | s+, q)   positive answer, true scene
    lp_negans   log pi(a- | s+, q)   corrupted answer, true scene
    lp_negscene log pi(a+ | s-, q)   positive answer, mismatched scene

with optional reference-model counterparts. The loss combines two
sigmoid contrasts and a likelihood term:

    z_a = beta_a * [(lp_pos - ref_pos) - (lp_negans   - ref_negans)]
    z_s = beta_s * [(lp_pos - ref_pos) - (lp_negscene - ref_negscene)]
    L_a = mean(-log sigmoid(z_a))        L_s = mean(-log sigmoid(z_s))
    L_nll = mean(-lp_pos)
    total = w_a * L_a + w_s * L_s + L_nll

In reference-free mode (the default) the reference terms are zero.
-log sigmoid(z) is evaluated as softplus(-z) = log(1 + exp(-z)) so
large |z| cannot overflow. Gradients with respect to the three
log-probabilities are analytic; the scene and answer negatives only
ever push probabilities down (nonnegative gradients), the positive
only up.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .arrays import readonly as _readonly
from .errors import InputError, MissingReferenceError, NumericValidationError

DEFAULT_W_A = 0.5
DEFAULT_W_S = 0.5
DEFAULT_BETA_A = 0.2
DEFAULT_BETA_S = 0.03


@dataclass(frozen=True)
class SceneDPOConfig:
    """Loss weights, contrast temperatures, and reference mode."""

    w_a: float = DEFAULT_W_A
    w_s: float = DEFAULT_W_S
    beta_a: float = DEFAULT_BETA_A
    beta_s: float = DEFAULT_BETA_S
    reference_free: bool = True

    def __post_init__(self):
        if not all(np.isfinite(v) for v in (self.w_a, self.w_s, self.beta_a, self.beta_s)):
            raise NumericValidationError("loss hyperparameters must be finite")
        if self.w_a < 0 or self.w_s < 0:
            raise NumericValidationError(
                f"contrast weights must be nonnegative, got w_a={self.w_a} w_s={self.w_s}"
            )
        if self.beta_a <= 0 or self.beta_s <= 0:
            raise NumericValidationError(
                f"temperatures must be positive, got beta_a={self.beta_a} beta_s={self.beta_s}"
            )


def _validate_lp(name: str, values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if not np.isfinite(v).all():
        raise NumericValidationError(f"{name} contains non-finite values")
    if (v > 0).any():
        raise NumericValidationError(f"{name} contains positive log-probabilities")
    return _readonly(v)


@dataclass(frozen=True)
class SceneDPOBatch:
    """Per-sample log-probabilities for the contrast quadruple.

    Reference fields are optional; referenced-mode evaluation requires
    all three. All log-probabilities must be finite and <= 0.
    """

    lp_pos: np.ndarray
    lp_negans: np.ndarray
    lp_negscene: np.ndarray
    ref_pos: np.ndarray | None = None
    ref_negans: np.ndarray | None = None
    ref_negscene: np.ndarray | None = None

    def __post_init__(self):
        names = ("lp_pos", "lp_negans", "lp_negscene", "ref_pos", "ref_negans", "ref_negscene")
        lengths = set()
        for name in names:
            value = getattr(self, name)
            if value is None:
                continue
            v = _validate_lp(name, value)
            lengths.add(len(v))
            object.__setattr__(self, name, v)
        if len(lengths) != 1:
            raise NumericValidationError(f"batch fields disagree on length: {sorted(lengths)}")
        if len(self.lp_pos) == 0:
            raise NumericValidationError("batch must contain at least one sample")

    def __len__(self) -> int:
        return len(self.lp_pos)

    def has_references(self) -> bool:
        return all(
            getattr(self, name) is not None
            for name in ("ref_pos", "ref_negans", "ref_negscene")
        )


def _references(batch: SceneDPOBatch, cfg: SceneDPOConfig):
    """Reference log-probs as arrays, or zeros in reference-free mode."""
    if cfg.reference_free:
        return 0.0, 0.0, 0.0
    if not batch.has_references():
        missing = [
            name
            for name in ("ref_pos", "ref_negans", "ref_negscene")
            if getattr(batch, name) is None
        ]
        raise MissingReferenceError(
            f"referenced mode requires reference log-probabilities: missing {missing}"
        )
    return batch.ref_pos, batch.ref_negans, batch.ref_negscene


def _margins(lp_pos, lp_negans, lp_negscene, refs, cfg: SceneDPOConfig):
    """Per-sample contrast logits (z_a, z_s)."""
    ref_pos, ref_negans, ref_negscene = refs
    z_a = cfg.beta_a * ((lp_pos - ref_pos) - (lp_negans - ref_negans))
    z_s = cfg.beta_s * ((lp_pos - ref_pos) - (lp_negscene - ref_negscene))
    return z_a, z_s


def _evaluate(lp_pos, lp_negans, lp_negscene, refs, cfg: SceneDPOConfig):
    z_a, z_s = _margins(lp_pos, lp_negans, lp_negscene, refs, cfg)
    # -log sigmoid(z) = log(1 + exp(-z)), stable via logaddexp
    l_a = float(np.mean(np.logaddexp(0.0, -z_a)))
    l_s = float(np.mean(np.logaddexp(0.0, -z_s)))
    l_nll = float(np.mean(-lp_pos))
    total = cfg.w_a * l_a + cfg.w_s * l_s + l_nll
    return total, l_a, l_s, l_nll


def loss(batch: SceneDPOBatch, cfg: SceneDPOConfig | None = None) -> tuple[float, float, float, float]:
    """(total, L_a, L_s, L_nll) averaged over the batch."""
    if cfg is None:
        cfg = SceneDPOConfig()
    refs = _references(batch, cfg)
    return _evaluate(batch.lp_pos, batch.lp_negans, batch.lp_negscene, refs, cfg)


def grad(batch: SceneDPOBatch, cfg: SceneDPOConfig | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-sample d(total)/d(lp_pos), d/d(lp_negans), d/d(lp_negscene).

    d/dz of -log sigmoid(z) is -sigmoid(-z); references are constants,
    so referenced and reference-free modes share the same form. Each
    mean contributes a 1/N factor.
    """
    if cfg is None:
        cfg = SceneDPOConfig()
    refs = _references(batch, cfg)
    z_a, z_s = _margins(batch.lp_pos, batch.lp_negans, batch.lp_negscene, refs, cfg)
    n = len(batch)
    pull_a = cfg.w_a * cfg.beta_a * expit(-z_a)
    pull_s = cfg.w_s * cfg.beta_s * expit(-z_s)
    d_pos = -(pull_a + pull_s + 1.0) / n
    d_negans = pull_a / n
    d_negscene = pull_s / n
    return d_pos, d_negans, d_negscene


def finite_difference_check(
    batch: SceneDPOBatch, cfg: SceneDPOConfig | None = None, step: float = 1e-5
) -> float:
    """Max abs deviation between analytic and central-difference grads.

    Perturbs every sample's three log-probabilities one at a time
    (2 * 3 * N loss evaluations); intended for verification, not
    training loops. Probe points may nudge a log-probability slightly
    above zero, which is fine: the loss is analytic there.
    """
    if cfg is None:
        cfg = SceneDPOConfig()
    refs = _references(batch, cfg)
    analytic = grad(batch, cfg)
    fields = [batch.lp_pos, batch.lp_negans, batch.lp_negscene]
    worst = 0.0
    for f_idx in range(3):
        for n in range(len(batch)):
            values = {}
            for sign in (1.0, -1.0):
                probe = [f.copy() for f in fields]
                probe[f_idx][n] += sign * step
                values[sign] = _evaluate(*probe, refs, cfg)[0]
            numeric = (values[1.0] - values[-1.0]) / (2.0 * step)
            worst = max(worst, abs(numeric - analytic[f_idx][n]))
    return float(worst)


def accuracy_metrics(batch: SceneDPOBatch) -> tuple[float, float]:
    """Fractions of samples whose positive strictly beats each negative.

    Ties count as incorrect.
    """
    answer_acc = float(np.mean(batch.lp_pos > batch.lp_negans))
    scene_acc = float(np.mean(batch.lp_pos > batch.lp_negscene))
    return answer_acc, scene_acc


_REQUIRED_FIELDS = ("lp_pos", "lp_negans", "lp_negscene")
_REFERENCE_FIELDS = ("ref_pos", "ref_negans", "ref_negscene")


def load_batch_file(path: str | Path) -> SceneDPOBatch:
    """Parse a batch file: one JSON record per line.

    Required fields lp_pos, lp_negans, lp_negscene; the three ref_*
    fields are optional but must appear on all lines or none. Errors
    name the offending line.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read batch file {path}: {exc}") from exc
    columns: dict[str, list[float]] = {f: [] for f in _REQUIRED_FIELDS + _REFERENCE_FIELDS}
    n_records = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise InputError(f"{path}:{lineno}: record must be a JSON object")
        for field_name in _REQUIRED_FIELDS:
            if field_name not in record:
                raise InputError(f"{path}:{lineno}: missing field {field_name!r}")
        has_refs = all(f in record for f in _REFERENCE_FIELDS)
        if not has_refs and any(f in record for f in _REFERENCE_FIELDS):
            raise InputError(
                f"{path}:{lineno}: reference fields must be given all together"
            )
        if n_records and has_refs != (len(columns["ref_pos"]) == n_records):
            raise InputError(
                f"{path}:{lineno}: reference fields must appear on every line or none"
            )
        for field_name in _REQUIRED_FIELDS + (_REFERENCE_FIELDS if has_refs else ()):
            value = record[field_name]
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise InputError(f"{path}:{lineno}: field {field_name!r} must be a number")
            columns[field_name].append(float(value))
        n_records += 1
    if n_records == 0:
        raise InputError(f"batch file {path} contains no records")
    has_refs = len(columns["ref_pos"]) == n_records
    return SceneDPOBatch(
        lp_pos=np.array(columns["lp_pos"]),
        lp_negans=np.array(columns["lp_negans"]),
        lp_negscene=np.array(columns["lp_negscene"]),
        ref_pos=np.array(columns["ref_pos"]) if has_refs else None,
        ref_negans=np.array(columns["ref_negans"]) if has_refs else None,
        ref_negscene=np.array(columns["ref_negscene"]) if has_refs else None,
    )
