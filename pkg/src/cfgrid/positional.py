"""Position encodings: rotary channel-pair rotation and Fourier features.

Vertical (height) positions enter through a rotary encoding: the
feature vector is split into d/2 channel pairs and pair i is rotated
by angle p * theta_i with theta_i = base^(-2i/d), i = 1..d/2. The
rotation preserves norms and encodes relative offsets: the inner
product of two rotated vectors depends only on the position delta.

Horizontal (x, y) positions enter through Fourier features

    F(p) = [cos(2 pi W p) ; sin(2 pi W p)]

with a fixed Gaussian projection W of shape (d/2, n). F is scaled by
1/sqrt(d) and passed through a two-layer MLP whose output is added to
the token feature. Weights are never drawn silently: they are loaded
from a file or generated from a recorded seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .arrays import readonly as _readonly
from .errors import NumericValidationError, ShapeMismatchError

DEFAULT_ROPE_BASE = 10000.0


@dataclass(frozen=True)
class RoPEConfig:
    """Rotary encoding over an even number of channels."""

    dim: int
    base: float = DEFAULT_ROPE_BASE

    def __post_init__(self):
        if self.dim <= 0 or self.dim % 2 != 0:
            raise NumericValidationError(f"rotary dim must be positive and even, got {self.dim}")
        if not np.isfinite(self.base) or self.base <= 1.0:
            raise NumericValidationError(f"rotary base must exceed 1, got {self.base}")

    def frequencies(self) -> np.ndarray:
        """theta_i = base^(-2i/d) for i = 1..d/2."""
        i = np.arange(1, self.dim // 2 + 1, dtype=np.float64)
        return self.base ** (-2.0 * i / self.dim)


def rope_rotate(x: np.ndarray, p, cfg: RoPEConfig) -> np.ndarray:
    """Rotate channel pairs of x by position-proportional angles.

    x has shape (..., d); p is a scalar or an array broadcastable
    against the leading shape. Pair i = (x[2i-2], x[2i-1]) (1-based)
    turns by p * theta_i. Purely elementwise arithmetic, so batched
    calls agree bitwise with per-vector calls.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != cfg.dim:
        raise ShapeMismatchError(f"vector dim {x.shape[-1]} != config dim {cfg.dim}")
    angles = np.multiply.outer(np.asarray(p, dtype=np.float64), cfg.frequencies())
    c = np.cos(angles)
    s = np.sin(angles)
    even = x[..., 0::2]
    odd = x[..., 1::2]
    out = np.empty_like(x)
    out[..., 0::2] = even * c - odd * s
    out[..., 1::2] = even * s + odd * c
    return out


def rope_relative_check(x: np.ndarray, y: np.ndarray, p1: float, p2: float, cfg: RoPEConfig) -> float:
    """Residual |<R_p1 x, R_p2 y> - <x, R_(p2-p1) y>|.

    The rotary construction makes this zero in exact arithmetic; in
    floating point it stays below 1e-6 * ||x|| * ||y||.
    """
    lhs = float(np.dot(rope_rotate(x, p1, cfg), rope_rotate(y, p2, cfg)))
    rhs = float(np.dot(np.asarray(x, dtype=np.float64), rope_rotate(y, p2 - p1, cfg)))
    return abs(lhs - rhs)


def _gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / np.sqrt(2.0)))


@dataclass(frozen=True)
class FourierConfig:
    """Projection matrix and MLP weights for horizontal embeddings.

    The MLP is two affine layers with hidden width d and a GELU
    between them: out = w2 @ gelu(w1 @ f + b1) + b2. bypass_activation
    skips the GELU; it exists so tests can set identity weights and
    check the surrounding arithmetic exactly.
    """

    input_dim: int
    dim: int
    W: np.ndarray
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    bypass_activation: bool = False

    def __post_init__(self):
        n, d = self.input_dim, self.dim
        if d <= 0 or d % 2 != 0:
            raise NumericValidationError(f"embedding dim must be positive and even, got {d}")
        if n <= 0:
            raise NumericValidationError(f"position dim must be positive, got {n}")
        arrays = {}
        expected = {
            "W": (d // 2, n),
            "w1": (d, d),
            "b1": (d,),
            "w2": (d, d),
            "b2": (d,),
        }
        for name, shape in expected.items():
            a = np.asarray(getattr(self, name), dtype=np.float64)
            if a.shape != shape:
                raise ShapeMismatchError(f"{name} must have shape {shape}, got {a.shape}")
            if not np.isfinite(a).all():
                raise NumericValidationError(f"{name} contains non-finite values")
            arrays[name] = _readonly(a)
        for name, a in arrays.items():
            object.__setattr__(self, name, a)

    @classmethod
    def from_seed(cls, dim: int, input_dim: int = 2, seed: int = 0) -> "FourierConfig":
        """Deterministic weights from a recorded seed.

        W is unit Gaussian; the MLP layers are Gaussian scaled by
        1/sqrt(d) so outputs stay order-one, with zero biases.
        """
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(dim)
        return cls(
            input_dim=input_dim,
            dim=dim,
            W=rng.standard_normal((dim // 2, input_dim)),
            w1=rng.standard_normal((dim, dim)) * scale,
            b1=np.zeros(dim),
            w2=rng.standard_normal((dim, dim)) * scale,
            b2=np.zeros(dim),
        )

    @classmethod
    def identity_test(cls, dim: int, input_dim: int = 2) -> "FourierConfig":
        """W = 0 and identity-affine MLP with the GELU bypassed."""
        eye = np.eye(dim)
        zeros = np.zeros(dim)
        return cls(
            input_dim=input_dim,
            dim=dim,
            W=np.zeros((dim // 2, input_dim)),
            w1=eye,
            b1=zeros,
            w2=eye,
            b2=zeros,
            bypass_activation=True,
        )

    @classmethod
    def zero_output(cls, dim: int, input_dim: int = 2, seed: int = 0) -> "FourierConfig":
        """Arbitrary W but an all-zero final layer: embedding is a no-op."""
        rng = np.random.default_rng(seed)
        return cls(
            input_dim=input_dim,
            dim=dim,
            W=rng.standard_normal((dim // 2, input_dim)),
            w1=rng.standard_normal((dim, dim)),
            b1=rng.standard_normal(dim),
            w2=np.zeros((dim, dim)),
            b2=np.zeros(dim),
        )

    @classmethod
    def from_tensors(cls, tensors: dict[str, np.ndarray], bypass_activation: bool = False) -> "FourierConfig":
        """Build from named weight entries W, mlp.w1, mlp.b1, mlp.w2, mlp.b2."""
        required = ("W", "mlp.w1", "mlp.b1", "mlp.w2", "mlp.b2")
        missing = [name for name in required if name not in tensors]
        if missing:
            raise ShapeMismatchError(f"weight file missing entries: {missing}")
        W = np.asarray(tensors["W"])
        if W.ndim != 2:
            raise ShapeMismatchError(f"W must be rank 2, got rank {W.ndim}")
        return cls(
            input_dim=W.shape[1],
            dim=W.shape[0] * 2,
            W=W,
            w1=tensors["mlp.w1"],
            b1=tensors["mlp.b1"],
            w2=tensors["mlp.w2"],
            b2=tensors["mlp.b2"],
            bypass_activation=bypass_activation,
        )

    def to_tensors(self) -> dict[str, np.ndarray]:
        return {
            "W": self.W,
            "mlp.w1": self.w1,
            "mlp.b1": self.b1,
            "mlp.w2": self.w2,
            "mlp.b2": self.b2,
        }


def fourier_embed(x: np.ndarray, p: np.ndarray, cfg: FourierConfig) -> np.ndarray:
    """x + MLP(F(p) / sqrt(d)) with F(p) = [cos(2 pi W p) ; sin(2 pi W p)].

    x has shape (d,) or (N, d); p correspondingly (n,) or (N, n). The
    positional term depends only on p, so fourier_embed(x, p) equals
    x + fourier_embed(0, p) exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if x.shape[-1] != cfg.dim:
        raise ShapeMismatchError(f"feature dim {x.shape[-1]} != config dim {cfg.dim}")
    if p.shape[-1] != cfg.input_dim:
        raise ShapeMismatchError(f"position dim {p.shape[-1]} != config dim {cfg.input_dim}")
    if x.ndim != p.ndim or x.shape[:-1] != p.shape[:-1]:
        raise ShapeMismatchError(f"feature shape {x.shape} and position shape {p.shape} disagree")

    phase = 2.0 * np.pi * (p @ cfg.W.T)
    f = np.concatenate([np.cos(phase), np.sin(phase)], axis=-1) / np.sqrt(cfg.dim)
    h = f @ cfg.w1.T + cfg.b1
    if not cfg.bypass_activation:
        h = _gelu(h)
    return x + (h @ cfg.w2.T + cfg.b2)
