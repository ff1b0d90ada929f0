"""Serialized scene tokens.

Layout, little-endian:

    magic    4 bytes  "CFTK"
    version  u32      currently 1
    d        u32      feature dim
    count    u32      token records that follow
    voxel_size            f64
    origin                3 x f64
    voxel_total           u64
    retained_voxel_total  u64
    compression_rate      f64
    preservation_rate     f64
    record   repeated count times:
        i, j        i32 column index
        x, y        f64 world center, meters
        anchored    u8
        source_voxel_count u32
        features    d x f64

Readers validate that the header agrees with the body: the stated
rates must equal their recomputation from the voxel totals and token
records bit-for-bit, and the retained total must equal the sum of the
record counts. Writing a read file back is byte-identical.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .arrays import readonly as _readonly
from .condense import CFGStats, CondensedFeatureGrid
from .errors import InputError, NumericValidationError
from .voxels import VoxelGrid

MAGIC = b"CFTK"
VERSION = 1

_HEADER = struct.Struct("<III")  # version, d, count (after magic)
_HEADER_SCALARS = struct.Struct("<4d QQ 2d")  # voxel_size, origin, totals, rates
_RECORD_FIXED = struct.Struct("<ii dd B I")


@dataclass(frozen=True)
class TokenFileData:
    """In-memory form of a token file."""

    dim: int
    voxel_size: float
    origin: np.ndarray
    voxel_total: int
    retained_voxel_total: int
    compression_rate: float
    preservation_rate: float
    col_indices: np.ndarray
    xy: np.ndarray
    anchored: np.ndarray
    counts: np.ndarray
    features: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", _readonly(np.asarray(self.origin, np.float64).reshape(3)))
        object.__setattr__(self, "col_indices", _readonly(np.asarray(self.col_indices, np.int64).reshape(-1, 2)))
        object.__setattr__(self, "xy", _readonly(np.asarray(self.xy, np.float64).reshape(-1, 2)))
        object.__setattr__(self, "anchored", _readonly(np.asarray(self.anchored, bool).reshape(-1)))
        object.__setattr__(self, "counts", _readonly(np.asarray(self.counts, np.int64).reshape(-1)))
        object.__setattr__(self, "features", _readonly(np.asarray(self.features, np.float64).reshape(-1, self.dim)))

    @property
    def token_count(self) -> int:
        return len(self.col_indices)

    @classmethod
    def from_condensed(
        cls, grid: VoxelGrid, cfg: CondensedFeatureGrid, stats: CFGStats
    ) -> "TokenFileData":
        return cls(
            dim=cfg.dim,
            voxel_size=grid.voxel_size,
            origin=grid.origin,
            voxel_total=cfg.voxel_total,
            retained_voxel_total=cfg.retained_voxel_total,
            compression_rate=stats.compression_rate,
            preservation_rate=stats.preservation_rate,
            col_indices=cfg.col_indices,
            xy=cfg.xy,
            anchored=cfg.anchored,
            counts=cfg.counts,
            features=cfg.features,
        )

    def validate(self) -> None:
        """Check header/body consistency; raises on corruption."""
        if self.voxel_total <= 0:
            raise NumericValidationError("token file declares zero voxels")
        if self.retained_voxel_total > self.voxel_total:
            raise NumericValidationError(
                f"retained voxels {self.retained_voxel_total} exceed total {self.voxel_total}"
            )
        if self.token_count and self.counts.min() < 1:
            raise NumericValidationError("token records must cover at least one voxel")
        body_retained = int(self.counts.sum())
        if body_retained != self.retained_voxel_total:
            raise NumericValidationError(
                f"header says {self.retained_voxel_total} retained voxels, "
                f"records sum to {body_retained}"
            )
        compression = self.token_count / self.voxel_total
        preservation = self.retained_voxel_total / self.voxel_total
        if compression != self.compression_rate:
            raise NumericValidationError(
                f"header compression_rate {self.compression_rate!r} != "
                f"recomputed {compression!r}"
            )
        if preservation != self.preservation_rate:
            raise NumericValidationError(
                f"header preservation_rate {self.preservation_rate!r} != "
                f"recomputed {preservation!r}"
            )
        if not (np.isfinite(self.features).all() and np.isfinite(self.xy).all()):
            raise NumericValidationError("token file contains non-finite values")

    def to_bytes(self) -> bytes:
        chunks = [
            MAGIC,
            _HEADER.pack(VERSION, self.dim, self.token_count),
            _HEADER_SCALARS.pack(
                self.voxel_size,
                *self.origin,
                self.voxel_total,
                self.retained_voxel_total,
                self.compression_rate,
                self.preservation_rate,
            ),
        ]
        for n in range(self.token_count):
            chunks.append(
                _RECORD_FIXED.pack(
                    int(self.col_indices[n, 0]),
                    int(self.col_indices[n, 1]),
                    float(self.xy[n, 0]),
                    float(self.xy[n, 1]),
                    int(self.anchored[n]),
                    int(self.counts[n]),
                )
            )
            chunks.append(np.ascontiguousarray(self.features[n], dtype="<f8").tobytes())
        return b"".join(chunks)

    def write(self, path: str | Path) -> None:
        self.validate()
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def read(cls, path: str | Path) -> "TokenFileData":
        path = Path(path)
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise InputError(f"cannot read token file {path}: {exc}") from exc
        pos = 0

        def take(n: int) -> bytes:
            nonlocal pos
            if pos + n > len(data):
                raise InputError(f"truncated token file {path}")
            out = data[pos : pos + n]
            pos += n
            return out

        if take(4) != MAGIC:
            raise InputError(f"{path} is not a token file (bad magic)")
        version, dim, count = _HEADER.unpack(take(_HEADER.size))
        if version != VERSION:
            raise InputError(f"{path} has unsupported version {version}")
        if dim <= 0:
            raise InputError(f"{path} declares non-positive feature dim {dim}")
        vs, ox, oy, oz, total, retained, comp, pres = _HEADER_SCALARS.unpack(
            take(_HEADER_SCALARS.size)
        )
        cols = np.zeros((count, 2), np.int64)
        xy = np.zeros((count, 2))
        anchored = np.zeros(count, bool)
        counts = np.zeros(count, np.int64)
        features = np.zeros((count, dim))
        for n in range(count):
            i, j, x, y, flag, c = _RECORD_FIXED.unpack(take(_RECORD_FIXED.size))
            cols[n] = (i, j)
            xy[n] = (x, y)
            anchored[n] = bool(flag)
            counts[n] = c
            features[n] = np.frombuffer(take(8 * dim), dtype="<f8")
        if pos != len(data):
            raise InputError(f"{path} has {len(data) - pos} trailing bytes")
        out = cls(
            dim=dim,
            voxel_size=vs,
            origin=np.array([ox, oy, oz]),
            voxel_total=total,
            retained_voxel_total=retained,
            compression_rate=comp,
            preservation_rate=pres,
            col_indices=cols,
            xy=xy,
            anchored=anchored,
            counts=counts,
            features=features,
        )
        out.validate()
        return out
