"""Binary container for named numeric tensors.

Layout, all integers little-endian:

    magic   4 bytes  "CFGT"
    version u32      currently 1
    count   u32      number of entries
    entry   repeated count times:
        name_len u16, name utf-8 bytes
        dtype    u8   0 = float32 LE, 1 = float64 LE
        rank     u8
        dims     rank x u32
        payload  row-major values

The format is deliberately minimal so any language can parse it with a
few dozen lines. Writes are deterministic: entry order follows the
mapping's insertion order and payloads are contiguous row-major.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import InputError

MAGIC = b"CFGT"
VERSION = 1

_DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}


def write_tensors(path: str | Path, tensors: dict[str, np.ndarray]) -> None:
    """Write named tensors; float32 arrays keep their width, everything
    else is stored as float64."""
    path = Path(path)
    chunks = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, array in tensors.items():
        if not name:
            raise InputError("tensor names must be nonempty")
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise InputError(f"tensor name too long: {name[:32]}...")
        a = np.asarray(array)
        # tobytes() always emits C order, and asarray keeps 0-d shapes
        # where ascontiguousarray would promote them to 1-d
        if a.dtype == np.float32:
            a = np.asarray(a, dtype="<f4")
            code = 0
        else:
            a = np.asarray(a, dtype="<f8")
            code = 1
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<BB", code, a.ndim))
        chunks.append(struct.pack(f"<{a.ndim}I", *a.shape))
        chunks.append(a.tobytes())
    path.write_bytes(b"".join(chunks))


class _Cursor:
    def __init__(self, path: Path, data: bytes):
        self.path = path
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise InputError(f"truncated tensor file {self.path}")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def read_tensors(path: str | Path) -> dict[str, np.ndarray]:
    """Read a tensor container back into {name: array}, insertion order."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read tensor file {path}: {exc}") from exc
    cur = _Cursor(path, data)
    if cur.take(4) != MAGIC:
        raise InputError(f"{path} is not a tensor file (bad magic)")
    version, count = cur.unpack("<II")
    if version != VERSION:
        raise InputError(f"{path} has unsupported version {version}")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = cur.unpack("<H")
        try:
            name = cur.take(name_len).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"{path} contains an undecodable tensor name") from exc
        code, rank = cur.unpack("<BB")
        if code not in _DTYPE_CODES:
            raise InputError(f"{path} entry {name!r} has unknown dtype code {code}")
        dims = cur.unpack(f"<{rank}I") if rank else ()
        n_values = int(np.prod(dims, dtype=np.int64)) if rank else 1
        dtype = _DTYPE_CODES[code]
        payload = cur.take(n_values * dtype.itemsize)
        if name in tensors:
            raise InputError(f"{path} contains duplicate tensor name {name!r}")
        tensors[name] = np.frombuffer(payload, dtype=dtype).reshape(dims).copy()
    if cur.pos != len(data):
        raise InputError(f"{path} has {len(data) - cur.pos} trailing bytes")
    return tensors


def write_tensor(path: str | Path, array: np.ndarray, name: str = "data") -> None:
    """Write a single unnamed-by-convention tensor."""
    write_tensors(path, {name: array})


def read_tensor(path: str | Path) -> np.ndarray:
    """Read a file expected to hold exactly one tensor."""
    tensors = read_tensors(path)
    if len(tensors) != 1:
        raise InputError(f"{path} holds {len(tensors)} tensors, expected exactly 1")
    return next(iter(tensors.values()))
