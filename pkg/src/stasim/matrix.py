"""Dense integer matrices, seeded sparse generation, and matrix file I/O.

Operands are 8-bit signed integers, accumulator results 32-bit signed,
both held row-major. The on-disk format ("STAM") is:

    magic   b"STAM"                    4 bytes
    version 0x01                       1 byte
    dtype   0x01 = int8, 0x04 = int32  1 byte
    rows    unsigned 32-bit little-endian
    cols    unsigned 32-bit little-endian
    payload row-major elements, little-endian, one per dtype width

Random generation uses numpy's PCG64 bit generator wrapped in
np.random.Generator, so a given seed reproduces the same bytes on every
platform. Non-zero values are uniform over [-128, 127] with 0 excluded;
zero positions are what the sparsity profile controls.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from stasim.errors import ConfigError, DataFormatError, ShapeError

MAGIC = b"STAM"
FORMAT_VERSION = 1
MAX_DIM = 65535

_DTYPE_INT8 = 0x01
_DTYPE_INT32 = 0x04
_HEADER = struct.Struct("<4sBBII")


def _as_checked(data, dtype: np.dtype, name: str) -> np.ndarray:
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} has a zero dimension: {arr.shape}")
    if arr.shape[0] > MAX_DIM or arr.shape[1] > MAX_DIM:
        raise DataFormatError(f"{name} dimension overflow: {arr.shape} exceeds {MAX_DIM}")
    if arr.dtype != dtype:
        if not np.issubdtype(arr.dtype, np.integer):
            raise DataFormatError(f"{name} must hold integers, got dtype {arr.dtype}")
        info = np.iinfo(dtype)
        lo, hi = int(arr.min()), int(arr.max())
        if lo < info.min or hi > info.max:
            raise DataFormatError(
                f"{name} element out of {np.dtype(dtype).name} range: [{lo}, {hi}]"
            )
        arr = arr.astype(dtype)
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class Int8Matrix:
    """Immutable row-major matrix of 8-bit signed operands."""

    __slots__ = ("data",)

    def __init__(self, data):
        self.data = _as_checked(data, np.dtype(np.int8), "Int8Matrix")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Int8Matrix":
        return cls(np.zeros((rows, cols), dtype=np.int8))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.data))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Int8Matrix):
            return NotImplemented
        return bool(np.array_equal(self.data, other.data))

    __hash__ = None

    def __repr__(self) -> str:
        return f"Int8Matrix({self.rows}x{self.cols}, nnz={self.nnz})"


class AccMatrix:
    """Immutable row-major matrix of 32-bit signed accumulator results."""

    __slots__ = ("data",)

    def __init__(self, data):
        self.data = _as_checked(data, np.dtype(np.int32), "AccMatrix")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "AccMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int32))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, AccMatrix):
            return NotImplemented
        return bool(np.array_equal(self.data, other.data))

    __hash__ = None

    def __repr__(self) -> str:
        return f"AccMatrix({self.rows}x{self.cols})"


@dataclass(frozen=True)
class SparsityProfile:
    """How to place zeros when generating a matrix.

    kind "dense" draws every element non-zero; "random" zeroes an exact
    count of positions so the non-zero fraction equals `density` up to
    rounding; "dbb" bounds the non-zeros of every vertical
    `block_size`-row block of each column by `nnz_bound` (and fills
    each block to exactly that bound where it fits).
    """

    kind: str
    density: float | None = None
    block_size: int | None = None
    nnz_bound: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("dense", "random", "dbb"):
            raise ConfigError(f"unknown sparsity kind {self.kind!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.kind == "dense":
            if self.density is None:
                object.__setattr__(self, "density", 1.0)
            if self.density != 1.0:
                raise ConfigError("dense profile requires density 1.0")
            if self.block_size is not None or self.nnz_bound is not None:
                raise ConfigError("dense profile takes no block fields")
        elif self.kind == "random":
            if self.density is None or not 0.0 < self.density <= 1.0:
                raise ConfigError("random profile needs density in (0, 1]")
            if self.block_size is not None or self.nnz_bound is not None:
                raise ConfigError("random profile takes no block fields")
        else:
            b, n = self.block_size, self.nnz_bound
            if b is None or b < 1:
                raise ConfigError("dbb profile needs block_size >= 1")
            if n is None or not 1 <= n <= b:
                raise ConfigError("dbb profile needs 1 <= nnz_bound <= block_size")
            if self.density is None:
                object.__setattr__(self, "density", n / b)
            elif abs(self.density - n / b) > 1.0 / b:
                raise ConfigError(
                    f"dbb density {self.density} disagrees with nnz_bound/block_size = {n}/{b}"
                )

    @classmethod
    def dense(cls, seed: int = 0) -> "SparsityProfile":
        return cls(kind="dense", seed=seed)

    @classmethod
    def random(cls, density: float, seed: int = 0) -> "SparsityProfile":
        return cls(kind="random", density=density, seed=seed)

    @classmethod
    def dbb(
        cls, block_size: int, nnz_bound: int, seed: int = 0, density: float | None = None
    ) -> "SparsityProfile":
        return cls(
            kind="dbb", density=density, block_size=block_size, nnz_bound=nnz_bound, seed=seed
        )


def _nonzero_int8(rng: np.random.Generator, count: int) -> np.ndarray:
    # 255 equally likely values: [0,127] -> [-128,-1], [128,254] -> [1,127]
    raw = rng.integers(0, 255, size=count, dtype=np.int64)
    return np.where(raw < 128, raw - 128, raw - 127).astype(np.int8)


def generate(rows: int, cols: int, profile: SparsityProfile) -> Int8Matrix:
    """Generate a seeded random matrix under the given sparsity profile.

    Identical arguments produce identical matrices (PCG64 stream; zero
    positions are drawn first, then values in row-major position order).
    """
    if rows < 1 or cols < 1:
        raise ShapeError(f"zero dimension: {rows}x{cols}")
    if rows > MAX_DIM or cols > MAX_DIM:
        raise DataFormatError(f"dimension overflow: {rows}x{cols} exceeds {MAX_DIM}")
    rng = np.random.Generator(np.random.PCG64(profile.seed))
    if profile.kind == "dense":
        return Int8Matrix(_nonzero_int8(rng, rows * cols).reshape(rows, cols))
    if profile.kind == "random":
        total = rows * cols
        nnz = int(round(profile.density * total))
        flat = np.zeros(total, dtype=np.int8)
        pos = np.sort(rng.permutation(total)[:nnz])
        flat[pos] = _nonzero_int8(rng, nnz)
        return Int8Matrix(flat.reshape(rows, cols))
    b = profile.block_size
    mask = np.zeros((rows, cols), dtype=bool)
    for col in range(cols):
        for start in range(0, rows, b):
            blk_rows = min(b, rows - start)
            take = min(profile.nnz_bound, blk_rows)
            pick = rng.permutation(blk_rows)[:take]
            mask[start + pick, col] = True
    out = np.zeros((rows, cols), dtype=np.int8)
    out[mask] = _nonzero_int8(rng, int(mask.sum()))
    return Int8Matrix(out)


def serialize_matrix(matrix: Int8Matrix | AccMatrix) -> bytes:
    if isinstance(matrix, Int8Matrix):
        code, dt = _DTYPE_INT8, "<i1"
    elif isinstance(matrix, AccMatrix):
        code, dt = _DTYPE_INT32, "<i4"
    else:
        raise DataFormatError(f"cannot serialize {type(matrix).__name__}")
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, code, matrix.rows, matrix.cols)
    return header + matrix.data.astype(dt, copy=False).tobytes()


def deserialize_matrix(blob: bytes) -> Int8Matrix | AccMatrix:
    if len(blob) < _HEADER.size:
        raise DataFormatError(f"truncated header: {len(blob)} bytes")
    magic, version, code, rows, cols = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DataFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"unsupported version {version}")
    if code == _DTYPE_INT8:
        dt, cls = np.dtype("<i1"), Int8Matrix
    elif code == _DTYPE_INT32:
        dt, cls = np.dtype("<i4"), AccMatrix
    else:
        raise DataFormatError(f"unknown dtype code 0x{code:02x}")
    if rows < 1 or cols < 1:
        raise DataFormatError(f"zero dimension in header: {rows}x{cols}")
    if rows > MAX_DIM or cols > MAX_DIM:
        raise DataFormatError(f"dimension overflow in header: {rows}x{cols}")
    expected = _HEADER.size + rows * cols * dt.itemsize
    if len(blob) != expected:
        raise DataFormatError(f"payload size {len(blob)} != expected {expected}")
    payload = np.frombuffer(blob, dtype=dt, offset=_HEADER.size).reshape(rows, cols)
    return cls(payload)


def store_matrix(matrix: Int8Matrix | AccMatrix, path) -> None:
    Path(path).write_bytes(serialize_matrix(matrix))


def load_matrix(path) -> Int8Matrix | AccMatrix:
    return deserialize_matrix(Path(path).read_bytes())


def matrix_sha256(matrix: Int8Matrix | AccMatrix) -> str:
    """Checksum of the canonical serialized form (used in reports)."""
    return hashlib.sha256(serialize_matrix(matrix)).hexdigest()
