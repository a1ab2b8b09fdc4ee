"""Density-bound block (DBB) sparse weight format: codec, pruner, I/O.

Every column of a weight matrix is split into vertical blocks of
`block_size` consecutive rows (the reduction dimension). A block stores
a `block_size`-bit occupancy mask plus exactly `nnz_bound` 8-bit value
slots: the block's non-zero values in ascending element order, zero
padded. A matrix is DBB-encodable iff no block holds more than
`nnz_bound` non-zeros. Fixed slot count means fixed block size on disk
and a fixed number of physical multiplier lanes in hardware.

In memory a DBBMatrix keeps, per (column, block):

    values  int8  [cols, n_blocks, nnz_bound]   live slots first
    indices uint8 [cols, n_blocks, nnz_bound]   in-block element index per live slot
    counts  uint8 [cols, n_blocks]              number of live slots

The on-disk format ("STAD") is:

    magic      b"STAD"              4 bytes
    version    0x01                 1 byte
    block_size                      1 byte
    nnz_bound                       1 byte
    rows       u32 little-endian    (unpadded row count)
    cols       u32 little-endian
    blocks     column-major: for each column, for each block top to
               bottom: ceil(block_size/8) mask bytes (bit k, LSB first
               within each byte, byte j covering elements 8j..8j+7,
               marks element k non-zero), then nnz_bound value bytes.

The final block of a column may cover rows past the matrix edge; those
padded elements are never marked in the mask. Padding still costs
storage, which the footprint report charges.
"""

from __future__ import annotations

import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from stasim.errors import BoundViolation, ConfigError, DataFormatError
from stasim.matrix import MAX_DIM, Int8Matrix

MAGIC = b"STAD"
FORMAT_VERSION = 1
MAX_BLOCK = 255

_HEADER = struct.Struct("<4sBBBII")


def _check_bn(block_size: int, nnz_bound: int) -> None:
    if not 1 <= block_size <= MAX_BLOCK:
        raise ConfigError(f"block_size must be in [1, {MAX_BLOCK}], got {block_size}")
    if not 1 <= nnz_bound <= block_size:
        raise ConfigError(f"nnz_bound must be in [1, block_size], got {nnz_bound}")


def _blocks_of(dense: np.ndarray, block_size: int) -> np.ndarray:
    """View (rows, cols) as (cols, n_blocks, block_size), zero padded."""
    rows, cols = dense.shape
    n_blocks = -(-rows // block_size)
    pad = n_blocks * block_size - rows
    if pad:
        dense = np.vstack([dense, np.zeros((pad, cols), dtype=dense.dtype)])
    return dense.T.reshape(cols, n_blocks, block_size)


class DBBMatrix:
    """A weight matrix compressed under a per-block density bound."""

    __slots__ = ("rows", "cols", "block_size", "nnz_bound", "values", "indices", "counts")

    def __init__(self, rows, cols, block_size, nnz_bound, values, indices, counts):
        _check_bn(block_size, nnz_bound)
        if rows < 1 or cols < 1 or rows > MAX_DIM or cols > MAX_DIM:
            raise DataFormatError(f"bad dimensions {rows}x{cols}")
        n_blocks = -(-rows // block_size)
        values = np.ascontiguousarray(values, dtype=np.int8)
        indices = np.ascontiguousarray(indices, dtype=np.uint8)
        counts = np.ascontiguousarray(counts, dtype=np.uint8)
        shape = (cols, n_blocks, nnz_bound)
        if values.shape != shape or indices.shape != shape or counts.shape != shape[:2]:
            raise DataFormatError(
                f"slot array shapes {values.shape}/{indices.shape}/{counts.shape} "
                f"do not match {shape}"
            )
        if counts.max(initial=0) > nnz_bound:
            raise DataFormatError("block count exceeds nnz_bound")
        slot = np.arange(nnz_bound)
        live = slot < counts[..., None]
        if np.any(values[live] == 0):
            raise DataFormatError("live slot holds a zero value")
        if np.any(values[~live] != 0) or np.any(indices[~live] != 0):
            raise DataFormatError("dead slot is not zero padded")
        if np.any(indices[live] >= block_size):
            raise DataFormatError("slot index outside block")
        # ascending element order within each block, and inside the matrix
        if nnz_bound > 1:
            later = indices[..., 1:]
            earlier = indices[..., :-1]
            both_live = slot[1:] < counts[..., None]
            if np.any((later <= earlier) & both_live):
                raise DataFormatError("slot indices not strictly ascending")
        block_base = np.arange(n_blocks) * block_size
        abs_rows = block_base[None, :, None] + indices.astype(np.int64)
        if np.any(abs_rows[live] >= rows):
            raise DataFormatError("live slot points at a padded row")
        self.rows = int(rows)
        self.cols = int(cols)
        self.block_size = int(block_size)
        self.nnz_bound = int(nnz_bound)
        for arr in (values, indices, counts):
            arr.setflags(write=False)
        self.values = values
        self.indices = indices
        self.counts = counts

    @property
    def n_blocks(self) -> int:
        return -(-self.rows // self.block_size)

    def block_mask(self, col: int, block: int) -> int:
        """Occupancy mask of one block, bit k = element k non-zero."""
        mask = 0
        for slot in range(int(self.counts[col, block])):
            mask |= 1 << int(self.indices[col, block, slot])
        return mask

    def __eq__(self, other) -> bool:
        if not isinstance(other, DBBMatrix):
            return NotImplemented
        return (
            (self.rows, self.cols, self.block_size, self.nnz_bound)
            == (other.rows, other.cols, other.block_size, other.nnz_bound)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"DBBMatrix({self.rows}x{self.cols}, block_size={self.block_size}, "
            f"nnz_bound={self.nnz_bound})"
        )


@dataclass(frozen=True)
class FootprintReport:
    """Byte cost of one DBB matrix next to its dense form."""

    dense_bytes: int
    mask_bytes: int
    value_bytes: int
    compressed_bytes: int
    reduction: float

    def as_dict(self) -> dict:
        return asdict(self)


def encode(w: Int8Matrix, block_size: int, nnz_bound: int) -> DBBMatrix:
    """Compress a dense matrix, or raise BoundViolation at the first
    offending (column, block) in column-major order."""
    _check_bn(block_size, nnz_bound)
    blocks = _blocks_of(w.data, block_size)
    nz = blocks != 0
    counts = nz.sum(axis=-1)
    over = np.argwhere(counts > nnz_bound)
    if len(over):
        col, blk = (int(v) for v in over[0])
        raise BoundViolation(col, blk, int(counts[col, blk]), nnz_bound)
    # stable sort keyed on "is zero": non-zero elements first, ascending index
    order = np.argsort(~nz, axis=-1, kind="stable")[..., :nnz_bound]
    vals = np.take_along_axis(blocks, order, axis=-1)
    live = np.arange(nnz_bound) < counts[..., None]
    vals = np.where(live, vals, 0).astype(np.int8)
    idx = np.where(live, order, 0).astype(np.uint8)
    return DBBMatrix(w.rows, w.cols, block_size, nnz_bound, vals, idx, counts.astype(np.uint8))


def decode(d: DBBMatrix) -> Int8Matrix:
    """Expand back to dense; exact inverse of encode."""
    padded_rows = d.n_blocks * d.block_size
    out = np.zeros((d.cols, padded_rows), dtype=np.int8)
    live = np.arange(d.nnz_bound) < d.counts[..., None]
    block_base = np.arange(d.n_blocks, dtype=np.int64) * d.block_size
    abs_rows = block_base[None, :, None] + d.indices
    col_of = np.broadcast_to(
        np.arange(d.cols, dtype=np.int64)[:, None, None], abs_rows.shape
    )
    out[col_of[live], abs_rows[live]] = d.values[live]
    return Int8Matrix(out.T[: d.rows])


def validate(w: Int8Matrix, block_size: int, nnz_bound: int) -> dict[int, list[int]]:
    """Map column -> violating block indices; empty iff encode succeeds."""
    _check_bn(block_size, nnz_bound)
    counts = (_blocks_of(w.data, block_size) != 0).sum(axis=-1)
    report: dict[int, list[int]] = {}
    for col, blk in np.argwhere(counts > nnz_bound):
        report.setdefault(int(col), []).append(int(blk))
    return report


def prune_to_dbb(w: Int8Matrix, block_size: int, nnz_bound: int) -> Int8Matrix:
    """Magnitude-prune every block to the bound.

    Keeps the nnz_bound largest magnitudes of each block (ties resolved
    toward the lower element index), zeroes the rest. Kept elements are
    bit-identical; blocks already at or under the bound are untouched.
    """
    _check_bn(block_size, nnz_bound)
    blocks = _blocks_of(w.data, block_size)
    # int32 before abs: |-128| overflows int8
    magnitude = np.abs(blocks.astype(np.int32))
    keep = np.argsort(-magnitude, axis=-1, kind="stable")[..., :nnz_bound]
    keep_mask = np.zeros(blocks.shape, dtype=bool)
    np.put_along_axis(keep_mask, keep, True, axis=-1)
    pruned = np.where(keep_mask, blocks, 0)
    cols, n_blocks, b = pruned.shape
    return Int8Matrix(pruned.reshape(cols, n_blocks * b).T[: w.rows])


def footprint(d: DBBMatrix) -> FootprintReport:
    """Storage cost; padded tail blocks are charged like any other."""
    total_blocks = d.cols * d.n_blocks
    mask_bytes = total_blocks * (-(-d.block_size // 8))
    value_bytes = total_blocks * d.nnz_bound
    compressed = mask_bytes + value_bytes
    dense = d.rows * d.cols
    return FootprintReport(
        dense_bytes=dense,
        mask_bytes=mask_bytes,
        value_bytes=value_bytes,
        compressed_bytes=compressed,
        reduction=1.0 - compressed / dense,
    )


def serialize_dbb(d: DBBMatrix) -> bytes:
    mask_width = -(-d.block_size // 8)
    out = bytearray(
        _HEADER.pack(MAGIC, FORMAT_VERSION, d.block_size, d.nnz_bound, d.rows, d.cols)
    )
    for col in range(d.cols):
        for blk in range(d.n_blocks):
            out += d.block_mask(col, blk).to_bytes(mask_width, "little")
            out += d.values[col, blk].tobytes()
    return bytes(out)


def deserialize_dbb(blob: bytes) -> DBBMatrix:
    if len(blob) < _HEADER.size:
        raise DataFormatError(f"truncated header: {len(blob)} bytes")
    magic, version, block_size, nnz_bound, rows, cols = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DataFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"unsupported version {version}")
    try:
        _check_bn(block_size, nnz_bound)
    except ConfigError as exc:
        raise DataFormatError(str(exc)) from None
    if rows < 1 or cols < 1 or rows > MAX_DIM or cols > MAX_DIM:
        raise DataFormatError(f"bad dimensions in header: {rows}x{cols}")
    n_blocks = -(-rows // block_size)
    mask_width = -(-block_size // 8)
    block_bytes = mask_width + nnz_bound
    expected = _HEADER.size + cols * n_blocks * block_bytes
    if len(blob) != expected:
        raise DataFormatError(f"payload size {len(blob)} != expected {expected}")
    values = np.zeros((cols, n_blocks, nnz_bound), dtype=np.int8)
    indices = np.zeros((cols, n_blocks, nnz_bound), dtype=np.uint8)
    counts = np.zeros((cols, n_blocks), dtype=np.uint8)
    pos = _HEADER.size
    for col in range(cols):
        for blk in range(n_blocks):
            mask = int.from_bytes(blob[pos : pos + mask_width], "little")
            pos += mask_width
            vals = np.frombuffer(blob, dtype=np.int8, count=nnz_bound, offset=pos)
            pos += nnz_bound
            if mask >> block_size:
                raise DataFormatError(f"mask bit beyond block at column {col}, block {blk}")
            live = [k for k in range(block_size) if mask >> k & 1]
            if len(live) > nnz_bound:
                raise BoundViolation(col, blk, len(live), nnz_bound)
            counts[col, blk] = len(live)
            indices[col, blk, : len(live)] = live
            values[col, blk] = vals
    return DBBMatrix(rows, cols, block_size, nnz_bound, values, indices, counts)


def store_dbb(d: DBBMatrix, path) -> None:
    Path(path).write_bytes(serialize_dbb(d))


def load_dbb(path) -> DBBMatrix:
    return deserialize_dbb(Path(path).read_bytes())
