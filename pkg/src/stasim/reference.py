"""Independent reference implementations used to check the simulator.

Nothing here shares code with the simulation kernels. The product
oracle is the definitional row-by-column dot product, computed through
numpy integer matmul with exact 64-bit accumulation and then wrapped to
32-bit two's complement; wrapping addition is associative, so this is
element-for-element identical to accumulating in 32 bits at every step.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from stasim.errors import ShapeError
from stasim.matrix import AccMatrix, Int8Matrix


@dataclass(frozen=True)
class OracleResult:
    product: AccMatrix
    elapsed: float


def oracle_gemm(x: Int8Matrix, w: Int8Matrix) -> AccMatrix:
    """Reference product of int8 operands with wrapping int32 accumulate."""
    if not isinstance(x, Int8Matrix) or not isinstance(w, Int8Matrix):
        raise ShapeError("oracle_gemm takes two Int8Matrix operands")
    if x.cols != w.rows:
        raise ShapeError(f"reduction mismatch: x has K={x.cols}, w has K={w.rows}")
    exact = x.data.astype(np.int64) @ w.data.astype(np.int64)
    wrapped = exact & 0xFFFFFFFF
    wrapped -= (wrapped >= 0x80000000) * 0x100000000
    return AccMatrix(wrapped.astype(np.int32))


def run_oracle(x: Int8Matrix, w: Int8Matrix) -> OracleResult:
    start = time.perf_counter()
    product = oracle_gemm(x, w)
    return OracleResult(product=product, elapsed=time.perf_counter() - start)


def block_nnz_histogram(w: Int8Matrix, block_size: int) -> np.ndarray:
    """Count blocks by non-zero population.

    Blocks are the vertical block_size-row windows of each column (the
    same grid the DBB codec uses; a partial tail block counts its real
    non-zeros). Entry p of the result is the number of blocks holding
    exactly p non-zeros, for p in 0..block_size.
    """
    if block_size < 1:
        raise ShapeError(f"block_size must be positive, got {block_size}")
    rows, cols = w.data.shape
    n_blocks = -(-rows // block_size)
    pad = n_blocks * block_size - rows
    dense = w.data
    if pad:
        dense = np.vstack([dense, np.zeros((pad, cols), dtype=np.int8)])
    counts = (dense.T.reshape(cols, n_blocks, block_size) != 0).sum(axis=-1)
    return np.bincount(counts.ravel(), minlength=block_size + 1)


def min_prune_magnitude(block, nnz_bound: int) -> int:
    """Smallest total |zeroed| any bound-respecting pruning can achieve.

    Brute force over every keep set of nnz_bound elements; intended for
    small blocks (block_size <= 8 keeps this cheap).
    """
    values = [int(v) for v in block]
    magnitudes = [abs(v) for v in values]
    total = sum(magnitudes)
    if sum(1 for v in values if v) <= nnz_bound:
        return 0
    best_kept = max(
        sum(magnitudes[i] for i in keep)
        for keep in itertools.combinations(range(len(values)), nnz_bound)
    )
    return total - best_kept
