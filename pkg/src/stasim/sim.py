"""Cycle-accurate output-stationary simulation of the configured array.

Dataflow: activations enter at the left edge with row group i delayed i
cycles and shift one PE per cycle to the right; weights enter at the
top with column group j delayed j cycles and shift down. PE (i, j)
therefore consumes operand group kb in cycle t = kb + i + j, and every
PE sees exactly ceil(K/b) groups. Accumulators never move during
streaming; a shift chain then drains one accumulator row per cycle out
of the bottom edge (m*a cycles).

Worked trace, 4x4 by 4x4 product on the 2x2x2_2x2 geometry (K=4, so
two operand groups kb=0 covering k={0,1} and kb=1 covering k={2,3}):

    cycle 0   PE(0,0) consumes kb=0
    cycle 1   PE(0,1) and PE(1,0) consume kb=0; PE(0,0) consumes kb=1
    cycle 2   PE(1,1) consumes kb=0; PE(0,1) and PE(1,0) consume kb=1
    cycle 3   PE(1,1) consumes kb=1 (streaming done: 2 stream + 2 skew)
    cycles 4-7  readout, one of the m*a = 4 accumulator rows per cycle

    total = 8 cycles, exactly cycle_count(config, 4).total_cycles.

The simulator is bit-exact: accumulators are 32-bit signed with
wrapping semantics, operands 8-bit signed, and results must equal the
independent reference product for every input. Clock gating is a power
proxy only; it changes lane activity counters and never results or
cycle counts.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from stasim import _kernels
from stasim.arch import ArrayConfig, check_config, cycle_count
from stasim.dbb import DBBMatrix, decode, encode
from stasim.errors import ShapeError, StasimError
from stasim.matrix import AccMatrix, Int8Matrix

_GATING_CODE = {"off": _kernels.GATING_OFF, "lane": _kernels.GATING_LANE, "pe": _kernels.GATING_PE}


@dataclass
class SimStats:
    """Aggregated activity counters; sums over all executed tiles.

    Lane counters cover the streaming phase only (each PE streams for
    exactly ceil(K/b) cycles per tile; skew fill and readout clock no
    multiplier lanes), so

        busy + gated + idle == total_lanes * streaming_cycles.

    effective_macs counts logical multiply-accumulates over unpadded
    positions, including those a sparse PE never physically executes:
    a full GEMM always totals rows * K * cols regardless of variant.
    """

    gating: str = "off"
    total_lanes: int = 0
    cycles: int = 0
    streaming_cycles: int = 0
    effective_macs: int = 0
    multiplier_lane_busy_cycles: int = 0
    lane_gated_cycles: int = 0
    lane_idle_cycles: int = 0
    pe_gated_cycles: int = 0
    pe_active_cycles: int = 0
    tiles_executed: int = 0

    @property
    def lane_utilization(self) -> float:
        denom = (
            self.multiplier_lane_busy_cycles + self.lane_gated_cycles + self.lane_idle_cycles
        )
        return self.multiplier_lane_busy_cycles / denom if denom else 0.0

    def as_dict(self) -> dict:
        doc = asdict(self)
        doc["lane_utilization"] = self.lane_utilization
        return doc


@dataclass(frozen=True)
class Tile:
    """One output tile: origin plus unpadded extents."""

    row0: int
    col0: int
    rows: int
    cols: int


@dataclass(frozen=True)
class TileSchedule:
    """Row-major grid of output tiles in steps of (m*a, n*c)."""

    out_rows: int
    out_cols: int
    tile_rows: int
    tile_cols: int
    tiles: tuple[Tile, ...] = field(default=())

    @classmethod
    def plan(cls, config: ArrayConfig, out_rows: int, out_cols: int) -> "TileSchedule":
        check_config(config)
        if out_rows < 1 or out_cols < 1:
            raise ShapeError(f"zero output dimension: {out_rows}x{out_cols}")
        step_r, step_c = config.tile_rows, config.tile_cols
        tiles = tuple(
            Tile(r0, c0, min(step_r, out_rows - r0), min(step_c, out_cols - c0))
            for r0 in range(0, out_rows, step_r)
            for c0 in range(0, out_cols, step_c)
        )
        return cls(out_rows, out_cols, step_r, step_c, tiles)


def _dbb_lane_arrays(d: DBBMatrix, col0: int, out_cols: int, cap: int):
    """Slot arrays for one tile's column slice, padded to the physical
    lane count and the tile width."""
    n_blocks = d.n_blocks
    vals = np.zeros((n_blocks, out_cols, cap), dtype=np.int8)
    idx = np.zeros((n_blocks, out_cols, cap), dtype=np.uint8)
    cnt = np.zeros((n_blocks, out_cols), dtype=np.uint8)
    col1 = min(col0 + out_cols, d.cols)
    width = col1 - col0
    if width > 0:
        vals[:, :width, : d.nnz_bound] = d.values[col0:col1].transpose(1, 0, 2)
        idx[:, :width, : d.nnz_bound] = d.indices[col0:col1].transpose(1, 0, 2)
        cnt[:, :width] = d.counts[col0:col1].T
    return np.ascontiguousarray(vals), np.ascontiguousarray(idx), np.ascontiguousarray(cnt)


def _run_tile(config, kernel, x_slice, w_dense, w_dbb, col0, real_rows, real_k, real_cols):
    """Pad one tile's operands, run the kernel, check the cycle model."""
    b = config.b
    stream = -(-real_k // b)
    x_pad = np.zeros((config.tile_rows, stream * b), dtype=np.int8)
    x_pad[: x_slice.shape[0], :real_k] = x_slice
    gate = _GATING_CODE[config.gating]
    if config.is_dbb:
        vals, idx, cnt = _dbb_lane_arrays(w_dbb, col0, config.tile_cols, config.dbb_nnz)
        acc, counters = kernel.dbb_tile(
            x_pad, vals, idx, cnt,
            config.m, config.n, config.a, b, config.c, config.dbb_nnz,
            gate, real_rows, real_k, real_cols,
        )
    else:
        w_pad = np.zeros((stream * b, config.tile_cols), dtype=np.int8)
        w_pad[:real_k, : w_dense.shape[1]] = w_dense
        acc, counters = kernel.dense_tile(
            x_pad, w_pad,
            config.m, config.n, config.a, b, config.c,
            gate, real_rows, real_k, real_cols,
        )
    model = cycle_count(config, real_k)
    if counters[0] != model.total_cycles:
        raise StasimError(
            f"cycle model diverged: measured {counters[0]}, model {model.total_cycles}"
        )
    return acc, counters, stream


def _prepare_weights(config: ArrayConfig, w) -> tuple[Int8Matrix | None, DBBMatrix | None]:
    """Bring w into the form the variant consumes; returns (dense, dbb)."""
    if config.is_dbb:
        if isinstance(w, Int8Matrix):
            w = encode(w, config.b, config.dbb_nnz)
        elif not isinstance(w, DBBMatrix):
            raise ShapeError(f"weights must be Int8Matrix or DBBMatrix, got {type(w).__name__}")
        if w.block_size != config.b:
            raise ShapeError(
                f"DBB block misalignment: block_size {w.block_size} != b {config.b}"
            )
        if w.nnz_bound > config.dbb_nnz:
            raise ShapeError(
                f"DBB bound {w.nnz_bound} exceeds physical lanes {config.dbb_nnz}"
            )
        return None, w
    if isinstance(w, DBBMatrix):
        w = decode(w)
    elif not isinstance(w, Int8Matrix):
        raise ShapeError(f"weights must be Int8Matrix or DBBMatrix, got {type(w).__name__}")
    return w, None


def _w_dims(w_dense, w_dbb) -> tuple[int, int]:
    src = w_dense if w_dense is not None else w_dbb
    return src.rows, src.cols


def simulate_tile(config: ArrayConfig, x_tile: Int8Matrix, w_tile) -> tuple[AccMatrix, SimStats]:
    """Run a single full output tile: x (m*a, K) by w (K, n*c)."""
    check_config(config)
    w_dense, w_dbb = _prepare_weights(config, w_tile)
    k, w_cols = _w_dims(w_dense, w_dbb)
    if x_tile.rows != config.tile_rows:
        raise ShapeError(f"x tile rows {x_tile.rows} != m*a = {config.tile_rows}")
    if w_cols != config.tile_cols:
        raise ShapeError(f"w tile cols {w_cols} != n*c = {config.tile_cols}")
    if x_tile.cols != k:
        raise ShapeError(f"reduction mismatch: x has K={x_tile.cols}, w has K={k}")
    kernel = _kernels.active_module()
    acc, counters, stream = _run_tile(
        config, kernel,
        x_tile.data,
        w_dense.data if w_dense is not None else None,
        w_dbb, 0,
        config.tile_rows, k, config.tile_cols,
    )
    stats = SimStats(gating=config.gating, total_lanes=config.total_lanes)
    _fold(stats, counters, stream, config.tile_rows * k * config.tile_cols)
    return AccMatrix(acc), stats


def _fold(stats: SimStats, counters, stream: int, effective: int) -> None:
    cycles, busy, gated, idle, pe_gated, pe_active = counters
    stats.cycles += int(cycles)
    stats.multiplier_lane_busy_cycles += int(busy)
    stats.lane_gated_cycles += int(gated)
    stats.lane_idle_cycles += int(idle)
    stats.pe_gated_cycles += int(pe_gated)
    stats.pe_active_cycles += int(pe_active)
    stats.streaming_cycles += stream
    stats.effective_macs += effective
    stats.tiles_executed += 1


def simulate_gemm(config: ArrayConfig, x: Int8Matrix, w) -> tuple[AccMatrix, SimStats]:
    """Tile and run a full GEMM: x (MR, K) by w (K, NC).

    Output tiles step by (m*a, n*c) with zero padding at the edges; the
    reduction dimension is consumed in full by every tile, so blocks of
    a DBB weight matrix never straddle tiles. Stats are sums over
    tiles; results are written back from unpadded tile regions only.
    """
    check_config(config)
    if not isinstance(x, Int8Matrix):
        raise ShapeError(f"activations must be Int8Matrix, got {type(x).__name__}")
    w_dense, w_dbb = _prepare_weights(config, w)
    k, out_cols = _w_dims(w_dense, w_dbb)
    if x.cols != k:
        raise ShapeError(f"reduction mismatch: x has K={x.cols}, w has K={k}")
    schedule = TileSchedule.plan(config, x.rows, out_cols)
    kernel = _kernels.active_module()
    result = np.zeros((x.rows, out_cols), dtype=np.int32)
    stats = SimStats(gating=config.gating, total_lanes=config.total_lanes)
    for tile in schedule.tiles:
        x_slice = x.data[tile.row0 : tile.row0 + tile.rows, :]
        w_slice = (
            w_dense.data[:, tile.col0 : tile.col0 + tile.cols]
            if w_dense is not None
            else None
        )
        acc, counters, stream = _run_tile(
            config, kernel, x_slice, w_slice, w_dbb, tile.col0, tile.rows, k, tile.cols
        )
        result[tile.row0 : tile.row0 + tile.rows, tile.col0 : tile.col0 + tile.cols] = acc[
            : tile.rows, : tile.cols
        ]
        _fold(stats, counters, stream, tile.rows * k * tile.cols)
    return AccMatrix(result), stats


def gating_stats(stats: SimStats) -> dict[str, float]:
    """Gated fraction for the granularity the simulation ran with.

    Fractions are over real operand work: the lane fraction divides by
    busy+gated lane-cycles (padding and dead slots excluded), the pe
    fraction by PE-cycles that processed at least one real pair. A run
    with gating off yields an empty report.
    """
    if stats.gating == "off":
        return {}
    if stats.gating == "lane":
        denom = stats.multiplier_lane_busy_cycles + stats.lane_gated_cycles
        return {"lane": stats.lane_gated_cycles / denom if denom else 0.0}
    denom = stats.pe_active_cycles
    return {"pe": stats.pe_gated_cycles / denom if denom else 0.0}
