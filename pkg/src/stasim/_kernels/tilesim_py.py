"""Pure-Python tile kernels; bit-identical to the compiled backend.

Both backends expose the same two functions and return
(acc int32 ndarray, (cycles, busy, gated, idle, pe_gated, pe_active)).
Accumulation is exact in Python ints and wrapped to 32-bit two's
complement on readout, which equals per-step 32-bit wrapping because
wrapping addition is associative.

Lane accounting covers the streaming phase only. Classification order
per lane-cycle: a padded operand position counts idle (the hardware
clocks through zeros there), a dead value slot counts idle, then a
gated pair per the gating mode, otherwise busy.
"""

from __future__ import annotations

import numpy as np

GATING_OFF = 0
GATING_LANE = 1
GATING_PE = 2

_WRAP = 1 << 32
_SIGN = 1 << 31


def _wrap32(value: int) -> int:
    value &= _WRAP - 1
    return value - _WRAP if value >= _SIGN else value


def dense_tile(x, w, m, n, a, b, c, gating, real_rows, real_k, real_cols):
    """Simulate one output tile with dense weights.

    x: int8 (m*a, stream*b), zero padded past real_k columns.
    w: int8 (stream*b, n*c), zero padded past real_k rows and real_cols columns.
    real_rows/real_k/real_cols: unpadded extents for lane accounting.
    """
    rows, kpad = x.shape
    cols = n * c
    stream = kpad // b
    skew = (m - 1) + (n - 1)
    xs = x.tolist()
    ws = w.tolist()
    acc = [[0] * cols for _ in range(rows)]
    busy = gated = idle = pe_gated = pe_active = 0
    cycles = 0
    for t in range(stream + skew):
        for i in range(m):
            for j in range(n):
                kb = t - i - j
                if kb < 0 or kb >= stream:
                    continue
                base = kb * b
                zero_pairs = 0
                real_pairs = 0
                for ai in range(a):
                    r = i * a + ai
                    row_pad = r >= real_rows
                    xrow = xs[r]
                    arow = acc[r]
                    for ci in range(c):
                        col = j * c + ci
                        col_pad = col >= real_cols
                        s = arow[col]
                        for bi in range(b):
                            k = base + bi
                            xa = xrow[k]
                            wv = ws[k][col]
                            s += xa * wv
                            if row_pad or col_pad or k >= real_k:
                                idle += 1
                            else:
                                real_pairs += 1
                                zp = xa == 0 or wv == 0
                                if zp:
                                    zero_pairs += 1
                                if gating == GATING_LANE:
                                    if zp:
                                        gated += 1
                                    else:
                                        busy += 1
                                elif gating == GATING_OFF:
                                    busy += 1
                        arow[col] = s
                if real_pairs:
                    pe_active += 1
                if gating == GATING_PE:
                    if real_pairs and zero_pairs == real_pairs:
                        pe_gated += 1
                        gated += real_pairs
                    else:
                        busy += real_pairs
        cycles += 1
    out = np.empty((rows, cols), dtype=np.int32)
    for r in range(rows):  # shift-chain drain: one accumulator row per cycle
        arow = acc[r]
        for col in range(cols):
            out[r, col] = _wrap32(arow[col])
        cycles += 1
    return out, (cycles, busy, gated, idle, pe_gated, pe_active)


def dbb_tile(x, w_vals, w_idx, w_cnt, m, n, a, b, c, cap, gating, real_rows, real_k, real_cols):
    """Simulate one output tile with density-bound block weights.

    w_vals: int8 (stream, n*c, cap) value slots per (group, column, lane);
    w_idx: uint8 same shape, in-group element index per live slot;
    w_cnt: uint8 (stream, n*c) live slots per block. Slots at or past the
    count are dead (idle lanes). Padded k rows and padded columns carry
    no live slots by construction, so only row padding needs checking.
    """
    rows = x.shape[0]
    stream = w_vals.shape[0]
    cols = n * c
    skew = (m - 1) + (n - 1)
    xs = x.tolist()
    vals = w_vals.tolist()
    idxs = w_idx.tolist()
    cnts = w_cnt.tolist()
    acc = [[0] * cols for _ in range(rows)]
    busy = gated = idle = pe_gated = pe_active = 0
    cycles = 0
    for t in range(stream + skew):
        for i in range(m):
            for j in range(n):
                kb = t - i - j
                if kb < 0 or kb >= stream:
                    continue
                base = kb * b
                vrow = vals[kb]
                irow = idxs[kb]
                crow = cnts[kb]
                zero_pairs = 0
                real_pairs = 0
                for ai in range(a):
                    r = i * a + ai
                    row_pad = r >= real_rows
                    xrow = xs[r]
                    arow = acc[r]
                    for ci in range(c):
                        col = j * c + ci
                        cnt = crow[col]
                        vslots = vrow[col]
                        islots = irow[col]
                        s = arow[col]
                        for lane in range(cap):
                            if lane >= cnt:
                                idle += 1
                                continue
                            wv = vslots[lane]
                            xa = xrow[base + islots[lane]]
                            s += xa * wv
                            if row_pad:
                                idle += 1
                            else:
                                real_pairs += 1
                                zp = xa == 0 or wv == 0
                                if zp:
                                    zero_pairs += 1
                                if gating == GATING_LANE:
                                    if zp:
                                        gated += 1
                                    else:
                                        busy += 1
                                elif gating == GATING_OFF:
                                    busy += 1
                        arow[col] = s
                if real_pairs:
                    pe_active += 1
                if gating == GATING_PE:
                    if real_pairs and zero_pairs == real_pairs:
                        pe_gated += 1
                        gated += real_pairs
                    else:
                        busy += real_pairs
        cycles += 1
    out = np.empty((rows, cols), dtype=np.int32)
    for r in range(rows):  # shift-chain drain: one accumulator row per cycle
        arow = acc[r]
        for col in range(cols):
            out[r, col] = _wrap32(arow[col])
        cycles += 1
    return out, (cycles, busy, gated, idle, pe_gated, pe_active)
