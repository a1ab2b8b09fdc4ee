# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tile kernels; semantics mirror tilesim_py line for line.

Accumulation is exact in 64-bit locals (int8 products over at most
2^16 reduction steps cannot overflow that) and wrapped to 32-bit two's
complement on readout, identical to the pure backend.
"""

import numpy as np

from libc.stdint cimport int8_t, int32_t, int64_t, uint8_t

GATING_OFF = 0
GATING_LANE = 1
GATING_PE = 2


cdef inline int32_t _wrap32(int64_t value) nogil:
    value = value & (<int64_t> 0xFFFFFFFF)
    if value >= (<int64_t> 1) << 31:
        value -= (<int64_t> 1) << 32
    return <int32_t> value


def dense_tile(const int8_t[:, ::1] x, const int8_t[:, ::1] w,
               int m, int n, int a, int b, int c, int gating,
               int real_rows, int real_k, int real_cols):
    cdef Py_ssize_t rows = x.shape[0]
    cdef Py_ssize_t kpad = x.shape[1]
    cdef Py_ssize_t cols = n * c
    cdef Py_ssize_t stream = kpad // b
    cdef Py_ssize_t skew = (m - 1) + (n - 1)
    acc_np = np.zeros((rows, cols), dtype=np.int64)
    cdef int64_t[:, ::1] acc = acc_np
    out_np = np.empty((rows, cols), dtype=np.int32)
    cdef int32_t[:, ::1] out = out_np
    cdef int64_t busy = 0, gated = 0, idle = 0, pe_gated = 0, pe_active = 0, cycles = 0
    cdef int64_t zero_pairs, real_pairs, s
    cdef Py_ssize_t t, i, j, kb, base, ai, ci, bi, r, col, k
    cdef bint row_pad, col_pad, zp
    cdef int8_t xa, wv
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
                    for ci in range(c):
                        col = j * c + ci
                        col_pad = col >= real_cols
                        s = acc[r, col]
                        for bi in range(b):
                            k = base + bi
                            xa = x[r, k]
                            wv = w[k, col]
                            s += xa * wv
                            if row_pad or col_pad or k >= real_k:
                                idle += 1
                            else:
                                real_pairs += 1
                                zp = xa == 0 or wv == 0
                                if zp:
                                    zero_pairs += 1
                                if gating == 1:
                                    if zp:
                                        gated += 1
                                    else:
                                        busy += 1
                                elif gating == 0:
                                    busy += 1
                        acc[r, col] = s
                if real_pairs:
                    pe_active += 1
                if gating == 2:
                    if real_pairs and zero_pairs == real_pairs:
                        pe_gated += 1
                        gated += real_pairs
                    else:
                        busy += real_pairs
        cycles += 1
    for r in range(rows):  # shift-chain drain: one accumulator row per cycle
        for col in range(cols):
            out[r, col] = _wrap32(acc[r, col])
        cycles += 1
    return out_np, (cycles, busy, gated, idle, pe_gated, pe_active)


def dbb_tile(const int8_t[:, ::1] x, const int8_t[:, :, ::1] w_vals,
             const uint8_t[:, :, ::1] w_idx, const uint8_t[:, ::1] w_cnt,
             int m, int n, int a, int b, int c, int cap, int gating,
             int real_rows, int real_k, int real_cols):
    cdef Py_ssize_t rows = x.shape[0]
    cdef Py_ssize_t stream = w_vals.shape[0]
    cdef Py_ssize_t cols = n * c
    cdef Py_ssize_t skew = (m - 1) + (n - 1)
    acc_np = np.zeros((rows, cols), dtype=np.int64)
    cdef int64_t[:, ::1] acc = acc_np
    out_np = np.empty((rows, cols), dtype=np.int32)
    cdef int32_t[:, ::1] out = out_np
    cdef int64_t busy = 0, gated = 0, idle = 0, pe_gated = 0, pe_active = 0, cycles = 0
    cdef int64_t zero_pairs, real_pairs, s
    cdef Py_ssize_t t, i, j, kb, base, ai, ci, lane, r, col, cnt
    cdef bint row_pad, zp
    cdef int8_t xa, wv
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
                    for ci in range(c):
                        col = j * c + ci
                        cnt = w_cnt[kb, col]
                        s = acc[r, col]
                        for lane in range(cap):
                            if lane >= cnt:
                                idle += 1
                                continue
                            wv = w_vals[kb, col, lane]
                            xa = x[r, base + w_idx[kb, col, lane]]
                            s += xa * wv
                            if row_pad:
                                idle += 1
                            else:
                                real_pairs += 1
                                zp = xa == 0 or wv == 0
                                if zp:
                                    zero_pairs += 1
                                if gating == 1:
                                    if zp:
                                        gated += 1
                                    else:
                                        busy += 1
                                elif gating == 0:
                                    busy += 1
                        acc[r, col] = s
                if real_pairs:
                    pe_active += 1
                if gating == 2:
                    if real_pairs and zero_pairs == real_pairs:
                        pe_gated += 1
                        gated += real_pairs
                    else:
                        busy += real_pairs
        cycles += 1
    for r in range(rows):  # shift-chain drain: one accumulator row per cycle
        for col in range(cols):
            out[r, col] = _wrap32(acc[r, col])
        cycles += 1
    return out_np, (cycles, busy, gated, idle, pe_gated, pe_active)
