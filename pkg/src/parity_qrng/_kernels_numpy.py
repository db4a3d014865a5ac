"""Vectorized numpy implementation of the per-pulse kernels.

Fallback backend for environments where numba is unavailable or disabled
(``PARITY_QRNG_BACKEND=numpy``).  Replays the exact per-lane operation
sequence of the numba kernels in masked rounds, so output is bit-identical.
The PTRS acceptance log goes through ``math.log`` elementwise on the few
lanes that reach it: numpy's SIMD ``np.log`` is not bit-identical to libm,
and the numba kernel uses libm.
"""

import math

import numpy as np

from ._kernel_common import (
    DET_IDEAL,
    DET_MULTIPLEXED,
    DET_SATURATING,
    GOLDEN,
    INV_2_53,
    KIND_GEOMETRIC,
    KIND_POISSON_INV,
    KIND_POISSON_PTRS,
    KIND_TABLE,
    P_A,
    P_B,
    P_CAP,
    P_INVALPHA,
    P_LNMU,
    P_MEAN,
    P_Q,
    P_START,
    P_VR,
    U64,
    mix64_np,
)


def _draw_unit(keys, j):
    """Unit doubles for draw index ``j`` (per-lane) of each pulse key."""
    raw = mix64_np(keys + (j.astype(np.uint64) + U64(1)) * GOLDEN)
    return (raw >> U64(11)).astype(np.float64) * INV_2_53


def _draw_u64(keys, j):
    return mix64_np(keys + (j.astype(np.uint64) + U64(1)) * GOLDEN)


def _poisson_inv(params, keys, out_n, out_j):
    nbar = params[P_MEAN]
    cap = int(params[P_CAP])
    n = keys.shape[0]
    u = _draw_unit(keys, np.zeros(n, dtype=np.int64))
    x = np.zeros(n, dtype=np.int64)
    p = np.full(n, params[P_START])
    s = p.copy()
    active = u > s
    while active.any():
        x[active] += 1
        p[active] *= nbar / x[active]
        s[active] += p[active]
        active &= (u > s) & (x < cap)
    out_n[:] = x
    out_j[:] = 1


def _poisson_ptrs(params, logfact, keys, out_n, out_j):
    mu = params[P_MEAN]
    b = params[P_B]
    a = params[P_A]
    inv_alpha = params[P_INVALPHA]
    vr = params[P_VR]
    lnmu = params[P_LNMU]
    table_len = logfact.shape[0]

    lanes = np.arange(keys.shape[0])
    j = np.zeros(keys.shape[0], dtype=np.int64)
    while lanes.size:
        k = keys[lanes]
        u = _draw_unit(k, j[lanes]) - 0.5
        v = _draw_unit(k, j[lanes] + 1)
        j[lanes] += 2
        us = 0.5 - np.abs(u)
        valid = (us > 0.0) & (v > 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            n = np.floor((2.0 * a / us + b) * u + mu + 0.43)
        fast = valid & (us >= 0.07) & (v <= vr)
        need_log = (valid & ~fast
                    & ~((n < 0.0) | ((us < 0.013) & (v > us)))
                    & (n < table_len))
        slow = np.zeros(lanes.size, dtype=bool)
        if need_log.any():
            cand = np.nonzero(need_log)[0]
            ratio = v[cand] * inv_alpha / (a / (us[cand] * us[cand]) + b)
            lhs = np.array([math.log(r) for r in ratio])
            nc = n[cand]
            rhs = nc * lnmu - mu - logfact[nc.astype(np.int64)]
            slow[cand] = lhs <= rhs
        accepted = fast | slow
        if accepted.any():
            hit = lanes[accepted]
            out_n[hit] = n[accepted].astype(np.int64)
            out_j[hit] = j[hit]
            lanes = lanes[~accepted]


def _geometric(params, keys, out_n, out_j):
    q = params[P_Q]
    cap = int(params[P_CAP])
    n = keys.shape[0]
    u = _draw_unit(keys, np.zeros(n, dtype=np.int64))
    x = np.zeros(n, dtype=np.int64)
    c = np.full(n, params[P_START])
    s = c.copy()
    active = (u > s) & (x < cap)
    while active.any():
        c[active] *= q
        s[active] += c[active]
        x[active] += 1
        active &= (u > s) & (x < cap)
    out_n[:] = x
    out_j[:] = 1


def _table(cdf, keys, out_n, out_j):
    n = keys.shape[0]
    u = _draw_unit(keys, np.zeros(n, dtype=np.int64))
    idx = np.searchsorted(cdf, u, side="right")
    out_n[:] = np.minimum(idx, cdf.shape[0] - 1)
    out_j[:] = 1


def sample_counts(kind, params, cdf, logfact, keys, out_n, out_j):
    if kind == KIND_POISSON_INV:
        _poisson_inv(params, keys, out_n, out_j)
    elif kind == KIND_POISSON_PTRS:
        _poisson_ptrs(params, logfact, keys, out_n, out_j)
    elif kind == KIND_GEOMETRIC:
        _geometric(params, keys, out_n, out_j)
    elif kind == KIND_TABLE:
        _table(cdf, keys, out_n, out_j)
    else:
        raise ValueError(f"unknown sampler kind code {kind}")


def detect_counts(det, eta, ports, dark, max_count, keys, j0, true_n,
                  out_rep, out_mask):
    n = keys.shape[0]
    out_mask[:] = 0
    if det == DET_IDEAL:
        out_rep[:] = true_n
        return

    j = j0.astype(np.int64).copy()
    survivors = np.zeros(n, dtype=np.int64)
    max_true = int(true_n.max()) if n else 0
    for r in range(max_true):
        act = true_n > r
        u = _draw_unit(keys[act], j[act])
        survivors[act] += u < eta
        j[act] += 1

    if det == DET_SATURATING:
        out_rep[:] = np.minimum(survivors, max_count)
        return

    if det != DET_MULTIPLEXED:
        raise ValueError(f"unknown detector kind code {det}")

    max_surv = int(survivors.max()) if n else 0
    for r in range(max_surv):
        act = survivors > r
        port = _draw_u64(keys[act], j[act]) % U64(ports)
        out_mask[act] |= U64(1) << port
        j[act] += 1
    for p in range(ports):
        u = _draw_unit(keys, j)
        out_mask[u < dark] |= U64(1) << U64(p)
        j += 1

    # popcount of the port masks (ports <= 64)
    rep = np.zeros(n, dtype=np.int64)
    m = out_mask.copy()
    for p in range(ports):
        rep += (m & U64(1)).astype(np.int64)
        m >>= U64(1)
    out_rep[:] = rep
