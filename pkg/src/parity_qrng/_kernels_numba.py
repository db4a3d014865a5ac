"""numba implementation of the hot per-pulse kernels (scalar loops).

Must follow the draw-consumption contract in ``_kernel_common`` exactly;
``tests/test_backends.py`` asserts bit-identical output against the numpy
implementation.
"""

import math

import numpy as np
from numba import njit

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
    MIX_C1,
    MIX_C2,
    P_A,
    P_B,
    P_CAP,
    P_INVALPHA,
    P_LNMU,
    P_MEAN,
    P_Q,
    P_START,
    P_VR,
)

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * MIX_C1
    z = (z ^ (z >> np.uint64(27))) * MIX_C2
    return z ^ (z >> np.uint64(31))


@njit(**_JIT)
def _draw_u64(key, j):
    return _mix64(key + (np.uint64(j) + np.uint64(1)) * GOLDEN)


@njit(**_JIT)
def _draw_unit(key, j):
    return float(_draw_u64(key, j) >> np.uint64(11)) * INV_2_53


@njit(**_JIT)
def _sample_one(kind, params, cdf, logfact, key):
    """One photon-number draw; returns (count, draws consumed)."""
    if kind == KIND_POISSON_INV:
        # CDF walk; cap guards against float saturation of the partial sum
        u = _draw_unit(key, 0)
        nbar = params[P_MEAN]
        cap = int(params[P_CAP])
        x = 0
        p = params[P_START]
        s = p
        while u > s and x < cap:
            x += 1
            p *= nbar / x
            s += p
        return x, 1

    elif kind == KIND_POISSON_PTRS:
        # Hormann-style transformed rejection for mean >= 10
        mu = params[P_MEAN]
        b = params[P_B]
        a = params[P_A]
        inv_alpha = params[P_INVALPHA]
        vr = params[P_VR]
        lnmu = params[P_LNMU]
        j = 0
        while True:
            u = _draw_unit(key, j) - 0.5
            v = _draw_unit(key, j + 1)
            j += 2
            us = 0.5 - abs(u)
            if us <= 0.0 or v <= 0.0:
                continue
            n = math.floor((2.0 * a / us + b) * u + mu + 0.43)
            if us >= 0.07 and v <= vr:
                return int(n), j
            if n < 0.0 or (us < 0.013 and v > us):
                continue
            if n >= logfact.shape[0]:
                # acceptance is impossible this far out in the tail
                continue
            lhs = math.log(v * inv_alpha / (a / (us * us) + b))
            rhs = n * lnmu - mu - logfact[int(n)]
            if lhs <= rhs:
                return int(n), j

    elif kind == KIND_GEOMETRIC:
        u = _draw_unit(key, 0)
        q = params[P_Q]
        cap = int(params[P_CAP])
        x = 0
        c = params[P_START]
        s = c
        while u > s and x < cap:
            c *= q
            s += c
            x += 1
        return x, 1

    else:  # KIND_TABLE: inverse CDF over a finite table
        u = _draw_unit(key, 0)
        last = cdf.shape[0] - 1
        idx = 0
        while idx < last and u >= cdf[idx]:
            idx += 1
        return idx, 1


@njit(**_JIT)
def sample_counts(kind, params, cdf, logfact, keys, out_n, out_j):
    """Per-pulse photon numbers for an array of pulse keys.

    ``out_j`` receives the number of draws each pulse consumed, which the
    detection kernel uses as its starting draw offset.
    """
    for i in range(keys.shape[0]):
        n, j = _sample_one(kind, params, cdf, logfact, keys[i])
        out_n[i] = n
        out_j[i] = j


@njit(**_JIT)
def _detect_one(det, eta, ports, dark, max_count, key, j0, true_n):
    """One detection; returns (reported count, port click mask, draws)."""
    if det == DET_IDEAL:
        return true_n, np.uint64(0), 0

    j = j0
    survivors = 0
    for _ in range(true_n):
        if _draw_unit(key, j) < eta:
            survivors += 1
        j += 1

    if det == DET_SATURATING:
        reported = survivors
        if reported > max_count:
            reported = max_count
        return reported, np.uint64(0), j - j0

    # multiplexed: route survivors uniformly, then per-port dark clicks
    mask = np.uint64(0)
    for _ in range(survivors):
        port = _draw_u64(key, j) % np.uint64(ports)
        mask |= np.uint64(1) << port
        j += 1
    for p in range(ports):
        if _draw_unit(key, j) < dark:
            mask |= np.uint64(1) << np.uint64(p)
        j += 1
    reported = 0
    m = mask
    while m != np.uint64(0):
        m &= m - np.uint64(1)
        reported += 1
    return reported, mask, j - j0


@njit(**_JIT)
def detect_counts(det, eta, ports, dark, max_count, keys, j0, true_n,
                  out_rep, out_mask):
    """Reported counts (and multiplexed click masks) for an array of pulses."""
    for i in range(keys.shape[0]):
        rep, mask, _ = _detect_one(det, eta, ports, dark, max_count,
                                   keys[i], j0[i], true_n[i])
        out_rep[i] = rep
        out_mask[i] = mask
