"""Shared constants and key derivation for the sampling/detection kernels.

Randomness is counter-based: every pulse owns a 64-bit key, and draw ``j``
of that pulse is ``mix64(key + (j + 1) * GOLDEN)``.  Keys are derived
hierarchically from ``(master_seed, stream_id, pulse_index)`` so a pulse's
entire history is a pure function of those three integers.  This is what
makes output independent of chunk scheduling and lets the numba and numpy
backends produce bit-identical streams.

Draw-consumption contract (both backends MUST follow it exactly):

* sampling
    - Poisson inversion, geometric, table lookup: 1 draw per pulse
    - Poisson PTRS rejection: 2 draws per attempt, retried until accepted;
      attempts with ``u64 == 0`` in either slot are rejected outright so
      that ``log``/division never see 0 (perturbs the law by ~2^-53)
* detection (draw counter continues where sampling stopped)
    - ideal: no draws
    - saturating: ``true_n`` thinning draws (consumed even when eta is 0/1)
    - multiplexed: ``true_n`` thinning draws, one raw u64 per surviving
      photon (port routing, ``u64 % ports``), then ``ports`` dark-click
      draws (consumed even when the dark probability is 0)

Unit doubles come from the top 53 bits: ``(u64 >> 11) * 2**-53`` in [0, 1).
All per-draw arithmetic is exact IEEE float64 or uint64, so both backends
agree bit for bit; the only transcendental evaluated per draw (the PTRS
acceptance log) is routed through libm in both.
"""

import numpy as np

U64 = np.uint64
MASK64 = (1 << 64) - 1

# splitmix64 finalizer constants; GOLDEN2 keys the pulse level so the
# pulse-key and draw-level Weyl sequences never share an increment
GOLDEN = U64(0x9E3779B97F4A7C15)
GOLDEN2 = U64(0xD1B54A32D192ED03)
MIX_C1 = U64(0xBF58476D1CE4E5B9)
MIX_C2 = U64(0x94D049BB133111EB)

INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53

# sampler kind codes (params slot layout below)
KIND_POISSON_INV = 0
KIND_POISSON_PTRS = 1
KIND_GEOMETRIC = 2
KIND_TABLE = 3

# detector kind codes
DET_IDEAL = 0
DET_SATURATING = 1
DET_MULTIPLEXED = 2

# params vector slots (float64[10]); unused slots stay 0
P_MEAN = 0       # Poisson mean / geometric mean
P_START = 1      # exp(-mean) for inversion, 1/(1+mean) for geometric
P_CAP = 2        # iteration cap for the CDF-walk samplers
P_B = 3          # PTRS hat parameters
P_A = 4
P_INVALPHA = 5
P_VR = 6
P_LNMU = 7
P_Q = 8          # geometric ratio mean/(1+mean)
N_PARAMS = 10


def mix64_int(z: int) -> int:
    """Reference splitmix64 finalizer on plain Python integers."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix64_np(z):
    """Vectorized splitmix64 finalizer on uint64 arrays (wraps silently)."""
    z = (z ^ (z >> U64(30))) * MIX_C1
    z = (z ^ (z >> U64(27))) * MIX_C2
    return z ^ (z >> U64(31))


def derive_stream_key(master_seed: int, stream_id: int) -> int:
    """64-bit key of one logical stream; pure in (master_seed, stream_id)."""
    h = mix64_int((master_seed + 0x9E3779B97F4A7C15) & MASK64)
    return mix64_int(h ^ mix64_int((stream_id + 0xD1B54A32D192ED03) & MASK64))


def pulse_keys(stream_key: int, start: int, count: int) -> np.ndarray:
    """Keys of pulses ``start .. start+count-1`` within one stream."""
    idx = np.arange(start, start + count, dtype=np.uint64)
    return mix64_np(U64(stream_key) ^ ((idx + U64(1)) * GOLDEN2))


def draw_u64_int(pulse_key: int, j: int) -> int:
    """Reference draw: raw u64 number ``j`` of a pulse (Python ints)."""
    return mix64_int((pulse_key + (j + 1) * 0x9E3779B97F4A7C15) & MASK64)
