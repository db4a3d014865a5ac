"""Seeded stochastic sampling of per-pulse photon numbers.

Sampling is pseudo-random by design: a physical deployment replaces this
module with hardware.  Every draw is a pure function of
``(master_seed, stream_id, pulse_index)`` (counter-based splitmix64), so
streams reproduce exactly regardless of chunking, worker count or kernel
backend.

Algorithm choice per kind:

* coherent / phase-averaged: Poisson sampling, by sequential-search CDF
  inversion for mean < 10 and PTRS transformed rejection for mean >= 10
  (phase averaging leaves the photon-number law Poissonian, so both kinds
  share one sampler)
* thermal: geometric law with success parameter 1/(1 + mean), by
  sequential-search CDF inversion
* custom: inverse CDF over the finite table
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._kernel_common import (
    KIND_GEOMETRIC,
    KIND_POISSON_INV,
    KIND_POISSON_PTRS,
    KIND_TABLE,
    N_PARAMS,
    P_A,
    P_B,
    P_CAP,
    P_INVALPHA,
    P_LNMU,
    P_MEAN,
    P_Q,
    P_START,
    P_VR,
    derive_stream_key,
    pulse_keys,
)
from .photon_statistics import (
    CUSTOM,
    POISSONIAN_KINDS,
    THERMAL,
    ParameterError,
    PhotonDistribution,
)

PTRS_THRESHOLD = 10.0

_EMPTY = np.empty(0, dtype=np.float64)


@dataclass
class SeededGenerator:
    """One logical random stream, keyed by (master_seed, stream_id).

    Equal key pairs reproduce identical sample sequences; distinct
    stream_ids give statistically independent streams.  Not shareable
    across threads: each worker derives its own generator.
    """

    master_seed: int
    stream_id: int = 0
    _cursor: int = field(default=0, repr=False, compare=False)

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, int) or not (0 <= value < 2**64):
                raise ParameterError(f"{name} must be a 64-bit unsigned integer")
        self._stream_key = derive_stream_key(self.master_seed, self.stream_id)

    def take_pulse_keys(self, count: int) -> np.ndarray:
        """Keys of the next ``count`` pulses; advances the cursor."""
        keys = pulse_keys(self._stream_key, self._cursor, count)
        self._cursor += count
        return keys


def _sampler_args(dist: PhotonDistribution):
    """Kind code plus parameter/table arrays consumed by the kernels."""
    params = np.zeros(N_PARAMS)
    if dist.kind in POISSONIAN_KINDS:
        nbar = dist.mean_photons
        params[P_MEAN] = nbar
        if nbar < PTRS_THRESHOLD:
            params[P_START] = math.exp(-nbar)
            params[P_CAP] = 200.0  # Poisson mass beyond is < 1e-200
            return KIND_POISSON_INV, params, _EMPTY, _EMPTY
        b = 0.931 + 2.53 * math.sqrt(nbar)
        params[P_B] = b
        params[P_A] = -0.059 + 0.02483 * b
        params[P_INVALPHA] = 1.1239 + 1.1328 / (b - 3.4)
        params[P_VR] = 0.9277 - 3.6224 / (b - 2.0)
        params[P_LNMU] = math.log(nbar)
        # acceptance beyond this table index is impossible in float64
        table_len = int(nbar + 30.0 * math.sqrt(nbar) + 100.0)
        logfact = np.array([math.lgamma(k + 1.0) for k in range(table_len)])
        return KIND_POISSON_PTRS, params, _EMPTY, logfact
    if dist.kind == THERMAL:
        nbar = dist.mean_photons
        params[P_MEAN] = nbar
        params[P_START] = 1.0 / (1.0 + nbar)
        q = nbar / (1.0 + nbar)
        params[P_Q] = q
        # cap where the geometric tail underflows the partial sum
        params[P_CAP] = float(int(37.0 / -math.log(q)) + 30) if q > 0.0 else 1.0
        return KIND_GEOMETRIC, params, _EMPTY, _EMPTY
    if dist.kind == CUSTOM:
        cdf = np.cumsum(dist.pmf_table)
        return KIND_TABLE, params, cdf, _EMPTY
    raise ParameterError(f"unknown distribution kind {dist.kind!r}")


def sample_counts_for_keys(dist: PhotonDistribution, keys: np.ndarray
                           ) -> tuple[np.ndarray, np.ndarray]:
    """Photon numbers for explicit pulse keys.

    Returns ``(counts, draws_consumed)``; the second array seeds the
    detection stage's draw offsets in the pipeline.
    """
    kind, params, cdf, logfact = _sampler_args(dist)
    out_n = np.empty(len(keys), dtype=np.int64)
    out_j = np.empty(len(keys), dtype=np.int64)
    _backend.kernels.sample_counts(kind, params, cdf, logfact, keys, out_n, out_j)
    return out_n, out_j


def sample_photon_number(dist: PhotonDistribution, gen: SeededGenerator) -> int:
    """One photon-number draw from the distribution."""
    counts, _ = sample_counts_for_keys(dist, gen.take_pulse_keys(1))
    return int(counts[0])


def sample_pulse_train(dist: PhotonDistribution, count: int,
                       gen: SeededGenerator) -> np.ndarray:
    """``count`` photon-number draws (int64 array), one per pulse."""
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    counts, _ = sample_counts_for_keys(dist, gen.take_pulse_keys(count))
    return counts
