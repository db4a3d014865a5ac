"""Detector models: true photon number -> reported count.

Three kinds:

* ``ideal`` -- reports the true photon number (unit efficiency, no clipping)
* ``saturating`` -- binomial thinning at the detector efficiency, then the
  reported count clips at ``max_count`` (transition-edge-sensor style;
  default clip 6)
* ``multiplexed`` -- a balanced splitter cascade spreads surviving photons
  uniformly over ``ports`` binary click detectors; each port can also fire
  on a dark count; the reported count is the number of ports that clicked

``click_distribution_exact`` is the exact law of the reported count and is
kept independent of the Monte-Carlo ``detect`` path so each can check the
other.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from ._kernel_common import DET_IDEAL, DET_MULTIPLEXED, DET_SATURATING
from .photon_statistics import (
    ParameterError,
    PhotonDistribution,
    TruncationPolicy,
    DEFAULT_POLICY,
    _series_cutoff,
    pmf_array,
)
from .sources import SeededGenerator, sample_counts_for_keys

IDEAL = "ideal"
SATURATING = "saturating"
MULTIPLEXED = "multiplexed"

MAX_PORTS = 64  # port click patterns are carried in a 64-bit mask


@dataclass(frozen=True)
class DetectorModel:
    """How a true photon number becomes a reported count."""

    kind: str
    efficiency: float = 1.0
    max_count: int = 6
    ports: int = 1
    dark_click_prob: float = 0.0

    def __post_init__(self):
        if self.kind not in (IDEAL, SATURATING, MULTIPLEXED):
            raise ParameterError(f"unknown detector kind {self.kind!r}")
        if not (0.0 <= self.efficiency <= 1.0):
            raise ParameterError(
                f"efficiency must be in [0, 1], got {self.efficiency!r}")
        if self.kind == IDEAL and self.efficiency != 1.0:
            raise ParameterError("ideal detector implies efficiency 1")
        if self.kind == SATURATING and self.max_count < 1:
            raise ParameterError(f"max_count must be >= 1, got {self.max_count!r}")
        if self.kind == MULTIPLEXED:
            if not (1 <= self.ports <= MAX_PORTS):
                raise ParameterError(
                    f"ports must be in 1..{MAX_PORTS}, got {self.ports!r}")
            if not (0.0 <= self.dark_click_prob < 1.0):
                raise ParameterError(
                    f"dark_click_prob must be in [0, 1), got {self.dark_click_prob!r}")

    @classmethod
    def ideal(cls) -> "DetectorModel":
        return cls(IDEAL)

    @classmethod
    def saturating(cls, efficiency: float = 1.0, max_count: int = 6
                   ) -> "DetectorModel":
        return cls(SATURATING, efficiency=efficiency, max_count=max_count)

    @classmethod
    def multiplexed(cls, ports: int, efficiency: float = 1.0,
                    dark_click_prob: float = 0.0) -> "DetectorModel":
        return cls(MULTIPLEXED, efficiency=efficiency, ports=ports,
                   dark_click_prob=dark_click_prob)

    def describe(self) -> dict:
        if self.kind == IDEAL:
            return {"kind": self.kind}
        if self.kind == SATURATING:
            return {"kind": self.kind, "efficiency": self.efficiency,
                    "max_count": self.max_count}
        return {"kind": self.kind, "efficiency": self.efficiency,
                "ports": self.ports, "dark_click_prob": self.dark_click_prob}


@dataclass(frozen=True)
class DetectionOutcome:
    """Result of one detection; ``clicks`` is per-port (multiplexed only)."""

    reported_count: int
    true_count: int
    clicks: tuple[bool, ...] | None = None


def _detector_args(model: DetectorModel):
    if model.kind == IDEAL:
        return DET_IDEAL, 1.0, 1, 0.0, 0
    if model.kind == SATURATING:
        return DET_SATURATING, model.efficiency, 1, 0.0, model.max_count
    return DET_MULTIPLEXED, model.efficiency, model.ports, model.dark_click_prob, 0


def detect_counts_for_keys(model: DetectorModel, true_counts: np.ndarray,
                           keys: np.ndarray, draw_offsets: np.ndarray
                           ) -> tuple[np.ndarray, np.ndarray]:
    """Reported counts (and port-click masks) for explicit pulse keys."""
    det, eta, ports, dark, max_count = _detector_args(model)
    out_rep = np.empty(len(keys), dtype=np.int64)
    out_mask = np.empty(len(keys), dtype=np.uint64)
    _backend.kernels.detect_counts(det, eta, ports, dark, max_count, keys,
                                   draw_offsets, true_counts, out_rep, out_mask)
    return out_rep, out_mask


def detect(model: DetectorModel, true_n: int, gen: SeededGenerator
           ) -> DetectionOutcome:
    """Simulate one detection of ``true_n`` incident photons."""
    if true_n < 0:
        raise ParameterError(f"true_n must be >= 0, got {true_n}")
    keys = gen.take_pulse_keys(1)
    true_counts = np.array([true_n], dtype=np.int64)
    offsets = np.zeros(1, dtype=np.int64)
    reported, masks = detect_counts_for_keys(model, true_counts, keys, offsets)
    clicks = None
    if model.kind == MULTIPLEXED:
        mask = int(masks[0])
        clicks = tuple(bool(mask >> p & 1) for p in range(model.ports))
    return DetectionOutcome(int(reported[0]), true_n, clicks)


def _binomial_pmf(n: int, p: float) -> np.ndarray:
    """Exact-in-float binomial law over 0..n (log-space for stability)."""
    if n == 0:
        return np.ones(1)
    if p <= 0.0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    if p >= 1.0:
        out = np.zeros(n + 1)
        out[n] = 1.0
        return out
    k = np.arange(n + 1, dtype=np.float64)
    log_comb = (math.lgamma(n + 1)
                - np.array([math.lgamma(v + 1) for v in k])
                - np.array([math.lgamma(n - v + 1) for v in k]))
    return np.exp(log_comb + k * math.log(p) + (n - k) * math.log(1.0 - p))


def _occupancy_pmf(photons: int, ports: int) -> np.ndarray:
    """Law of the number of occupied ports after uniform routing.

    Dynamic program over one photon at a time: a new photon hits an
    already-occupied port with probability j/ports.  Equivalent to the
    Stirling-number partition formula but stable for any size.
    """
    occ = np.zeros(ports + 1)
    occ[0] = 1.0
    for _ in range(photons):
        nxt = np.zeros(ports + 1)
        for j in range(ports + 1):
            if occ[j] == 0.0:
                continue
            nxt[j] += occ[j] * (j / ports)
            if j < ports:
                nxt[j + 1] += occ[j] * ((ports - j) / ports)
        occ = nxt
    return occ


def click_distribution_exact(model: DetectorModel, true_n: int) -> np.ndarray:
    """Exact pmf of the reported count given ``true_n`` incident photons.

    Index k of the returned array is P(reported == k).  Sums binomial
    thinning, uniform routing (occupancy law) and independent per-port
    dark clicks; masses sum to 1 within 1e-12.
    """
    if true_n < 0:
        raise ParameterError(f"true_n must be >= 0, got {true_n}")
    if model.kind == IDEAL:
        out = np.zeros(true_n + 1)
        out[true_n] = 1.0
        return out

    thinned = _binomial_pmf(true_n, model.efficiency)

    if model.kind == SATURATING:
        top = min(true_n, model.max_count)
        out = np.zeros(top + 1)
        out[:top] = thinned[:top]
        out[top] = thinned[top:].sum()
        return out

    ports = model.ports
    dark = model.dark_click_prob
    out = np.zeros(ports + 1)
    for k, pk in enumerate(thinned):
        if pk == 0.0:
            continue
        occ = _occupancy_pmf(k, ports)
        for j, pj in enumerate(occ):
            if pj == 0.0:
                continue
            dark_law = _binomial_pmf(ports - j, dark)
            out[j:j + len(dark_law)] += pk * pj * dark_law
    return out


def effective_parity_bias(model: DetectorModel, dist: PhotonDistribution,
                          policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Expectation of (-1)^reported under source + detector, exactly.

    Quantifies how detector imperfections perturb the source's ideal
    parity expectation; for the ideal detector it reduces to the
    truncated parity series.
    """
    n_max = _series_cutoff(dist, policy)
    p = pmf_array(dist, n_max)
    total = 0.0
    comp = 0.0
    for n in range(n_max + 1):
        if p[n] == 0.0:
            continue
        law = click_distribution_exact(model, n)
        signs = np.where(np.arange(len(law)) % 2 == 0, 1.0, -1.0)
        term = p[n] * float(signs @ law)
        t = total + term
        if abs(total) >= abs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
    return total + comp
