"""Exact photon-number and parity observables for the supported sources.

Closed forms used throughout:

* coherent light, mean photon number ``nbar``: Poissonian counts,
  parity expectation ``exp(-2*nbar)``,
  ``P_even = (1 + exp(-2*nbar))/2``, ``P_odd = (1 - exp(-2*nbar))/2``
* phase-averaged coherent light: identical photon-number law and parity
  to the pure coherent state of the same ``nbar`` (phase averaging leaves
  the number distribution untouched)
* thermal light: Bose-Einstein (geometric) counts,
  parity expectation ``1/(1 + 2*nbar)``,
  ``P_even = (1 + nbar)/(1 + 2*nbar)``, ``P_odd = nbar/(1 + 2*nbar)``

All probability mass functions are evaluated in log space so large means
and indices never overflow, and alternating sums use compensated
(Neumaier) summation in increasing photon number.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

COHERENT = "coherent"
THERMAL = "thermal"
PHASE_AVERAGED = "phase_averaged"
CUSTOM = "custom"

ANALYTIC_KINDS = (COHERENT, THERMAL, PHASE_AVERAGED)
POISSONIAN_KINDS = (COHERENT, PHASE_AVERAGED)
ALL_KINDS = ANALYTIC_KINDS + (CUSTOM,)

CUSTOM_PMF_TOL = 1e-12


class ParameterError(ValueError):
    """A parameter lies outside its allowed domain."""


class UnsupportedKindError(ParameterError):
    """Operation undefined for this distribution kind."""


class TruncationError(RuntimeError):
    """Series truncation hit the hard cap before reaching the tail bound."""

    def __init__(self, message: str, tail_mass: float):
        super().__init__(message)
        self.tail_mass = tail_mass


@dataclass(frozen=True, eq=False)
class PhotonDistribution:
    """A photon-number law: one of the analytic kinds or a finite table.

    Use the classmethod constructors; ``mean_photons`` is the dimensionless
    mean photon number for the analytic kinds, ``pmf_table`` a finite pmf
    (entries >= 0, summing to 1 within 1e-12) for the custom kind.
    """

    kind: str
    mean_photons: float = 0.0
    pmf_table: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ParameterError(f"unknown distribution kind {self.kind!r}")
        if self.kind == CUSTOM:
            if self.pmf_table is None or len(self.pmf_table) == 0:
                raise ParameterError("custom distribution needs a non-empty pmf table")
            table = np.asarray(self.pmf_table, dtype=np.float64)
            if table.ndim != 1 or not np.all(np.isfinite(table)) or np.any(table < 0):
                raise ParameterError("pmf table entries must be finite and >= 0")
            total = math.fsum(table.tolist())
            if abs(total - 1.0) > CUSTOM_PMF_TOL:
                raise ParameterError(
                    f"pmf table sums to {total!r}, expected 1 within {CUSTOM_PMF_TOL}"
                )
            table.setflags(write=False)
            object.__setattr__(self, "pmf_table", table)
            object.__setattr__(
                self, "mean_photons", float(np.arange(len(table)) @ table)
            )
        else:
            if self.pmf_table is not None:
                raise ParameterError("pmf_table is only valid for the custom kind")
            nbar = float(self.mean_photons)
            if not math.isfinite(nbar) or nbar < 0:
                raise ParameterError(f"mean_photons must be >= 0, got {nbar!r}")
            object.__setattr__(self, "mean_photons", nbar)

    @classmethod
    def coherent(cls, mean_photons: float) -> "PhotonDistribution":
        return cls(COHERENT, mean_photons)

    @classmethod
    def thermal(cls, mean_photons: float) -> "PhotonDistribution":
        return cls(THERMAL, mean_photons)

    @classmethod
    def phase_averaged(cls, mean_photons: float) -> "PhotonDistribution":
        return cls(PHASE_AVERAGED, mean_photons)

    @classmethod
    def custom(cls, pmf_table) -> "PhotonDistribution":
        return cls(CUSTOM, pmf_table=np.asarray(pmf_table, dtype=np.float64))

    def describe(self) -> dict:
        """JSON-ready descriptor (used in stream metadata and configs)."""
        if self.kind == CUSTOM:
            return {"kind": self.kind, "pmf_table": self.pmf_table.tolist()}
        return {"kind": self.kind, "mean_photons": self.mean_photons}


@dataclass(frozen=True)
class TruncationPolicy:
    """Finite-evaluation policy: tail mass bound and a hard index cap."""

    epsilon: float = 1e-15
    hard_cap: int = 4096

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ParameterError(f"epsilon must be in (0, 1), got {self.epsilon!r}")
        if self.hard_cap < 1:
            raise ParameterError(f"hard_cap must be >= 1, got {self.hard_cap!r}")


DEFAULT_POLICY = TruncationPolicy()


def pmf(dist: PhotonDistribution, n: int) -> float:
    """Probability of counting exactly ``n`` photons."""
    if n < 0:
        raise ParameterError(f"photon number must be >= 0, got {n}")
    if dist.kind == CUSTOM:
        return float(dist.pmf_table[n]) if n < len(dist.pmf_table) else 0.0
    nbar = dist.mean_photons
    if dist.kind in POISSONIAN_KINDS:
        if nbar == 0.0:
            return 1.0 if n == 0 else 0.0
        return math.exp(-nbar + n * math.log(nbar) - math.lgamma(n + 1))
    # thermal
    if nbar == 0.0:
        return 1.0 if n == 0 else 0.0
    ratio = nbar / (1.0 + nbar)
    return ratio**n / (1.0 + nbar)


def pmf_array(dist: PhotonDistribution, n_max: int) -> np.ndarray:
    """Vector of probabilities for n = 0 .. n_max inclusive."""
    if n_max < 0:
        raise ParameterError(f"n_max must be >= 0, got {n_max}")
    ns = np.arange(n_max + 1)
    if dist.kind == CUSTOM:
        out = np.zeros(n_max + 1)
        stop = min(n_max + 1, len(dist.pmf_table))
        out[:stop] = dist.pmf_table[:stop]
        return out
    nbar = dist.mean_photons
    if nbar == 0.0:
        out = np.zeros(n_max + 1)
        out[0] = 1.0
        return out
    if dist.kind in POISSONIAN_KINDS:
        return np.exp(-nbar + ns * math.log(nbar) - gammaln(ns + 1.0))
    ratio = nbar / (1.0 + nbar)
    return np.exp(ns * math.log(ratio)) / (1.0 + nbar)


def truncation_bound(dist: PhotonDistribution, epsilon: float) -> int:
    """Smallest N with cumulative pmf mass through N >= 1 - epsilon.

    Computed by direct accumulation.  For custom tables the full table
    length is returned (the table is exact; no tail model applies).
    """
    if not (0.0 < epsilon < 1.0):
        raise ParameterError(f"epsilon must be in (0, 1), got {epsilon!r}")
    if dist.kind == CUSTOM:
        return len(dist.pmf_table)
    target = 1.0 - epsilon
    acc = 0.0
    n = 0
    # far beyond any Poisson/geometric tail for sane epsilon
    limit = 1_000_000
    while n < limit:
        acc += pmf(dist, n)
        if acc >= target:
            return n
        n += 1
    raise TruncationError(
        f"tail bound {epsilon} not reached within {limit} terms", 1.0 - acc
    )


def _series_cutoff(dist: PhotonDistribution, policy: TruncationPolicy) -> int:
    """Truncation index under a policy; raises if the hard cap is too low."""
    if dist.kind == CUSTOM:
        return len(dist.pmf_table) - 1
    target = 1.0 - policy.epsilon
    acc = 0.0
    for n in range(policy.hard_cap + 1):
        acc += pmf(dist, n)
        if acc >= target:
            return n
    raise TruncationError(
        f"hard cap {policy.hard_cap} reached with tail mass {1.0 - acc:.3e} "
        f"(epsilon {policy.epsilon})",
        1.0 - acc,
    )


def moment(dist: PhotonDistribution, k: int,
           policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Truncated k-th moment of the photon number, k in {1, 2, 3, 4}."""
    if k not in (1, 2, 3, 4):
        raise ParameterError(f"moment order must be in 1..4, got {k}")
    n_max = _series_cutoff(dist, policy)
    p = pmf_array(dist, n_max)
    ns = np.arange(n_max + 1, dtype=np.float64)
    return float(math.fsum((ns**k * p).tolist()))


def _neumaier(values) -> float:
    """Compensated sum, robust to alternating cancellation."""
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def parity_expectation_closed(dist: PhotonDistribution) -> float:
    """Closed-form parity expectation (analytic kinds only)."""
    if dist.kind in POISSONIAN_KINDS:
        return math.exp(-2.0 * dist.mean_photons)
    if dist.kind == THERMAL:
        return 1.0 / (1.0 + 2.0 * dist.mean_photons)
    raise UnsupportedKindError(
        "no closed form for custom tables; use parity_expectation_series"
    )


def parity_expectation_series(dist: PhotonDistribution,
                              policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Alternating sum of (-1)^n p_n, truncated per policy."""
    n_max = _series_cutoff(dist, policy)
    p = pmf_array(dist, n_max)
    signs = np.where(np.arange(n_max + 1) % 2 == 0, 1.0, -1.0)
    return _neumaier((signs * p).tolist())


def even_odd_probabilities(dist: PhotonDistribution,
                           policy: TruncationPolicy = DEFAULT_POLICY
                           ) -> tuple[float, float]:
    """(P_even, P_odd) from the truncated series, normalized last.

    The larger component is computed first and the other as its exact
    complement, so the returned pair sums to 1.0 exactly.
    """
    n_max = _series_cutoff(dist, policy)
    p = pmf_array(dist, n_max)
    s_even = math.fsum(p[0::2].tolist())
    s_odd = math.fsum(p[1::2].tolist())
    total = s_even + s_odd
    if total <= 0.0:
        raise ParameterError("pmf carries no mass inside the truncation window")
    if s_even >= s_odd:
        p_even = s_even / total
        return p_even, 1.0 - p_even
    p_odd = s_odd / total
    return 1.0 - p_odd, p_odd


def wigner_at_origin(dist: PhotonDistribution,
                     policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Phase-space quasi-probability at the origin, (2/pi) * parity."""
    return (2.0 / math.pi) * parity_expectation_series(dist, policy)


def splitter_baseline_probabilities(mean_photons: float,
                                    efficiency: float
                                    ) -> tuple[float, float, float]:
    """Click probabilities of the weak-pulse 50:50 splitter comparator.

    A coherent pulse of mean ``mean_photons`` split 50:50 feeds two
    click/no-click detectors of the given efficiency; each fires with
    ``q = 1 - exp(-efficiency * mean_photons / 2)``.  Returns
    ``(p_no_click, p_single_click, p_double_click)``.
    """
    if not (0.0 <= efficiency <= 1.0):
        raise ParameterError(f"efficiency must be in [0, 1], got {efficiency!r}")
    if not (math.isfinite(mean_photons) and mean_photons >= 0.0):
        raise ParameterError(f"mean_photons must be >= 0, got {mean_photons!r}")
    q = -math.expm1(-efficiency * mean_photons / 2.0)
    return ((1.0 - q) ** 2, 2.0 * q * (1.0 - q), q * q)
