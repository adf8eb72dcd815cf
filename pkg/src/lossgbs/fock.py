"""Photon-number statistics of the input states.

Single-mode squeezed vacua (SMSS), their total-photon-number convolutions,
binomial loss thinning and even cat states. All factorial ratios are evaluated
in log-space so that cutoffs of a few thousand photons stay finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

__all__ = [
    "SqueezerBank",
    "Pmf",
    "CatInput",
    "TRUNCATION_TOLERANCE",
    "smss_amplitudes",
    "smss_photon_pmf",
    "smss_loss_branches",
    "thinned_smss_density",
    "total_photon_pmf",
    "total_photon_pmf_closed_form",
    "default_cutoff",
    "pmf_mode",
    "binomial_thin",
    "cat_photon_pmf",
]

TWO_PI = 2.0 * math.pi

#: truncated mass above which a Pmf carries a truncation warning
TRUNCATION_TOLERANCE = 1e-9


def _check_r(r: float) -> float:
    r = float(r)
    if not np.isfinite(r) or r < 0:
        raise ValueError(f"squeezing strength must be a finite number >= 0, got {r}")
    return r


def _check_cutoff(cutoff: int) -> int:
    if int(cutoff) != cutoff or cutoff < 0:
        raise ValueError(f"cutoff must be a non-negative integer, got {cutoff}")
    return int(cutoff)


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {eta}")
    return eta


@dataclass(frozen=True)
class SqueezerBank:
    """K single-mode squeezers feeding the first K of M modes.

    Modes ``K..M-1`` are vacuum. Phases default to pi and are stored reduced
    to ``[0, 2pi)``.
    """

    squeezing: tuple[float, ...]
    mode_count: int
    phases: tuple[float, ...] = field(default=())

    def __post_init__(self):
        squeezing = tuple(_check_r(r) for r in self.squeezing)
        phases = tuple(self.phases) if self.phases else (math.pi,) * len(squeezing)
        if len(phases) != len(squeezing):
            raise ValueError("need one phase per squeezer")
        if int(self.mode_count) != self.mode_count or self.mode_count < len(squeezing):
            raise ValueError(
                f"mode_count ({self.mode_count}) must be an integer >= squeezer count ({len(squeezing)})"
            )
        phases = tuple(float(p) % TWO_PI for p in phases)
        object.__setattr__(self, "squeezing", squeezing)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "mode_count", int(self.mode_count))

    @classmethod
    def uniform(cls, r: float, squeezer_count: int, mode_count: int | None = None) -> "SqueezerBank":
        """Bank of ``squeezer_count`` identical squeezers (phase pi)."""
        mode_count = squeezer_count if mode_count is None else mode_count
        return cls(squeezing=(float(r),) * squeezer_count, mode_count=mode_count)

    @property
    def squeezer_count(self) -> int:
        return len(self.squeezing)

    @property
    def mean_photon_number(self) -> float:
        return float(sum(math.sinh(r) ** 2 for r in self.squeezing))

    @property
    def photon_number_variance(self) -> float:
        return float(sum(2.0 * (math.sinh(r) * math.cosh(r)) ** 2 for r in self.squeezing))


@dataclass(frozen=True, eq=False)
class Pmf:
    """Truncated distribution over a photon number ``0..cutoff``.

    ``truncated_mass`` is the probability lying above the cutoff. It is kept
    as metadata and never folded back into the entries.
    """

    probabilities: np.ndarray
    truncated_mass: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probabilities must be a non-empty 1-d array")
        # convolution round-off can leave -1e-300 style negatives
        p = np.where(np.abs(p) < 1e-300, 0.0, p)
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "truncated_mass", max(0.0, float(self.truncated_mass)))

    @classmethod
    def from_truncated(cls, probabilities) -> "Pmf":
        """Wrap entries whose missing mass is entirely above the cutoff."""
        p = np.asarray(probabilities, dtype=float)
        return cls(p, truncated_mass=1.0 - math.fsum(p))

    @property
    def cutoff(self) -> int:
        return self.probabilities.size - 1

    @property
    def truncation_warning(self) -> bool:
        return self.truncated_mass > TRUNCATION_TOLERANCE

    def __len__(self) -> int:
        return self.probabilities.size

    def __getitem__(self, n):
        return self.probabilities[n]

    def total(self) -> float:
        return math.fsum(self.probabilities)

    def mean(self) -> float:
        return float(np.arange(self.probabilities.size) @ self.probabilities)

    def cumulative(self, n: int) -> float:
        """P(N <= n) over the stored entries."""
        return math.fsum(self.probabilities[: n + 1])


def smss_amplitudes(r: float, phase: float, cutoff: int) -> np.ndarray:
    """Fock amplitudes <n|r, phase> of a single-mode squeezed vacuum.

    Uses the series ``(cosh r)^-1/2 sum_k sqrt((2k)!)/k! (-e^{i phase} tanh(r)/2)^k |2k>``.
    At ``phase = pi`` every amplitude is real and non-negative.

    Args:
        r: squeezing strength, ``r >= 0``
        phase: squeezing phase in radians
        cutoff: largest photon number returned

    Returns:
        complex array of length ``cutoff + 1``; odd entries are exactly zero
    """
    r = _check_r(r)
    cutoff = _check_cutoff(cutoff)
    amps = np.zeros(cutoff + 1, dtype=complex)
    if r == 0.0:
        amps[0] = 1.0
        return amps
    k = np.arange(cutoff // 2 + 1)
    log_mag = (
        0.5 * gammaln(2 * k + 1)
        - gammaln(k + 1)
        + k * math.log(math.tanh(r) / 2.0)
        - 0.5 * math.log(math.cosh(r))
    )
    # (-e^{i phase})^k = e^{i k (phase + pi)}; reduce the angle before the exponential
    angle = np.mod(k * (float(phase) + math.pi), TWO_PI)
    amps[0::2] = np.exp(log_mag) * np.exp(1j * angle)
    return amps


def smss_photon_pmf(r: float, cutoff: int) -> Pmf:
    """Photon-number distribution of a squeezed vacuum (negative binomial on even n)."""
    r = _check_r(r)
    cutoff = _check_cutoff(cutoff)
    p = np.zeros(cutoff + 1)
    if r == 0.0:
        p[0] = 1.0
        return Pmf(p)
    n = np.arange(0, cutoff + 1, 2)
    logp = (
        -math.log(math.cosh(r))
        + gammaln(n + 1)
        - n * math.log(2.0)
        - 2.0 * gammaln(n / 2 + 1)
        + n * math.log(math.tanh(r))
    )
    p[0::2] = np.exp(logp)
    return Pmf.from_truncated(p)


def _smss_tail_length(r: float) -> int:
    # photons needed before |amplitude|^2 falls below ~1e-40
    if r == 0.0:
        return 0
    per_pair = -2.0 * math.log(math.tanh(r))
    return min(4000, 2 * int(math.ceil(92.0 / per_pair)) + 2)


def smss_loss_branches(r: float, phase: float, eta: float, cutoff: int, max_lost: int | None = None) -> np.ndarray:
    """Kraus branches of a lossy squeezed vacuum.

    Row ``k`` holds ``sqrt(C(n+k, k) eta^n (1-eta)^k) psi_{n+k}`` for ``n = 0..cutoff``:
    the (unnormalised) state left in the mode when exactly ``k`` photons were
    lost. With ``max_lost=None`` the branches run until the input amplitudes
    are negligible; otherwise the input is truncated at ``cutoff + max_lost``
    photons in the mode.
    """
    r = _check_r(r)
    eta = _check_eta(eta)
    cutoff = _check_cutoff(cutoff)
    lost = _smss_tail_length(r) if max_lost is None else _check_cutoff(max_lost)
    psi = smss_amplitudes(r, phase, cutoff + lost)
    n = np.arange(cutoff + 1)[None, :]
    k = np.arange(lost + 1)[:, None]
    logw = (
        0.5 * (gammaln(n + k + 1) - gammaln(n + 1) - gammaln(k + 1))
        + 0.5 * xlogy(n, eta)
        + 0.5 * xlog1py(k, -eta)
    )
    return np.exp(logw) * psi[n + k]


def thinned_smss_density(r: float, phase: float, eta: float, cutoff: int) -> np.ndarray:
    """Density matrix of a squeezed vacuum after a pure-loss channel of transmission ``eta``.

    ``rho(n, l) = sum_k sqrt(C(n+k,k) C(l+k,k)) eta^{(n+l)/2} (1-eta)^k psi_{n+k} psi*_{l+k}``,
    i.e. binomial thinning that keeps the coherences. The sum over lost photons
    runs until the input amplitudes are negligible, so entries up to ``cutoff``
    are exact to double precision.
    """
    w = smss_loss_branches(r, phase, eta, cutoff)
    return w.T @ w.conj()


def default_cutoff(bank: SqueezerBank) -> int:
    """Smallest N holding input mass >= 1 - 1e-10, capped at mean + 12 sd (floor 64)."""
    cap = int(math.ceil(bank.mean_photon_number + 12.0 * math.sqrt(bank.photon_number_variance)))
    cap = max(cap, 64)
    cdf = np.cumsum(total_photon_pmf(bank, cap).probabilities)
    hits = np.nonzero(cdf >= 1.0 - 1e-10)[0]
    return int(hits[0]) if hits.size else cap


def _convolve(a: np.ndarray, b: np.ndarray, cutoff: int) -> np.ndarray:
    return np.convolve(a, b)[: cutoff + 1]


def _power(p: np.ndarray, k: int, cutoff: int) -> np.ndarray:
    result = np.zeros(cutoff + 1)
    result[0] = 1.0
    base = p
    while k:
        if k & 1:
            result = _convolve(result, base, cutoff)
        k >>= 1
        if k:
            base = _convolve(base, base, cutoff)
    return result


def total_photon_pmf(bank: SqueezerBank, cutoff: int | None = None) -> Pmf:
    """Distribution of the total photon number injected by ``bank``.

    Squeezers sharing a strength are combined by exponentiation-by-squaring of
    their common marginal, so 216 identical squeezers cost O(log 216)
    convolutions. Mass convolved past ``cutoff`` ends up in ``truncated_mass``.
    """
    if cutoff is None:
        cutoff = default_cutoff(bank)
    cutoff = _check_cutoff(cutoff)
    groups: dict[float, int] = {}
    for r in bank.squeezing:
        if r > 0.0:
            groups[r] = groups.get(r, 0) + 1
    p = np.zeros(cutoff + 1)
    p[0] = 1.0
    for r in sorted(groups):
        marginal = smss_photon_pmf(r, cutoff).probabilities
        p = _convolve(p, _power(marginal, groups[r], cutoff), cutoff)
    return Pmf.from_truncated(p)


def total_photon_pmf_closed_form(r: float, squeezer_count: int, cutoff: int) -> Pmf:
    """Closed-form total-photon distribution for K identical squeezers.

    ``P(N) = C(N/2 + K/2 - 1, N/2) sech(r)^K tanh(r)^N`` for even N, zero for odd N.
    """
    r = _check_r(r)
    cutoff = _check_cutoff(cutoff)
    if squeezer_count < 1:
        raise ValueError("need at least one squeezer")
    p = np.zeros(cutoff + 1)
    if r == 0.0:
        p[0] = 1.0
        return Pmf(p)
    half_n = np.arange(0, cutoff + 1, 2) / 2
    half_k = squeezer_count / 2
    logp = (
        gammaln(half_n + half_k)
        - gammaln(half_n + 1)
        - gammaln(half_k)
        - squeezer_count * math.log(math.cosh(r))
        + 2 * half_n * math.log(math.tanh(r))
    )
    p[0::2] = np.exp(logp)
    return Pmf.from_truncated(p)


def pmf_mode(r: float, squeezer_count: int) -> int:
    """Most likely total photon number, ``2 floor((K/2 - 1) sinh^2 r)``."""
    r = _check_r(r)
    if squeezer_count < 2:
        raise ValueError(f"mode formula needs K >= 2, got {squeezer_count}")
    return 2 * int(math.floor((squeezer_count / 2 - 1) * math.sinh(r) ** 2))


def binomial_thin(pmf: Pmf, eta: float) -> Pmf:
    """Let every photon survive independently with probability ``eta``.

    ``P_out(m) = sum_{N>=m} P(N) C(N, m) eta^m (1-eta)^(N-m)``. The stored mass
    is preserved exactly; ``truncated_mass`` is carried over unchanged.
    """
    eta = _check_eta(eta)
    p = pmf.probabilities
    size = p.size
    N = np.arange(size)[:, None]
    m = np.arange(size)[None, :]
    below = m <= N
    with np.errstate(invalid="ignore"):
        logk = (
            gammaln(N + 1)
            - gammaln(m + 1)
            - gammaln(np.where(below, N - m, 0) + 1)
            + xlogy(m, eta)
            + xlog1py(np.where(below, N - m, 0), -eta)
        )
    kernel = np.where(below, np.exp(logk), 0.0)
    return Pmf(p @ kernel, truncated_mass=pmf.truncated_mass)


def cat_photon_pmf(alpha: complex, cutoff: int) -> Pmf:
    """Photon-number distribution of the even cat state (|a> + |-a>)/norm.

    ``P(n) = 4 e^{-|a|^2} |a|^{2n} / n! / (2 + 2 e^{-2|a|^2})`` for even n, zero for odd n.
    """
    cutoff = _check_cutoff(cutoff)
    a2 = abs(complex(alpha)) ** 2
    p = np.zeros(cutoff + 1)
    n = np.arange(0, cutoff + 1, 2)
    logp = math.log(4.0) - a2 + xlogy(n, a2) - gammaln(n + 1) - math.log(2.0 + 2.0 * math.exp(-2.0 * a2))
    p[0::2] = np.exp(logp)
    return Pmf.from_truncated(p)


@dataclass(frozen=True)
class CatInput:
    """Product of even cat states, one amplitude per occupied mode."""

    amplitudes: tuple[complex, ...]
    mode_count: int

    def __post_init__(self):
        amps = tuple(complex(a) for a in self.amplitudes)
        if any(a == 0 for a in amps):
            raise ValueError("cat amplitudes must be non-zero")
        if self.mode_count < len(amps):
            raise ValueError("more cat amplitudes than modes")
        object.__setattr__(self, "amplitudes", amps)

    def pattern_probability(self, pattern: Sequence[int]) -> float:
        """Joint probability of a Fock pattern on all modes (vacuum beyond the cats)."""
        if len(pattern) != self.mode_count:
            raise ValueError("pattern length does not match mode_count")
        prob = 1.0
        for i, n in enumerate(pattern):
            if i < len(self.amplitudes):
                prob *= cat_photon_pmf(self.amplitudes[i], n)[n]
            elif n:
                return 0.0
        return prob
