"""Post-selection of GBS samples on their total photon number.

A sample with total photon number N is kept with probability
``c^(alpha - N) (eta'/eta)^N`` for ``N <= N0`` and dropped above ``N0``;
``alpha`` is fixed by requiring probability one at ``N0``. The kept samples
are distributed as those of an experiment with squeezing ``r'``
(``tanh r / tanh r' = c``) and transmission ``eta' = 1 - (1 - eta) c``,
conditioned on ``N <= N0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from .fock import SqueezerBank, binomial_thin, default_cutoff, pmf_mode, total_photon_pmf

__all__ = [
    "PostSelectionPolicy",
    "SampleRecord",
    "YieldEstimate",
    "mapping_ratio",
    "equivalent_transmission",
    "max_equivalent_transmission",
    "retention_exponent",
    "build_policy",
    "build_nonuniform_policy",
    "build_cat_policy",
    "post_selection_probability",
    "post_selection_probability_nonuniform",
    "cat_post_selection_probability",
    "pnr_suppression_ratio",
    "postselection_yield",
    "default_truncation",
    "mode_truncation",
    "apply_postselection",
]


def mapping_ratio(r: float | Sequence[float], r_prime: float | Sequence[float], rtol: float = 1e-10) -> float:
    """Common ratio ``c = tanh r_i / tanh r'_i``; must be the same for every squeezer and < 1."""
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    rps = np.atleast_1d(np.asarray(r_prime, dtype=float))
    if rs.shape != rps.shape:
        raise ValueError(f"r and r_prime differ in length ({rs.size} vs {rps.size})")
    if rs.size == 0 or np.any(rs <= 0) or np.any(rps <= 0):
        raise ValueError("squeezing strengths must all be > 0")
    ratios = np.tanh(rs) / np.tanh(rps)
    c = float(ratios[0])
    if np.any(np.abs(ratios - c) > rtol * c):
        raise ValueError(f"inputs not mappable: tanh ratios {ratios.tolist()} are not constant")
    if c >= 1.0:
        raise ValueError(f"post-selection needs c < 1 (r' > r), got c = {c}")
    return c


def equivalent_transmission(eta: float, c: float) -> float:
    """``eta' = 1 - (1 - eta) c``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {eta}")
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    return 1.0 - (1.0 - eta) * c


def max_equivalent_transmission(eta: float, r: float) -> float:
    """Supremum of ``eta'`` over all target squeezings, ``1 - (1 - eta) tanh r``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {eta}")
    if r <= 0:
        raise ValueError(f"squeezing must be > 0, got {r}")
    return 1.0 - (1.0 - eta) * math.tanh(r)


def retention_exponent(c: float, gain: float, n0: int) -> float:
    """``alpha`` with ``c^(alpha - N0) gain^N0 = 1``, i.e. ``N0 (1 - ln gain / ln c)``."""
    return n0 * (1.0 - math.log(gain) / math.log(c))


@dataclass(frozen=True)
class PostSelectionPolicy:
    """Immutable retention rule.

    ``variant`` is ``"uniform"``, ``"per_mode"`` (``mode_etas`` and
    ``mode_eta_primes`` set) or ``"cat"`` (``cat_alpha``/``cat_beta`` set).
    ``alpha`` is the exponent of the retention formula; it is unrelated to the
    cat amplitudes.
    """

    c: float
    eta: float
    eta_prime: float
    n0: int
    alpha: float
    variant: str = "uniform"
    mode_etas: tuple[float, ...] = ()
    mode_eta_primes: tuple[float, ...] = ()
    cat_alpha: complex | None = None
    cat_beta: complex | None = None

    def __post_init__(self):
        if self.n0 < 0:
            raise ValueError(f"N0 must be >= 0, got {self.n0}")
        if self.variant not in ("uniform", "per_mode", "cat"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "per_mode":
            return
        if abs(self.eta_prime - (1.0 - (1.0 - self.eta) * self.c)) > 1e-12:
            raise ValueError("eta_prime must equal 1 - (1 - eta) c")
        # the literal formula and the overflow-safe closed form must agree
        for n in {0, max(self.n0 - 1, 0), self.n0}:
            literal = (self.alpha - n) * math.log(self.c) + n * math.log(self.eta_prime / self.eta)
            closed = (n - self.n0) * self.log_gain
            if abs(literal - closed) > 1e-9 * max(1.0, abs(closed)):
                raise ValueError("alpha does not satisfy P_post(N0) = 1")

    @property
    def log_gain(self) -> float:
        """log of the per-photon retention ratio, ``ln(eta' / (c eta))`` (> 0)."""
        if self.variant == "per_mode":
            return math.log(max(p / e for p, e in zip(self.mode_eta_primes, self.mode_etas)) / self.c)
        return math.log(self.eta_prime / (self.c * self.eta))

    def probability(self, total: int) -> float:
        """Retention probability for a sample with ``total`` photons (total-based variants)."""
        if self.variant == "per_mode":
            raise ValueError("per-mode policies depend on the whole pattern; use pattern_probability")
        if total < 0 or total > self.n0:
            return 0.0
        return math.exp((total - self.n0) * self.log_gain)

    def pattern_probability(self, pattern: Sequence[int]) -> float:
        if self.variant != "per_mode":
            return self.probability(sum(pattern))
        return post_selection_probability_nonuniform(self, pattern)


def _positive_eta(eta: float) -> float:
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"transmission must lie in (0, 1], got {eta}")
    return float(eta)


def build_policy(r, r_prime, eta: float, n0: int) -> PostSelectionPolicy:
    """Uniform-loss policy mapping squeezing ``r`` at ``eta`` to ``r_prime`` at ``eta'``."""
    c = mapping_ratio(r, r_prime)
    eta = _positive_eta(eta)
    eta_prime = equivalent_transmission(eta, c)
    n0 = int(n0)
    return PostSelectionPolicy(c, eta, eta_prime, n0, retention_exponent(c, eta_prime / eta, n0))


def build_nonuniform_policy(r, r_prime, etas: Sequence[float], n0: int) -> PostSelectionPolicy:
    """Per-mode policy for transmissions ``etas`` that differ between detectors.

    Uses ``c^(alpha - |n|) prod_i (eta'_i / eta_i)^n_i`` with
    ``eta'_i = 1 - (1 - eta_i) c``; ``alpha`` makes the largest value over
    patterns with ``N0`` photons equal to one.
    """
    c = mapping_ratio(r, r_prime)
    etas = tuple(float(e) for e in etas)
    if any(not 0.0 <= e <= 1.0 for e in etas):
        raise ValueError("transmissions must lie in [0, 1]")
    primes = tuple(1.0 - (1.0 - e) * c for e in etas)
    usable = [p / e for p, e in zip(primes, etas) if e > 0]
    if not usable:
        raise ValueError("every mode has zero transmission")
    gain = max(usable)
    n0 = int(n0)
    mean_eta = sum(etas) / len(etas)
    return PostSelectionPolicy(
        c=c,
        eta=mean_eta,
        eta_prime=1.0 - (1.0 - mean_eta) * c,
        n0=n0,
        alpha=retention_exponent(c, gain, n0),
        variant="per_mode",
        mode_etas=etas,
        mode_eta_primes=primes,
    )


def build_cat_policy(cat_alpha: complex, cat_beta: complex, eta: float, n0: int) -> PostSelectionPolicy:
    """Policy mapping cat inputs of amplitude ``cat_alpha`` to ``cat_beta``.

    Here ``c = |cat_alpha|^2 / |cat_beta|^2`` plays the role of the tanh ratio.
    """
    a2, b2 = abs(cat_alpha) ** 2, abs(cat_beta) ** 2
    if a2 == 0 or b2 == 0:
        raise ValueError("cat amplitudes must be non-zero")
    c = a2 / b2
    if not 0.0 < c < 1.0:
        raise ValueError(f"need |cat_beta| > |cat_alpha| for loss mitigation, got c = {c}")
    eta = _positive_eta(eta)
    eta_prime = equivalent_transmission(eta, c)
    n0 = int(n0)
    return PostSelectionPolicy(
        c, eta, eta_prime, n0, retention_exponent(c, eta_prime / eta, n0),
        variant="cat", cat_alpha=complex(cat_alpha), cat_beta=complex(cat_beta),
    )


def post_selection_probability(policy: PostSelectionPolicy, total: int) -> float:
    """Retention probability for ``total`` photons; zero above ``N0``."""
    return policy.probability(total)


def post_selection_probability_nonuniform(policy: PostSelectionPolicy, pattern: Sequence[int]) -> float:
    """Per-mode retention probability ``c^(alpha-|n|) prod (eta'_i/eta_i)^n_i``."""
    if policy.variant != "per_mode":
        raise ValueError("policy is not per-mode")
    if len(pattern) != len(policy.mode_etas):
        raise ValueError("pattern length does not match the policy's mode count")
    total = sum(pattern)
    if total < 0 or total > policy.n0:
        return 0.0
    log_p = (policy.alpha - total) * math.log(policy.c)
    for n, e, p in zip(pattern, policy.mode_etas, policy.mode_eta_primes):
        if n == 0:
            continue
        if e == 0.0:
            raise ValueError("photons detected in a mode with zero transmission")
        log_p += n * math.log(p / e)
    return min(1.0, math.exp(log_p))


def cat_post_selection_probability(
    cat_alpha: complex, cat_beta: complex, eta: float, eta_prime: float, total: int, n0: int
) -> float:
    """``N'' P^beta(N) / P^alpha(N) (eta'/eta)^N`` normalised to one at ``N0``.

    For products of cat states with a common ``|beta|^2 / |alpha|^2`` the
    ratio of total-photon distributions is ``const * (|beta|^2/|alpha|^2)^N``;
    the constant cancels in the normalisation.
    """
    if total < 0 or total > n0:
        return 0.0
    a2, b2 = abs(cat_alpha) ** 2, abs(cat_beta) ** 2
    if a2 == 0 or b2 == 0:
        raise ValueError("cat amplitudes must be non-zero")
    log_gain = math.log(b2 / a2) + math.log(eta_prime / eta)
    if log_gain < -1e-15:
        raise ValueError("retention would exceed one below N0; need |beta|^2 eta' >= |alpha|^2 eta")
    return math.exp((total - n0) * log_gain)


def pnr_suppression_ratio(policy: PostSelectionPolicy, deficit: int) -> float:
    """``P_post(N - deficit) / P_post(N)``: how much an undercounted sample is suppressed."""
    return math.exp(-deficit * policy.log_gain)


@dataclass(frozen=True)
class YieldEstimate:
    """Asymptotic fraction of samples kept.

    ``truncated_mass`` is the input mass beyond the cutoff used, an upper
    bound on what the sum may be missing.
    """

    value: float
    cumulative_mass: float
    truncated_mass: float
    cutoff: int

    @property
    def truncation_warning(self) -> bool:
        return self.truncated_mass > 1e-9

    def __float__(self) -> float:
        return self.value


def postselection_yield(
    policy: PostSelectionPolicy, bank: SqueezerBank, eta: float | None = None, cutoff: int | None = None
) -> YieldEstimate:
    """``sum_{N <= N0} P_post(N) P_out(N)`` with ``P_out`` the lossy total-photon distribution."""
    if policy.variant == "per_mode":
        raise ValueError("yield from total-photon statistics needs a total-based policy")
    eta = policy.eta if eta is None else eta
    if abs(eta - policy.eta) > 1e-12:
        raise ValueError(f"policy was built for eta = {policy.eta}, got {eta}")
    if cutoff is None:
        cutoff = max(default_cutoff(bank), policy.n0)
    lossy = binomial_thin(total_photon_pmf(bank, cutoff), eta)
    n = np.arange(min(policy.n0, cutoff) + 1)
    weights = np.exp((n - policy.n0) * policy.log_gain)
    head = lossy.probabilities[: n.size]
    return YieldEstimate(
        value=float(weights @ head),
        cumulative_mass=math.fsum(head),
        truncated_mass=lossy.truncated_mass,
        cutoff=cutoff,
    )


@dataclass(frozen=True)
class SampleRecord:
    """One detected pattern moving through post-selection."""

    pattern: tuple[int, ...]
    index: int = 0
    flags: frozenset = frozenset()
    retained: bool | None = None
    retention_probability: float | None = None

    @property
    def total(self) -> int:
        return sum(self.pattern)


def default_truncation(records: Iterable[SampleRecord]) -> int:
    """Largest total photon number in a sample set (the default ``N0``)."""
    return max((rec.total for rec in records), default=0)


def mode_truncation(r: float, squeezer_count: int) -> int:
    """Most likely total photon number, the alternative choice of ``N0``."""
    return pmf_mode(r, squeezer_count)


def apply_postselection(
    records: Iterable[SampleRecord],
    policy: PostSelectionPolicy,
    rng: np.random.Generator,
    strict: bool = False,
    keep_discarded: bool = False,
) -> Iterator[SampleRecord]:
    """Keep each record iff a fresh uniform draw falls below its retention probability.

    Exactly one draw is taken per record, so equal seeds give equal output.
    Kept records come out in input order. With ``strict=True`` records
    flagged ``saturated`` are dropped (probability 0).
    """
    for rec in records:
        p = policy.pattern_probability(rec.pattern)
        if strict and "saturated" in rec.flags:
            p = 0.0
        keep = bool(rng.random() < p)
        if keep or keep_discarded:
            yield replace(rec, retained=keep, retention_probability=p)
