"""End-to-end runs: exact distribution, sampling, detection, post-selection."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .config import ConfigError, ExperimentConfig
from .fock import SqueezerBank
from .linear_optics import PatternDistribution, gaussian_output_distribution, lossy_output_distribution
from .loss import apply_detector_model, split_nonuniform_loss, LossModel
from .postselection import (
    PostSelectionPolicy,
    SampleRecord,
    apply_postselection,
    build_nonuniform_policy,
    build_policy,
    default_truncation,
)

__all__ = [
    "LossChannel",
    "SimulationResult",
    "resolve_channel",
    "target_r_prime",
    "exact_distribution",
    "draw_patterns",
    "simulate",
    "write_samples",
    "read_samples",
    "SampleFormatError",
    "FLAG_NAMES",
]

FLAG_NAMES = ("saturated", "dark_suspect")


@dataclass(frozen=True)
class LossChannel:
    """Loss of a run after folding in detector efficiencies.

    ``kind`` is ``"uniform"`` (``eta`` ahead of the network) or ``"detector"``
    (``transfer`` already contains the network, ``diag`` loss or a general
    loss matrix applied after it).
    """

    kind: str
    eta: float
    etas: tuple[float, ...] = ()
    loss_matrix: np.ndarray | None = None


def resolve_channel(loss: LossModel, efficiencies: Sequence[float] | None, modes: int) -> LossChannel:
    if loss.kind == "uniform" and efficiencies is None:
        return LossChannel("uniform", loss.etas[0])
    effs = np.ones(modes) if efficiencies is None else np.asarray(efficiencies, dtype=float)
    if loss.kind == "general":
        mat = np.diag(np.sqrt(effs)) @ loss.transfer_matrix(modes)
        eta_u, _ = split_nonuniform_loss(LossModel.general(mat))
        return LossChannel("detector", eta_u, loss_matrix=mat)
    etas = tuple(float(e) for e in np.asarray(loss.transfer_matrix(modes).diagonal().real) ** 2 * effs)
    return LossChannel("detector", max(etas), etas=etas)


def target_r_prime(bank: SqueezerBank, r_prime: Sequence[float] | None, c: float | None) -> tuple[float, ...]:
    """Per-squeezer ``r'`` from either an explicit list/scalar or the ratio ``c``."""
    rs = bank.squeezing
    if c is not None:
        if not 0.0 < c < 1.0:
            raise ConfigError(f"policy.c must lie in (0, 1), got {c}")
        ratios = [math.tanh(r) / c for r in rs]
        if any(t >= 1.0 for t in ratios):
            raise ConfigError(f"c = {c} is too small: tanh(r)/c must stay below 1")
        return tuple(math.atanh(t) for t in ratios)
    r_prime = tuple(r_prime)
    if len(r_prime) == 1 and len(rs) > 1:
        if len(set(rs)) != 1:
            raise ConfigError("squeezers differ; give r_prime per squeezer or give c")
        r_prime = r_prime * len(rs)
    if len(r_prime) != len(rs):
        raise ConfigError(f"policy.r_prime has {len(r_prime)} entries for {len(rs)} squeezers")
    return r_prime


def exact_distribution(bank: SqueezerBank, u: np.ndarray, channel: LossChannel, cutoff: int) -> PatternDistribution:
    if channel.kind == "uniform":
        return lossy_output_distribution(bank, u, channel.eta, cutoff)
    if channel.loss_matrix is not None:
        return gaussian_output_distribution(bank, channel.loss_matrix @ u, cutoff)
    return gaussian_output_distribution(bank, np.diag(np.sqrt(channel.etas)) @ u, cutoff)


def _policy_and_target(
    cfg: ExperimentConfig, channel: LossChannel, r_prime: tuple[float, ...], n0: int
) -> tuple[PostSelectionPolicy, LossChannel]:
    bank = cfg.bank
    variant = cfg.policy.variant
    if channel.kind == "uniform":
        policy = build_policy(bank.squeezing, r_prime, channel.eta, n0)
        return policy, LossChannel("uniform", policy.eta_prime)
    if channel.etas and variant in ("auto", "per_mode"):
        policy = build_nonuniform_policy(bank.squeezing, r_prime, channel.etas, n0)
        return policy, LossChannel("detector", max(policy.mode_eta_primes), etas=policy.mode_eta_primes)
    if variant == "per_mode":
        raise ConfigError("per_mode policy needs per-mode (diagonal) loss")
    # extract the uniform layer sqrt(eta_u) and map it alone
    policy = build_policy(bank.squeezing, r_prime, channel.eta, n0)
    scale = math.sqrt(policy.eta_prime / channel.eta)
    if channel.loss_matrix is not None:
        return policy, LossChannel("detector", policy.eta_prime, loss_matrix=scale * channel.loss_matrix)
    etas = tuple(e * scale**2 for e in channel.etas)
    return policy, LossChannel("detector", policy.eta_prime, etas=etas)


def draw_patterns(dist: PatternDistribution, count: int, rng: np.random.Generator) -> tuple[list, int]:
    """Inverse-CDF sampling over the lexicographic pattern order.

    Returns the drawn patterns and the number of draws that fell in the mass
    above the cutoff (those have no pattern and are dropped).
    """
    patterns = dist.patterns()
    cdf = np.cumsum(dist.probabilities())
    u = rng.random(count)
    idx = np.searchsorted(cdf, u, side="right")
    tail = int(np.count_nonzero(idx >= len(patterns)))
    return [patterns[i] for i in idx if i < len(patterns)], tail


@dataclass
class SimulationResult:
    samples: list
    retained: list
    report: dict


def _empirical(records: Iterable[SampleRecord], modes: int, cutoff: int) -> PatternDistribution:
    counts: dict = {}
    n = 0
    for rec in records:
        counts[rec.pattern] = counts.get(rec.pattern, 0) + 1
        n += 1
    return PatternDistribution(modes, cutoff, {p: k / n for p, k in sorted(counts.items())})


def simulate(cfg: ExperimentConfig) -> SimulationResult:
    """Sample a lossy GBS experiment, apply detectors and post-select.

    One generator seeded with ``run.rng_seed`` is used for, in order, the
    pattern draws, the dark counts and the retention draws.
    """
    bank, run = cfg.bank, cfg.run
    u = cfg.interferometer.unitary
    modes = bank.mode_count
    r_prime = target_r_prime(bank, cfg.policy.r_prime, cfg.policy.c)
    channel = resolve_channel(cfg.loss, cfg.detector.efficiencies, modes)
    dist = exact_distribution(bank, u, channel, run.cutoff)

    rng = np.random.default_rng(run.rng_seed)
    drawn, tail = draw_patterns(dist, run.sample_count, rng)
    samples = []
    dark_total = 0
    for i, pattern in enumerate(drawn):
        out = apply_detector_model(pattern, cfg.detector, rng)
        flags = set()
        if out.saturated:
            flags.add("saturated")
        if out.dark_clicks:
            flags.add("dark_suspect")
        dark_total += out.dark_clicks
        samples.append(SampleRecord(out.counts, index=i, flags=frozenset(flags)))

    n0 = cfg.policy.n0 if cfg.policy.n0 is not None else default_truncation(samples)
    policy, target_channel = _policy_and_target(cfg, channel, r_prime, n0)
    retained = list(apply_postselection(samples, policy, rng, strict=run.strict_saturation))

    analytic = math.fsum(p * policy.pattern_probability(pat) for pat, p in dist)
    target = exact_distribution(SqueezerBank(r_prime, modes, bank.phases), u, target_channel, run.cutoff)
    support = min(n0, run.cutoff)
    tvd = None
    if retained:
        tvd = _empirical(retained, modes, run.cutoff).total_variation(target.conditioned(support))
    n = run.sample_count
    emp = len(retained) / n if n else None
    report = {
        "mode_count": modes,
        "squeezing": list(bank.squeezing),
        "r_prime": list(r_prime),
        "loss_kind": cfg.loss.kind,
        "policy_variant": policy.variant,
        "c": policy.c,
        "eta": policy.eta,
        "eta_prime": policy.eta_prime,
        "alpha": policy.alpha,
        "n0": n0,
        "cutoff": run.cutoff,
        "rng_seed": run.rng_seed,
        "sample_count": n,
        "tail_draws": tail,
        "saturated_count": sum("saturated" in s.flags for s in samples),
        "dark_clicks": dark_total,
        "retained_count": len(retained),
        "empirical_yield": emp,
        "empirical_yield_stderr": math.sqrt(analytic * (1.0 - analytic) / n) if n else None,
        "analytic_yield": analytic,
        "distribution_truncated_mass": dist.truncated_mass,
        "tvd_to_target": tvd,
    }
    return SimulationResult(samples, retained, report)


def write_samples(handle: TextIO, records: Sequence[SampleRecord], modes: int) -> None:
    """CSV with columns ``id,n_1..n_M,total,flags``; flags joined by ``|``."""
    writer = csv.writer(handle, lineterminator="\r\n")
    writer.writerow(["id", *[f"n_{i + 1}" for i in range(modes)], "total", "flags"])
    for rec in records:
        writer.writerow([rec.index, *rec.pattern, rec.total, "|".join(sorted(rec.flags))])


class SampleFormatError(ValueError):
    """Malformed sample file; the message carries the line number."""


def read_samples(handle: TextIO) -> tuple[int | None, list[SampleRecord]]:
    """Parse a sample CSV. Returns the mode count (None for an empty file) and the records."""
    reader = csv.reader(handle)
    header = next(reader, None)
    if header is None or header == []:
        return None, []
    modes = len(header) - 3
    expected = ["id", *[f"n_{i + 1}" for i in range(modes)], "total", "flags"]
    if modes < 1 or header != expected:
        raise SampleFormatError(f"line 1: header must be id,n_1..n_M,total,flags, got {','.join(header)}")
    records = []
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != modes + 3:
            raise SampleFormatError(f"line {line}: expected {modes + 3} fields, got {len(row)}")
        try:
            values = [int(v) for v in row[: modes + 2]]
        except ValueError:
            raise SampleFormatError(f"line {line}: id, counts and total must be integers") from None
        pattern = tuple(values[1 : modes + 1])
        if any(n < 0 for n in pattern):
            raise SampleFormatError(f"line {line}: negative photon count")
        if values[-1] != sum(pattern):
            raise SampleFormatError(f"line {line}: total {values[-1]} does not equal sum of counts {sum(pattern)}")
        flags = frozenset(f for f in row[-1].split("|") if f)
        unknown = flags - set(FLAG_NAMES)
        if unknown:
            raise SampleFormatError(f"line {line}: unknown flag(s) {', '.join(sorted(unknown))}")
        records.append(SampleRecord(pattern, index=values[0], flags=flags))
    return modes, records
