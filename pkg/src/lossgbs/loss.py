"""Loss and detector imperfection models."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .linear_optics import PatternDistribution, patterns_up_to

__all__ = [
    "LossModel",
    "DetectorModel",
    "DetectorOutcome",
    "DarkCountAmplification",
    "split_nonuniform_loss",
    "apply_detector_model",
    "dark_count_equivalent_rate",
    "detector_thinning",
]


@dataclass(frozen=True, eq=False)
class LossModel:
    """Photon loss as an M x M transfer matrix.

    ``kind`` is ``"uniform"`` (single ``eta``), ``"per_mode"`` (one
    transmission per mode) or ``"general"`` (any contraction ``matrix``).
    """

    kind: str
    etas: tuple[float, ...] = ()
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "per_mode", "general"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.kind == "general":
            if self.matrix is None:
                raise ValueError("general loss needs a matrix")
            a = np.array(self.matrix, dtype=complex)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise ValueError("loss matrix must be square")
            sv = np.linalg.svd(a, compute_uv=False)
            if sv.max() > 1.0 + 1e-12:
                raise ValueError(f"loss matrix singular values must be <= 1, got {sv.max():.6g}")
            a.setflags(write=False)
            object.__setattr__(self, "matrix", a)
        else:
            etas = tuple(float(e) for e in self.etas)
            if not etas or any(not 0.0 <= e <= 1.0 for e in etas):
                raise ValueError(f"transmissions must lie in [0, 1], got {etas}")
            if self.kind == "uniform" and len(etas) != 1:
                raise ValueError("uniform loss takes exactly one transmission")
            object.__setattr__(self, "etas", etas)

    @classmethod
    def uniform(cls, eta: float) -> "LossModel":
        return cls("uniform", (eta,))

    @classmethod
    def per_mode(cls, etas: Sequence[float]) -> "LossModel":
        return cls("per_mode", tuple(etas))

    @classmethod
    def general(cls, matrix) -> "LossModel":
        return cls("general", matrix=np.asarray(matrix))

    @classmethod
    def with_detectors(cls, eta: float, efficiencies: Sequence[float]) -> "LossModel":
        """Per-mode transmissions ``eta * eta_i^d`` from a common loss and detector efficiencies."""
        return cls.per_mode([eta * e for e in efficiencies])

    def transfer_matrix(self, modes: int) -> np.ndarray:
        if self.kind == "general":
            if self.matrix.shape[0] != modes:
                raise ValueError("loss matrix size does not match mode count")
            return self.matrix
        etas = self.etas * modes if self.kind == "uniform" else self.etas
        if len(etas) != modes:
            raise ValueError("number of transmissions does not match mode count")
        return np.diag(np.sqrt(etas)).astype(complex)

    @property
    def eta_u(self) -> float:
        """Transmission of the largest uniform layer that can be factored out."""
        if self.kind == "general":
            return float(np.linalg.svd(self.matrix, compute_uv=False).max() ** 2)
        return max(self.etas)


@dataclass(frozen=True)
class DetectorModel:
    """Photon-number-resolving detectors with a resolution cap and threshold dark counts."""

    pnr_cap: float = math.inf
    dark_count_rate: float = 0.0
    efficiencies: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.pnr_cap < 1:
            raise ValueError(f"pnr_cap must be >= 1, got {self.pnr_cap}")
        if not 0.0 <= self.dark_count_rate < 0.5:
            raise ValueError(f"dark count rate must lie in [0, 0.5), got {self.dark_count_rate}")
        if self.efficiencies is not None and any(not 0.0 <= e <= 1.0 for e in self.efficiencies):
            raise ValueError("detector efficiencies must lie in [0, 1]")


class DetectorOutcome(NamedTuple):
    counts: tuple[int, ...]
    saturated: bool
    dark_clicks: int


class DarkCountAmplification(NamedTuple):
    rate: float
    factor: float
    upper_bound: float | None


def split_nonuniform_loss(model: LossModel) -> tuple[float, np.ndarray]:
    """Factor a lossy transfer matrix as ``A = sqrt(eta_u) * A1``.

    ``eta_u`` is the largest squared singular value of ``A`` (the largest
    transmission for per-mode loss), so the residual ``A1`` has top singular
    value 1.
    """
    if model.kind == "general":
        a = model.matrix
    else:
        a = np.diag(np.sqrt(model.etas)).astype(complex)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv.max() > 1.0 + 1e-12:
        raise ValueError("loss matrix has a singular value above 1")
    eta_u = float(sv.max() ** 2)
    if eta_u == 0.0:
        raise ValueError("loss model transmits nothing; no uniform layer to extract")
    return eta_u, a / math.sqrt(eta_u)


def apply_detector_model(pattern: Sequence[int], det: DetectorModel, rng: np.random.Generator) -> DetectorOutcome:
    """Clamp counts at the PNR cap, then add at most one dark click per detector.

    One uniform draw is consumed per mode whatever the dark-count rate, so a
    given seed always advances the generator by the same amount.
    """
    counts = [int(n) for n in pattern]
    saturated = False
    if math.isfinite(det.pnr_cap):
        cap = int(det.pnr_cap)
        saturated = any(n > cap for n in counts)
        counts = [min(n, cap) for n in counts]
    draws = rng.random(len(counts))
    dark = draws < det.dark_count_rate
    counts = [n + int(d) for n, d in zip(counts, dark)]
    return DetectorOutcome(tuple(counts), saturated, int(dark.sum()))


def dark_count_equivalent_rate(p_dark: float, c: float, eta: float, r: float | None = None) -> DarkCountAmplification:
    """Threshold dark-count rate seen in post-selected samples.

    A dark click lifts the total by one and so raises the retention weight by
    ``f = (1/c - (1 - eta)) / eta``; the effective rate is
    ``p f / (p f + 1 - p)``. With ``r`` given, also returns the bound obtained
    from ``f < 1 + (1/tanh r - 1)/eta``.
    """
    if not 0.0 < c < 1.0:
        raise ValueError(f"post-selection needs 0 < c < 1, got {c}")
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"transmission must lie in (0, 1], got {eta}")
    if not 0.0 <= p_dark < 0.5:
        raise ValueError(f"dark count rate must lie in [0, 0.5), got {p_dark}")
    factor = (1.0 / c - (1.0 - eta)) / eta
    rate = p_dark * factor / (p_dark * factor + 1.0 - p_dark)
    bound = None
    if r is not None:
        if c <= math.tanh(r):
            raise ValueError(f"c = {c} is not reachable from r = {r}: need c > tanh r")
        f_max = 1.0 + (1.0 / math.tanh(r) - 1.0) / eta
        bound = p_dark * f_max / (p_dark * f_max + 1.0 - p_dark)
        assert p_dark == 0.0 or rate < bound
    return DarkCountAmplification(rate, factor, bound)


def detector_thinning(dist: PatternDistribution, etas: Sequence[float]) -> PatternDistribution:
    """Apply independent per-detector efficiencies to an output distribution.

    ``P(m) = sum_{k >= m} P(k) prod_i C(k_i, m_i) eta_i^m_i (1 - eta_i)^(k_i - m_i)``.
    Mass sitting above ``dist.cutoff`` is not recovered.
    """
    if len(etas) != dist.mode_count:
        raise ValueError("need one efficiency per mode")
    if any(not 0.0 <= e <= 1.0 for e in etas):
        raise ValueError("efficiencies must lie in [0, 1]")
    out = dict.fromkeys(dist.entries, 0.0)
    for k, pk in dist.entries.items():
        if pk == 0.0:
            continue
        for m in patterns_up_to(dist.mode_count, sum(k)):
            if any(mi > ki for mi, ki in zip(m, k)):
                continue
            w = pk
            for mi, ki, e in zip(m, k, etas):
                w *= math.comb(ki, mi) * e**mi * (1.0 - e) ** (ki - mi)
            out[m] += w
    return PatternDistribution(dist.mode_count, dist.cutoff, out)
