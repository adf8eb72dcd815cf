"""Bound on classical simulability of lossy GBS and its change under post-selection.

A GBS device with squeezing ``r``, end-to-end transmission ``eta``, ``K``
squeezers and dark-count rate ``q_D`` can be simulated classically to error
``eps0`` with

    sech(Theta(x) / 2) = exp(-eps0^2 / (4K)),
    x = ln((1 - 2 q_D) / (eta e^{-2r} + 1 - eta)),

where ``Theta`` is the ramp function. ``eps0 > 1`` means that algorithm fails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .loss import dark_count_equivalent_rate
from .postselection import equivalent_transmission

__all__ = [
    "TestParameters",
    "classical_simulability_lhs",
    "epsilon0",
    "passes_nonclassicality_test",
    "postselected_parameters",
    "postselected_epsilon0",
    "depth_tradeoff",
]


@dataclass(frozen=True)
class TestParameters:
    """Device parameters entering the bound.

    Attributes:
        r: Uniform squeezing strength.
        eta: Transmission from the sources to the detectors, detector efficiency included.
        K: Number of squeezers.
        q_dark: Dark-count probability per detector.
    """

    __test__ = False  # keep pytest from collecting this class

    r: float
    eta: float
    K: int
    q_dark: float = 0.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"r must be > 0, got {self.r}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")
        if not 0.0 <= self.q_dark < 0.5:
            raise ValueError(f"q_dark must lie in [0, 0.5), got {self.q_dark}")


def _ramp_argument(p: TestParameters) -> float:
    x = math.log1p(-2.0 * p.q_dark) - math.log((1.0 - p.eta) + p.eta * math.exp(-2.0 * p.r))
    return max(0.0, x)


def _log_cosh(x: float) -> float:
    # ln cosh x = |x| + log1p(e^{-2|x|}) - ln 2, safe for large |x|
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


def classical_simulability_lhs(p: TestParameters) -> float:
    """``sech(Theta(x) / 2)``, in (0, 1]."""
    return 1.0 / math.cosh(0.5 * _ramp_argument(p))


def epsilon0(p: TestParameters) -> float:
    """Smallest error reachable by the classical algorithm; may exceed 1."""
    return math.sqrt(4.0 * p.K * _log_cosh(0.5 * _ramp_argument(p)))


def passes_nonclassicality_test(p: TestParameters) -> bool:
    """True when ``eps0 > 1``, i.e. the device is out of reach of this algorithm."""
    return epsilon0(p) > 1.0


def postselected_parameters(p: TestParameters, r_prime: float) -> TestParameters:
    """Parameters of the equivalent device seen by post-selected samples.

    The same ``c = tanh r / tanh r'`` sets both the equivalent transmission
    and the amplified dark-count rate.
    """
    if not r_prime > p.r:
        raise ValueError(f"r_prime must exceed r = {p.r}, got {r_prime}")
    c = math.tanh(p.r) / math.tanh(r_prime)
    eta_prime = equivalent_transmission(p.eta, c)
    q_prime = dark_count_equivalent_rate(p.q_dark, c, p.eta).rate
    return TestParameters(r_prime, eta_prime, p.K, q_prime)


def postselected_epsilon0(p: TestParameters, r_prime: float) -> float:
    return epsilon0(postselected_parameters(p, r_prime))


def depth_tradeoff(eta_overall: float, depth_factor: float, r: float, r_prime: float) -> float:
    """Equivalent transmission after scaling circuit depth by ``depth_factor``.

    Transmission compounds per layer, so the deeper circuit has
    ``eta_overall ** depth_factor``; post-selection from ``r`` to ``r_prime``
    then lifts it to ``1 - (1 - eta2) c``.
    """
    if not 0.0 < eta_overall < 1.0:
        raise ValueError(f"eta_overall must lie in (0, 1), got {eta_overall}")
    if not depth_factor > 0:
        raise ValueError(f"depth_factor must be > 0, got {depth_factor}")
    if not 0 < r < r_prime:
        raise ValueError("need 0 < r < r_prime")
    eta2 = float(np.power(eta_overall, depth_factor))
    return equivalent_transmission(eta2, math.tanh(r) / math.tanh(r_prime))
