"""Data behind the figure sweeps, on fixed grids so outputs are comparable."""
from __future__ import annotations

from .fock import SqueezerBank
from .nonclassicality import TestParameters, epsilon0, postselected_epsilon0
from .postselection import build_policy, max_equivalent_transmission, postselection_yield

__all__ = ["FIG3_SETTINGS", "FIG4_SETTINGS", "fig2_rows", "fig3_rows", "fig4_rows", "r_prime_grid"]

FIG2_R = (0.5, 1.0, 1.5, 2.0)
FIG2_ETA = (0.1, 0.3, 0.5, 0.7)
# worked points appended after the two sweeps
FIG2_EXTRA = ((0.32, 1.1), (0.5, 1.4))

FIG3_SETTINGS = {
    "a": {"r": 1.1, "K": 216, "eta": 0.32, "n0": 219},
    "b": {"r": 1.4, "K": 50, "eta": 0.5, "n0": 113},
}
FIG4_SETTINGS = {
    "a": {"r": 1.0, "K": 50, "q_dark": 1e-4, "r_prime": 2.5},
    "b": {"r": 1.5, "K": 50, "q_dark": 1e-4, "r_prime": 2.5},
}


def _grid(start: float, stop: float, step: float) -> list[float]:
    count = int(round((stop - start) / step))
    return [round(start + k * step, 10) for k in range(count + 1)]


def r_prime_grid(r: float) -> list[float]:
    """``r + 0.1, r + 0.2, ..., 3.0``."""
    return _grid(r + 0.1, 3.0, 0.1)


def fig2_rows() -> list[tuple[float, float, float]]:
    """``(eta, r, eta_prime_max)``: eta in 0..1 (step 0.01) per r, then r in 0.05..3 (step 0.05) per eta."""
    rows = []
    for r in FIG2_R:
        rows += [(eta, r, max_equivalent_transmission(eta, r)) for eta in _grid(0.0, 1.0, 0.01)]
    for eta in FIG2_ETA:
        rows += [(eta, r, max_equivalent_transmission(eta, r)) for r in _grid(0.05, 3.0, 0.05)]
    rows += [(eta, r, max_equivalent_transmission(eta, r)) for eta, r in FIG2_EXTRA]
    return rows


def fig3_rows(variant: str, r_primes: list[float] | None = None) -> list[tuple[float, float, float]]:
    """``(r_prime, eta_prime, yield)`` over the r' grid for setting ``a`` or ``b``."""
    if variant not in FIG3_SETTINGS:
        raise ValueError(f"variant must be one of {sorted(FIG3_SETTINGS)}, got {variant!r}")
    s = FIG3_SETTINGS[variant]
    bank = SqueezerBank.uniform(s["r"], s["K"])
    rows = []
    for rp in r_primes or r_prime_grid(s["r"]):
        policy = build_policy(s["r"], rp, s["eta"], s["n0"])
        rows.append((rp, policy.eta_prime, postselection_yield(policy, bank).value))
    return rows


def fig4_rows(variant: str, etas: list[float] | None = None) -> list[tuple[float, float, float]]:
    """``(eta, eps0_raw, eps0_postselected)`` for eta in 0.01..1 (step 0.01)."""
    if variant not in FIG4_SETTINGS:
        raise ValueError(f"variant must be one of {sorted(FIG4_SETTINGS)}, got {variant!r}")
    s = FIG4_SETTINGS[variant]
    rows = []
    for eta in etas or _grid(0.01, 1.0, 0.01):
        p = TestParameters(s["r"], eta, s["K"], s["q_dark"])
        rows.append((eta, epsilon0(p), postselected_epsilon0(p, s["r_prime"])))
    return rows

