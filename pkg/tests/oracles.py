"""Independent reference implementations used only by the tests.

None of these share code with the package: they work from textbook
definitions (matrix exponentials of generators, explicit sums over
permutations and matchings, plain Monte Carlo).
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.linalg import expm, logm


def squeezed_vacuum_expm(r: float, phase: float, dim: int = 60) -> np.ndarray:
    """``S(z)|0>`` with ``S(z) = exp((z* a^2 - z a^dag^2)/2)``, ``z = r e^{i phase}``, by dense expm."""
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    ad = a.conj().T
    z = r * np.exp(1j * phase)
    gen = 0.5 * (np.conj(z) * a @ a - z * ad @ ad)
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1.0
    return expm(gen) @ vac


def permanent_bruteforce(mat: np.ndarray) -> complex:
    n = mat.shape[0]
    return complex(sum(math.prod(mat[i, s[i]] for i in range(n)) for s in itertools.permutations(range(n))))


def _matchings(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        for m in _matchings(rest[:k] + rest[k + 1 :]):
            yield [(first, partner)] + m


def hafnian_bruteforce(mat: np.ndarray) -> complex:
    n = mat.shape[0]
    return complex(sum(math.prod(mat[i, j] for i, j in m) for m in _matchings(list(range(n)))))


def _basis(modes: int, cutoff: int) -> list:
    return [p for p in itertools.product(range(cutoff + 1), repeat=modes) if sum(p) <= cutoff]


def state_vector_distribution(squeezing, phases, unitary: np.ndarray, cutoff: int) -> dict:
    """Lossless output probabilities by evolving a dense Fock state vector.

    The network acts as ``exp(-i sum_ij h_ij a_i^dag a_j)`` with ``U = exp(-i h)``,
    restricted to the (exactly invariant) subspace of total photon number <= cutoff.
    """
    modes = unitary.shape[0]
    h = 1j * logm(unitary)
    basis = _basis(modes, cutoff)
    index = {p: k for k, p in enumerate(basis)}
    gen = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, p in enumerate(basis):
        for i in range(modes):
            for j in range(modes):
                if h[i, j] == 0 or p[j] == 0:
                    continue
                q = list(p)
                q[j] -= 1
                amp = math.sqrt(p[j])
                q[i] += 1
                amp *= math.sqrt(q[i])
                gen[index[tuple(q)], col] += h[i, j] * amp
    singles = [squeezed_vacuum_expm(r, ph, 60)[: cutoff + 1] for r, ph in zip(squeezing, phases)]
    psi = np.zeros(len(basis), dtype=complex)
    for k, p in enumerate(basis):
        amp = 1.0 + 0.0j
        for i, n in enumerate(p):
            amp *= singles[i][n] if i < len(singles) else (1.0 if n == 0 else 0.0)
        psi[k] = amp
    out = expm(-1j * gen) @ psi
    return {p: float(abs(out[k]) ** 2) for k, p in enumerate(basis)}


def lossy_state_vector_distribution(squeezing, phases, unitary: np.ndarray, eta: float, cutoff: int) -> dict:
    """Uniform loss ahead of the network via 2M-mode dense evolution and a partial trace.

    Input truncated at ``cutoff`` total photons (loss modes start empty).
    """
    modes = unitary.shape[0]
    t, l = math.sqrt(eta), math.sqrt(1 - eta)
    eye = np.eye(modes)
    loss = np.block([[t * eye, l * eye], [-l * eye, t * eye]])
    big = np.block([[unitary, np.zeros((modes, modes))], [np.zeros((modes, modes)), eye]]) @ loss
    full = state_vector_distribution(squeezing, phases, big, cutoff)
    out: dict = {}
    for p, prob in full.items():
        out[p[:modes]] = out.get(p[:modes], 0.0) + prob
    return out


def dark_count_retention_mc(p_dark: float, gain: float, trials: int, seed: int, chunk: int = 1_000_000):
    """Two-outcome model: a sample picks up a dark click with probability ``p_dark``;
    its retention probability is multiplied by ``gain`` when it does.

    Returns ``(dark_among_retained, retained)``.
    """
    rng = np.random.default_rng(seed)
    base = 1.0 / gain
    dark_kept = kept = 0
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        dark = rng.random(n) < p_dark
        keep = rng.random(n) < np.where(dark, base * gain, base)
        kept += int(keep.sum())
        dark_kept += int((keep & dark).sum())
        done += n
    return dark_kept, kept
