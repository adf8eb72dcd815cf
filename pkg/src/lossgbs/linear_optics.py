"""Exact Fock-space simulation of small passive linear-optical networks.

Convention: ``unitary[i, j]`` is the amplitude for a photon entering mode ``j``
to leave in mode ``i``, i.e. ``a_j^dag -> sum_i U[i, j] a_i^dag``. Patterns
are plain tuples of per-mode photon counts and are always enumerated in
lexicographic order of their counts.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy import sparse

from .fock import (
    SqueezerBank,
    smss_amplitudes,
    smss_loss_branches,
    total_photon_pmf,
)

__all__ = [
    "ScaleCapError",
    "NumericFailure",
    "Interferometer",
    "OutputPattern",
    "PatternDistribution",
    "MAX_MODES",
    "MAX_CUTOFF",
    "patterns_with_total",
    "patterns_up_to",
    "permanent",
    "hafnian",
    "transition_amplitude",
    "transfer_matrix",
    "lossless_output_distribution",
    "lossy_output_distribution",
    "embedded_output_distribution",
    "embed_uniform_loss",
    "uniform_loss_embedding",
    "unitary_dilation",
    "hafnian_output_probability",
    "gaussian_output_distribution",
    "haar_random_unitary",
    "beamsplitter",
]

#: brute-force scale caps for the pattern double sums
MAX_MODES = 6
MAX_CUTOFF = 10
#: cap on the number of 2M-mode patterns an embedding run may touch
MAX_EMBEDDED_PATTERNS = 250_000

OutputPattern = tuple  # tuple[int, ...]; total photon number is sum(pattern)


class ScaleCapError(ValueError):
    """Raised when a brute-force computation would exceed its scale caps."""


class NumericFailure(ArithmeticError):
    """Raised when a matrix needed by a formula is numerically singular."""


@dataclass(frozen=True, eq=False)
class Interferometer:
    """An M-mode passive linear-optical network."""

    unitary: np.ndarray
    atol: float = field(default=1e-10, repr=False)

    def __post_init__(self):
        u = np.array(self.unitary, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError(f"interferometer matrix must be square, got shape {u.shape}")
        residual = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() if u.size else 0.0
        if residual > self.atol:
            raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {residual:.3g})")
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)

    @property
    def mode_count(self) -> int:
        return self.unitary.shape[0]


def _as_unitary(u) -> np.ndarray:
    return u.unitary if isinstance(u, Interferometer) else np.asarray(u, dtype=complex)


def _as_pattern(pattern: Sequence[int], modes: int) -> tuple[int, ...]:
    pattern = tuple(int(n) for n in pattern)
    if len(pattern) != modes:
        raise ValueError(f"pattern {pattern} has {len(pattern)} modes, expected {modes}")
    if any(n < 0 for n in pattern):
        raise ValueError(f"pattern {pattern} has negative counts")
    return pattern


@lru_cache(maxsize=None)
def patterns_with_total(modes: int, total: int) -> tuple[tuple[int, ...], ...]:
    """All patterns on ``modes`` modes holding exactly ``total`` photons, lexicographic."""
    if modes == 0:
        return ((),) if total == 0 else ()
    out = []
    for first in range(total + 1):
        for rest in patterns_with_total(modes - 1, total - first):
            out.append((first,) + rest)
    return tuple(out)


def patterns_up_to(modes: int, cutoff: int) -> Iterator[tuple[int, ...]]:
    """All patterns with total <= cutoff, lexicographic over counts."""
    for p in itertools.product(range(cutoff + 1), repeat=modes):
        if sum(p) <= cutoff:
            yield p


@lru_cache(maxsize=None)
def _pattern_index(modes: int, total: int) -> dict:
    return {p: i for i, p in enumerate(patterns_with_total(modes, total))}


def permanent(matrix) -> complex:
    """Permanent by Ryser's formula with Gray-code row-sum updates, O(2^n n)."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n > 30:
        raise ScaleCapError(f"permanent limited to n <= 30, got {n}")
    row_sums = np.zeros(n, dtype=complex)
    total = 0.0 + 0.0j
    prev = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        j = (gray ^ prev).bit_length() - 1
        if gray >> j & 1:
            row_sums += a[:, j]
        else:
            row_sums -= a[:, j]
        prev = gray
        term = np.prod(row_sums)
        total += -term if bin(gray).count("1") & 1 else term
    return complex(total if n % 2 == 0 else -total)


def hafnian(matrix, atol: float = 1e-10) -> complex:
    """Sum over perfect matchings of prod A[i, j], by memoised recursion on vertex subsets."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"hafnian needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n % 2:
        raise ValueError(f"hafnian needs an even dimension, got {n}")
    if n and np.abs(a - a.T).max() > atol:
        raise ValueError("hafnian needs a symmetric matrix")
    if n > 20:
        raise ScaleCapError(f"hafnian limited to dimension <= 20, got {n}")
    rows = a.tolist()
    memo = {0: 1.0 + 0.0j}

    def haf(mask: int) -> complex:
        if mask in memo:
            return memo[mask]
        low = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << low)
        row = rows[low]
        acc = 0.0 + 0.0j
        m = rest
        while m:
            bit = m & -m
            j = bit.bit_length() - 1
            if row[j] != 0:
                acc += row[j] * haf(rest & ~bit)
            m ^= bit
        memo[mask] = acc
        return acc

    return complex(haf((1 << n) - 1))


def transition_amplitude(u, input_pattern: Sequence[int], output_pattern: Sequence[int]) -> complex:
    """<output| U |input> as Per(U[out rows, in cols]) / sqrt(prod out! prod in!)."""
    mat = _as_unitary(u)
    modes = mat.shape[0]
    n = _as_pattern(input_pattern, modes)
    m = _as_pattern(output_pattern, modes)
    if sum(n) != sum(m):
        return 0.0 + 0.0j
    cols = [j for j, c in enumerate(n) for _ in range(c)]
    rows = [i for i, c in enumerate(m) for _ in range(c)]
    norm = math.prod(math.factorial(c) for c in n) * math.prod(math.factorial(c) for c in m)
    return permanent(mat[np.ix_(rows, cols)]) / math.sqrt(norm)


@lru_cache(maxsize=None)
def _raising_operators(modes: int, n: int) -> tuple:
    """Sparse a_i^dag blocks mapping n-photon patterns to (n+1)-photon patterns."""
    src = patterns_with_total(modes, n)
    dst_index = _pattern_index(modes, n + 1)
    ops = []
    for i in range(modes):
        rows, vals = [], []
        for p in src:
            q = p[:i] + (p[i] + 1,) + p[i + 1:]
            rows.append(dst_index[q])
            vals.append(math.sqrt(p[i] + 1))
        ops.append(
            sparse.csr_matrix(
                (vals, (rows, np.arange(len(src)))), shape=(len(dst_index), len(src))
            )
        )
    return tuple(ops)


def transfer_matrix(u, total: int, inputs: Sequence[Sequence[int]] | None = None) -> np.ndarray:
    """Block of the Fock representation of U at fixed photon number.

    Rows are all output patterns with ``total`` photons (lexicographic); columns
    are ``inputs`` (default: the same patterns). Each column is built by
    applying the transformed creation operators one photon at a time, which is
    much cheaper than one permanent per entry.
    """
    mat = _as_unitary(u)
    modes = mat.shape[0]
    if inputs is None:
        inputs = patterns_with_total(modes, total)
    inputs = [_as_pattern(p, modes) for p in inputs]
    if any(sum(p) != total for p in inputs):
        raise ValueError("every input pattern must hold exactly `total` photons")
    if not inputs:
        return np.zeros((len(patterns_with_total(modes, total)), 0), dtype=complex)
    seq = np.array(
        [[j for j, c in enumerate(p) for _ in range(c)] for p in inputs], dtype=int
    ).reshape(len(inputs), total)
    vec = np.ones((1, len(inputs)), dtype=complex)
    for step in range(total):
        ops = _raising_operators(modes, step)
        jcol = seq[:, step]
        new = ops[0] @ vec * mat[0, jcol][None, :]
        for i in range(1, modes):
            new = new + ops[i] @ vec * mat[i, jcol][None, :]
        vec = new
    norms = np.array([math.prod(math.factorial(c) for c in p) for p in inputs], dtype=float)
    return vec / np.sqrt(norms)[None, :]


@dataclass(frozen=True, eq=False)
class PatternDistribution:
    """Probabilities of every pattern with total <= cutoff.

    ``entries`` is ordered lexicographically over counts. Missing mass (all of
    it above the cutoff) is exposed as ``truncated_mass``.
    """

    mode_count: int
    cutoff: int
    entries: dict

    @classmethod
    def from_blocks(cls, modes: int, cutoff: int, blocks: dict) -> "PatternDistribution":
        entries = {}
        for p in patterns_up_to(modes, cutoff):
            block = blocks.get(sum(p))
            prob = 0.0 if block is None else float(block[_pattern_index(modes, sum(p))[p]])
            entries[p] = max(prob, 0.0) if prob > -1e-14 else prob
        return cls(modes, cutoff, entries)

    def __getitem__(self, pattern) -> float:
        return self.entries.get(tuple(pattern), 0.0)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries.items())

    def patterns(self) -> list:
        return list(self.entries)

    def probabilities(self) -> np.ndarray:
        return np.fromiter(self.entries.values(), dtype=float, count=len(self.entries))

    def total_mass(self) -> float:
        return math.fsum(self.entries.values())

    @property
    def truncated_mass(self) -> float:
        return max(0.0, 1.0 - self.total_mass())

    def total_marginal(self) -> np.ndarray:
        """Distribution of the total photon number, indices ``0..cutoff``."""
        marg = np.zeros(self.cutoff + 1)
        for p, prob in self.entries.items():
            marg[sum(p)] += prob
        return marg

    def reweighted(self, weight: Callable[[tuple], float], normalize: bool = True) -> "PatternDistribution":
        """Multiply each entry by ``weight(pattern)``; optionally renormalise to unit mass."""
        entries = {p: prob * weight(p) for p, prob in self.entries.items()}
        if normalize:
            z = math.fsum(entries.values())
            if z <= 0:
                raise ValueError("reweighted distribution has no mass")
            entries = {p: v / z for p, v in entries.items()}
        return PatternDistribution(self.mode_count, self.cutoff, entries)

    def conditioned(self, max_total: int) -> "PatternDistribution":
        """Renormalised restriction to patterns with total <= max_total."""
        return self.reweighted(lambda p: 1.0 if sum(p) <= max_total else 0.0)

    def total_variation(self, other: "PatternDistribution") -> float:
        keys = set(self.entries) | set(other.entries)
        return 0.5 * math.fsum(abs(self[k] - other[k]) for k in keys)


def _check_scale(modes: int, cutoff: int) -> None:
    if modes > MAX_MODES:
        raise ScaleCapError(f"brute-force simulation limited to M <= {MAX_MODES} modes, got {modes}")
    if cutoff > MAX_CUTOFF:
        raise ScaleCapError(
            f"brute-force simulation limited to total photon number <= {MAX_CUTOFF}, got cutoff {cutoff}"
        )


def _check_bank(bank: SqueezerBank, u: np.ndarray) -> None:
    if bank.mode_count != u.shape[0]:
        raise ValueError(
            f"bank has {bank.mode_count} modes but interferometer has {u.shape[0]}"
        )


def _double_sum(t: np.ndarray, rho: np.ndarray) -> np.ndarray:
    # P(m) = sum_{n,l} v(m|n) rho(n,l) v*(m|l)
    return np.real(np.einsum("mn,nl,ml->m", t, rho, t.conj(), optimize=True))


def _padded(patterns, modes: int):
    return [p + (0,) * (modes - len(p)) for p in patterns]


def lossless_output_distribution(bank: SqueezerBank, u, cutoff: int) -> PatternDistribution:
    """Output-pattern distribution of lossless GBS by the Fock-basis double sum.

    ``P(m) = sum_{n,l} v(m|n) v*(m|l) psi(n) psi*(l)`` with ``psi`` the product
    of single-mode squeezed amplitudes (signed/complex, not bare square roots).
    """
    mat = _as_unitary(u)
    _check_bank(bank, mat)
    modes = mat.shape[0]
    _check_scale(modes, cutoff)
    k = bank.squeezer_count
    amps = [smss_amplitudes(r, phi, cutoff) for r, phi in zip(bank.squeezing, bank.phases)]
    blocks = {}
    for total in range(cutoff + 1):
        inputs = [p for p in patterns_with_total(k, total) if all(c % 2 == 0 for c in p)]
        if not inputs:
            continue
        psi = np.array([math.prod(amps[i][c] for i, c in enumerate(p)) for p in inputs])
        t = transfer_matrix(mat, total, _padded(inputs, modes))
        blocks[total] = _double_sum(t, np.outer(psi, psi.conj()))
    return PatternDistribution.from_blocks(modes, cutoff, blocks)


def lossy_output_distribution(
    bank: SqueezerBank,
    u,
    eta: float,
    cutoff: int,
    method: str = "coherent",
    input_cutoff: int | None = None,
) -> PatternDistribution:
    """Output-pattern distribution under uniform loss ``eta`` ahead of the network.

    Each squeezed mode is binomially thinned before the Fock-basis double sum.
    ``method="coherent"`` (default) thins the full input density matrix,
    coherences included, and agrees with an explicit loss-mode embedding.
    ``method="sqrt"`` uses ``sqrt(P_thinned(n) P_thinned(l))`` in place of the
    coherences; it matches only when the network does not mix modes.

    ``input_cutoff`` truncates the input state at that many total photons
    (lost ones included) so results can be compared with an embedding run at
    the same truncation; by default the input is effectively untruncated.
    """
    if method not in ("coherent", "sqrt"):
        raise ValueError(f"unknown method {method!r}")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {eta}")
    mat = _as_unitary(u)
    _check_bank(bank, mat)
    modes = mat.shape[0]
    _check_scale(modes, cutoff)
    k = bank.squeezer_count
    if input_cutoff is not None and input_cutoff < cutoff:
        raise ValueError("input_cutoff must be >= cutoff")
    branches = [
        smss_loss_branches(r, phi, eta, cutoff, input_cutoff)
        for r, phi in zip(bank.squeezing, bank.phases)
    ]
    blocks = {}
    for total in range(cutoff + 1):
        inputs = patterns_with_total(k, total)
        if not inputs:
            continue
        idx = np.array(inputs, dtype=int).reshape(len(inputs), k)
        if input_cutoff is None:
            rho = np.ones((len(inputs), len(inputs)), dtype=complex)
            for i in range(k):
                rho_i = branches[i].T @ branches[i].conj()
                rho = rho * rho_i[idx[:, i][:, None], idx[:, i][None, :]]
        else:
            rho = np.zeros((len(inputs), len(inputs)), dtype=complex)
            for lost in patterns_up_to(k, input_cutoff - total):
                w = np.ones(len(inputs), dtype=complex)
                for i in range(k):
                    w = w * branches[i][lost[i], idx[:, i]]
                rho += np.outer(w, w.conj())
        if method == "sqrt":
            root = np.sqrt(np.clip(np.real(np.diag(rho)), 0.0, None))
            rho = np.outer(root, root).astype(complex)
        t = transfer_matrix(mat, total, _padded(inputs, modes))
        blocks[total] = _double_sum(t, rho)
    return PatternDistribution.from_blocks(modes, cutoff, blocks)


def embed_uniform_loss(eta: float, modes: int) -> np.ndarray:
    """Real orthogonal 2M x 2M block matrix coupling each mode to its own loss mode.

    ``[[sqrt(eta) I, sqrt(1-eta) I], [-sqrt(1-eta) I, sqrt(eta) I]]``.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {eta}")
    t, l = math.sqrt(eta), math.sqrt(1.0 - eta)
    eye = np.eye(modes)
    return np.block([[t * eye, l * eye], [-l * eye, t * eye]])


def uniform_loss_embedding(u, eta: float) -> np.ndarray:
    """2M-mode unitary: uniform loss (modes M..2M-1 are loss modes) then the network."""
    mat = _as_unitary(u)
    modes = mat.shape[0]
    net = np.block([[mat, np.zeros((modes, modes))], [np.zeros((modes, modes)), np.eye(modes)]])
    return net @ embed_uniform_loss(eta, modes)


def _psd_sqrt(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def unitary_dilation(transfer) -> np.ndarray:
    """Unitary 2M x 2M matrix whose top-left block is the contraction ``transfer``."""
    a = np.asarray(transfer, dtype=complex)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv.size and sv.max() > 1.0 + 1e-12:
        raise ValueError(f"transfer matrix is not a contraction (largest singular value {sv.max():.6g})")
    eye = np.eye(a.shape[0])
    return np.block(
        [[a, _psd_sqrt(eye - a @ a.conj().T)], [_psd_sqrt(eye - a.conj().T @ a), -a.conj().T]]
    )


def _default_input_cutoff(bank: SqueezerBank, cutoff: int) -> int:
    cdf = np.cumsum(total_photon_pmf(bank, 200).probabilities)
    hits = np.nonzero(cdf >= 1.0 - 1e-14)[0]
    return max(cutoff, int(hits[0]) if hits.size else 200)


def embedded_output_distribution(
    bank: SqueezerBank, transfer, cutoff: int, input_cutoff: int | None = None
) -> PatternDistribution:
    """Lossy output distribution by explicit loss-mode embedding.

    ``transfer`` is either an M x M contraction (embedded through its unitary
    dilation) or a 2M x 2M unitary whose last M modes are loss modes. The
    2M-mode pure state is propagated losslessly and the loss modes are traced
    out. Input states are truncated at ``input_cutoff`` total photons.
    """
    mat = np.asarray(transfer, dtype=complex)
    modes = bank.mode_count
    if mat.shape == (modes, modes):
        mat = unitary_dilation(mat)
    if mat.shape != (2 * modes, 2 * modes):
        raise ValueError(f"transfer must be {modes}x{modes} or {2 * modes}x{2 * modes}, got {mat.shape}")
    _check_scale(modes, cutoff)
    if input_cutoff is None:
        input_cutoff = _default_input_cutoff(bank, cutoff)
    wide = 2 * modes
    touched = sum(math.comb(n + wide - 1, wide - 1) for n in range(input_cutoff + 1))
    if touched > MAX_EMBEDDED_PATTERNS:
        raise ScaleCapError(
            f"embedding would enumerate {touched} patterns on {wide} modes "
            f"(limit {MAX_EMBEDDED_PATTERNS}); lower input_cutoff"
        )
    k = bank.squeezer_count
    amps = [smss_amplitudes(r, phi, input_cutoff) for r, phi in zip(bank.squeezing, bank.phases)]
    blocks = {n: np.zeros(len(patterns_with_total(modes, n))) for n in range(cutoff + 1)}
    for total in range(input_cutoff + 1):
        inputs = [p for p in patterns_with_total(k, total) if all(c % 2 == 0 for c in p)]
        if not inputs:
            continue
        psi = np.array([math.prod(amps[i][c] for i, c in enumerate(p)) for p in inputs])
        out = transfer_matrix(mat, total, _padded(inputs, wide)) @ psi
        probs = np.abs(out) ** 2
        for p, prob in zip(patterns_with_total(wide, total), probs):
            real = p[:modes]
            n = sum(real)
            if n <= cutoff:
                blocks[n][_pattern_index(modes, n)[real]] += prob
    return PatternDistribution.from_blocks(modes, cutoff, blocks)


def _gaussian_kernel(bank: SqueezerBank, transfer: np.ndarray) -> tuple[np.ndarray, float]:
    """``A = X (I - sigma_Q^-1)`` and ``det sigma_Q`` for squeezed vacua sent through ``transfer``.

    Covariance in the complex (a, a^dag) basis with vacuum ``sigma = I/2`` and
    ``sigma_Q = sigma + I/2``. A contraction ``transfer`` leaves the state
    Gaussian (mixed), so the same formula covers loss.
    """
    modes = transfer.shape[0]
    n_in = np.zeros((modes, modes), dtype=complex)
    m_in = np.zeros((modes, modes), dtype=complex)
    for i, (r, phi) in enumerate(zip(bank.squeezing, bank.phases)):
        n_in[i, i] = math.sinh(r) ** 2
        m_in[i, i] = -np.exp(1j * phi) * math.sinh(r) * math.cosh(r)
    n_out = transfer.conj() @ n_in @ transfer.T
    m_out = transfer @ m_in @ transfer.T
    eye = np.eye(modes)
    sigma_q = np.block([[n_out.T + eye, m_out], [m_out.conj(), n_out + eye]])
    det = np.linalg.det(sigma_q)
    if abs(det) < 1e-300:
        raise NumericFailure("sigma_Q is singular")
    x = np.block([[np.zeros((modes, modes)), eye], [eye, np.zeros((modes, modes))]])
    return x @ (np.eye(2 * modes) - np.linalg.inv(sigma_q)), float(det.real)


def _hafnian_probability(a: np.ndarray, det: float, pattern: tuple) -> float:
    modes = len(pattern)
    idx = [i for i, c in enumerate(pattern) for _ in range(c)]
    idx = idx + [i + modes for i in idx]
    a_s = a[np.ix_(idx, idx)]
    a_s = (a_s + a_s.T) / 2
    norm = math.prod(math.factorial(c) for c in pattern) * math.sqrt(det)
    return float(np.real(hafnian(a_s, atol=1e-8)) / norm)


def hafnian_output_probability(bank: SqueezerBank, u, pattern: Sequence[int], eta: float = 1.0) -> float:
    """Pattern probability from the Gaussian-state hafnian formula.

    ``P = Haf(A_S) / (n! sqrt(det sigma_Q))`` where ``A_S`` repeats rows and
    columns ``i`` and ``i + M`` of ``A`` ``n_i`` times. ``eta`` applies uniform
    loss ahead of the network.
    """
    mat = _as_unitary(u)
    _check_bank(bank, mat)
    modes = mat.shape[0]
    pattern = _as_pattern(pattern, modes)
    if sum(pattern) > 10:
        raise ScaleCapError(f"hafnian formula limited to total <= 10 photons, got {sum(pattern)}")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {eta}")
    a, det = _gaussian_kernel(bank, math.sqrt(eta) * mat)
    return _hafnian_probability(a, det, pattern)


def gaussian_output_distribution(bank: SqueezerBank, transfer, cutoff: int) -> PatternDistribution:
    """Output distribution for an arbitrary lossy transfer matrix via hafnians.

    ``transfer`` is any M x M contraction (network and loss together), e.g.
    ``diag(sqrt(eta_i)) @ U`` for per-detector loss.
    """
    mat = np.asarray(transfer, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"transfer matrix must be square, got shape {mat.shape}")
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.max() > 1.0 + 1e-10:
        raise ValueError(f"transfer matrix is not a contraction (largest singular value {sv.max():.6g})")
    _check_bank(bank, mat)
    _check_scale(mat.shape[0], cutoff)
    a, det = _gaussian_kernel(bank, mat)
    entries = {}
    for p in patterns_up_to(mat.shape[0], cutoff):
        prob = _hafnian_probability(a, det, p)
        entries[p] = max(prob, 0.0) if prob > -1e-14 else prob
    return PatternDistribution(mat.shape[0], cutoff, entries)


def haar_random_unitary(modes: int, seed: int | None = None) -> Interferometer:
    """Haar-distributed unitary from QR of a complex Ginibre matrix with phase fix."""
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((modes, modes)) + 1j * rng.standard_normal((modes, modes))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return Interferometer(q * (d / np.abs(d))[None, :])


def beamsplitter(transmissivity: float = 0.5) -> Interferometer:
    """Two-mode real beamsplitter ``[[t, r], [r, -t]]`` with ``t^2 = transmissivity``."""
    t = math.sqrt(transmissivity)
    r = math.sqrt(1.0 - transmissivity)
    return Interferometer(np.array([[t, r], [r, -t]]))
