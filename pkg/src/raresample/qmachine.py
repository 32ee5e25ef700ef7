"""Quantum generator (q-machine) of a unifilar, finite-Markov-order process.

Each state i is encoded as the pure signal state
``|eta_i> = sum_w sqrt(Pr(w | i)) |w>`` over length-R words. Kraus operators
``K_x = sum_ij sqrt(T[x, i, j]) |eta_j><dual_i|`` generate the same process,
and the memory cost is the von Neumann entropy of the stationary ensemble.
All amplitudes are nonnegative reals, so every matrix here is real.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    FixedPointViolation,
    InputError,
    LinearlyDependentStates,
    MarkovOrderMismatch,
    NotDensityMatrix,
    NumericalError,
)
from .hmm import Hmm, check_markov_order, stationary_distribution
from .linalg import entropy_bits, jacobi_gram_eigenvalues

MAX_DIM = 4096
# Minimum Gram eigenvalue for the dual/Kraus construction.
INDEPENDENCE_TOL = 1e-10
# Minimum Gram eigenvalue for computing C_q alone: singular values of the
# signal matrix below 1e-7 would carry fewer than ~9 significant digits.
RANK_TOL = 1e-14
FIXED_POINT_TOL = 1e-10
CROSS_CHECK_TOL = 1e-9


@dataclass(frozen=True)
class SignalStates:
    r: int
    xi: np.ndarray  # (A**r, N), column i is |eta_i>
    words: tuple  # row labels, tuples of symbols in lexicographic order
    states: tuple

    @property
    def word_index(self) -> dict:
        return {w: k for k, w in enumerate(self.words)}

    @property
    def dim(self) -> int:
        return self.xi.shape[0]


@dataclass(frozen=True)
class QuantumMachine:
    alphabet: tuple
    signal: SignalStates
    duals: np.ndarray  # (N, D)
    kraus: np.ndarray  # (A, D, D)
    rho_s: np.ndarray
    cq: float

    def to_dict(self) -> dict:
        return {
            "r": self.signal.r,
            "alphabet": list(self.alphabet),
            "word_order": ["".join(w) if all(len(s) == 1 for s in w) else list(w) for w in self.signal.words],
            "kraus": {a: self.kraus[x].tolist() for x, a in enumerate(self.alphabet)},
            "rho_s": self.rho_s.tolist(),
            "cq": self.cq,
        }


def word_matrix(hmm: Hmm, r: int) -> np.ndarray:
    """``P[w, i] = Pr(next r symbols = w | state i)``, rows lexicographic."""
    if r < 0:
        raise InputError("word length must be nonnegative")
    p = np.ones((1, hmm.n_states))
    for _ in range(r):
        # Prepend one symbol: Pr(x w | i) = sum_j T[x, i, j] Pr(w | j).
        p = np.concatenate([p @ hmm.t[x].T for x in range(hmm.n_symbols)], axis=0)
    return p


def conditional_word_distribution(hmm: Hmm, state: int, r: int) -> np.ndarray:
    return word_matrix(hmm, r)[:, state]


def build_signal_states(hmm: Hmm, r: int, tol: float = INDEPENDENCE_TOL) -> SignalStates:
    """Signal-state matrix for Markov order ``r``.

    Raises
    ------
    MarkovOrderMismatch
        Length-``r`` words do not synchronize the machine.
    LinearlyDependentStates
        Smallest Gram eigenvalue is at or below ``tol``.
    """
    dim = hmm.n_symbols**r
    if dim > MAX_DIM:
        raise InputError(f"word space of dimension {dim} exceeds the limit {MAX_DIM}")
    if not check_markov_order(hmm, r):
        raise MarkovOrderMismatch(f"length-{r} words do not synchronize this machine")
    xi = np.sqrt(np.maximum(word_matrix(hmm, r), 0.0))
    smallest = jacobi_gram_eigenvalues(xi)[-1]
    if not smallest > tol:
        raise LinearlyDependentStates(
            f"signal states are (nearly) linearly dependent: smallest Gram eigenvalue {smallest:.3e} <= {tol:g}"
        )
    words = tuple(itertools.product(hmm.alphabet, repeat=r))
    return SignalStates(r, xi, words, hmm.states)


def gram_matrix(signal: SignalStates) -> np.ndarray:
    g = signal.xi.T @ signal.xi
    return 0.5 * (g + g.T)


def dual_states(signal: SignalStates) -> np.ndarray:
    """Rows <dual_i| with <dual_i|eta_j> = delta_ij, supported on the signal span."""
    return np.linalg.solve(gram_matrix(signal), signal.xi.T)


def stationary_density(hmm: Hmm, signal: SignalStates, kraus=None) -> np.ndarray:
    """``rho_s = sum_i pi_i |eta_i><eta_i|``, checked as a channel fixed point.

    With ``kraus`` the channel is applied as given. Without it, the image
    ``sum_x K_x rho K_x^T`` is formed from ``K_x|eta_i> = sum_j sqrt(T[x,i,j]) |eta_j>``,
    which avoids the inverse Gram matrix when states are nearly parallel.
    """
    pi = stationary_distribution(hmm)
    xi = signal.xi
    rho = (xi * pi) @ xi.T
    rho = 0.5 * (rho + rho.T)
    image = np.zeros_like(rho)
    if kraus is not None:
        for k in kraus:
            image += k @ rho @ k.T
    else:
        for x in range(hmm.n_symbols):
            v = xi @ np.sqrt(hmm.t[x]).T
            image += (v * pi) @ v.T
    residual = np.max(np.abs(image - rho))
    if not residual < FIXED_POINT_TOL:
        raise FixedPointViolation(f"stationary density is not a channel fixed point (residual {residual:.3e})")
    return rho


def von_neumann_entropy(rho, tol: float = 1e-10) -> float:
    """-tr(rho log2 rho) for a real symmetric density matrix."""
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotDensityMatrix(f"expected a square matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.T), initial=0.0) > tol:
        raise NotDensityMatrix("matrix is not symmetric")
    if abs(np.trace(rho) - 1.0) > 1e-9:
        raise NotDensityMatrix(f"trace is {np.trace(rho)!r}, not 1")
    ev = np.linalg.eigvalsh(0.5 * (rho + rho.T))
    if ev.min() < -tol:
        raise NotDensityMatrix(f"negative eigenvalue {ev.min():.3e}")
    return entropy_bits(np.clip(ev, 0.0, None))


def ensemble_spectrum(hmm: Hmm, signal: SignalStates) -> np.ndarray:
    """Nonzero spectrum of rho_s via the weighted Gram matrix sqrt(pi_i pi_j) G_ij."""
    pi = stationary_distribution(hmm)
    ev = jacobi_gram_eigenvalues(signal.xi * np.sqrt(pi))
    return ev / ev.sum()


def quantum_memory(hmm: Hmm, r: int, tol: float = RANK_TOL) -> float:
    """C_q = S(rho_s) in bits.

    Computed from the weighted Gram spectrum (one-sided Jacobi, accurate for
    tiny eigenvalues) and cross-checked against the full word-space density
    matrix to 1e-9.
    """
    signal = build_signal_states(hmm, r, tol=tol)
    cq = entropy_bits(ensemble_spectrum(hmm, signal))
    full = von_neumann_entropy(stationary_density(hmm, signal))
    if abs(full - cq) > CROSS_CHECK_TOL:
        raise NumericalError(f"C_q cross-check failed: Gram route {cq!r} vs density route {full!r}")
    return cq


def build_kraus(hmm: Hmm, signal: SignalStates) -> QuantumMachine:
    """Kraus operators, stationary state and memory of the q-machine."""
    duals = dual_states(signal)
    off = np.max(np.abs(duals @ signal.xi - np.eye(hmm.n_states)))
    if off > 1e-10:
        raise LinearlyDependentStates(f"dual states fail biorthogonality by {off:.3e}")
    kraus = np.stack([signal.xi @ np.sqrt(hmm.t[x]).T @ duals for x in range(hmm.n_symbols)])
    rho = stationary_density(hmm, signal, kraus)
    cq = entropy_bits(ensemble_spectrum(hmm, signal))
    return QuantumMachine(hmm.alphabet, signal, duals, kraus, rho, cq)


def q_machine(hmm: Hmm, r: int) -> QuantumMachine:
    return build_kraus(hmm, build_signal_states(hmm, r))


def outcome_probabilities(kraus, rho) -> np.ndarray:
    """tr(K_x rho K_x^T) for every x."""
    return np.einsum("xij,jk,xik->x", kraus, rho, kraus)


def _choose(probs, u):
    cum = np.cumsum(probs)
    cum /= cum[-1]
    return min(bisect.bisect_right(cum.tolist(), u), len(probs) - 1)


def _measure(qm: QuantumMachine, rho, u):
    probs = outcome_probabilities(qm.kraus, rho)
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise NotDensityMatrix(f"outcome probabilities sum to {total!r}; state is outside the signal span")
    x = _choose(probs, u)
    k = qm.kraus[x]
    new = k @ rho @ k.T
    new /= np.trace(new)
    return x, 0.5 * (new + new.T)


def quantum_step(qm: QuantumMachine, rho, rng: np.random.Generator):
    """Measure once: returns (symbol, post-measurement state)."""
    x, new = _measure(qm, np.asarray(rho, dtype=float), rng.random())
    return qm.alphabet[x], new


def quantum_sample_indices(qm: QuantumMachine, n: int, seed: int, memo_limit: int = 4096) -> np.ndarray:
    """Symbol indices of ``n`` repeated measurements started from rho_s.

    Post-measurement states of a finite-order machine form a finite set,
    so states are interned (to 1e-12) and their outcome tables cached.
    One uniform draw is consumed per step, exactly as in quantum_step, so
    the result equals naive iteration for the same seed.
    """
    if n < 0:
        raise ValueError("sample length must be nonnegative")
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.random(n).tolist()
    table = [qm.rho_s]
    edges = {}
    out = np.empty(n, dtype=np.int64)
    cur = 0
    rho = None
    for step, u in enumerate(draws):
        if cur is None:
            x, rho = _measure(qm, rho, u)
            out[step] = x
            continue
        if cur not in edges:
            probs = outcome_probabilities(qm.kraus, table[cur])
            total = probs.sum()
            if abs(total - 1.0) > 1e-9:
                raise NotDensityMatrix(f"outcome probabilities sum to {total!r}")
            cum = np.cumsum(probs)
            cum /= cum[-1]
            targets = []
            for x in range(len(probs)):
                if probs[x] <= 0.0:
                    targets.append(None)
                    continue
                k = qm.kraus[x]
                new = k @ table[cur] @ k.T
                new /= np.trace(new)
                new = 0.5 * (new + new.T)
                hit = next((m for m, s in enumerate(table) if np.max(np.abs(s - new)) < 1e-12), None)
                if hit is None:
                    table.append(new)
                    hit = len(table) - 1
                targets.append(hit)
            edges[cur] = (cum.tolist(), targets)
        cum, targets = edges[cur]
        x = min(bisect.bisect_right(cum, u), len(cum) - 1)
        out[step] = x
        if len(table) > memo_limit:
            rho = table[targets[x]]
            cur = None
        else:
            cur = targets[x]
    return out


def quantum_sample(qm: QuantumMachine, n: int, seed: int) -> list[str]:
    return [qm.alphabet[x] for x in quantum_sample_indices(qm, n, seed)]
