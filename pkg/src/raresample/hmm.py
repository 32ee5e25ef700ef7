"""Finite hidden Markov model generators and their stationary statistics.

A generator is a family of symbol-labelled substochastic matrices
``t[x][i, j]`` = Pr(emit x and move i -> j). All information quantities are
in bits.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import ForbiddenWord, InvalidModel, NonConvergence, NotUnifilar, UnknownSymbol
from .linalg import entropy_bits, gth_stationary

STOCHASTIC_TOL = 1e-9
STATIONARY_TOL = 1e-12
# Beyond this length word probabilities are accumulated in log space.
LOG_SPACE_LENGTH = 64
RNG_ALGORITHM = "numpy.random.Generator(PCG64)"


@dataclass(frozen=True, eq=False)
class Hmm:
    """Immutable symbol-labelled generator.

    Parameters
    ----------
    states : sequence of str
        State labels; their order is the matrix index order.
    alphabet : sequence of str
        Symbol labels; their order is the tensor index order.
    t : array_like, shape (len(alphabet), len(states), len(states))
        ``t[x, i, j]`` is the joint probability of emitting ``alphabet[x]``
        and moving from ``states[i]`` to ``states[j]``.
    name : str, optional
    """

    states: tuple
    alphabet: tuple
    t: np.ndarray
    name: str = ""
    _symbol_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        states = tuple(str(s) for s in self.states)
        alphabet = tuple(str(a) for a in self.alphabet)
        t = np.array(self.t, dtype=float, copy=True)
        if t.ndim != 3 or t.shape != (len(alphabet), len(states), len(states)):
            raise ValueError(
                f"transition tensor has shape {t.shape}, expected "
                f"({len(alphabet)}, {len(states)}, {len(states)})"
            )
        t.flags.writeable = False
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "_symbol_index", {a: k for k, a in enumerate(alphabet)})

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_symbols(self) -> int:
        return len(self.alphabet)

    @property
    def transition_matrix(self) -> np.ndarray:
        return self.t.sum(axis=0)

    def symbol_index(self, symbol) -> int:
        try:
            return self._symbol_index[symbol]
        except KeyError:
            raise UnknownSymbol(f"symbol {symbol!r} not in alphabet {list(self.alphabet)}") from None

    def encode(self, word) -> list[int]:
        """Symbol labels -> alphabet indices. A str is split into characters."""
        return [self.symbol_index(s) for s in word]

    def decode(self, indices) -> list[str]:
        return [self.alphabet[k] for k in indices]

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"Hmm({label}states={list(self.states)}, alphabet={list(self.alphabet)})"


@dataclass(frozen=True)
class Violation:
    invariant: str
    message: str
    indices: tuple = ()
    magnitude: float = 0.0

    def __str__(self):
        return f"[{self.invariant}] {self.message}"


def validate(hmm: Hmm) -> list[Violation]:
    """Check every generator invariant; an empty list means valid."""
    out = []
    for kind, labels in (("states", hmm.states), ("alphabet", hmm.alphabet)):
        if not labels:
            out.append(Violation("nonempty", f"{kind} is empty"))
        seen = set()
        for k, lab in enumerate(labels):
            if lab in seen:
                out.append(Violation("unique-labels", f"duplicate {kind} label {lab!r}", (k,)))
            seen.add(lab)
    if hmm.n_states == 0 or hmm.n_symbols == 0:
        return out

    t = hmm.t
    bad = np.argwhere(~np.isfinite(t) | (t < 0.0) | (t > 1.0))
    for x, i, j in bad:
        out.append(
            Violation(
                "entry-range",
                f"T[{hmm.alphabet[x]}][{hmm.states[i]},{hmm.states[j]}] = {t[x, i, j]!r} outside [0, 1]",
                (int(x), int(i), int(j)),
                float(t[x, i, j]),
            )
        )
    rows = t.sum(axis=(0, 2))
    for i, s in enumerate(rows):
        if not abs(s - 1.0) <= STOCHASTIC_TOL:
            out.append(
                Violation(
                    "row-stochastic",
                    f"outgoing probability of state {hmm.states[i]!r} sums to {s!r}",
                    (i,),
                    float(abs(s - 1.0)),
                )
            )
    n_comp, labels = connected_components(hmm.transition_matrix > 0.0, directed=True, connection="strong")
    if n_comp > 1:
        groups = [[hmm.states[i] for i in np.flatnonzero(labels == c)] for c in range(n_comp)]
        out.append(
            Violation(
                "irreducible",
                f"transition graph has {n_comp} strongly connected components: {groups}",
                tuple(int(c) for c in labels),
                float(n_comp),
            )
        )
    return out


def require_valid(hmm: Hmm) -> Hmm:
    violations = validate(hmm)
    if violations:
        raise InvalidModel(violations)
    return hmm


def stationary_distribution(hmm: Hmm) -> np.ndarray:
    """Stationary state distribution ``pi`` with ``pi T = pi``.

    Raises
    ------
    NonConvergence
        If the residual ``max |pi T - pi|`` is not below 1e-12.
    """
    tm = hmm.transition_matrix
    pi = gth_stationary(tm)
    residual = np.max(np.abs(pi @ tm - pi))
    if not residual < STATIONARY_TOL:
        raise NonConvergence(f"stationary residual {residual:.3e} exceeds {STATIONARY_TOL:g}")
    return pi


def shannon_entropy(p) -> float:
    """Shannon entropy in bits of a probability vector."""
    return entropy_bits(p)


def statistical_complexity(hmm: Hmm) -> float:
    return shannon_entropy(stationary_distribution(hmm))


def check_unifilar(hmm: Hmm) -> bool:
    return bool(np.all(np.count_nonzero(hmm.t > 0.0, axis=2) <= 1))


def successor_table(hmm: Hmm) -> np.ndarray:
    """``succ[i, x]`` = unique next state after emitting x from i, or -1.

    Raises NotUnifilar if some (state, symbol) pair has two successors.
    """
    if not check_unifilar(hmm):
        x, i = np.argwhere(np.count_nonzero(hmm.t > 0.0, axis=2) > 1)[0]
        raise NotUnifilar(
            f"state {hmm.states[i]!r} has several successors on symbol {hmm.alphabet[x]!r}"
        )
    has = hmm.t > 0.0
    succ = np.where(has.any(axis=2), has.argmax(axis=2), -1)
    return succ.T.copy()


def entropy_rate(hmm: Hmm) -> float:
    """Entropy rate h_mu of a unifilar generator, in bits per symbol.

    Uses the closed form ``sum_i pi_i H[Pr(x | i)]`` which is exact only
    for unifilar machines.
    """
    if not check_unifilar(hmm):
        raise NotUnifilar("closed-form entropy rate needs a unifilar generator; use empirical_decay_rate")
    pi = stationary_distribution(hmm)
    return float(sum(pi[i] * entropy_bits(hmm.t[:, i, :].ravel()) for i in range(hmm.n_states)))


def check_markov_order(hmm: Hmm, r: int) -> bool:
    """True iff every admissible length-``r`` word synchronizes the machine.

    All states are followed in parallel: the set of possible current states
    is pushed through each symbol, and after ``r`` symbols every nonempty set
    must be a single state.
    """
    if r < 0:
        raise ValueError("Markov order must be nonnegative")
    succ = successor_table(hmm)
    level = {frozenset(range(hmm.n_states))}
    for _ in range(r):
        nxt = set()
        for group in level:
            for x in range(hmm.n_symbols):
                image = frozenset(int(succ[i, x]) for i in group if succ[i, x] >= 0)
                if image:
                    nxt.add(image)
        level = nxt
    return all(len(g) == 1 for g in level)


def markov_order(hmm: Hmm, r_max: int = 8) -> int | None:
    """Smallest r <= r_max passing check_markov_order, else None."""
    for r in range(r_max + 1):
        if check_markov_order(hmm, r):
            return r
    return None


def log2_word_probability(hmm: Hmm, word, pi=None) -> float:
    """log2 Pr(word); ``-inf`` for a forbidden word.

    The forward vector is renormalized at every step, so arbitrarily long
    words do not underflow.
    """
    idx = hmm.encode(word)
    v = stationary_distribution(hmm) if pi is None else np.asarray(pi, dtype=float)
    log2p = 0.0
    for x in idx:
        v = v @ hmm.t[x]
        s = v.sum()
        if s <= 0.0:
            return -math.inf
        v = v / s
        log2p += math.log2(s)
    return log2p


def word_probability(hmm: Hmm, word, pi=None) -> float:
    """Pr(word) = pi T^(w1) ... T^(wn) 1; exactly 0 for forbidden words."""
    idx = hmm.encode(word)
    if len(idx) > LOG_SPACE_LENGTH:
        lp = log2_word_probability(hmm, word, pi)
        return 0.0 if lp == -math.inf else 2.0**lp
    v = stationary_distribution(hmm) if pi is None else np.asarray(pi, dtype=float)
    for x in idx:
        v = v @ hmm.t[x]
    return float(min(max(v.sum(), 0.0), 1.0))


def empirical_decay_rate(hmm: Hmm, word) -> float:
    """Probability decay rate -log2 Pr(w) / |w| of a single word."""
    n = len(word)
    if n < 1:
        raise ValueError("decay rate needs a word of length >= 1")
    lp = log2_word_probability(hmm, word)
    if lp == -math.inf:
        raise ForbiddenWord("word has probability zero under this model")
    return -lp / n


class _Sampler:
    """Per-state cumulative tables over joint (symbol, next state) outcomes."""

    def __init__(self, hmm: Hmm):
        self.outcomes = []
        self.cumulative = []
        for i in range(hmm.n_states):
            pairs = [(x, j) for x in range(hmm.n_symbols) for j in range(hmm.n_states) if hmm.t[x, i, j] > 0.0]
            probs = np.array([hmm.t[x, i, j] for x, j in pairs])
            cum = np.cumsum(probs)
            cum /= cum[-1]
            self.outcomes.append(pairs)
            self.cumulative.append(cum.tolist())


def sample_indices(hmm: Hmm, n: int, seed: int) -> np.ndarray:
    """Symbol indices of a length-``n`` realization; see sample_path."""
    if n < 0:
        raise ValueError("sample length must be nonnegative")
    rng = np.random.Generator(np.random.PCG64(seed))
    pi = stationary_distribution(hmm)
    state = int(np.searchsorted(np.cumsum(pi), rng.random() * pi.sum(), side="right"))
    state = min(state, hmm.n_states - 1)
    table = _Sampler(hmm)
    draws = rng.random(n).tolist()
    out = np.empty(n, dtype=np.int64)
    outcomes, cumulative = table.outcomes, table.cumulative
    for k, u in enumerate(draws):
        cum = cumulative[state]
        m = min(bisect.bisect_right(cum, u), len(cum) - 1)
        x, state = outcomes[state][m]
        out[k] = x
    return out


def sample_path(hmm: Hmm, n: int, seed: int) -> list[str]:
    """Draw a length-``n`` realization.

    The start state is drawn from the stationary distribution, then
    (symbol, next state) pairs are drawn from each state's outgoing joint
    distribution. Output is a deterministic function of ``seed``
    (PCG64 bit generator).
    """
    return hmm.decode(sample_indices(hmm, n, seed))


def words(hmm: Hmm, length: int):
    """All words of a given length, lexicographic in alphabet order."""
    return itertools.product(hmm.alphabet, repeat=length)


def word_census(symbols: Sequence[int], n_symbols: int, length: int) -> np.ndarray:
    """Counts of overlapping length-``length`` words, indexed lexicographically."""
    s = np.asarray(symbols, dtype=np.int64)
    m = s.size - length + 1
    if m <= 0:
        return np.zeros(n_symbols**length, dtype=np.int64)
    code = np.zeros(m, dtype=np.int64)
    for k in range(length):
        code = code * n_symbols + s[k : k + m]
    return np.bincount(code, minlength=n_symbols**length)
