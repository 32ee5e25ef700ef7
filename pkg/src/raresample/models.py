"""Example generators, built in code or loaded from the bundled JSON files."""

from importlib import resources

import numpy as np

from .hmm import Hmm, require_valid
from .io import loads_hmm

BUNDLED = ("perturbed_coins", "period2", "fig1_six_state")


def perturbed_coins(p: float = 0.6, q: float = 0.8) -> Hmm:
    """Two biased coins; the last outcome picks the next coin.

    State A flips heads ("0") with probability p, state B flips tails ("1")
    with probability q. Heads leads to A, tails to B.
    """
    t = np.zeros((2, 2, 2))
    t[0, 0, 0] = p
    t[1, 0, 1] = 1.0 - p
    t[0, 1, 0] = 1.0 - q
    t[1, 1, 1] = q
    return require_valid(Hmm(("A", "B"), ("0", "1"), t, name=f"perturbed_coins(p={p!r},q={q!r})"))


def period2() -> Hmm:
    t = np.zeros((2, 2, 2))
    t[0, 0, 1] = 1.0
    t[1, 1, 0] = 1.0
    return require_valid(Hmm(("A", "B"), ("0", "1"), t, name="period2"))


def iid(probs, alphabet=None, name="iid") -> Hmm:
    probs = np.asarray(probs, dtype=float)
    alphabet = alphabet or tuple(str(k) for k in range(probs.size))
    return require_valid(Hmm(("S",), alphabet, probs.reshape(-1, 1, 1), name=name))


def fair_coin() -> Hmm:
    return iid([0.5, 0.5], name="fair_coin")


# (from, symbol, to) with probability 1/2 each. Two three-cycles, A->D->E
# on "1" and B->F->C on "0", keep the current state ambiguous after any
# run of one symbol, so no finite history synchronizes. "2" is emitted
# only from A and E and leads into B and C, which never emit "2".
_FIG1_EDGES = (
    ("A", "1", "D"), ("A", "2", "B"),
    ("B", "0", "F"), ("B", "1", "D"),
    ("C", "0", "B"), ("C", "1", "A"),
    ("D", "1", "E"), ("D", "0", "F"),
    ("E", "1", "A"), ("E", "2", "C"),
    ("F", "0", "C"), ("F", "1", "E"),
)


def fig1_six_state() -> Hmm:
    """Six-state, three-symbol machine with infinite Markov order."""
    states = ("A", "B", "C", "D", "E", "F")
    alphabet = ("0", "1", "2")
    t = np.zeros((3, 6, 6))
    for src, sym, dst in _FIG1_EDGES:
        t[alphabet.index(sym), states.index(src), states.index(dst)] = 0.5
    return require_valid(Hmm(states, alphabet, t, name="fig1_six_state"))


def bundled_path(name: str):
    return resources.files("raresample") / "data" / f"{name}.json"


def load_bundled(name: str) -> Hmm:
    if name not in BUNDLED:
        raise KeyError(f"no bundled model {name!r}; choose from {BUNDLED}")
    return loads_hmm(bundled_path(name).read_text(encoding="utf-8"))
