"""One-dimensional spin chains as finite-state generators.

The next-nearest-neighbour Ising chain

    H = -sum_i (J1 s_i s_{i+1} + J2 s_i s_{i+2} + h s_i)

read left to right is an order-2 Markov process. Its generator has one
state per spin pair and comes from stochasticizing the pair transfer
matrix. Spins are +1 (up) and -1 (down); k_B is absorbed into ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import InputError
from .hmm import Hmm
from .tilt import perron, stochasticize

DOWN, UP = "↓", "↑"
SPIN_SYMBOLS = (DOWN, UP)
SPIN_VALUES = (-1, 1)
PAIR_STATES = tuple(a + b for a in SPIN_SYMBOLS for b in SPIN_SYMBOLS)


@dataclass(frozen=True)
class SpinModel:
    j1: float = 1.0
    j2: float = 0.25
    h: float = 0.0
    t: float = 1.0

    def __post_init__(self):
        if not self.t > 0.0:
            raise InputError(f"temperature must be positive, got {self.t!r}")


def _pair_log_weights(model: SpinModel) -> np.ndarray:
    """``logw[x, (s, s'), (s', x)] = (J1 s' x + J2 s x + h x) / t``, -inf elsewhere."""
    logw = np.full((2, 4, 4), -np.inf)
    for i, (s, s1) in enumerate((a, b) for a in SPIN_VALUES for b in SPIN_VALUES):
        for x, s2 in enumerate(SPIN_VALUES):
            j = 2 * SPIN_VALUES.index(s1) + x
            logw[x, i, j] = (model.j1 * s1 * s2 + model.j2 * s * s2 + model.h * s2) / model.t
    return logw


def transfer_matrix(model: SpinModel) -> tuple[np.ndarray, float]:
    """Pair transfer matrix split by appended spin, scaled by ``exp(-shift)``.

    Returns ``(parts, shift)`` with ``V = exp(shift) * parts.sum(0)``.
    """
    logw = _pair_log_weights(model)
    shift = float(logw[np.isfinite(logw)].max())
    return np.exp(logw - shift), shift


def ising_nnn_process(model: SpinModel = SpinModel()) -> Hmm:
    """Four-state unifilar generator of equilibrium spin configurations.

    State ``s s'`` holds the last two spins; emitting ``x`` moves to ``s' x``.
    """
    parts, _ = transfer_matrix(model)
    name = f"ising_nnn(j1={model.j1!r},j2={model.j2!r},h={model.h!r},t={model.t!r})"
    hmm, _ = stochasticize(parts, PAIR_STATES, SPIN_SYMBOLS, name=name)
    return hmm


def iid_field_process(h: float, t: float) -> Hmm:
    """Single-state generator of independent spins in a field h at temperature t."""
    if not t > 0.0:
        raise InputError(f"temperature must be positive, got {t!r}")
    # 1/2 (1 + tanh(h/t)) == expit(2h/t); expit keeps the small side exact.
    p_up, p_down = expit(2.0 * h / t), expit(-2.0 * h / t)
    t_ = np.array([p_down, p_up]).reshape(2, 1, 1)
    return Hmm(("S",), SPIN_SYMBOLS, t_, name=f"iid_field(h={h!r},t={t!r})")


def free_energy_density(model: SpinModel) -> float:
    """F(T) = -t ln(lambda_V) per site."""
    parts, shift = transfer_matrix(model)
    lam = perron(parts.sum(axis=0)).eigenvalue
    return -model.t * (math.log(lam) + shift)


def decay_rate_from_energy(model: SpinModel, e: float) -> float:
    """U = log2(e) / t * (E - F(T)), bits per spin."""
    return (e - free_energy_density(model)) / (model.t * math.log(2.0))


def energy_from_decay(model: SpinModel, u: float) -> float:
    return u * model.t * math.log(2.0) + free_energy_density(model)


def configuration_energy(model: SpinModel, spins) -> float:
    """Total energy of a periodic ring of +-1 spins."""
    s = np.asarray(spins, dtype=float)
    return float(-(model.j1 * s @ np.roll(s, -1) + model.j2 * s @ np.roll(s, -2) + model.h * s.sum()))
