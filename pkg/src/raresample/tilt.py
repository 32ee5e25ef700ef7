"""Exponential tilting (the beta-map) of a generator.

Raising every transition probability to the power beta and restoring
stochasticity with the Perron eigenvector gives the driven generator
whose typical realizations are the original process's words with decay
rate ``U(beta) = (h_mu(beta) - log2 lambda_beta) / beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import BetaZero, InputError, NonConvergence, TiltOverflow
from .hmm import Hmm, entropy_rate, require_valid

BETA_LIMIT = 500.0
ROW_CORRECTION_TOL = 1e-9
# exp2 of anything below this lands in the subnormal range or at zero.
_MIN_LOG2_WEIGHT = -1000.0


@dataclass(frozen=True)
class PerronPair:
    eigenvalue: float
    vector: np.ndarray  # right eigenvector, strictly positive, sums to 1


def _squaring_iteration(m, shift, tol, max_squarings):
    n = m.shape[0]
    p = m / shift + np.eye(n)
    # Floor on the attainable relative change once the iterate is rank one.
    rtol = max(tol, 8 * n * np.finfo(float).eps)
    prev = None
    for _ in range(max_squarings):
        p = p @ p
        p /= p.max()
        col = p[:, np.argmax(p.sum(axis=0))]
        r = col / col.sum()
        if prev is not None and np.all(r > 0.0) and np.all(np.abs(r - prev) <= rtol * r):
            break
        prev = r
    else:
        raise NonConvergence(f"Perron vector not converged after {max_squarings} squarings")
    i = int(np.argmax(r))
    return float(m[i] @ r / r[i]), r


def perron(m, tol: float = 1e-14, max_squarings: int = 256) -> PerronPair:
    """Perron eigenvalue and right eigenvector of a nonnegative irreducible matrix.

    Power iteration on ``m / c + I`` accelerated by repeated squaring:
    after k squarings the iterate is the 2**k-th power, whose columns all
    align with the Perron vector. The identity shift removes periodicity
    without moving the eigenvector. Only sums and products of nonnegative
    numbers occur, so small components keep their relative precision.
    The scale ``c`` starts at ``max(m)`` and is reset to the eigenvalue
    estimate until the two agree within a factor of two; a shift much
    larger than the eigenvalue would drown the spectrum in rounding.

    Raises
    ------
    NonConvergence
        If the vector has not settled to relative change ``tol`` within
        ``max_squarings`` squarings, or some component of ``m r - lam r``
        exceeds 1e-10 of ``lam r``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InputError(f"expected a nonempty square matrix, got shape {m.shape}")
    if np.any(m < 0.0) or not np.all(np.isfinite(m)):
        raise InputError("matrix must be finite and nonnegative")
    n_comp, _ = connected_components(m > 0.0, directed=True, connection="strong")
    if n_comp > 1:
        raise InputError("matrix is reducible; the Perron vector is not unique")

    shift = float(m.max())
    for _ in range(8):
        lam, r = _squaring_iteration(m, shift, tol, max_squarings)
        if not lam > 0.0:
            raise NonConvergence("Perron eigenvalue estimate is not positive")
        if 0.5 <= lam / shift <= 2.0:
            break
        shift = lam
    else:
        raise NonConvergence("Perron shift did not settle near the eigenvalue")

    residual = np.max(np.abs(m @ r - lam * r) / (lam * r))
    if not residual < 1e-10:
        raise NonConvergence(f"Perron relative residual {residual:.3e} exceeds 1e-10")
    return PerronPair(lam, r)


def stochasticize(m_parts, states=None, alphabet=None, name: str = "") -> tuple[Hmm, PerronPair]:
    """Turn per-symbol nonnegative weights into a stochastic generator.

    ``S[x, i, j] = M[x, i, j] * r[j] / (lambda * r[i])`` with (lambda, r) the
    Perron pair of ``M = sum_x M[x]``. Each row is then rescaled once to
    absorb rounding; a correction above 1e-9 means the Perron data were bad.
    """
    parts = np.asarray(m_parts, dtype=float)
    pair = perron(parts.sum(axis=0))
    r = pair.vector
    s = parts * r[None, None, :] / (pair.eigenvalue * r[None, :, None])
    rows = s.sum(axis=(0, 2))
    worst = np.max(np.abs(rows - 1.0))
    if not worst < ROW_CORRECTION_TOL:
        raise NonConvergence(f"stochasticized rows off by {worst:.3e}")
    s /= rows[None, :, None]
    n_sym, n = parts.shape[0], parts.shape[1]
    states = tuple(states) if states is not None else tuple(str(k) for k in range(n))
    alphabet = tuple(alphabet) if alphabet is not None else tuple(str(k) for k in range(n_sym))
    return Hmm(states, alphabet, s, name=name), pair


@dataclass(frozen=True)
class TiltedHmm:
    """Driven generator for one beta, with its decay-rate bookkeeping."""

    hmm: Hmm
    beta: float
    log2_lam: float
    hmu_beta: float
    u: float

    @property
    def lam(self) -> float:
        try:
            return 2.0**self.log2_lam
        except OverflowError:
            return math.inf

    def metadata(self) -> dict:
        return {
            "beta": self.beta,
            "lambda": self.lam,
            "log2_lambda": self.log2_lam,
            "U": self.u,
            "hmu_beta": self.hmu_beta,
            "note": "Cmu is computed on this machine as given, without minimization",
        }


def _decay_rate(beta, hmu_beta, log2_lam):
    return (hmu_beta - log2_lam) / beta


def tilt_weights(hmm: Hmm, beta: float) -> tuple[np.ndarray, float]:
    """Entrywise powers ``t ** beta`` divided by a common factor 2**shift.

    Returns the scaled weights and ``shift``. Zeros stay zero for any beta.
    """
    beta = float(beta)
    if beta == 0.0:
        raise BetaZero("beta must be nonzero")
    if not abs(beta) <= BETA_LIMIT:
        raise TiltOverflow(f"|beta| = {abs(beta)!r} exceeds the supported range {BETA_LIMIT:g}")
    t = hmm.t
    nz = t > 0.0
    logw = np.full(t.shape, -np.inf)
    logw[nz] = beta * np.log2(t[nz])
    shift = float(logw[nz].max())
    rel = logw - shift
    low = np.where(nz, rel, np.inf)
    if low.min() < _MIN_LOG2_WEIGHT:
        x, i, j = np.unravel_index(np.argmin(low), t.shape)
        raise TiltOverflow(
            f"at beta={beta!r}, T[{hmm.alphabet[x]}][{hmm.states[i]},{hmm.states[j]}]={t[x, i, j]!r} "
            f"raised to beta spans {-low.min():.0f} bits relative to the largest weight; "
            "double precision cannot hold both"
        )
    w = np.where(nz, np.exp2(np.where(nz, rel, 0.0)), 0.0)
    return w, shift


def tilt_hmm(hmm: Hmm, beta: float) -> TiltedHmm:
    """Apply the beta-map to a unifilar generator.

    Raises
    ------
    BetaZero
    TiltOverflow
        |beta| > 500, or the powered weights exceed double-precision range.
    NotUnifilar
        The tilted entropy rate needs the closed form.
    """
    w, shift = tilt_weights(hmm, beta)
    s, pair = stochasticize(w, hmm.states, hmm.alphabet, name=hmm.name)
    require_valid(s)
    log2_lam = math.log2(pair.eigenvalue) + shift
    hmu_beta = entropy_rate(s)
    beta = float(beta)
    return TiltedHmm(s, beta, log2_lam, hmu_beta, _decay_rate(beta, hmu_beta, log2_lam))


def energy_density(tilted: TiltedHmm) -> float:
    """Decay rate U (bits/symbol) of the class the tilted machine targets."""
    return _decay_rate(tilted.beta, tilted.hmu_beta, tilted.log2_lam)


def decay_rate(hmm: Hmm, beta: float) -> float:
    return tilt_hmm(hmm, beta).u
