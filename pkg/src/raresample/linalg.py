"""Small dense kernels that keep relative accuracy on graded inputs.

Tilted machines at large |beta| have transition probabilities spanning
hundreds of orders of magnitude. Plain LU or QR solves lose the small
entries to absolute rounding error, which then poisons entropies such as
``-p log p``. The routines here avoid subtractive cancellation so tiny
quantities come out with full relative precision.
"""

import numpy as np

from .errors import NonConvergence

LOG2E = 1.0 / np.log(2.0)


def gth_stationary(p):
    """Stationary row vector of an irreducible stochastic matrix.

    Grassmann-Taksar-Heyman state reduction. Pivots are recomputed as
    sums of off-diagonal mass, never as ``1 - p_kk``, so every entry of
    the result is accurate to a few ulps relative to itself.
    """
    a = np.array(p, dtype=float, copy=True)
    n = a.shape[0]
    for k in range(n - 1, 0, -1):
        s = a[k, :k].sum()
        if not s > 0.0:
            raise NonConvergence(f"state reduction hit zero pivot at state {k}; chain is reducible")
        a[:k, k] /= s
        a[:k, :k] += np.outer(a[:k, k], a[k, :k])
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ a[:k, k]
    return pi / pi.sum()


def jacobi_gram_eigenvalues(b, tol=1e-14, max_sweeps=100):
    """Eigenvalues of ``b.T @ b`` by one-sided (Hestenes) cyclic Jacobi.

    Columns of ``b`` are rotated pairwise until mutually orthogonal; the
    squared column norms are then the eigenvalues. When ``b`` is a
    well-conditioned matrix times a diagonal scaling, the small
    eigenvalues are obtained to high relative accuracy, which a
    two-sided solver on the explicitly formed product cannot guarantee.

    Parameters
    ----------
    b : ndarray, shape (m, n)
    tol : float
        Stop once every pair satisfies ``|<b_i, b_j>| <= tol * |b_i| |b_j|``.

    Returns
    -------
    ndarray, shape (n,)
        Eigenvalues in descending order.
    """
    b = np.array(b, dtype=float, copy=True)
    n = b.shape[1]
    # Columns at the rounding floor of b are numerically zero; rotating
    # them against large columns cannot make them relatively orthogonal.
    floor = (b.shape[0] * np.finfo(float).eps * np.linalg.norm(b)) ** 2
    for _ in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                bi = b[:, i]
                bj = b[:, j]
                alpha = bi @ bi
                beta = bj @ bj
                gamma = bi @ bj
                if min(alpha, beta) <= floor or abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta == 0.0:
                    t = 1.0
                else:
                    t = np.copysign(1.0, zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                new_i = c * bi - s * bj
                b[:, j] = s * bi + c * bj
                b[:, i] = new_i
        if not rotated:
            return np.sort(np.einsum("ij,ij->j", b, b))[::-1]
    raise NonConvergence(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")


def entropy_bits(p):
    """-sum p log2 p over a probability vector, with 0 log 0 = 0.

    Entries above one half use ``log1p`` of the summed remainder so that a
    near-deterministic vector keeps its (tiny) entropy to full relative
    precision.
    """
    p = np.asarray(p, dtype=float).ravel()
    total = 0.0
    for i, x in enumerate(p):
        if x <= 0.0:
            continue
        if x > 0.5:
            rest = p[np.arange(p.size) != i]
            rest = rest[rest > 0.0].sum()
            total -= x * np.log1p(-rest) * LOG2E
        else:
            total -= x * np.log2(x)
    return float(max(total, 0.0))
