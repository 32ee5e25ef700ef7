"""Beta sweeps of classical and quantum memory, and scaling fits."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields

import numpy as np
from scipy.stats import linregress

from .errors import InputError, InsufficientData, RareSampleError
from .hmm import Hmm, statistical_complexity
from .qmachine import quantum_memory
from .tilt import tilt_hmm

CSV_HEADER = ("beta", "lambda", "U", "hmu", "Cmu", "Cq", "eta", "error")
CQ_FLOOR = 1e-12
DEFAULT_EPS = 1e-3


@dataclass(frozen=True)
class SweepRecord:
    beta: float
    lam: float = math.nan
    u: float = math.nan
    hmu: float = math.nan
    cmu: float = math.nan
    cq: float = math.nan
    eta: float = math.nan
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error

    def csv_row(self) -> list[str]:
        return [_fmt(v) for v in astuple(self)[:-1]] + [self.error]


def _fmt(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def advantage(cmu: float, cq: float) -> float:
    """eta = Cmu / Cq; infinite when Cq is below 1e-12."""
    return math.inf if cq < CQ_FLOOR else cmu / cq


def sweep_point(hmm: Hmm, beta: float, r: int) -> SweepRecord:
    """One record; a numerical or input failure is stored, not raised."""
    beta = float(beta)
    try:
        tilted = tilt_hmm(hmm, beta)
    except RareSampleError as exc:
        return SweepRecord(beta, error=f"{type(exc).__name__}: {exc}")
    base = dict(beta=beta, lam=tilted.lam, u=tilted.u, hmu=tilted.hmu_beta)
    try:
        cmu = statistical_complexity(tilted.hmm)
        cq = quantum_memory(tilted.hmm, r)
    except RareSampleError as exc:
        return SweepRecord(**base, error=f"{type(exc).__name__}: {exc}")
    return SweepRecord(**base, cmu=cmu, cq=cq, eta=advantage(cmu, cq))


def _point(args):
    return sweep_point(*args)


def beta_sweep(hmm: Hmm, grid, r: int, workers: int = 1) -> list[SweepRecord]:
    """Records for every beta in ``grid``, sorted by beta.

    Output does not depend on ``workers``.
    """
    grid = sorted(float(b) for b in grid)
    if any(b == 0.0 for b in grid):
        raise InputError("sweep grid must not contain beta = 0")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_point, [(hmm, b, r) for b in grid], chunksize=32))
    else:
        records = [sweep_point(hmm, b, r) for b in grid]
    return records


def _drop_zero(values, eps):
    out = []
    for b in values:
        if b == 0.0:
            out.extend((-eps, eps))
        else:
            out.append(float(b))
    return sorted(set(out))


def uniform_grid(beta_min: float, beta_max: float, steps: int, eps: float = DEFAULT_EPS) -> list[float]:
    """Evenly spaced betas; an exact 0 is replaced by -eps and +eps."""
    if steps < 2:
        raise InputError("a sweep needs at least 2 steps")
    if not beta_min < beta_max:
        raise InputError("beta_min must be below beta_max")
    return _drop_zero(np.linspace(beta_min, beta_max, steps), eps)


def log_grid(beta_min: float, beta_max: float, steps: int, eps: float = DEFAULT_EPS) -> list[float]:
    """Betas log-spaced in |beta| from ``eps`` outward, on each side of zero in range."""
    if steps < 2:
        raise InputError("a sweep needs at least 2 steps")
    if not beta_min < beta_max:
        raise InputError("beta_min must be below beta_max")
    if beta_min > 0.0 or beta_max < 0.0:
        lo, hi = sorted((abs(beta_min), abs(beta_max)))
        mags = np.geomspace(max(lo, eps), hi, steps)
        return sorted(float(m) if beta_max > 0 else -float(m) for m in mags)
    neg, pos = abs(beta_min), beta_max
    n_neg = 0 if neg < eps else max(1, round(steps * neg / (neg + pos)))
    n_pos = steps - n_neg
    out = []
    if n_neg:
        out += [-float(m) for m in np.geomspace(eps, neg, n_neg)]
    if n_pos:
        out += [float(m) for m in np.geomspace(eps, max(pos, eps), n_pos)]
    return sorted(set(out))


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        w.writerow(rec.csv_row())
    return buf.getvalue()


def records_from_csv(text: str) -> list[SweepRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise InputError(f"CSV header must be {','.join(CSV_HEADER)}")
    return [SweepRecord(*(float(v) for v in row[:-1]), row[-1]) for row in rows[1:]]


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    stderr: float
    prefactor: float
    n: int


_FIELDS = {f.name for f in fields(SweepRecord)} - {"error"}


def _column(records, name):
    if name not in _FIELDS:
        raise InputError(f"unknown record field {name!r}")
    return np.array([getattr(r, name) for r in records], dtype=float)


def fit_power_law(records, x: str = "beta", y: str = "eta", window=(0.001, 0.05), center: float = 0.0,
                  side: int = 0) -> PowerLawFit:
    """Least-squares slope of log y against log |x - center|.

    Only error-free records with finite positive y and ``|x - center|``
    inside the closed ``window`` enter the fit. ``side`` = +1 or -1 keeps
    only that sign of ``x - center``.
    """
    ok = [r for r in records if r.ok]
    xs = _column(ok, x) - center
    ys = _column(ok, y)
    mag = np.abs(xs)
    keep = (mag >= window[0]) & (mag <= window[1]) & np.isfinite(ys) & (ys > 0.0) & (mag > 0.0)
    if side:
        keep &= np.sign(xs) == np.sign(side)
    if keep.sum() < 8:
        raise InsufficientData(f"{int(keep.sum())} records in window {window}; need at least 8")
    fit = linregress(np.log(mag[keep]), np.log(ys[keep]))
    return PowerLawFit(float(fit.slope), float(fit.stderr), float(np.exp(fit.intercept)), int(keep.sum()))


def fit_exponential_rate(records, window=(5.0, 20.0), y: str = "eta") -> PowerLawFit:
    """Slope c of ln y = c * beta + const over a beta window (large-beta regime)."""
    ok = [r for r in records if r.ok]
    b = _column(ok, "beta")
    ys = _column(ok, y)
    keep = (b >= window[0]) & (b <= window[1]) & np.isfinite(ys) & (ys > 0.0)
    if keep.sum() < 8:
        raise InsufficientData(f"{int(keep.sum())} records in window {window}; need at least 8")
    fit = linregress(b[keep], np.log(ys[keep]))
    return PowerLawFit(float(fit.slope), float(fit.stderr), float(np.exp(fit.intercept)), int(keep.sum()))


@dataclass(frozen=True)
class U0Estimate:
    u0: float
    u_plus: float
    u_minus: float

    @property
    def gap(self) -> float:
        return abs(self.u_plus - self.u_minus)


def estimate_u0(hmm: Hmm, epsilon: float = DEFAULT_EPS) -> U0Estimate:
    """Decay rate at the beta -> 0 edge, as the mean of U(+eps) and U(-eps)."""
    if not 0.0 < epsilon <= 0.01:
        raise InputError("epsilon must lie in (0, 0.01]")
    up = tilt_hmm(hmm, epsilon).u
    dn = tilt_hmm(hmm, -epsilon).u
    return U0Estimate(0.5 * (up + dn), up, dn)
