"""Products of 2x2 cocycles over an irrational rotation and their exponents.

The Schrödinger cocycle at complex phase ``x + iy`` is

    A(x) = [[E - lam f(x + iy), -1], [1, 0]].

Exponents are phase averages of ``log ||A(x + (n-1) alpha) ... A(x)|| / n``
over ``M`` equispaced phases.  All phases are advanced together, so one
pass yields both ``n`` and ``2n`` and the subadditive extrapolation
``2 L_{2n} - L_n``.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import constants
from .errors import ContractError, DomainError, NumericError, PrecisionError
from .potential import TWO_PI, FourierPotential, evaluate

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
RENORM_LOG = np.log(1e100)
# also renormalize periodically so contracting products cannot underflow
RENORM_EVERY = 256
CHUNK = 256
DEFAULT_N = 10_000
DEFAULT_M = 256
SUBADDITIVE_SLACK = 1e-9
CONVEXITY_TOL = 1e-3
EVENNESS_TOL = 1e-4
RESIDUAL_FLAG = 0.1


class RationalFrequencyWarning(UserWarning):
    pass


# A float equal to a fraction with q <= 1e6 sits within 1e-16 of it.  The
# golden mean's convergent 514229/832040 is 6.5e-13 away, so a 1e-12 window
# would reject the default frequency.
RATIONAL_TOL = 1e-13


def rational_guard(alpha: float) -> Fraction | None:
    """Return ``p/q`` if ``alpha`` is within ``RATIONAL_TOL`` of a fraction with ``q <= 1e6``."""
    frac = Fraction(alpha).limit_denominator(10**6)
    if abs(float(frac) - alpha) < RATIONAL_TOL:
        return frac
    return None


@dataclass(frozen=True)
class CocycleSpec:
    alpha: float
    lam: float
    E: float
    y: float
    potential: FourierPotential

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError(f"frequency must lie in (0, 1), got {self.alpha}")
        if abs(self.y) > self.potential.h * (1 + 1e-12):
            raise DomainError(f"|y| = {abs(self.y)} exceeds strip height {self.potential.h}")
        frac = rational_guard(self.alpha)
        if frac is not None:
            warnings.warn(f"frequency {self.alpha} is numerically rational ({frac})", RationalFrequencyWarning, stacklevel=3)
        for name in ("alpha", "lam", "E", "y"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def mu(self) -> float:
        if self.lam == 0:
            raise ContractError("mu = E / lam needs lam != 0")
        return self.E / self.lam

    def at_height(self, y: float) -> "CocycleSpec":
        return replace(self, y=float(y))

    def diagonal(self, x):
        """``E - lam f(x + iy)`` for real phases ``x``."""
        x = np.asarray(x, dtype=float)
        if self.lam == 0:
            return np.full(x.shape, complex(self.E))
        return self.E - self.lam * evaluate(self.potential, x + 1j * self.y, check=False)


def transfer_matrix(c: CocycleSpec, x: float) -> np.ndarray:
    a = complex(c.diagonal(np.array([x]))[0])
    return np.array([[a, -1.0], [1.0, 0.0]], dtype=complex)


# -- matrix-valued functions on the circle ---------------------------------
# Each family maps a 2-D array of real phases to the four entries.  They are
# plain classes so that worker processes can receive them.


class SchrodingerEntries:
    schrodinger = True

    def __init__(self, c: CocycleSpec):
        self.c = c

    def __call__(self, x):
        return self.c.diagonal(x)


class FactorizedEntries:
    """``D = A / g = [[1, s/g], [1/g, 0]]`` with ``g = E - lam f(x + iy)``.

    ``sign = -1`` is the exact factor of the Schrödinger cocycle; ``sign = +1``
    is the symmetric variant.  Both have ``inf |g| > 2`` bounds in common.
    """

    schrodinger = False

    def __init__(self, g: Callable, sign: int = -1):
        if sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        self.g = g
        self.sign = sign

    def __call__(self, x):
        inv = 1.0 / np.asarray(self.g(x), dtype=complex)
        return (np.ones_like(inv), self.sign * inv, inv, np.zeros_like(inv))


class _CocycleG:
    def __init__(self, c: CocycleSpec):
        self.c = c

    def __call__(self, x):
        return self.c.diagonal(x)


def _sigma_max_log(a, b, c, d):
    """``log`` of the largest singular value, elementwise."""
    fro2 = np.abs(a) ** 2 + np.abs(b) ** 2 + np.abs(c) ** 2 + np.abs(d) ** 2
    s = np.sqrt(fro2)
    det = np.abs(a * d - b * c) / fro2
    disc = np.sqrt(np.maximum(1.0 - 4.0 * det**2, 0.0))
    return np.log(s) + 0.5 * np.log((1.0 + disc) / 2.0)


def _product_lognorms(entries, alpha: float, x0: np.ndarray, record: Sequence[int]) -> np.ndarray:
    """``log ||A^{(n)}(x0_j)||`` for each ``n`` in ``record``; shape ``(len(record), len(x0))``."""
    record = sorted(set(int(r) for r in record))
    nmax = record[-1]
    want = {n: i for i, n in enumerate(record)}
    x0 = np.asarray(x0, dtype=float)
    M = x0.size
    out = np.empty((len(record), M))
    pa = np.ones(M, complex)
    pb = np.zeros(M, complex)
    pc = np.zeros(M, complex)
    pd = np.ones(M, complex)
    acc = np.zeros(M)
    # per-phase log of a Frobenius bound since the last renormalization; the
    # schedule never mixes phases, so any split of x0 gives identical bits
    bound = np.full(M, 0.5 * np.log(2.0))
    since = 0
    schrod = getattr(entries, "schrodinger", False)
    k = 0
    while k < nmax:
        K = min(CHUNK, nmax - k)
        shifts = (alpha * np.arange(k, k + K)) % 1.0
        xs = (x0[None, :] + shifts[:, None]) % 1.0
        if schrod:
            A = np.asarray(entries(xs), dtype=complex)
            step = np.log(np.sqrt(np.abs(A) ** 2 + 2.0))
        else:
            A, B, C, D = (np.broadcast_to(np.asarray(e, dtype=complex), xs.shape) for e in entries(xs))
            fro = np.abs(A) ** 2 + np.abs(B) ** 2 + np.abs(C) ** 2 + np.abs(D) ** 2
            step = 0.5 * np.log(fro)
        for j in range(K):
            due = bound + step[j] > RENORM_LOG
            if since >= RENORM_EVERY:
                due[:] = True
                since = 0
            if due.any():
                s = np.where(due, np.sqrt(np.abs(pa) ** 2 + np.abs(pb) ** 2 + np.abs(pc) ** 2 + np.abs(pd) ** 2), 1.0)
                pa, pb, pc, pd = pa / s, pb / s, pc / s, pd / s
                acc += np.log(s)
                bound = np.where(due, 0.0, bound)
            if schrod:
                a = A[j]
                pa, pb, pc, pd = a * pa - pc, a * pb - pd, pa, pb
            else:
                a, b, c, d = A[j], B[j], C[j], D[j]
                pa, pb, pc, pd = a * pa + b * pc, a * pb + b * pd, c * pa + d * pc, c * pb + d * pd
            bound = bound + step[j]
            since += 1
            n = k + j + 1
            if n in want:
                out[want[n]] = acc + _sigma_max_log(pa, pb, pc, pd)
        k += K
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite log-norm in cocycle product")
    return out


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("COCYCLE_WORKERS", "1") or 1)
    return max(1, int(workers))


def _phase_lognorms(entries, alpha: float, M: int, record: Sequence[int], workers: int | None) -> np.ndarray:
    x0 = np.arange(M) / M
    workers = resolve_workers(workers)
    if workers == 1 or M < 2 * workers:
        return _product_lognorms(entries, alpha, x0, record)
    # every operation in the kernel is elementwise in the phase, so the
    # result does not depend on the worker count
    parts = np.array_split(x0, workers)
    with ProcessPoolExecutor(workers) as ex:
        res = list(ex.map(_product_lognorms, [entries] * workers, [alpha] * workers, parts, [record] * workers))
    return np.concatenate(res, axis=1)


def cocycle_product_lognorm(c: CocycleSpec, x: float, n: int) -> float:
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    return float(_product_lognorms(SchrodingerEntries(c), c.alpha, np.array([x], float), [n])[0, 0])


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    n: int
    M: int
    raw_pairs: tuple[float, float]
    extrapolated: float
    spread: float

    @property
    def subadditive(self) -> bool:
        return self.raw_pairs[0] >= self.raw_pairs[1] - SUBADDITIVE_SLACK

    def to_dict(self) -> dict:
        return {
            "L": self.value,
            "n": self.n,
            "M": self.M,
            "L_n": self.raw_pairs[0],
            "L_2n": self.raw_pairs[1],
            "spread": self.spread,
        }


def _estimate(entries, alpha: float, n: int, M: int, workers: int | None) -> LyapunovEstimate:
    if n < 2 or M < 16:
        raise ContractError(f"need n >= 2 and M >= 16, got n={n}, M={M}")
    logs = _phase_lognorms(entries, alpha, M, [n, 2 * n], workers)
    Ln = float(np.mean(logs[0]) / n)
    L2n = float(np.mean(logs[1]) / (2 * n))
    ext = 2 * L2n - Ln
    return LyapunovEstimate(ext, n, M, (Ln, L2n), ext, abs(L2n - ext))


def lyapunov_exponent(c: CocycleSpec, n: int = DEFAULT_N, M: int = DEFAULT_M, workers: int | None = None) -> LyapunovEstimate:
    return _estimate(SchrodingerEntries(c), c.alpha, n, M, workers)


def matrix_lyapunov_exponent(
    entries: Callable, alpha: float, n: int = DEFAULT_N, M: int = DEFAULT_M, workers: int | None = None
) -> LyapunovEstimate:
    """Exponent of a general cocycle; ``entries(x)`` returns ``(a, b, c, d)``."""
    return _estimate(entries, alpha, n, M, workers)


@dataclass(frozen=True)
class ComplexifiedProfile:
    points: tuple[tuple[float, LyapunovEstimate], ...]
    convexity_defect: float
    evenness_defect: float
    convex_ok: bool
    even_ok: bool

    def __iter__(self) -> Iterator[tuple[float, LyapunovEstimate]]:
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def ys(self) -> np.ndarray:
        return np.array([y for y, _ in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for _, e in self.points])

    def slope(self, y_lo: float = -np.inf, y_hi: float = np.inf) -> float:
        """Least-squares slope of ``L`` over heights in ``[y_lo, y_hi]``."""
        y, v = self.ys, self.values
        sel = (y >= y_lo) & (y <= y_hi)
        if sel.sum() < 2:
            raise ValueError("need at least two heights in the band")
        return float(np.polyfit(y[sel], v[sel], 1)[0])


def _convexity_defect(y: np.ndarray, v: np.ndarray) -> float:
    """Largest excess of an interior value over the chord of its neighbours."""
    worst = 0.0
    for i in range(1, len(y) - 1):
        w = (y[i] - y[i - 1]) / (y[i + 1] - y[i - 1])
        chord = (1 - w) * v[i - 1] + w * v[i + 1]
        worst = max(worst, v[i] - chord)
    return float(worst)


def _evenness_defect(y: np.ndarray, v: np.ndarray) -> float:
    lookup = dict(zip(np.round(y, 12).tolist(), v.tolist()))
    return float(max((abs(val - lookup[-yy]) for yy, val in lookup.items() if -yy in lookup), default=0.0))


def complexified_profile(
    c: CocycleSpec,
    y_grid: Sequence[float],
    n: int = DEFAULT_N,
    M: int = DEFAULT_M,
    workers: int | None = None,
    convexity_tol: float = CONVEXITY_TOL,
    evenness_tol: float = EVENNESS_TOL,
) -> ComplexifiedProfile:
    ys = sorted(float(y) for y in y_grid)
    pts = tuple((y, lyapunov_exponent(c.at_height(y), n, M, workers)) for y in ys)
    y = np.array(ys)
    v = np.array([e.value for _, e in pts])
    conv = _convexity_defect(y, v)
    ev = _evenness_defect(y, v)
    return ComplexifiedProfile(pts, conv, ev, conv <= convexity_tol, ev <= evenness_tol)


@dataclass(frozen=True)
class AccelerationEstimate:
    raw: float
    quantized: int
    residual: float
    flagged: bool
    y: float
    t: float
    spread: float

    def __iter__(self):
        return iter((self.raw, self.quantized, self.residual))


def acceleration(
    c: CocycleSpec, y: float, t: float = 1e-2, n: int = DEFAULT_N, M: int = DEFAULT_M, workers: int | None = None
) -> AccelerationEstimate:
    """Right difference ``(L(y+t) - L(y)) / (2 pi t)`` and its nearest integer."""
    if not 0 < t <= 1e-2:
        raise ContractError(f"step must satisfy 0 < t <= 1e-2, got {t}")
    h = c.potential.h
    if abs(y) > h or abs(y + t) > h:
        raise DomainError(f"heights {y} and {y + t} must lie in the strip of height {h}")
    e0 = lyapunov_exponent(c.at_height(y), n, M, workers)
    e1 = lyapunov_exponent(c.at_height(y + t), n, M, workers)
    spread = max(e0.spread, e1.spread)
    if spread > t * TWO_PI * 0.1:
        raise PrecisionError(f"estimator spread {spread:.3g} too large for step {t}; raise n or M")
    raw = (e1.value - e0.value) / (TWO_PI * t)
    q = int(np.rint(raw))
    res = abs(raw - q)
    return AccelerationEstimate(float(raw), q, float(res), bool(res > RESIDUAL_FLAG), float(y), float(t), float(spread))


# -- dominated splitting ------------------------------------------------------


def dominated_splitting_bounds(m: float) -> tuple[float, float, float]:
    """``(sigma, lower, upper)`` for ``inf |g| = m > 2``."""
    if not m > 2:
        raise ContractError(f"bounds need m > 2, got {m}")
    lo, up = constants.splitting_bounds(m)
    return float(constants.splitting_sigma(m)), float(lo), float(up)


def line_minimum(g: Callable, nx: int = 4096) -> tuple[float, float]:
    """``(min |g(x)|, argmin)`` over the circle: dense grid, then a bounded local search."""
    x = np.arange(nx) / nx
    vals = np.abs(np.asarray(g(x), dtype=complex))
    j = int(np.argmin(vals))
    best, arg = float(vals[j]), float(x[j])
    res = minimize_scalar(
        lambda t: float(np.abs(np.asarray(g(np.array([t])), dtype=complex))[0]),
        bounds=(x[j] - 1.0 / nx, x[j] + 1.0 / nx),
        method="bounded",
        options={"xatol": 1e-13},
    )
    if res.fun < best:
        best, arg = float(res.fun), float(res.x) % 1.0
    return best, arg


@dataclass(frozen=True)
class DominatedSplittingReport:
    m_g: float
    argmin: float
    is_dominated: bool
    sigma: float | None
    le_lower: float | None
    le_upper: float | None
    measured_le: float | None = None
    measured_spread: float | None = None
    measured_le_alt: float | None = None
    contains: bool | None = None
    contains_alt: bool | None = None
    k_bound: float | None = None
    k_bound_ok: bool | None = None
    tol: float = 0.0
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def splitting_report(
    g: Callable,
    alpha: float = GOLDEN,
    with_measurement: bool = True,
    n: int = DEFAULT_N,
    M: int = DEFAULT_M,
    tol: float = 1e-4,
    nx: int = 4096,
    workers: int | None = None,
) -> DominatedSplittingReport:
    """Dominated-splitting bounds for ``D = [[1, -1/g], [1/g, 0]]`` and, optionally, a measurement.

    The containment test uses ``tol`` plus twice the estimator spread.  The
    symmetric sign variant is measured as well and must satisfy the same
    bounds, which only depend on ``|g|``.
    """
    m, arg = line_minimum(g, nx)
    if not m > 2:
        return DominatedSplittingReport(m, arg, False, None, None, None)
    sigma, lo, up = dominated_splitting_bounds(m)
    if not with_measurement:
        return DominatedSplittingReport(m, arg, True, sigma, lo, up)
    est = matrix_lyapunov_exponent(FactorizedEntries(g, -1), alpha, n, M, workers)
    alt = matrix_lyapunov_exponent(FactorizedEntries(g, +1), alpha, n, M, workers)
    eff = tol + 2 * max(est.spread, alt.spread)
    kb = max(constants.K2, constants.K3) / m**2
    return DominatedSplittingReport(
        m,
        arg,
        True,
        sigma,
        lo,
        up,
        measured_le=est.value,
        measured_spread=est.spread,
        measured_le_alt=alt.value,
        contains=bool(lo - eff <= est.value <= up + eff),
        contains_alt=bool(lo - eff <= alt.value <= up + eff),
        k_bound=kb,
        k_bound_ok=bool(abs(est.value) <= kb + 2 * est.spread and abs(alt.value) <= kb + 2 * alt.spread),
        tol=eff,
    )


def dominated_splitting_check(
    c: CocycleSpec,
    y: float | None = None,
    with_measurement: bool = True,
    n: int = DEFAULT_N,
    M: int = DEFAULT_M,
    tol: float = 1e-4,
    workers: int | None = None,
) -> DominatedSplittingReport:
    """Splitting report for ``g(x) = E - lam f(x + iy)``, the diagonal of the cocycle."""
    if c.lam == 0:
        raise ContractError("splitting check needs lam != 0")
    if y is not None:
        c = c.at_height(y)
    return splitting_report(_CocycleG(c), c.alpha, with_measurement, n, M, tol, workers=workers)


@dataclass(frozen=True)
class FactorizationCheck:
    L_A: float
    log_g_mean: float
    L_D: float
    gap: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.gap <= self.tol


def factorization_check(
    c: CocycleSpec, n: int = DEFAULT_N, M: int = DEFAULT_M, workers: int | None = None
) -> FactorizationCheck:
    """``L(A) - [log|lam| + I[mu - f](y)]`` against ``L(D)`` with ``D = A / g``."""
    from .jensen import jensen_integral

    if c.lam == 0:
        raise ContractError("factorization needs lam != 0")
    eA = lyapunov_exponent(c, n, M, workers)
    eD = matrix_lyapunov_exponent(FactorizedEntries(_CocycleG(c), -1), c.alpha, n, M, workers)
    # I[mu - f] = I[f - mu]
    lg = float(np.log(abs(c.lam)) + jensen_integral(c.potential, c.mu, c.y))
    gap = abs(eA.value - lg - eD.value)
    return FactorizationCheck(eA.value, lg, eD.value, gap, 2 * (eA.spread + eD.spread) + 1e-9)
