"""Zeros of ``f - mu`` on the strip, strip zero counts and zero-free parts.

Substituting ``w = exp(2 pi i z)`` turns ``f - mu`` into ``w^{-d} P(w)`` with
``P`` a polynomial of degree at most ``2d``.  All zero statistics are read off
the roots of ``P``; the line ``Im z = y`` is the circle ``|w| = exp(-2 pi y)``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import minimize, minimize_scalar

from .errors import (
    ContractError,
    DegenerateInputError,
    DomainError,
    IllConditionedError,
    NumericError,
    ResolutionError,
)
from .potential import TWO_PI, FourierPotential, evaluate, stats, sup_norm

# normalization of the zero-free part; tied to h < 1 through |exp(2 pi i z)| <= e^{2 pi}
NORMALIZATION = 2.0 * np.exp(TWO_PI) + 2.0

CLUSTER_RADIUS = 1e-7


@dataclass(frozen=True)
class ZeroSet:
    """Zeros ``(z_k, m_k)`` of ``f - mu`` with ``0 <= Re z_k < 1``.

    ``zeros`` holds the zeros in the closed strip ``|Im z| <= h``; ``outside``
    the remaining Laurent roots.  ``lead`` and ``low_order`` describe
    ``P(w) = lead * w^low_order * prod (w - w_k)^{m_k}``.
    """

    zeros: tuple[tuple[complex, int], ...]
    outside: tuple[tuple[complex, int], ...]
    mu: complex
    h: float
    degree: int
    low_order: int
    lead: complex
    potential: FourierPotential = field(repr=False, compare=False)

    @property
    def all_zeros(self) -> tuple[tuple[complex, int], ...]:
        return self.zeros + self.outside

    @property
    def total_count(self) -> int:
        return sum(m for _, m in self.all_zeros)

    @property
    def w_roots(self) -> list[tuple[complex, int]]:
        return [(np.exp(1j * TWO_PI * z), m) for z, m in self.all_zeros]

    def heights(self) -> np.ndarray:
        return np.array([z.imag for z, _ in self.all_zeros])

    def to_dict(self) -> dict:
        def rows(zs):
            return [{"re": z.real, "im": z.imag, "multiplicity": m} for z, m in zs]

        return {
            "mu": {"re": complex(self.mu).real, "im": complex(self.mu).imag},
            "h": self.h,
            "zeros": rows(self.zeros),
            "outside": rows(self.outside),
            "total_count": self.total_count,
        }


def _horner(q: np.ndarray, w):
    """Value and derivative of the ascending-coefficient polynomial ``q``."""
    p = np.zeros_like(w, dtype=complex) + q[-1]
    dp = np.zeros_like(p)
    for c in q[-2::-1]:
        dp = dp * w + p
        p = p * w + c
    return p, dp


def _polish(q: np.ndarray, w: complex, iters: int = 60) -> complex:
    val = abs(_horner(q, w)[0])
    for _ in range(iters):
        p, dp = _horner(q, w)
        if dp == 0:
            break
        w_new = w - p / dp
        val_new = abs(_horner(q, w_new)[0])
        if val_new > val:
            break
        step = abs(w_new - w)
        w, val = w_new, val_new
        if step <= 1e-16 * max(1.0, abs(w)) or val == 0:
            break
    return w


def _cluster(ws: np.ndarray, radius: float) -> list[list[int]]:
    n = len(ws)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(ws[i] - ws[j]) <= radius * max(1.0, abs(ws[i])):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _w_to_z(w: complex) -> complex:
    x = (np.angle(w) / TWO_PI) % 1.0
    if x >= 1.0:
        x = 0.0
    return complex(x, -np.log(abs(w)) / TWO_PI + 0.0)


def laurent_roots(
    p: FourierPotential,
    mu: complex = 0.0,
    restrict_to_strip: bool = True,
    cluster_radius: float = CLUSTER_RADIUS,
) -> ZeroSet:
    """All zeros of ``f - mu`` via companion-matrix eigenvalues and Newton polish.

    With ``restrict_to_strip`` the roots with ``|Im z| > h`` are moved to
    ``ZeroSet.outside``; otherwise every root is listed in ``zeros``.
    """
    P = p.laurent_coefficients(mu)
    scale = float(np.max(np.abs(P)))
    if scale <= 1e-14 * max(1.0, abs(mu), p.scale):
        raise DegenerateInputError("f - mu vanishes identically")
    tiny = 1e-15 * scale
    nz = np.flatnonzero(np.abs(P) > tiny)
    s, top = int(nz[0]), int(nz[-1])
    q = P[s : top + 1]
    D = top - s
    lead = complex(q[-1])
    if D == 0:
        ws = np.array([], dtype=complex)
    else:
        comp = np.zeros((D, D), dtype=complex)
        comp[1:, :-1] = np.eye(D - 1)
        comp[:, -1] = -q[:-1] / lead
        try:
            ws = np.linalg.eigvals(comp)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"companion eigenvalue solver failed for mu={mu}: {exc}") from exc
        if not np.all(np.isfinite(ws)):
            raise NumericError(f"non-finite companion eigenvalues for mu={mu}: {ws}")
        ws = np.array([_polish(q, w) for w in ws])

    roots: list[tuple[complex, int]] = []
    for grp in _cluster(ws, cluster_radius):
        m = len(grp)
        w = complex(np.mean(ws[grp]))
        if m > 1:
            # the (m-1)-th derivative has a simple root at a root of multiplicity m
            w = _polish(npoly.polyder(q, m - 1), w)
        roots.append((w, m))

    for w, m in roots:
        resid = abs(_horner(q, w)[0]) / (scale * max(1.0, abs(w)) ** D)
        if not resid <= 1e-8:
            raise NumericError(f"root {w} of multiplicity {m} has residual {resid:.3g}")

    zs = sorted(((_w_to_z(w), m) for w, m in roots), key=lambda t: (t[0].imag, t[0].real))
    inside = tuple(t for t in zs if not restrict_to_strip or abs(t[0].imag) <= p.h * (1 + 1e-12))
    outside = tuple(t for t in zs if restrict_to_strip and abs(t[0].imag) > p.h * (1 + 1e-12))
    return ZeroSet(inside, outside, mu, p.h, p.degree, s, lead, p)


def count_zeros(
    zs: ZeroSet,
    lo: float,
    hi: float,
    closed_lo: bool = True,
    closed_hi: bool = True,
) -> int:
    """Zeros with ``Im z`` in the interval from ``lo`` to ``hi``, with multiplicity."""
    if not lo <= hi:
        raise ValueError(f"malformed interval ({lo}, {hi})")
    total = 0
    for z, m in zs.all_zeros:
        y = z.imag
        above = lo <= y if closed_lo else lo < y
        below = y <= hi if closed_hi else y < hi
        if above and below:
            total += m
    return total


def n_closed(zs: ZeroSet, eps: float) -> int:
    return count_zeros(zs, -eps, eps)


def n_open(zs: ZeroSet, eps: float) -> int:
    return count_zeros(zs, -eps, eps, closed_lo=False, closed_hi=False)


def zero_free_part(
    p: FourierPotential, mu: complex, eps: float, zs: ZeroSet | None = None
) -> Callable[[np.ndarray], np.ndarray]:
    """Callable for the normalized zero-free part on the open strip of half-width ``2 eps``.

    The zero factors are divided out of the Laurent polynomial exactly, so the
    returned function is well defined at the zeros themselves.
    """
    if not 0 < 2 * eps < p.h:
        raise ContractError(f"need 0 < 2*eps < h, got eps={eps}, h={p.h}")
    if zs is None:
        zs = laurent_roots(p, mu, restrict_to_strip=False)
    inner = [(z, m) for z, m in zs.all_zeros if abs(z.imag) < 2 * eps]
    n_inner = sum(m for _, m in inner)
    divisor = np.array([1.0 + 0j])
    for z, m in inner:
        wj = np.exp(1j * TWO_PI * z)
        for _ in range(m):
            divisor = npoly.polymul(divisor, [-wj, 1.0])
    P = p.laurent_coefficients(mu)
    quot, rem = npoly.polydiv(P, divisor)
    rem_size = float(np.max(np.abs(rem))) if rem.size else 0.0
    if rem_size > 1e-8 * float(np.max(np.abs(P))):
        raise NumericError(f"zero-factor division left residue {rem_size:.3g}")
    norm = NORMALIZATION**n_inner
    d = p.degree
    bound = 2 * eps

    def g(z):
        z = np.asarray(z, dtype=complex)
        if z.size and np.max(np.abs(z.imag)) > bound * (1 + 1e-12):
            raise DomainError(f"zero-free part requested outside |Im z| <= {bound}")
        w = np.exp(1j * TWO_PI * z)
        return norm * npoly.polyval(w, quot) * w ** (-d)

    g.n_inner = n_inner  # type: ignore[attr-defined]
    return g


def zero_free_part_eval(p: FourierPotential, mu: complex, eps: float, z) -> complex | np.ndarray:
    return zero_free_part(p, mu, eps)(z)


@dataclass(frozen=True)
class StripMinimum:
    value: float
    argmin: complex
    dx: float
    dy: float


def strip_minimum(
    fn: Callable[[np.ndarray], np.ndarray],
    half_width: float,
    nx: int = 1024,
    ny: int = 65,
) -> StripMinimum:
    """Minimum of ``|fn|`` over the closed strip: grid search plus one local refinement."""
    x = np.arange(nx) / nx
    ys = np.linspace(-half_width, half_width, ny)
    grid = x[None, :] + 1j * ys[:, None]
    vals = np.abs(fn(grid))
    iy, ix = np.unravel_index(int(np.argmin(vals)), vals.shape)
    best = float(vals[iy, ix])
    arg = complex(grid[iy, ix])
    dx = 1.0 / nx
    dy = ys[1] - ys[0] if ny > 1 else 0.0

    def obj(v):
        return float(np.abs(fn(np.array(v[0] + 1j * v[1]))))

    lo_y = max(-half_width, ys[iy] - dy)
    hi_y = min(half_width, ys[iy] + dy)
    res = minimize(
        obj,
        x0=[x[ix], ys[iy]],
        method="L-BFGS-B",
        bounds=[(x[ix] - dx, x[ix] + dx), (lo_y, hi_y)],
    )
    if res.fun < best:
        best = float(res.fun)
        arg = complex(res.x[0] % 1.0, res.x[1])
    return StripMinimum(best, arg, dx, float(dy))


def beta_details(p: FourierPotential, mu: complex, rho: float, nx: int = 1024, ny: int = 65) -> StripMinimum:
    if not 0 < rho < min(p.h, 1.0) / 2:
        raise ContractError("rho must satisfy 0 < rho < min(h,1)/2")
    g = zero_free_part(p, mu, rho)
    return strip_minimum(g, rho, nx, ny)


def beta(p: FourierPotential, mu: complex, rho: float, nx: int = 1024, ny: int = 65) -> float:
    """``min |g_{2 rho}(f - mu)|`` over the closed strip of half-width ``rho``."""
    return beta_details(p, mu, rho, nx, ny).value


@dataclass(frozen=True)
class HatQuantities:
    rho: float
    N_hat: int
    beta_hat: float
    witness_mu_N: float
    witness_mu_beta: float
    mu_scan_record: tuple[tuple[float, int, float], ...]
    scan_step: float
    bisect_width: float

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "N_hat": self.N_hat,
            "beta_hat": self.beta_hat,
            "witness_mu_N": self.witness_mu_N,
            "witness_mu_beta": self.witness_mu_beta,
            "scan_step": self.scan_step,
            "bisect_width": self.bisect_width,
            "mu_scan_record": [list(r) for r in self.mu_scan_record],
        }


def _scan_point(args) -> tuple[float, int, int, float]:
    p, mu, rho = args
    zs = laurent_roots(p, mu, restrict_to_strip=False)
    return (mu, n_closed(zs, 2 * rho), n_open(zs, 2 * rho), beta(p, mu, rho))


def _map(fn, items, workers: int | None):
    if workers and workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
    return [fn(it) for it in items]


def hat_quantities(
    p: FourierPotential,
    rho: float,
    n_mu: int = 401,
    bisect_width: float = 1e-6,
    workers: int | None = None,
) -> HatQuantities:
    """Scan real shifts ``mu`` for the largest strip zero count and smallest ``beta``."""
    if not p.is_nearly_real_analytic():
        raise ContractError("hat quantities are defined for real-analytic f")
    if p.is_constant:
        raise DegenerateInputError("constant f: f - mu vanishes identically for some mu")
    if not 0 < rho < min(p.h, 1.0) / 2:
        raise ContractError("rho must satisfy 0 < rho < min(h,1)/2")
    st = stats(p)
    # no zeros on the 2rho strip once |mu| exceeds the sup norm there
    reach = sup_norm(p, 2 * rho)
    lo = min(st.min_torus - 1.0, -reach - 1.0)
    hi = max(st.max_torus + 1.0, reach + 1.0)
    grid = np.linspace(lo, hi, n_mu)
    mus = sorted(set(grid.tolist()) | set(st.critical_values))
    points = _map(_scan_point, [(p, m, rho) for m in mus], workers)

    # bisect every change of the (closed, open) strip counts
    extra = []
    for a, b in zip(points[:-1], points[1:]):
        if (a[1], a[2]) == (b[1], b[2]):
            continue
        left, right = a[0], b[0]
        key_left = (a[1], a[2])
        while right - left > bisect_width:
            mid = 0.5 * (left + right)
            zs = laurent_roots(p, mid, restrict_to_strip=False)
            if (n_closed(zs, 2 * rho), n_open(zs, 2 * rho)) == key_left:
                left = mid
            else:
                right = mid
        extra.extend([left, right])
    points += _map(_scan_point, [(p, m, rho) for m in extra], workers)
    points.sort(key=lambda t: t[0])

    # beta varies smoothly between count changes; polish its smallest sample
    i = min(range(len(points)), key=lambda j: points[j][3])
    lo_i, hi_i = max(i - 1, 0), min(i + 1, len(points) - 1)
    key = points[i][1:3]
    if points[lo_i][1:3] == key and points[hi_i][1:3] == key and lo_i < hi_i:
        res = minimize_scalar(
            lambda m: beta(p, m, rho),
            bounds=(points[lo_i][0], points[hi_i][0]),
            method="bounded",
            options={"xatol": bisect_width},
        )
        m = float(res.x)
        zs = laurent_roots(p, m, restrict_to_strip=False)
        if (n_closed(zs, 2 * rho), n_open(zs, 2 * rho)) == key:
            points.append((m, n_closed(zs, 2 * rho), n_open(zs, 2 * rho), beta(p, m, rho)))
            points.sort(key=lambda t: t[0])

    record = tuple((float(m), int(n), float(b)) for m, n, _, b in points)
    iN = max(range(len(record)), key=lambda j: record[j][1])
    iB = min(range(len(record)), key=lambda j: record[j][2])
    return HatQuantities(
        rho=rho,
        N_hat=record[iN][1],
        beta_hat=record[iB][2],
        witness_mu_N=record[iN][0],
        witness_mu_beta=record[iB][0],
        mu_scan_record=record,
        scan_step=float(grid[1] - grid[0]),
        bisect_width=bisect_width,
    )


@dataclass(frozen=True)
class Winding:
    value: int
    residue: float
    samples: int


def winding_details(
    g: Callable[[np.ndarray], np.ndarray],
    n0: int = 256,
    max_samples: int = 2**20,
    zero_tol: float = 1e-12,
) -> Winding:
    """Winding number about 0 of the closed curve ``x -> g(x)``, ``x`` in [0, 1)."""
    n = n0
    while True:
        vals = np.asarray(g(np.arange(n) / n), dtype=complex)
        mags = np.abs(vals)
        if not np.all(np.isfinite(vals)):
            raise NumericError("curve sampler returned non-finite values")
        if mags.min() <= zero_tol * max(mags.max(), 1e-300):
            raise IllConditionedError(f"curve passes within {mags.min():.3g} of the origin")
        closed = np.append(vals, vals[0])
        dphi = np.angle(closed[1:] / closed[:-1])
        if np.max(np.abs(dphi)) < np.pi / 2:
            total = float(np.sum(dphi)) / TWO_PI
            k = int(round(total))
            residue = abs(total - k)
            if residue >= 0.05:
                raise ResolutionError(f"winding sum {total} is not near an integer")
            return Winding(k, residue, n)
        if 2 * n > max_samples:
            raise ResolutionError(f"phase increments still >= pi/2 with {n} samples")
        n *= 2


def winding_number(g: Callable[[np.ndarray], np.ndarray], **kwargs) -> int:
    return winding_details(g, **kwargs).value


def line_winding(p: FourierPotential, mu: complex, y: float) -> int:
    """Winding number of ``x -> f(x + i y) - mu``."""
    return winding_number(lambda x: evaluate(p, x + 1j * y, check=False) - mu)


def strip_count_by_winding(p: FourierPotential, mu: complex, eps: float) -> int:
    """Argument-principle count of zeros with ``|Im z| <= eps``.

    The line ``Im z = y`` is the circle ``|w| = exp(-2 pi y)``, so the zeros in
    the band are the difference of the windings along the two boundary lines.
    """
    return line_winding(p, mu, -eps) - line_winding(p, mu, eps)


def uniform_margin(
    p: FourierPotential,
    mus: Sequence[float],
    y_lo: float,
    y_hi: float,
    ny: int = 33,
    nx: int = 1024,
) -> np.ndarray:
    """For each ``mu``: max over heights in [y_lo, y_hi] of min over x of ``|f - mu|``."""
    x = np.arange(nx) / nx
    ys = np.linspace(y_lo, y_hi, ny)
    F = evaluate(p, x[None, :] + 1j * ys[:, None])
    out = np.empty(len(mus))
    for i, mu in enumerate(mus):
        out[i] = np.abs(F - mu).min(axis=1).max()
    return out
