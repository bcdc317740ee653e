"""Finite Fourier series potentials on the complexified torus strip.

A potential is stored as the coefficient vector ``c_{-d}, ..., c_d`` of
``f(z) = sum_k c_k exp(2 pi i k z)`` together with the strip height ``h``
on which it is considered analytic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ContractError, DomainError

TWO_PI = 2.0 * np.pi

# relative slack when testing |Im z| <= h
_STRIP_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class FourierPotential:
    coeffs: np.ndarray
    h: float

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size % 2 != 1:
            raise ValueError("coefficient vector must have odd length 2d+1")
        if not (self.h > 0):
            raise DomainError(f"strip height must be positive, got {self.h}")
        # trim vanishing outer pairs so that degree is meaningful
        while c.size > 1 and c[0] == 0 and c[-1] == 0:
            c = c[1:-1]
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "h", float(self.h))

    @classmethod
    def from_terms(cls, terms: Mapping[int, complex], h: float) -> "FourierPotential":
        d = max((abs(int(k)) for k in terms), default=0)
        c = np.zeros(2 * d + 1, dtype=complex)
        for k, v in terms.items():
            c[int(k) + d] += v
        return cls(c, h)

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[int, float, float]], h: float) -> "FourierPotential":
        terms: dict[int, complex] = {}
        for k, re, im in triples:
            terms[int(k)] = terms.get(int(k), 0) + complex(re, im)
        return cls.from_terms(terms, h)

    @classmethod
    def constant(cls, value: complex, h: float = 0.5) -> "FourierPotential":
        return cls(np.array([value], dtype=complex), h)

    @classmethod
    def trig(cls, a0: float, a: Iterable[float], b: Iterable[float], h: float) -> "FourierPotential":
        """Real trigonometric polynomial a0 + sum a_k cos(2 pi k x) + b_k sin(2 pi k x)."""
        a = list(a)
        b = list(b)
        terms: dict[int, complex] = {0: a0}
        for k, (ak, bk) in enumerate(zip(a, b), start=1):
            terms[k] = complex(ak, -bk) / 2
            terms[-k] = complex(ak, bk) / 2
        return cls.from_terms(terms, h)

    @property
    def degree(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def key(self) -> tuple:
        return (tuple(self.coeffs.tolist()), self.h)

    def coefficient(self, k: int) -> complex:
        d = self.degree
        return complex(self.coeffs[k + d]) if abs(k) <= d else 0j

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    @property
    def is_real_analytic(self) -> bool:
        return bool(np.array_equal(self.coeffs, np.conj(self.coeffs[::-1])))

    def is_nearly_real_analytic(self, rtol: float = 1e-13) -> bool:
        diff = np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1])))
        return bool(diff <= rtol * max(self.scale, 1.0))

    def shifted(self, mu: complex) -> "FourierPotential":
        """Return ``f - mu``."""
        c = self.coeffs.copy()
        c[self.degree] -= mu
        return FourierPotential(c, self.h)

    def scaled(self, s: complex) -> "FourierPotential":
        return FourierPotential(self.coeffs * s, self.h)

    def translated(self, t: float) -> "FourierPotential":
        """Return ``x -> f(x + t)``."""
        k = np.arange(-self.degree, self.degree + 1)
        return FourierPotential(self.coeffs * np.exp(1j * TWO_PI * k * t), self.h)

    def derivative(self, order: int = 1) -> "FourierPotential":
        k = np.arange(-self.degree, self.degree + 1)
        return FourierPotential(self.coeffs * (1j * TWO_PI * k) ** order, self.h)

    def laurent_coefficients(self, mu: complex = 0.0) -> np.ndarray:
        """Ascending coefficients of ``w^d (f - mu)`` as a polynomial in ``w``."""
        c = np.array(self.coeffs, dtype=complex)
        c[self.degree] -= mu
        return c

    def __call__(self, z, check: bool = True):
        return evaluate(self, z, check=check)


def evaluate(p: FourierPotential, z, check: bool = True):
    """Evaluate ``sum_k c_k exp(2 pi i k z)`` at points of the strip."""
    z = np.asarray(z, dtype=complex)
    if check and z.size:
        worst = float(np.max(np.abs(z.imag)))
        if worst > p.h * (1 + _STRIP_SLACK) + 1e-15:
            raise DomainError(f"|Im z| = {worst:.6g} exceeds strip height h = {p.h}")
    d = p.degree
    c = p.coeffs
    out = np.full(z.shape, c[d], dtype=complex)
    if d == 0:
        return out if out.ndim else complex(out)
    w = np.exp(1j * TWO_PI * z)
    winv = 1.0 / w
    wk = np.ones_like(w)
    wmk = np.ones_like(w)
    for k in range(1, d + 1):
        wk = wk * w
        wmk = wmk * winv
        out = out + c[d + k] * wk + c[d - k] * wmk
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class PotentialStats:
    min_torus: float
    max_torus: float
    probe_h: float
    sup_norm: float
    critical_points: tuple[float, ...]
    critical_values: tuple[float, ...]


def sup_norm(p: FourierPotential, probe_h: float, n_grid: int = 4096) -> float:
    """``sup |f|`` over the closed strip of half-width ``probe_h``.

    By the maximum principle only the two boundary lines need scanning.
    The best grid point is refined by a bounded scalar search.
    """
    if probe_h < 0 or probe_h > p.h * (1 + _STRIP_SLACK):
        raise DomainError(f"probe height {probe_h} outside [0, {p.h}]")
    probe_h = min(probe_h, p.h)
    if p.is_constant:
        return abs(p.coeffs[0])
    x = np.arange(n_grid) / n_grid
    dx = 1.0 / n_grid
    best = 0.0
    for y in {probe_h, -probe_h}:
        vals = np.abs(evaluate(p, x + 1j * y, check=False))
        j = int(np.argmax(vals))
        res = minimize_scalar(
            lambda t: -abs(evaluate(p, t + 1j * y, check=False)),
            bounds=(x[j] - dx, x[j] + dx),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, float(vals[j]), float(-res.fun))
    return best


def _real_critical_points(p: FourierPotential, imag_tol: float = 1e-6) -> np.ndarray:
    from .zeros import laurent_roots

    dp = p.derivative()
    zs = laurent_roots(dp, 0.0, restrict_to_strip=False)
    xs = [z.real for z, _ in zs.all_zeros if abs(z.imag) < imag_tol]
    d2p = p.derivative(2)
    polished = []
    for x in xs:
        # Newton on the real line; the derivative is real there
        for _ in range(20):
            f1 = evaluate(dp, x, check=False).real
            f2 = evaluate(d2p, x, check=False).real
            if f2 == 0:
                break
            step = f1 / f2
            if abs(step) > 1e-3:
                break
            x -= step
            if abs(step) < 1e-15:
                break
        polished.append(x % 1.0)
    return np.array(sorted(polished))


def stats(p: FourierPotential, probe_h: float = 0.0) -> PotentialStats:
    if not p.is_nearly_real_analytic():
        raise ContractError("min/max/critical values require a real-analytic potential")
    if p.is_constant:
        c = float(p.coeffs[0].real)
        return PotentialStats(c, c, probe_h, abs(c), (), (c,))
    crit = _real_critical_points(p)
    cand = np.concatenate([crit, [0.0]])
    vals = evaluate(p, cand, check=False).real
    crit_vals = evaluate(p, crit, check=False).real
    uniq: list[float] = []
    for v in sorted(crit_vals.tolist()):
        if not uniq or abs(v - uniq[-1]) > 1e-12 * max(1.0, abs(v)):
            uniq.append(v)
    return PotentialStats(
        min_torus=float(vals.min()),
        max_torus=float(vals.max()),
        probe_h=probe_h,
        sup_norm=sup_norm(p, probe_h),
        critical_points=tuple(crit.tolist()),
        critical_values=tuple(uniq),
    )


def admissible_energy_interval(p: FourierPotential, lam: float) -> tuple[float, float]:
    """Range of ``mu = E / lam`` that can meet the spectrum."""
    if not lam > 0:
        raise DomainError(f"coupling must be positive, got {lam}")
    s = stats(p)
    return (-2.0 / lam + s.min_torus, 2.0 / lam + s.max_torus)


PRESETS = {
    "amo": {1: 1.0, -1: 1.0},
    "bichromatic": {1: 1.0, -1: 1.0, 2: 0.5, -2: 0.5},
}


def preset(name: str, h: float = 0.5) -> FourierPotential:
    try:
        terms = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return FourierPotential.from_terms(terms, h)
