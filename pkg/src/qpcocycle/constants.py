"""Absolute constants of the large-coupling estimates.

``K1`` enters the uniform lower bound for ``|f(x+iy) - mu|``; ``K2`` and
``K3`` turn the dominated-splitting bounds on the Lyapunov exponent into
``-K2/m^2 <= L <= K3/m^2``.  ``rederive_k_constants`` recomputes ``K2`` and
``K3`` by brute-force suprema of the two-case estimate over ``m``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError

K1 = float(np.exp(-2 * np.pi) / (2 * np.exp(2 * np.pi) + 2))

K2_PUBLISHED = 8.4985
K3_PUBLISHED = 6.5451
CASE1_PUBLISHED = 5.4407
MATCH_TOL = 5e-4

# sigma switches branch at this m
K_SWITCH = (np.sqrt(5) + 3) / 2
C_PLUS = (np.sqrt(5) + 1) / (np.sqrt(5) - 1)


class ConstantMismatchError(NumericError):
    pass


def splitting_sigma(m):
    return np.minimum(1.0, (m - 1) / (m * (m - 2)))


def splitting_bounds(m):
    """Lower and upper bounds on the exponent of ``(1, +-1/g; 1/g, 0)`` with ``inf|g| = m > 2``."""
    m = np.asarray(m, dtype=float)
    s = splitting_sigma(m)
    lower = 0.5 * np.log(((1 - s / m) ** 2 + 1 / m**2) / (1 + s**2))
    upper = 0.5 * np.log((1 + s / m) ** 2 + 1 / m**2)
    return lower, upper


def _case1_lower(m):
    return (m - 1) * m**2 / (m**2 - 2 * (m - 1)) + 0.5 * np.log(2) * m**2


def _case2_f(m):
    a = 2 * C_PLUS - 1
    return (a * m**4 - m**2) / (m**4 - a * m**2 + 1)


def _case2_lower(m):
    return 0.5 * (C_PLUS**2 + _case2_f(m))


@dataclass(frozen=True)
class KConstants:
    K2: float
    K3: float
    case1_c: float
    d_minus: float
    d_plus: float
    argmax_case1: float
    argmax_case2: float
    sharp_lower: float
    sharp_upper: float
    grid_points: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def rederive_k_constants(n_grid: int = 100_000, m_max: float = 50.0, check: bool = True) -> KConstants:
    """Suprema of the two-case estimate on a dense grid over ``m in (2, m_max]``.

    Case 1 (``2 < m < k``, ``sigma = 1``) gives the lower constant ``c`` and
    the upper constant 2; case 2 (``m >= k``) gives ``d_-`` and ``d_+``.
    ``sharp_*`` are the suprema of ``m^2`` times the bounds themselves, which
    must not exceed ``K2`` and ``K3``.
    """
    k = K_SWITCH
    m = np.linspace(2.0, m_max, n_grid + 1)[1:]
    m = np.union1d(m, np.linspace(k - 1e-3, k + 1e-3, 2001))
    m = np.union1d(m, [k])

    m1 = m[m <= k]
    e1 = _case1_lower(m1)
    i1 = int(np.argmax(e1))
    c = float(e1[i1])

    m2 = m[m >= k]
    e2 = _case2_lower(m2)
    i2 = int(np.argmax(e2))
    d_minus = float(e2[i2])
    d_plus = float((C_PLUS + 1) ** 2 / 2)

    K2 = max(d_minus, c)
    K3 = max(d_plus, 2.0)

    lo, up = splitting_bounds(m)
    sharp_lower = float(np.max(-lo * m**2))
    sharp_upper = float(np.max(up * m**2))

    out = KConstants(K2, K3, c, d_minus, d_plus, float(m1[i1]), float(m2[i2]), sharp_lower, sharp_upper, m.size)
    if check:
        for name, got, want, at in (
            ("K2", K2, K2_PUBLISHED, m2[i2]),
            ("K3", K3, K3_PUBLISHED, k),
            ("case-1 c", c, CASE1_PUBLISHED, m1[i1]),
        ):
            if abs(got - want) > MATCH_TOL:
                raise ConstantMismatchError(f"{name} = {got:.6f} differs from {want} (attained at m = {at:.6f})")
        if sharp_lower > K2 or sharp_upper > K3:
            raise ConstantMismatchError("the bounds exceed K2/m^2 or K3/m^2 somewhere on the grid")
    return out


# closed forms at the switching point; the grid suprema land here
K2 = float(max(_case2_lower(K_SWITCH), _case1_lower(K_SWITCH)))
K3 = float(max((C_PLUS + 1) ** 2 / 2, 2.0))
