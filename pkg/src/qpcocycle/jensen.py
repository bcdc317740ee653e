"""The functional I[f](y) = mean over x of log|f(x+iy)| and its acceleration.

The closed form follows from Jensen's formula on the circle
``|w| = exp(-2 pi y)``: with ``f - mu = w^{-d} a w^s prod (w - w_j)``,

    I(y) = log|a| + 2 pi y (d - s) - 2 pi sum_j min(y, Im z_j).

The right derivative divided by ``2 pi`` is therefore
``d - s - #{j : Im z_j > y}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractError, MarginError
from .potential import TWO_PI, FourierPotential, evaluate
from .zeros import ZeroSet, count_zeros, laurent_roots, line_winding, winding_number

QUADRATURE_POINTS = 512
QUADRATURE_MARGIN = 1e-3
FD_STEP = 1e-4
# zero heights closer than this to y are treated as lying on y
TIE_TOL = 1e-9


def _roots(p: FourierPotential, mu: complex, zs: ZeroSet | None) -> ZeroSet:
    return zs if zs is not None else laurent_roots(p, mu, restrict_to_strip=False)


def jensen_integral(p: FourierPotential, mu: complex, y: float, zs: ZeroSet | None = None) -> float:
    """``I[f - mu](y)`` from the Laurent roots."""
    zs = _roots(p, mu, zs)
    total = np.log(abs(zs.lead)) + TWO_PI * y * (zs.degree - zs.low_order)
    for z, m in zs.all_zeros:
        total -= TWO_PI * m * min(y, z.imag)
    return float(total)


def jensen_integral_quadrature(
    p: FourierPotential,
    mu: complex,
    y: float,
    M: int = QUADRATURE_POINTS,
    margin: float = QUADRATURE_MARGIN,
    zs: ZeroSet | None = None,
) -> float:
    """Periodic trapezoid average of ``log|f(x+iy) - mu|`` on ``M`` points.

    Refuses when a zero lies within ``margin`` of the line; the integrand is
    then too close to its logarithmic singularity.
    """
    if not p.is_constant:
        zs = _roots(p, mu, zs)
        dist = min((abs(z.imag - y) for z, _ in zs.all_zeros), default=np.inf)
        if dist < margin:
            raise MarginError(f"zero at distance {dist:.3g} < margin {margin} from height {y}")
    x = np.arange(M) / M
    vals = evaluate(p, x + 1j * y) - mu
    return float(np.mean(np.log(np.abs(vals))))


def two_omega_from_roots(zs: ZeroSet, y: float) -> int:
    """Twice the right derivative of ``I/(2 pi)`` at ``y``, exact from the roots."""
    above = sum(m for z, m in zs.all_zeros if z.imag > y + TIE_TOL)
    return 2 * (zs.degree - zs.low_order - above)


@dataclass(frozen=True)
class AccelerationValue:
    two_omega: int
    method: str
    boundary: bool
    fd_estimate: float
    fd_checked: bool
    fd_ok: bool

    @property
    def omega(self) -> float:
        return self.two_omega / 2


def _winding_height(zs: ZeroSet, h: float) -> float:
    ys = np.linspace(-h, h, 201)
    heights = zs.heights()
    if heights.size == 0:
        return 0.0
    dist = np.min(np.abs(ys[:, None] - heights[None, :]), axis=1)
    return float(ys[int(np.argmax(dist))])


def zero_free_winding(p: FourierPotential, mu: complex, zs: ZeroSet | None = None) -> int:
    """Winding number of the zero-free part of ``f - mu`` on the strip along ``Im z = 0``.

    The zero-free part has no zeros on the closed strip, so the winding is the
    same along every line in it; a line far from all zero heights is sampled.
    """
    zs = _roots(p, mu, zs)
    inner = [(np.exp(1j * TWO_PI * z), m) for z, m in zs.all_zeros if abs(z.imag) <= p.h]
    y0 = _winding_height(zs, p.h)

    def g(x):
        z = x + 1j * y0
        w = np.exp(1j * TWO_PI * z)
        val = evaluate(p, z, check=False) - mu
        for wj, m in inner:
            val = val / (w - wj) ** m
        return val

    return winding_number(g)


def acceleration_functional(
    p: FourierPotential,
    mu: complex,
    y: float,
    method: str = "auto",
    zs: ZeroSet | None = None,
    t: float = FD_STEP,
) -> AccelerationValue:
    """``omega[f - mu](y)``, the right derivative of ``I`` divided by ``2 pi``.

    ``method="zero-count"`` uses half the number of zeros with ``|Im z| <= y``
    (real-analytic ``f``, real ``mu``, ``0 <= y <= h``); ``"winding"`` uses the
    winding of the zero-free part minus the zeros in ``(y, h]``.  At a zero
    height the right-limit value is returned and ``boundary`` is set.
    """
    zs = _roots(p, mu, zs)
    heights = zs.heights()
    real_case = p.is_nearly_real_analytic() and complex(mu).imag == 0 and 0 <= y <= p.h
    if method == "auto":
        method = "zero-count" if real_case else "winding"
    if method == "zero-count" and not real_case:
        raise ContractError("zero-count form needs real-analytic f, real mu and 0 <= y <= h")
    if abs(y) > p.h * (1 + 1e-12):
        raise ContractError(f"height {y} outside the strip")

    if method == "zero-count":
        boundary = bool(np.any(np.abs(np.abs(heights) - y) <= TIE_TOL))
        two_omega = count_zeros(zs, -y - TIE_TOL, y + TIE_TOL)
    elif method == "winding":
        boundary = bool(np.any(np.abs(heights - y) <= TIE_TOL))
        ind = zero_free_winding(p, mu, zs)
        n_above = sum(m for z, m in zs.all_zeros if y + TIE_TOL < z.imag <= p.h * (1 + 1e-12))
        two_omega = 2 * (-ind - n_above)
    else:
        raise ValueError(f"unknown method {method!r}")

    fd = (jensen_integral(p, mu, y + t, zs) - jensen_integral(p, mu, y, zs)) / (TWO_PI * t)
    # the difference quotient is exact only if no zero height is crossed
    crossed = np.any((heights > y + TIE_TOL) & (heights <= y + t))
    if method == "zero-count":
        crossed = crossed or np.any((-heights > y + TIE_TOL) & (-heights <= y + t))
    fd_checked = not crossed
    fd_ok = (not fd_checked) or abs(fd - two_omega / 2) < 1e-6
    return AccelerationValue(two_omega, method, boundary, float(fd), bool(fd_checked), bool(fd_ok))


def _quadrature_points_for(distance: float) -> int:
    # aliasing error of the trapezoid rule decays like exp(-2 pi M distance)
    need = 40.0 / (TWO_PI * max(distance, 1e-12))
    return int(min(2**16, max(QUADRATURE_POINTS, 2 ** int(np.ceil(np.log2(need))))))


@dataclass(frozen=True)
class RouteRow:
    y: float
    fd_quadrature: float
    zero_count: float | None
    winding_form: float
    line_index: float
    agree: bool


@dataclass(frozen=True)
class RouteReport:
    mu: complex
    rows: tuple[RouteRow, ...]
    failures: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_acceleration_routes(
    p: FourierPotential,
    mu: complex,
    ys: Sequence[float],
    margin: float = QUADRATURE_MARGIN,
    t: float = FD_STEP,
    fd_tol: float = 1e-6,
) -> RouteReport:
    """Cross-check three independent routes to ``omega[f - mu](y)``.

    * the finite difference of the quadrature value of ``I``;
    * the winding form (zero-free part winding minus zeros above ``y``);
    * the zero-count form (real-analytic case only).

    In addition ``omega(y)`` must equal minus the winding of ``f - mu`` along
    the line ``Im z = y`` itself, which is constant across zero-free bands.
    """
    zs = laurent_roots(p, mu, restrict_to_strip=False)
    heights = zs.heights()
    rows = []
    failures = []
    real_case = p.is_nearly_real_analytic() and complex(mu).imag == 0
    for y in ys:
        if heights.size:
            dist = float(np.min(np.abs(heights - y)))
            if dist < margin:
                raise ContractError(f"height {y} within {dist:.3g} of a zero height")
            dist = min(dist, float(np.min(np.abs(heights - y - t))))
        else:
            dist = np.inf
        M = _quadrature_points_for(dist)
        fd = (
            jensen_integral_quadrature(p, mu, y + t, M, margin=0.0, zs=zs)
            - jensen_integral_quadrature(p, mu, y, M, margin=0.0, zs=zs)
        ) / (TWO_PI * t)
        wind = acceleration_functional(p, mu, y, method="winding", zs=zs).omega
        count = (
            acceleration_functional(p, mu, y, method="zero-count", zs=zs).omega
            if real_case and 0 <= y <= p.h
            else None
        )
        line = -line_winding(p, mu, y)
        agree = abs(fd - wind) < fd_tol and line == wind and (count is None or count == wind)
        if not agree:
            failures.append(f"y={y}: fd={fd:.9f} winding={wind} zero_count={count} line={line}")
        rows.append(RouteRow(float(y), float(fd), count, wind, float(line), bool(agree)))
    return RouteReport(mu, tuple(rows), tuple(failures))


@dataclass(frozen=True)
class JensenProfile:
    ys: tuple[float, ...]
    values: tuple[float, ...]
    two_omega: tuple[int, ...]
    methods: tuple[str, ...]

    def rows(self) -> list[dict]:
        return [
            {"y": y, "I": v, "two_omega": w, "method": m}
            for y, v, w, m in zip(self.ys, self.values, self.two_omega, self.methods)
        ]

    def convexity_defect(self) -> float:
        """Most negative slope increment (0 when convex)."""
        y = np.array(self.ys)
        v = np.array(self.values)
        if len(y) < 3:
            return 0.0
        slopes = np.diff(v) / np.diff(y)
        return float(min(0.0, np.min(np.diff(slopes) / np.diff(y)[1:])))

    def evenness_defect(self) -> float:
        lookup = dict(zip(np.round(self.ys, 12), self.values))
        worst = 0.0
        for y, v in lookup.items():
            if -y in lookup:
                worst = max(worst, abs(v - lookup[-y]))
        return worst


def jensen_profile(
    p: FourierPotential, mu: complex, ys: Sequence[float], method: str = "roots"
) -> JensenProfile:
    """``I`` and ``2 omega`` on a sorted height grid.

    ``method="auto"`` uses quadrature where the margin allows and the roots
    formula elsewhere.
    """
    zs = laurent_roots(p, mu, restrict_to_strip=False)
    ys = sorted(float(y) for y in ys)
    vals, methods = [], []
    for y in ys:
        if method in ("quadrature", "auto"):
            try:
                vals.append(jensen_integral_quadrature(p, mu, y, zs=zs))
                methods.append("quadrature")
                continue
            except MarginError:
                if method == "quadrature":
                    raise
        vals.append(jensen_integral(p, mu, y, zs))
        methods.append("roots")
    tw = [two_omega_from_roots(zs, y) for y in ys]
    return JensenProfile(tuple(ys), tuple(vals), tuple(tw), tuple(methods))


def _check_sign_conventions() -> None:
    cases = [
        (FourierPotential.from_terms({1: 1.0, -1: 1.0}, 0.5), 0.0, 0.1),
        (FourierPotential.from_terms({1: 1.0, -1: 1.0}, 0.5), 3.0, 0.0),
        (FourierPotential.from_terms({1: 1.0, 2: 0.3}, 0.5), 0.5, 0.05),
    ]
    for p, mu, y in cases:
        a = jensen_integral(p, mu, y)
        b = jensen_integral_quadrature(p, mu, y, M=4096)
        if abs(a - b) > 1e-9:
            raise RuntimeError(f"Jensen closed form disagrees with quadrature: {a} vs {b}")


_check_sign_conventions()
