"""Large-coupling asymptotics of the Lyapunov exponent and their constants.

For real-analytic ``f`` and ``0 < rho < min(h, 1)/2`` let ``N`` be the largest
number of zeros of ``f - mu`` on the closed strip of half-width ``2 rho``.
For ``|lam| > 2^(2N+1)``

    |L - log|lam| - I[E/lam - f](0)| <= C |lam|^(-2/(2N+1)),
    C = 2 N^2 pi / (K1 beta_hat^(1/N)) + K2.

Everything here assembles those constants, runs the estimator, and checks
each intermediate inequality of the argument separately.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import constants
from .cocycle import (
    DEFAULT_M,
    DEFAULT_N,
    GOLDEN,
    CocycleSpec,
    acceleration,
    dominated_splitting_check,
    line_minimum,
    lyapunov_exponent,
)
from .constants import K1, K2
from .errors import ContractError, DegenerateInputError, WorkingHeightError
from .jensen import acceleration_functional, jensen_integral
from .potential import TWO_PI, FourierPotential, admissible_energy_interval, evaluate, stats, sup_norm
from .zeros import HatQuantities, hat_quantities, laurent_roots, strip_minimum, uniform_margin

SCHEMA = 1
# imaginary parts below this count as real zeros
REAL_ZERO_TOL = 1e-7
CRITICAL_GAP = 1e-9
INCONCLUSIVE_FACTOR = 3.0


def theta(c: float, x):
    """``x / (c + x)``: increasing from 0 towards 1."""
    return x / (c + x)


# -- theorem constants ----------------------------------------------------------


@dataclass(frozen=True)
class TheoremConstants:
    rho: float
    N: int
    lambda0: float
    K1: float
    K2: float
    beta_hat: float
    C: float
    hat: HatQuantities = field(repr=False, compare=False)

    @property
    def exponent(self) -> float:
        return 2.0 / (2 * self.N + 1)

    def delta_of(self, lam: float) -> float:
        return self.N / self.K1 * self.beta_hat ** (-1.0 / self.N) * abs(lam) ** (-self.exponent)

    def delta_used(self, lam: float) -> float:
        """``delta_of`` capped at ``rho``; the uncapped value is far outside the strip for moderate ``lam``."""
        return min(self.delta_of(lam), self.rho)

    def bound(self, lam: float) -> float:
        return self.C * abs(lam) ** (-self.exponent)

    def c_recomputed(self) -> float:
        return 2 * self.N**2 / self.K1 * self.beta_hat ** (-1.0 / self.N) * np.pi + self.K2

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "N": self.N,
            "lambda0": self.lambda0,
            "K1": self.K1,
            "K2": self.K2,
            "beta_hat": self.beta_hat,
            "C": self.C,
            "witness_mu_N": self.hat.witness_mu_N,
            "witness_mu_beta": self.hat.witness_mu_beta,
        }


@functools.lru_cache(maxsize=64)
def _constants_cached(key: tuple, rho: float, n_mu: int) -> TheoremConstants:
    coeffs, h = key
    p = FourierPotential(np.array(coeffs, dtype=complex), h)
    hq = hat_quantities(p, rho, n_mu=n_mu)
    N = hq.N_hat
    if N == 0:
        raise DegenerateInputError("no shift of f has zeros near the real axis")
    C = 2 * N**2 / K1 * hq.beta_hat ** (-1.0 / N) * np.pi + K2
    return TheoremConstants(rho, N, float(2 ** (2 * N + 1)), K1, K2, hq.beta_hat, float(C), hq)


def theorem_constants(p: FourierPotential, rho: float, n_mu: int = 401) -> TheoremConstants:
    if not p.is_nearly_real_analytic():
        raise ContractError("theorem constants need a real-analytic potential")
    if p.is_constant:
        raise DegenerateInputError("constant potential: the zero counts are undefined")
    if not 0 < rho < min(p.h, 1.0) / 2:
        raise ContractError("rho must satisfy 0 < rho < min(h,1)/2")
    return _constants_cached(p.key, float(rho), int(n_mu))


# -- uniform lower bound off the real axis ---------------------------------------


@dataclass(frozen=True)
class DuarteKleinCheck:
    bound: float
    verified: bool | None
    degenerate: bool
    delta: float
    rho: float
    worst_mu: float | None = None
    worst_lhs: float | None = None
    violations: int = 0
    mus: tuple[float, ...] = ()
    lhs: tuple[float, ...] = ()


def duarte_klein_bound(
    p: FourierPotential,
    rho: float,
    delta: float,
    n_mu: int = 101,
    consts: TheoremConstants | None = None,
) -> DuarteKleinCheck:
    """``beta_hat (K1 delta / N)^N`` against a brute-force scan.

    For every ``mu`` of an ``n_mu`` grid over the admissible range at
    ``lam = lambda0``, the largest over 33 heights in ``[delta/2, delta]`` of
    the smallest over 1024 phases of ``|f(x+iy) - mu|`` must reach the bound.
    """
    if not 0 < delta < rho < min(p.h, 1.0) / 2:
        raise ContractError("need 0 < delta < rho < min(h,1)/2")
    if p.is_constant:
        return DuarteKleinCheck(float("nan"), None, True, delta, rho)
    consts = consts or theorem_constants(p, rho)
    N = consts.N
    bound = consts.beta_hat * (K1 * delta / N) ** N
    lo, hi = admissible_energy_interval(p, consts.lambda0)
    mus = np.linspace(lo, hi, n_mu)
    lhs = uniform_margin(p, mus, delta / 2, delta, ny=33, nx=1024)
    i = int(np.argmin(lhs))
    bad = int(np.sum(lhs < bound))
    return DuarteKleinCheck(
        float(bound), bad == 0, False, delta, rho, float(mus[i]), float(lhs[i]), bad, tuple(mus.tolist()), tuple(lhs.tolist())
    )


# -- working height ------------------------------------------------------------------


@dataclass(frozen=True)
class WorkingHeight:
    y_star: float
    band: tuple[float, float]
    margin: float
    delta: float
    scan: tuple[tuple[float, float], ...] = field(repr=False)


def _line_margin(p: FourierPotential, lam: float, E: float, y: float, nx: int) -> float:
    return line_minimum(lambda x: lam * evaluate(p, x + 1j * y, check=False) - E, nx)[0]


def find_working_height(
    p: FourierPotential,
    lam: float,
    E: float,
    consts: TheoremConstants | None = None,
    delta: float | None = None,
    ny: int = 65,
    nx: int = 4096,
    threshold: float = 2.0,
) -> WorkingHeight:
    """Longest run of heights in ``[delta/2, delta]`` with ``min_x |lam f - E| > threshold``.

    The run endpoints are refined by root finding; ``y_star`` is the midpoint.
    """
    if consts is not None and not abs(lam) > consts.lambda0:
        raise ContractError(f"|lam| = {abs(lam)} must exceed lambda0 = {consts.lambda0}")
    if delta is None:
        if consts is None:
            raise ContractError("pass either delta or the theorem constants")
        delta = consts.delta_used(lam)
    if not 0 < delta <= p.h:
        raise ContractError(f"delta = {delta} must lie in (0, h]")
    ys = np.linspace(delta / 2, delta, ny)
    margins = np.array([_line_margin(p, lam, E, y, nx) for y in ys])
    good = margins > threshold
    if not good.any():
        j = int(np.argmax(margins))
        raise WorkingHeightError(
            f"no height in [{delta / 2:.6g}, {delta:.6g}] with min |lam f - E| > {threshold}; "
            f"best {margins[j]:.6g} at y = {ys[j]:.6g}"
        )
    best_len, best_start, start = 0, 0, None
    for i, g in enumerate(np.append(good, False)):
        if g and start is None:
            start = i
        elif not g and start is not None:
            if i - start > best_len:
                best_len, best_start = i - start, start
            start = None
    i0, i1 = best_start, best_start + best_len - 1

    def excess(y):
        return _line_margin(p, lam, E, y, nx) - threshold

    y1 = ys[i0] if i0 == 0 else brentq(excess, ys[i0 - 1], ys[i0], xtol=1e-12)
    y2 = ys[i1] if i1 == ny - 1 else brentq(excess, ys[i1], ys[i1 + 1], xtol=1e-12)
    y_star = 0.5 * (y1 + y2)
    return WorkingHeight(
        float(y_star),
        (float(y1), float(y2)),
        float(_line_margin(p, lam, E, y_star, nx)),
        float(delta),
        tuple(zip(ys.tolist(), margins.tolist())),
    )


# -- main certificate -------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticsCertificate:
    constants: TheoremConstants
    lam: float
    E: float
    alpha: float
    y_star: float | None
    band: tuple[float, float] | None
    predicted: float
    measured: float
    spread: float
    residual: float
    bound: float
    status: str
    delta_theory: float
    delta_used: float
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def delta_clamped(self) -> bool:
        return self.delta_used < self.delta_theory

    def row(self) -> dict:
        return {
            "lambda": self.lam,
            "E": self.E,
            "predicted": self.predicted,
            "measured": self.measured,
            "residual": self.residual,
            "bound": self.bound,
            "status": self.status,
        }

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            **self.row(),
            "alpha": self.alpha,
            "spread": self.spread,
            "y_star": self.y_star,
            "band": list(self.band) if self.band else None,
            "delta_theory": self.delta_theory,
            "delta_used": self.delta_used,
            "delta_clamped": self.delta_clamped,
            "constants": self.constants.to_dict(),
            "checks": dict(self.checks),
            "details": dict(self.details),
        }


def classify(residual: float, bound: float, spread: float) -> str:
    if bound <= INCONCLUSIVE_FACTOR * spread:
        return "inconclusive"
    return "pass" if residual <= bound + 2 * spread else "fail"


def verify_asymptotics(
    p: FourierPotential,
    alpha: float = GOLDEN,
    lam: float = 40.0,
    E: float = 0.0,
    rho: float = 0.2,
    n: int = DEFAULT_N,
    M: int = DEFAULT_M,
    cross_checks: bool = True,
    consts: TheoremConstants | None = None,
    workers: int | None = None,
) -> AsymptoticsCertificate:
    consts = consts or theorem_constants(p, rho)
    if not abs(lam) > consts.lambda0:
        raise ContractError(f"|lam| = {abs(lam)} must exceed lambda0 = {consts.lambda0}")
    mu = E / lam
    predicted = float(np.log(abs(lam)) + jensen_integral(p, mu, 0.0))
    cyc = CocycleSpec(alpha, lam, E, 0.0, p)
    est = lyapunov_exponent(cyc, n, M, workers)
    residual = abs(est.value - predicted)
    bound = consts.bound(lam)
    status = classify(residual, bound, est.spread)
    checks: dict[str, bool] = {"positive": est.value > 0, "subadditive": est.subadditive}
    details: dict[str, float] = {"L_n": est.raw_pairs[0], "L_2n": est.raw_pairs[1]}
    y_star = band = None
    if cross_checks:
        wh = find_working_height(p, lam, E, consts)
        y_star, band = wh.y_star, wh.band
        ds = dominated_splitting_check(cyc, y_star, True, n, M, workers=workers)
        ey = lyapunov_exponent(cyc.at_height(y_star), n, M, workers)
        omega = acceleration_functional(p, mu, y_star).omega
        I_y = jensen_integral(p, mu, y_star)
        fact_gap = abs(ey.value - np.log(abs(lam)) - I_y - ds.measured_le)
        fact_tol = 2 * (ey.spread + ds.measured_spread) + 1e-9
        law = K2 * abs(lam) ** (-consts.exponent)
        extrap = 2 * np.pi * omega * y_star
        checks.update(
            working_margin=wh.margin > 2,
            dominated=ds.is_dominated,
            splitting_contains=bool(ds.contains and ds.contains_alt),
            factorization=bool(fact_gap <= fact_tol),
            d_exponent_law=abs(ds.measured_le) <= law + 2 * ds.measured_spread,
            convex_extrapolation=abs(est.value - ey.value) <= extrap + 2 * (est.spread + ey.spread),
        )
        details.update(
            working_margin=wh.margin,
            margin_predicted=abs(lam) ** (1 / (2 * consts.N + 1)),
            m_g=ds.m_g,
            L_D=ds.measured_le,
            L_D_alt=ds.measured_le_alt,
            L_y=ey.value,
            I_y=I_y,
            factorization_gap=float(fact_gap),
            d_exponent_bound=law,
            omega_y=omega,
            extrapolation_bound=extrap,
        )
    return AsymptoticsCertificate(
        consts,
        float(lam),
        float(E),
        float(alpha),
        y_star,
        band,
        predicted,
        est.value,
        est.spread,
        float(residual),
        float(bound),
        status,
        consts.delta_of(lam),
        consts.delta_used(lam),
        checks,
        details,
    )


def sup_strip_acceleration(p: FourierPotential, mu: float, y_max: float) -> float:
    """``sup`` over ``0 <= y <= y_max`` of ``omega[f - mu](y)``, exact from the roots.

    ``omega`` is a nondecreasing step function of ``y >= 0``, so the supremum
    is its value at ``y_max``.
    """
    zs = laurent_roots(p, mu, restrict_to_strip=False)
    heights = [0.0, y_max] + [abs(z.imag) for z, _ in zs.all_zeros if abs(z.imag) <= y_max]
    return max(acceleration_functional(p, mu, y, method="zero-count", zs=zs).omega for y in heights)


@dataclass(frozen=True)
class AccelerationBoundReport:
    lam: float
    E: float
    measured_raw: float | None
    measured: int | None
    residual: float | None
    sup_omega: float | None
    half_N: float | None
    skipped: bool = False
    reason: str = ""

    @property
    def measured_le_sup(self) -> bool:
        return self.skipped or self.measured <= self.sup_omega + 1e-12

    @property
    def sup_le_half_N(self) -> bool:
        return self.skipped or self.sup_omega <= self.half_N + 1e-12

    @property
    def ok(self) -> bool:
        return self.measured_le_sup and self.sup_le_half_N

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "E": self.E,
            "omega_raw": self.measured_raw,
            "omega": self.measured,
            "residual": self.residual,
            "sup_omega": self.sup_omega,
            "half_N": self.half_N,
            "skipped": self.skipped,
            "ok": self.ok,
        }


def acceleration_bound_check(
    p: FourierPotential,
    rho: float,
    alpha: float = GOLDEN,
    lam: float = 100.0,
    E: float = 0.0,
    t: float = 1e-2,
    n: int = DEFAULT_N,
    M: int = DEFAULT_M,
    consts: TheoremConstants | None = None,
    workers: int | None = None,
) -> AccelerationBoundReport:
    """Measured ``omega(0) <= sup_y omega[E/lam - f](y) <= N/2``, each link separately."""
    if p.is_constant:
        return AccelerationBoundReport(lam, E, None, None, None, None, None, True, "constant potential")
    consts = consts or theorem_constants(p, rho)
    if not abs(lam) >= consts.lambda0:
        raise ContractError(f"|lam| = {abs(lam)} must be at least lambda0 = {consts.lambda0}")
    acc = acceleration(CocycleSpec(alpha, lam, E, 0.0, p), 0.0, t, n, M, workers)
    sup_w = sup_strip_acceleration(p, E / lam, rho)
    return AccelerationBoundReport(lam, E, acc.raw, acc.quantized, acc.residual, sup_w, consts.N / 2)


# -- zero-set geometry on the real axis -------------------------------------------


def real_zeros(p: FourierPotential, mu: float = 0.0, tol: float = REAL_ZERO_TOL) -> list[tuple[float, int]]:
    zs = laurent_roots(p, mu, restrict_to_strip=False)
    return sorted((z.real % 1.0, m) for z, m in zs.all_zeros if abs(z.imag) <= tol)


def torus_zero_free_part(p: FourierPotential, mu: float = 0.0, tol: float = REAL_ZERO_TOL):
    """``g`` with ``f - mu = g * prod (sin(pi (z - x_j)) / pi)^(n_j)`` over the real zeros.

    Uses ``w - e^{2 pi i x_j} = 2 pi i e^{pi i (z + x_j)} sin(pi (z - x_j)) / pi``,
    so ``g`` is evaluated without division and is analytic on the strip.
    """
    zs = laurent_roots(p, mu, restrict_to_strip=False)
    real = [(z.real, m) for z, m in zs.all_zeros if abs(z.imag) <= tol]
    other = [(np.exp(1j * TWO_PI * z), m) for z, m in zs.all_zeros if abs(z.imag) > tol]
    d, s, lead = zs.degree, zs.low_order, zs.lead

    def g(z):
        z = np.asarray(z, dtype=complex)
        w = np.exp(1j * TWO_PI * z)
        out = lead * w ** (s - d)
        for wk, m in other:
            out = out * (w - wk) ** m
        for xj, m in real:
            out = out * (2j * np.pi * np.exp(1j * np.pi * (z + xj))) ** m
        return out

    return g, real


@dataclass(frozen=True)
class ZeroGeometry:
    applicable: bool
    zeros: tuple[tuple[float, int], ...]
    N: int
    h: float
    sup_norm_h: float
    tau: float | None = None
    zeta: float | None = None
    beta: float | None = None
    gamma: float | None = None
    R: float | None = None
    potential: FourierPotential | None = field(default=None, repr=False)

    def eta(self, delta: float) -> float:
        if not self.applicable:
            raise ContractError("no real zeros: the estimate does not apply")
        g, _ = torus_zero_free_part(self.potential)
        return float((delta / 2) ** self.N * strip_minimum(g, delta).value)

    def verify(self, delta: float, nx: int = 1024, ny: int = 64) -> tuple[float, float, bool]:
        """Brute-force ``min |f|`` over ``delta/2 <= y <= delta`` against ``eta(delta)``."""
        if delta > self.R * (1 + 1e-12):
            raise ContractError(f"delta = {delta} exceeds R = {self.R}")
        # the minimum sits above the real zeros, which a dyadic grid may miss
        x = np.union1d(np.arange(nx) / nx, [z for z, _ in self.zeros])
        ys = np.linspace(delta / 2, delta, ny)
        lhs = float(np.abs(evaluate(self.potential, x[None, :] + 1j * ys[:, None])).min())
        eta = self.eta(delta)
        return lhs, eta, bool(lhs >= eta)

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "potential"}
        out["zeros"] = [list(z) for z in self.zeros]
        return out


def modulus_of_transversality(p: FourierPotential, zeros: Sequence[tuple[float, int]]) -> float:
    """``min_j |f^(n_j)(x_j)| / n_j!`` over the real zeros."""
    vals = []
    for x, m in zeros:
        dm = p.derivative(m)
        vals.append(abs(evaluate(dm, x, check=False)) / float(np.prod(np.arange(1, m + 1))))
    return float(min(vals))


def zero_set_geometry(p: FourierPotential) -> ZeroGeometry:
    if not p.is_nearly_real_analytic():
        raise ContractError("zero-set geometry needs a real-analytic potential")
    if p.is_zero:
        raise DegenerateInputError("f vanishes identically")
    if not p.h < 1:
        raise ContractError("zero-set geometry assumes h < 1")
    g, zeros = torus_zero_free_part(p)
    M = sup_norm(p, p.h)
    N = sum(m for _, m in zeros)
    if not zeros:
        return ZeroGeometry(False, (), 0, p.h, M, potential=p)
    h = p.h
    tau = modulus_of_transversality(p, zeros)
    zeta = h * theta(M, tau * h**N)
    beta = line_minimum(g)[0]
    gamma = h * theta(M, beta * zeta**N)
    R = zeta * gamma / np.sqrt(zeta**2 + gamma**2)
    return ZeroGeometry(True, tuple(zeros), N, h, M, tau, zeta, beta, gamma, float(R), p)


# -- stratified version ----------------------------------------------------------------


@dataclass(frozen=True)
class StratumResult:
    E: float
    mu: float
    measured: float
    spread: float
    predicted: float
    residual: float
    bound: float
    omega0: int
    omega0_raw: float
    omega0_bound: float
    omega_band: float
    band_ok: bool
    status: str

    @property
    def omega_ok(self) -> bool:
        return self.omega0 <= self.omega0_bound

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["omega_ok"] = self.omega_ok
        return d


@dataclass(frozen=True)
class StratumReport:
    mu1: float
    mu2: float
    N0: int
    counts: tuple[int, ...]
    tau0: float
    M0: float
    beta0: float
    zeta0: float
    gamma0: float
    R0: float
    beta_hat: float
    lambda_tilde0: float
    lambda_tilde0_corrected: float
    h: float
    lam: float | None = None
    delta: float | None = None
    threshold_ok: bool | None = None
    band: tuple[float, float] | None = None
    band_ok: bool | None = None
    const: float | None = None
    results: tuple[StratumResult, ...] = ()

    def eta(self, delta: float) -> float:
        return self.beta_hat * (delta / 2) ** self.N0

    def R0_recomputed(self) -> float:
        return self.zeta0 * self.gamma0 / np.sqrt(self.zeta0**2 + self.gamma0**2)

    def lambda_tilde0_recomputed(self) -> float:
        return max(2**self.N0 * self.beta_hat, self.R0 ** (-0.5)) ** (2 * self.N0 + 1)

    @property
    def ok(self) -> bool:
        return bool(
            self.threshold_ok
            and self.band_ok
            and all(r.status == "pass" and r.omega_ok for r in self.results)
        )

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "results"}
        out["counts"] = list(self.counts)
        out["results"] = [r.to_dict() for r in self.results]
        out["schema"] = SCHEMA
        return out


def _min_abs_derivative_on_preimage(p: FourierPotential, mu1: float, mu2: float) -> float:
    dp = p.derivative()
    cands = [x for mu in (mu1, mu2) for x, _ in real_zeros(p, mu)]
    # interior extrema of |f'| sit at zeros of f''
    for x, _ in real_zeros(p.derivative(2), 0.0):
        if mu1 <= evaluate(p, x, check=False).real <= mu2:
            cands.append(x)
    if not cands:
        raise ContractError(f"f never takes values in [{mu1}, {mu2}]")
    return float(min(abs(evaluate(dp, x, check=False)) for x in cands))


def stratum_quantities(p: FourierPotential, mu1: float, mu2: float, n_mu: int = 41) -> StratumReport:
    """Constants of the stratified estimate on ``[mu1, mu2]``."""
    if not p.is_nearly_real_analytic():
        raise ContractError("strata need a real-analytic potential")
    if not mu1 < mu2:
        raise ContractError("need mu1 < mu2")
    if not p.h < 1:
        raise ContractError("strata assume h < 1")
    st = stats(p)
    if mu1 < st.min_torus or mu2 > st.max_torus:
        raise ContractError(f"[{mu1}, {mu2}] is not inside [{st.min_torus}, {st.max_torus}]")
    for v in st.critical_values:
        gap = 0.0 if mu1 <= v <= mu2 else min(abs(v - mu1), abs(v - mu2))
        if gap <= CRITICAL_GAP:
            raise ContractError(f"critical value {v} lies within {CRITICAL_GAP} of [{mu1}, {mu2}]")
    h = p.h
    samples = np.linspace(mu1, mu2, 11)
    counts = tuple(sum(m for _, m in real_zeros(p, mu)) for mu in samples)
    if len(set(counts)) != 1:
        raise ContractError(f"torus zero count varies on the stratum: {counts}")
    N0 = counts[0]
    tau0 = _min_abs_derivative_on_preimage(p, mu1, mu2)
    # mu -> ||f - mu||_h is convex, so the maximum is at an endpoint
    M0 = max(sup_norm(p.shifted(mu1), h), sup_norm(p.shifted(mu2), h))

    mus = np.linspace(mu1, mu2, n_mu)

    def beta_line(mu):
        return line_minimum(torus_zero_free_part(p, mu)[0])[0]

    vals = [beta_line(m) for m in mus]
    beta0 = _refine_min(beta_line, mus, vals)
    zeta0 = h * theta(M0, h**N0 * tau0)
    gamma0 = h * theta(M0, h**N0 * beta0)
    R0 = zeta0 * gamma0 / np.sqrt(zeta0**2 + gamma0**2)

    def beta_strip(mu):
        return strip_minimum(torus_zero_free_part(p, mu)[0], R0).value

    vals = [beta_strip(m) for m in mus]
    beta_hat = _refine_min(beta_strip, mus, vals)
    lt0 = max(2**N0 * beta_hat, R0 ** (-0.5)) ** (2 * N0 + 1)
    lt0c = max(2 ** (N0 + 1) / beta_hat, R0 ** (-0.5)) ** (2 * N0 + 1)
    return StratumReport(
        float(mu1), float(mu2), N0, counts, tau0, float(M0), beta0, float(zeta0), float(gamma0), float(R0),
        beta_hat, float(lt0), float(lt0c), h,
    )


def _refine_min(fn, grid: np.ndarray, vals: Sequence[float]) -> float:
    i = int(np.argmin(vals))
    best = float(vals[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        best = min(best, float(res.fun))
    return best


def stratified_constant(N0: int, beta_hat: float) -> float:
    """Error constant: convexity term ``2 pi N0`` plus the dominated-splitting term at ``m >= 2^-N0 beta_hat lam^(1/(2N0+1))``."""
    return 2 * np.pi * N0 + K2 * 4.0**N0 / beta_hat**2


def verify_stratified(
    p: FourierPotential,
    alpha: float,
    lam: float,
    mu1: float,
    mu2: float,
    energies: Sequence[float],
    n: int = DEFAULT_N,
    M: int = DEFAULT_M,
    t: float = 1e-2,
    enforce_threshold: bool = True,
    report: StratumReport | None = None,
    workers: int | None = None,
) -> StratumReport:
    """Stratified asymptotics and acceleration bound for energies with ``E/lam`` in the stratum.

    With ``enforce_threshold=False`` a coupling at or below ``lambda_tilde0``
    is evaluated anyway and ``threshold_ok`` records the shortfall.
    """
    rep = report or stratum_quantities(p, mu1, mu2)
    threshold_ok = lam > rep.lambda_tilde0
    if enforce_threshold and not threshold_ok:
        raise ContractError(f"lam = {lam} must exceed lambda_tilde0 = {rep.lambda_tilde0:.6g}")
    for E in energies:
        if not mu1 <= E / lam <= mu2:
            raise ContractError(f"E/lam = {E / lam} lies outside [{mu1}, {mu2}]")
    N0 = rep.N0
    delta = lam ** (-2.0 / (2 * N0 + 1))
    if delta > p.h:
        raise ContractError(f"delta = {delta} exceeds the strip height")
    # the same band has to work for every energy at once
    ys = np.linspace(delta / 2, delta, 65)[1:-1]
    band_ok = True
    for E in energies:
        margins = [_line_margin(p, lam, E, y, 4096) for y in ys]
        band_ok = band_ok and min(margins) > 2
    const = stratified_constant(N0, rep.beta_hat)
    bound = const * lam ** (-2.0 / (2 * N0 + 1))
    results = []
    for E in energies:
        mu = E / lam
        cyc = CocycleSpec(alpha, lam, E, 0.0, p)
        est = lyapunov_exponent(cyc, n, M, workers)
        predicted = float(np.log(lam) + jensen_integral(p, mu, 0.0))
        residual = abs(est.value - predicted)
        acc = acceleration(cyc, 0.0, t, n, M, workers)
        omega_band = acceleration_functional(p, mu, 0.75 * delta).omega
        results.append(
            StratumResult(
                float(E), float(mu), est.value, est.spread, predicted, float(residual), float(bound),
                acc.quantized, acc.raw, N0 / 2, omega_band, bool(band_ok), classify(residual, bound, est.spread),
            )
        )
    return StratumReport(
        **{k: getattr(rep, k) for k in (
            "mu1", "mu2", "N0", "counts", "tau0", "M0", "beta0", "zeta0", "gamma0", "R0",
            "beta_hat", "lambda_tilde0", "lambda_tilde0_corrected", "h",
        )},
        lam=float(lam),
        delta=float(delta),
        threshold_ok=bool(threshold_ok),
        band=(delta / 2, delta),
        band_ok=bool(band_ok),
        const=float(const),
        results=tuple(results),
    )


def rederive_K_constants(**kwargs) -> constants.KConstants:
    return constants.rederive_k_constants(**kwargs)


__all__ = [
    "TheoremConstants",
    "theorem_constants",
    "duarte_klein_bound",
    "find_working_height",
    "verify_asymptotics",
    "acceleration_bound_check",
    "zero_set_geometry",
    "stratum_quantities",
    "verify_stratified",
    "rederive_K_constants",
]
