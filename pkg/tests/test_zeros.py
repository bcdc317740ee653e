import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpcocycle import DegenerateInputError, FourierPotential, preset
from qpcocycle.errors import ContractError, IllConditionedError
from qpcocycle.potential import evaluate
from qpcocycle.zeros import (
    NORMALIZATION,
    beta,
    count_zeros,
    hat_quantities,
    laurent_roots,
    line_winding,
    n_closed,
    n_open,
    strip_count_by_winding,
    strip_minimum,
    uniform_margin,
    winding_number,
    zero_free_part,
)

from oracles import amo_beta_hat, load_goldens, random_trig, roots_z

AMO = preset("amo")
G = load_goldens()


def _match(got, want, tol):
    got = sorted(got, key=lambda z: (round(z.imag, 6), z.real))
    want = sorted(want, key=lambda z: (round(z.imag, 6), z.real))
    assert len(got) == len(want)
    for a, b in zip(got, want):
        d = a - b
        d = complex((d.real + 0.5) % 1.0 - 0.5, d.imag)
        assert abs(d) < tol


def test_amo_roots_real_shift():
    # 2 cos(2 pi z) = 3 at z = +-i arccosh(1.5)/(2 pi)
    zs = laurent_roots(AMO, 3.0)
    t = np.arccosh(1.5) / (2 * np.pi)
    assert zs.total_count == 2
    assert np.allclose(sorted(zs.heights()), [-t, t], atol=1e-13)
    assert all(abs(z.real) < 1e-12 or abs(z.real - 1) < 1e-12 for z, _ in zs.zeros)


def test_double_root_clusters():
    # 2 cos(2 pi z) - 2 has a double zero at z = 0
    zs = laurent_roots(AMO, 2.0)
    assert len(zs.all_zeros) == 1
    z, m = zs.all_zeros[0]
    assert m == 2 and abs(z.imag) < 1e-7


def test_outside_roots_are_separated():
    zs = laurent_roots(AMO, 2 * np.cosh(2 * np.pi * 0.7))
    assert zs.zeros == ()
    assert len(zs.outside) == 2
    assert laurent_roots(AMO, 2 * np.cosh(2 * np.pi * 0.7), restrict_to_strip=False).total_count == 2


def test_vanishing_raises():
    with pytest.raises(DegenerateInputError):
        laurent_roots(FourierPotential.constant(2.0), 2.0)


def test_count_conventions():
    zs = laurent_roots(AMO, 2 * np.cosh(2 * np.pi * 0.1))
    t = float(np.max(np.abs(zs.heights())))
    assert n_closed(zs, t) == 2
    assert n_open(zs, t) <= 1
    assert n_open(zs, float(np.min(np.abs(zs.heights())))) == 0
    top = float(np.max(zs.heights()))
    assert count_zeros(zs, 0.0, top, closed_lo=True, closed_hi=False) == 0
    assert count_zeros(zs, 0.0, top) == 1
    with pytest.raises(ValueError):
        count_zeros(zs, 0.2, 0.1)


def test_zero_free_part_divides_exactly():
    mu = 2 * np.cosh(2 * np.pi * 0.05)
    g = zero_free_part(AMO, mu, 0.2)
    assert g.n_inner == 2
    z = np.array([0.3 + 0.1j, 0.71 - 0.2j, 0.5 + 0.05j])
    w = np.exp(2j * np.pi * z)
    zs = laurent_roots(AMO, mu, restrict_to_strip=False)
    prod = np.ones_like(w)
    for zk, m in zs.all_zeros:
        prod = prod * (w - np.exp(2j * np.pi * zk)) ** m
    want = (evaluate(AMO, z) - mu) / prod * NORMALIZATION**2
    assert np.allclose(g(z), want, rtol=1e-10)
    # finite at the zero itself
    assert np.isfinite(g(np.array([0.05j])))[0]
    with pytest.raises(ContractError):
        zero_free_part(AMO, mu, 0.3)


def test_beta_hat_amo_matches_closed_form():
    hq = hat_quantities(AMO, 0.2)
    assert hq.N_hat == 2
    assert hq.beta_hat == pytest.approx(amo_beta_hat(0.2), rel=1e-6)
    assert hq.beta_hat == pytest.approx(G["amo_beta_hat_rho02"], rel=1e-12)
    # the scan can only overshoot the infimum
    assert hq.beta_hat >= amo_beta_hat(0.2) - 1e-9


def test_hat_quantities_bichromatic_golden():
    hq = hat_quantities(preset("bichromatic"), 0.2)
    assert hq.N_hat == G["bichromatic_N_rho02"]
    assert hq.beta_hat == pytest.approx(G["bichromatic_beta_hat_rho02"], rel=1e-10)


def test_hat_quantities_rejects_constant():
    with pytest.raises(DegenerateInputError):
        hat_quantities(FourierPotential.constant(5.0), 0.2)


def test_beta_positive_and_strip_minimum():
    assert beta(AMO, 0.0, 0.2) > 0
    sm = strip_minimum(lambda z: z - 0.5 - 0.1j, 0.2, nx=64, ny=9)
    assert sm.value < 1e-6
    assert abs(sm.argmin - (0.5 + 0.1j)) < 1e-5


def test_winding_basic():
    assert winding_number(lambda x: np.exp(2j * np.pi * 3 * x)) == 3
    assert winding_number(lambda x: np.exp(-2j * np.pi * x) + 0.1) == -1
    with pytest.raises(IllConditionedError):
        winding_number(lambda x: np.exp(2j * np.pi * x) - 1)


def test_line_winding_amo():
    # negative y means |w| > 1, where the w term dominates
    assert line_winding(AMO, 0.0, -0.4) == 1
    assert line_winding(AMO, 0.0, 0.4) == -1
    assert strip_count_by_winding(AMO, 0.0, 0.1) == 2


def test_uniform_margin_shape():
    out = uniform_margin(AMO, [0.0, 10.0], 0.0, 0.1, ny=5, nx=128)
    assert out.shape == (2,)
    assert out[1] > out[0]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-2.0, 2.0))
def test_roots_match_mpmath(seed, mu):
    c = random_trig(np.random.default_rng(seed))
    p = FourierPotential(c, 0.5)
    zs = laurent_roots(p, mu, restrict_to_strip=False)
    got = [z for z, m in zs.all_zeros for _ in range(m)]
    want = roots_z(c, mu)
    # clustered multiple roots are only located to about sqrt(eps)
    _match(got, want, 1e-5)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.02, 0.45))
def test_count_agrees_with_argument_principle(seed, eps):
    p = FourierPotential(random_trig(np.random.default_rng(seed)), 0.5)
    zs = laurent_roots(p, 0.0, restrict_to_strip=False)
    if np.min(np.abs(np.abs(zs.heights()) - eps)) < 1e-3:
        return
    assert strip_count_by_winding(p, 0.0, eps) == n_closed(zs, eps)
