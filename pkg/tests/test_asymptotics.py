import numpy as np
import pytest

from qpcocycle import FourierPotential, preset
from qpcocycle.asymptotics import (
    acceleration_bound_check,
    duarte_klein_bound,
    find_working_height,
    classify,
    real_zeros,
    stratified_constant,
    stratum_quantities,
    sup_strip_acceleration,
    theorem_constants,
    torus_zero_free_part,
    verify_asymptotics,
    verify_stratified,
    zero_set_geometry,
)
from qpcocycle.cocycle import GOLDEN
from qpcocycle.constants import K1, K2
from qpcocycle.errors import ContractError, DegenerateInputError, WorkingHeightError
from qpcocycle.potential import evaluate

from oracles import amo_beta_hat, load_goldens

AMO = preset("amo")
BI = preset("bichromatic")
G = load_goldens()


@pytest.fixture(scope="module")
def amo_consts():
    return theorem_constants(AMO, 0.2)


def test_theorem_constants_amo(amo_consts):
    tc = amo_consts
    assert tc.N == 2 and tc.lambda0 == 32.0
    assert tc.K1 == K1 and tc.K2 == K2
    assert tc.beta_hat == pytest.approx(amo_beta_hat(0.2), rel=1e-6)
    assert tc.C == pytest.approx(G["amo_C_rho02"], rel=1e-12)
    want_C = 2 * 4 / K1 * tc.beta_hat ** (-0.5) * np.pi + K2
    assert tc.C == pytest.approx(want_C, rel=1e-14)
    assert tc.exponent == pytest.approx(0.4)
    assert tc.delta_used(40.0) == 0.2 and tc.delta_of(40.0) > 0.2


def test_theorem_constants_degenerate():
    with pytest.raises(DegenerateInputError):
        theorem_constants(FourierPotential.constant(5.0), 0.2)
    with pytest.raises(ContractError):
        theorem_constants(AMO, 0.3)


def test_duarte_klein_monotone_and_holds(amo_consts):
    a = duarte_klein_bound(AMO, 0.2, 0.05, consts=amo_consts)
    b = duarte_klein_bound(AMO, 0.2, 0.1, consts=amo_consts)
    assert a.bound < b.bound
    assert a.verified and b.verified and a.violations == 0
    assert len(a.mus) == 101


def test_duarte_klein_constant_skipped():
    r = duarte_klein_bound(FourierPotential.constant(5.0), 0.2, 0.05)
    assert r.degenerate and r.verified is None


def test_working_height_amo(amo_consts):
    wh = find_working_height(AMO, 100.0, 0.0, amo_consts)
    lo, hi = wh.band
    assert 0.1 <= lo < hi <= 0.2
    assert wh.margin > 100 ** 0.2
    # closed form of min_x |2 lam cos(2 pi (x + i y))|
    assert wh.margin == pytest.approx(200 * np.sinh(2 * np.pi * wh.y_star), rel=1e-9)


def test_working_height_tangency(amo_consts):
    wh = find_working_height(AMO, 100.0, 200.0, amo_consts)
    assert wh.margin > 2 and wh.band[0] < wh.band[1]


def test_working_height_contract(amo_consts):
    with pytest.raises(ContractError):
        find_working_height(AMO, 10.0, 0.0, amo_consts)
    with pytest.raises(WorkingHeightError):
        find_working_height(AMO, 0.1, 0.0, delta=0.01)


def test_classify():
    assert classify(0.1, 1.0, 0.01) == "pass"
    assert classify(2.0, 1.0, 0.01) == "fail"
    assert classify(0.0, 1e-6, 1e-6) == "inconclusive"


def test_verify_asymptotics_contract(amo_consts):
    with pytest.raises(ContractError):
        verify_asymptotics(AMO, GOLDEN, 10.0, 0.0, consts=amo_consts)


def test_verify_asymptotics_lam40(amo_consts):
    cert = verify_asymptotics(AMO, GOLDEN, 40.0, 0.0, consts=amo_consts)
    assert cert.predicted == pytest.approx(np.log(40.0), abs=1e-12)
    assert cert.passed
    assert all(cert.checks.values()), cert.checks
    assert cert.delta_clamped
    assert set(cert.row()) == {"lambda", "E", "predicted", "measured", "residual", "bound", "status"}


def test_predicted_off_range(amo_consts):
    cert = verify_asymptotics(AMO, GOLDEN, 40.0, 120.0, consts=amo_consts, n=2000, M=32, cross_checks=False)
    assert cert.predicted == pytest.approx(np.log(40.0) + np.arccosh(1.5), abs=1e-12)


def test_acceleration_bound(amo_consts):
    r = acceleration_bound_check(AMO, 0.2, GOLDEN, 100.0, 0.0, n=3000, M=64, consts=amo_consts)
    assert r.measured == 1 and r.sup_omega == 1 and r.half_N == 1 and r.ok
    r = acceleration_bound_check(AMO, 0.2, GOLDEN, 100.0, 300.0, n=3000, M=64, consts=amo_consts)
    assert r.measured == 0 and r.ok
    r = acceleration_bound_check(FourierPotential.constant(0.0), 0.2)
    assert r.skipped and r.ok


def test_sup_strip_acceleration_step():
    # zeros of 2cos - 3 at heights +-0.1532
    assert sup_strip_acceleration(AMO, 3.0, 0.1) == 0
    assert sup_strip_acceleration(AMO, 3.0, 0.2) == 1


def test_torus_zero_free_part_factorization():
    g, zeros = torus_zero_free_part(BI)
    z = np.array([0.1 + 0.2j, 0.55 - 0.3j, 0.9 + 0.01j])
    prod = np.ones_like(z)
    for x, m in zeros:
        prod = prod * (np.sin(np.pi * (z - x)) / np.pi) ** m
    assert np.allclose(g(z) * prod, evaluate(BI, z), rtol=1e-10)


def test_zero_geometry_presets():
    geo = zero_set_geometry(AMO)
    assert geo.applicable and geo.N == 2
    assert geo.R == pytest.approx(G["amo_R"], rel=1e-10)
    assert [x for x, _ in geo.zeros] == pytest.approx([0.25, 0.75], abs=1e-12)
    geo_b = zero_set_geometry(BI)
    assert geo_b.R == pytest.approx(G["bichromatic_R"], rel=1e-8)
    for d in (geo.R / 2, geo.R):
        lhs, eta, ok = geo.verify(d)
        assert ok and lhs >= eta
    with pytest.raises(ContractError):
        geo.verify(2 * geo.R)


def test_zero_geometry_inapplicable():
    geo = zero_set_geometry(AMO.shifted(3.0))
    assert not geo.applicable
    with pytest.raises(ContractError):
        geo.eta(0.01)
    with pytest.raises(DegenerateInputError):
        zero_set_geometry(FourierPotential.constant(0.0))


def test_real_zeros_amo():
    assert real_zeros(AMO) == [(pytest.approx(0.25), 1), (pytest.approx(0.75), 1)]


@pytest.fixture(scope="module")
def amo_stratum():
    return stratum_quantities(AMO, -1.0, 1.0)


def test_stratum_quantities(amo_stratum):
    st = amo_stratum
    assert st.N0 == 2 and st.counts == (2,) * 11
    assert st.tau0 == pytest.approx(2 * np.sqrt(3) * np.pi, rel=1e-9)
    assert st.R0 == pytest.approx(G["amo_stratum_R0"], rel=1e-9)
    assert st.R0_recomputed() == pytest.approx(st.R0, rel=1e-14)
    assert st.lambda_tilde0 == pytest.approx(G["amo_stratum_lambda_tilde0"], rel=1e-8)
    assert st.lambda_tilde0_corrected == pytest.approx(G["amo_stratum_lambda_tilde0_corrected"], rel=1e-8)
    assert st.lambda_tilde0_recomputed() == pytest.approx(st.lambda_tilde0, rel=1e-12)


def test_stratum_contracts():
    with pytest.raises(ContractError):
        stratum_quantities(AMO, 0.0, 2.0)
    with pytest.raises(ContractError):
        stratum_quantities(AMO, 1.0, -1.0)
    with pytest.raises(ContractError):
        stratum_quantities(AMO, -1.0, 2.5)


def test_stratified_contracts(amo_stratum):
    with pytest.raises(ContractError):
        verify_stratified(AMO, GOLDEN, 200.0, -1.0, 1.0, [0.0], report=amo_stratum)
    with pytest.raises(ContractError):
        verify_stratified(AMO, GOLDEN, 200.0, -1.0, 1.0, [300.0], enforce_threshold=False, report=amo_stratum)


def test_stratified_constant():
    assert stratified_constant(2, 4 * np.pi**2) == pytest.approx(4 * np.pi + K2 * 16 / (16 * np.pi**4))


def test_stratified_run_small(amo_stratum):
    rep = verify_stratified(
        AMO, GOLDEN, 200.0, -1.0, 1.0, [0.0], n=2000, M=64, enforce_threshold=False, report=amo_stratum
    )
    assert rep.threshold_ok is False
    assert rep.band_ok
    r = rep.results[0]
    assert r.status == "pass" and r.omega0 == 1 and r.omega_ok
    assert not rep.ok
