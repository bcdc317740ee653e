import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpcocycle import K1, K2, K3, rederive_k_constants
from qpcocycle.constants import (
    CASE1_PUBLISHED,
    K2_PUBLISHED,
    K3_PUBLISHED,
    K_SWITCH,
    MATCH_TOL,
    splitting_bounds,
    splitting_sigma,
)

from oracles import k_constants_mp

MP = k_constants_mp()


def test_k1_high_precision():
    assert K1 == pytest.approx(MP["K1"], rel=1e-14)


def test_closed_forms_match_mpmath():
    assert K2 == pytest.approx(MP["d_minus"], rel=1e-12)
    assert K3 == pytest.approx(MP["d_plus"], rel=1e-12)


def test_rederivation_matches_published():
    kc = rederive_k_constants()
    assert abs(kc.K2 - K2_PUBLISHED) <= MATCH_TOL
    assert abs(kc.K3 - K3_PUBLISHED) <= MATCH_TOL
    assert abs(kc.case1_c - CASE1_PUBLISHED) <= MATCH_TOL
    assert kc.case1_c == pytest.approx(MP["c"], abs=1e-9)
    assert kc.argmax_case1 == pytest.approx(K_SWITCH, abs=1e-3)
    assert kc.sharp_lower <= kc.K2 and kc.sharp_upper <= kc.K3


@given(st.floats(2.0001, 1e4))
def test_bounds_bracket_zero_and_decay(m):
    lo, up = splitting_bounds(m)
    assert lo <= 0 <= up
    assert -lo <= K2 / m**2 * (1 + 1e-9)
    assert up <= K3 / m**2 * (1 + 1e-9)
    assert 0 < splitting_sigma(m) <= 1


def test_sigma_cases():
    assert splitting_sigma(2.5) == pytest.approx(1.0)
    assert splitting_sigma(10.0) == pytest.approx(9 / 80)
    assert 1e6 * splitting_sigma(1e6) == pytest.approx(1.0, rel=1e-5)
    assert np.isfinite(splitting_sigma(K_SWITCH))
