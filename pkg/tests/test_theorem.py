from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from nlmaxwell.theorem import (
    MediumParams,
    ParameterError,
    derive_exponents,
    exponents_report,
    f_of_t,
    front_bound,
    horizon_T1,
    validate_params,
)

P1 = MediumParams(N=2, m=0, n=2, p=2)
P3 = MediumParams(N=3, m=0, n=2, p=2)


def test_p1_admissible_bounds():
    rep = validate_params(P1)
    assert rep.admissible
    assert "max{-2, -1, -1} = -1" in rep.check("m_lower").inequality
    assert "p(n-2)+1 = 1" in rep.check("m_upper").inequality


def test_p1_exponents_exact():
    e = derive_exponents(P1)
    half = F(1, 2)
    for name in ("beta1", "beta2", "k1", "k2", "theta", "kappa", "alpha_large"):
        assert getattr(e, name) == half, name
        assert isinstance(getattr(e, name), F)
    assert e.gamma == 3
    assert e.beta == F(9, 4)
    assert e.T1 == F(1, 4)


def test_p3_exponents_exact():
    e = derive_exponents(P3)
    assert e.beta1 == e.beta2 == F(2, 5)
    assert e.k1 == e.k2 == e.theta == F(3, 5)
    assert e.kappa == e.alpha_large == F(2, 5)
    assert e.gamma == 5
    assert e.T1 == F(1, 8)


def test_zero_initial_energy_horizon():
    e = derive_exponents(MediumParams(N=2, m=0, n=2, p=2, w0_l1=0))
    assert e.T1 == 0 and e.t_star == 0


def test_upper_bound_boundary_rejected():
    rep = validate_params(MediumParams(N=2, m=1, n=2, p=2))
    assert not rep.admissible
    assert [c.name for c in rep.failed()] == ["m_upper"]
    with pytest.raises(ParameterError):
        derive_exponents(MediumParams(N=2, m=1, n=2, p=2))


def test_k2_equal_one_flagged():
    rep = validate_params(MediumParams(N=2, m=-1, n=1.5, p=2))
    assert rep.check("m_lower").passed and rep.check("m_upper").passed
    assert not rep.check("k2_lt_1").passed
    assert not rep.admissible
    assert any("k2" in w for w in rep.warnings)


def test_invalid_dimension():
    with pytest.raises(ParameterError):
        MediumParams(N=4, m=0, n=2, p=2)


def test_non_finite_rejected_with_check():
    rep = validate_params(MediumParams(N=2, m=float("nan"), n=2, p=2))
    assert not rep.admissible
    assert not rep.check("finite").passed


def test_gamma_one_singular():
    with pytest.raises(ParameterError, match="singular at gamma = 1"):
        horizon_T1(F(1), F(1))


def test_front_bound_examples():
    e = derive_exponents(P1)
    assert front_bound(e, 0.0) == 0.0
    assert front_bound(e, 1.0, K=3.0) == 3.0
    assert front_bound(e, 0.25) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError):
        front_bound(e, -1.0)


def test_f_of_t_examples():
    e = derive_exponents(P1)
    assert f_of_t(e, 1.0) == 1.0
    assert f_of_t(e, 0.25) == pytest.approx(0.25**0.75, rel=1e-15)
    assert f_of_t(e, 4.0) == pytest.approx(2.8284271247461903, rel=1e-14)


def test_report_contains_kappa():
    rep = exponents_report(P1)
    assert rep["kappa.exact"] == "1/2"
    assert rep["gamma.exact"] == "3"
    assert rep["param.N"] == "2"


# hypothesis: admissible rational media
rationals = st.fractions(min_value=-2, max_value=3, max_denominator=8)


@settings(max_examples=200, deadline=None)
@given(N=st.sampled_from([2, 3]), m=rationals, n=st.fractions(min_value=F(9, 8), max_value=3, max_denominator=8),
       p=st.fractions(min_value=F(9, 8), max_value=4, max_denominator=8))
def test_admissible_invariants(N, m, n, p):
    params = MediumParams(N=N, m=m, n=n, p=p)
    if not validate_params(params).admissible:
        return
    try:
        e = derive_exponents(params)
    except ParameterError:
        return  # gamma = 1
    assert e.k1 < 1 and e.k2 < 1
    assert e.beta == (1 + e.beta1) * (1 + e.beta2)
    assert e.k1 == F(N) / p * e.beta1
    assert isinstance(e.kappa, F) and isinstance(e.gamma, F)
    # continuity of the two front branches at t = 1 and monotonicity in t
    assert front_bound(e, 1.0, 2.0) == 2.0
    ts = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0]
    vals = [front_bound(e, t) for t in ts]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert front_bound(e, 0.3, 4.0) == pytest.approx(4.0 * front_bound(e, 0.3))


@settings(max_examples=50, deadline=None)
@given(gamma=st.fractions(min_value=F(1, 10), max_value=6, max_denominator=10).filter(lambda g: g != 1),
       w=st.fractions(min_value=F(1, 10), max_value=10, max_denominator=10))
def test_T1_scaling(gamma, w):
    ratio = horizon_T1(gamma, 2 * w) / horizon_T1(gamma, w)
    expect = 2.0 ** float(1 - gamma) if gamma < 1 else 2.0 ** float(gamma - 1)
    assert float(ratio) == pytest.approx(expect, rel=1e-12)
