import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from nlmaxwell.lemmas import (
    BihariSetting,
    BlowUpError,
    DecreasingFunctionProbe,
    GNSetting,
    LemmaError,
    bihari_bound,
    blow_up_time,
    doubling_time_scaling,
    gn_ratio_check,
    gn_theta,
    run_lemma_suite,
    stampacchia_check,
)
from nlmaxwell.theorem import MediumParams, derive_exponents, horizon_T1

GRID = np.linspace(0.0, 4.0, 4001)


def test_stampacchia_piecewise_linear():
    rep = stampacchia_check(DecreasingFunctionProbe(lambda s: np.maximum(0.0, 1.0 - s), 0.0, 0.5), GRID)
    assert rep.relation_holds_on_grid
    assert rep.vanishing_bound == 2.0
    assert rep.measured_zero == 1.0
    assert rep.vanishes_beyond_bound
    assert rep.iteration_limit == 1.0 and rep.iterations == 1
    assert rep.passed


def test_stampacchia_zero_function():
    rep = stampacchia_check(DecreasingFunctionProbe(lambda s: 0.0 * s, 0.0, 0.5), GRID)
    assert rep.relation_holds_on_grid and rep.measured_zero == 0.0 and rep.vanishing_bound == 0.0


def test_stampacchia_exponential_negative_control():
    rep = stampacchia_check(DecreasingFunctionProbe(lambda s: np.exp(-s), 0.0, 0.5), GRID)
    assert not rep.relation_holds_on_grid
    # relation fails once exp(-f(s)) > 1/2, i.e. s > -ln(ln 2)
    assert rep.first_violation == pytest.approx(-math.log(math.log(2.0)), abs=2e-3)
    assert rep.measured_zero is None


def test_stampacchia_rejects_increasing_probe():
    with pytest.raises(LemmaError, match="nonincreasing"):
        stampacchia_check(DecreasingFunctionProbe(lambda s: s, 0.0, 0.5), GRID)


def test_stampacchia_grid_coverage():
    with pytest.raises(LemmaError, match="cover"):
        stampacchia_check(DecreasingFunctionProbe(lambda s: np.maximum(0.0, 1.0 - s), 0.0, 0.5), np.linspace(0, 3, 31))


def test_stampacchia_sampled_probe():
    s = np.linspace(0, 5, 11)
    probe = DecreasingFunctionProbe((s, np.maximum(0.0, 1.0 - s)), 0.0, 0.5)
    assert stampacchia_check(probe, GRID).passed


@settings(max_examples=60, deadline=None)
@given(L=st.floats(0.1, 1.5), eps=st.floats(0.05, 0.95), s0=st.floats(-1.0, 1.0))
def test_stampacchia_zero_within_bound(L, eps, s0):
    # f(s) = max(0, L - (s - s0)) satisfies the relation for every eps
    probe = DecreasingFunctionProbe(lambda s: np.maximum(0.0, L - (s - s0)), s0, eps)
    grid = np.linspace(s0, s0 + 2 * L / (1 - eps) + 0.01, 3001)
    rep = stampacchia_check(probe, grid)
    if rep.relation_holds_on_grid:
        assert rep.measured_zero <= rep.vanishing_bound + (grid[1] - grid[0])


def test_gn_theta_examples():
    assert gn_theta(GNSetting(2, 1, 2, 1)).theta == F(1, 3)
    assert gn_theta(GNSetting(2, 1, 2, 2)).theta == F(1, 2)
    deg = gn_theta(GNSetting(2, 2, 2, 1))
    assert deg.theta == 0 and deg.boundary


def test_gn_theta_outside_hypotheses():
    with pytest.raises(LemmaError, match="outside lemma hypotheses"):
        # a large d with a high dimension pushes theta to 1 or above
        gn_theta(GNSetting(F(100), F(1, 2), F(11, 10), 3))


def test_p1_gn_theta_matches_calculator():
    p, n, m, N = 2, 2, 0, 2
    th = gn_theta(GNSetting(F(n * p, m + p), F(p, m + p), F(p), N)).theta
    assert th == derive_exponents(MediumParams(N=N, m=m, n=n, p=p)).theta


@settings(max_examples=60, deadline=None)
@given(a=st.fractions(F(11, 10), 6, max_denominator=10), b=st.fractions(F(1, 2), 1, max_denominator=10),
       d=st.fractions(F(11, 10), 6, max_denominator=10), N=st.sampled_from([1, 2, 3]), lam=st.integers(2, 5))
def test_gn_theta_exact_and_scale_free(a, b, d, N, lam):
    try:
        th = gn_theta(GNSetting(a, b, d, N)).theta
    except LemmaError:
        return
    assert isinstance(th, F)
    # dimension balance: -N/a = theta (1 - N/d) - (1 - theta) N/b
    assert -F(N) / a == th * (1 - F(N) / d) - (1 - th) * F(N) / b


def test_gn_dilation_invariance_gaussian():
    rep = gn_ratio_check(GNSetting(2, 1, 2, 1), {"gaussian": lambda x: np.exp(-x * x)}, points=2**14)
    assert rep.dilation_error["gaussian"] <= 1e-6
    assert rep.passed()


def test_gn_two_bumps_finite():
    rep = gn_ratio_check(
        GNSetting(3, F(3, 2), 2, 1),
        {
            "cos4": lambda x: np.where(np.abs(x) < 1, np.cos(0.5 * np.pi * x) ** 4, 0.0),
            "sech": lambda x: 1.0 / np.cosh(x) ** 2,
        },
        dilations=(0.5, 2.0),
    )
    assert all(math.isfinite(r) and r > 0 for r in rep.ratios.values())
    assert math.isfinite(rep.empirical_d1)


def test_gn_error_paths():
    with pytest.raises(LemmaError, match="vanishes"):
        gn_ratio_check(GNSetting(2, 1, 2, 1), {"zero": lambda x: 0 * x})
    with pytest.raises(LemmaError, match="decay"):
        gn_ratio_check(GNSetting(2, 1, 2, 1), {"flat": lambda x: 1.0 + 0 * x})


def test_bihari_square():
    s = BihariSetting(k=1.0, m=1.0, power=2.0)
    assert bihari_bound(s, 0.5) == pytest.approx(2.0, abs=1e-8)
    generic = BihariSetting(k=1.0, m=1.0, g=lambda v: v * v)
    assert bihari_bound(generic, 0.5) == pytest.approx(2.0, abs=1e-8)


def test_bihari_no_growth_and_linear():
    assert bihari_bound(BihariSetting(k=3.0, m=0.0, power=2.0), 7.0) == 3.0
    assert bihari_bound(BihariSetting(k=1.0, m=1.0, power=1.0), 1.0) == pytest.approx(math.e, rel=1e-14)


def test_bihari_blow_up():
    s = BihariSetting(k=1.0, m=1.0, power=2.0)
    assert blow_up_time(s) == pytest.approx(1.0)
    with pytest.raises(BlowUpError, match="ceases to exist") as exc:
        bihari_bound(s, 1.5)
    assert exc.value.t_star == pytest.approx(1.0)
    generic = BihariSetting(k=1.0, m=1.0, g=lambda v: v**3, h=lambda t: 2 * t)
    # G(inf) - G(1) = 1/2, int_0^t 2 tau = t^2 -> t* = sqrt(1/2)
    assert blow_up_time(generic) == pytest.approx(math.sqrt(0.5), rel=1e-8)


@pytest.mark.parametrize(
    "setting",
    [
        BihariSetting(k=1.0, m=1.0, power=2.0),
        BihariSetting(k=0.5, m=2.0, power=1.5, h=lambda t: 1.0 + np.sin(t) ** 2),
        BihariSetting(k=1.0, m=0.7, g=lambda v: v + np.sqrt(v), h=lambda t: np.exp(-t)),
    ],
)
def test_bihari_dominates_ode(setting):
    g = setting.g_value
    h = setting.h if callable(setting.h) else (lambda t, c=float(setting.h): c)
    ts = np.linspace(0, 0.45, 19)
    sol = solve_ivp(lambda t, v: [setting.m * h(t) * g(v[0])], (0, ts[-1]), [setting.k], t_eval=ts,
                    rtol=1e-12, atol=1e-14, method="DOP853")
    bound = np.array([bihari_bound(setting, t) for t in ts])
    assert np.all(bound >= sol.y[0] - 1e-8)


def test_doubling_time_scaling_matches_horizon():
    gamma = derive_exponents(MediumParams(N=2, m=0, n=2, p=2)).gamma
    amps = (0.5, 1.0, 2.0)
    _, slope = doubling_time_scaling(float(gamma), amps)
    assert slope == pytest.approx(1 - float(gamma), abs=1e-9)
    T1 = [float(horizon_T1(gamma, F(a).limit_denominator())) for a in amps]
    t1_slope = np.polyfit(np.log(amps), np.log(T1), 1)[0]
    # same power of the initial energy up to the sign convention of the horizon branch
    assert abs(t1_slope) == pytest.approx(abs(slope), abs=1e-9)


def test_suite_passes():
    res = run_lemma_suite(seed=11)
    assert res.passed
    keys = [k for k, _ in res.lines]
    assert "gn.dilation.mixture" in keys
