import math

import numpy as np
import pytest

from nlmaxwell.constitutive import ConstitutiveLaw
from nlmaxwell.diagnostics import (
    SENTINEL,
    CutoffSpec,
    DiagnosticsError,
    FrontTrace,
    HorizonError,
    energy_density,
    fit_power_law,
    front_position,
    local_functionals,
    power_envelope,
    proof_replay,
    weak_energy_residual,
    weak_energy_terms,
)
from nlmaxwell.solver import FieldState, GridSpec, InitialData, Scenario, Trajectory, run
from nlmaxwell.theorem import MediumParams, derive_exponents

P1_EXPS = derive_exponents(MediumParams(N=2, m=0, n=2, p=2))
LINEAR = ConstitutiveLaw("constant_test", a_const=0.0, b_const=1.0)


@pytest.fixture(scope="module")
def p1_run():
    g = GridSpec(1, (-4.0,), (4.0,), (1600,))
    ini = InitialData(center=(-1.05,), radius=1.0, amplitude=0.8165, mode="E_plus_H_right_mover")
    sc = Scenario(g, ConstitutiveLaw(m=0, n=2, p=2, d1=1.0), ini, 0.2, output_times=tuple(np.linspace(0, 0.2, 101)))
    return run(sc)


def _zero_traj(g):
    sc = Scenario(g, ConstitutiveLaw(), InitialData(center=(-2.0,), radius=1.0, amplitude=0.0), 0.1,
                  output_times=(0.05,))
    return run(sc)


def test_energy_density_pointwise():
    g = GridSpec(1, (0.0,), (1.0,), (4,))
    s = FieldState.zeros(g)
    s.e[:] = 3.0
    s.h[0][:] = 4.0
    np.testing.assert_allclose(energy_density(s), 25.0)
    assert not np.any(energy_density(FieldState.zeros(g)))


def test_right_mover_energy_is_twice_profile_squared():
    g = GridSpec(1, (-4.0,), (4.0,), (3200,))
    ini = InitialData(center=(-2.0,), radius=1.0, mode="E_plus_H_right_mover")
    from nlmaxwell.solver import init_state

    w = energy_density(init_state(g, ini))
    exact = 2 * ini.profile(np.abs(g.centers(0) + 2.0)) ** 2
    assert np.max(np.abs(w - exact)) < 10 * g.dx[0] ** 2


def test_front_position_table():
    x = np.array([0.0, 0.1, 0.2, 0.3, 0.4])
    w = np.array([1.0, 1.0, 0.5, 1e-15, 0.0])
    assert front_position(w, x, 1e-10) == 0.2
    assert front_position(np.zeros(5), x, 1e-10) == SENTINEL



def test_front_position_mirror():
    x = np.linspace(-0.4, 0.4, 9)
    w = np.array([0.0, 0.0, 1e-3, 1.0, 2.0, 0.5, 1e-12, 0.0, 0.0])
    left_edge = float(np.min(x[w > 1e-10]))
    assert front_position(w[::-1], x, 1e-10) == pytest.approx(-left_edge, abs=1e-15)


def test_zero_trajectory_everything_vanishes():
    g = GridSpec(1, (-4.0,), (4.0,), (200,))
    traj, _ = _zero_traj(g)
    assert weak_energy_residual(traj, CutoffSpec(-1.0, 0.5)) == 0.0
    rep = local_functionals(traj, np.linspace(-2, 2, 5), 0.5, P1_EXPS, 0, 2, 2)
    assert not np.any(rep.A) and not np.any(rep.B) and not np.any(rep.C) and not np.any(rep.R)
    replay = proof_replay(traj, 0.1, 0.5, P1_EXPS, 0, 2, 2, s_grid=np.linspace(0, 2, 21), s0=0.0)
    assert not np.any(replay.delta_T) and replay.predicted_vanishing == 0.0


def test_residual_needs_two_snapshots():
    g = GridSpec(1, (-4.0,), (4.0,), (100,))
    traj, _ = run(Scenario(g, LINEAR, InitialData(center=(-2.0,), radius=1.0), 0.0))
    with pytest.raises(DiagnosticsError):
        weak_energy_residual(traj)


def test_cutoff_profile():
    c = CutoffSpec(0.0, 2.0)
    x = np.linspace(-1, 3, 401)
    assert c(np.array([-1.0]))[0] == 0.0 and c(np.array([3.0]))[0] == 1.0
    assert np.max(c.gradient(x)) == pytest.approx(c.gradient_bound)
    with pytest.raises(DiagnosticsError):
        CutoffSpec(0.0, 0.0)


def test_linear_residual_is_quadrature_error():
    res = []
    for cells in (400, 800):
        g = GridSpec(1, (-5.0,), (3.0,), (cells,))
        ini = InitialData(shape="gaussian_truncated", center=(-1.5,), radius=1.0, mode="E_plus_H_right_mover")
        traj, tr = run(Scenario(g, LINEAR, ini, 0.5, output_times=tuple(np.linspace(0, 0.5, 51))))
        res.append(abs(weak_energy_residual(traj, CutoffSpec(-1.5, 1.0))) / (0.5 * tr.l1[0]))
    assert res[0] < 1e-4
    assert res[1] < res[0]


def test_p1_residuals(p1_run):
    traj, tr = p1_run
    half = 0.5 * tr.l1[0]
    # no cut-off and no time weight
    assert weak_energy_terms(traj, None, time_decay=False).residual / half <= 1e-3
    assert weak_energy_residual(traj, CutoffSpec(-1.05, 1.0)) / half <= 1e-3


def test_l1_bounded_on_p1(p1_run):
    _, tr = p1_run
    assert np.max(tr.l1) <= 2 * tr.l1[0]
    assert np.all(np.diff(tr.l1) <= 1e-12)


def test_front_monotone_up_to_one_cell(p1_run):
    traj, tr = p1_run
    assert np.all(np.diff(tr.front_x) >= -traj.grid.dx[0] - 1e-12)


def test_local_functionals_monotone(p1_run):
    traj, _ = p1_run
    s = np.linspace(-2.0, 1.0, 31)
    rep = local_functionals(traj, s, 0.1, P1_EXPS, 0, 2, 2)
    for arr in (rep.A, rep.B, rep.C):
        assert np.all(np.diff(arr) <= 1e-15)
    inside = (s > -2.0) & (s < -0.1)
    assert np.all(np.diff(rep.A[inside]) < 0)
    assert rep.A[-1] == 0.0 and rep.C[-1] == 0.0


def test_local_functionals_grid_checked(p1_run):
    traj, _ = p1_run
    with pytest.raises(DiagnosticsError):
        local_functionals(traj, np.array([-5.0, 0.0]), 0.1, P1_EXPS, 0, 2, 2)


def test_replay_prediction_dominates_front(p1_run):
    traj, _ = p1_run
    s = np.linspace(-2.0, 2.0, 81)
    rep = proof_replay(traj, 0.1, 0.5, P1_EXPS, 0, 2, 2, s_grid=s, s0=0.0)
    assert rep.measured_front <= rep.predicted_vanishing
    rep2 = proof_replay(traj, 0.1, 0.9, P1_EXPS, 0, 2, 2, s_grid=s, s0=0.0)
    assert rep2.predicted_vanishing >= rep.predicted_vanishing


def test_replay_horizon_error():
    g = GridSpec(1, (-4.0,), (4.0,), (400,))
    ini = InitialData(shape="gaussian_truncated", center=(-1.5,), radius=1.0, mode="E_plus_H_right_mover")
    traj, _ = run(Scenario(g, LINEAR, ini, 0.5, output_times=(0.25,)))
    with pytest.raises(HorizonError, match="verifiable horizon"):
        proof_replay(traj, 0.5, 0.5, P1_EXPS, 0, 2, 2, s_grid=np.linspace(-3, 2, 51), s0=-3.0)


def _synthetic(f):
    t = np.linspace(0, 1, 201)
    return FrontTrace(t, f(t), np.ones_like(t))


def test_fit_power_law_round_trip():
    fit = fit_power_law(_synthetic(lambda t: 2 * np.sqrt(t)), (0.02, 0.2))
    assert fit.exponent == pytest.approx(0.5, rel=1e-6)
    assert fit.amplitude == pytest.approx(2.0, rel=1e-6)
    assert fit.residual < 1e-10
    assert fit_power_law(_synthetic(lambda t: t), (0.02, 0.2)).exponent == pytest.approx(1.0, rel=1e-6)


def test_fit_power_law_errors():
    with pytest.raises(DiagnosticsError):
        fit_power_law(_synthetic(lambda t: 0 * t), (0.02, 0.2))
    with pytest.raises(DiagnosticsError):
        fit_power_law(_synthetic(lambda t: t), (0.5, 0.51))


def test_power_envelope_synthetic():
    assert power_envelope(_synthetic(lambda t: 3 * np.sqrt(t)), (0.02, 0.2), 0.5).max_violation == pytest.approx(0, abs=1e-12)
    env = power_envelope(_synthetic(lambda t: t), (0.02, 0.2), 0.5)
    assert env.max_violation > 0.05


def test_trace_validation():
    with pytest.raises(DiagnosticsError):
        FrontTrace([0.0, 0.0], [1.0, 1.0], [1.0, 1.0])
