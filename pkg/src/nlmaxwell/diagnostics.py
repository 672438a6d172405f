"""Energy diagnostics on simulated trajectories.

Every integral is a trapezoidal rule in space (over cell centres) and in time
(over the snapshot times of the trajectory), so the accuracy of the space-time
integrals is set by how densely the trajectory was sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .solver import FieldState, Trajectory, _avg, cell_energy, curl_e, curl_h
from .theorem import DerivedExponents, f_of_t

SENTINEL = -math.inf


class DiagnosticsError(ValueError):
    pass


class HorizonError(DiagnosticsError):
    """The replayed functional relation has no admissible starting point."""


@dataclass
class FrontTrace:
    times: np.ndarray
    front_x: np.ndarray
    l1: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.front_x = np.asarray(self.front_x, dtype=float)
        self.l1 = np.asarray(self.l1, dtype=float)
        if not (len(self.times) == len(self.front_x) == len(self.l1)):
            raise DiagnosticsError("trace arrays must have equal length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise DiagnosticsError("trace times must be strictly increasing")

    @property
    def displacement(self) -> np.ndarray:
        return self.front_x - self.front_x[0]


@dataclass(frozen=True)
class CutoffSpec:
    """C^1 ramp from 0 (``x_N <= s``) to 1 (``x_N >= s + delta``)."""

    s: float
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise DiagnosticsError("cut-off width delta must be positive")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        xi = np.clip((np.asarray(x, dtype=float) - self.s) / self.delta, 0.0, 1.0)
        return xi * xi * (3.0 - 2.0 * xi)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        xi = np.clip((np.asarray(x, dtype=float) - self.s) / self.delta, 0.0, 1.0)
        return 6.0 * xi * (1.0 - xi) / self.delta

    @property
    def gradient_bound(self) -> float:
        return 1.5 / self.delta


def energy_density(state: FieldState) -> np.ndarray:
    return cell_energy(state)


def front_position(w: np.ndarray, coords: np.ndarray, threshold: float) -> float:
    """Largest ``x_N`` (last axis) where ``w > threshold``; ``-inf`` if none."""
    if not threshold > 0:
        raise DiagnosticsError("threshold must be positive")
    w = np.asarray(w)
    above = w > threshold
    if w.ndim > 1:
        above = above.any(axis=tuple(range(w.ndim - 1)))
    idx = np.flatnonzero(above)
    if idx.size == 0:
        return SENTINEL
    return float(np.asarray(coords)[idx[-1]])


def space_integral(f: np.ndarray, state_or_grid) -> float:
    grid = getattr(state_or_grid, "grid", state_or_grid)
    out = f
    for axis in reversed(range(grid.dim)):
        out = trapezoid(out, grid.centers(axis), axis=axis)
    return float(out)


def l1_norm(state: FieldState) -> float:
    return space_integral(cell_energy(state), state)


def front_trace(traj: Trajectory) -> FrontTrace:
    coords = traj.grid.last_axis_centers
    times, fronts, l1 = [], [], []
    for s in traj.states:
        w = cell_energy(s)
        times.append(s.time)
        fronts.append(front_position(w, coords, traj.threshold))
        l1.append(space_integral(w, s))
    return FrontTrace(np.array(times), np.array(fronts), np.array(l1))


def _last_axis_mesh(grid) -> np.ndarray:
    return grid.center_mesh()[-1]


def _grad_norm(w: np.ndarray, dx) -> np.ndarray:
    if w.ndim == 1:
        return np.abs(np.gradient(w, dx[0]))
    gx, gy = np.gradient(w, *dx)
    return np.sqrt(gx * gx + gy * gy)


def poynting_divergence(state: FieldState) -> np.ndarray:
    """``H . curl E - E . curl H`` at cell centres, each product formed at its native location."""
    ce = curl_e(state)
    ch = curl_h(state)
    if state.grid.dim == 1:
        (hz,) = state.h
        return hz * ce[0] - _avg(state.e * ch, 0)
    hx, hy = state.h
    h_curl_e = _avg(hx * ce[0], 1) + _avg(hy * ce[1], 0)
    return h_curl_e - state.e * ch


@dataclass
class ResidualTerms:
    final: float
    time_weight: float
    damping: float
    flux: float
    initial: float

    @property
    def residual(self) -> float:
        return self.final + self.time_weight + self.damping + self.flux - self.initial


def weak_energy_terms(
    traj: Trajectory,
    cutoff: CutoffSpec | None = None,
    T: float | None = None,
    time_decay: bool = True,
) -> ResidualTerms:
    """The five terms of the localized energy inequality on ``traj``.

    The test function is ``eta(t, x) = cutoff(x_N) * exp(-t/T)`` (``cutoff``
    of ``None`` means 1; ``time_decay=False`` drops the exponential).
    """
    if T is None:
        T = float(traj.times[-1])
    sub = traj.until(T)
    if len(sub.states) < 2:
        raise DiagnosticsError("weak residual needs at least two snapshots")
    if not T > 0:
        raise DiagnosticsError("T must be positive")
    law = traj.law
    grid = traj.grid
    xN = _last_axis_mesh(grid)
    eta_x = np.ones_like(xN) if cutoff is None else cutoff(xN)

    times = sub.times
    w_eta, damp, flux = [], [], []
    for s in sub.states:
        w = cell_energy(s)
        g = _grad_norm(w, grid.dx)
        et = math.exp(-s.time / T) if time_decay else 1.0
        eta = eta_x * et
        w_eta.append(space_integral(w * eta, grid))
        damp.append(space_integral(law.damping(w, g) * w * eta, grid))
        flux.append(space_integral(law.speed(w) * poynting_divergence(s) * eta, grid))
    w_eta = np.array(w_eta)
    return ResidualTerms(
        final=0.5 * w_eta[-1],
        time_weight=(0.5 / T) * float(trapezoid(w_eta, times)) if time_decay else 0.0,
        damping=float(trapezoid(damp, times)),
        flux=float(trapezoid(flux, times)),
        initial=0.5 * w_eta[0],
    )


def weak_energy_residual(
    traj: Trajectory,
    cutoff: CutoffSpec | None = None,
    T: float | None = None,
    time_decay: bool = True,
) -> float:
    """Left side minus right side of the localized energy inequality.

    A value at or below a small tolerance certifies the inequality on the
    discrete trajectory.
    """
    return weak_energy_terms(traj, cutoff, T, time_decay).residual


@dataclass
class EnergyReport:
    s: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    R: np.ndarray
    delta: float
    T: float
    delta_T: np.ndarray | None = None

    def rows(self):
        dT = self.delta_T if self.delta_T is not None else np.full_like(self.s, np.nan)
        return zip(self.s, self.A, self.B, self.C, self.R, dT)


def _halfspace_integrals(traj: Trajectory, s_grid: np.ndarray, power: float, T: float) -> np.ndarray:
    """``int_0^T int_{x_N >= s} w^power`` for each ``s``."""
    sub = traj.until(T)
    grid = traj.grid
    xN = _last_axis_mesh(grid)
    per_time = np.empty((len(sub.states), len(s_grid)))
    for k, st in enumerate(sub.states):
        wp = cell_energy(st) ** power
        for j, s in enumerate(s_grid):
            per_time[k, j] = space_integral(np.where(xN >= s, wp, 0.0), grid)
    if len(sub.states) == 1:
        return np.zeros(len(s_grid))
    return trapezoid(per_time, sub.times, axis=0)


def local_functionals(
    traj: Trajectory,
    s_grid,
    delta: float,
    exps: DerivedExponents,
    m: float,
    n: float,
    p: float,
    T: float | None = None,
    c: float = 1.0,
) -> EnergyReport:
    """Half-space energies ``A_T(s)``, ``B_T(s)``, their combination ``C_T(s)`` and ``R_T(s, delta)``.

    ``c`` is the generic constant in front of the annulus and volume terms of
    ``R_T``. The initial-energy term of ``R_T`` vanishes identically for
    ``s >= 0`` and is only evaluated for ``s < 0``.
    """
    if not delta > 0:
        raise DiagnosticsError("delta must be positive")
    s_grid = np.asarray(s_grid, dtype=float)
    grid = traj.grid
    lo, hi = grid.lower[-1], grid.upper[-1]
    if s_grid.size == 0 or s_grid.min() < lo or s_grid.max() > hi:
        raise DiagnosticsError(f"s-grid must lie inside [{lo}, {hi}]")
    if T is None:
        T = float(traj.times[-1])
    m, n, p = float(m), float(n), float(p)
    q = (p * (n - 1) - m) / (p - 1)
    A = _halfspace_integrals(traj, s_grid, n, T)
    B = _halfspace_integrals(traj, s_grid, q, T)
    A_shift = _halfspace_integrals(traj, s_grid + delta, n, T)
    b1, b2 = float(exps.beta1), float(exps.beta2)
    C = A ** (1 + b2) + B ** (1 + b1)
    xN = _last_axis_mesh(grid)
    w0 = cell_energy(traj.states[0])
    init = np.array([space_integral(np.where(xN >= s, w0, 0.0), grid) if s < 0 else 0.0 for s in s_grid])
    R = init + (c / delta) * (A - A_shift) + c * B
    return EnergyReport(s=s_grid, A=A, B=B, C=C, R=R, delta=float(delta), T=float(T))


@dataclass
class ReplayReport:
    T: float
    epsilon: float
    s0: float
    c_fit: float
    F_T: float
    H_s0: float
    epsilon_relation: float
    s: np.ndarray
    C: np.ndarray
    delta_T: np.ndarray
    relation_holds: bool
    first_violation: float | None
    predicted_vanishing: float
    measured_front: float
    notes: list[str] = field(default_factory=list)

    @property
    def front_within_prediction(self) -> bool:
        return self.measured_front <= self.predicted_vanishing


def fit_stampacchia_constant(s: np.ndarray, C: np.ndarray, F: float, beta: float, b1: float, b2: float, max_shift: int | None = None) -> float:
    """Smallest ``c`` with ``C(s+d) <= c F [d^-beta C(s)^(1+b1) + C(s)^(1+b2)]`` on all grid pairs."""
    h = float(s[1] - s[0])
    n = len(s)
    max_shift = n - 1 if max_shift is None else min(max_shift, n - 1)
    c = 0.0
    for k in range(1, max_shift + 1):
        d = k * h
        lhs = C[k:]
        base = C[:-k]
        rhs = F * (d ** (-beta) * base ** (1 + b1) + base ** (1 + b2))
        pos = rhs > 0
        if np.any(lhs[~pos] > 0):
            raise DiagnosticsError("C_T increases along the s-grid; cannot fit the recursion constant")
        if np.any(pos):
            c = max(c, float(np.max(lhs[pos] / rhs[pos])))
    return c


def proof_replay(
    traj: Trajectory,
    T: float,
    epsilon: float,
    exps: DerivedExponents,
    m: float,
    n: float,
    p: float,
    s_grid=None,
    s0: float = 0.0,
    delta: float | None = None,
) -> ReplayReport:
    """Rebuild ``delta_T(s)`` from measured ``C_T(s)`` and test the vanishing recursion.

    The generic constant of the ``C_T`` recursion is fitted as the smallest
    value that makes the recursion hold on every sampled ``(s, delta)`` pair.
    The predicted vanishing point ``s0 + delta_T(s0)/(1 - epsilon)`` is
    compared with the largest front position measured up to ``T``.
    """
    if not 0 < epsilon < 1:
        raise DiagnosticsError("epsilon must lie in (0, 1)")
    grid = traj.grid
    if s_grid is None:
        h = grid.dx[-1]
        s_grid = np.arange(s0, grid.upper[-1] - h, h)
    s_grid = np.asarray(s_grid, dtype=float)
    if len(s_grid) < 3 or np.any(np.diff(s_grid) <= 0) or not np.allclose(np.diff(s_grid), s_grid[1] - s_grid[0]):
        raise DiagnosticsError("s-grid must be uniform, increasing and have at least 3 points")
    if not (s_grid[0] <= s0 <= s_grid[-1]):
        raise DiagnosticsError("s0 must lie on the s-grid range")
    delta = float(s_grid[1] - s_grid[0]) if delta is None else delta
    rep = local_functionals(traj, s_grid, delta, exps, m, n, p, T=T)
    C = rep.C
    F = f_of_t(exps, T)
    beta, b1, b2 = float(exps.beta), float(exps.beta1), float(exps.beta2)
    c = fit_stampacchia_constant(s_grid, C, F, beta, b1, b2)
    C_s0 = float(np.interp(s0, s_grid, C))
    H = c * F * C_s0**b2
    if H >= 1:
        raise HorizonError(f"T exceeds verifiable horizon (H_T(s0) = {H!r} >= 1)")
    delta_T = (2 * c / (1 - H) * F * C**b1) ** (1 / beta)
    shifted = np.interp(s_grid + delta_T, s_grid, delta_T, right=delta_T[-1])
    active = s_grid >= s0
    ok = shifted <= epsilon * delta_T * (1 + 1e-12) + 1e-300
    bad = np.flatnonzero(active & ~ok)
    d0 = float(np.interp(s0, s_grid, delta_T))
    sub = traj.until(T)
    coords = grid.last_axis_centers
    fronts = [front_position(cell_energy(st), coords, traj.threshold) for st in sub.states]
    notes = []
    if delta_T[-1] > 0:
        notes.append("delta_T does not vanish on the s-grid; extend the grid")
    return ReplayReport(
        T=float(T),
        epsilon=float(epsilon),
        s0=float(s0),
        c_fit=c,
        F_T=F,
        H_s0=H,
        epsilon_relation=((1 + H) / 2) ** (b1 / beta),
        s=s_grid,
        C=C,
        delta_T=delta_T,
        relation_holds=bad.size == 0,
        first_violation=float(s_grid[bad[0]]) if bad.size else None,
        predicted_vanishing=s0 + d0 / (1 - epsilon),
        measured_front=float(max(fronts)),
        notes=notes,
    )


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    amplitude: float
    residual: float
    samples: int


def fit_power_law(trace: FrontTrace, t_window: tuple[float, float]) -> PowerLawFit:
    """Least-squares fit of ``log(front - front(0))`` against ``log t`` in the window."""
    t0, t1 = t_window
    mask = (trace.times >= t0) & (trace.times <= t1) & (trace.times > 0)
    t = trace.times[mask]
    x = trace.front_x[mask]
    if np.isneginf(trace.front_x[0]):
        raise DiagnosticsError("initial front below threshold")
    if t.size < 5:
        raise DiagnosticsError(f"need at least 5 samples in window, got {t.size}")
    if np.any(np.isneginf(x)):
        raise DiagnosticsError("front fell below threshold inside the fit window")
    disp = x - trace.front_x[0]
    if np.any(disp <= 0):
        raise DiagnosticsError("nonpositive front displacement inside the fit window")
    lt, ld = np.log(t), np.log(disp)
    slope, intercept = np.polyfit(lt, ld, 1)
    resid = ld - (slope * lt + intercept)
    return PowerLawFit(float(slope), float(math.exp(intercept)), float(np.sqrt(np.mean(resid**2))), int(t.size))


@dataclass(frozen=True)
class EnvelopeCheck:
    constant: float
    max_violation: float
    exponent: float


def power_envelope(trace: FrontTrace, t_window: tuple[float, float], exponent: float, calibration: tuple[float, float] | None = None) -> EnvelopeCheck:
    """Calibrate ``C`` so that ``C t^exponent`` bounds the displacement on ``calibration``.

    The returned ``max_violation`` is the largest relative excess of the
    displacement over ``C t^exponent`` anywhere in ``t_window``. With the
    default calibration (the first fifth of the window on a log scale) this
    is positive only when the front outgrows the envelope later on.
    """
    t0, t1 = t_window
    if calibration is None:
        calibration = (t0, t0 * (t1 / t0) ** 0.2)
    mask = (trace.times >= t0) & (trace.times <= t1) & (trace.times > 0)
    cal = (trace.times >= calibration[0]) & (trace.times <= calibration[1]) & (trace.times > 0)
    if not np.any(cal):
        raise DiagnosticsError("no samples in calibration window")
    disp = trace.displacement
    C = float(np.max(disp[cal] / trace.times[cal] ** exponent))
    if not C > 0:
        raise DiagnosticsError("front did not move in the calibration window")
    ratio = disp[mask] / (C * trace.times[mask] ** exponent)
    return EnvelopeCheck(constant=C, max_violation=float(np.max(ratio) - 1.0), exponent=float(exponent))
