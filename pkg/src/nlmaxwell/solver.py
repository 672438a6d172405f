"""Staggered-grid solver for the 1D plane-wave and 2D TM reductions.

1D plane wave: ``E = (0, Ey, 0)``, ``H = (0, 0, Hz)`` depending on ``x``;
``Ey`` lives on the ``cells + 1`` grid nodes and ``Hz`` on the ``cells`` cell
centres.

2D TM: ``E = (0, 0, Ez)``, ``H = (Hx, Hy, 0)`` depending on ``(x, y)``;
``Ez`` at cell centres ``(nx, ny)``, ``Hx`` at y-faces ``(nx, ny + 1)``,
``Hy`` at x-faces ``(nx + 1, ny)``.

The last axis is the propagation coordinate ``x_N`` used for fronts and
half-space conditions. Fields vanish outside the box.

One time step is a Strang splitting: exact damping over ``dt/2`` with frozen
``a``, a velocity-Verlet curl update over ``dt`` with frozen ``b`` (half step
``H``, full step ``E``, half step ``H``), and a second damping half step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from .constitutive import ConstitutiveLaw


class SolverError(RuntimeError):
    pass


class NonFiniteError(SolverError):
    pass


class DomainTooSmallError(SolverError):
    pass


@dataclass(frozen=True)
class GridSpec:
    dim: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"grid dim must be 1 or 2, got {self.dim}")
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        cells = tuple(int(v) for v in np.atleast_1d(self.cells))
        if not (len(lower) == len(upper) == len(cells) == self.dim):
            raise ValueError("lower, upper and cells need one entry per axis")
        if any(u <= l for l, u in zip(lower, upper)):
            raise ValueError("upper bound must exceed lower bound on every axis")
        if any(c < 4 for c in cells):
            raise ValueError("need at least 4 cells per axis")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "cells", cells)

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple((u - l) / c for l, u, c in zip(self.lower, self.upper, self.cells))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.dx)

    def nodes(self, axis: int) -> np.ndarray:
        return self.lower[axis] + self.dx[axis] * np.arange(self.cells[axis] + 1)

    def centers(self, axis: int) -> np.ndarray:
        return self.lower[axis] + self.dx[axis] * (np.arange(self.cells[axis]) + 0.5)

    def center_mesh(self) -> tuple[np.ndarray, ...]:
        axes = [self.centers(k) for k in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @property
    def last_axis_centers(self) -> np.ndarray:
        return self.centers(self.dim - 1)


@dataclass
class FieldState:
    time: float
    grid: GridSpec
    e: np.ndarray
    h: tuple[np.ndarray, ...]

    def arrays(self) -> dict[str, np.ndarray]:
        if self.grid.dim == 1:
            return {"Ey": self.e, "Hz": self.h[0]}
        return {"Ez": self.e, "Hx": self.h[0], "Hy": self.h[1]}

    def copy(self) -> "FieldState":
        return FieldState(self.time, self.grid, self.e.copy(), tuple(a.copy() for a in self.h))

    @classmethod
    def zeros(cls, grid: GridSpec, time: float = 0.0) -> "FieldState":
        if grid.dim == 1:
            (nx,) = grid.cells
            return cls(time, grid, np.zeros(nx + 1), (np.zeros(nx),))
        nx, ny = grid.cells
        return cls(time, grid, np.zeros((nx, ny)), (np.zeros((nx, ny + 1)), np.zeros((nx + 1, ny))))


@dataclass(frozen=True)
class InitialData:
    shape: Literal["cosine_bump", "gaussian_truncated"] = "cosine_bump"
    center: tuple[float, ...] = (-2.0,)
    radius: float = 1.0
    amplitude: float = 1.0
    mode: Literal["E_only", "E_plus_H_right_mover"] = "E_only"
    half_space: bool = True

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if self.shape not in ("cosine_bump", "gaussian_truncated"):
            raise ValueError(f"unknown initial shape {self.shape!r}")
        if self.mode not in ("E_only", "E_plus_H_right_mover"):
            raise ValueError(f"unknown initial mode {self.mode!r}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")
        if self.half_space and not self.center[-1] + self.radius < 0:
            raise ValueError(
                f"initial support reaches x_N = {self.center[-1] + self.radius} >= 0; "
                "energy must start in the half-space x_N < 0"
            )

    def profile(self, r: np.ndarray) -> np.ndarray:
        """Field amplitude as a function of distance from the centre."""
        R = self.radius
        inside = r < R
        if self.shape == "cosine_bump":
            out = np.cos(0.5 * np.pi * np.minimum(r, R) / R) ** 2
        else:
            # exp(-s r^2) minus its tangent (in r^2) at r = R: C^1 and zero at r = R
            s = 4.5 / R**2
            edge = math.exp(-s * R * R)
            u = np.minimum(r, R) ** 2
            out = (np.exp(-s * u) - edge + s * edge * (u - R * R)) / (1.0 - edge - s * edge * R * R)
        return np.where(inside, self.amplitude * out, 0.0)


def _distance(center: tuple[float, ...], *coords: np.ndarray) -> np.ndarray:
    return np.sqrt(sum((c - x0) ** 2 for c, x0 in zip(coords, center)))


def init_state(grid: GridSpec, initial: InitialData) -> FieldState:
    if len(initial.center) != grid.dim:
        raise ValueError(f"initial centre has {len(initial.center)} coordinates, grid has dim {grid.dim}")
    for k in range(grid.dim):
        width = grid.upper[k] - grid.lower[k]
        margin = 0.1 * width
        lo = initial.center[k] - initial.radius
        hi = initial.center[k] + initial.radius
        if lo < grid.lower[k] + margin or hi > grid.upper[k] - margin:
            raise ValueError(f"initial support [{lo}, {hi}] on axis {k} needs a 10% margin inside the grid")
    state = FieldState.zeros(grid)
    right = initial.mode == "E_plus_H_right_mover"
    if grid.dim == 1:
        state.e[:] = initial.profile(_distance(initial.center, grid.nodes(0)))
        if right:
            state.h[0][:] = initial.profile(_distance(initial.center, grid.centers(0)))
        return state
    xc, yc = grid.centers(0), grid.centers(1)
    xn, yn = grid.nodes(0), grid.nodes(1)
    X, Y = np.meshgrid(xc, yc, indexing="ij")
    state.e[:] = initial.profile(_distance(initial.center, X, Y))
    if right:
        # Ez = Hx travels towards +y
        X, Y = np.meshgrid(xc, yn, indexing="ij")
        state.h[0][:] = initial.profile(_distance(initial.center, X, Y))
    return state


# -- co-location helpers ------------------------------------------------------


def _avg(a: np.ndarray, axis: int) -> np.ndarray:
    """Mean of neighbours along ``axis`` (length shrinks by one)."""
    lo = [slice(None)] * a.ndim
    hi = [slice(None)] * a.ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return 0.5 * (a[tuple(lo)] + a[tuple(hi)])


def _avg_pad(a: np.ndarray, axis: int) -> np.ndarray:
    """Mean of neighbours with zero fields outside (length grows by one)."""
    pad = [(0, 0)] * a.ndim
    pad[axis] = (1, 1)
    return _avg(np.pad(a, pad), axis)


def _diff_pad(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    pad = [(0, 0)] * a.ndim
    pad[axis] = (1, 1)
    return np.diff(np.pad(a, pad), axis=axis) / h


def cell_energy(state: FieldState) -> np.ndarray:
    """Energy density ``E^2 + H^2`` at cell centres (co-located by averaging)."""
    if state.grid.dim == 1:
        ec = _avg(state.e, 0)
        return ec * ec + state.h[0] ** 2
    hx = _avg(state.h[0], 1)
    hy = _avg(state.h[1], 0)
    return state.e**2 + hx * hx + hy * hy


def _location_energies(state: FieldState) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    """Energy density co-located at the E sample points and at each H sample point."""
    if state.grid.dim == 1:
        e, (hz,) = state.e, state.h
        w_e = e * e + _avg_pad(hz, 0) ** 2
        ec = _avg(e, 0)
        w_h = ec * ec + hz * hz
        return w_e, (w_h,)
    ez, (hx, hy) = state.e, state.h
    w_e = cell_energy(state)
    # Hx at (i+1/2, j): Ez from two neighbours, Hy from four
    ez_x = _avg_pad(ez, 1)
    hy_x = _avg_pad(_avg(hy, 0), 1)
    w_hx = hx * hx + ez_x * ez_x + hy_x * hy_x
    # Hy at (i, j+1/2)
    ez_y = _avg_pad(ez, 0)
    hx_y = _avg_pad(_avg(hx, 1), 0)
    w_hy = hy * hy + ez_y * ez_y + hx_y * hx_y
    return w_e, (w_hx, w_hy)


def upwind_gradient_norm(w: np.ndarray, dx: Sequence[float]) -> np.ndarray:
    """Godunov gradient magnitude for an energy sink ``w_t = -H(|grad w|)``.

    Per axis ``max(D-w, -D+w, 0)`` with zero energy outside the box. The
    damping substep acts on ``w`` like a Hamilton-Jacobi equation; a centred
    gradient there is non-monotone and lets grid-scale oscillations grow.
    """
    sq = np.zeros_like(w)
    for axis in range(w.ndim):
        pad = [(0, 0)] * w.ndim
        pad[axis] = (1, 1)
        d = np.diff(np.pad(w, pad), axis=axis) / dx[axis]
        lo = [slice(None)] * w.ndim
        hi = [slice(None)] * w.ndim
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        g = np.maximum(np.maximum(d[tuple(lo)], -d[tuple(hi)]), 0.0)
        sq += g * g
    return np.sqrt(sq)


def _to_locations(c: np.ndarray, dim: int) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    """Move a cell-centred quantity to the E and H sample points (edge-replicated)."""
    def edge_avg(a, axis):
        pad = [(0, 0)] * a.ndim
        pad[axis] = (1, 1)
        return _avg(np.pad(a, pad, mode="edge"), axis)

    if dim == 1:
        return edge_avg(c, 0), (c,)
    return c, (edge_avg(c, 1), edge_avg(c, 0))


def damping_coefficients(state: FieldState, law: ConstitutiveLaw):
    """Damping ``a`` at E and H sample points."""
    if law.kind == "constant_test":
        return law.a_const, tuple(law.a_const for _ in state.h)
    w_c = cell_energy(state)
    g_e, g_h = _to_locations(upwind_gradient_norm(w_c, state.grid.dx), state.grid.dim)
    w_e, w_h = _location_energies(state)
    return law.damping(w_e, g_e), tuple(law.damping(w, g) for w, g in zip(w_h, g_h))


def speed_coefficients(state: FieldState, law: ConstitutiveLaw):
    """Wave speed ``b`` at E and H sample points."""
    if law.kind == "constant_test":
        return law.b_const, tuple(law.b_const for _ in state.h)
    w_e, w_h = _location_energies(state)
    return law.speed(w_e), tuple(law.speed(w) for w in w_h)


def _damp(state: FieldState, law: ConstitutiveLaw, tau: float) -> FieldState:
    a_e, a_h = damping_coefficients(state, law)
    e = state.e * np.exp(-np.multiply(a_e, tau))
    h = tuple(f * np.exp(-np.multiply(a, tau)) for f, a in zip(state.h, a_h))
    return FieldState(state.time, state.grid, e, h)


def curl_e(state: FieldState, e: np.ndarray | None = None) -> tuple[np.ndarray, ...]:
    """Right-hand side of ``H_t = -b curl E`` without the ``-b`` factor, at H points."""
    e = state.e if e is None else e
    dx = state.grid.dx
    if state.grid.dim == 1:
        return (np.diff(e) / dx[0],)
    # curl (0,0,Ez) = (dEz/dy, -dEz/dx, 0)
    return (_diff_pad(e, 1, dx[1]), -_diff_pad(e, 0, dx[0]))


def curl_h(state: FieldState, h: tuple[np.ndarray, ...] | None = None) -> np.ndarray:
    """Right-hand side of ``E_t = b curl H`` without the ``b`` factor, at E points."""
    h = state.h if h is None else h
    dx = state.grid.dx
    if state.grid.dim == 1:
        out = np.zeros(state.grid.cells[0] + 1)
        out[1:-1] = -np.diff(h[0]) / dx[0]
        return out
    hx, hy = h
    return np.diff(hy, axis=0) / dx[0] - np.diff(hx, axis=1) / dx[1]


def _curl_step(state: FieldState, law: ConstitutiveLaw, dt: float) -> FieldState:
    b_e, b_h = speed_coefficients(state, law)
    h = tuple(f - 0.5 * dt * np.multiply(b, c) for f, b, c in zip(state.h, b_h, curl_e(state)))
    e = state.e + dt * np.multiply(b_e, curl_h(state, h))
    h = tuple(f - 0.5 * dt * np.multiply(b, c) for f, b, c in zip(h, b_h, curl_e(state, e)))
    return FieldState(state.time, state.grid, e, h)


def _check_finite(state: FieldState) -> None:
    for name, arr in state.arrays().items():
        if not np.all(np.isfinite(arr)):
            idx = tuple(int(i) for i in np.argwhere(~np.isfinite(arr))[0])
            raise NonFiniteError(f"non-finite {name} at cell {idx}, t = {state.time!r}")


def _boundary_ring(w: np.ndarray, width: int = 2) -> np.ndarray:
    mask = np.zeros(w.shape, dtype=bool)
    for axis in range(w.ndim):
        idx = [slice(None)] * w.ndim
        idx[axis] = slice(0, width)
        mask[tuple(idx)] = True
        idx[axis] = slice(-width, None)
        mask[tuple(idx)] = True
    return mask


def step(state: FieldState, law: ConstitutiveLaw, dt: float, boundary_threshold: float | None = None) -> FieldState:
    """Advance one Strang-split step of size ``dt``.

    If ``boundary_threshold`` is given, any cell energy above it in the two
    outermost cell layers raises :class:`DomainTooSmallError`.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    s = _damp(state, law, 0.5 * dt)
    s = _curl_step(s, law, dt)
    s = _damp(s, law, 0.5 * dt)
    s.time = state.time + dt
    _check_finite(s)
    if boundary_threshold is not None:
        w = cell_energy(s)
        ring = _boundary_ring(w)
        if np.any(w[ring] > boundary_threshold):
            raise DomainTooSmallError(f"domain too small: energy reached the boundary ring at t = {s.time!r}")
    return s


def stable_dt(state: FieldState, law: ConstitutiveLaw, grid: GridSpec, cfl_factor: float = 0.5) -> float:
    """CFL step ``cfl dx / (c_max sqrt(dim))``, capped at ``dx``.

    ``c_max`` is the larger of the wave speed ``b`` and the level-set speed
    ``2 p d1 w^m |grad w|^(p-1)`` with which the damping moves energy contours.
    """
    if not 0 < cfl_factor <= 1:
        raise ValueError("cfl_factor must lie in (0, 1]")
    w = cell_energy(state)
    b_max = float(np.max(law.speed(w)))
    if law.kind == "power_law" and law.d1 > 0:
        g = upwind_gradient_norm(w, grid.dx)
        hj = 2 * law.p * law.d1 * (w + law.eps_reg) ** (law.m - 1.0) * w * g ** (law.p - 1.0)
        b_max = max(b_max, float(np.max(hj)))
    if not b_max > 0:
        raise SolverError("maximum wave speed is zero; CFL step undefined")
    dx = min(grid.dx)
    return min(cfl_factor * dx / (b_max * math.sqrt(grid.dim)), dx)


@dataclass(frozen=True)
class Scenario:
    grid: GridSpec
    law: ConstitutiveLaw
    initial: InitialData
    t_end: float
    cfl_factor: float = 0.5
    output_times: tuple[float, ...] = ()
    front_threshold_rel: float = 1e-10

    def __post_init__(self):
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if not 0 < self.cfl_factor <= 1:
            raise ValueError("cfl_factor must lie in (0, 1]")
        if not self.front_threshold_rel > 0:
            raise ValueError("front_threshold_rel must be positive")
        times = sorted({0.0, float(self.t_end), *(float(t) for t in self.output_times)})
        if times[0] < 0 or times[-1] > self.t_end:
            raise ValueError("output_times must lie in [0, t_end]")
        object.__setattr__(self, "output_times", tuple(times))

    def with_law(self, law: ConstitutiveLaw) -> "Scenario":
        return replace(self, law=law)


@dataclass
class Trajectory:
    scenario: Scenario
    states: list[FieldState] = field(default_factory=list)
    threshold: float = 0.0
    steps: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    @property
    def grid(self) -> GridSpec:
        return self.scenario.grid

    @property
    def law(self) -> ConstitutiveLaw:
        return self.scenario.law

    def until(self, T: float) -> "Trajectory":
        """Snapshots with ``t <= T``."""
        kept = [s for s in self.states if s.time <= T * (1 + 1e-12)]
        return Trajectory(self.scenario, kept, self.threshold, self.steps)


def run(scenario: Scenario):
    """Integrate ``scenario`` and return ``(trajectory, front_trace)``.

    Steps land exactly on every output time.
    """
    from .diagnostics import front_trace

    state = init_state(scenario.grid, scenario.initial)
    w0_max = float(np.max(cell_energy(state)))
    threshold = scenario.front_threshold_rel * (w0_max if w0_max > 0 else 1.0)
    traj = Trajectory(scenario, threshold=threshold)
    targets = list(scenario.output_times)
    traj.states.append(state)
    for target in targets[1:]:
        while state.time < target:
            dt = stable_dt(state, scenario.law, scenario.grid, scenario.cfl_factor)
            last = state.time + dt >= target or (target - state.time - dt) < 1e-12 * max(target, 1.0)
            if last:
                dt = target - state.time
            state = step(state, scenario.law, dt, boundary_threshold=threshold)
            traj.steps += 1
            if last:
                state.time = target
        traj.states.append(state)
    return traj, front_trace(traj)
