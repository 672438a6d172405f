"""Numerical checks of the three auxiliary lemmas behind the front estimate.

* a Stampacchia-type vanishing lemma for nonincreasing ``f`` with
  ``f(s + f(s)) <= eps f(s)``;
* the Gagliardo-Nirenberg interpolation inequality with ``(i, j) = (0, 1)``,
  checked through its exact dilation invariance;
* the Bihari integral inequality, evaluated as ``G^{-1}(G(k) + m int h)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from .theorem import Number, as_exact


class LemmaError(ValueError):
    pass


class BlowUpError(LemmaError):
    """The Bihari majorant ceases to exist at ``t_star``."""

    def __init__(self, t_star: float):
        super().__init__(f"bound ceases to exist at t* = {t_star!r}")
        self.t_star = t_star


# -- Stampacchia-type lemma -----------------------------------------------------


@dataclass(frozen=True)
class DecreasingFunctionProbe:
    """A nonnegative nonincreasing function on ``[s0, inf)``.

    ``f`` is either a vectorized callable or a pair ``(s, values)`` of samples,
    interpolated linearly and extended by the last value.
    """

    f: Callable[[np.ndarray], np.ndarray] | tuple[Sequence[float], Sequence[float]]
    s0: float = 0.0
    epsilon: float = 0.5

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise LemmaError("epsilon must lie in (0, 1)")

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if callable(self.f):
            return np.asarray(self.f(s), dtype=float) * np.ones_like(s)
        xs, ys = (np.asarray(a, dtype=float) for a in self.f)
        return np.interp(s, xs, ys)


@dataclass
class StampacchiaReport:
    relation_holds_on_grid: bool
    first_violation: float | None
    vanishing_bound: float
    measured_zero: float | None
    vanishes_beyond_bound: bool | None
    iteration_limit: float
    iterations: int

    @property
    def passed(self) -> bool:
        """Lemma confirmed: relation holds and ``f`` vanishes where predicted."""
        return self.relation_holds_on_grid and bool(self.vanishes_beyond_bound)


def stampacchia_check(
    probe: DecreasingFunctionProbe,
    s_grid: Sequence[float],
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> StampacchiaReport:
    """Check ``f(s + f(s)) <= eps f(s)`` on a grid and the predicted vanishing point.

    The grid must cover ``[s0, s0 + 2 f(s0)/(1 - eps)]``. The iteration
    ``s_{k+1} = s_k + f(s_k)`` from ``s0`` is run until its step drops below
    ``tol`` (or ``max_iter``); its limit is reported.
    """
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or s.size < 2 or np.any(np.diff(s) <= 0):
        raise LemmaError("s-grid must be strictly increasing with at least two points")
    eps = probe.epsilon
    f0 = float(probe(probe.s0))
    bound = probe.s0 + f0 / (1.0 - eps)
    if s[0] > probe.s0 or s[-1] < probe.s0 + 2.0 * f0 / (1.0 - eps):
        raise LemmaError(f"s-grid must cover [{probe.s0}, {probe.s0 + 2.0 * f0 / (1.0 - eps)}]")

    fs = probe(s)
    if np.any(fs < -tol):
        raise LemmaError("probe takes negative values")
    if np.any(np.diff(fs) > tol):
        k = int(np.argmax(np.diff(fs) > tol))
        raise LemmaError(f"probe is not nonincreasing on the grid (near s = {s[k]!r})")

    active = s >= probe.s0
    lhs = probe(s + fs)
    bad = active & (lhs > eps * fs + tol)
    holds = not bool(np.any(bad))
    first = float(s[np.argmax(bad)]) if not holds else None

    # smallest grid point beyond which every sample is zero
    nonzero = np.nonzero(fs > tol)[0]
    if nonzero.size == 0:
        zero = float(s[0])
    elif nonzero[-1] + 1 < s.size:
        zero = float(s[nonzero[-1] + 1])
    else:
        zero = None
    beyond = bool(np.all(fs[s >= bound] <= tol)) if holds else None

    x, it = probe.s0, 0
    while it < max_iter:
        step = float(probe(x))
        if step <= tol:
            break
        x += step
        it += 1
    return StampacchiaReport(holds, first, bound, zero, beyond, x, it)


# -- Gagliardo-Nirenberg --------------------------------------------------------


@dataclass(frozen=True)
class GNSetting:
    """``||v||_a <= d1 ||Dv||_d^theta ||v||_b^(1-theta)`` in dimension ``N``."""

    a: Number
    b: Number
    d: Number
    N: int = 1
    i: int = 0
    j: int = 1

    def __post_init__(self):
        if (self.i, self.j) != (0, 1):
            raise LemmaError("only derivative orders (i, j) = (0, 1) are supported")
        if self.N < 1:
            raise LemmaError("dimension must be positive")
        if not as_exact(self.a) > 1 or not as_exact(self.d) > 1:
            raise LemmaError("need a > 1 and d > 1")
        if not 0 < as_exact(self.b) <= as_exact(self.a):
            raise LemmaError("need 0 < b <= a")


@dataclass(frozen=True)
class ThetaResult:
    theta: Number
    boundary: bool


def gn_theta(setting: GNSetting) -> ThetaResult:
    """Interpolation exponent fixed by dimensional analysis.

    Exact for rational inputs. ``boundary`` flags ``theta = i/j``.
    """
    a, b, d = (as_exact(v) for v in (setting.a, setting.b, setting.d))
    N, i, j = Fraction(setting.N), Fraction(setting.i), Fraction(setting.j)
    den = 1 / b + j / N - 1 / d
    if den == 0:
        raise LemmaError("setting outside lemma hypotheses: vanishing denominator")
    theta = (1 / b + i / N - 1 / a) / den
    lo = i / j
    if not lo <= theta < 1:
        raise LemmaError(f"setting outside lemma hypotheses: theta = {theta} not in [{lo}, 1)")
    return ThetaResult(theta, theta == lo)


@dataclass
class GNRatioReport:
    theta: float
    ratios: dict[str, float]
    dilation_error: dict[str, float]
    empirical_d1: float
    dilations: tuple[float, ...]

    @property
    def max_dilation_error(self) -> float:
        return max(self.dilation_error.values())

    def passed(self, tol: float = 1e-6) -> bool:
        finite = all(math.isfinite(r) and r > 0 for r in self.ratios.values())
        return finite and self.max_dilation_error <= tol


def _norm(v: np.ndarray, q: float, dx: float) -> float:
    return float((np.sum(np.abs(v) ** q) * dx) ** (1.0 / q))


def _spectral_derivative(v: np.ndarray, dx: float) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.rfftfreq(v.size, d=dx)
    return np.fft.irfft(1j * k * np.fft.rfft(v), n=v.size)


def gn_ratio(setting: GNSetting, v: np.ndarray, dx: float) -> float:
    """``||v||_a / (||v'||_d^theta ||v||_b^(1-theta))`` on a periodic 1D grid."""
    if setting.N != 1:
        raise LemmaError("ratio quadrature is implemented for N = 1")
    v = np.asarray(v, dtype=float)
    peak = float(np.max(np.abs(v)))
    if peak == 0.0:
        raise LemmaError("test function vanishes identically")
    edge = max(abs(v[0]), abs(v[-1]))
    if edge > 1e-10 * peak:
        raise LemmaError("test function does not decay inside the box")
    th = float(gn_theta(setting).theta)
    a, b, d = float(setting.a), float(setting.b), float(setting.d)
    dv = _spectral_derivative(v, dx)
    return _norm(v, a, dx) / (_norm(dv, d, dx) ** th * _norm(v, b, dx) ** (1.0 - th))


def gn_ratio_check(
    setting: GNSetting,
    profiles: dict[str, Callable[[np.ndarray], np.ndarray]],
    dilations: Sequence[float] = (0.25, 0.5, 2.0, 4.0),
    half_width: float = 64.0,
    points: int = 2**14,
) -> GNRatioReport:
    """Ratio per profile, its dilation invariance and the empirical sup.

    Profiles are sampled on ``[-half_width, half_width)`` with ``points``
    samples; derivatives are spectral.
    """
    if points < 16:
        raise LemmaError("too few sample points")
    x = np.linspace(-half_width, half_width, points, endpoint=False)
    dx = x[1] - x[0]
    ratios: dict[str, float] = {}
    errors: dict[str, float] = {}
    for name, prof in profiles.items():
        base = gn_ratio(setting, prof(x), dx)
        ratios[name] = base
        worst = 0.0
        for lam in dilations:
            r = gn_ratio(setting, prof(lam * x), dx)
            ratios[f"{name}@{lam!r}"] = r
            worst = max(worst, abs(r / base - 1.0))
        errors[name] = worst
    return GNRatioReport(
        theta=float(gn_theta(setting).theta),
        ratios=ratios,
        dilation_error=errors,
        empirical_d1=max(ratios.values()),
        dilations=tuple(float(l) for l in dilations),
    )


# -- Bihari ---------------------------------------------------------------------


@dataclass(frozen=True)
class BihariSetting:
    """``v(t) <= k + m int_0^t h g(v)`` with ``g > 0`` on ``(0, inf)``.

    Give ``g`` as a callable, or set ``power`` for ``g(v) = coef v^power``
    (analytic ``G`` and inverse). ``h`` is a callable or a constant.
    """

    k: float
    m: float
    h: Callable[[float], float] | float = 1.0
    g: Callable[[float], float] | None = None
    power: float | None = None
    coef: float = 1.0
    v0: float = 1.0

    def __post_init__(self):
        if self.k < 0 or self.m < 0:
            raise LemmaError("need k >= 0 and m >= 0")
        if (self.g is None) == (self.power is None):
            raise LemmaError("give exactly one of g or power")
        if not self.v0 > 0:
            raise LemmaError("reference point v0 must be positive")
        if self.power is not None and not self.coef > 0:
            raise LemmaError("coef must be positive")

    def g_value(self, v: float) -> float:
        if self.power is not None:
            return self.coef * v**self.power
        return float(self.g(v))

    def h_integral(self, t: float) -> float:
        if callable(self.h):
            val, _ = integrate.quad(self.h, 0.0, t, epsabs=1e-14, epsrel=1e-13, limit=200)
            return float(val)
        return float(self.h) * t


def _G(setting: BihariSetting, v: float) -> float:
    """``int_{v0}^v dtau / g(tau)``."""
    if setting.power is not None:
        q, c, v0 = setting.power, setting.coef, setting.v0
        if q == 1:
            return math.log(v / v0) / c
        return (v ** (1.0 - q) - v0 ** (1.0 - q)) / ((1.0 - q) * c)
    val, _ = integrate.quad(lambda x: 1.0 / setting.g(x), setting.v0, v, epsabs=1e-14, epsrel=1e-13, limit=200)
    return float(val)


def _G_sup(setting: BihariSetting) -> float:
    if setting.power is not None:
        q, c, v0 = setting.power, setting.coef, setting.v0
        return v0 ** (1.0 - q) / ((q - 1.0) * c) if q > 1 else math.inf
    inv = lambda x: 1.0 / setting.g(x)  # noqa: E731
    # dyadic tail test: for g ~ v^q the tail over [V, 2V] shrinks like V^(1-q)
    near, _ = integrate.quad(inv, 2.0**20, 2.0**21)
    far, _ = integrate.quad(inv, 2.0**40, 2.0**41)
    if not far < 1e-3 * near:
        return math.inf
    # logarithmic variable over the wide head interval
    head, _ = integrate.quad(lambda u: math.exp(u) * inv(math.exp(u)), math.log(setting.v0), 20 * math.log(2.0), limit=200)
    tail, _ = integrate.quad(inv, 2.0**20, math.inf, limit=200)
    return float(head + tail)


def _G_inverse(setting: BihariSetting, y: float) -> float:
    if setting.power is not None:
        q, c, v0 = setting.power, setting.coef, setting.v0
        if q == 1:
            return v0 * math.exp(c * y)
        return (v0 ** (1.0 - q) + (1.0 - q) * c * y) ** (1.0 / (1.0 - q))
    lo, hi = setting.v0, setting.v0
    while _G(setting, lo) > y:
        lo *= 0.5
        if lo < 1e-300:
            raise LemmaError("G^{-1} bracket failed below")
    while _G(setting, hi) < y:
        hi *= 2.0
        if hi > 1e300:
            raise LemmaError("G^{-1} bracket failed above")
    return float(optimize.bisect(lambda v: _G(setting, v) - y, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=2000))


def blow_up_time(setting: BihariSetting) -> float:
    """First ``t`` at which ``G(k) + m int_0^t h`` reaches ``sup G`` (``inf`` if never)."""
    sup = _G_sup(setting)
    if not math.isfinite(sup) or setting.m == 0:
        return math.inf
    room = (sup - _G(setting, setting.k)) / setting.m
    if not callable(setting.h):
        return room / float(setting.h) if setting.h > 0 else math.inf
    hi = 1.0
    while setting.h_integral(hi) < room:
        hi *= 2.0
        if hi > 1e12:
            return math.inf
    return float(optimize.bisect(lambda t: setting.h_integral(t) - room, 0.0, hi, xtol=1e-12))


def bihari_bound(setting: BihariSetting, t: float) -> float:
    """``G^{-1}(G(k) + m int_0^t h)``; raises :class:`BlowUpError` past the blow-up time."""
    if t < 0:
        raise LemmaError("t must be nonnegative")
    if setting.m == 0 or t == 0:
        return float(setting.k)
    if setting.k == 0:
        raise LemmaError("k = 0 needs G(0), which diverges for this g")
    y = _G(setting, setting.k) + setting.m * setting.h_integral(t)
    t_star = blow_up_time(setting)
    if t >= t_star:
        raise BlowUpError(t_star)
    return _G_inverse(setting, y)


def doubling_time(setting: BihariSetting) -> float:
    """Time at which the majorant reaches ``2k`` for constant ``h``."""
    if callable(setting.h) or not setting.h > 0 or setting.m == 0:
        raise LemmaError("doubling time needs constant positive h and m > 0")
    return (_G(setting, 2.0 * setting.k) - _G(setting, setting.k)) / (setting.m * float(setting.h))


def doubling_time_scaling(gamma: float, amplitudes: Sequence[float]) -> tuple[np.ndarray, float]:
    """Doubling times of ``v' = v^gamma`` from each ``v(0)`` and the fitted log-log slope.

    The slope is ``1 - gamma`` exactly; the horizon formula must share it up
    to sign convention.
    """
    times = np.array([doubling_time(BihariSetting(k=float(k), m=1.0, power=float(gamma))) for k in amplitudes])
    slope = float(np.polyfit(np.log(np.asarray(amplitudes, dtype=float)), np.log(times), 1)[0])
    return times, slope


# -- suite ----------------------------------------------------------------------


@dataclass
class LemmaSuiteResult:
    lines: list[tuple[str, str]] = field(default_factory=list)
    passed: bool = True

    def add(self, key: str, value, ok: bool | None = None) -> None:
        self.lines.append((key, value if isinstance(value, str) else repr(value)))
        if ok is not None:
            self.lines.append((f"{key}.ok", repr(bool(ok))))
            self.passed = self.passed and bool(ok)


def random_gaussian_mixture(rng: np.random.Generator, terms: int = 3) -> Callable[[np.ndarray], np.ndarray]:
    """Positive sum of Gaussians with random centres in [-2, 2] and widths in [0.5, 2]."""
    centers = rng.uniform(-2.0, 2.0, terms)
    widths = rng.uniform(0.5, 2.0, terms)
    weights = rng.uniform(0.5, 1.5, terms)

    def v(x):
        x = np.asarray(x, dtype=float)[..., None]
        return np.sum(weights * np.exp(-(((x - centers) / widths) ** 2)), axis=-1)

    return v


def run_lemma_suite(seed: int = 0) -> LemmaSuiteResult:
    """The standard battery behind ``verify-lemmas``."""
    out = LemmaSuiteResult()
    rng = np.random.default_rng(seed)

    lin = stampacchia_check(DecreasingFunctionProbe(lambda s: np.maximum(0.0, 1.0 - s), 0.0, 0.5), np.linspace(0.0, 4.0, 4001))
    out.add("stampacchia.linear.relation", lin.relation_holds_on_grid, lin.relation_holds_on_grid)
    out.add("stampacchia.linear.bound", lin.vanishing_bound, lin.vanishing_bound == 2.0)
    out.add("stampacchia.linear.measured_zero", lin.measured_zero, lin.measured_zero == 1.0)
    exp = stampacchia_check(DecreasingFunctionProbe(lambda s: np.exp(-s), 0.0, 0.5), np.linspace(0.0, 4.0, 4001))
    threshold = -math.log(math.log(2.0))
    out.add("stampacchia.exponential.first_violation", exp.first_violation,
            (not exp.relation_holds_on_grid) and abs(exp.first_violation - threshold) <= 1e-3)

    for name, (a, b, d, N, want) in {
        "unit": (2, 1, 2, 1, Fraction(1, 3)),
        "p1": (2, 1, 2, 2, Fraction(1, 2)),
    }.items():
        th = gn_theta(GNSetting(a, b, d, N)).theta
        out.add(f"gn.theta.{name}", str(th), th == want)
    rep = gn_ratio_check(
        GNSetting(2, 1, 2, 1),
        {
            "gaussian": lambda x: np.exp(-x * x),
            "bump": lambda x: np.where(np.abs(x) < 1, np.exp(-1.0 / np.maximum(1e-300, 1 - x * x)), 0.0),
            "mixture": random_gaussian_mixture(rng),
        },
    )
    out.add("gn.dilation.gaussian", rep.dilation_error["gaussian"], rep.dilation_error["gaussian"] <= 1e-6)
    out.add("gn.dilation.mixture", rep.dilation_error["mixture"], rep.dilation_error["mixture"] <= 1e-6)
    out.add("gn.empirical_d1", rep.empirical_d1, math.isfinite(rep.empirical_d1))

    sq = BihariSetting(k=1.0, m=1.0, power=2.0)
    val = bihari_bound(sq, 0.5)
    out.add("bihari.square.t0.5", val, abs(val - 2.0) <= 1e-8)
    out.add("bihari.square.t_star", blow_up_time(sq), blow_up_time(sq) == 1.0)
    lin_g = bihari_bound(BihariSetting(k=1.0, m=1.0, power=1.0), 1.0)
    out.add("bihari.linear.t1", lin_g, abs(lin_g - math.e) <= 1e-12)
    _, slope = doubling_time_scaling(3.0, (0.5, 1.0, 2.0))
    out.add("bihari.doubling_slope.gamma3", slope, abs(slope - (1.0 - 3.0)) <= 1e-9)
    return out
