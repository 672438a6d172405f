"""Admissible parameter region and closed-form exponents of the finite-propagation bound.

All exponents are evaluated in exact rational arithmetic (``fractions.Fraction``)
whenever the medium parameters are rational. Floats are converted through their
shortest decimal representation, so ``1.5`` becomes ``3/2`` and ``0.1`` becomes
``1/10``. Quantities that involve irrational powers (the time horizons for
non-integer exponents, ``front_bound``, ``f_of_t``) fall back to floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational, Real
from typing import Union

Number = Union[Fraction, float]


class ParameterError(ValueError):
    """Raised for parameter sets outside the domain of a closed form."""


def as_exact(x) -> Number:
    """Convert ``x`` to a Fraction when it is finite and rational-looking."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a medium parameter")
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, Real):
        xf = float(x)
        if not math.isfinite(xf):
            return xf
        return Fraction(repr(xf))
    raise TypeError(f"cannot interpret {x!r} as a real number")


def _is_finite(x: Number) -> bool:
    return isinstance(x, Fraction) or math.isfinite(x)


def _power(base: Number, exponent: Number) -> Number:
    """``base ** exponent``, exact when the exponent is an integer."""
    if isinstance(base, Fraction) and isinstance(exponent, Fraction) and exponent.denominator == 1:
        e = exponent.numerator
        if base == 0 and e < 0:
            raise ZeroDivisionError("zero to a negative power")
        return base**e
    return float(base) ** float(exponent)


def render(x: Number) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


@dataclass(frozen=True)
class MediumParams:
    """Medium exponents and structure constants plus the initial L1 energy.

    ``N`` is the spatial dimension entering the exponents. It is independent
    of the grid dimension of a simulation: a 1D plane-wave run is a valid
    solution in any ``N``.
    """

    N: int
    m: Number
    n: Number
    p: Number
    d1: Number = Fraction(1)
    d2: Number = Fraction(1)
    d3: Number | None = None
    w0_l1: Number = Fraction(1)

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N not in (1, 2, 3):
            raise ParameterError(f"N must be 1, 2 or 3, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        for name in ("m", "n", "p", "d1", "d2", "w0_l1"):
            object.__setattr__(self, name, as_exact(getattr(self, name)))
        if self.d3 is None:
            n = self.n
            object.__setattr__(self, "d3", self.d2 * abs(n - 1) if _is_finite(n) else float("nan"))
        else:
            object.__setattr__(self, "d3", as_exact(self.d3))
        for name in ("d1", "d2", "d3"):
            v = getattr(self, name)
            if _is_finite(v) and not v > 0:
                raise ParameterError(f"{name} must be positive, got {render(v)}")
        w0 = self.w0_l1
        if _is_finite(w0) and w0 < 0:
            raise ParameterError(f"w0_l1 must be nonnegative, got {render(w0)}")

    @property
    def is_exact(self) -> bool:
        return all(isinstance(getattr(self, k), Fraction) for k in ("m", "n", "p"))


@dataclass
class Check:
    name: str
    inequality: str
    passed: bool

    def as_line(self) -> str:
        return f"{self.inequality} : {'pass' if self.passed else 'FAIL'}"


@dataclass
class AdmissibilityReport:
    admissible: bool
    checks: list[Check] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _denominator(P: MediumParams) -> Number:
    """Common denominator ``p + N(m + p - 1)`` of beta1, k1, k2, beta2."""
    return P.p + P.N * (P.m + P.p - 1)


_FORMS = {
    "beta1": lambda N, m, n, p, D: p * (n - 1) / D,
    "k1": lambda N, m, n, p, D: N * (n - 1) / D,
    "k2": lambda N, m, n, p, D: N * (p * (n - 2) - m + 1) / ((p - 1) * D),
    "beta2": lambda N, m, n, p, D: p * (p * (n - 2) - m + 1) / ((p - 1) * D),
    "theta": lambda N, m, n, p, D: N * (m + n) * (p * (n - 2) - m + 1) / ((N * (m + p - 1) + p) * (p * (n - 1) - m)),
    "gamma": lambda N, m, n, p, D: ((N - 1) * (p * (n - 1) - m) + N * (p - 1) * (m + p)) / (p * (p - 1 + N * (m + p - n))),
    "kappa": lambda N, m, n, p, D: (p * (p - 1 + N * (m + p - n)) * (n * p + N * (m + p - 1)))
    / (D * (p * (p * (n - 1) - m) + N * (p - 1) * (m + p - 1))),
    "alpha_large": lambda N, m, n, p, D: (p + N * (m + p - n)) / D,
}


def _closed_forms_partial(P: MediumParams) -> dict[str, Number | None]:
    """Every closed form, ``None`` where its denominator vanishes."""
    D = _denominator(P)
    out: dict[str, Number | None] = {}
    for key, form in _FORMS.items():
        try:
            out[key] = form(P.N, P.m, P.n, P.p, D)
        except ZeroDivisionError:
            out[key] = None
    return out


def _closed_forms(P: MediumParams) -> dict[str, Number]:
    """Evaluate every closed form; raises ZeroDivisionError on singular denominators."""
    out = _closed_forms_partial(P)
    singular = [k for k, v in out.items() if v is None]
    if singular:
        raise ZeroDivisionError(f"singular closed forms: {', '.join(singular)}")
    return out


def _interpolation_theta(P: MediumParams) -> Number:
    # GN exponent for v = w^{(m+p)/p}, a = p(p(n-1)-m)/((p-1)(m+p)), b = p/(m+p), d = p.
    N, m, n, p = P.N, P.m, P.n, P.p
    return N * (m + p) * (p * (n - 2) - m + 1) / ((N * (m + p - 1) + p) * (p * (n - 1) - m))


def validate_params(params: MediumParams) -> AdmissibilityReport:
    """Check every hypothesis of the finite-propagation theorem for ``params``.

    Besides the stated hypotheses, the derived quantities that the bound needs
    (k1 < 1, k2 < 1, kappa > 0, gamma > 0, alpha_large > 0) are checked
    directly. A direct failure while the stated bounds pass is reported as a
    warning and makes the set inadmissible.
    """
    P = params
    N, m, n, p = P.N, P.m, P.n, P.p
    checks: list[Check] = []
    warnings: list[str] = []

    finite = all(_is_finite(v) for v in (m, n, p, P.d1, P.d2, P.d3, P.w0_l1))
    checks.append(
        Check(
            "finite",
            "all parameters finite: "
            + ", ".join(f"{k}={render(getattr(P, k))}" for k in ("m", "n", "p", "d1", "d2", "d3", "w0_l1")),
            finite,
        )
    )
    if not finite:
        return AdmissibilityReport(False, checks, ["non-finite input; no further checks evaluated"])

    if N == 1:
        warnings.append("N = 1 is an engineering reduction; the theorem is stated for N = 2, 3")

    checks.append(Check("p_gt_1", f"p = {render(p)} > 1", p > 1))
    checks.append(Check("n_gt_1", f"n = {render(n)} > 1", n > 1))
    if p < 2:
        n_max = 1 + (p - 1) * (p + N) / (p * N * (2 - p))
        checks.append(Check("n_upper_p_lt_2", f"n = {render(n)} < 1 + (p-1)(p+N)/(pN(2-p)) = {render(n_max)}", n < n_max))

    lower_terms = [-p, -p * (1 + Fraction(1, N) - n / p)]
    if p != 1:
        lower_terms.append(-p * (1 + Fraction(1, N) - (n - 1) / (p - 1)))
    lower = max(lower_terms)
    checks.append(
        Check(
            "m_lower",
            f"m = {render(m)} > max{{{', '.join(render(t) for t in lower_terms)}}} = {render(lower)}",
            m > lower,
        )
    )
    upper = p * (n - 2) + 1
    checks.append(Check("m_upper", f"m = {render(m)} < p(n-2)+1 = {render(upper)}", m < upper))
    stated_ok = all(c.passed for c in checks)

    cf = _closed_forms_partial(P)
    singular = [k for k, v in cf.items() if v is None]
    checks.append(
        Check(
            "denominators",
            "closed-form denominators nonzero" + (f" (singular: {', '.join(singular)})" if singular else ""),
            not singular,
        )
    )
    if singular and stated_ok:
        warnings.append(f"closed forms for {', '.join(singular)} singular although stated bounds pass")

    direct = [
        ("k1_lt_1", "k1", lambda v: v < 1, "< 1"),
        ("k2_lt_1", "k2", lambda v: v < 1, "< 1"),
        ("kappa_pos", "kappa", lambda v: v > 0, "> 0"),
        ("gamma_pos", "gamma", lambda v: v > 0, "> 0"),
        ("alpha_large_pos", "alpha_large", lambda v: v > 0, "> 0"),
    ]
    for name, key, ok, rel in direct:
        if cf[key] is None:
            checks.append(Check(name, f"{key} singular, cannot satisfy {rel}", False))
            continue
        passed = bool(ok(cf[key]))
        checks.append(Check(name, f"{key} = {render(cf[key])} {rel}", passed))
        if stated_ok and not passed:
            warnings.append(f"{key} {rel} fails ({key} = {render(cf[key])}) although stated bounds pass")

    theta = cf["theta"]
    if theta is not None:
        if not (0 <= theta < 1):
            warnings.append(f"theta = {render(theta)} outside [0, 1); interpolation step not applicable")
        try:
            theta_gn = _interpolation_theta(P)
        except ZeroDivisionError:
            theta_gn = None
        if theta_gn is not None and theta_gn != theta:
            warnings.append(
                f"theta closed form {render(theta)} differs from interpolation exponent {render(theta_gn)}"
            )
    if cf["gamma"] == 1:
        warnings.append("gamma = 1: time horizon T1 is singular")

    admissible = all(c.passed for c in checks)
    return AdmissibilityReport(admissible, checks, warnings)


@dataclass(frozen=True)
class DerivedExponents:
    beta1: Number
    beta2: Number
    k1: Number
    k2: Number
    theta: Number
    gamma: Number
    kappa: Number
    alpha_large: Number
    beta: Number
    T1: Number
    T2_shape: Number
    t_star: Number

    FIELDS = ("beta1", "beta2", "k1", "k2", "theta", "gamma", "kappa", "alpha_large", "beta", "T1", "T2_shape", "t_star")

    def items(self):
        return [(k, getattr(self, k)) for k in self.FIELDS]


def horizon_T1(gamma: Number, w0_l1: Number) -> Number:
    """L1 horizon of the energy estimate, two branches split at gamma = 1."""
    if gamma == 1:
        raise ParameterError("T1 formula singular at gamma = 1")
    if gamma < 1:
        return 2 / (1 - gamma) * _power(w0_l1, 1 - gamma)
    return 1 / (2 * (gamma - 1)) * _power(w0_l1, gamma - 1)


def derive_exponents(params: MediumParams, c: Number = Fraction(1), K0: Number = Fraction(1)) -> DerivedExponents:
    """Every derived exponent and time horizon for an admissible medium.

    ``c`` and ``K0`` are the unspecified generic constants of the T2 horizon;
    with the default 1 the value of ``T2_shape`` is shape-only.
    """
    report = validate_params(params)
    if not report.admissible:
        failed = "; ".join(ch.inequality for ch in report.failed())
        raise ParameterError(f"parameters not admissible: {failed}")
    cf = _closed_forms(params)
    b1, b2, k1, k2 = cf["beta1"], cf["beta2"], cf["k1"], cf["k2"]
    T1 = horizon_T1(cf["gamma"], params.w0_l1)
    c, K0 = as_exact(c), as_exact(K0)
    T2 = c * min(
        _power(K0, -b2 / ((1 - k1) * (1 + b2) ** 2)),
        _power(K0, -b2 / ((1 - k2) * (1 + b1) * (1 + b2))),
    )
    return DerivedExponents(
        beta1=b1,
        beta2=b2,
        k1=k1,
        k2=k2,
        theta=cf["theta"],
        gamma=cf["gamma"],
        kappa=cf["kappa"],
        alpha_large=cf["alpha_large"],
        beta=(1 + b1) * (1 + b2),
        T1=T1,
        T2_shape=T2,
        t_star=min(T1, T2),
    )


def front_bound(exps: DerivedExponents, t: float, K: float = 1.0) -> float:
    """Front position bound ``K max{t^alpha_large, t^kappa}``."""
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if K <= 0:
        raise ValueError(f"K must be positive, got {K}")
    t = float(t)
    return float(K) * max(t ** float(exps.alpha_large), t ** float(exps.kappa))


def f_of_t(exps: DerivedExponents, T: float) -> float:
    if exps.k1 >= 1 or exps.k2 >= 1:
        raise ParameterError("F(T) does not vanish at T = 0 unless k1 < 1 and k2 < 1")
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    e1 = float((1 - exps.k1) * (1 + exps.beta2))
    e2 = float((1 - exps.k2) * (1 + exps.beta1))
    return max(float(T) ** e1, float(T) ** e2)


def exponents_report(params: MediumParams, c: Number = Fraction(1), K0: Number = Fraction(1)) -> dict[str, str]:
    """Flat key-value report of every check and every derived exponent."""
    report = validate_params(params)
    out: dict[str, str] = {}
    out["param.N"] = str(params.N)
    for k in ("m", "n", "p", "d1", "d2", "d3", "w0_l1"):
        out[f"param.{k}"] = render(getattr(params, k))
    out["admissible"] = "true" if report.admissible else "false"
    for ch in report.checks:
        out[f"check.{ch.name}"] = ch.as_line()
    for i, msg in enumerate(report.warnings):
        out[f"warning.{i}"] = msg
    if report.admissible:
        try:
            exps = derive_exponents(params, c=c, K0=K0)
        except ParameterError as exc:
            out["error"] = str(exc)
        else:
            for k, v in exps.items():
                out[f"{k}.exact"] = render(v)
                out[f"{k}.decimal"] = repr(float(v))
    return out
