"""Power-law media realizing the structure conditions on damping and wave speed."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np

if TYPE_CHECKING:
    from .solver import FieldState

LawKind = Literal["power_law", "constant_test"]


@dataclass(frozen=True)
class ConstitutiveLaw:
    """Damping ``a`` and wave-speed ``b`` as functions of the energy density.

    ``power_law`` is the extremal medium: equality in the damping lower bound
    and the wave-speed upper bound, with ``eps_reg`` added to ``w`` inside the
    powers. ``constant_test`` returns ``a_const``/``b_const`` everywhere and
    keeps ``m, n, p, d1, d2`` only as reference exponents for
    :func:`check_structure_conditions`.
    """

    kind: LawKind = "power_law"
    m: float = 0.0
    n: float = 2.0
    p: float = 2.0
    d1: float = 1.0
    d2: float = 1.0
    eps_reg: float = 1e-12
    a_const: float = 0.0
    b_const: float = 1.0

    def __post_init__(self):
        if self.kind not in ("power_law", "constant_test"):
            raise ValueError(f"unknown law kind {self.kind!r}")
        if self.eps_reg < 0:
            raise ValueError("eps_reg must be nonnegative")
        if self.kind == "constant_test":
            if self.a_const < 0:
                raise ValueError("a_const must be nonnegative")
            if self.b_const < 0:
                raise ValueError("b_const must be nonnegative")

    @property
    def d3(self) -> float:
        """Gradient constant realized by the power law, ``d2 |n - 1|``."""
        return self.d2 * abs(self.n - 1.0)

    def damping(self, w, grad_w_norm):
        w = np.asarray(w, dtype=float)
        g = np.asarray(grad_w_norm, dtype=float)
        if self.kind == "constant_test":
            return np.full(np.broadcast(w, g).shape, float(self.a_const))
        return self.d1 * (w + self.eps_reg) ** (self.m - 1.0) * g**self.p

    def speed(self, w):
        w = np.asarray(w, dtype=float)
        if self.kind == "constant_test":
            return np.full(w.shape, float(self.b_const))
        return self.d2 * (w + self.eps_reg) ** (self.n - 1.0)


@dataclass(frozen=True)
class CoefficientSample:
    a: float
    b: float


def eval_coefficients(law: ConstitutiveLaw, w: float, grad_w_norm: float) -> CoefficientSample:
    if w < 0 or grad_w_norm < 0:
        raise ValueError("w and |grad w| must be nonnegative")
    return CoefficientSample(a=float(law.damping(w, grad_w_norm)), b=float(law.speed(w)))


def epsilon_lower_bound(law: ConstitutiveLaw, w: float) -> float:
    """Smallest permittivity compatible with the wave-speed bound, ``(w+eps)^(1-n)/d2``."""
    if w < 0:
        raise ValueError("w must be nonnegative")
    return (w + law.eps_reg) ** (1.0 - law.n) / law.d2


@dataclass
class StructureReport:
    """Worst-case slack per condition; negative slack is a violation."""

    slack: dict[str, float]

    def holds(self, tol: float = 0.0) -> dict[str, bool]:
        return {k: v >= -tol for k, v in self.slack.items()}

    def all_hold(self, tol: float = 0.0) -> bool:
        return all(self.holds(tol).values())


def _gradient(f: np.ndarray, spacing: tuple[float, ...]) -> list[np.ndarray]:
    if f.ndim == 1:
        return [np.gradient(f, spacing[0])]
    return list(np.gradient(f, *spacing))


def check_structure_conditions(law: ConstitutiveLaw, field: "FieldState") -> StructureReport:
    """Evaluate the four structure conditions on the cell-centred energy density.

    Reference bounds use the law's own ``m, n, p, d1, d2`` and ``d3 = d2|n-1|``,
    with ``w + eps_reg`` in place of ``w``. Gradients are centred differences.
    """
    from .solver import cell_energy

    for name, arr in field.arrays().items():
        bad = np.argwhere(~np.isfinite(arr))
        if bad.size:
            raise ValueError(f"non-finite value in {name} at cell {tuple(int(i) for i in bad[0])}")

    w = cell_energy(field)
    spacing = field.grid.dx
    gw = _gradient(w, spacing)
    gnorm = np.sqrt(sum(g * g for g in gw))
    wr = w + law.eps_reg

    a = law.damping(w, gnorm)
    a_lower = law.d1 * wr ** (law.m - 1.0) * gnorm**law.p
    # b1 (electric) and b2 (magnetic) are the same function of w by construction
    b1 = law.speed(w)
    b2 = law.speed(w)
    b_upper = law.d2 * wr ** (law.n - 1.0)
    gb = _gradient(b1, spacing)
    gb_norm = np.sqrt(sum(g * g for g in gb))
    gb_upper = law.d3 * wr ** (law.n - 2.0) * gnorm

    slack = {
        "c1": float(np.min(a - a_lower)),
        "c2": float(-np.max(np.abs(b1 - b2))),
        "c3": float(np.min(b_upper - np.abs(b1))),
        "c4": float(np.min(gb_upper - gb_norm)),
    }
    return StructureReport(slack)
