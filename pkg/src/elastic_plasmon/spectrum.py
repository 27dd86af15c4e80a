"""Closed-form spectra on a ball, resonance denominators and critical parameters.

On the ball of radius ``r0`` the boundary operators are diagonal in the
vector eigenfunction families: the Neumann-Poincare operator has eigenvalue
``xi`` and the single layer ``S`` acts as ``S[kappa] = e r0 kappa``.  A
plasmonic ball with moduli ``((eps1 + i delta) lam0, (eps2 + i delta) mu0)``
resonates in a mode when that mode's denominator tends to zero with ``delta``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .errors import DegenerateMaterialError, DegreeError, ElastoPlasmonError, PoleError
from .kernels import Convexity, LameParams, convexity_status

#: a configuration sits "at" a branch when |eps - c| <= BRANCH_RTOL (1 + |c|)
BRANCH_RTOL = 1e-9


def _check(family: int, n: int) -> None:
    if family not in (1, 2, 3):
        raise ElastoPlasmonError(f"family must be 1, 2 or 3, got {family}")
    if n < 1:
        raise DegreeError(f"degree must be >= 1, got {n}")


def _moduli(params: LameParams) -> tuple[complex, complex]:
    lam, mu = complex(params.lam), complex(params.mu)
    if lam + 2 * mu == 0:
        raise DegenerateMaterialError("lambda + 2 mu vanishes")
    return lam, mu


def np_eigenvalue(family: int, n: int, params: LameParams) -> complex:
    """Eigenvalue of the Neumann-Poincare operator on the ball (radius free)."""
    _check(family, n)
    lam, mu = _moduli(params)
    if family == 1:
        return complex(3 / (4 * n + 2))
    q = 2 * (lam + 2 * mu) * (4 * n * n - 1)
    if family == 2:
        return (3 * lam - 2 * mu * (2 * n * n - 2 * n - 3)) / q
    return (-3 * lam + 2 * mu * (2 * n * n + 2 * n - 3)) / q


def shifted_eigenvalue(family: int, n: int, params: LameParams, sign: int) -> complex:
    """``sign/2 + xi`` in factored form, free of cancellation.

    ``sign = -1`` gives the interior traction factor, which vanishes exactly
    at ``n = 1`` for families 1 and 2.
    """
    _check(family, n)
    if sign not in (-1, 1):
        raise ElastoPlasmonError("sign must be +1 or -1")
    lam, mu = _moduli(params)
    if family == 1:
        return complex(-(n - 1) / (2 * n + 1) if sign < 0 else (n + 2) / (2 * n + 1))
    q = (lam + 2 * mu) * (4 * n * n - 1)
    if family == 2:
        if sign < 0:
            return -2 * (n - 1) * ((n + 1) * lam + (3 * n + 2) * mu) / q
        return ((2 * n * n + 1) * lam + 2 * (n * n + n + 1) * mu) / q
    if sign < 0:
        return -((2 * n * n + 1) * lam + 2 * (n * n - n + 1) * mu) / q
    return 2 * (n + 1) * ((n - 1) * lam + (3 * n - 2) * mu) / q


def sl_eigenvalue(family: int, n: int, params: LameParams) -> complex:
    """Single-layer coefficient ``e`` with ``S[kappa] = e r0 kappa``."""
    _check(family, n)
    lam, mu = _moduli(params)
    if mu == 0:
        raise DegenerateMaterialError("shear modulus vanishes")
    if family == 1:
        return -1 / (mu * (2 * n + 1))
    q = mu * (lam + 2 * mu) * (4 * n * n - 1)
    if family == 2:
        return -(mu * (2 + 3 * n) + lam * (n + 1)) / q
    return -(lam * (n - 1) + mu * (3 * n - 2)) / q


@dataclass(frozen=True)
class PlasmonConfig:
    """Plasmonic ball: scaling ``eps1, eps2``, loss ``delta`` and background."""

    eps1: float
    eps2: float
    delta: float
    background: LameParams
    r0: float = 1.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ElastoPlasmonError(f"loss parameter must be positive, got {self.delta}")
        if not self.r0 > 0:
            raise ElastoPlasmonError("radius must be positive")

    @property
    def inclusion(self) -> LameParams:
        return LameParams.plasmon(self.background, self.eps1, self.eps2, self.delta)

    def with_delta(self, delta: float) -> "PlasmonConfig":
        return PlasmonConfig(self.eps1, self.eps2, delta, self.background, self.r0)


def denominator(family: int, n: int, inclusion: LameParams, bg: LameParams) -> complex:
    """``-1/2 + xi~ - (1/2 + xi) e~/e`` for arbitrary inclusion moduli."""
    e_t = sl_eigenvalue(family, n, inclusion)
    e = sl_eigenvalue(family, n, bg)
    return shifted_eigenvalue(family, n, inclusion, -1) - shifted_eigenvalue(family, n, bg, 1) * e_t / e


def resonance_denominator(family: int, n: int, cfg: PlasmonConfig) -> complex:
    return denominator(family, n, cfg.inclusion, cfg.background)


def lossless_denominator(family: int, n: int, eps1: float, eps2: float, bg: LameParams) -> complex:
    """Denominator at ``delta = 0`` evaluated directly."""
    return denominator(family, n, LameParams(eps1 * bg.lam, eps2 * bg.mu), bg)


class BranchKind(enum.Enum):
    C1 = "C1"
    C21 = "C21"
    C22 = "C22"
    C3 = "C3"


#: which modal family each branch resonates, and which scaling it fixes
BRANCH_FAMILY = {BranchKind.C1: 1, BranchKind.C21: 2, BranchKind.C22: 2, BranchKind.C3: 3}
BRANCH_TARGET = {BranchKind.C1: "eps2", BranchKind.C21: "eps2", BranchKind.C22: "eps2", BranchKind.C3: "eps1"}


@dataclass(frozen=True)
class CriticalBranch:
    kind: BranchKind
    n: int

    def __post_init__(self):
        kind = BranchKind(self.kind)
        object.__setattr__(self, "kind", kind)
        low = 2 if kind in (BranchKind.C1, BranchKind.C22) else 1
        if self.n < low:
            raise DegreeError(f"branch {kind.value} needs degree >= {low}, got {self.n}")

    @property
    def family(self) -> int:
        return BRANCH_FAMILY[self.kind]

    @property
    def target(self) -> str:
        """Name of the scaling parameter this branch prescribes."""
        return BRANCH_TARGET[self.kind]

    def __str__(self) -> str:
        return f"{self.kind.value}({self.n})"


def critical_value(branch: CriticalBranch, eps_other: float, bg: LameParams) -> float:
    """Critical scaling for a branch.

    C1, C21 and C22 return a value of ``eps2`` (``eps_other`` is ``eps1``,
    used by C21 only); C3 returns a value of ``eps1`` given ``eps2 = eps_other``.
    """
    n = branch.n
    lam, mu = float(bg.lam), float(bg.mu)
    kind = branch.kind
    if kind is BranchKind.C1:
        return -(n + 2) / (n - 1)
    if kind is BranchKind.C21:
        return -eps_other * (n + 1) * lam / ((3 * n + 2) * mu)
    if kind is BranchKind.C22:
        num = (2 * n * n + 1) * lam + (2 * n * n + 2 * n + 2) * mu
        return -num / (2 * (n - 1) * ((n + 1) * lam + (3 * n + 2) * mu))
    e2 = eps_other
    den = ((2 * n * n + 1) * e2 + 2 * n * n - 2) * lam
    if den == 0:
        raise PoleError(f"C3({n}) has a pole at eps2 = {e2}")
    return -2 * e2 * ((n * n - n + 1) * e2 + 3 * n * n + n - 2) * mu / den


def branch_point(branch: CriticalBranch, eps_other: float, bg: LameParams) -> tuple[float, float]:
    """``(eps1, eps2)`` sitting exactly on the branch."""
    c = critical_value(branch, eps_other, bg)
    return (c, eps_other) if branch.target == "eps1" else (eps_other, c)


def classify_violation(eps1: float, eps2: float, bg: LameParams) -> Convexity:
    """Convexity status of the lossless plasmon pair ``(eps1 lam0, eps2 mu0)``."""
    return convexity_status(eps1 * float(bg.lam), eps2 * float(bg.mu))


def dissipation_weight(family: int, n: int, cfg: PlasmonConfig) -> float:
    """``Im(conj(e~) (-1/2 + xi~))`` by direct complex evaluation."""
    inc = cfg.inclusion
    e_t = sl_eigenvalue(family, n, inc)
    return float((e_t.conjugate() * shifted_eigenvalue(family, n, inc, -1)).imag)


def weight_polynomials(n: int, cfg: PlasmonConfig) -> tuple[float, float, float]:
    """The polynomials ``(d1, d2, d3)`` of the family-3 weight."""
    lam, mu = float(cfg.background.lam), float(cfg.background.mu)
    e1, e2 = cfg.eps1, cfg.eps2
    d1 = (
        4 * e1 * e2 * lam * mu * (n**3 - 2 * n**2 + 2 * n - 1)
        + e1**2 * lam**2 * (2 * n**3 - 2 * n**2 + n - 1)
        + e2**2 * mu * (lam * (4 * n**2 - 1) * n + 2 * mu * (3 * n**3 - 5 * n**2 + 5 * n - 2))
    )
    d2 = (lam * (n - 1) + mu * (3 * n - 2)) * (lam * (2 * n**2 + 1) + 2 * mu * (n**2 - n + 1))
    lt, mt = complex(cfg.inclusion.lam), complex(cfg.inclusion.mu)
    d3 = abs((lt + 2 * mt) * (4 * n**2 - 1)) ** 2
    return d1, d2, d3


def closed_weight(family: int, n: int, cfg: PlasmonConfig, variant: str = "eps2") -> float:
    """Closed-form dissipation weights, for cross-checking :func:`dissipation_weight`.

    Parameters
    ----------
    variant : str
        Families 1 and 2: ``"eps2"`` uses ``eps2^2 + delta^2`` in the
        denominator (the value of ``|mu~|^2 / mu0^2``), ``"eps1"`` uses the
        ``eps1^2 + delta^2`` in its place.  Family 3: ``"uncorrected"`` is
        ``delta mu0 (d1 + delta^2 d2) / d3``; ``"eps2"`` divides instead by
        ``mu0 (eps2^2 + delta^2) d3``, which is the exact value.
    """
    _check(family, n)
    mu0 = float(cfg.background.mu)
    dl = cfg.delta
    if family in (1, 2):
        if variant not in ("eps2", "eps1"):
            raise ElastoPlasmonError(f"unknown variant {variant!r} for family {family}")
        eps = cfg.eps2 if variant == "eps2" else cfg.eps1
        if family == 1:
            return (n - 1) * dl / ((2 * n + 1) ** 2 * (eps**2 + dl**2) * mu0)
        inc = cfg.inclusion
        amp = abs(sl_eigenvalue(2, n, inc) * complex(inc.mu)) ** 2
        return 2 * (n - 1) * amp * dl / ((eps**2 + dl**2) * mu0)
    d1, d2, d3 = weight_polynomials(n, cfg)
    if variant == "uncorrected":
        return (dl * mu0 * d1 + dl**3 * mu0 * d2) / d3
    if variant == "eps2":
        return dl * (d1 + dl**2 * d2) / (mu0 * (cfg.eps2**2 + dl**2) * d3)
    raise ElastoPlasmonError(f"unknown variant {variant!r} for family 3")


@dataclass(frozen=True)
class ResonantDegree:
    family: int
    n: int
    branch: CriticalBranch
    abs_denominator: float

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "branch": self.branch.kind.value,
            "abs_D_at_zero": self.abs_denominator,
        }


def _label(family: int, n: int, eps1: float, eps2: float, bg: LameParams) -> CriticalBranch:
    if family == 1:
        return CriticalBranch(BranchKind.C1, n)
    if family == 3:
        return CriticalBranch(BranchKind.C3, n)
    if n == 1:
        return CriticalBranch(BranchKind.C21, n)
    c21 = critical_value(CriticalBranch(BranchKind.C21, n), eps1, bg)
    c22 = critical_value(CriticalBranch(BranchKind.C22, n), eps1, bg)
    kind = BranchKind.C21 if abs(eps2 - c21) <= abs(eps2 - c22) else BranchKind.C22
    return CriticalBranch(kind, n)


def scan_resonant_degrees(
    eps1: float, eps2: float, bg: LameParams, n_max: int, tol: float = 1e-9
) -> list[ResonantDegree]:
    """Modes ``(family, n <= n_max)`` whose lossless denominator is below ``tol``.

    Modes whose inclusion has ``lambda + 2 mu = 0`` are skipped: there the
    denominator is either a pole or a removable point with a nonzero limit.
    """
    if n_max < 2:
        raise DegreeError("scan needs n_max >= 2")
    out = []
    for family in (1, 2, 3):
        for n in range(1, n_max + 1):
            try:
                d = abs(lossless_denominator(family, n, eps1, eps2, bg))
            except DegenerateMaterialError:
                continue
            if d < tol:
                out.append(ResonantDegree(family, n, _label(family, n, eps1, eps2, bg), d))
    return out


def scan_to_json(hits: list[ResonantDegree]) -> str:
    return json.dumps([h.as_dict() for h in hits])


def at_branch(eps: float, value: float) -> bool:
    return abs(eps - value) <= BRANCH_RTOL * (1 + abs(value))


def xi_limits(bg: LameParams) -> tuple[float, float]:
    """Large-degree limits of the family-2 and family-3 eigenvalues."""
    lam, mu = float(bg.lam), float(bg.mu)
    v = mu / (2 * (lam + 2 * mu))
    return -v, v


__all__ = [
    "BRANCH_RTOL",
    "BranchKind",
    "CriticalBranch",
    "PlasmonConfig",
    "ResonantDegree",
    "at_branch",
    "branch_point",
    "classify_violation",
    "closed_weight",
    "critical_value",
    "denominator",
    "dissipation_weight",
    "lossless_denominator",
    "np_eigenvalue",
    "resonance_denominator",
    "scan_resonant_degrees",
    "scan_to_json",
    "shifted_eigenvalue",
    "sl_eigenvalue",
    "weight_polynomials",
    "xi_limits",
]
