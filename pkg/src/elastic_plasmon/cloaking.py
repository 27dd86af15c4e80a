"""Core-shell device and cloaking by anomalous localized resonance.

Geometry: core ``|x| < r_i`` with moduli ``(eps3 lam0, eps4 mu0)``, shell
``r_i < |x| < r_e`` with ``((eps1 + i delta) lam0, (eps2 + i delta) mu0)`` and
background outside.  A source is described by its family-1 potential
``F = sum f^{nm} (r / r_e)^n kappa_1^{nm}`` near the device.

The field is ``S_core[upsilon]`` in the core, ``S_shell,i[phi] + S_shell,e[varphi]``
in the shell and ``S[psi] + F`` outside.  Only shear moduli enter the
family-1 modes, so ``eps1`` and ``eps3`` have no effect.

All densities here are coefficients in the raw eigenfunction basis.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import DegreeError, DomainError, ElastoPlasmonError, SingularSystemError
from .kernels import LameParams
from .modes import ModeIndex, _Harmonics, _angles, _cartesian

SourceTable = Mapping[tuple[int, int], complex]


@dataclass(frozen=True)
class ShellConfig:
    """Core-shell geometry and materials.

    ``n0`` records the resonant degree a preset was built for (``None`` for
    hand-made configurations).
    """

    r_i: float
    r_e: float
    eps1: float
    eps2: float
    eps3: float
    eps4: float
    delta: float
    background: LameParams
    n0: int | None = None

    def __post_init__(self):
        if not 0 < self.r_i < self.r_e:
            raise ElastoPlasmonError(f"need 0 < r_i < r_e, got {self.r_i}, {self.r_e}")
        if not self.delta >= 0:
            raise ElastoPlasmonError("loss parameter must be nonnegative")

    @property
    def rho(self) -> float:
        return self.r_i / self.r_e

    @property
    def mu0(self) -> float:
        return float(self.background.mu)

    @property
    def mu_shell(self) -> complex:
        return (self.eps2 + 1j * self.delta) * self.mu0

    @property
    def mu_core(self) -> float:
        return self.eps4 * self.mu0

    @property
    def shell(self) -> LameParams:
        return LameParams.plasmon(self.background, self.eps1, self.eps2, self.delta)

    @property
    def core(self) -> LameParams:
        return LameParams.core(self.background, self.eps3, self.eps4)

    @classmethod
    def preset(
        cls,
        r_i: float,
        r_e: float,
        delta: float,
        bg: LameParams,
        n0: int | None = None,
        eps1: float = 1.0,
        eps3: float = 1.0,
    ) -> "ShellConfig":
        """Cloaking device tuned to degree ``n0`` (chosen from ``delta`` when omitted)."""
        if n0 is None:
            n0 = select_n0(r_i / r_e, delta)
        if n0 < 2:
            raise DegreeError("the preset needs n0 >= 2")
        c = (n0 + 2) / (n0 - 1)
        return cls(r_i, r_e, eps1, -c, eps3, c * c, delta, bg, n0)

    def with_delta(self, delta: float, retune: bool = True) -> "ShellConfig":
        if retune and self.n0 is not None:
            return ShellConfig.preset(self.r_i, self.r_e, delta, self.background, None, self.eps1, self.eps3)
        return replace(self, delta=delta)

    def as_dict(self) -> dict:
        return {
            "r_i": self.r_i,
            "r_e": self.r_e,
            "eps1": self.eps1,
            "eps2": self.eps2,
            "eps3": self.eps3,
            "eps4": self.eps4,
            "delta": self.delta,
            "lambda0": float(self.background.lam),
            "mu0": self.mu0,
            "n0": self.n0,
        }


@dataclass(frozen=True)
class CloakCoefficients:
    """Numerators and common denominator of one ``(n, m)`` mode.

    Densities are ``numerator / d_n``.  For ``n = 1`` the densities are stored
    directly with ``d_n = 1``.
    """

    n: int
    m: int
    upsilon_num: complex
    phi_num: complex
    varphi_num: complex
    psi_num: complex
    d_n: complex

    @property
    def upsilon(self) -> complex:
        return self.upsilon_num / self.d_n

    @property
    def phi(self) -> complex:
        return self.phi_num / self.d_n

    @property
    def varphi(self) -> complex:
        return self.varphi_num / self.d_n

    @property
    def psi(self) -> complex:
        return self.psi_num / self.d_n

    def densities(self) -> np.ndarray:
        return np.array([self.upsilon, self.phi, self.varphi, self.psi])


def shell_denominator(n: int, cfg: ShellConfig, form: str = "corrected") -> complex:
    """``d^n`` of the closed-form coefficients.

    ``form="corrected"`` pairs ``mu~`` with ``mu0`` in the first product,
    which is what the modal system yields; ``form="uncorrected"`` pairs ``mu_core``
    with ``mu0`` instead.
    """
    mc, ms, m0 = cfg.mu_core, cfg.mu_shell, cfg.mu0
    tail = (n + 2) * (n - 1) * cfg.rho ** (2 * n + 1) * (mc - ms) * (ms - m0)
    if form == "corrected":
        return ((n - 1) * mc + (n + 2) * ms) * ((n - 1) * ms + (n + 2) * m0) + tail
    if form == "uncorrected":
        return ((n - 1) * mc + (n + 2) * m0) * ((n - 1) * mc + (n + 2) * ms) + tail
    raise ElastoPlasmonError(f"unknown form {form!r}")


def shell_coefficients(n: int, m: int, f_nm: complex, cfg: ShellConfig, form: str = "corrected") -> CloakCoefficients:
    """Closed-form densities of one source mode.

    Parameters
    ----------
    form : {"corrected", "uncorrected"}
        ``"corrected"`` divides every numerator by ``r_e``, uses
        :func:`shell_denominator` with the corrected pairing and places
        ``rho^{2n+1}`` on the whole second term of ``psi``.  ``"uncorrected"``
        keeps the uncorrected arrangement for comparison; it disagrees with
        :func:`modal_system_solve` in ``d^n`` and ``psi``.
    """
    if n < 1 or abs(m) > n:
        raise DegreeError(f"invalid mode ({n}, {m})")
    mc, ms, m0, rho, re = cfg.mu_core, cfg.mu_shell, cfg.mu0, cfg.rho, cfg.r_e
    if n == 1:
        return CloakCoefficients(1, m, -3 * f_nm * mc / re, 0j, -3 * f_nm * ms / re, 0j, 1.0 + 0j)
    if form not in ("corrected", "uncorrected"):
        raise ElastoPlasmonError(f"unknown form {form!r}")
    k = 2 * n + 1
    ups = -f_nm * m0 * mc * ms * k**3 * rho ** (n - 1)
    phi = f_nm * m0 * (mc - ms) * ms * (n - 1) * k**2 * rho ** (n - 1)
    var = -f_nm * m0 * ms * k**2 * ((n - 1) * mc + (n + 2) * ms)
    first = -m0 * (m0 - ms) * ((n - 1) * mc + (n + 2) * ms)
    if form == "corrected":
        second = m0 * (mc - ms) * ((n - 1) * m0 + (n + 2) * ms) * rho ** (2 * n + 1)
        psi = f_nm * (n - 1) * k * (first + second)
        d = shell_denominator(n, cfg, "corrected")
        nums = [v / re for v in (ups, phi, var, psi)]
    else:
        second = m0 * (mc - ms) * ((n - 1) * m0 + (n + 2) * ms * rho**2)
        psi = f_nm * (n - 1) * k * (first + second)
        d = shell_denominator(n, cfg, "uncorrected")
        nums = [ups, phi, var, psi]
    if d == 0:
        raise SingularSystemError(f"d^{n} vanishes")
    return CloakCoefficients(n, m, *nums, d)


def modal_matrix(n: int, cfg: ShellConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-mode 4x4 system for ``(upsilon, phi, varphi, psi)`` and its right side per unit ``f``.

    Rows: displacement and traction continuity at ``r_i``, then at ``r_e``.
    Built from the single-layer profiles ``e r0 (r/r0)^n`` (inside) and
    ``e r0 (r0/r)^{n+1}`` (outside) and the toroidal traction
    ``mu (f' - f/r)``; nothing from the closed forms is reused.
    """
    ri, re, rho = cfg.r_i, cfg.r_e, cfg.rho
    mc, ms, m0 = cfg.mu_core, cfg.mu_shell, cfg.mu0

    def e(mu):
        return -1 / (mu * (2 * n + 1))

    def in_trac(mu, r0, r):
        # traction at radius r of e r0 (r/r0)^n
        return e(mu) * r0 * mu * (n - 1) * r ** (n - 1) / r0**n

    def out_trac(mu, r0, r):
        return -e(mu) * r0 * mu * (n + 2) * r0 ** (n + 1) / r ** (n + 2)

    A = np.zeros((4, 4), dtype=complex)
    A[0] = [e(mc) * ri, -e(ms) * ri, -e(ms) * re * rho**n, 0]
    # one-sided traction at r_i: core from inside, shell layers from outside
    A[1] = [in_trac(mc, ri, ri), -out_trac(ms, ri, ri), -in_trac(ms, re, ri), 0]
    A[2] = [0, e(ms) * ri * (ri / re) ** (n + 1), e(ms) * re, -e(m0) * re]
    A[3] = [0, out_trac(ms, ri, re), in_trac(ms, re, re), -out_trac(m0, re, re)]
    rhs = np.array([0, 0, 1, m0 * (n - 1) / re], dtype=complex)
    return A, rhs


def modal_system_solve(n: int, m: int, f_nm: complex, cfg: ShellConfig, cond_limit: float = 1e15) -> CloakCoefficients:
    """Solve the per-mode system numerically; ``d^n`` comes from the determinant.

    ``det A = r_i r_e d^n / ((2n+1)^4 mu0 mu_core mu_shell^2)`` for the
    corrected ``d^n``, which fixes the normalization of the numerators.
    """
    if n < 1 or abs(m) > n:
        raise DegreeError(f"invalid mode ({n}, {m})")
    A, rhs = modal_matrix(n, cfg)
    det = np.linalg.det(A)
    if det == 0 or not np.isfinite(det) or np.linalg.cond(A) > cond_limit:
        raise SingularSystemError(f"modal system for n={n} is numerically singular")
    x = np.linalg.solve(A, f_nm * rhs)
    if n == 1:
        return CloakCoefficients(1, m, x[0], x[1], x[2], x[3], 1.0 + 0j)
    d = det * (2 * n + 1) ** 4 * cfg.mu0 * cfg.mu_core * cfg.mu_shell**2 / (cfg.r_i * cfg.r_e)
    return CloakCoefficients(n, m, *(x * d), d)


def matrix_condition(n: int, cfg: ShellConfig) -> float:
    return float(np.linalg.cond(modal_matrix(n, cfg)[0]))


def critical_radius(r_i: float, r_e: float) -> float:
    """``sqrt(r_e^3 / r_i)``."""
    if not 0 < r_i < r_e:
        raise ElastoPlasmonError("need 0 < r_i < r_e")
    return math.sqrt(r_e**3 / r_i)


def denominator_estimate(n: int, n0: int, rho: float, delta: float) -> float:
    """Scale of ``|d^n|`` under the preset: ``n0^2 (delta^2 + rho^{2 n0})`` at ``n0``, else ``((n - n0)/n0)^2``."""
    if n == n0:
        return n0**2 * (delta**2 + rho ** (2 * n0))
    return ((n - n0) / n0) ** 2


def select_n0(rho: float, delta: float) -> int:
    """Unique ``n0`` with ``rho^n0 < delta <= rho^(n0 - 1)``.

    Requires ``0 < delta < rho < 1`` so that ``n0 >= 2``.
    """
    if not 0 < rho < 1:
        raise ElastoPlasmonError("rho must lie in (0, 1)")
    if not delta > 0:
        raise ElastoPlasmonError("delta must be positive")
    if delta >= 1:
        raise DomainError(f"no admissible n0 for delta = {delta} >= 1")
    if delta >= rho:
        raise DegreeError(f"delta = {delta} >= rho = {rho} would give n0 <= 1 or violate delta < rho")
    n = 1
    while not rho**n < delta:
        n += 1
    return n


# ---------------------------------------------------------------- energy and fields


def _coefficients(n, m, f, cfg, method):
    if method == "closed":
        return shell_coefficients(n, m, f, cfg)
    if method == "solve":
        return modal_system_solve(n, m, f, cfg)
    raise ElastoPlasmonError(f"unknown method {method!r}")


def shell_mode_energy(c: CloakCoefficients, cfg: ShellConfig) -> float:
    """Dissipation in the shell of one mode, ``Im int sym grad u : C~ conj(sym grad u)``.

    For ``u = g(r) kappa_1`` the divergence vanishes and Green's formula
    leaves ``n(n+1) Im(mu~ [r^2 (g' - g/r) conj(g)]_{r_i}^{r_e})``.
    """
    n = c.n
    ms = cfg.mu_shell
    es = -1 / (ms * (2 * n + 1))
    ri, re = cfg.r_i, cfg.r_e
    a, b = c.phi, c.varphi

    def g(r):
        return es * (a * ri ** (n + 2) / r ** (n + 1) + b * r**n / re ** (n - 1))

    def gp(r):
        return es * (-(n + 1) * a * ri ** (n + 2) / r ** (n + 2) + n * b * r ** (n - 1) / re ** (n - 1))

    def flux(r):
        return r**2 * (gp(r) - g(r) / r) * np.conj(g(r))

    return float(n * (n + 1) * (ms * (flux(re) - flux(ri))).imag)


@dataclass(frozen=True)
class CloakingEnergy:
    total: float
    resonant_part: float
    remainder: float
    reference_resonant: float
    reference_remainder: float


def reference_energy(f: SourceTable, cfg: ShellConfig) -> tuple[float, float]:
    """Asymptotic predictions ``sum |f^{n0 m}|^2 n0 delta / (delta^2 + rho^{2 n0})`` and the off-resonant sum."""
    n0 = cfg.n0 if cfg.n0 is not None else select_n0(cfg.rho, cfg.delta)
    dl, rho = cfg.delta, cfg.rho
    res = sum(abs(v) ** 2 for (n, _), v in f.items() if n == n0) * n0 * dl / (dl**2 + rho ** (2 * n0))
    rest = sum(dl * abs(v) ** 2 * n**4 * n0 / abs(n - n0) ** 3 for (n, _), v in f.items() if n != n0 and n >= 2)
    return float(res), float(rest)


def cloaking_energy(f: SourceTable, cfg: ShellConfig, method: str = "closed") -> CloakingEnergy:
    """Shell dissipation of the source table, split at the resonant degree."""
    n0 = cfg.n0
    res = rest = 0.0
    for (n, m), v in sorted(f.items()):
        e = shell_mode_energy(_coefficients(n, m, v, cfg, method), cfg)
        if n == n0:
            res += e
        else:
            rest += e
    ref_res, ref_rest = reference_energy(f, cfg) if n0 is not None else (float("nan"), float("nan"))
    return CloakingEnergy(res + rest, res, rest, ref_res, ref_rest)


def _kappa_table(f: SourceTable, x: np.ndarray):
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    theta, phi = _angles(x / r[..., None])
    top = max(n for n, _ in f)
    return r, _Harmonics(top, theta, phi)


def exterior_field(f: SourceTable, cfg: ShellConfig, x, include_source: bool = True, method: str = "closed") -> np.ndarray:
    """Displacement outside the device.

    ``include_source=False`` returns only the scattered part ``S[psi]``,
    which stays meaningful where the source series for ``F`` diverges.
    """
    x = np.asarray(x, dtype=float)
    r, h = _kappa_table(f, x) if f else (np.linalg.norm(x, axis=-1), None)
    if np.any(r <= cfg.r_e):
        raise DomainError("exterior evaluation needs |x| > r_e")
    out = np.zeros(x.shape, dtype=complex)
    re, m0 = cfg.r_e, cfg.mu0
    for (n, m), v in sorted(f.items()):
        kap = _cartesian(h, ModeIndex(1, n, m))
        c = _coefficients(n, m, v, cfg, method)
        e0 = -1 / (m0 * (2 * n + 1))
        amp = e0 * re * c.psi * (re / r) ** (n + 1)
        if include_source:
            amp = amp + v * (r / re) ** n
        out += np.asarray(amp)[..., None] * kap
    return out


def shell_field(f: SourceTable, cfg: ShellConfig, x, method: str = "closed") -> np.ndarray:
    """Displacement inside the shell ``r_i < |x| < r_e``."""
    x = np.asarray(x, dtype=float)
    r, h = _kappa_table(f, x)
    if np.any(r <= cfg.r_i) or np.any(r >= cfg.r_e):
        raise DomainError("shell evaluation needs r_i < |x| < r_e")
    out = np.zeros(x.shape, dtype=complex)
    ri, re = cfg.r_i, cfg.r_e
    for (n, m), v in sorted(f.items()):
        c = _coefficients(n, m, v, cfg, method)
        es = -1 / (cfg.mu_shell * (2 * n + 1))
        amp = es * (c.phi * ri ** (n + 2) / r ** (n + 1) + c.varphi * r**n / re ** (n - 1))
        out += np.asarray(amp)[..., None] * _cartesian(h, ModeIndex(1, n, m))
    return out


def decaying_source(r_s: float, r_e: float, n_max: int, orders: Sequence[int] = (0,), n_min: int = 1) -> dict:
    """Table ``f^{nm} = (r_e / r_s)^n`` standing in for a source at radius ``r_s``."""
    return {(n, m): (r_e / r_s) ** n for n in range(n_min, n_max + 1) for m in orders if abs(m) <= n}


# ---------------------------------------------------------------- verdicts


@dataclass
class CalrPoint:
    delta: float
    n0: int
    eps2: float
    eps4: float
    energy: float
    max_exterior_sample: float


@dataclass
class CalrReport:
    resonant: bool
    energy_ratio: float
    field_ratio: float
    field_variation: float
    points: list[CalrPoint] = field(default_factory=list)
    settings: dict = field(default_factory=dict)

    def to_csv(self, header: str = "") -> str:
        buf = io.StringIO()
        if header:
            buf.write(header)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delta", "n0", "eps2", "eps4", "energy", "max_exterior_sample"])
        for p in self.points:
            w.writerow(
                [f"{p.delta:.16e}", p.n0, f"{p.eps2:.16e}", f"{p.eps4:.16e}", f"{p.energy:.16e}", f"{p.max_exterior_sample:.16e}"]
            )
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "resonant": self.resonant,
            "energy_ratio": self.energy_ratio,
            "field_ratio": self.field_ratio,
            "field_variation": self.field_variation,
            "energy_curve": [[p.delta, p.energy] for p in self.points],
            "field_bound_curve": [[p.delta, p.max_exterior_sample] for p in self.points],
            "settings": self.settings,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


SAMPLE_DIRECTIONS = np.array([[0.3, 0.5, 0.8], [-0.6, 0.2, 0.77], [0.1, -0.9, 0.3], [0.0, 0.6, -0.8]])
SAMPLE_DIRECTIONS = SAMPLE_DIRECTIONS / np.linalg.norm(SAMPLE_DIRECTIONS, axis=1, keepdims=True)


def calr_point(f: SourceTable, template: ShellConfig, delta: float, sample_radius: float, directions=SAMPLE_DIRECTIONS) -> CalrPoint:
    cfg = ShellConfig.preset(template.r_i, template.r_e, delta, template.background, None, template.eps1, template.eps3)
    energy = cloaking_energy(f, cfg).total
    samples = exterior_field(f, cfg, sample_radius * directions, include_source=False)
    return CalrPoint(delta, cfg.n0, cfg.eps2, cfg.eps4, energy, float(np.max(np.linalg.norm(samples, axis=-1))))


def calr_verdict(
    f: SourceTable,
    source_radius: float,
    template: ShellConfig,
    delta_sweep: Sequence[float],
    blowup_factor: float = 1e3,
    bound_factor: float = 10.0,
    sample_factor: float = 1.1,
    pool_map=map,
) -> CalrReport:
    """Sweep ``delta`` (descending), retuning the preset, and classify the response.

    Exterior samples are the scattered field at ``sample_factor r_e^2 / r_i``.
    The verdict is resonant when the energy grows by ``blowup_factor`` from
    first to last point while the exterior samples stay within
    ``bound_factor`` of their first value.
    """
    deltas = list(delta_sweep)
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ElastoPlasmonError("delta sweep must be strictly descending")
    radius = sample_factor * template.r_e**2 / template.r_i
    pts = list(pool_map(lambda d: calr_point(f, template, d, radius), deltas))
    e = [p.energy for p in pts]
    s = [p.max_exterior_sample for p in pts]
    energy_ratio = e[-1] / e[0] if e[0] > 0 else float("inf")
    field_ratio = max(s) / s[0] if s[0] > 0 else float("inf")
    variation = (max(s) - min(s)) / min(s) if min(s) > 0 else float("inf")
    resonant = energy_ratio >= blowup_factor and field_ratio <= bound_factor
    settings = {
        "source_radius": source_radius,
        "critical_radius": critical_radius(template.r_i, template.r_e),
        "sample_radius": radius,
        "blowup_factor": blowup_factor,
        "bound_factor": bound_factor,
        "n_modes": len(f),
    }
    return CalrReport(resonant, energy_ratio, field_ratio, variation, pts, settings)
