"""Quasi-static transmission problem for a plasmonic ball, solved mode by mode.

The field is ``S~[phi]`` inside the ball and ``S[psi] + F`` outside, where
``S~`` and ``S`` are single layers with the inclusion and background moduli.
Continuity of displacement and traction across the sphere gives, per mode,

    e~ r0 phi - e r0 psi = h
    (-1/2 + xi~) phi - (1/2 + xi) psi = g

with ``h`` and ``g`` the displacement and traction traces of ``F``.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateMaterialError, DomainError, ElastoPlasmonError, SingularSystemError
from .kernels import LameParams
from .modes import ModalField, ModeIndex, _Harmonics, _angles, _cartesian, hstar_normalizer, l2_norm_squared
from .spectrum import (
    PlasmonConfig,
    dissipation_weight,
    lossless_denominator,
    resonance_denominator,
    shifted_eigenvalue,
    sl_eigenvalue,
)


@dataclass(frozen=True)
class SourceData:
    """Boundary traces of the incident field on the sphere of radius ``r0``.

    ``incident`` optionally keeps the family-1 solid-harmonic table
    ``(n, m) -> f`` with ``F = sum f (r / incident_radius)^n kappa_1`` so that
    exterior fields can include ``F``.
    """

    h: ModalField
    g: ModalField
    r0: float
    incident: Mapping[tuple[int, int], complex] | None = None
    incident_radius: float | None = None

    def __post_init__(self):
        if self.h.n_max != self.g.n_max:
            raise ElastoPlasmonError("h and g must share the truncation degree")
        if self.h.basis != self.g.basis:
            raise ElastoPlasmonError("h and g must use the same basis")
        if not self.r0 > 0:
            raise ElastoPlasmonError("radius must be positive")

    @property
    def n_max(self) -> int:
        return self.h.n_max

    @property
    def basis(self) -> str:
        return self.h.basis

    def indices(self) -> list[ModeIndex]:
        return sorted(set(self.h) | set(self.g))


def _is_prime(idx: ModeIndex) -> bool:
    return not (idx.n == 1 and idx.family in (1, 2))


@dataclass(frozen=True)
class DensityPair:
    """Interior density ``phi`` and exterior density ``psi``.

    ``unexcited`` lists modes whose lossless denominator vanishes but whose
    numerator is zero, so no resonance is triggered there.
    """

    phi: ModalField
    psi: ModalField
    unexcited: tuple[ModeIndex, ...] = ()
    excited_resonant: tuple[ModeIndex, ...] = ()

    @property
    def phi_prime(self) -> ModalField:
        """All modes except families 1 and 2 at degree 1 (the lossy part)."""
        return self.phi.restrict(_is_prime)

    @property
    def phi_double_prime(self) -> ModalField:
        return self.phi.restrict(lambda k: not _is_prime(k))


def modal_source_from_family1(
    coeffs: Mapping[tuple[int, int], complex], r_e: float, bg: LameParams, n_max: int | None = None
) -> SourceData:
    """Traces of ``F = sum f^{nm} (r / r_e)^n kappa_1^{nm}`` on the sphere ``r = r_e``.

    The result is expressed in the raw eigenfunction basis: ``h = f`` and
    ``g = f mu0 (n - 1) / r_e``.
    """
    mu0 = float(bg.mu)
    if not r_e > 0:
        raise ElastoPlasmonError("radius must be positive")
    top = max([n for n, _ in coeffs] + [1]) if n_max is None else n_max
    h, g = {}, {}
    for (n, m), f in coeffs.items():
        idx = ModeIndex(1, n, m)
        h[idx] = f
        g[idx] = f * mu0 * (n - 1) / r_e
    return SourceData(
        ModalField(top, h, "raw"), ModalField(top, g, "raw"), r_e, dict(coeffs), r_e
    )


def _mode_data(idx: ModeIndex, cfg: PlasmonConfig):
    """``(1/2 + xi, e, -1/2 + xi~, e~)`` for one mode."""
    bg, inc = cfg.background, cfg.inclusion
    return (
        shifted_eigenvalue(idx.family, idx.n, bg, 1),
        sl_eigenvalue(idx.family, idx.n, bg),
        shifted_eigenvalue(idx.family, idx.n, inc, -1),
        sl_eigenvalue(idx.family, idx.n, inc),
    )


def _lossless_abs(idx: ModeIndex, cfg: PlasmonConfig) -> float:
    # a lossless inclusion with vanishing moduli has a pole, not a root
    try:
        return abs(lossless_denominator(idx.family, idx.n, cfg.eps1, cfg.eps2, cfg.background))
    except (DegenerateMaterialError, ZeroDivisionError):
        return math.inf


def solve_single_inclusion(src: SourceData, cfg: PlasmonConfig, resonance_tol: float = 1e-9) -> DensityPair:
    """Invert the per-mode transmission system.

    Parameters
    ----------
    src : SourceData
        Traces on the sphere; must have ``src.r0 == cfg.r0``.
    cfg : PlasmonConfig
    resonance_tol : float
        Modes with lossless denominator below this are reported as resonant
        (excited or not).
    """
    if not math.isclose(src.r0, cfg.r0, rel_tol=1e-14):
        raise ElastoPlasmonError(f"source radius {src.r0} differs from ball radius {cfg.r0}")
    r0 = cfg.r0
    phi, psi = {}, {}
    unexcited, excited = [], []
    for idx in src.indices():
        plus, e, _, e_t = _mode_data(idx, cfg)
        d = resonance_denominator(idx.family, idx.n, cfg)
        h, g = src.h[idx], src.g[idx]
        num = g - plus * h / (r0 * e)
        if d == 0:
            raise SingularSystemError(f"vanishing denominator at {idx}")
        if _lossless_abs(idx, cfg) < resonance_tol:
            (excited if abs(num) > 0 else unexcited).append(idx)
        p = num / d
        phi[idx] = p
        psi[idx] = (e_t / e) * p - h / (e * r0)
    n_max = src.n_max
    return DensityPair(
        ModalField(n_max, phi, src.basis),
        ModalField(n_max, psi, src.basis),
        tuple(unexcited),
        tuple(excited),
    )


def forward_map(dp: DensityPair, cfg: PlasmonConfig) -> SourceData:
    """Rebuild ``(h, g)`` from densities using the eigenvalue relations."""
    r0 = cfg.r0
    h, g = {}, {}
    for idx in sorted(set(dp.phi) | set(dp.psi)):
        plus, e, minus_t, e_t = _mode_data(idx, cfg)
        p, q = dp.phi[idx], dp.psi[idx]
        h[idx] = e_t * r0 * p - e * r0 * q
        g[idx] = minus_t * p - plus * q
    n_max = dp.phi.n_max
    return SourceData(ModalField(n_max, h, dp.phi.basis), ModalField(n_max, g, dp.phi.basis), r0)


def _squared_norm_factor(idx: ModeIndex, basis: str, r0: float, bg: LameParams) -> float:
    if basis == "raw":
        return l2_norm_squared(idx, r0)
    return hstar_normalizer(idx, r0, bg) ** 2 * l2_norm_squared(idx, r0)


def mode_energy(idx: ModeIndex, amplitude: complex, cfg: PlasmonConfig, basis: str = "hstar") -> float:
    """Energy dissipated by a single interior density mode."""
    norm2 = _squared_norm_factor(idx, basis, cfg.r0, cfg.background)
    w = dissipation_weight(idx.family, idx.n, cfg)
    return abs(amplitude) ** 2 * w * cfg.r0 * norm2


def dissipated_energy(dp: DensityPair, cfg: PlasmonConfig) -> float:
    """``Im int_{dD} (traction of S~[phi] from inside) . conj(S~[phi]) ds``.

    With ``S~[b] = e~ r0 b`` and interior traction ``(-1/2 + xi~) b`` per
    mode this is ``sum |phi|^2 Im(conj(e~)(-1/2 + xi~)) r0 ||b||^2``.  In the
    H* basis ``r0 ||b||^2 = -1 / e``.  Equal to the volume integral of
    ``delta (lam0 |div u|^2 + 2 mu0 |sym grad u|^2)`` over the ball.
    """
    return float(sum(mode_energy(k, v, cfg, dp.phi.basis) for k, v in dp.phi.items()))


class TractionKind(enum.Enum):
    SOLID = "solid"
    DECAYING = "decaying"


def family1_traction_coeff(kind, n: int, mu: complex, r: float) -> complex:
    """Traction coefficient of ``r^n kappa_1`` (solid) or ``r^{-n-1} kappa_1`` (decaying).

    For a toroidal field ``f(r) kappa_1`` the traction on the sphere ``|x| = r``
    is ``mu (f' - f / r) kappa_1``.
    """
    kind = TractionKind(kind)
    if n < 1 or not r > 0:
        raise ElastoPlasmonError("need n >= 1 and r > 0")
    if kind is TractionKind.SOLID:
        return complex(mu * (n - 1) * r ** (n - 1))
    return complex(-mu * (n + 2) * r ** (-n - 2))


@dataclass(frozen=True)
class FieldEvaluation:
    """Displacement at a point and how it was obtained."""

    value: np.ndarray
    region: str
    quadrature_modes: int = 0
    incident_included: bool = False


def _family1_profile(e: complex, r0: float, r: float, n: int) -> complex:
    """Radial factor of ``S[kappa_1^n]`` at radius ``r``."""
    if r < r0:
        return e * r0 * (r / r0) ** n
    return e * r0 * (r0 / r) ** (n + 1)


def incident_field(table: Mapping[tuple[int, int], complex], radius: float, x) -> np.ndarray:
    """``F(x) = sum f (r / radius)^n kappa_1^{nm}(x / r)``."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    out = np.zeros(x.shape, dtype=complex)
    if not table:
        return out
    top = max(n for n, _ in table)
    theta, phi = _angles(x / r[..., None])
    h = _Harmonics(top, theta, phi)
    for (n, m), f in table.items():
        out += f * ((r / radius) ** n)[..., None] * _cartesian(h, ModeIndex(1, n, m))
    return out


def _layer(density: ModalField, x, r0: float, params: LameParams, bg: LameParams, quad_spec=None):
    """Single layer with ``params`` of a density stored in ``bg``'s basis."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    theta, phi = _angles(x / r)
    h = _Harmonics(density.n_max, theta, phi)
    out = np.zeros(3, dtype=complex)
    rest = {}
    for idx, val in density.items():
        scale = 1.0 if density.basis == "raw" else hstar_normalizer(idx, r0, bg)
        if idx.family == 1:
            e = sl_eigenvalue(1, idx.n, params)
            out += val * scale * _family1_profile(e, r0, r, idx.n) * _cartesian(h, idx)
        else:
            rest[idx] = val * scale
    if rest:
        from .oracle import QuadratureSpec, single_layer_quadrature

        spec = quad_spec or QuadratureSpec.default()
        out += single_layer_quadrature(ModalField(density.n_max, rest, "raw"), x, r0, params, spec)
    return out, len(rest)


def evaluate_field(dp: DensityPair, src: SourceData, x, cfg: PlasmonConfig, quad_spec=None) -> FieldEvaluation:
    """Total displacement at ``x`` off the sphere.

    Family-1 modes use closed radial profiles; other families go through
    surface quadrature (counted in ``quadrature_modes``).
    """
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    r0 = cfg.r0
    if abs(r - r0) <= 1e-12 * r0:
        raise DomainError("point lies on the interface; use one-sided limits")
    if r < r0:
        val, nq = _layer(dp.phi, x, r0, cfg.inclusion, cfg.background, quad_spec)
        return FieldEvaluation(val, "interior", nq)
    val, nq = _layer(dp.psi, x, r0, cfg.background, cfg.background, quad_spec)
    included = src.incident is not None
    if included:
        val = val + incident_field(src.incident, src.incident_radius, x)
    return FieldEvaluation(val, "exterior", nq, included)


@dataclass
class SweepRow:
    delta: float
    energy: float
    phi_norm: float
    phi_prime_norm: float


@dataclass
class SweepReport:
    """Per-delta records of a resonance sweep plus a log-log slope fit."""

    rows: list[SweepRow] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def slope(self, column: str = "energy") -> float:
        """Least-squares slope of ``log column`` against ``log delta``."""
        pts = [(r.delta, getattr(r, column)) for r in self.rows if getattr(r, column) > 0]
        if len(pts) < 2:
            return float("nan")
        d, v = np.log(np.array(pts)).T
        return float(np.polyfit(d, v, 1)[0])

    def to_csv(self, header: str = "") -> str:
        buf = io.StringIO()
        if header:
            buf.write(header)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delta", "energy", "phi_norm", "phi_prime_norm"])
        for r in self.rows:
            w.writerow([f"{v:.16e}" for v in (r.delta, r.energy, r.phi_norm, r.phi_prime_norm)])
        return buf.getvalue()

    def metadata(self) -> dict:
        return {
            "config": self.config,
            "slope_energy": self.slope("energy"),
            "slope_phi_norm": self.slope("phi_norm"),
            "n_points": len(self.rows),
        }

    def to_json(self) -> str:
        return json.dumps(self.metadata(), indent=2, sort_keys=True)


def sweep_point(src: SourceData, cfg: PlasmonConfig, delta: float) -> SweepRow:
    c = cfg.with_delta(delta)
    dp = solve_single_inclusion(src, c)
    return SweepRow(delta, dissipated_energy(dp, c), dp.phi.norm(), dp.phi_prime.norm())


def resonance_sweep(src: SourceData, cfg: PlasmonConfig, deltas: Sequence[float], pool_map=map) -> SweepReport:
    """Solve and record energies along ``deltas``; ``pool_map`` must preserve order."""
    rows = list(pool_map(lambda d: sweep_point(src, cfg, d), list(deltas)))
    return SweepReport(rows)
