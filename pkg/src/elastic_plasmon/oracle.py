"""Brute-force checks of the closed forms.

Nothing here uses the eigenvalue formulas.  Single layers are integrated
numerically with the Kelvin matrix (re-implemented locally together with its
gradient), surface limits come from polynomial extrapolation of off-surface
values, and energies from volume quadrature of the strain.

Near-surface targets use a rotated grid: the target direction is moved to the
pole, the polar angle is split into panels graded geometrically towards the
pole (Gauss-Legendre on each) and the azimuth uses the trapezoidal rule, which
is exact for the trigonometric polynomials that appear.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import AccuracyError, DomainError, ElastoPlasmonError, ResolutionError
from .kernels import LameParams, kelvin_matrix, kupradze_matrix, m_omega
from .modes import ModalField, ModeIndex, SphereGrid, synthesize

GENERIC_DIRECTIONS = np.array(
    [[0.3, 0.5, 0.8], [-0.6, 0.2, 0.77], [0.1, -0.9, 0.3], [0.7, 0.65, -0.3]]
)
GENERIC_DIRECTIONS = GENERIC_DIRECTIONS / np.linalg.norm(GENERIC_DIRECTIONS, axis=1, keepdims=True)


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution and extrapolation settings.

    Parameters
    ----------
    n_theta, n_phi : int
        Product grid used by ``method="grid"``.
    offsets : tuple of float
        Distances from the sphere (relative to ``r0``) at which one-sided
        values are sampled before extrapolating to the surface.
    order : int
        Degree of the extrapolating polynomial in the offset.
    panel_nodes : int
        Gauss-Legendre nodes per polar panel for ``method="graded"``.
    method : {"graded", "grid"}
    """

    n_theta: int = 96
    n_phi: int = 192
    offsets: tuple = (0.04, 0.02, 0.01, 0.005)
    order: int = 3
    panel_nodes: int = 16
    method: str = "graded"

    def __post_init__(self):
        offs = tuple(float(h) for h in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if not offs or any(h <= 0 for h in offs):
            raise ElastoPlasmonError("offsets must be positive")
        if any(b >= a for a, b in zip(offs, offs[1:])):
            raise ElastoPlasmonError("offsets must be strictly decreasing")
        if offs[0] >= 0.5:
            raise ElastoPlasmonError("largest offset must be below r0 / 2")
        if not 0 <= self.order < len(offs):
            raise ElastoPlasmonError("extrapolation order needs more offsets than its degree")
        if self.method not in ("graded", "grid"):
            raise ElastoPlasmonError(f"unknown method {self.method!r}")

    @classmethod
    def default(cls) -> "QuadratureSpec":
        return cls()


# ---------------------------------------------------------------- kernels


def _kelvin_parts(lam: complex, mu: complex) -> tuple[complex, complex]:
    g1 = 0.5 * (1 / mu + 1 / (lam + 2 * mu))
    g2 = 0.5 * (1 / mu - 1 / (lam + 2 * mu))
    return g1 / (4 * np.pi), g2 / (4 * np.pi)


def _kelvin_apply(d: np.ndarray, dens: np.ndarray, w: np.ndarray, lam, mu, gradient: bool):
    """Sum over nodes of ``Gamma(d) dens w`` and optionally its x-gradient.

    ``d`` holds ``x - y`` for every node, shape ``(N, 3)``.
    """
    a, b = _kelvin_parts(lam, mu)
    r = np.linalg.norm(d, axis=-1)
    if np.min(r) == 0:
        raise DomainError("target coincides with a quadrature node")
    wd = dens * w[:, None]
    dot = np.einsum("ij,ij->i", d, wd)
    u = -a * np.sum(wd / r[:, None], axis=0) - b * np.sum(d * (dot / r**3)[:, None], axis=0)
    if not gradient:
        return u, None
    r3, r5 = r**3, r**5
    # d/dx_l Gamma_jk = a delta_jk x_l / r^3 - b (delta_jl x_k + delta_kl x_j) / r^3 + 3 b x_j x_k x_l / r^5
    grad = a * np.einsum("ij,il->jl", wd, d / r3[:, None])
    grad -= b * np.diag(np.full(3, np.sum(dot / r3)))
    grad -= b * np.einsum("ij,il->jl", d / r3[:, None], wd)
    grad += 3 * b * np.einsum("ij,il->jl", d * (dot / r5)[:, None], d)
    return u, grad


# ---------------------------------------------------------------- surface nodes


def _frame(direction: np.ndarray) -> np.ndarray:
    z = direction / np.linalg.norm(direction)
    helper = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    x = helper - z * (helper @ z)
    x /= np.linalg.norm(x)
    return np.stack([x, np.cross(z, x), z])


def _polar_panels(h_rel: float) -> np.ndarray:
    edges = [0.0]
    t = min(h_rel, 0.5)
    while t < 0.5:
        edges.append(t)
        t *= 2
    edges.append(0.5)
    k = int(math.ceil((math.pi - 0.5) / 0.25))
    edges.extend(np.linspace(0.5, math.pi, k + 1)[1:])
    return np.asarray(edges)


def graded_nodes(target: np.ndarray, r0: float, degree: int, panel_nodes: int = 16):
    """Surface nodes and weights concentrated around the foot of ``target``."""
    rt = float(np.linalg.norm(target))
    h_rel = max(abs(rt - r0) / r0, 1e-14)
    frame = _frame(target) if rt > 0 else np.eye(3)
    edges = _polar_panels(h_rel)
    x, w = np.polynomial.legendre.leggauss(panel_nodes)
    lo, hi = edges[:-1, None], edges[1:, None]
    theta = (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel()
    wt = (0.5 * (hi - lo) * w).ravel() * np.sin(theta)
    n_phi = 2 * degree + 12
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    t, p = np.meshgrid(theta, phi, indexing="ij")
    local = np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1).reshape(-1, 3)
    dirs = local @ frame
    weights = np.repeat(wt, n_phi) * (2 * np.pi / n_phi) * r0**2
    return dirs, weights


def grid_nodes(spec: QuadratureSpec, r0: float):
    g = SphereGrid.gauss(spec.n_theta, spec.n_phi, r0)
    return g.directions().reshape(-1, 3), g.weights.ravel()


def _density_values(density: ModalField, dirs: np.ndarray, r0: float, basis_bg: LameParams | None):
    return synthesize(density, dirs, r0, basis_bg)


def _layer_at(density, x, r0, params, spec, basis_bg, gradient=False):
    x = np.asarray(x, dtype=float)
    if spec.method == "graded":
        dirs, w = graded_nodes(x, r0, density.n_max, spec.panel_nodes)
    else:
        if 2 * density.n_max + 2 > min(spec.n_theta, spec.n_phi):
            raise ResolutionError("grid under-resolves the density")
        dirs, w = grid_nodes(spec, r0)
    dens = _density_values(density, dirs, r0, basis_bg)
    return _kelvin_apply(x - r0 * dirs, dens, w, complex(params.lam), complex(params.mu), gradient)


def single_layer_quadrature(
    density: ModalField,
    x,
    r0: float,
    params: LameParams,
    spec: QuadratureSpec | None = None,
    basis_bg: LameParams | None = None,
) -> np.ndarray:
    """``int_{|y| = r0} Gamma(x - y) density(y) ds(y)`` by quadrature.

    Parameters
    ----------
    basis_bg : LameParams, optional
        Background used to interpret an H*-basis density (defaults to
        ``params``).
    """
    spec = spec or QuadratureSpec.default()
    x = np.asarray(x, dtype=float)
    dist = abs(float(np.linalg.norm(x)) - r0)
    if dist < spec.offsets[-1] * r0 * (1 - 1e-12):
        raise AccuracyError(f"target at distance {dist:.3e} from the sphere is below the smallest offset")
    if not density.coeffs:
        return np.zeros(3, dtype=complex)
    u, _ = _layer_at(density, x, r0, params, spec, basis_bg or params)
    return u


def layer_and_traction(density, x, r0, params, spec=None, basis_bg=None):
    """Single layer at ``x`` and its traction on the sphere through ``x``."""
    spec = spec or QuadratureSpec.default()
    u, grad = _layer_at(density, x, r0, params, spec, basis_bg or params, gradient=True)
    nu = np.asarray(x, dtype=float) / np.linalg.norm(x)
    lam, mu = complex(params.lam), complex(params.mu)
    strain = 0.5 * (grad + grad.T)
    return u, lam * np.trace(grad) * nu + 2 * mu * strain @ nu


def extrapolate(offsets: Sequence[float], values: np.ndarray, order: int) -> np.ndarray:
    """Value at zero offset of the degree-``order`` least-squares polynomial."""
    h = np.asarray(offsets, dtype=float)
    v = np.asarray(values)
    V = np.vander(h, order + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(V, v.reshape(len(h), -1), rcond=None)
    return coef[0].reshape(v.shape[1:])


def one_sided_limits(density, directions, r0, params, spec=None, basis_bg=None):
    """Extrapolated surface values of the layer and its traction from both sides.

    Returns a dict with arrays of shape ``(k, 3)`` under keys
    ``u_in, u_out, t_in, t_out``.
    """
    spec = spec or QuadratureSpec.default()
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    out = {}
    for side, sgn in (("in", -1), ("out", 1)):
        us, ts = [], []
        for h in spec.offsets:
            row_u, row_t = [], []
            for d in dirs:
                u, t = layer_and_traction(density, (r0 + sgn * h * r0) * d, r0, params, spec, basis_bg)
                row_u.append(u)
                row_t.append(t)
            us.append(row_u)
            ts.append(row_t)
        hs = [h * r0 for h in spec.offsets]
        out[f"u_{side}"] = extrapolate(hs, np.array(us), spec.order)
        out[f"t_{side}"] = extrapolate(hs, np.array(ts), spec.order)
    return out


# ---------------------------------------------------------------- reports


@dataclass
class VerificationReport:
    check: str
    params: dict
    measured: object
    expected: object
    rel_error: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        def conv(v):
            if isinstance(v, complex):
                return {"re": v.real, "im": v.imag}
            if isinstance(v, dict):
                return {k: conv(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        d = asdict(self)
        d["pass"] = d.pop("passed")
        return conv(d)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _scalar_fit(kappa: np.ndarray, values: np.ndarray) -> complex:
    return complex(np.sum(np.conj(kappa) * values) / np.sum(np.abs(kappa) ** 2))


def _lame_dict(p: LameParams) -> dict:
    return {"lambda": complex(p.lam), "mu": complex(p.mu)}


def verify_eigenrelation(
    idx: ModeIndex,
    r0: float,
    params: LameParams,
    spec: QuadratureSpec | None = None,
    rtol: float = 1e-4,
    directions=GENERIC_DIRECTIONS,
) -> VerificationReport:
    """Measure ``S[kappa] / (r0 kappa)`` and the one-sided traction coefficients.

    The single layer of a raw eigenfunction is sampled off the sphere,
    extrapolated to it from each side and projected onto the eigenfunction.
    ``extra`` carries the interior/exterior measurements and the measured
    one-sided traction coefficients.
    """
    from .modes import raw_eigenfunction
    from .spectrum import np_eigenvalue, sl_eigenvalue

    spec = spec or QuadratureSpec.default()
    density = ModalField(idx.n, {idx: 1.0}, "raw")
    lim = one_sided_limits(density, directions, r0, params, spec)
    kap = raw_eigenfunction(idx, directions)
    e_in = _scalar_fit(kap, lim["u_in"]) / r0
    e_out = _scalar_fit(kap, lim["u_out"]) / r0
    t_in = _scalar_fit(kap, lim["t_in"])
    t_out = _scalar_fit(kap, lim["t_out"])
    measured = 0.5 * (e_in + e_out)
    expected = complex(sl_eigenvalue(idx.family, idx.n, params))
    xi = complex(np_eigenvalue(idx.family, idx.n, params))
    rel = abs(measured - expected) / abs(expected)
    t_err = max(abs(t_in - (xi - 0.5)), abs(t_out - (xi + 0.5))) / max(abs(xi - 0.5), abs(xi + 0.5))
    return VerificationReport(
        "eigenrelation",
        {"family": idx.family, "n": idx.n, "m": idx.m, "r0": r0, **_lame_dict(params)},
        measured,
        expected,
        float(rel),
        bool(rel <= rtol),
        {
            "e_interior": e_in,
            "e_exterior": e_out,
            "continuity_gap": float(abs(e_in - e_out) / abs(expected)),
            "traction_interior": t_in,
            "traction_exterior": t_out,
            "xi": xi,
            "traction_rel_error": float(t_err),
        },
    )


def verify_jump(
    density: ModalField,
    r0: float,
    params: LameParams,
    spec: QuadratureSpec | None = None,
    rtol: float = 1e-3,
    directions=GENERIC_DIRECTIONS,
    basis_bg: LameParams | None = None,
) -> VerificationReport:
    """Check ``traction(S[phi])|+ - traction(S[phi])|- = phi`` at sample points."""
    spec = spec or QuadratureSpec.default()
    lim = one_sided_limits(density, directions, r0, params, spec, basis_bg)
    dens = synthesize(density, directions, r0, basis_bg or params)
    scale = float(np.max(np.abs(dens))) or 1.0
    defect = float(np.max(np.abs(lim["t_out"] - lim["t_in"] - dens))) / scale
    extra = {
        "interior_traction_max": float(np.max(np.abs(lim["t_in"]))) / scale,
        "exterior_traction_max": float(np.max(np.abs(lim["t_out"]))) / scale,
    }
    if len(density.coeffs) == 1:
        (idx, amp), = density.items()
        extra["interior_coeff"] = _scalar_fit(dens, lim["t_in"])
        extra["exterior_coeff"] = _scalar_fit(dens, lim["t_out"])
    return VerificationReport(
        "jump", {"r0": r0, **_lame_dict(params)}, defect, 0.0, defect, bool(defect <= rtol), extra
    )


# ---------------------------------------------------------------- volume energy


@dataclass(frozen=True)
class VolumeSpec:
    n_radial: int = 24
    n_theta: int = 32
    n_phi: int = 64
    step: float = 1e-5


def _gradient_fd(field_fn: Callable, pts: np.ndarray, step: float) -> np.ndarray:
    """Central-difference gradient ``G[..., j, l] = d u_j / d x_l``."""
    cols = []
    for l in range(3):
        e = np.zeros(3)
        e[l] = step
        cols.append((field_fn(pts + e) - field_fn(pts - e)) / (2 * step))
    return np.stack(cols, axis=-1)


def volume_energy(
    field_fn: Callable,
    delta: float,
    bg: LameParams,
    r_outer: float,
    r_inner: float = 0.0,
    vspec: VolumeSpec | None = None,
) -> float:
    """``delta int (lam0 |div u|^2 + 2 mu0 |sym grad u|^2) dx`` over a ball or shell."""
    vspec = vspec or VolumeSpec()
    if not 0 <= r_inner < r_outer:
        raise ElastoPlasmonError("need 0 <= r_inner < r_outer")
    if vspec.n_radial < 2 or vspec.n_theta < 2:
        raise ResolutionError("volume grid too coarse")
    xr, wr = np.polynomial.legendre.leggauss(vspec.n_radial)
    r = 0.5 * (r_outer - r_inner) * xr + 0.5 * (r_outer + r_inner)
    wr = 0.5 * (r_outer - r_inner) * wr * r**2
    grid = SphereGrid.gauss(vspec.n_theta, vspec.n_phi)
    dirs = grid.directions().reshape(-1, 3)
    ws = grid.weights.ravel()
    lam0, mu0 = float(bg.lam), float(bg.mu)
    total = 0.0
    for rk, wk in zip(r, wr):
        pts = rk * dirs
        G = _gradient_fd(field_fn, pts, vspec.step * max(rk, 1e-3))
        div = np.trace(G, axis1=-2, axis2=-1)
        sym = 0.5 * (G + np.swapaxes(G, -1, -2))
        dens = lam0 * np.abs(div) ** 2 + 2 * mu0 * np.sum(np.abs(sym) ** 2, axis=(-2, -1))
        total += wk * float(np.sum(ws * dens))
    return delta * total


def interior_field(density: ModalField, cfg) -> Callable:
    """Callable for ``S~[phi]`` inside the ball from family-1 radial profiles."""
    from .modes import _Harmonics, _angles, _cartesian, hstar_normalizer
    from .spectrum import sl_eigenvalue

    if any(k.family != 1 for k in density):
        raise DomainError("analytic interior profiles are available for family 1 only")
    r0 = cfg.r0
    inc = cfg.inclusion

    def fn(pts):
        pts = np.asarray(pts, dtype=float)
        r = np.linalg.norm(pts, axis=-1)
        theta, phi = _angles(pts / r[..., None])
        h = _Harmonics(density.n_max, theta, phi)
        out = np.zeros(pts.shape, dtype=complex)
        for idx, val in density.items():
            scale = 1.0 if density.basis == "raw" else hstar_normalizer(idx, r0, cfg.background)
            e = sl_eigenvalue(1, idx.n, inc)
            prof = e * r0 * (r / r0) ** idx.n
            out += val * scale * prof[..., None] * _cartesian(h, idx)
        return out

    return fn


def density_volume_energy(density: ModalField, cfg, vspec: VolumeSpec | None = None) -> float:
    """Volume-quadrature dissipation of the interior field of ``density``."""
    if not density.coeffs:
        return 0.0
    return volume_energy(interior_field(density, cfg), cfg.delta, cfg.background, cfg.r0, 0.0, vspec)


# ---------------------------------------------------------------- quasi-static split


def default_split_samples() -> list[tuple[np.ndarray, float]]:
    out = []
    for omega in (0.0, 0.01, 0.05, 0.1):
        for radius in (0.5, 1.0, 2.0):
            for d in GENERIC_DIRECTIONS:
                out.append((radius * d, omega))
    return out


def verify_gamma_split(
    samples: Sequence[tuple[np.ndarray, float]] | None,
    params: LameParams,
    n_terms: int = 30,
    tol: float = 1e-10,
) -> VerificationReport:
    """Max over samples of ``|Gamma^omega - Gamma^0 - omega M^omega|``."""
    samples = default_split_samples() if samples is None else samples
    worst = 0.0
    for x, omega in samples:
        if omega > 0.1 + 1e-15:
            raise ElastoPlasmonError("split check is specified for omega <= 0.1")
        full = kupradze_matrix(x, omega, params, n_terms)
        res = full - kelvin_matrix(x, params) - omega * m_omega(x, omega, params, n_terms)
        worst = max(worst, float(np.max(np.abs(res))))
    return VerificationReport(
        "gamma_split",
        {"n_terms": n_terms, "n_samples": len(samples), **_lame_dict(params)},
        worst,
        0.0,
        worst,
        bool(worst <= tol),
    )
