"""Spherical harmonics and the three vector eigenfunction families on a sphere.

Scalar harmonics are orthonormal on the unit sphere with the Condon-Shortley
phase, ``Y_n^m = Pbar_n^m(cos theta) e^{i m phi}``.  The vector families, for
a unit direction ``nu``, are::

    family 1:  grad_S Y_n^m x nu
    family 2:  grad_S Y_n^m + n Y_n^m nu
    family 3: -grad_S Y_{n-1}^m + n Y_{n-1}^m nu

They are functions of the direction only.  Coefficient tables
(:class:`ModalField`) are stored either in this raw basis or in the basis
normalized to unit length in the energy (H*) inner product of a sphere of
radius ``r0``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import DegreeError, ElastoPlasmonError, ResolutionError
from .kernels import LameParams

BASES = ("hstar", "raw")


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Index ``(family, n, m)`` of a vector eigenfunction.

    Family 3 of degree ``n`` is built on the scalar harmonic of degree
    ``n - 1``, so its order is limited to ``|m| <= n - 1``.
    """

    family: int
    n: int
    m: int

    def __post_init__(self):
        if self.family not in (1, 2, 3):
            raise ElastoPlasmonError(f"family must be 1, 2 or 3, got {self.family}")
        if self.n < 1:
            raise DegreeError(f"degree must be >= 1, got {self.n}")
        if abs(self.m) > self.n:
            raise DegreeError(f"|m| = {abs(self.m)} exceeds degree {self.n}")
        if self.family == 3 and abs(self.m) > self.n - 1:
            raise DegreeError(
                f"family 3 of degree {self.n} uses Y_{self.n - 1}; |m| = {abs(self.m)} too large"
            )

    @property
    def scalar_degree(self) -> int:
        return self.n - 1 if self.family == 3 else self.n


def mode_indices(n_max: int, families: Iterable[int] = (1, 2, 3)) -> list[ModeIndex]:
    """All valid indices with ``n <= n_max``, ordered by (family, n, m)."""
    out = []
    for fam in families:
        for n in range(1, n_max + 1):
            top = n - 1 if fam == 3 else n
            out.extend(ModeIndex(fam, n, m) for m in range(-top, top + 1))
    return out


@dataclass(frozen=True)
class ModalField:
    """Truncated coefficient table over the vector eigenfunctions.

    Parameters
    ----------
    n_max : int
        Truncation degree; every stored index has ``n <= n_max``.
    coeffs : mapping ModeIndex -> complex
        Absent entries are zero.
    basis : {"hstar", "raw"}
        ``"hstar"`` means amplitudes multiply H*-normalized eigenfunctions.
    residual : float, optional
        Reconstruction residual when produced by :func:`project_modal`.
    """

    n_max: int
    coeffs: Mapping[ModeIndex, complex] = field(default_factory=dict)
    basis: str = "hstar"
    residual: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.basis not in BASES:
            raise ElastoPlasmonError(f"unknown basis {self.basis!r}")
        clean = {}
        for idx, val in self.coeffs.items():
            if idx.n > self.n_max:
                raise DegreeError(f"{idx} exceeds truncation degree {self.n_max}")
            val = complex(val)
            if not (math.isfinite(val.real) and math.isfinite(val.imag)):
                raise ElastoPlasmonError(f"non-finite coefficient at {idx}")
            clean[idx] = val
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    def __getitem__(self, idx: ModeIndex) -> complex:
        return self.coeffs.get(idx, 0j)

    def __iter__(self) -> Iterator[ModeIndex]:
        return iter(self.coeffs)

    def items(self):
        return self.coeffs.items()

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector."""
        return math.sqrt(sum(abs(v) ** 2 for v in self.coeffs.values()))

    def restrict(self, keep) -> "ModalField":
        """Sub-table of the indices for which ``keep(idx)`` is true."""
        return ModalField(
            self.n_max, {k: v for k, v in self.coeffs.items() if keep(k)}, self.basis
        )

    def to_basis(self, basis: str, r0: float, bg: LameParams) -> "ModalField":
        """Re-express the same vector field in another basis."""
        if basis == self.basis:
            return self
        if basis not in BASES:
            raise ElastoPlasmonError(f"unknown basis {basis!r}")
        out = {}
        for idx, val in self.coeffs.items():
            c = hstar_normalizer(idx, r0, bg)
            # field = a_h * c * kappa = a_raw * kappa
            out[idx] = val * c if basis == "raw" else val / c
        return ModalField(self.n_max, out, basis)

    def to_json(self) -> str:
        modes = [
            {"family": k.family, "n": k.n, "m": k.m, "re": v.real, "im": v.imag}
            for k, v in self.coeffs.items()
        ]
        return json.dumps({"N_max": self.n_max, "basis": self.basis, "modes": modes})

    @classmethod
    def from_json(cls, text: str) -> "ModalField":
        data = json.loads(text)
        coeffs = {
            ModeIndex(int(e["family"]), int(e["n"]), int(e["m"])): complex(e["re"], e["im"])
            for e in data["modes"]
        }
        return cls(int(data["N_max"]), coeffs, data.get("basis", "hstar"))


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre (polar) by uniform (azimuth) product grid.

    ``weights`` integrate over the sphere of radius ``radius``.
    """

    theta: np.ndarray
    phi: np.ndarray
    theta_weights: np.ndarray
    radius: float = 1.0

    @classmethod
    def gauss(cls, n_theta: int, n_phi: int, radius: float = 1.0) -> "SphereGrid":
        if n_theta < 1 or n_phi < 1:
            raise ResolutionError("grid needs at least one node per direction")
        if not radius > 0:
            raise ElastoPlasmonError("radius must be positive")
        x, w = np.polynomial.legendre.leggauss(n_theta)
        theta = np.arccos(x[::-1])
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        return cls(theta, phi, w[::-1].copy(), float(radius))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.theta.size, self.phi.size)

    @property
    def weights(self) -> np.ndarray:
        dphi = 2 * np.pi / self.phi.size
        return np.outer(self.theta_weights, np.full(self.phi.size, dphi)) * self.radius**2

    def directions(self) -> np.ndarray:
        """Unit directions, shape ``(n_theta, n_phi, 3)``."""
        t, p = np.meshgrid(self.theta, self.phi, indexing="ij")
        return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)

    def points(self) -> np.ndarray:
        return self.radius * self.directions()


def _legendre_tables(lmax: int, theta: np.ndarray):
    """Normalized associated Legendre values and their pole-safe companions.

    Returns ``P, Q, dP`` of shape ``(lmax + 1, lmax + 1, ...)`` indexed
    ``[n, m]`` for ``0 <= m <= n``, with ``Q = P / sin(theta)`` (zero for
    ``m = 0``) and ``dP = d P / d theta``.  ``Y_n^m = P[n, m] e^{i m phi}``.
    """
    theta = np.asarray(theta, dtype=float)
    x, s = np.cos(theta), np.sin(theta)
    size = lmax + 2
    P = np.zeros((size, size) + theta.shape)
    Q = np.zeros_like(P)
    P[0, 0] = 1 / math.sqrt(4 * math.pi)
    for m in range(1, size):
        f = -math.sqrt((2 * m + 1) / (2 * m))
        P[m, m] = f * s * P[m - 1, m - 1]
        Q[m, m] = f * P[m - 1, m - 1] if m == 1 else f * s * Q[m - 1, m - 1]
    for m in range(0, size):
        if m + 1 < size:
            a = math.sqrt(2 * m + 3)
            P[m + 1, m] = a * x * P[m, m]
            Q[m + 1, m] = a * x * Q[m, m]
        for n in range(m + 2, size):
            a = math.sqrt((4 * n * n - 1) / (n * n - m * m))
            b = math.sqrt(((n - 1) ** 2 - m * m) / (4 * (n - 1) ** 2 - 1))
            P[n, m] = a * (x * P[n - 1, m] - b * P[n - 2, m])
            Q[n, m] = a * (x * Q[n - 1, m] - b * Q[n - 2, m])
    dP = np.zeros_like(P)
    for n in range(0, lmax + 1):
        for m in range(0, n + 1):
            up = math.sqrt((n - m) * (n + m + 1)) * P[n, m + 1] if m + 1 <= n else 0.0
            lower = -P[n, 1] if m == 0 else P[n, m - 1]
            down = math.sqrt((n + m) * (n - m + 1)) * lower if n >= 1 else 0.0
            dP[n, m] = 0.5 * (up - down)
    return P[: lmax + 1, : lmax + 1], Q[: lmax + 1, : lmax + 1], dP[: lmax + 1, : lmax + 1]


def _angles(unit_dir) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(unit_dir, dtype=float)
    if d.shape[-1] != 3:
        raise ElastoPlasmonError("directions must have trailing dimension 3")
    norm = np.linalg.norm(d, axis=-1)
    if np.any(np.abs(norm - 1) > 1e-12):
        raise ElastoPlasmonError("direction is not a unit vector")
    theta = np.arccos(np.clip(d[..., 2] / norm, -1.0, 1.0))
    phi = np.arctan2(d[..., 1], d[..., 0])
    return theta, phi


def _frames(theta, phi):
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    r_hat = np.stack([st * cp, st * sp, ct], axis=-1)
    t_hat = np.stack([ct * cp, ct * sp, -st], axis=-1)
    p_hat = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
    return r_hat, t_hat, p_hat


def _signed(table, n, m):
    """Entry of a Legendre table for a possibly negative order."""
    val = table[n, abs(m)]
    return (-1) ** abs(m) * val if m < 0 else val


class _Harmonics:
    """Cached scalar tables for a fixed set of directions."""

    def __init__(self, lmax: int, theta, phi):
        self.theta = np.asarray(theta, dtype=float)
        self.phi = np.asarray(phi, dtype=float)
        self.P, self.Q, self.dP = _legendre_tables(lmax, self.theta)

    def spherical_components(self, idx: ModeIndex):
        """(theta, phi, radial) components of the raw eigenfunction, without e^{i m phi}."""
        n, m = idx.n, idx.m
        if idx.family == 3:
            k = n - 1
            P, Q, dP = _signed(self.P, k, m), _signed(self.Q, k, m), _signed(self.dP, k, m)
            return -dP + 0j, -1j * m * Q, n * P + 0j
        P, Q, dP = _signed(self.P, n, m), _signed(self.Q, n, m), _signed(self.dP, n, m)
        if idx.family == 1:
            return 1j * m * Q, -dP + 0j, np.zeros_like(P) + 0j
        return dP + 0j, 1j * m * Q, n * P + 0j


def spherical_harmonic(n: int, m: int, unit_dir) -> np.ndarray | complex:
    """Orthonormal complex spherical harmonic ``Y_n^m`` at unit direction(s)."""
    if n < 0:
        raise DegreeError("degree must be non-negative")
    if abs(m) > n:
        raise ElastoPlasmonError(f"|m| = {abs(m)} exceeds degree {n}")
    theta, phi = _angles(unit_dir)
    P, _, _ = _legendre_tables(n, theta)
    val = _signed(P, n, m) * np.exp(1j * m * phi)
    return complex(val) if np.ndim(val) == 0 else val


def raw_eigenfunction(idx: ModeIndex, unit_dir) -> np.ndarray:
    """Unnormalized vector eigenfunction at unit direction(s), shape ``(..., 3)``."""
    theta, phi = _angles(unit_dir)
    h = _Harmonics(idx.n, theta, phi)
    return _cartesian(h, idx)


def _cartesian(h: _Harmonics, idx: ModeIndex) -> np.ndarray:
    r_hat, t_hat, p_hat = _frames(h.theta, h.phi)
    ct, cp, cr = (np.asarray(c, dtype=complex) for c in h.spherical_components(idx))
    phase = np.exp(1j * idx.m * h.phi)
    return phase[..., None] * (ct[..., None] * t_hat + cp[..., None] * p_hat + cr[..., None] * r_hat)


def l2_norm_squared(idx: ModeIndex, r0: float = 1.0) -> float:
    """Squared L2 norm of the raw eigenfunction over the sphere of radius ``r0``."""
    if not r0 > 0:
        raise ElastoPlasmonError("radius must be positive")
    n = idx.n
    unit = {1: n * (n + 1), 2: n * (2 * n + 1), 3: n * (2 * n - 1)}[idx.family]
    return float(unit * r0**2)


def hstar_normalizer(idx: ModeIndex, r0: float, bg: LameParams) -> float:
    """Scale ``c`` making ``c * kappa`` unit length in the H* inner product.

    The H* norm is ``-<phi, S[phi]>`` and the eigenfunctions satisfy
    ``S[kappa] = e r0 kappa`` with ``e < 0`` for a convex background.
    """
    from .spectrum import sl_eigenvalue

    e = sl_eigenvalue(idx.family, idx.n, bg).real
    return float((-e * r0 * l2_norm_squared(idx, r0)) ** -0.5)


def _scale(idx: ModeIndex, basis: str, r0: float, bg: LameParams | None) -> float:
    if basis == "raw":
        return 1.0
    if bg is None:
        raise ElastoPlasmonError("the H* basis needs background parameters")
    return hstar_normalizer(idx, r0, bg)


def synthesize(mf: ModalField, unit_dir, r0: float = 1.0, bg: LameParams | None = None) -> np.ndarray:
    """Evaluate the vector field of a coefficient table at unit direction(s)."""
    theta, phi = _angles(unit_dir)
    out = np.zeros(theta.shape + (3,), dtype=complex)
    if not mf.coeffs:
        return out
    h = _Harmonics(mf.n_max, theta, phi)
    for idx, val in mf.items():
        out += val * _scale(idx, mf.basis, r0, bg) * _cartesian(h, idx)
    return out


def synthesize_on_grid(mf: ModalField, grid: SphereGrid, bg: LameParams | None = None) -> np.ndarray:
    """Samples of a coefficient table on a grid, shape ``(n_theta, n_phi, 3)``."""
    return synthesize(mf, grid.directions(), grid.radius, bg)


def project_modal(
    samples,
    grid: SphereGrid,
    n_max: int,
    bg: LameParams | None = None,
    basis: str = "hstar",
    families: Iterable[int] = (1, 2, 3),
    drop_below: float = 0.0,
) -> ModalField:
    """Project a sampled boundary field onto the eigenfunctions up to ``n_max``.

    Raw coefficients come from L2 quadrature (FFT in azimuth, Gauss-Legendre
    in the polar angle) and are converted to ``basis``.  The relative L2
    residual of the reconstruction is stored on the result.

    Parameters
    ----------
    samples : array, shape (n_theta, n_phi, 3)
        Cartesian vector samples at ``grid.directions()``.
    drop_below : float
        Coefficients with magnitude below this threshold are omitted.
    """
    samples = np.asarray(samples, dtype=complex)
    nt, nph = grid.shape
    if samples.shape != (nt, nph, 3):
        raise ElastoPlasmonError(f"samples shape {samples.shape} does not match grid {grid.shape}")
    if nt < 2 * n_max + 2 or nph < 2 * n_max + 2:
        raise ResolutionError(
            f"grid {grid.shape} under-resolves degree {n_max}; need >= {2 * n_max + 2} per direction"
        )
    if basis not in BASES:
        raise ElastoPlasmonError(f"unknown basis {basis!r}")
    t, p = np.meshgrid(grid.theta, grid.phi, indexing="ij")
    _, t_hat, p_hat = _frames(t, p)
    r_hat = grid.directions()
    comps = [np.einsum("ijk,ijk->ij", samples, e) for e in (t_hat, p_hat, r_hat)]
    # azimuthal Fourier coefficients: c_m(theta) = int f e^{-i m phi} dphi
    spectra = [np.fft.fft(c, axis=1) * (2 * np.pi / nph) for c in comps]
    h = _Harmonics(n_max, grid.theta, np.zeros_like(grid.theta))
    w = grid.theta_weights
    out = {}
    for idx in mode_indices(n_max, families):
        ct, cp, cr = h.spherical_components(idx)
        col = idx.m % nph
        inner = np.sum(
            w * (spectra[0][:, col] * np.conj(ct) + spectra[1][:, col] * np.conj(cp)
                 + spectra[2][:, col] * np.conj(cr))
        )
        raw = inner / l2_norm_squared(idx, 1.0)
        val = raw / _scale(idx, basis, grid.radius, bg)
        if abs(val) > drop_below:
            out[idx] = val
    mf = ModalField(n_max, out, basis)
    recon = synthesize_on_grid(mf, grid, bg)
    wts = grid.weights[..., None]
    denom = math.sqrt(float(np.sum(wts * np.abs(samples) ** 2)))
    resid = math.sqrt(float(np.sum(wts * np.abs(samples - recon) ** 2)))
    return ModalField(n_max, out, basis, resid / denom if denom > 0 else resid)
