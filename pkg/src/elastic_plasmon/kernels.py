"""Lamé parameters and the fundamental solutions of the isotropic Lamé system.

Conventions: unit mass density, so the background wave speeds are
``c_T = sqrt(mu0)`` and ``c_L = sqrt(lambda0 + 2 mu0)``.  All kernels act on
arrays of points with trailing dimension 3 and return ``(..., 3, 3)``
complex arrays.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ElastoPlasmonError, SingularityError

DEFAULT_TERMS = 30


class Convexity(enum.Enum):
    BOTH_HOLD = "both_hold"
    FIRST_BROKEN = "first_broken"
    SECOND_BROKEN = "second_broken"
    BOTH_BROKEN = "both_broken"


def convexity_status(lam: float, mu: float) -> Convexity:
    """Classify a real Lamé pair against ``mu > 0`` and ``3 lam + 2 mu > 0``."""
    if not (math.isfinite(lam) and math.isfinite(mu)):
        raise ElastoPlasmonError(f"non-finite Lamé pair ({lam}, {mu})")
    first = mu <= 0
    second = 3 * lam + 2 * mu <= 0
    if first and second:
        return Convexity.BOTH_BROKEN
    if first:
        return Convexity.FIRST_BROKEN
    if second:
        return Convexity.SECOND_BROKEN
    return Convexity.BOTH_HOLD


@dataclass(frozen=True)
class LameParams:
    """A (possibly complex) Lamé pair.

    Use :meth:`background` for the host medium, :meth:`plasmon` for the lossy
    inclusion/shell and :meth:`core` for the real core of a core-shell device.
    """

    lam: complex
    mu: complex

    @classmethod
    def background(cls, lam: float, mu: float) -> "LameParams":
        if isinstance(lam, complex) or isinstance(mu, complex):
            raise ElastoPlasmonError("background Lamé parameters must be real")
        lam, mu = float(lam), float(mu)
        status = convexity_status(lam, mu)
        if status is not Convexity.BOTH_HOLD:
            raise ElastoPlasmonError(
                f"background ({lam}, {mu}) violates strong convexity: {status.value}"
            )
        return cls(lam, mu)

    @classmethod
    def plasmon(cls, bg: "LameParams", eps1: float, eps2: float, delta: float) -> "LameParams":
        if not delta > 0:
            raise ElastoPlasmonError(f"loss parameter must be positive, got {delta}")
        return cls((eps1 + 1j * delta) * bg.lam, (eps2 + 1j * delta) * bg.mu)

    @classmethod
    def core(cls, bg: "LameParams", eps3: float, eps4: float) -> "LameParams":
        return cls(eps3 * bg.lam, eps4 * bg.mu)

    @property
    def is_real(self) -> bool:
        return complex(self.lam).imag == 0 and complex(self.mu).imag == 0

    @property
    def c_t(self) -> float:
        return math.sqrt(complex(self.mu).real)

    @property
    def c_l(self) -> float:
        return math.sqrt(complex(self.lam + 2 * self.mu).real)


def _radius(x) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise ElastoPlasmonError("points must have trailing dimension 3")
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise SingularityError("fundamental solution evaluated at x = 0")
    return x, r


def kelvin_matrix(x, bg: LameParams) -> np.ndarray:
    """Static fundamental solution (Kelvin matrix) at ``x``.

    ``-gamma1 delta_jk / (4 pi |x|) - gamma2 x_j x_k / (4 pi |x|^3)`` with
    ``gamma1, gamma2 = (1/mu +- 1/(lam + 2 mu)) / 2``.  Complex parameters are
    accepted, which the oracle uses for the lossy inclusion.
    """
    x, r = _radius(x)
    lam, mu = complex(bg.lam), complex(bg.mu)
    g1 = 0.5 * (1 / mu + 1 / (2 * mu + lam))
    g2 = 0.5 * (1 / mu - 1 / (2 * mu + lam))
    r = r[..., None, None]
    eye = np.eye(3)
    xx = x[..., :, None] * x[..., None, :]
    return -g1 * eye / (4 * np.pi * r) - g2 * xx / (4 * np.pi * r**3)


def kupradze_matrix(x, omega: float, bg: LameParams, n_terms: int = DEFAULT_TERMS) -> np.ndarray:
    """Time-harmonic fundamental solution of ``L + omega^2`` (radiating).

    Evaluated from the closed exponential form
    ``-delta_jk e^{i k_T r}/(4 pi mu r) + d_j d_k (e^{i k_L r} - e^{i k_T r}) / (4 pi omega^2 r)``
    with the second derivatives taken analytically.  ``n_terms`` is accepted
    for signature symmetry with :func:`m_omega`; the closed form needs no
    truncation.  At ``omega == 0`` the Kelvin matrix is returned.
    """
    if omega < 0:
        raise ElastoPlasmonError("frequency must be non-negative")
    if n_terms < 1:
        raise ElastoPlasmonError("n_terms must be positive")
    if omega == 0:
        return kelvin_matrix(x, bg)
    x, r = _radius(x)
    mu = float(bg.mu)
    kt = omega / bg.c_t
    kl = omega / bg.c_l
    et = np.exp(1j * kt * r)
    el = np.exp(1j * kl * r)
    # g = e^{i kl r} - e^{i kt r}, written to avoid cancellation at small omega
    half = 0.5 * (kl - kt) * r
    g = 2j * np.sin(half) * np.exp(1j * 0.5 * (kl + kt) * r)
    g1 = 1j * kl * el - 1j * kt * et
    g2 = -(kl**2) * el + (kt**2) * et
    f1 = g1 / r - g / r**2
    f2 = g2 / r - 2 * g1 / r**2 + 2 * g / r**3
    r3 = r[..., None, None]
    xx = x[..., :, None] * x[..., None, :] / r3**2
    eye = np.eye(3)
    hess = f2[..., None, None] * xx + (f1 / r)[..., None, None] * (eye - xx)
    return -eye * et[..., None, None] / (4 * np.pi * mu * r3) + hess / (4 * np.pi * omega**2)


def _series_coefficients(p: int, c_t: float, c_l: float) -> tuple[complex, complex]:
    """Coefficients of omega^p in the delta_jk and x_j x_k parts (without 1/4pi)."""
    fact = math.factorial(p)
    ip = 1j**p
    a = -ip / ((p + 2) * fact) * ((p + 1) / c_t ** (p + 2) + 1 / c_l ** (p + 2))
    b = ip * (p - 1) / ((p + 2) * fact) * (1 / c_t ** (p + 2) - 1 / c_l ** (p + 2))
    return a, b


def m_omega(x, omega: float, bg: LameParams, n_terms: int = DEFAULT_TERMS) -> np.ndarray:
    """Remainder kernel with ``Gamma^omega = Gamma^0 + omega * M^omega``.

    Power series summed for ``p = 1 .. n_terms``; the ``x_j x_k`` part of the
    ``p = 1`` term carries the factor ``p - 1 = 0`` and is kept as an explicit
    zero.  See :func:`m_omega_tail` for the truncation bound.
    """
    if omega < 0:
        raise ElastoPlasmonError("frequency must be non-negative")
    if n_terms < 1:
        raise ElastoPlasmonError("n_terms must be positive")
    x, r = _radius(x)
    c_t, c_l = bg.c_t, bg.c_l
    diag = np.zeros(r.shape, dtype=complex)
    outer = np.zeros(r.shape, dtype=complex)
    for p in range(1, n_terms + 1):
        a, b = _series_coefficients(p, c_t, c_l)
        w = omega ** (p - 1)
        diag += a * w * r ** (p - 1)
        outer += b * w * r ** (p - 3)
    xx = x[..., :, None] * x[..., None, :]
    return (diag[..., None, None] * np.eye(3) + outer[..., None, None] * xx) / (4 * np.pi)


def m_omega_tail(x, omega: float, bg: LameParams, n_terms: int = DEFAULT_TERMS) -> float:
    """Bound on the omitted part of :func:`m_omega` (max-norm of ``omega * M`` tail).

    Terms decay like ``(omega r / c_T)^p / p!``, so after the first omitted
    term the remainder is dominated by a geometric series with ratio
    ``q = omega r / (c_T (n_terms + 2))``.
    """
    _, r = _radius(x)
    r = float(np.max(r))
    c_t, c_l = bg.c_t, bg.c_l
    p = n_terms + 1
    a, b = _series_coefficients(p, c_t, c_l)
    first = omega**p * (abs(a) * r ** (p - 1) + abs(b) * r ** (p - 1)) / (4 * np.pi)
    q = omega * r / (min(c_t, c_l) * (p + 1))
    if q >= 1:
        return math.inf
    return first / (1 - q)
