"""Free-space Helmholtz kernel, normal derivatives, and k-power series terms.

Sign convention: the fundamental solution is ``G_k(x, y) = -exp(ik|x-y|) /
(4 pi |x-y|)``, so the static kernel is ``-1/(4 pi r)`` and the single layer
potential of a positive density is negative.  Low-frequency expansions in the
wavenumber ``k`` are

``G_k = sum_j k^j s_j(r)``            with ``s_j(r) = -i^j r^(j-1) / (4 pi j!)``
``dG_k/dnu_x = sum_j k^j kd_j(x,y)``  with
``kd_j = -(i^j (j-1) / (4 pi j!)) r^(j-3) (x - y, nu_x)``

The j = 1 term of the normal-derivative series vanishes identically, and the
j = 1 single-layer term is the constant ``-i/(4 pi)``: both facts anchor the
operator expansions downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Wavenumbers",
    "wavenumbers",
    "green",
    "green_r",
    "grad_green_target",
    "normal_derivative_target",
    "series_s_r",
    "series_k_r",
    "series_s_term",
    "series_k_term",
]

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class Wavenumbers:
    """Material parameters and the derived interior/exterior wavenumbers."""

    omega: float
    eps_c: complex
    eps_m: complex
    mu_c: complex
    mu_m: complex
    k_c: complex
    k_m: complex


def _principal_k(omega: float, eps: complex, mu: complex) -> complex:
    k = omega * np.lib.scimath.sqrt(eps * mu)
    k = complex(k)
    # passive media decay outward: pick the root with nonnegative imaginary part
    if k.imag < 0.0:
        k = -k
    return k


def wavenumbers(
    omega: float,
    eps_c: complex,
    eps_m: complex = 1.0,
    mu_c: complex = 1.0,
    mu_m: complex = 1.0,
) -> Wavenumbers:
    """Build the wavenumber pair ``k_c = omega sqrt(eps_c mu_c)`` (inclusion)
    and ``k_m = omega sqrt(eps_m mu_m)`` (background)."""
    if not np.isfinite(omega) or omega < 0.0:
        raise ValueError(f"omega must be a nonnegative real number, got {omega}")
    for name, value in (("eps_c", eps_c), ("eps_m", eps_m), ("mu_c", mu_c), ("mu_m", mu_m)):
        value = complex(value)
        if not np.isfinite(value.real) or not np.isfinite(value.imag) or value == 0:
            raise ValueError(f"{name} must be finite and nonzero, got {value}")
    return Wavenumbers(
        omega=float(omega),
        eps_c=complex(eps_c),
        eps_m=complex(eps_m),
        mu_c=complex(mu_c),
        mu_m=complex(mu_m),
        k_c=_principal_k(omega, complex(eps_c), complex(mu_c)),
        k_m=_principal_k(omega, complex(eps_m), complex(mu_m)),
    )


def _dist(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.linalg.norm(x - y, axis=-1)


def green_r(k: complex, r):
    """Kernel on precomputed distances: ``-exp(ikr)/(4 pi r)``."""
    r = np.asarray(r)
    return -np.exp(1j * k * r) / (FOUR_PI * r)


def green(k: complex, x, y):
    """Fundamental solution ``G_k(x, y)``; ``x``, ``y`` broadcast as (..., 3)."""
    return green_r(k, _dist(x, y))


def grad_green_target(k: complex, x, y):
    """Gradient of ``G_k`` in the target ``x``: ``(ik - 1/r) G_k r_hat``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = x - y
    r = np.linalg.norm(diff, axis=-1)
    factor = (1j * k - 1.0 / r) * green_r(k, r) / r
    return factor[..., None] * diff


def normal_derivative_target(k: complex, x, y, nu_x):
    """Normal derivative ``dG_k/dnu(x) = nu_x . grad_x G_k``."""
    grad = grad_green_target(k, x, y)
    return np.sum(grad * np.asarray(nu_x, dtype=float), axis=-1)


def series_s_r(j: int, r):
    """Single-layer series term on distances: ``-i^j r^(j-1) / (4 pi j!)``.

    Finite at r = 0 for j >= 1 (constant ``-i/(4 pi)`` at j = 1).
    """
    if j < 0:
        raise ValueError("series order must be nonnegative")
    r = np.asarray(r, dtype=float)
    coeff = -(1j**j) / (FOUR_PI * math.factorial(j))
    if j == 0:
        return coeff / r
    if j == 1:
        return np.full(r.shape, coeff)
    return coeff * r ** (j - 1)


def series_k_r(j: int, r, dot):
    """Normal-derivative series term on distances and ``(x - y, nu_x)`` dots:
    ``-(i^j (j-1) / (4 pi j!)) r^(j-3) dot``.  Identically zero at j = 1."""
    if j < 0:
        raise ValueError("series order must be nonnegative")
    r = np.asarray(r, dtype=float)
    dot = np.asarray(dot, dtype=float)
    if j == 1:
        return np.zeros(np.broadcast(r, dot).shape, dtype=complex)
    coeff = -(1j**j) * (j - 1) / (FOUR_PI * math.factorial(j))
    return coeff * r ** (j - 3) * dot


def series_s_term(j: int, x, y):
    """Point form of the single-layer series term."""
    return series_s_r(j, _dist(x, y))


def series_k_term(j: int, x, y, nu_x):
    """Point form of the normal-derivative series term."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = x - y
    r = np.linalg.norm(diff, axis=-1)
    dot = np.sum(diff * np.asarray(nu_x, dtype=float), axis=-1)
    return series_k_r(j, r, dot)
