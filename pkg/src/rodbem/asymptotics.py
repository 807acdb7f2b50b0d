"""Closed-form quasi-static approximations used as solver cross-checks.

Everything here is a companion to the full transmission solver: the
leading-order spectral expansion of the scattering density, interior and
exterior fields of the end-cap-collapsed rod, the straight-rod surface
amplitude profile, and order-of-magnitude predictions for resonance blowup
sweeps.  All formulas are leading terms only; agreement with the solver is
checked through convergence order, never absolute tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .geometry import (
    INSIDE,
    NEAR_BOUNDARY,
    OUTSIDE,
    REGION_CAP_A,
    REGION_CAP_B,
    SurfaceMesh,
    classify_points,
)
from .solver import FieldGrid, IncidentWave
from .spectral import NPSpectrum, ResonanceParams

__all__ = [
    "QuasiStaticModel",
    "build_quasistatic_model",
    "lam_ratio",
    "mode_denominators",
    "cap_layer_potential",
    "psi_quasistatic",
    "remainder_order",
    "us_asymptotic",
    "u_interior_asymptotic",
    "eval_asymptotic_field",
    "lam1_estimate",
    "p_straight",
    "BlowupPrediction",
    "blowup_scaling_prediction",
    "ScalingRow",
    "write_field_csv",
    "write_scaling_csv",
]


# ---------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class QuasiStaticModel:
    """Spectral data of one rod/material pair, frozen for reuse.

    ``couplings[j]`` is the energy-product pairing of the incident profile
    d.nu with mode j, computed with the same Gram matrix as the spectrum;
    ``mode_norms[j]`` the energy norm squared of the stored mode (one by
    construction, kept explicit so the expansion stays self-consistent if the
    normalization ever changes).  ``cap_moments_a/b`` are the plain surface
    integrals of each mode over the two end caps, rescaled to the unit-radius
    reference rod; they vanish for meshes without cap regions.
    """

    spectrum: NPSpectrum
    params: ResonanceParams
    direction: np.ndarray
    couplings: np.ndarray
    mode_norms: np.ndarray
    cap_moments_a: np.ndarray
    cap_moments_b: np.ndarray
    mu_m: float

    @property
    def mesh(self) -> SurfaceMesh:
        return self.spectrum.mesh

    @property
    def n_modes(self) -> int:
        return self.spectrum.n_modes

    @property
    def has_caps(self) -> bool:
        return bool(
            self.mesh.region_mask(REGION_CAP_A, REGION_CAP_B).any()
            and self.mesh.curve is not None
            and self.mesh.delta is not None
        )


def build_quasistatic_model(
    spectrum: NPSpectrum,
    params: ResonanceParams,
    direction,
    mu_m: float = 1.0,
) -> QuasiStaticModel:
    """Bundle a spectrum with couplings and cap moments for one direction.

    ``params`` must have been computed from the same spectrum (checked by
    comparing eigenvalue lists).  Density expansions work on any closed
    surface; the collapsed-rod field formulas additionally need a rod mesh
    with end caps.
    """
    if params.lambdas.size != spectrum.lambdas.size or not np.allclose(
        params.lambdas, spectrum.lambdas, rtol=0.0, atol=1e-14
    ):
        raise ValueError(
            "resonance parameters were computed from a different spectrum"
        )
    mu_m = complex(mu_m)
    if mu_m.imag != 0.0 or mu_m.real <= 0.0 or not np.isfinite(mu_m.real):
        raise ValueError(f"background permeability must be real positive, got {mu_m}")
    d = np.asarray(direction, dtype=float).reshape(3)
    norm = np.linalg.norm(d)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError(f"invalid incidence direction {direction!r}")
    d = d / norm

    mesh = spectrum.mesh
    dnu = mesh.normals @ d
    couplings = spectrum.coefficients(dnu)
    gram_funcs = spectrum.gram.matrix @ spectrum.eigfuncs
    mode_norms = np.einsum(
        "pj,pj->j", spectrum.eigfuncs.conj(), gram_funcs
    ).real

    n = spectrum.n_modes
    moments_a = np.zeros(n, dtype=complex)
    moments_b = np.zeros(n, dtype=complex)
    if mesh.delta is not None:
        # cap areas scale with the square of the tube radius, so dividing by
        # it refers the moments to the unit-radius reference rod
        scale = 1.0 / mesh.delta**2
        for tag, out in ((REGION_CAP_A, moments_a), (REGION_CAP_B, moments_b)):
            mask = mesh.region_mask(tag)
            if mask.any():
                out[:] = scale * (mesh.areas[mask] @ spectrum.eigfuncs[mask, :])

    return QuasiStaticModel(
        spectrum=spectrum,
        params=params,
        direction=d,
        couplings=couplings,
        mode_norms=mode_norms,
        cap_moments_a=moments_a,
        cap_moments_b=moments_b,
        mu_m=mu_m.real,
    )


# ---------------------------------------------------------------------------
# spectral building blocks


def lam_ratio(t) -> complex:
    """Contrast ratio (t + 1) / (2 (t - 1)); undefined at t = 1."""
    t = complex(t)
    if t == 1.0:
        raise ValueError("contrast ratio is undefined at t = 1 (no contrast)")
    return (t + 1.0) / (2.0 * (t - 1.0))


def _mode_indices(model: QuasiStaticModel, J: Iterable[int]) -> np.ndarray:
    idx = np.array(sorted({int(j) for j in J}), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= model.n_modes):
        raise ValueError(
            f"mode set {idx.tolist()} outside the computed spectrum "
            f"(0..{model.n_modes - 1})"
        )
    return idx


def _lam1_vector(lam1, idx: np.ndarray) -> np.ndarray:
    if lam1 is None:
        return np.zeros(idx.size)
    arr = np.asarray(lam1, dtype=float)
    if arr.ndim == 0:
        return np.full(idx.size, float(arr))
    if arr.shape[0] < (idx.max() + 1 if idx.size else 0):
        raise ValueError("eigenvalue slope list shorter than the mode set")
    return arr[idx]


def _corrected_tau(
    model: QuasiStaticModel, delta: float, idx: np.ndarray, lam1
) -> np.ndarray:
    """Resonance denominators with the first-order radius correction folded in.

    The contrast-ratio form (lam(eps_m/eps_c) - lambda_j + ...) times the
    contrast (1/eps_c - 1/eps_m) equals tau_j + delta*lam1_j exactly, which
    stays finite at zero contrast, so all field formulas divide by this.
    """
    tau = model.params.tau[idx] + float(delta) * _lam1_vector(lam1, idx)
    bad = np.nonzero(tau == 0)[0]
    if bad.size:
        j = int(idx[bad[0]])
        raise ValueError(
            f"mode {j} is exactly on a lossless resonance (zero denominator); "
            "the expansion needs Im(eps_c) > 0"
        )
    return tau


def mode_denominators(
    model: QuasiStaticModel,
    delta: float,
    J: Iterable[int],
    lam1=None,
) -> np.ndarray:
    """Contrast-ratio denominators lam(eps_m/eps_c) - lambda_j (+ radius term).

    Shared verbatim by the exterior and interior field expansions.  ``lam1``
    optionally supplies per-mode eigenvalue slopes in the tube radius
    (see :func:`lam1_estimate`); by default the correction is zero.
    """
    idx = _mode_indices(model, J)
    contrast = 1.0 / model.params.eps_c - 1.0 / model.params.eps_m
    if contrast == 0:
        raise ValueError("degenerate contrast eps_c = eps_m: denominators undefined")
    return _corrected_tau(model, delta, idx, lam1) / contrast


def cap_layer_potential(model: QuasiStaticModel, points) -> np.ndarray:
    """Static single layer of every mode, collapsed onto the cap feet.

    Each cap panel's charge (mode value times panel area, referred to the
    unit-radius rod) is placed at its nearest centerline point — for a rod
    that is the adjacent curve endpoint — and evaluated with the static
    kernel -1/(4 pi r).  Returns an (n_points, n_modes) matrix.
    """
    if not model.has_caps:
        raise ValueError(
            "the collapsed-rod expansion needs a rod mesh with end caps"
        )
    mesh = model.mesh
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    caps = mesh.region_mask(REGION_CAP_A, REGION_CAP_B)
    charges = (mesh.areas[caps, None] / mesh.delta**2) * model.spectrum.eigfuncs[caps, :]
    diff = pts[:, None, :] - mesh.feet[None, caps, :]
    r = np.linalg.norm(diff, axis=2)
    if np.any(r < 1e-12):
        raise ValueError("evaluation point coincides with a collapsed cap source")
    return (-1.0 / (4.0 * np.pi * r)) @ charges


def _cap_layer_gradient(model: QuasiStaticModel, points) -> np.ndarray:
    """Gradient of :func:`cap_layer_potential`: (n_points, 3, n_modes)."""
    mesh = model.mesh
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    caps = mesh.region_mask(REGION_CAP_A, REGION_CAP_B)
    charges = (mesh.areas[caps, None] / mesh.delta**2) * model.spectrum.eigfuncs[caps, :]
    diff = pts[:, None, :] - mesh.feet[None, caps, :]
    r = np.linalg.norm(diff, axis=2)
    if np.any(r < 1e-12):
        raise ValueError("evaluation point coincides with a collapsed cap source")
    kern = diff / (4.0 * np.pi * r**3)[:, :, None]
    return np.einsum("pqi,qj->pij", kern, charges)


# ---------------------------------------------------------------------------
# density and field expansions


def _check_omega(omega: float) -> float:
    omega = float(omega)
    if not np.isfinite(omega) or omega <= 0.0:
        raise ValueError(f"omega must be a positive real number, got {omega}")
    return omega


def psi_quasistatic(model: QuasiStaticModel, omega: float, J: Iterable[int]) -> np.ndarray:
    """Leading-order scattering density on the mesh panels.

    Sums i*omega*sqrt(mu_m eps_m)*(1/eps_c - 1/eps_m)*c_j/a_j * phi_j / tau_j
    over the requested modes; exactly linear in omega.  The neglected orders
    are O(omega^2)/tau per mode plus O(omega) overall — see
    :func:`remainder_order`.
    """
    omega = _check_omega(omega)
    idx = _mode_indices(model, J)
    psi = np.zeros(model.mesh.n_panels, dtype=complex)
    if idx.size == 0:
        return psi
    tau = model.params.tau[idx]
    bad = np.nonzero(tau == 0)[0]
    if bad.size:
        raise ValueError(
            f"mode {int(idx[bad[0]])} is exactly on a lossless resonance; "
            "the quasi-static density needs Im(eps_c) > 0"
        )
    contrast = 1.0 / model.params.eps_c - 1.0 / model.params.eps_m
    k_m = omega * np.sqrt(model.mu_m * model.params.eps_m)
    coef = 1j * k_m * contrast * model.couplings[idx] / model.mode_norms[idx] / tau
    return model.spectrum.eigfuncs[:, idx] @ coef


def remainder_order(model: QuasiStaticModel, omega: float, J: Iterable[int]) -> float:
    """Order-of-magnitude size of the terms :func:`psi_quasistatic` drops."""
    omega = _check_omega(omega)
    idx = _mode_indices(model, J)
    worst = 0.0
    if idx.size:
        worst = float(np.max(omega**2 / np.abs(model.params.tau[idx])))
    return worst + omega


def _field_expansion(
    model: QuasiStaticModel,
    omega: float,
    delta: float,
    J: Iterable[int],
    points: np.ndarray,
    prefactor: complex,
    lam1,
) -> np.ndarray:
    idx = _mode_indices(model, J)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if idx.size == 0:
        return np.zeros(pts.shape[0], dtype=complex)
    contrast = 1.0 / model.params.eps_c - 1.0 / model.params.eps_m
    tau = _corrected_tau(model, delta, idx, lam1)
    layer = cap_layer_potential(model, pts)[:, idx]
    coef = prefactor * contrast * (model.couplings[idx] / model.mode_norms[idx]) / tau
    return layer @ (coef * float(delta) ** 2)


def _split_labels(model: QuasiStaticModel, points) -> np.ndarray:
    mesh = model.mesh
    if mesh.curve is None or mesh.delta is None:
        raise ValueError("field expansions need a rod mesh with a centerline")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return classify_points(pts, mesh.curve, mesh.delta, collar=0.0)


def us_asymptotic(
    model: QuasiStaticModel,
    omega: float,
    delta: float,
    J: Iterable[int],
    points,
    lam1=None,
) -> np.ndarray:
    """Scattered field of the end-cap-collapsed rod at exterior points.

    Valid at distance well beyond ``delta`` from the surface; the amplitude
    carries the cap-area factor delta**2 explicitly so radius scaling can be
    probed without rebuilding the model.  Points inside the rod are rejected.
    """
    omega = _check_omega(omega)
    if float(delta) <= 0.0:
        raise ValueError(f"tube radius must be positive, got {delta}")
    if np.any(_split_labels(model, points) == INSIDE):
        raise ValueError("exterior field expansion called with points inside the rod")
    pref = 1j * omega * np.sqrt(model.mu_m * model.params.eps_m)
    return _field_expansion(model, omega, delta, J, points, pref, lam1)


def u_interior_asymptotic(
    model: QuasiStaticModel,
    omega: float,
    delta: float,
    J: Iterable[int],
    points,
    lam1=None,
) -> np.ndarray:
    """Oscillatory part of the interior field for points inside the rod.

    Same mode sum and denominators as :func:`us_asymptotic` with the interior
    prefactor sqrt(mu_m / eps_m) in place of sqrt(mu_m eps_m); the constant
    (gradient-free) background is not part of the expansion.  Points outside
    the rod are rejected.
    """
    omega = _check_omega(omega)
    if float(delta) <= 0.0:
        raise ValueError(f"tube radius must be positive, got {delta}")
    if np.any(_split_labels(model, points) != INSIDE):
        raise ValueError("interior field expansion called with points outside the rod")
    pref = 1j * omega * np.sqrt(model.mu_m / model.params.eps_m)
    return _field_expansion(model, omega, delta, J, points, pref, lam1)


def eval_asymptotic_field(
    model: QuasiStaticModel,
    wave: IncidentWave,
    omega: float,
    delta: float,
    J: Iterable[int],
    points,
    collar: float = 0.0,
    lam1=None,
) -> FieldGrid:
    """Asymptotic counterpart of the solver's field evaluation on a grid.

    Uses the exterior expansion outside and the interior one inside, scaled
    by the incident amplitude, and fills the same grid container the solver
    emits (u = u_i + us, theta = |grad Re us|) so the two can be compared
    row by row.
    """
    omega = _check_omega(omega)
    mesh = model.mesh
    if mesh.curve is None or mesh.delta is None:
        raise ValueError("field expansions need a rod mesh with a centerline")
    k_m = omega * np.sqrt(model.mu_m * model.params.eps_m)
    if abs(wave.k_m - k_m) > 1e-12 * max(1.0, abs(k_m)):
        raise ValueError(
            f"incident wave carries k_m={wave.k_m!r} but the model says {k_m!r}"
        )
    if np.linalg.norm(wave.direction - model.direction) > 1e-12:
        raise ValueError(
            "incident direction differs from the one the couplings were built with"
        )
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    labels = classify_points(pts, mesh.curve, mesh.delta, collar=collar)
    inside = labels == INSIDE
    near = labels == NEAR_BOUNDARY

    idx = _mode_indices(model, J)
    us = np.zeros(pts.shape[0], dtype=complex)
    grad = np.zeros((pts.shape[0], 3), dtype=complex)
    if idx.size:
        contrast = 1.0 / model.params.eps_c - 1.0 / model.params.eps_m
        tau = _corrected_tau(model, delta, idx, lam1)
        coef = contrast * (model.couplings[idx] / model.mode_norms[idx]) / tau
        coef = coef * float(delta) ** 2 * wave.amplitude
        pref_out = 1j * omega * np.sqrt(model.mu_m * model.params.eps_m)
        pref_in = 1j * omega * np.sqrt(model.mu_m / model.params.eps_m)
        side = np.where(inside | near, pref_in, pref_out)
        layer = cap_layer_potential(model, pts)[:, idx]
        glayer = _cap_layer_gradient(model, pts)[:, :, idx]
        us = side * (layer @ coef)
        grad = side[:, None] * np.einsum("pij,j->pi", glayer, coef)
    u = wave.field(pts) + us
    theta = np.linalg.norm(grad.real, axis=1)
    return FieldGrid(
        points=pts,
        labels=labels,
        u=u,
        us=us,
        grad=grad,
        theta=theta,
        collar=float(collar),
    )


def lam1_estimate(spectrum_a: NPSpectrum, spectrum_b: NPSpectrum) -> np.ndarray:
    """Per-mode eigenvalue slope in the tube radius from two spectra.

    Finite-difference fit (lambda_a - lambda_b)/(delta_a - delta_b) over the
    shared mode range; feeds the optional radius correction of the field
    denominators.  Mode tracking is by index, so both spectra should resolve
    the same cluster structure.
    """
    da, db = spectrum_a.mesh.delta, spectrum_b.mesh.delta
    if da is None or db is None:
        raise ValueError("eigenvalue slopes need rod meshes with a tube radius")
    if abs(da - db) < 1e-12:
        raise ValueError("the two spectra share the same tube radius; no slope")
    n = min(spectrum_a.n_modes, spectrum_b.n_modes)
    return (spectrum_a.lambdas[:n] - spectrum_b.lambdas[:n]) / (da - db)


# ---------------------------------------------------------------------------
# straight-rod amplitude profile


def p_straight(x, L: float, delta: float, P0, Q0, atol: Optional[float] = None):
    """Sum of the distances to the two cap centers, on the rod surface.

    The facade branch is evaluated through the axial offset l from the rod
    midpoint, the cap branches as delta plus the distance to the opposite
    center; the branches agree where they meet.  The profile attains its
    maximum L + 2*delta at the two cap tips and its minimum
    sqrt(L^2 + 4*delta^2) at the facade midline.  Points off the surface
    (beyond ``atol``) are rejected.
    """
    L = float(L)
    delta = float(delta)
    if not np.isfinite(L) or L <= 0.0:
        raise ValueError(f"rod length must be positive, got {L}")
    if not np.isfinite(delta) or delta <= 0.0:
        raise ValueError(f"tube radius must be positive, got {delta}")
    p0 = np.asarray(P0, dtype=float).reshape(3)
    q0 = np.asarray(Q0, dtype=float).reshape(3)
    gap = np.linalg.norm(q0 - p0)
    if abs(gap - L) > 1e-9 * max(1.0, L):
        raise ValueError(
            f"cap centers are {gap} apart but the stated length is {L}"
        )
    if atol is None:
        atol = 1e-8 * max(1.0, L)

    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != 3:
        raise ValueError(f"points must be 3-vectors, got shape {x.shape}")

    axis = (q0 - p0) / gap
    s = (pts - p0) @ axis
    radial = np.linalg.norm(pts - p0 - s[:, None] * axis[None, :], axis=1)
    dist_p = np.linalg.norm(pts - p0, axis=1)
    dist_q = np.linalg.norm(pts - q0, axis=1)

    on_facade = (s >= 0.0) & (s <= L) & (np.abs(radial - delta) <= atol)
    on_cap_a = (s < 0.0) & (np.abs(dist_p - delta) <= atol)
    on_cap_b = (s > L) & (np.abs(dist_q - delta) <= atol)
    if not np.all(on_facade | on_cap_a | on_cap_b):
        i = int(np.nonzero(~(on_facade | on_cap_a | on_cap_b))[0][0])
        raise ValueError(
            f"point {pts[i].tolist()} is not on the rod surface "
            f"(tolerance {atol})"
        )

    ell = np.abs(s - 0.5 * L)
    vals = np.where(
        on_facade,
        np.hypot(0.5 * L - ell, delta) + np.hypot(0.5 * L + ell, delta),
        np.where(on_cap_a, delta + dist_q, delta + dist_p),
    )
    return float(vals[0]) if single else vals


# ---------------------------------------------------------------------------
# blowup scaling


@dataclass(frozen=True)
class BlowupPrediction:
    """Lower-bound magnitudes for the scattered-energy blowup at resonance.

    ``dominant`` is omega/|rho|; ``retardation`` and ``static_term`` are the
    subdominant omega^2/|rho| and sqrt(omega) contributions, reported for
    context.  ``regime_ratio`` is |rho|^-1 omega^2 delta, which must stay
    below ``c1`` for the prediction to apply; out-of-regime inputs are
    flagged, not rejected.
    """

    omega: float
    rho: float
    delta: float
    c1: float
    dominant: float
    retardation: float
    static_term: float
    regime_ratio: float
    in_regime: bool


def blowup_scaling_prediction(
    omega: float,
    rho: float,
    delta: float,
    c1: float = 0.1,
) -> BlowupPrediction:
    """Predicted blowup magnitude omega/|rho| with its validity check.

    ``rho`` is the imaginary part of 1/eps_c (lossy inclusions have rho < 0;
    only its magnitude enters).  With rho = omega^s the dominant term scales
    like omega^(1-s): growing for s > 1, constant at the s = 1 boundary.
    """
    omega = _check_omega(omega)
    rho = float(rho)
    if not np.isfinite(rho) or rho == 0.0:
        raise ValueError(
            f"loss parameter rho must be a nonzero real number, got {rho}"
        )
    delta = float(delta)
    if not np.isfinite(delta) or delta <= 0.0:
        raise ValueError(f"tube radius must be positive, got {delta}")
    c1 = float(c1)
    if not np.isfinite(c1) or c1 <= 0.0:
        raise ValueError(f"regime constant c1 must be positive, got {c1}")
    mag = abs(rho)
    ratio = omega**2 * delta / mag
    return BlowupPrediction(
        omega=omega,
        rho=rho,
        delta=delta,
        c1=c1,
        dominant=omega / mag,
        retardation=omega**2 / mag,
        static_term=float(np.sqrt(omega)),
        regime_ratio=ratio,
        in_regime=bool(ratio <= c1),
    )


# ---------------------------------------------------------------------------
# export


def write_field_csv(grid: FieldGrid, path, source: str = "asymptotic") -> None:
    """Solver field schema plus a trailing source column.

    Schema: x,y,z,re_u,im_u,re_us,im_us,theta,mask,source — byte-identical
    across runs for identical inputs.
    """
    with open(path, "w", newline="\n") as fh:
        fh.write("x,y,z,re_u,im_u,re_us,im_us,theta,mask,source\n")
        for i in range(grid.points.shape[0]):
            x, y, z = grid.points[i]
            fh.write(
                f"{float(x)!r},{float(y)!r},{float(z)!r},"
                f"{float(grid.u[i].real)!r},{float(grid.u[i].imag)!r},"
                f"{float(grid.us[i].real)!r},{float(grid.us[i].imag)!r},"
                f"{float(grid.theta[i])!r},{int(grid.labels[i])},{source}\n"
            )


@dataclass(frozen=True)
class ScalingRow:
    """One point of a blowup scaling study: measured energy vs prediction."""

    omega: float
    rho: float
    delta: float
    e_full: float
    e_pred: float


def write_scaling_csv(rows: Sequence[ScalingRow], path) -> None:
    """Schema: omega,rho,delta,E_full,E_pred (one row per sweep point)."""
    with open(path, "w", newline="\n") as fh:
        fh.write("omega,rho,delta,E_full,E_pred\n")
        for row in rows:
            fh.write(
                f"{float(row.omega)!r},{float(row.rho)!r},{float(row.delta)!r},"
                f"{float(row.e_full)!r},{float(row.e_pred)!r}\n"
            )
