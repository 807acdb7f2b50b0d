"""Transmission solves and field evaluation for a penetrable inclusion.

The scattered and interior fields are represented by single layers with
interior/exterior wavenumbers, ``u = S_kc[phi]`` inside and ``u = u_i +
S_km[psi]`` outside; matching traces across the boundary gives the 2N x 2N
block system

    [ S_kc               -S_km             ] [phi]   [ u_i            ]
    [ (-I/2 + K*_kc)/e_c  -(I/2 + K*_km)/e_m ] [psi] = [ du_i/dnu / e_m ],

using the one-sided traces of the single layer d/dnu S[phi]|_pm =
(+-I/2 + K*)[phi] that hold for the negative kernel convention.  Eliminating
phi through the first row yields the reduced one-density system; at zero
frequency the reduced operator collapses to the resonance form
(1/e_m + 1/e_c)/2 I + (1/e_m - 1/e_c) K*, which ties solves to the spectrum.

Field evaluation uses the centroid rule, upgraded to the 7-point panel rule
for panels closer to the evaluation point than twice their diameter; points
within the near-boundary collar are still evaluated but carry a mask flag and
are excluded from every norm and energy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from . import kernels
from .geometry import (
    INSIDE,
    NEAR_BOUNDARY,
    OUTSIDE,
    SurfaceMesh,
    nearest_on_curve,
)
from .kernels import Wavenumbers
from .operators import (
    TRI_QUAD_BARY,
    TRI_QUAD_W,
    assemble_np_adjoint,
    assemble_single_layer,
)

DEFAULT_AMPLITUDE = 1e3

# Dense solves are rejected beyond this condition estimate: the factorization
# would return noise (expected exactly at a lossless resonance).
MAX_CONDITION = 1e-3 / np.finfo(float).eps

_EVAL_CHUNK = 512

# Evaluation upgrades any panel closer than this many diameters to the
# target with a subdivided rule; the split depth grows as the point
# approaches so the child panels stay comfortably "far" from it.
_EVAL_NEAR_FACTOR = 4.0
_MAX_SPLIT = 4


@dataclass(frozen=True)
class IncidentWave:
    """Plane wave ``amplitude * exp(i k_m d . x)`` with unit direction d."""

    direction: np.ndarray
    amplitude: complex
    k_m: complex

    def field(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self.amplitude * np.exp(1j * self.k_m * (points @ self.direction))

    def gradient(self, points: np.ndarray) -> np.ndarray:
        vals = self.field(points)
        return 1j * self.k_m * vals[:, None] * self.direction[None, :]

    def normal_derivative(self, points: np.ndarray, normals: np.ndarray) -> np.ndarray:
        vals = self.field(points)
        return 1j * self.k_m * np.einsum("pi,pi->p", np.atleast_2d(normals), self.direction[None, :]) * vals


def plane_wave(
    direction, material: Wavenumbers, amplitude: complex = DEFAULT_AMPLITUDE
) -> IncidentWave:
    """Unit-normalized plane wave carrying the background wavenumber."""
    d = np.asarray(direction, dtype=float).reshape(3)
    norm = np.linalg.norm(d)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError(f"invalid propagation direction {direction!r}")
    return IncidentWave(
        direction=d / norm, amplitude=complex(amplitude), k_m=material.k_m
    )


@dataclass(frozen=True)
class DensityPair:
    """Boundary densities of one transmission solve.

    ``residual`` is the relative residual of the assembled block system at
    the returned solution; ``cond`` the 1-norm condition estimate of the
    factorized matrix.
    """

    phi: np.ndarray
    psi: np.ndarray
    residual: float
    cond: float
    mesh: SurfaceMesh


@dataclass(frozen=True)
class FieldGrid:
    """Total field, scattered part, gradient and strength on labeled points.

    ``labels`` uses the classification constants (OUTSIDE / INSIDE /
    NEAR_BOUNDARY); near-boundary values are computed but untrusted, and
    every norm here excludes them.  ``theta`` is |grad Re(u - u_i)|, the
    resonance strength.  When ``normalized`` is set, ``us`` was divided by
    max |Re us| over trusted points (and theta by its own trusted max).
    """

    points: np.ndarray
    labels: np.ndarray
    u: np.ndarray
    us: np.ndarray
    grad: np.ndarray
    theta: np.ndarray
    collar: float
    normalized: bool = False

    @property
    def valid(self) -> np.ndarray:
        return self.labels != NEAR_BOUNDARY


@dataclass(frozen=True)
class EnergyReport:
    """Masked grid-quadrature energies: E_o over the box minus the rod,
    E_i over the interior, electric = Im(eps_c)/(8 pi) * int |grad u|^2."""

    E_o: float
    E_i: float
    electric: float
    collar: float
    h: float
    box_lo: np.ndarray
    box_hi: np.ndarray
    n_outside: int
    n_inside: int


def _check_wave(material: Wavenumbers, wave: IncidentWave) -> None:
    if abs(wave.k_m - material.k_m) > 1e-12 * max(1.0, abs(material.k_m)):
        raise ValueError(
            f"incident wave carries k_m={wave.k_m!r} but the material says "
            f"{material.k_m!r}"
        )


def _quasistatic_guard(mesh: SurfaceMesh, material: Wavenumbers) -> None:
    lo = mesh.vertices.reshape(-1, 3).min(axis=0)
    hi = mesh.vertices.reshape(-1, 3).max(axis=0)
    diam = float((hi - lo).max())
    if material.omega * diam >= 1.0:
        warnings.warn(
            f"omega*diameter = {material.omega * diam:.3f} >= 1: outside the "
            "quasi-static regime the resonance expansion degrades",
            stacklevel=3,
        )


def _system_operators(mesh: SurfaceMesh, material: Wavenumbers):
    s_c = assemble_single_layer(material.k_c, mesh).matrix
    s_m = assemble_single_layer(material.k_m, mesh).matrix
    k_c = assemble_np_adjoint(material.k_c, mesh).matrix
    k_m = assemble_np_adjoint(material.k_m, mesh).matrix
    return s_c, s_m, k_c, k_m


def _factor_with_condition(A: np.ndarray):
    anorm = np.linalg.norm(A, 1)
    lu, piv = scipy.linalg.lu_factor(A)
    rcond = scipy.linalg.lapack.zgecon(lu, anorm, norm="1")[0]
    cond = np.inf if rcond == 0.0 else 1.0 / rcond
    if cond > MAX_CONDITION:
        raise ValueError(
            f"transmission system is numerically singular (condition estimate "
            f"{cond:.3e}); a lossless configuration sits exactly on resonance"
        )
    return lu, piv, cond


def incident_flux_data(
    mesh: SurfaceMesh,
    material: Wavenumbers,
    wave: IncidentWave,
    s_m: Optional[np.ndarray] = None,
    k_m: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Interior Neumann trace of the incident wave through the discrete maps.

    The incident field solves the background Helmholtz equation, so its
    normal derivative equals the interior Dirichlet-to-Neumann map applied
    to its boundary values.  Realizing that map with the same discrete
    operators that represent the fields keeps the no-contrast solve exactly
    scattering-free; the analytic ik_m (d . nu) u_i differs from this by the
    quadrature-scale defect of the discrete map and would leak that defect
    into psi.
    """
    if s_m is None:
        s_m = assemble_single_layer(material.k_m, mesh).matrix
    if k_m is None:
        k_m = assemble_np_adjoint(material.k_m, mesh).matrix
    ui = wave.field(mesh.centroids)
    return (-0.5 * np.eye(mesh.n_panels) + k_m) @ np.linalg.solve(s_m, ui)


def solve_transmission(
    mesh: SurfaceMesh, material: Wavenumbers, wave: IncidentWave
) -> DensityPair:
    """Dense solve of the two-density transmission system."""
    _check_wave(material, wave)
    _quasistatic_guard(mesh, material)
    n = mesh.n_panels
    s_c, s_m, k_c, k_m = _system_operators(mesh, material)
    eye = np.eye(n)
    A = np.empty((2 * n, 2 * n), dtype=complex)
    A[:n, :n] = s_c
    A[:n, n:] = -s_m
    A[n:, :n] = (-0.5 * eye + k_c) / material.eps_c
    A[n:, n:] = -(0.5 * eye + k_m) / material.eps_m

    ui = wave.field(mesh.centroids)
    dui = incident_flux_data(mesh, material, wave, s_m, k_m)
    b = np.concatenate([ui, dui / material.eps_m])

    lu, piv, cond = _factor_with_condition(A)
    z = scipy.linalg.lu_solve((lu, piv), b)
    residual = float(np.linalg.norm(A @ z - b) / np.linalg.norm(b))
    return DensityPair(
        phi=z[:n], psi=z[n:], residual=residual, cond=cond, mesh=mesh
    )


def reduced_operator(
    mesh: SurfaceMesh,
    material: Wavenumbers,
    operators: Optional[Tuple[np.ndarray, ...]] = None,
) -> np.ndarray:
    """One-density operator from eliminating phi through the continuity row.

    At omega = 0 this is exactly (1/e_m + 1/e_c)/2 I + (1/e_m - 1/e_c) K*_0,
    whose eigenvalues are the resonance denominators tau_j.
    """
    if operators is None:
        operators = _system_operators(mesh, material)
    s_c, s_m, k_c, k_m = operators
    n = mesh.n_panels
    eye = np.eye(n)
    dtn = (-0.5 * eye + k_c) @ np.linalg.solve(s_c, s_m)
    return (0.5 * eye + k_m) / material.eps_m - dtn / material.eps_c


def solve_reduced_psi(
    mesh: SurfaceMesh, material: Wavenumbers, wave: IncidentWave
) -> np.ndarray:
    """Exterior density from the reduced system (block elimination of phi)."""
    _check_wave(material, wave)
    _quasistatic_guard(mesh, material)
    ops = _system_operators(mesh, material)
    s_c, s_m, k_c, k_m = ops
    n = mesh.n_panels
    A = reduced_operator(mesh, material, ops)
    ui = wave.field(mesh.centroids)
    dui = incident_flux_data(mesh, material, wave, s_m, k_m)
    f = (-0.5 * np.eye(n) + k_c) @ np.linalg.solve(s_c, ui) / material.eps_c
    f -= dui / material.eps_m
    lu, piv, _ = _factor_with_condition(A)
    return scipy.linalg.lu_solve((lu, piv), f)


def recover_phi(
    mesh: SurfaceMesh,
    material: Wavenumbers,
    wave: IncidentWave,
    psi: np.ndarray,
) -> np.ndarray:
    """Interior density from the continuity row, given the exterior one."""
    s_c = assemble_single_layer(material.k_c, mesh).matrix
    s_m = assemble_single_layer(material.k_m, mesh).matrix
    ui = wave.field(mesh.centroids)
    return np.linalg.solve(s_c, ui + s_m @ psi)


# ---------------------------------------------------------------------------
# field evaluation


def _signed_distance(mesh: SurfaceMesh, points: np.ndarray) -> np.ndarray:
    """Signed distance to the surface, negative inside."""
    points = np.atleast_2d(points)
    if mesh.curve is not None:
        _, dists, _ = nearest_on_curve(points, mesh.curve)
        return dists - float(mesh.delta)
    if mesh.kind == "sphere":
        return np.linalg.norm(points, axis=1) - 1.0
    raise ValueError(f"cannot classify points against a {mesh.kind!r} mesh")


def classify_against_mesh(
    mesh: SurfaceMesh, points: np.ndarray, collar: float
) -> np.ndarray:
    """OUTSIDE / INSIDE / NEAR_BOUNDARY labels relative to the meshed body."""
    if collar < 0.0:
        raise ValueError("collar must be nonnegative")
    d = _signed_distance(mesh, points)
    labels = np.where(d < 0.0, INSIDE, OUTSIDE).astype(np.int8)
    labels[np.abs(d) < collar] = NEAR_BOUNDARY
    return labels


def _subdivided_rule(verts: np.ndarray, areas: np.ndarray, level: int):
    """7-point rule on every level-fold midpoint subdivision of flat panels.

    Returns points (b, 7*4^level, 3) and matching weights summing to the
    panel areas; midpoint splitting yields equal-area children.
    """
    tri = verts[:, None, :, :]
    for _ in range(level):
        v0, v1, v2 = tri[..., 0, :], tri[..., 1, :], tri[..., 2, :]
        m01, m12, m02 = 0.5 * (v0 + v1), 0.5 * (v1 + v2), 0.5 * (v0 + v2)
        tri = np.concatenate(
            [
                np.stack([v0, m01, m02], axis=-2),
                np.stack([m01, v1, m12], axis=-2),
                np.stack([m02, m12, v2], axis=-2),
                np.stack([m01, m12, m02], axis=-2),
            ],
            axis=1,
        )
    b, t = tri.shape[:2]
    pts = np.einsum("qc,btcj->btqj", TRI_QUAD_BARY, tri).reshape(b, t * 7, 3)
    wts = (areas / t)[:, None] * np.tile(TRI_QUAD_W, t)[None, :]
    return pts, wts


def _layer_potential(
    k: complex,
    mesh: SurfaceMesh,
    density: np.ndarray,
    points: np.ndarray,
    want_grad: bool,
):
    """Single-layer potential (and gradient) at off-surface points.

    Centroid rule, upgraded to a subdivided 7-point rule for panels closer
    to the target than a few diameters; the split depth adapts to the
    distance so evaluation stays accurate right up to the collar.
    """
    points = np.atleast_2d(points)
    p = points.shape[0]
    u = np.zeros(p, dtype=complex)
    grad = np.zeros((p, 3), dtype=complex) if want_grad else None
    wdens = mesh.areas * density
    cent = mesh.centroids
    for lo in range(0, p, _EVAL_CHUNK):
        hi = min(lo + _EVAL_CHUNK, p)
        diff = points[lo:hi, None, :] - cent[None, :, :]
        r = np.sqrt(np.einsum("pqi,pqi->pq", diff, diff))
        near = r < _EVAL_NEAR_FACTOR * mesh.diameters[None, :]
        hit = r == 0.0  # target on a centroid: zero that entry, near rule fixes it
        r[hit] = 1.0
        gr = kernels.green_r(k, r)
        gr[hit] = 0.0
        fac = (1j * k - 1.0 / r) * gr / r
        if want_grad:
            grad[lo:hi] = np.einsum("pq,pqi->pi", fac * wdens[None, :], diff)
        u[lo:hi] = gr @ wdens
        if not near.any():
            continue
        rows, cols = np.nonzero(near)
        gap = np.where(hit[rows, cols], 0.0, r[rows, cols])
        # fractional split depth, blended between adjacent integer depths by a
        # C1 smoothstep so the evaluated field stays smooth in the target
        # position (a hard rule switch would pollute finite differences)
        dreal = np.clip(
            np.log2(
                _EVAL_NEAR_FACTOR
                * mesh.diameters[cols]
                / np.maximum(gap, 1e-300)
            ),
            0.0,
            float(_MAX_SPLIT),
        )
        d0 = np.floor(dreal).astype(int)
        frac = dreal - d0
        blend = frac * frac * (3.0 - 2.0 * frac)
        # total = (1-blend) * rule(d0) + blend * rule(d0+1); rule(0) is the
        # coarse centroid term already in the dense sum, so adjust by the
        # difference
        w_coarse = np.where(d0 == 0, 1.0 - blend, 0.0)
        np.add.at(u, lo + rows, (w_coarse - 1.0) * gr[rows, cols] * wdens[cols])
        if want_grad:
            np.add.at(
                grad,
                lo + rows,
                ((w_coarse - 1.0) * fac[rows, cols] * wdens[cols])[:, None]
                * diff[rows, cols],
            )
        for lev in range(1, _MAX_SPLIT + 1):
            wts = np.where(d0 == lev, 1.0 - blend, 0.0) + np.where(
                d0 + 1 == lev, blend, 0.0
            )
            s = wts > 1e-12
            if not s.any():
                continue
            qp, qw = _subdivided_rule(
                mesh.vertices[cols[s]], mesh.areas[cols[s]], lev
            )
            d7 = points[lo + rows[s]][:, None, :] - qp
            r7 = np.sqrt(np.einsum("bqi,bqi->bq", d7, d7))
            hit7 = r7 == 0.0
            r7[hit7] = 1.0
            g7 = kernels.green_r(k, r7)
            g7[hit7] = 0.0
            cw = wts[s] * density[cols[s]]
            np.add.at(u, lo + rows[s], np.einsum("bq,bq->b", qw, g7) * cw)
            if want_grad:
                f7 = (1j * k - 1.0 / r7) * g7 / r7
                np.add.at(
                    grad,
                    lo + rows[s],
                    np.einsum("bq,bqi->bi", qw * f7, d7) * cw[:, None],
                )
    return (u, grad) if want_grad else u


def eval_field(
    densities: DensityPair,
    material: Wavenumbers,
    wave: IncidentWave,
    points: np.ndarray,
    collar: Optional[float] = None,
    normalize: bool = False,
) -> FieldGrid:
    """Total field u, scattered part, gradient and strength at given points.

    Outside the body u = u_i + S_km[psi]; inside u = S_kc[phi]; gradients by
    analytic kernel differentiation.  Near-boundary points are evaluated on
    the side their signed distance says but flagged untrusted.
    """
    _check_wave(material, wave)
    mesh = densities.mesh
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if collar is None:
        collar = mesh.max_diameter()
    d = _signed_distance(mesh, points)
    labels = np.where(d < 0.0, INSIDE, OUTSIDE).astype(np.int8)
    labels[np.abs(d) < collar] = NEAR_BOUNDARY
    inner = d < 0.0

    u = np.zeros(points.shape[0], dtype=complex)
    grad = np.zeros((points.shape[0], 3), dtype=complex)
    if inner.any():
        ui_, gi_ = _layer_potential(
            material.k_c, mesh, densities.phi, points[inner], True
        )
        u[inner] = ui_
        grad[inner] = gi_
    if (~inner).any():
        uo_, go_ = _layer_potential(
            material.k_m, mesh, densities.psi, points[~inner], True
        )
        u[~inner] = uo_ + wave.field(points[~inner])
        grad[~inner] = go_ + wave.gradient(points[~inner])

    us = u - wave.field(points)
    grad_us = grad - wave.gradient(points)
    theta = np.linalg.norm(grad_us.real, axis=1)
    grid = FieldGrid(
        points=points,
        labels=labels,
        u=u,
        us=us,
        grad=grad,
        theta=theta,
        collar=float(collar),
    )
    return normalize_field(grid) if normalize else grid


def normalize_field(grid: FieldGrid) -> FieldGrid:
    """Divide the scattered field by max |Re us| and the strength by its own
    trusted maximum (near-boundary points excluded from both)."""
    valid = grid.valid
    if not valid.any():
        raise ValueError("no trusted points to normalize against")
    scale_us = np.abs(grid.us[valid].real).max()
    scale_th = grid.theta[valid].max()
    return replace(
        grid,
        us=grid.us / scale_us if scale_us > 0.0 else grid.us,
        theta=grid.theta / scale_th if scale_th > 0.0 else grid.theta,
        normalized=True,
    )


def resonance_strength(
    densities: DensityPair,
    material: Wavenumbers,
    wave: IncidentWave,
    points: np.ndarray,
    collar: Optional[float] = None,
    normalize: bool = True,
) -> FieldGrid:
    """Strength map theta = |grad Re(u - u_i)|, optionally peak-normalized."""
    return eval_field(
        densities, material, wave, points, collar=collar, normalize=normalize
    )


# ---------------------------------------------------------------------------
# energies


def default_box(mesh: SurfaceMesh, inflate: float = 1.5):
    """Bounding box of the surface, scaled about its center."""
    verts = mesh.vertices.reshape(-1, 3)
    lo = verts.min(axis=0)
    hi = verts.max(axis=0)
    center = 0.5 * (lo + hi)
    return (
        center + inflate * (lo - center),
        center + inflate * (hi - center),
    )


def energies(
    densities: DensityPair,
    material: Wavenumbers,
    wave: IncidentWave,
    box=None,
    h: Optional[float] = None,
    collar: Optional[float] = None,
) -> EnergyReport:
    """Midpoint-rule field energies over a box strictly containing the body.

    E_o = ||grad Re us||_L2 outside (within the box), E_i = ||grad Re u||_L2
    inside, electric = Im(eps_c)/(8 pi) ||grad u||^2 inside; the near-boundary
    collar is excluded everywhere and recorded.
    """
    mesh = densities.mesh
    if box is None:
        box = default_box(mesh)
    lo = np.asarray(box[0], dtype=float)
    hi = np.asarray(box[1], dtype=float)
    verts = mesh.vertices.reshape(-1, 3)
    if not (np.all(lo < verts.min(axis=0)) and np.all(hi > verts.max(axis=0))):
        raise ValueError(
            f"energy box [{lo}, {hi}] does not strictly contain the body"
        )
    if h is None:
        # resolve the tube cross-section with >= 8 cells across the diameter
        across = 2.0 * float(mesh.delta) if mesh.delta else 2.0
        h = across / 8.0
    if collar is None:
        # half a panel diameter: close enough that a thin body keeps interior
        # quadrature cells, far enough that subdivided evaluation is trusted
        collar = 0.5 * mesh.max_diameter()

    axes = []
    spac = []
    for a in range(3):
        n = max(1, int(round((hi[a] - lo[a]) / h)))
        step = (hi[a] - lo[a]) / n
        axes.append(lo[a] + (np.arange(n) + 0.5) * step)
        spac.append(step)
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    dv = float(spac[0] * spac[1] * spac[2])

    grid = eval_field(densities, material, wave, pts, collar=collar)
    outside = grid.labels == OUTSIDE
    inside = grid.labels == INSIDE
    go2 = np.sum((grid.grad - wave.gradient(pts)).real ** 2, axis=1)
    gi_re2 = np.sum(grid.grad.real**2, axis=1)
    gi_abs2 = np.sum(np.abs(grid.grad) ** 2, axis=1)
    e_o = float(np.sqrt(go2[outside].sum() * dv))
    e_i = float(np.sqrt(gi_re2[inside].sum() * dv))
    electric = float(
        material.eps_c.imag / (8.0 * np.pi) * gi_abs2[inside].sum() * dv
    )
    return EnergyReport(
        E_o=e_o,
        E_i=e_i,
        electric=electric,
        collar=float(collar),
        h=float(max(spac)),
        box_lo=lo,
        box_hi=hi,
        n_outside=int(outside.sum()),
        n_inside=int(inside.sum()),
    )


# ---------------------------------------------------------------------------
# export


def write_field_csv(grid: FieldGrid, path) -> None:
    """Schema: x,y,z,re_u,im_u,re_us,im_us,theta,mask (one row per point)."""
    with open(path, "w", newline="\n") as fh:
        fh.write("x,y,z,re_u,im_u,re_us,im_us,theta,mask\n")
        for i in range(grid.points.shape[0]):
            x, y, z = grid.points[i]
            fh.write(
                f"{float(x)!r},{float(y)!r},{float(z)!r},"
                f"{float(grid.u[i].real)!r},{float(grid.u[i].imag)!r},"
                f"{float(grid.us[i].real)!r},{float(grid.us[i].imag)!r},"
                f"{float(grid.theta[i])!r},{int(grid.labels[i])}\n"
            )


def write_energies_csv(report: EnergyReport, path) -> None:
    """Single-line companion: E_o,E_i,electric,collar,h."""
    with open(path, "w", newline="\n") as fh:
        fh.write("E_o,E_i,electric,collar,h\n")
        fh.write(
            f"{report.E_o!r},{report.E_i!r},{report.electric!r},"
            f"{report.collar!r},{report.h!r}\n"
        )


def write_field_vtk(grid: FieldGrid, dims, path, field: str = "theta") -> None:
    """Legacy-VTK structured points file for external viewers.

    ``dims`` are the (nx, ny, nz) point counts whose product must match the
    grid; point ordering must be x-fastest (VTK convention).
    """
    nx, ny, nz = (int(v) for v in dims)
    if nx * ny * nz != grid.points.shape[0]:
        raise ValueError("dims do not match the number of grid points")
    values = {
        "theta": grid.theta,
        "re_u": grid.u.real,
        "re_us": grid.us.real,
    }[field]
    origin = grid.points[0]
    spacing = grid.points[-1] - origin
    spacing = [
        spacing[i] / max(d - 1, 1) for i, d in enumerate((nx, ny, nz))
    ]
    with open(path, "w", newline="\n") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{field}\nASCII\nDATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {nx} {ny} {nz}\n")
        fh.write(f"ORIGIN {origin[0]!r} {origin[1]!r} {origin[2]!r}\n")
        fh.write(f"SPACING {spacing[0]!r} {spacing[1]!r} {spacing[2]!r}\n")
        fh.write(f"POINT_DATA {nx * ny * nz}\n")
        fh.write(f"SCALARS {field} double 1\nLOOKUP_TABLE default\n")
        for v in values:
            fh.write(f"{float(v)!r}\n")
