"""Dense assembly of boundary-integral operators on panel meshes.

Discretization is centroid-collocation Nystrom on flat triangles: the matrix
entry (p, q) approximates the integral of the kernel over panel q observed at
the centroid of panel p, so ``matrix @ density`` evaluates the layer potential
at the collocation points.  Three accuracy tiers per entry:

* far pairs: kernel at centroids times source area;
* near pairs (centroid gap below twice the larger panel diameter): a
  symmetric 7x7-point product rule over both panels, averaged over the
  target panel — this keeps the weighted single-layer matrix exactly
  symmetric and controls facade self-interaction on thin tubes;
* self panels: exact in-plane integral of the 1/r singularity plus the same
  7-point rule for the bounded remainder.

The weakly singular normal-derivative diagonal is never quadratured: it is
calibrated so the closed-surface solid-angle identity (transposed operator
maps the constant density to one half) holds exactly, which also pins the
top of the spectrum at 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy.spatial import cKDTree

from . import kernels
from .geometry import (
    REGION_CAP_A,
    REGION_CAP_B,
    REGION_FACADE,
    SurfaceMesh,
    collar_masks,
)

FOUR_PI = 4.0 * np.pi

NEAR_FACTOR = 2.0  # product quadrature when centroid gap < NEAR_FACTOR * max diameter

# Degree-5 symmetric 7-point triangle rule (barycentric points, unit-sum weights).
_S15 = np.sqrt(15.0)
_QA = (6.0 - _S15) / 21.0
_QB = (6.0 + _S15) / 21.0
TRI_QUAD_BARY = np.array(
    [
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [_QA, _QA, 1.0 - 2.0 * _QA],
        [_QA, 1.0 - 2.0 * _QA, _QA],
        [1.0 - 2.0 * _QA, _QA, _QA],
        [_QB, _QB, 1.0 - 2.0 * _QB],
        [_QB, 1.0 - 2.0 * _QB, _QB],
        [1.0 - 2.0 * _QB, _QB, _QB],
    ]
)
TRI_QUAD_W = np.array(
    [9.0 / 40.0]
    + [(155.0 - _S15) / 1200.0] * 3
    + [(155.0 + _S15) / 1200.0] * 3
)

_REGION_NAMES = {
    "cap_a": REGION_CAP_A,
    "facade": REGION_FACADE,
    "cap_b": REGION_CAP_B,
}

RegionSpec = Union[str, int, Sequence[Union[str, int]], np.ndarray]

_ROW_CHUNK = 512  # bounds the (chunk, n, 3) temporaries during dense assembly
_PAIR_CHUNK = 4096


@dataclass(frozen=True)
class BoundaryOperator:
    """Dense panel-space realization of a boundary integral operator.

    ``matrix @ density`` evaluates the operator; ``weights`` are the panel
    areas (quadrature weights of the underlying surface measure).
    """

    matrix: np.ndarray
    weights: np.ndarray
    kind: str
    k: complex
    mesh: SurfaceMesh
    order: Optional[int] = None  # series order for SeriesS / SeriesK
    label: str = ""

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def apply(self, density: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(density)


@dataclass(frozen=True)
class GramHstar:
    """Gram matrix of the energy inner product <u, v> = -(u, S0[v]).

    Symmetric positive definite; ``chol`` is the lower Cholesky factor used
    by the spectral solver's congruence transform.
    """

    matrix: np.ndarray
    chol: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        return np.conj(np.asarray(u)) @ (self.matrix @ np.asarray(v))

    def norm(self, u: np.ndarray) -> float:
        val = self.inner(u, u)
        return float(np.sqrt(max(val.real, 0.0)))


def panel_quadrature(mesh: SurfaceMesh):
    """7-point rule on every panel: points (n, 7, 3), weights (n, 7).

    Weights sum to the panel area; the first point is the centroid.
    """
    pts = np.einsum("qc,ncj->nqj", TRI_QUAD_BARY, mesh.vertices)
    wts = mesh.areas[:, None] * TRI_QUAD_W[None, :]
    return pts, wts


def near_pairs(mesh: SurfaceMesh, factor: float = NEAR_FACTOR) -> np.ndarray:
    """Index pairs (p < q) of distinct panels needing product quadrature."""
    tree = cKDTree(mesh.centroids)
    pairs = tree.query_pairs(factor * mesh.max_diameter(), output_type="ndarray")
    if pairs.size == 0:
        return pairs.reshape(0, 2)
    gap = np.linalg.norm(
        mesh.centroids[pairs[:, 0]] - mesh.centroids[pairs[:, 1]], axis=1
    )
    cut = factor * np.maximum(mesh.diameters[pairs[:, 0]], mesh.diameters[pairs[:, 1]])
    return pairs[gap < cut]


def _triangle_self_inv_r(mesh: SurfaceMesh) -> np.ndarray:
    """Exact integral of 1/|c - y| over each flat triangle from its centroid.

    Per-edge closed form d_e * log((r_b + l_b) / (r_a + l_a)); all distances
    positive because the centroid is strictly interior.
    """
    c = mesh.centroids
    total = np.zeros(mesh.n_panels)
    for e in range(3):
        a = mesh.vertices[:, e, :]
        b = mesh.vertices[:, (e + 1) % 3, :]
        t = b - a
        that = t / np.linalg.norm(t, axis=1)[:, None]
        la = np.einsum("ni,ni->n", a - c, that)
        lb = np.einsum("ni,ni->n", b - c, that)
        perp = (a - c) - la[:, None] * that
        dist = np.linalg.norm(perp, axis=1)
        ra = np.linalg.norm(a - c, axis=1)
        rb = np.linalg.norm(b - c, axis=1)
        total += dist * np.log((rb + lb) / (ra + la))
    return total


def _smooth_green_r(k: complex, r: np.ndarray) -> np.ndarray:
    """Bounded part -(e^{ikr} - 1)/(4 pi r) of the kernel; limit -ik/(4 pi) at 0."""
    out = np.full(r.shape, -1j * k / FOUR_PI, dtype=complex)
    nz = r > 0.0
    out[nz] = -np.expm1(1j * k * r[nz]) / (FOUR_PI * r[nz])
    return out


def _dense_kernel_matrix(
    mesh: SurfaceMesh,
    fr: Callable[[np.ndarray, Optional[np.ndarray]], np.ndarray],
    needs_dot: bool,
    pairs: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Off-diagonal assembly: far entries at centroids, near pairs by the
    product rule.  ``fr(r, dot)`` maps distances (and, for normal-derivative
    kernels, <x - y, nu_x>) to kernel values.  Diagonal left at zero.
    """
    cent = mesh.centroids
    w = mesh.areas
    nu = mesh.normals
    n = mesh.n_panels
    mat = np.empty((n, n), dtype=complex)
    for lo in range(0, n, _ROW_CHUNK):
        hi = min(lo + _ROW_CHUNK, n)
        diff = cent[lo:hi, None, :] - cent[None, :, :]
        r = np.sqrt(np.einsum("pqi,pqi->pq", diff, diff))
        # keep the (still unset) diagonal finite
        for i in range(lo, hi):
            r[i - lo, i] = 1.0
        dot = np.einsum("pqi,pi->pq", diff, nu[lo:hi]) if needs_dot else None
        mat[lo:hi] = fr(r, dot) * w[None, :]
    np.fill_diagonal(mat, 0.0)

    if pairs is None:
        pairs = near_pairs(mesh)
    if len(pairs) == 0:
        return mat
    qpts, qwts = panel_quadrature(mesh)
    for lo in range(0, len(pairs), _PAIR_CHUNK):
        sel = pairs[lo : lo + _PAIR_CHUNK]
        p, q = sel[:, 0], sel[:, 1]
        xp = qpts[p]
        yq = qpts[q]
        d = xp[:, :, None, :] - yq[:, None, :, :]
        rr = np.sqrt(np.einsum("bijx,bijx->bij", d, d))
        ww = qwts[p][:, :, None] * qwts[q][:, None, :]
        if needs_dot:
            dot_pq = np.einsum("bijx,bx->bij", d, nu[p])
            dot_qp = -np.einsum("bijx,bx->bij", d, nu[q])
            ipq = np.einsum("bij,bij->b", ww, fr(rr, dot_pq))
            iqp = np.einsum("bij,bij->b", ww, fr(rr, dot_qp))
        else:
            vals = np.einsum("bij,bij->b", ww, fr(rr, None))
            ipq = vals
            iqp = vals
        mat[p, q] = ipq / w[p]
        mat[q, p] = iqp / w[q]
    return mat


def _self_quadrature_diag(
    mesh: SurfaceMesh, fr: Callable[[np.ndarray], np.ndarray]
) -> np.ndarray:
    """7-point integral of a bounded radial kernel over each panel from its
    own centroid (the rule's first node sits at r = 0; ``fr`` must be finite
    there)."""
    qpts, qwts = panel_quadrature(mesh)
    d = qpts - mesh.centroids[:, None, :]
    r = np.sqrt(np.einsum("nqi,nqi->nq", d, d))
    return np.einsum("nq,nq->n", qwts, fr(r))


def _np_adjoint_offdiag(k: complex, mesh: SurfaceMesh, pairs=None) -> np.ndarray:
    def fr(r, dot):
        g = kernels.green_r(k, r)
        return (1j * k - 1.0 / r) * g / r * dot

    return _dense_kernel_matrix(mesh, fr, True, pairs=pairs)


def _gauss_calibrated_diag(offdiag: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Diagonal making column sums of W @ K* equal w/2 exactly (the discrete
    solid-angle closure; absorbs the local curvature term)."""
    colsum = w @ offdiag
    return 0.5 - colsum / w


def assemble_single_layer(k: complex, mesh: SurfaceMesh) -> BoundaryOperator:
    """Single layer potential operator for wavenumber ``k`` (0 = static)."""
    k = complex(k)
    pairs = near_pairs(mesh)
    mat = _dense_kernel_matrix(
        mesh, lambda r, dot: kernels.green_r(k, r), False, pairs=pairs
    )
    diag = -(1.0 / FOUR_PI) * _triangle_self_inv_r(mesh) + 0.0j
    if k != 0.0:
        diag = diag + _self_quadrature_diag(mesh, lambda r: _smooth_green_r(k, r))
    mat[np.diag_indices_from(mat)] = diag
    return BoundaryOperator(
        matrix=mat, weights=mesh.areas, kind="SingleLayer", k=k, mesh=mesh
    )


def assemble_np_adjoint(k: complex, mesh: SurfaceMesh) -> BoundaryOperator:
    """Normal-derivative (adjoint double layer) operator for wavenumber ``k``.

    The diagonal is always the statically calibrated one: every frequency
    correction to the kernel carries the factor <x - y, nu_x>, which vanishes
    identically for source points in the plane of a flat target panel.
    """
    k = complex(k)
    pairs = near_pairs(mesh)
    static = _np_adjoint_offdiag(0.0, mesh, pairs=pairs)
    diag = _gauss_calibrated_diag(static, mesh.areas)
    if k == 0.0:
        mat = static
    else:
        mat = _np_adjoint_offdiag(k, mesh, pairs=pairs)
    mat[np.diag_indices_from(mat)] = diag
    return BoundaryOperator(
        matrix=mat, weights=mesh.areas, kind="NPAdjoint", k=k, mesh=mesh
    )


def assemble_series_term(kind: str, j: int, mesh: SurfaceMesh) -> BoundaryOperator:
    """j-th frequency-series coefficient operator, kind "S" or "K".

    Assembled with the same near-pair and self-panel rules as the full
    operators, so truncating the series reproduces the assembled full matrix
    entry-for-entry up to the dropped orders.
    """
    if kind not in ("S", "K"):
        raise ValueError(f"unknown series kind {kind!r}; expected 'S' or 'K'")
    if j == 0:
        raise ValueError("series order j must be >= 1; the j = 0 term is the "
                         "static operator itself")
    pairs = near_pairs(mesh)
    if kind == "S":
        mat = _dense_kernel_matrix(
            mesh, lambda r, dot: kernels.series_s_r(j, r), False, pairs=pairs
        )
        diag = _self_quadrature_diag(mesh, lambda r: kernels.series_s_r(j, r))
        mat[np.diag_indices_from(mat)] = diag
        tag = "SeriesS"
    else:
        mat = _dense_kernel_matrix(
            mesh, lambda r, dot: kernels.series_k_r(j, r, dot), True, pairs=pairs
        )
        # <x - y, nu_x> = 0 in-plane: the self term vanishes for flat panels
        tag = "SeriesK"
    return BoundaryOperator(
        matrix=mat, weights=mesh.areas, kind=tag, k=0.0, mesh=mesh, order=j
    )


def assemble_gram_hstar(
    mesh: SurfaceMesh, single_layer: Optional[BoundaryOperator] = None
) -> GramHstar:
    """Gram matrix M = -sym(W S0) of the energy inner product.

    Passing a prebuilt static single layer avoids reassembly.  Rejects
    meshes whose Gram matrix fails the Cholesky positivity check.
    """
    if single_layer is None:
        single_layer = assemble_single_layer(0.0, mesh)
    elif single_layer.k != 0.0:
        raise ValueError("Gram matrix needs the static single layer (k = 0)")
    ws = mesh.areas[:, None] * single_layer.matrix.real
    m = -0.5 * (ws + ws.T)
    try:
        chol = scipy.linalg.cholesky(m, lower=True)
    except scipy.linalg.LinAlgError as exc:
        lo = float(scipy.linalg.eigvalsh(m, subset_by_index=(0, 0))[0])
        raise ValueError(
            f"energy Gram matrix is not positive definite (min eigenvalue {lo:.3e}); "
            "mesh is too distorted for the centroid rule"
        ) from exc
    return GramHstar(matrix=m, chol=chol, weights=mesh.areas)


def region_mask(mesh: SurfaceMesh, spec: RegionSpec) -> np.ndarray:
    """Boolean panel mask from a region name, tag, iterable thereof, or an
    explicit mask."""
    if isinstance(spec, np.ndarray) and spec.dtype == bool:
        if spec.shape != (mesh.n_panels,):
            raise ValueError("boolean region mask has wrong length")
        return spec
    if isinstance(spec, (str, int, np.integer)):
        spec = [spec]
    mask = np.zeros(mesh.n_panels, dtype=bool)
    for item in spec:
        if isinstance(item, str):
            try:
                tag = _REGION_NAMES[item]
            except KeyError:
                raise ValueError(
                    f"unknown region {item!r}; expected one of {sorted(_REGION_NAMES)}"
                ) from None
        else:
            tag = int(item)
            if tag not in (REGION_CAP_A, REGION_FACADE, REGION_CAP_B):
                raise ValueError(f"unknown region tag {tag}")
        mask |= mesh.regions == tag
    return mask


def _static_kernel(kind: str):
    if kind == "S":
        return (lambda r, dot: kernels.green_r(0.0, r)), False
    if kind == "Kstar":
        return (lambda r, dot: dot / (FOUR_PI * r**3)), True
    raise ValueError(f"unknown kernel kind {kind!r}; expected 'S' or 'Kstar'")


def _point_block(
    targets: np.ndarray,
    target_normals: Optional[np.ndarray],
    sources: np.ndarray,
    source_w: np.ndarray,
    kind: str,
) -> np.ndarray:
    """Kernel matrix between explicit target and source points (no panel
    self/near handling; coincident points give a zero entry)."""
    fr, needs_dot = _static_kernel(kind)
    diff = targets[:, None, :] - sources[None, :, :]
    r = np.sqrt(np.einsum("pqi,pqi->pq", diff, diff))
    tiny = r < 1e-12
    r[tiny] = 1.0
    dot = (
        np.einsum("pqi,pi->pq", diff, target_normals) if needs_dot else None
    )
    vals = fr(r, dot) * source_w[None, :]
    vals[tiny] = 0.0
    return vals


def assemble_block(
    kind: str,
    rows: RegionSpec,
    cols: RegionSpec,
    mesh: SurfaceMesh,
    mode: str = "direct",
) -> BoundaryOperator:
    """Region-restricted operator embedded in an N x N matrix (zero outside).

    ``kind`` is "S" (single layer) or "Kstar" (normal derivative), always
    static.  Modes:

    * ``direct``: submatrix of the full assembled operator;
    * ``foot``: source points replaced by their centerline feet (caps
      collapse onto the endpoints);
    * ``endpoint_p0`` / ``endpoint_q0``: the target collapses to the
      endpoint, with the outward end direction as its normal; facade sources
      collapse to their feet, cap sources stay at their centroids (their
      feet are the endpoint itself).  All rows of the block are identical.
    """
    rmask = region_mask(mesh, rows)
    cmask = region_mask(mesh, cols)
    if not rmask.any() or not cmask.any():
        raise ValueError("empty region selection for block operator")
    n = mesh.n_panels
    out = np.zeros((n, n), dtype=complex)
    label = f"{kind}[{mode}]"

    if mode == "direct":
        full = (
            assemble_single_layer(0.0, mesh)
            if kind == "S"
            else assemble_np_adjoint(0.0, mesh)
        )
        out[np.ix_(rmask, cmask)] = full.matrix[np.ix_(rmask, cmask)]
    elif mode == "foot":
        if mesh.feet is None:
            raise ValueError("foot mode needs a mesh with centerline feet")
        block = _point_block(
            mesh.centroids[rmask],
            mesh.normals[rmask],
            mesh.feet[cmask],
            mesh.areas[cmask],
            kind,
        )
        out[np.ix_(rmask, cmask)] = block
    elif mode in ("endpoint_p0", "endpoint_q0"):
        if mesh.curve is None:
            raise ValueError("endpoint mode needs a rod mesh with a centerline")
        if mode == "endpoint_p0":
            target = mesh.curve.p0
            normal = mesh.end_dir_a
        else:
            target = mesh.curve.q0
            normal = mesh.end_dir_b
        col_idx = np.flatnonzero(cmask)
        source_pts = np.where(
            (mesh.regions[col_idx] == REGION_FACADE)[:, None],
            mesh.feet[col_idx],
            mesh.centroids[col_idx],
        )
        row = _point_block(
            target[None, :],
            normal[None, :],
            source_pts,
            mesh.areas[col_idx],
            kind,
        )
        out[np.ix_(rmask, cmask)] = np.broadcast_to(
            row, (int(rmask.sum()), len(col_idx))
        )
    else:
        raise ValueError(
            f"unknown projection mode {mode!r}; expected 'direct', 'foot', "
            "'endpoint_p0' or 'endpoint_q0'"
        )
    return BoundaryOperator(
        matrix=out, weights=mesh.areas, kind="Block", k=0.0, mesh=mesh, label=label
    )


def _cap_correspondence(mesh: SurfaceMesh) -> tuple[np.ndarray, np.ndarray]:
    """Global panel indices of the two caps, aligned pairwise under the
    isometry that maps one end of the rod onto the other.

    Both caps are produced by the same construction in a local end frame
    (origin at the endpoint, z along the outward end direction, x toward the
    first junction-ring vertex), up to a reflection of the azimuth, so
    matching (x, y, z) on cap A against (x, -y, z) on cap B pairs congruent
    panels.  Raises if the match is not a tight bijection.
    """
    if mesh.curve is None:
        raise ValueError("cap correspondence needs a rod mesh")
    idx_a = np.flatnonzero(mesh.regions == REGION_CAP_A)
    idx_b = np.flatnonzero(mesh.regions == REGION_CAP_B)
    if idx_a.size != idx_b.size:
        raise ValueError("cap panel counts differ between the two ends")

    def local_coords(idx, origin, zax, ring, flip):
        xax = ring[0] - origin
        xax = xax - (xax @ zax) * zax
        xax = xax / np.linalg.norm(xax)
        yax = np.cross(zax, xax)
        rel = mesh.centroids[idx] - origin[None, :]
        sign = -1.0 if flip else 1.0
        return np.column_stack([rel @ xax, sign * (rel @ yax), rel @ zax])

    la = local_coords(idx_a, mesh.curve.p0, mesh.end_dir_a, mesh.junction_a, False)
    lb = local_coords(idx_b, mesh.curve.q0, mesh.end_dir_b, mesh.junction_b, True)
    gap = np.linalg.norm(la[:, None, :] - lb[None, :, :], axis=2)
    match = np.argmin(gap, axis=1)
    residual = gap[np.arange(idx_a.size), match].max() if idx_a.size else 0.0
    if (
        np.bincount(match, minlength=idx_b.size).max() > 1
        or residual > 1e-6 * float(mesh.delta)
    ):
        raise ValueError(
            "cap meshes are not mirror images of each other "
            f"(match residual {residual:.3e})"
        )
    return idx_a, idx_b[match]


def _cap_limit_blocks(mesh: SurfaceMesh) -> np.ndarray:
    """Cap-to-cap entries of the vanishing-radius normal-derivative operator
    on the reference rod.

    Same-cap off-diagonal entries are dilation invariant, so the reference
    mesh provides them directly.  The diagonal keeps the solid-angle closure
    of the full rod, not of the cap alone: the whole-surface column sums of
    W K* equal w/2 at every radius, and as the radius shrinks the foreign
    contribution to a cap column is carried entirely by the facade — the
    junction neighbourhood subtends a radius-independent solid angle from
    each cap panel — while cross-cap sums vanish with the radius.  Hence

        diag = 1/2 - same-cap column sum - facade column sum,

    both read off the reference mesh.  The caps are congruent up to a
    reflection; averaging the two measured blocks over that correspondence
    removes the facade triangulation's handedness wobble and places exactly
    the same block on both caps, so the spectrum pairs into symmetric and
    antisymmetric end combinations without residual splitting.
    """
    pairs = near_pairs(mesh)
    offdiag = _np_adjoint_offdiag(0.0, mesh, pairs=pairs).real
    w = mesh.areas
    idx_a, idx_b = _cap_correspondence(mesh)
    facade = np.flatnonzero(mesh.regions == REGION_FACADE)

    def measured(idx):
        sub = offdiag[np.ix_(idx, idx)]
        colsum = (w[idx] @ sub + w[facade] @ offdiag[np.ix_(facade, idx)]) / w[idx]
        return sub, colsum

    sub_a, col_a = measured(idx_a)
    sub_b, col_b = measured(idx_b)
    block = 0.5 * (sub_a + sub_b)
    np.fill_diagonal(block, 0.5 - 0.5 * (col_a + col_b))
    n = mesh.n_panels
    out = np.zeros((n, n), dtype=complex)
    out[np.ix_(idx_a, idx_a)] = block
    out[np.ix_(idx_b, idx_b)] = block
    return out


def assemble_k0_star(mesh: SurfaceMesh, delta: float) -> BoundaryOperator:
    """Radius-zero limit of the normal-derivative operator on the reference
    rod (unit radius): cap-to-cap blocks plus junction-collapsed facade rows.

    ``delta`` sets the junction collar width; facade panels whose foot lies
    within ``delta`` of an endpoint see the adjacent cap through the kernel
    frozen at the junction-ring point nearest the panel (with the facade's
    outward radial there).  Rows of facade panels outside both collars are
    identically zero.
    """
    if mesh.delta is None or abs(mesh.delta - 1.0) > 1e-9:
        raise ValueError(
            "the limiting operator lives on the reference rod; build the mesh "
            "with radius 1"
        )
    if not 0.0 < delta:
        raise ValueError("collar width must be positive")
    near_a, near_b = collar_masks(mesh, delta)
    if not near_a.any() or not near_b.any():
        raise ValueError(
            f"junction collar of width {delta} holds no facade panels; "
            "refine the axial resolution or widen the collar"
        )
    mat = _cap_limit_blocks(mesh)
    w = mesh.areas
    for collar, cap_tag, ring, endpoint in (
        (near_a, REGION_CAP_A, mesh.junction_a, mesh.curve.p0),
        (near_b, REGION_CAP_B, mesh.junction_b, mesh.curve.q0),
    ):
        cmask = mesh.regions == cap_tag
        ridx = np.flatnonzero(collar)
        # deterministic junction target: nearest ring vertex to each row panel
        gaps = np.linalg.norm(
            mesh.centroids[ridx][:, None, :] - ring[None, :, :], axis=2
        )
        x1 = ring[np.argmin(gaps, axis=1)]
        nu1 = x1 - endpoint[None, :]
        nu1 = nu1 / np.linalg.norm(nu1, axis=1)[:, None]
        mat[np.ix_(collar, cmask)] = _point_block(
            x1, nu1, mesh.centroids[cmask], w[cmask], "Kstar"
        )
    return BoundaryOperator(
        matrix=mat, weights=w, kind="K0Star", k=0.0, mesh=mesh,
        label=f"collar={delta}",
    )


def assemble_k1_star(mesh: SurfaceMesh, delta: float) -> BoundaryOperator:
    """First radius-order correction seen by the cap rows: facade sources
    collapsed onto the centerline and evaluated from the endpoints.

    Diagnostic only — used by the radius-expansion residual checks.
    """
    if mesh.delta is None or abs(mesh.delta - 1.0) > 1e-9:
        raise ValueError(
            "the correction operator lives on the reference rod; build the "
            "mesh with radius 1"
        )
    a = assemble_block("Kstar", "cap_a", "facade", mesh, mode="endpoint_p0")
    b = assemble_block("Kstar", "cap_b", "facade", mesh, mode="endpoint_q0")
    return BoundaryOperator(
        matrix=a.matrix + b.matrix, weights=mesh.areas, kind="K1Star", k=0.0,
        mesh=mesh, label=f"collar={delta}",
    )


def dump_operator(op: BoundaryOperator, path) -> None:
    """Text dump: header line, then one matrix row per line as re/im pairs."""
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# kind={op.kind} k={complex(op.k)!r} n={op.n}\n")
        for row in op.matrix:
            fh.write(
                " ".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in row)
                + "\n"
            )
