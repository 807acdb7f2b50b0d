"""Surface meshes for thin curved rods and test spheres.

Geometry model
--------------
A rod is the set of points within distance ``delta`` of a simple, non-closed
centerline curve.  Its boundary splits into three regions: a cylindrical
*facade* swept along the curve interior, and two hemispherical *caps* closing
the tube over the endpoints ``P0`` (start) and ``Q0`` (end).  Meshes are flat
triangle panels intended for centroid-collocation quadrature: each panel
carries its centroid, outward unit normal, area, region tag, and *foot* (the
nearest centerline point; exactly the endpoint for cap panels).

The *blowup map* rescales a rod of radius ``delta`` to the reference rod of
radius one about the local foot: facade points map via
``y -> (y - z_y)/delta + z_y`` and cap points via the same formula with the
endpoint as center.  Building the same rod with ``delta = 1`` reproduces the
blown-up mesh with identical connectivity, which the asymptotic operators
rely on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "REGION_CAP_A",
    "REGION_FACADE",
    "REGION_CAP_B",
    "OUTSIDE",
    "INSIDE",
    "NEAR_BOUNDARY",
    "CenterlineCurve",
    "FrameField",
    "RodSpec",
    "SurfaceMesh",
    "build_centerline",
    "rotation_minimizing_frames",
    "build_rod_mesh",
    "build_sphere_mesh",
    "nearest_on_curve",
    "blowup_map",
    "classify_points",
    "collar_masks",
    "export_mesh",
]

# Region tags for panels.
REGION_CAP_A = 0
REGION_FACADE = 1
REGION_CAP_B = 2

# Point classification labels.
OUTSIDE = 0
INSIDE = 1
NEAR_BOUNDARY = 2

# Dense-resampling factor for centerline polylines; foot projection and frame
# transport run on the dense polyline, mesh stations are a subset of it.
_DENSE_PER_STATION = 8


@dataclass(frozen=True)
class CenterlineCurve:
    """Arclength-sampled simple open curve.

    Attributes
    ----------
    points : (n, 3) float array, samples uniform in arclength.
    tangents : (n, 3) float array, unit tangents at the samples.
    arclens : (n,) float array, cumulative arclength, ``arclens[0] == 0``.
    kind : str, the generator name ("straight" or "bent").
    """

    points: np.ndarray
    tangents: np.ndarray
    arclens: np.ndarray
    kind: str
    params: np.ndarray = None  # generator parameter at the samples

    @property
    def p0(self) -> np.ndarray:
        return self.points[0]

    @property
    def q0(self) -> np.ndarray:
        return self.points[-1]

    @property
    def length(self) -> float:
        return float(self.arclens[-1])

    def max_curvature(self) -> float:
        """Discrete curvature bound |dT/ds| estimated from the samples."""
        dt = np.diff(self.tangents, axis=0)
        ds = np.diff(self.arclens)
        kappa = np.linalg.norm(dt, axis=1) / np.maximum(ds, 1e-300)
        return float(kappa.max()) if kappa.size else 0.0


@dataclass(frozen=True)
class FrameField:
    """Rotation-minimizing normal frames along a centerline.

    ``(tangent, normal1, normal2)`` is right-handed at every sample.
    """

    normals1: np.ndarray
    normals2: np.ndarray


@dataclass(frozen=True)
class RodSpec:
    """Meshing parameters for a rod surface.

    ``n_axial`` facade rings along the arclength, ``n_circum`` panels around
    the circumference, ``cap_refine`` latitude bands per hemispherical cap.
    """

    curve: CenterlineCurve
    delta: float
    n_axial: int = 48
    n_circum: int = 16
    cap_refine: int = 5

    def validate(self) -> None:
        if not np.isfinite(self.delta) or self.delta <= 0.0:
            raise ValueError(f"tube radius must be positive, got {self.delta}")
        if self.n_axial < 4:
            raise ValueError("n_axial must be at least 4")
        if self.n_circum < 6:
            raise ValueError("n_circum must be at least 6")
        if self.cap_refine < 2:
            raise ValueError("cap_refine must be at least 2")
        if 2.0 * self.delta >= self.curve.length:
            raise ValueError(
                "tube radius too large: caps would overlap "
                f"(delta={self.delta}, centerline length={self.curve.length})"
            )
        kappa = self.curve.max_curvature()
        if self.delta * kappa >= 1.0:
            raise ValueError(
                "tube radius exceeds the reach of the centerline: "
                f"delta*max_curvature = {self.delta * kappa:.3f} >= 1"
            )


@dataclass
class SurfaceMesh:
    """Flat-panel triangle mesh of a closed surface."""

    vertices: np.ndarray  # (n, 3, 3) triangle vertex coordinates
    centroids: np.ndarray  # (n, 3)
    normals: np.ndarray  # (n, 3) outward unit normals
    areas: np.ndarray  # (n,)
    regions: np.ndarray  # (n,) int8 region tags
    feet: np.ndarray  # (n, 3) nearest centerline point per panel
    diameters: np.ndarray  # (n,) longest edge per panel
    kind: str = "rod"
    delta: Optional[float] = None
    curve: Optional[CenterlineCurve] = None
    # Junction data for endpoint-collapsed operators: the shared cap/facade
    # ring vertices and the outward axis direction at each end.
    junction_a: Optional[np.ndarray] = None  # (n_circum, 3)
    junction_b: Optional[np.ndarray] = None
    end_dir_a: Optional[np.ndarray] = None  # unit vector, points out of the rod
    end_dir_b: Optional[np.ndarray] = None

    @property
    def n_panels(self) -> int:
        return int(self.areas.shape[0])

    def total_area(self) -> float:
        return float(self.areas.sum())

    def max_diameter(self) -> float:
        return float(self.diameters.max())

    def enclosed_volume(self) -> float:
        """Divergence-theorem volume, exact for a closed flat-panel surface."""
        flux = np.einsum("ij,ij->i", self.centroids, self.normals)
        return float((flux * self.areas).sum() / 3.0)

    def region_mask(self, *tags: int) -> np.ndarray:
        mask = np.zeros(self.n_panels, dtype=bool)
        for tag in tags:
            mask |= self.regions == tag
        return mask


def _bent_point(t: np.ndarray) -> np.ndarray:
    out = np.zeros(t.shape + (3,))
    out[..., 1] = (np.cos(t) - 1.0) / 2.0
    out[..., 2] = 2.0 * np.sin(t)
    return out


def _bent_velocity(t: np.ndarray) -> np.ndarray:
    out = np.zeros(t.shape + (3,))
    out[..., 1] = -np.sin(t) / 2.0
    out[..., 2] = 2.0 * np.cos(t)
    return out


def _bent_acceleration(t: np.ndarray) -> np.ndarray:
    out = np.zeros(t.shape + (3,))
    out[..., 1] = -np.cos(t) / 2.0
    out[..., 2] = -2.0 * np.sin(t)
    return out


# Parameter window of the bent demo centerline.
_BENT_T0 = -np.pi / 2.0 + 3.0 / 10.0
_BENT_T1 = np.pi / 2.0 - 3.0 / 10.0


def build_centerline(kind: str, length: float = 4.0, n_samples: int = 1025) -> CenterlineCurve:
    """Build an arclength-parameterized centerline.

    Parameters
    ----------
    kind : "straight" for a segment of the given ``length`` along the x3 axis
        centered at the origin, or "bent" for the curved demo arc
        ``(0, (cos t - 1)/2, 2 sin t)`` over its fixed parameter window
        (``length`` is ignored for "bent").
    n_samples : number of arclength-uniform samples kept on the curve.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    if kind == "straight":
        if not np.isfinite(length) or length <= 0.0:
            raise ValueError(f"straight centerline needs positive length, got {length}")
        s = np.linspace(0.0, length, n_samples)
        points = np.zeros((n_samples, 3))
        points[:, 2] = s - length / 2.0
        tangents = np.tile(np.array([0.0, 0.0, 1.0]), (n_samples, 1))
        return CenterlineCurve(points=points, tangents=tangents, arclens=s, kind=kind, params=s)
    if kind == "bent":
        # Arclength-resample the analytic arc: dense parameter grid, cumulative
        # trapezoid arclength, then invert s(t) by interpolation.
        t_dense = np.linspace(_BENT_T0, _BENT_T1, 16 * n_samples + 1)
        speed = np.linalg.norm(_bent_velocity(t_dense), axis=1)
        s_dense = np.concatenate(
            [[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(t_dense))]
        )
        s = np.linspace(0.0, s_dense[-1], n_samples)
        t = np.interp(s, s_dense, t_dense)
        t[0], t[-1] = _BENT_T0, _BENT_T1
        points = _bent_point(t)
        vel = _bent_velocity(t)
        tangents = vel / np.linalg.norm(vel, axis=1, keepdims=True)
        return CenterlineCurve(points=points, tangents=tangents, arclens=s, kind=kind, params=t)
    raise ValueError(f"unknown centerline kind: {kind!r}")


def _initial_normal(tangent: np.ndarray) -> np.ndarray:
    # Smallest-index coordinate axis not (nearly) parallel to the tangent,
    # with the tangential component projected out.
    for axis in np.eye(3):
        candidate = axis - np.dot(axis, tangent) * tangent
        norm = np.linalg.norm(candidate)
        if norm > 1e-8:
            return candidate / norm
    raise ValueError("degenerate tangent")


def rotation_minimizing_frames(curve: CenterlineCurve) -> FrameField:
    """Transport a normal frame along the curve with minimal twist.

    Uses the double-reflection method, which is fourth-order accurate in the
    sample spacing.  The initial normal is the smallest-index coordinate axis
    orthogonalized against the initial tangent.
    """
    pts, tan = curve.points, curve.tangents
    n = pts.shape[0]
    n1 = np.empty((n, 3))
    n1[0] = _initial_normal(tan[0])
    for i in range(n - 1):
        v1 = pts[i + 1] - pts[i]
        c1 = np.dot(v1, v1)
        if c1 == 0.0:
            n1[i + 1] = n1[i]
            continue
        r_l = n1[i] - (2.0 / c1) * np.dot(v1, n1[i]) * v1
        t_l = tan[i] - (2.0 / c1) * np.dot(v1, tan[i]) * v1
        v2 = tan[i + 1] - t_l
        c2 = np.dot(v2, v2)
        if c2 == 0.0:
            n1[i + 1] = r_l
        else:
            n1[i + 1] = r_l - (2.0 / c2) * np.dot(v2, r_l) * v2
        n1[i + 1] /= np.linalg.norm(n1[i + 1])
    n2 = np.cross(tan, n1)
    n2 /= np.linalg.norm(n2, axis=1, keepdims=True)
    return FrameField(normals1=n1, normals2=n2)


def _triangle_data(vertices: np.ndarray):
    """Centroids, raw normals, areas, and diameters of (n,3,3) triangles."""
    a, b, c = vertices[:, 0], vertices[:, 1], vertices[:, 2]
    centroids = (a + b + c) / 3.0
    cross = np.cross(b - a, c - a)
    cross_norm = np.linalg.norm(cross, axis=1)
    areas = 0.5 * cross_norm
    normals = cross / np.maximum(cross_norm, 1e-300)[:, None]
    edges = np.stack(
        [
            np.linalg.norm(b - a, axis=1),
            np.linalg.norm(c - b, axis=1),
            np.linalg.norm(a - c, axis=1),
        ],
        axis=1,
    )
    return centroids, normals, areas, edges.max(axis=1)


def _orient_outward(vertices: np.ndarray, normals: np.ndarray, outward: np.ndarray):
    """Flip triangles whose normal opposes the given outward direction."""
    flip = np.einsum("ij,ij->i", normals, outward) < 0.0
    if np.any(flip):
        vertices[flip] = vertices[flip][:, [0, 2, 1], :]
        normals[flip] = -normals[flip]
    return vertices, normals


def _cap_mesh(center, ring, e_r, pole_dir, delta, cap_refine, n_circum):
    """Triangulate a hemispherical cap welded to the given equator ring.

    Latitude bands shrink toward the pole at ``center + delta*pole_dir``;
    ring vertices at band 0 are reused exactly so the surface stays closed.
    """
    rings = [ring]
    for k in range(1, cap_refine):
        phi = (np.pi / 2.0) * k / cap_refine
        rings.append(center + delta * (np.cos(phi) * e_r + np.sin(phi) * pole_dir))
    pole = center + delta * pole_dir
    tris = []
    for k in range(cap_refine - 1):
        lo, hi = rings[k], rings[k + 1]
        for j in range(n_circum):
            jn = (j + 1) % n_circum
            tris.append((lo[j], hi[j], hi[jn]))
            tris.append((lo[j], hi[jn], lo[jn]))
    last = rings[cap_refine - 1]
    for j in range(n_circum):
        jn = (j + 1) % n_circum
        tris.append((last[j], pole, last[jn]))
    return np.asarray(tris)


def build_rod_mesh(spec: RodSpec) -> SurfaceMesh:
    """Mesh the boundary of a rod: swept tube facade plus hemispherical caps.

    The facade sweeps a circle of radius ``delta`` along rotation-minimizing
    frames; caps are latitude-band hemispheres sharing the end rings exactly.
    Panel normals are outward, feet are nearest centerline points (endpoints
    for cap panels), and regions tag cap A / facade / cap B.
    """
    spec.validate()
    curve, delta = spec.curve, spec.delta
    n_axial, n_circum = spec.n_axial, spec.n_circum

    # Stations as a subset of a dense arclength-uniform polyline so frames and
    # foot projection share the same geometry.
    dense = build_centerline(
        curve.kind, length=curve.length, n_samples=_DENSE_PER_STATION * n_axial + 1
    )
    frames = rotation_minimizing_frames(dense)
    idx = np.arange(0, dense.points.shape[0], _DENSE_PER_STATION)
    stations = dense.points[idx]
    tangents = dense.tangents[idx]
    n1 = frames.normals1[idx]
    n2 = frames.normals2[idx]

    theta = 2.0 * np.pi * np.arange(n_circum) / n_circum
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    # rings[i, j] = station i + delta * radial direction j
    e_r = cos_t[None, :, None] * n1[:, None, :] + sin_t[None, :, None] * n2[:, None, :]
    rings = stations[:, None, :] + delta * e_r

    tri_list = []
    region_list = []
    for i in range(n_axial):
        lo, hi = rings[i], rings[i + 1]
        for j in range(n_circum):
            jn = (j + 1) % n_circum
            tri_list.append((lo[j], hi[j], hi[jn]))
            tri_list.append((lo[j], hi[jn], lo[jn]))
    facade_tris = np.asarray(tri_list)
    region_list.append(np.full(facade_tris.shape[0], REGION_FACADE, dtype=np.int8))

    p0, q0 = dense.points[0], dense.points[-1]
    cap_a = _cap_mesh(p0, rings[0], e_r[0], -tangents[0], delta, spec.cap_refine, n_circum)
    cap_b = _cap_mesh(q0, rings[-1], e_r[-1], tangents[-1], delta, spec.cap_refine, n_circum)
    region_list.insert(0, np.full(cap_a.shape[0], REGION_CAP_A, dtype=np.int8))
    region_list.append(np.full(cap_b.shape[0], REGION_CAP_B, dtype=np.int8))

    vertices = np.concatenate([cap_a, facade_tris, cap_b], axis=0)
    regions = np.concatenate(region_list)
    centroids, normals, areas, diameters = _triangle_data(vertices)

    feet = np.empty_like(centroids)
    cap_a_mask = regions == REGION_CAP_A
    cap_b_mask = regions == REGION_CAP_B
    facade_mask = regions == REGION_FACADE
    feet[cap_a_mask] = p0
    feet[cap_b_mask] = q0
    feet[facade_mask], _, _ = nearest_on_curve(centroids[facade_mask], dense)

    vertices, normals = _orient_outward(vertices, normals, centroids - feet)

    return SurfaceMesh(
        vertices=vertices,
        centroids=centroids,
        normals=normals,
        areas=areas,
        regions=regions,
        feet=feet,
        diameters=diameters,
        kind="rod",
        delta=delta,
        curve=dense,
        junction_a=rings[0].copy(),
        junction_b=rings[-1].copy(),
        end_dir_a=-tangents[0],
        end_dir_b=tangents[-1],
    )


_OCTA_VERTS = np.array(
    [[1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0], [0, -1.0, 0], [0, 0, 1.0], [0, 0, -1.0]]
)
_OCTA_FACES = [
    (4, 0, 2), (4, 2, 1), (4, 1, 3), (4, 3, 0),
    (5, 2, 0), (5, 1, 2), (5, 3, 1), (5, 0, 3),
]


def _icosahedron():
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = []
    for a in (-1.0, 1.0):
        for b in (-phi, phi):
            verts += [(0, a, b), (a, b, 0), (b, 0, a)]
    verts = np.asarray(verts)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    from scipy.spatial import ConvexHull

    hull = ConvexHull(verts)
    return verts, [tuple(s) for s in hull.simplices]


def build_sphere_mesh(
    refine: int = 3,
    radius: float = 1.0,
    center=(0.0, 0.0, 0.0),
    base: str = "octa",
) -> SurfaceMesh:
    """Geodesic sphere mesh: subdivide a base solid and project to the sphere.

    ``base="octa"`` gives 8*4^refine panels, ``base="icosa"`` 20*4^refine.
    Used as the test geometry with known layer-potential identities.
    """
    if refine < 0:
        raise ValueError("refine must be nonnegative")
    if base == "octa":
        verts, faces = _OCTA_VERTS.copy(), list(_OCTA_FACES)
    elif base == "icosa":
        verts, faces = _icosahedron()
    else:
        raise ValueError(f"unknown sphere base: {base!r}")

    tris = verts[np.asarray(faces)]
    for _ in range(refine):
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        ab, bc, ca = (a + b) / 2.0, (b + c) / 2.0, (c + a) / 2.0
        for m in (ab, bc, ca):
            m /= np.linalg.norm(m, axis=1, keepdims=True)
        tris = np.concatenate(
            [
                np.stack([a, ab, ca], axis=1),
                np.stack([ab, b, bc], axis=1),
                np.stack([ca, bc, c], axis=1),
                np.stack([ab, bc, ca], axis=1),
            ],
            axis=0,
        )

    center = np.asarray(center, dtype=float)
    vertices = center + radius * tris
    centroids, normals, areas, diameters = _triangle_data(vertices)
    vertices, normals = _orient_outward(vertices, normals, centroids - center)
    n = vertices.shape[0]
    return SurfaceMesh(
        vertices=vertices,
        centroids=centroids,
        normals=normals,
        areas=areas,
        regions=np.full(n, REGION_FACADE, dtype=np.int8),
        feet=np.tile(center, (n, 1)),
        diameters=diameters,
        kind="sphere",
        delta=None,
        curve=None,
    )


def _refine_feet_bent(points, t_init):
    """Newton-polish polyline feet on the analytic bent arc.

    Minimizes |y - x(t)|^2 from the polyline estimate, clamped to the
    parameter window; falls back to the starting parameter where Newton does
    not improve (beyond the curve's reach the minimizer can be non-unique).
    Returned feet always lie on the analytic curve.
    """
    t = t_init.copy()
    for _ in range(12):
        x = _bent_point(t)
        v = _bent_velocity(t)
        a = _bent_acceleration(t)
        r = points - x
        grad = -2.0 * np.einsum("ij,ij->i", r, v)
        hess = 2.0 * (np.einsum("ij,ij->i", v, v) - np.einsum("ij,ij->i", r, a))
        step = -grad / np.where(np.abs(hess) > 1e-300, hess, 1.0)
        step[hess <= 0.0] = 0.0
        t = np.clip(t + step, _BENT_T0, _BENT_T1)
    feet = _bent_point(t)
    d2 = np.sum((points - feet) ** 2, axis=1)
    feet0 = _bent_point(t_init)
    d2_0 = np.sum((points - feet0) ** 2, axis=1)
    worse = d2 > d2_0
    feet[worse] = feet0[worse]
    d2[worse] = d2_0[worse]
    return feet, d2


def nearest_on_curve(points: np.ndarray, curve: CenterlineCurve):
    """Nearest centerline points (feet) for a batch of query points.

    Returns ``(feet, distances, at_endpoint)`` where ``at_endpoint`` is True
    when the nearest point is one of the curve endpoints (cap side).
    Projection is onto the sampled polyline: nearest sample, then exact
    projection onto its two adjacent segments.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    pts = curve.points
    tree = cKDTree(pts)
    _, nearest_idx = tree.query(points)

    n = pts.shape[0]
    best_feet = pts[nearest_idx].copy()
    best_d2 = np.sum((points - best_feet) ** 2, axis=1)
    best_param = curve.params[nearest_idx].copy() if curve.params is not None else None
    # candidate segments: [i-1, i] and [i, i+1]
    for start in (np.maximum(nearest_idx - 1, 0), np.minimum(nearest_idx, n - 2)):
        seg_a = pts[start]
        seg_v = pts[start + 1] - seg_a
        vv = np.sum(seg_v * seg_v, axis=1)
        t = np.clip(np.sum((points - seg_a) * seg_v, axis=1) / np.maximum(vv, 1e-300), 0.0, 1.0)
        cand = seg_a + t[:, None] * seg_v
        d2 = np.sum((points - cand) ** 2, axis=1)
        better = d2 < best_d2
        best_feet[better] = cand[better]
        best_d2[better] = d2[better]
        if best_param is not None:
            seg_param = curve.params[start] + t * (curve.params[start + 1] - curve.params[start])
            best_param[better] = seg_param[better]

    if curve.kind == "bent" and best_param is not None:
        best_feet, best_d2 = _refine_feet_bent(points, best_param)

    dists = np.sqrt(best_d2)
    end_tol = 1e-9 * max(curve.length, 1.0)
    at_end = (
        np.linalg.norm(best_feet - curve.p0, axis=1) < end_tol
    ) | (np.linalg.norm(best_feet - curve.q0, axis=1) < end_tol)
    return best_feet, dists, at_end


def blowup_map(
    points: np.ndarray,
    curve: CenterlineCurve,
    delta: float,
    inverse: bool = False,
) -> np.ndarray:
    """Rescale points radially about their centerline foot.

    Forward maps the physical rod (radius ``delta``) onto the reference rod
    (radius one); ``inverse=True`` maps back.  The foot is preserved by the
    map, so forward followed by inverse is the identity wherever the scaled
    point keeps the same foot: for a curved centerline that is points whose
    image stays within the curve's reach ``1/max_curvature``.  Rod surfaces
    and interiors of straight rods are always safe.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    feet, _, _ = nearest_on_curve(points, curve)
    scale = delta if inverse else 1.0 / delta
    return feet + scale * (points - feet)


def classify_points(
    points: np.ndarray,
    curve: CenterlineCurve,
    delta: float,
    collar: float,
) -> np.ndarray:
    """Label points OUTSIDE / INSIDE / NEAR_BOUNDARY relative to the rod.

    A point is inside when its distance to the centerline (endpoints
    included) is below ``delta``; within ``collar`` of the boundary it is
    flagged NEAR_BOUNDARY, where centroid-rule field evaluation is untrusted.
    """
    if collar < 0.0:
        raise ValueError("collar must be nonnegative")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    _, dists, _ = nearest_on_curve(points, curve)
    labels = np.where(dists < delta, INSIDE, OUTSIDE).astype(np.int8)
    labels[np.abs(dists - delta) < collar] = NEAR_BOUNDARY
    return labels


def collar_masks(mesh: SurfaceMesh, width: float):
    """Facade panels whose foot lies within ``width`` of each endpoint.

    These are the junction collars used by the endpoint-collapsed block
    operators.  Returns ``(near_a, near_b)`` boolean masks over panels.
    """
    if mesh.curve is None:
        raise ValueError("collar masks need a rod mesh with a centerline")
    facade = mesh.regions == REGION_FACADE
    d_a = np.linalg.norm(mesh.feet - mesh.curve.p0, axis=1)
    d_b = np.linalg.norm(mesh.feet - mesh.curve.q0, axis=1)
    return facade & (d_a < width), facade & (d_b < width)


def export_mesh(mesh: SurfaceMesh, path) -> None:
    """Write the panel list as plain text: nine vertex coordinates and the
    region tag per line, shortest round-trip float formatting."""
    with open(path, "w", newline="\n") as fh:
        for tri, tag in zip(mesh.vertices, mesh.regions):
            coords = " ".join(repr(float(v)) for v in tri.reshape(9))
            fh.write(f"{coords} {int(tag)}\n")
