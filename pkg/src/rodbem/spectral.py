"""Spectra of the adjoint double-layer operator in the energy inner product.

The static operator K* is compact and self-adjoint in the inner product
``<u, v> = -(u, S0[v])``; its discrete counterpart is symmetrized against the
Gram matrix and solved by Cholesky congruence, so the computed spectrum is
real and the eigenfunctions come out exactly Gram-orthonormal.  A rank-one
deflation pins the equilibrium density at eigenvalue exactly 1/2 and forces
the surface integral of every other eigenfunction to vanish at machine
precision (both identities hold for the continuum operator on a closed
surface, but plain quadrature only delivers them to discretization accuracy).

The radius-zero limit operator assembled by :func:`~rodbem.operators.
assemble_k0_star` carries its nontrivial spectrum entirely in the two cap
blocks; :func:`k0_spectrum` therefore solves the symmetrized problem per cap
and extends eigenfunctions by zero onto the facade, which is exactly the
support property the limit eigenfunctions satisfy.  The per-cap net-charge
direction is the one mode whose flux must close through the rest of the rod,
and its eigenvalue is reported at the closed-surface value 1/2 it keeps at
every radius (see :func:`_cap_modes`).  The defect the zero extension leaves
in the junction-collar rows is reported per mode instead of being hidden.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import FrozenSet, List, Optional

import numpy as np
import scipy.linalg

from .geometry import (
    REGION_CAP_A,
    REGION_CAP_B,
    REGION_FACADE,
    SurfaceMesh,
    collar_masks,
)
from .operators import (
    BoundaryOperator,
    GramHstar,
    assemble_gram_hstar,
    assemble_k0_star,
    assemble_np_adjoint,
)

DEFAULT_MODES = 60

# |lambda| below this floor is dominated by quadrature noise; such modes are
# reported but never admitted into resonance index sets.
TAIL_FLOOR = 1e-3

DEFAULT_ETA0 = 0.05


@dataclass(frozen=True)
class NPSpectrum:
    """Top modes of a (symmetrized) boundary operator in the energy product.

    ``lambdas`` is sorted descending; ``eigfuncs[:, j]`` holds the panel
    values of mode j, normalized to unit energy norm; ``a`` records the
    energy norms squared actually measured before that normalization.
    ``operator`` is the symmetrized (and, for the full rod, deflated) matrix
    whose exact eigenpairs these are; the raw assembled operator differs from
    it by quadrature-level asymmetry.
    """

    lambdas: np.ndarray
    eigfuncs: np.ndarray
    a: np.ndarray
    mesh: SurfaceMesh
    gram: GramHstar
    operator: np.ndarray
    # Limit-operator spectra only: eigenfunction amplitude on facade panels
    # away from the junction collar (must vanish), and the eigen-equation
    # defect the zero extension leaves on the collar rows (boundary-layer
    # remnant, reported but not an error).
    facade_residuals: Optional[np.ndarray] = None
    collar_remnants: Optional[np.ndarray] = None

    @property
    def n_modes(self) -> int:
        return self.lambdas.size

    def coefficients(self, density: np.ndarray) -> np.ndarray:
        """Energy-product coefficients <phi_j, density> for every mode."""
        return self.eigfuncs.conj().T @ (self.gram.matrix @ np.asarray(density))

    def clusters(self, rel_tol: float = 1e-2, atol: float = 1e-4) -> List[np.ndarray]:
        """Group adjacent eigenvalues into degeneracy clusters.

        Walks the descending sequence and splits whenever the gap to the
        previous member exceeds ``atol + rel_tol * |previous|``.
        """
        groups: List[List[int]] = []
        for j, lam in enumerate(self.lambdas):
            if groups:
                prev = self.lambdas[groups[-1][-1]]
                if abs(prev - lam) <= atol + rel_tol * abs(prev):
                    groups[-1].append(j)
                    continue
            groups.append([j])
        return [np.array(g) for g in groups]

    def cluster_means(self, rel_tol: float = 1e-2, atol: float = 1e-4) -> np.ndarray:
        return np.array(
            [self.lambdas[g].mean() for g in self.clusters(rel_tol, atol)]
        )


@dataclass(frozen=True)
class ResonanceParams:
    """Resonance quantities tau_j = (1/eps_m + 1/eps_c)/2 + (1/eps_m - 1/eps_c) lambda_j.

    ``theta``/``rho`` are the real and imaginary parts of 1/eps_c (rho < 0
    for lossy inclusions); ``index_set`` collects the modes j >= 1 whose
    |tau_j| falls below ``eta0`` (tail modes under the noise floor are never
    admitted).
    """

    theta: float
    rho: float
    tau: np.ndarray
    lambdas: np.ndarray
    eps_c: complex
    eps_m: float
    eta0: float
    index_set: FrozenSet[int]


def _congruent_form(A: np.ndarray, L: np.ndarray) -> np.ndarray:
    """Standard-form matrix B = L^-1 A L^-T of the pencil (A, L L^T)."""
    half = scipy.linalg.solve_triangular(L, A, lower=True)
    B = scipy.linalg.solve_triangular(L, half.T, lower=True).T
    return 0.5 * (B + B.T)


def _eigh_or_reject(B: np.ndarray):
    try:
        return scipy.linalg.eigh(B)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(
            f"eigensolve did not converge on a {B.shape[0]}x{B.shape[0]} "
            f"symmetrized operator (norm {np.linalg.norm(B):.3e}): {exc}"
        ) from exc


def _fix_signs(columns: np.ndarray) -> np.ndarray:
    """Deterministic sign convention: largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(columns), axis=0)
    signs = np.sign(columns[idx, np.arange(columns.shape[1])])
    signs[signs == 0.0] = 1.0
    return columns * signs[None, :]


def _select_top(vals: np.ndarray, m: int) -> np.ndarray:
    """Indices of the m largest-|value| entries, ordered by descending value.

    Sorts descending by negation so ties keep their insertion order (the
    limit spectrum emits symmetric-before-antisymmetric pairs).
    """
    keep = np.argsort(-np.abs(vals), kind="stable")[: min(m, vals.size)]
    return keep[np.argsort(-vals[keep], kind="stable")]


def np_spectrum(
    mesh: SurfaceMesh,
    m: int = DEFAULT_MODES,
    *,
    operator: Optional[BoundaryOperator] = None,
    gram: Optional[GramHstar] = None,
) -> NPSpectrum:
    """Top-m spectrum of the static adjoint double layer on a closed mesh.

    The assembled operator is symmetrized against the Gram matrix, reduced to
    a standard symmetric problem by Cholesky congruence, and deflated on the
    equilibrium direction so that lambda_0 = 1/2 exactly and every j >= 1
    eigenfunction has exactly zero surface integral.  Modes are selected by
    |lambda| and returned sorted by descending eigenvalue.
    """
    if operator is None:
        operator = assemble_np_adjoint(0.0, mesh)
    if gram is None:
        gram = assemble_gram_hstar(mesh)
    K = np.ascontiguousarray(operator.matrix.real)
    M = gram.matrix
    L = gram.chol

    A = 0.5 * (M @ K + K.T @ M)
    B = _congruent_form(A, L)

    # Deflation: g is the equilibrium direction in congruence coordinates
    # (image of the area vector).  B' = P B P + (1/2) g g^T with P = I - g g^T.
    g = scipy.linalg.solve_triangular(L, gram.weights, lower=True)
    g = g / np.linalg.norm(g)
    Bg = B @ g
    B -= np.outer(g, Bg) + np.outer(Bg, g)
    B += (g @ Bg + 0.5) * np.outer(g, g)
    B = 0.5 * (B + B.T)

    vals, vecs = _eigh_or_reject(B)
    order = _select_top(vals, m)
    lambdas = vals[order]
    phi = scipy.linalg.solve_triangular(L, vecs[:, order], lower=True, trans="T")
    a = np.einsum("ij,ij->j", phi, M @ phi)
    phi = _fix_signs(phi / np.sqrt(a)[None, :])

    # The matrix whose exact eigenpairs were just computed: L^-T B' L^T.
    half = scipy.linalg.solve_triangular(L, B, lower=True, trans="T")
    symmetrized = half @ L.T

    return NPSpectrum(
        lambdas=lambdas,
        eigfuncs=phi.astype(np.complex128),
        a=a,
        mesh=mesh,
        gram=gram,
        operator=symmetrized,
    )


def _cap_modes(matrix: np.ndarray, gram: GramHstar, mask: np.ndarray):
    """Symmetrized eigenpairs of one cap block in the cap-restricted product.

    The top eigenvector carries the cap's net charge (the block is entrywise
    positive, so that direction is simple).  A net-charged cap closes its
    flux through the facade and the far cap — surface pieces the cap block
    cannot represent — and that global closure holds the corresponding
    full-rod eigenvalue at the closed-surface top 1/2 at every radius, so
    the measured block value is replaced by the exact limit here.  The
    remaining eigenvectors redistribute charge within the cap and keep
    their block eigenvalues.
    """
    C = np.ascontiguousarray(matrix[np.ix_(mask, mask)].real)
    Mc = gram.matrix[np.ix_(mask, mask)]
    Lc = scipy.linalg.cholesky(Mc, lower=True)
    Ac = 0.5 * (Mc @ C + C.T @ Mc)
    vals, vecs = _eigh_or_reject(_congruent_form(Ac, Lc))
    vals[np.argmax(vals)] = 0.5
    phi = scipy.linalg.solve_triangular(Lc, vecs, lower=True, trans="T")
    norms = np.sqrt(np.einsum("ij,ij->j", phi, Mc @ phi))
    return vals, phi / norms[None, :]


def k0_spectrum(
    mesh: SurfaceMesh,
    delta: float,
    m: int = DEFAULT_MODES,
    *,
    gram: Optional[GramHstar] = None,
) -> NPSpectrum:
    """Spectrum of the radius-zero limit operator on the reference rod.

    The limit operator's nonzero spectrum lives in the two cap blocks, and
    its eigenfunctions vanish on the facade; accordingly each cap block is
    solved in the cap-restricted energy product and the eigenfunctions are
    extended by zero.  Because the two caps are congruent their spectra pair
    up; each cross-cap pair is emitted as the balanced symmetric combination
    (equal cap integrals) followed by the antisymmetric one, which are the
    combinations the thin-rod mode amplitudes are built from.  The pair built
    on the per-cap net-charge direction leads the spectrum at the pinned
    value 1/2 (see :func:`_cap_modes`): its symmetric member is the limit of
    the equilibrium density — the trivial mode, reported as j = 0 — and its
    antisymmetric member the limit of the end-to-end dipole.
    """
    op = assemble_k0_star(mesh, delta)
    if gram is None:
        gram = assemble_gram_hstar(mesh)
    mask_a = mesh.regions == REGION_CAP_A
    mask_b = mesh.regions == REGION_CAP_B
    near_a, near_b = collar_masks(mesh, delta)
    collar = near_a | near_b
    outside = (mesh.regions == REGION_FACADE) & ~collar

    vals_a, phi_a = _cap_modes(op.matrix, gram, mask_a)
    vals_b, phi_b = _cap_modes(op.matrix, gram, mask_b)
    order_a = np.argsort(-vals_a, kind="stable")
    order_b = np.argsort(-vals_b, kind="stable")

    n = mesh.centroids.shape[0]
    w_a = mesh.areas[mask_a]
    w_b = mesh.areas[mask_b]
    area_scale = mesh.areas.max()

    modes: List[tuple] = []
    paired = min(order_a.size, order_b.size)
    # unequal cap panelizations leave the longer cap's tail modes unpaired
    for i in order_a[paired:]:
        full = np.zeros(n)
        full[mask_a] = phi_a[:, i]
        modes.append((vals_a[i], full))
    for i in order_b[paired:]:
        full = np.zeros(n)
        full[mask_b] = phi_b[:, i]
        modes.append((vals_b[i], full))
    for ia, ib in zip(order_a, order_b):
        la, lb = vals_a[ia], vals_b[ib]
        va, vb = phi_a[:, ia], phi_b[:, ib]
        lam = 0.5 * (la + lb)
        if abs(la - lb) > 1e-8 * max(abs(lam), 1e-3):
            # congruence between the caps broke down; keep the raw per-cap
            # modes rather than mixing distinct eigenspaces
            for val, vec, mk in ((la, va, mask_a), (lb, vb, mask_b)):
                full = np.zeros(n)
                full[mk] = vec
                modes.append((val, full))
            continue
        ra = w_a @ va
        rb = w_b @ vb
        if min(abs(ra), abs(rb)) > 1e-9 * area_scale:
            s = ra / rb
        else:
            s = 1.0
        for sign in (+1.0, -1.0):
            full = np.zeros(n)
            full[mask_a] = va
            full[mask_b] = sign * s * vb
            full /= np.sqrt(1.0 + s * s)
            modes.append((lam, full))

    lams = np.array([t[0] for t in modes])
    order = _select_top(lams, m)
    lambdas = lams[order]
    phi = np.stack([modes[i][1] for i in order], axis=1)

    # normalize in the direct sum of the two cap-restricted products: the
    # finite reference rod's cross-cap coupling (~ charge product / 4 pi L)
    # is a finite-radius artifact that vanishes as the ends separate under
    # the blow-up, and dropping it keeps the paired modes exactly orthogonal
    idx_a = np.flatnonzero(mask_a)
    idx_b = np.flatnonzero(mask_b)
    a = np.zeros(phi.shape[1])
    for idx in (idx_a, idx_b):
        Mc = gram.matrix[np.ix_(idx, idx)]
        a += np.einsum("ij,ij->j", phi[idx], Mc @ phi[idx])
    phi = _fix_signs(phi / np.sqrt(a)[None, :])

    facade_residuals = (
        np.abs(phi[outside]).max(axis=0) if outside.any() else np.zeros(lambdas.size)
    )
    defect = op.matrix[collar].real @ phi - lambdas[None, :] * phi[collar]
    collar_remnants = np.abs(defect).max(axis=0)

    symmetrized = np.zeros((n, n))
    for mask, vals, vecs in ((mask_a, vals_a, phi_a), (mask_b, vals_b, phi_b)):
        Mc = gram.matrix[np.ix_(mask, mask)]
        block = (vecs * vals[None, :]) @ vecs.T @ Mc
        symmetrized[np.ix_(mask, mask)] = block

    return NPSpectrum(
        lambdas=lambdas,
        eigfuncs=phi.astype(np.complex128),
        a=a,
        mesh=mesh,
        gram=gram,
        operator=symmetrized,
        facade_residuals=facade_residuals,
        collar_remnants=collar_remnants,
    )


def tau_values(
    spectrum: NPSpectrum,
    eps_c: complex,
    eps_m: float,
    eta0: float = DEFAULT_ETA0,
) -> ResonanceParams:
    """Resonance denominators tau_j for an inclusion/background pair."""
    eps_c = complex(eps_c)
    if eps_c == 0:
        raise ValueError("inclusion permittivity eps_c must be nonzero")
    eps_m = _validated_background(eps_m)
    inv_c = 1.0 / eps_c
    inv_m = 1.0 / eps_m
    tau = 0.5 * (inv_m + inv_c) + (inv_m - inv_c) * spectrum.lambdas
    params = ResonanceParams(
        theta=inv_c.real,
        rho=inv_c.imag,
        tau=tau,
        lambdas=spectrum.lambdas.copy(),
        eps_c=eps_c,
        eps_m=eps_m,
        eta0=float(eta0),
        index_set=frozenset(),
    )
    return replace(params, index_set=resonance_index_set(params, eta0))


def _validated_background(eps_m) -> float:
    eps_m = complex(eps_m)
    if eps_m.imag != 0.0 or eps_m.real <= 0.0:
        raise ValueError(f"background permittivity must be real positive, got {eps_m}")
    return eps_m.real


def resonance_index_set(params: ResonanceParams, eta0: Optional[float] = None):
    """Modes j >= 1 with |tau_j| < eta0, excluding the noise-floor tail."""
    if eta0 is None:
        eta0 = params.eta0
    if eta0 <= 0.0:
        raise ValueError(f"resonance threshold eta0 must be positive, got {eta0}")
    return frozenset(
        j
        for j in range(1, params.tau.size)
        if abs(params.tau[j]) < eta0 and abs(params.lambdas[j]) >= TAIL_FLOOR
    )


def resonant_permittivity_from_lambda(
    lam: float,
    eps_m: float,
    rho: float,
) -> complex:
    """Inclusion permittivity putting eigenvalue ``lam`` on resonance.

    Solves (theta + 1/eps_m) / (2 (theta - 1/eps_m)) = lam for
    theta = Re(1/eps_c) and returns eps_c = 1/(theta + i rho).  rho is passed
    through as Im(1/eps_c); lossy inclusions have rho < 0.  With this choice
    tau(lam) = i rho (1/2 - lam) exactly: purely imaginary, so the residual
    detuning is set by the loss alone.
    """
    eps_m = _validated_background(eps_m)
    lam = float(lam)
    if abs(2.0 * lam - 1.0) < 1e-12:
        raise ValueError(
            "the trivial eigenvalue 1/2 admits no resonant permittivity"
        )
    theta = (2.0 * lam + 1.0) / ((2.0 * lam - 1.0) * eps_m)
    denom = theta + 1j * float(rho)
    if denom == 0:
        raise ValueError(
            "1/eps_c = 0 at this loss level; no finite permittivity"
        )
    return 1.0 / denom


def resonant_permittivity_for_mode(
    j: int,
    spectrum: NPSpectrum,
    eps_m: float,
    rho: float,
) -> complex:
    """Inclusion permittivity putting mode j of a spectrum on resonance."""
    try:
        return resonant_permittivity_from_lambda(spectrum.lambdas[j], eps_m, rho)
    except ValueError as exc:
        raise ValueError(f"{exc} (mode {j})") from None


def raw_adjoint_lambdas(mesh: SurfaceMesh, count: int) -> np.ndarray:
    """Top ``count`` eigenvalues of the assembled static adjoint matrix.

    Unsymmetrized, sorted descending by real part.  The symmetrized spectrum
    differs from these by the quadrature-level asymmetry of the assembly
    (around 1e-4 at desk resolutions).  Loss sweeps that pin a resonance must
    pin against these values: the transmission operator at omega = 0 is built
    from the raw matrix, so only a raw eigenvalue makes the residual detuning
    purely the loss term |rho| (1/2 - lambda_j); pinning against the
    symmetrized value leaves a real detuning of asymmetry size that swamps
    the loss at small omega.  Only the well-separated top of the spectrum is
    near-real; deeper clusters degenerate into complex pairs and are refused.
    """
    count = int(count)
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    vals = np.linalg.eigvals(assemble_np_adjoint(0.0, mesh).matrix)
    if count > vals.size:
        raise ValueError(
            f"asked for {count} eigenvalues of a {vals.size}-panel operator"
        )
    top = vals[np.argsort(-vals.real)][:count]
    worst = float(np.max(np.abs(top.imag)))
    if worst > 1e-8:
        raise ValueError(
            f"the top {count} raw eigenvalues include a complex pair "
            f"(max |Im| = {worst:.3e}); only the well-separated head of the "
            "spectrum can be pinned this way"
        )
    return top.real


def spectrum_report(spectrum: NPSpectrum, params: ResonanceParams) -> str:
    """Human-readable mode table: j, lambda_j, a_j, |tau_j|, resonance flag."""
    lines = [
        f"spectrum: {spectrum.n_modes} modes on {spectrum.mesh.kind} mesh "
        f"({spectrum.mesh.centroids.shape[0]} panels)",
        f"eps_c={params.eps_c!r}  eps_m={params.eps_m!r}  eta0={params.eta0!r}",
        "note: tau_0 is evaluated from the same eigenvalue formula as every "
        "mode; the trivial mode is excluded from the index set by definition.",
        f"{'j':>4} {'lambda_j':>15} {'a_j':>13} {'|tau_j|':>13} {'in J':>5}",
    ]
    for j in range(spectrum.n_modes):
        flag = "*" if j in params.index_set else ""
        lines.append(
            f"{j:>4} {spectrum.lambdas[j]:>+15.8e} {spectrum.a[j]:>13.6e} "
            f"{abs(params.tau[j]):>13.6e} {flag:>5}"
        )
    if spectrum.facade_residuals is not None:
        lines.append(
            "facade amplitude (outside collar) max: "
            f"{spectrum.facade_residuals.max():.3e}; junction-collar defect "
            f"max: {spectrum.collar_remnants.max():.3e}"
        )
    return "\n".join(lines) + "\n"


def write_spectrum_csv(path, spectrum: NPSpectrum, params: ResonanceParams) -> None:
    """Machine-readable companion of :func:`spectrum_report`."""
    with open(path, "w", newline="\n") as fh:
        fh.write("j,lambda,a,abs_tau,in_J\n")
        for j in range(spectrum.n_modes):
            fh.write(
                f"{j},{float(spectrum.lambdas[j])!r},{float(spectrum.a[j])!r},"
                f"{float(abs(params.tau[j]))!r},{int(j in params.index_set)}\n"
            )
