"""Quasi-static expansions against the full solver: density and field
agreement trends, the collapsed two-point far field, the straight-rod
amplitude profile, blowup scaling predictions, and the CSV exports.

Solver-agreement values were frozen from oracle runs at the desk resolution
(24x12 rod, cap refine 4, 744 panels); they are convergence *trends*, not
absolute tolerances, except where a value is analytic.
"""

import numpy as np
import pytest

from rodbem import asymptotics as asym
from rodbem import geometry as geo
from rodbem import solver as sol
from rodbem import spectral as spectral
from rodbem.kernels import wavenumbers

EPS_NONRES = -3.0 + 0.5j
DIRECTION = [0.0, 0.0, 1.0]
OMEGAS = (0.04, 0.02, 0.01)
DELTA = 0.25


@pytest.fixture(scope="module")
def rod_spectrum(rod_mesh_small):
    # 200 modes cover the axial family and a deep tail of the rod spectrum
    return spectral.np_spectrum(rod_mesh_small, 200)


@pytest.fixture(scope="module")
def nonres_model(rod_spectrum):
    params = spectral.tau_values(rod_spectrum, EPS_NONRES, 1.0)
    return asym.build_quasistatic_model(rod_spectrum, params, DIRECTION)


@pytest.fixture(scope="module")
def nonres_solves(rod_mesh_small):
    runs = {}
    for om in OMEGAS:
        mat = wavenumbers(om, EPS_NONRES)
        wave = sol.plane_wave(DIRECTION, mat, amplitude=1.0)
        runs[om] = (mat, wave, sol.solve_transmission(rod_mesh_small, mat, wave))
    return runs


@pytest.fixture(scope="module")
def resonant_setup(rod_spectrum, rod_mesh_small):
    # mode 1 held near resonance with a fixed loss floor
    eps_res = spectral.resonant_permittivity_for_mode(1, rod_spectrum, 1.0, rho=-0.04)
    params = spectral.tau_values(rod_spectrum, eps_res, 1.0)
    model = asym.build_quasistatic_model(rod_spectrum, params, DIRECTION)
    runs = {}
    for om in OMEGAS:
        mat = wavenumbers(om, eps_res)
        wave = sol.plane_wave(DIRECTION, mat, amplitude=1.0)
        runs[om] = (mat, wave, sol.solve_transmission(rod_mesh_small, mat, wave))
    return model, sorted(params.index_set), runs


# ---------------------------------------------------------------------------
# model construction


class TestModelConstruction:
    def test_direction_normalized_and_couplings_invariant(self, rod_spectrum):
        params = spectral.tau_values(rod_spectrum, EPS_NONRES, 1.0)
        a = asym.build_quasistatic_model(rod_spectrum, params, [0.0, 0.0, 2.0])
        b = asym.build_quasistatic_model(rod_spectrum, params, DIRECTION)
        assert np.allclose(a.direction, [0.0, 0.0, 1.0])
        assert np.allclose(a.couplings, b.couplings)

    def test_mode_norms_are_unit(self, nonres_model):
        assert np.max(np.abs(nonres_model.mode_norms - 1.0)) < 1e-10

    def test_axial_incidence_drives_only_odd_modes(self, nonres_model):
        c = np.abs(nonres_model.couplings)
        # odd axial modes carry the coupling; even ones are suppressed to the
        # level of the swept mesh's mirror asymmetry (measured 4e-6)
        assert c[1] > 0.1
        assert c[3] > 0.05
        assert max(c[2], c[4]) < 1e-4 * c[1]

    def test_params_from_other_spectrum_rejected(self, rod_spectrum, rod_mesh_small):
        other = spectral.np_spectrum(rod_mesh_small, 10)
        params = spectral.tau_values(other, EPS_NONRES, 1.0)
        with pytest.raises(ValueError, match="different spectrum"):
            asym.build_quasistatic_model(rod_spectrum, params, DIRECTION)

    def test_bad_direction_and_mu_rejected(self, rod_spectrum):
        params = spectral.tau_values(rod_spectrum, EPS_NONRES, 1.0)
        with pytest.raises(ValueError, match="direction"):
            asym.build_quasistatic_model(rod_spectrum, params, [0.0, 0.0, 0.0])
        with pytest.raises(ValueError, match="permeability"):
            asym.build_quasistatic_model(rod_spectrum, params, DIRECTION, mu_m=-1.0)

    def test_cap_moments_mirror_pairing(self, nonres_model):
        # straight-rod modes split into mirror parities: each cap moment pair
        # agrees up to sign, to the accuracy of the swept mesh's symmetry
        ma, mb = nonres_model.cap_moments_a, nonres_model.cap_moments_b
        checked = 0
        for j in range(1, 11):
            top = max(abs(ma[j]), abs(mb[j]))
            if top < 1e-3:
                continue
            resid = min(abs(ma[j] - mb[j]), abs(ma[j] + mb[j])) / top
            assert resid < 8e-3, f"mode {j}: mirror residual {resid:.2e}"
            checked += 1
        assert checked >= 6

    @pytest.mark.xfail(
        strict=True,
        reason="the swept-frame mesh is not exactly mirror symmetric; the "
        "cap-moment pairing saturates near 4e-3 relative, far above 1e-6",
    )
    def test_cap_moments_mirror_pairing_tight(self, nonres_model):
        ma, mb = nonres_model.cap_moments_a, nonres_model.cap_moments_b
        for j in range(1, 11):
            top = max(abs(ma[j]), abs(mb[j]))
            if top < 1e-3:
                continue
            resid = min(abs(ma[j] - mb[j]), abs(ma[j] + mb[j])) / top
            assert resid < 1e-6

    def test_sphere_model_has_no_caps(self, sphere_small):
        sp = spectral.np_spectrum(sphere_small, 6)
        params = spectral.tau_values(sp, EPS_NONRES, 1.0)
        model = asym.build_quasistatic_model(sp, params, DIRECTION)
        assert not model.has_caps
        assert np.all(model.cap_moments_a == 0)
        # density expansion still works; collapsed-rod fields do not
        psi = asym.psi_quasistatic(model, 0.02, [1, 2, 3])
        assert psi.shape == (sphere_small.n_panels,)
        with pytest.raises(ValueError, match="end caps"):
            asym.cap_layer_potential(model, [[3.0, 0.0, 0.0]])


# ---------------------------------------------------------------------------
# spectral building blocks


class TestSpectralPieces:
    def test_lam_ratio_values(self):
        assert asym.lam_ratio(-1.0) == 0.0
        # eps_c = -1, eps_m = 1 sits exactly at the flat-interface value
        assert asym.lam_ratio(1.0 / (-1.0)) == 0.0
        assert asym.lam_ratio(3.0) == pytest.approx(1.0)
        with pytest.raises(ValueError, match="t = 1"):
            asym.lam_ratio(1.0)

    def test_mode_denominators_match_tau(self, nonres_model):
        den = asym.mode_denominators(nonres_model, DELTA, [1, 3, 5])
        contrast = 1.0 / EPS_NONRES - 1.0
        tau = nonres_model.params.tau[[1, 3, 5]]
        assert np.allclose(den * contrast, tau, rtol=1e-14)

    def test_mode_denominators_radius_correction_shift(self, nonres_model):
        base = asym.mode_denominators(nonres_model, DELTA, [1])
        shifted = asym.mode_denominators(nonres_model, DELTA, [1], lam1=0.3)
        contrast = 1.0 / EPS_NONRES - 1.0
        assert shifted[0] - base[0] == pytest.approx(DELTA * 0.3 / contrast)

    def test_mode_denominators_rejects_degenerate_contrast(self, rod_spectrum):
        params = spectral.tau_values(rod_spectrum, 1.0 + 0.0j, 1.0)
        model = asym.build_quasistatic_model(rod_spectrum, params, DIRECTION)
        with pytest.raises(ValueError, match="degenerate contrast"):
            asym.mode_denominators(model, DELTA, [1])

    def test_mode_range_validated(self, nonres_model):
        with pytest.raises(ValueError, match="outside the computed spectrum"):
            asym.psi_quasistatic(nonres_model, 0.02, [9999])

    def test_remainder_order_arithmetic(self, nonres_model):
        got = asym.remainder_order(nonres_model, 0.02, [1, 3])
        tau = nonres_model.params.tau
        want = max(0.02**2 / abs(tau[1]), 0.02**2 / abs(tau[3])) + 0.02
        assert got == pytest.approx(want)
        assert asym.remainder_order(nonres_model, 0.02, []) == pytest.approx(0.02)

    def test_lam1_estimate_difference_quotient(self, rod_spectrum, straight_curve):
        thin = geo.build_rod_mesh(
            geo.RodSpec(
                curve=straight_curve, delta=0.2, n_axial=24, n_circum=12, cap_refine=3
            )
        )
        sp_thin = spectral.np_spectrum(thin, 6)
        slope = asym.lam1_estimate(rod_spectrum, sp_thin)
        assert slope.shape == (6,)
        want = (rod_spectrum.lambdas[:6] - sp_thin.lambdas) / (0.25 - 0.2)
        assert np.allclose(slope, want)
        with pytest.raises(ValueError, match="same tube radius"):
            asym.lam1_estimate(rod_spectrum, rod_spectrum)

    def test_lam1_estimate_needs_rod_meshes(self, rod_spectrum, sphere_small):
        sp = spectral.np_spectrum(sphere_small, 6)
        with pytest.raises(ValueError, match="tube radius"):
            asym.lam1_estimate(rod_spectrum, sp)


# ---------------------------------------------------------------------------
# collapsed cap layer


class TestCapLayer:
    def test_two_point_collapse(self, nonres_model, straight_curve):
        # beyond a few radii the cap layer is indistinguishable from two
        # monopoles at the rod endpoints
        rng = np.random.default_rng(7)
        pts = []
        while len(pts) < 8:
            x = rng.uniform([-3, -3, -4], [3, 3, 4])
            _, dist, _ = geo.nearest_on_curve(x[None, :], straight_curve)
            if dist[0] > DELTA + 5 * DELTA:
                pts.append(x)
        pts = np.array(pts)
        j = 2
        layer = asym.cap_layer_potential(nonres_model, pts)[:, j]
        ma = nonres_model.cap_moments_a[j]

        def mono(r):
            return -1.0 / (4 * np.pi * r)

        two = ma * (
            mono(np.linalg.norm(pts - straight_curve.p0, axis=1))
            + mono(np.linalg.norm(pts - straight_curve.q0, axis=1))
        )
        rel = np.abs(layer - two) / np.max(np.abs(layer))
        assert rel.max() < 1e-2
        assert rel.max() < 1e-3  # measured 5.9e-5; order of margin kept

    def test_coincident_source_rejected(self, nonres_model, straight_curve):
        with pytest.raises(ValueError, match="coincides"):
            asym.cap_layer_potential(nonres_model, straight_curve.p0[None, :])


# ---------------------------------------------------------------------------
# quasi-static density


class TestPsiQuasistatic:
    def test_zero_contrast_gives_zero_density(self, rod_spectrum):
        params = spectral.tau_values(rod_spectrum, 1.0 + 0.0j, 1.0)
        model = asym.build_quasistatic_model(rod_spectrum, params, DIRECTION)
        psi = asym.psi_quasistatic(model, 0.02, range(1, 20))
        assert np.all(psi == 0)

    def test_linear_omega_scaling(self, nonres_model):
        a = asym.psi_quasistatic(nonres_model, 0.02, [1, 3, 5])
        b = asym.psi_quasistatic(nonres_model, 0.01, [1, 3, 5])
        assert np.linalg.norm(a - 2.0 * b) < 1e-12 * np.linalg.norm(a)

    def test_empty_mode_set_gives_zeros(self, nonres_model):
        psi = asym.psi_quasistatic(nonres_model, 0.02, [])
        assert psi.shape == (nonres_model.mesh.n_panels,)
        assert np.all(psi == 0)

    def test_lossless_resonance_rejected(self, rod_spectrum):
        eps = spectral.resonant_permittivity_from_lambda(
            float(rod_spectrum.lambdas[1]), 1.0, rho=0.0
        )
        params = spectral.tau_values(rod_spectrum, eps, 1.0)
        model = asym.build_quasistatic_model(rod_spectrum, params, DIRECTION)
        with pytest.raises(ValueError, match="lossless resonance"):
            asym.psi_quasistatic(model, 0.02, [1])

    def test_leading_mode_coefficients_match_solver(
        self, nonres_model, nonres_solves, rod_spectrum
    ):
        # per-mode validation: each driven mode's solver coefficient matches
        # the closed form to the mesh's data-trace accuracy
        _, _, densities = nonres_solves[0.02]
        coef_full = rod_spectrum.coefficients(densities.psi)
        contrast = 1.0 / EPS_NONRES - 1.0
        for j, tol in ((1, 0.01), (3, 0.015), (5, 0.05)):
            pred = (
                1j
                * 0.02
                * contrast
                * nonres_model.couplings[j]
                / nonres_model.params.tau[j]
            )
            assert abs(coef_full[j] / pred - 1.0) < tol

    def test_mode_subset_insensitivity_near_resonance(self, rod_spectrum):
        # off-resonant modes contribute under 10 percent to the resonant sum
        eps = spectral.resonant_permittivity_for_mode(1, rod_spectrum, 1.0, rho=-0.02)
        params = spectral.tau_values(rod_spectrum, eps, 1.0)
        model = asym.build_quasistatic_model(rod_spectrum, params, DIRECTION)
        J = sorted(params.index_set)
        extras = [j for j in range(1, 40) if j not in params.index_set][:12]
        for om in (0.02, 0.01):
            lean = asym.psi_quasistatic(model, om, J)
            fat = asym.psi_quasistatic(model, om, J + extras)
            change = np.linalg.norm(fat - lean) / np.linalg.norm(lean)
            assert change < 0.10
            assert change < 0.01  # measured 1e-4

    @pytest.mark.xfail(
        strict=True,
        reason="density-level error saturates at the mesh's discrete-trace "
        "defect: the solver's flux data is a discrete interior map whose "
        "quadrature-scale deviation from the analytic normal trace enters at "
        "the same order in omega as the density itself, so halving omega "
        "stops shrinking the relative error at this resolution",
    )
    def test_density_error_halves_with_omega(self, nonres_model, nonres_solves):
        errs = []
        for om in (0.02, 0.01):
            _, _, densities = nonres_solves[om]
            qs = asym.psi_quasistatic(nonres_model, om, range(1, 200))
            errs.append(
                np.linalg.norm(qs - densities.psi) / np.linalg.norm(densities.psi)
            )
        assert errs[0] / errs[1] >= 1.5


# ---------------------------------------------------------------------------
# field expansions


class TestFieldExpansions:
    def test_far_field_error_halves_with_omega(self, nonres_model, nonres_solves):
        far = 45.0 * np.array(
            [[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [0.577, 0.577, 0.578], [-1.0, 0, 0]]
        )
        errs = []
        for om in OMEGAS:
            mat, wave, densities = nonres_solves[om]
            grid = sol.eval_field(densities, mat, wave, far)
            ua = asym.us_asymptotic(nonres_model, om, DELTA, range(1, 200), far)
            errs.append(np.linalg.norm(ua - grid.us) / np.linalg.norm(grid.us))
        assert errs[0] / errs[1] >= 1.5  # measured 3.9
        assert errs[1] / errs[2] >= 1.5  # measured 1.6
        assert errs[2] < 0.2  # measured 0.107

    def test_interior_error_decreases_near_resonance(self, resonant_setup):
        model, J, runs = resonant_setup
        assert J == [1]
        inner = np.array(
            [
                [0.0, 0.0, 1.9],
                [0.0, 0.0, -1.9],
                [0.1, 0.0, 1.85],
                [0.0, 0.0, 1.5],
                [0.0, 0.1, -1.6],
            ]
        )
        errs = []
        for om in OMEGAS:
            mat, wave, densities = runs[om]
            grid = sol.eval_field(densities, mat, wave, inner, collar=0.0)
            ua = asym.u_interior_asymptotic(model, om, DELTA, J, inner)
            errs.append(np.linalg.norm(ua - grid.us) / np.linalg.norm(grid.us))
        assert errs[0] > errs[1] > errs[2]
        assert errs[0] / errs[2] > 1.8  # measured 2.3
        assert errs[2] < 0.7  # measured 0.55

    def test_interior_and_exterior_share_denominators(self, nonres_model):
        # both expansions must reduce to the same per-mode building blocks
        x_out = np.array([[0.0, 2.0, 3.0]])
        x_in = np.array([[0.0, 0.0, 1.5]])
        om = 0.02
        contrast = 1.0 / EPS_NONRES - 1.0
        layer_out = asym.cap_layer_potential(nonres_model, x_out)
        layer_in = asym.cap_layer_potential(nonres_model, x_in)
        for j in (1, 3, 5):
            den = asym.mode_denominators(nonres_model, DELTA, [j])[0]
            c = nonres_model.couplings[j] / nonres_model.mode_norms[j]
            want_out = 1j * om * c * layer_out[0, j] * DELTA**2 / den
            want_in = 1j * om * c * layer_in[0, j] * DELTA**2 / den
            got_out = asym.us_asymptotic(nonres_model, om, DELTA, [j], x_out)[0]
            got_in = asym.u_interior_asymptotic(nonres_model, om, DELTA, [j], x_in)[0]
            assert got_out == pytest.approx(want_out, rel=1e-12)
            assert got_in == pytest.approx(want_in, rel=1e-12)

    def test_zero_contrast_gives_zero_fields(self, rod_spectrum):
        params = spectral.tau_values(rod_spectrum, 1.0 + 0.0j, 1.0)
        model = asym.build_quasistatic_model(rod_spectrum, params, DIRECTION)
        out = asym.us_asymptotic(model, 0.02, DELTA, [1, 2], [[0.0, 2.0, 3.0]])
        inner = asym.u_interior_asymptotic(model, 0.02, DELTA, [1, 2], [[0.0, 0.0, 1.5]])
        assert np.all(out == 0) and np.all(inner == 0)

    def test_amplitude_scales_as_delta_squared(self, nonres_model):
        x = np.array([[0.0, 3.0, 3.0]])
        deltas = (0.2, 0.1, 0.05)
        vals = [
            abs(asym.us_asymptotic(nonres_model, 0.02, d, [1, 2, 3], x)[0])
            for d in deltas
        ]
        slope = np.polyfit(np.log(deltas), np.log(vals), 1)[0]
        assert abs(slope - 2.0) < 0.05

    def test_side_rejections(self, nonres_model):
        with pytest.raises(ValueError, match="inside"):
            asym.us_asymptotic(nonres_model, 0.02, DELTA, [1], [[0.0, 0.0, 0.0]])
        with pytest.raises(ValueError, match="outside"):
            asym.u_interior_asymptotic(nonres_model, 0.02, DELTA, [1], [[0.0, 3.0, 3.0]])
        with pytest.raises(ValueError, match="positive"):
            asym.us_asymptotic(nonres_model, 0.02, -0.1, [1], [[0.0, 3.0, 3.0]])


# ---------------------------------------------------------------------------
# grid evaluation and exports


class TestEvalAsymptoticField:
    def test_grid_matches_pointwise_expansions(self, rod_spectrum):
        # eps_m != 1 so the interior and exterior prefactors differ
        params = spectral.tau_values(rod_spectrum, EPS_NONRES, 2.0)
        model = asym.build_quasistatic_model(rod_spectrum, params, DIRECTION)
        om, amp = 0.02, 2.5
        k_m = om * np.sqrt(2.0)
        mat = wavenumbers(om, EPS_NONRES, eps_m=2.0)
        wave = sol.plane_wave(DIRECTION, mat, amplitude=amp)
        pts = np.array([[0.0, 2.0, 3.0], [0.0, 0.0, 1.5]])
        grid = asym.eval_asymptotic_field(model, wave, om, DELTA, [1, 3], pts)
        out = asym.us_asymptotic(model, om, DELTA, [1, 3], pts[:1])
        inner = asym.u_interior_asymptotic(model, om, DELTA, [1, 3], pts[1:])
        assert grid.us[0] == pytest.approx(amp * out[0], rel=1e-12)
        assert grid.us[1] == pytest.approx(amp * inner[0], rel=1e-12)
        assert np.allclose(grid.u, wave.field(pts) + grid.us)
        assert grid.labels[0] == geo.OUTSIDE and grid.labels[1] == geo.INSIDE
        assert np.all(grid.theta >= 0)
        assert abs(wave.k_m - k_m) < 1e-15

    def test_wave_mismatch_rejected(self, nonres_model):
        mat_wrong = wavenumbers(0.03, EPS_NONRES)
        wave = sol.plane_wave(DIRECTION, mat_wrong, amplitude=1.0)
        with pytest.raises(ValueError, match="k_m"):
            asym.eval_asymptotic_field(
                nonres_model, wave, 0.02, DELTA, [1], [[0.0, 2.0, 3.0]]
            )
        mat = wavenumbers(0.02, EPS_NONRES)
        sideways = sol.plane_wave([1.0, 0.0, 0.0], mat, amplitude=1.0)
        with pytest.raises(ValueError, match="direction"):
            asym.eval_asymptotic_field(
                nonres_model, sideways, 0.02, DELTA, [1], [[0.0, 2.0, 3.0]]
            )

    def test_field_csv_schema_and_determinism(self, nonres_model, tmp_path):
        mat = wavenumbers(0.02, EPS_NONRES)
        wave = sol.plane_wave(DIRECTION, mat, amplitude=1.0)
        pts = np.array([[0.0, 2.0, 3.0], [0.0, 0.0, 1.5], [3.0, 0.0, 0.0]])
        grid = asym.eval_asymptotic_field(nonres_model, wave, 0.02, DELTA, [1], pts)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        asym.write_field_csv(grid, p1)
        asym.write_field_csv(grid, p2)
        b1 = p1.read_bytes()
        assert b1 == p2.read_bytes()
        assert b"\r" not in b1
        lines = b1.decode().splitlines()
        assert lines[0] == "x,y,z,re_u,im_u,re_us,im_us,theta,mask,source"
        assert len(lines) == 1 + pts.shape[0]
        row = lines[1].split(",")
        assert row[-1] == "asymptotic"
        assert float(row[3]) == grid.u[0].real
        assert int(row[8]) == int(grid.labels[0])

    def test_scaling_csv_roundtrip(self, tmp_path):
        rows = [
            asym.ScalingRow(omega=0.04, rho=-0.0016, delta=0.25, e_full=23.1, e_pred=25.0),
            asym.ScalingRow(omega=0.02, rho=-0.0004, delta=0.25, e_full=46.5, e_pred=50.0),
        ]
        path = tmp_path / "scaling.csv"
        asym.write_scaling_csv(rows, path)
        lines = path.read_bytes().decode().splitlines()
        assert lines[0] == "omega,rho,delta,E_full,E_pred"
        got = [float(v) for v in lines[1].split(",")]
        assert got == [0.04, -0.0016, 0.25, 23.1, 25.0]


# ---------------------------------------------------------------------------
# straight-rod amplitude profile


class TestPStraight:
    P0 = np.array([0.0, 0.0, -2.0])
    Q0 = np.array([0.0, 0.0, 2.0])

    def test_extrema_exact(self):
        tip = np.array([0.0, 0.0, 2.25])
        mid = np.array([0.25, 0.0, 0.0])
        assert asym.p_straight(tip, 4.0, DELTA, self.P0, self.Q0) == pytest.approx(
            4.5, abs=1e-12
        )
        assert asym.p_straight(mid, 4.0, DELTA, self.P0, self.Q0) == pytest.approx(
            np.sqrt(16.25), abs=1e-12
        )

    def test_branches_agree_at_the_seam(self):
        # facade formula at the cap ring equals the cap-branch value
        seam = np.array([0.25, 0.0, 2.0])
        got = asym.p_straight(seam, 4.0, DELTA, self.P0, self.Q0)
        facade = np.hypot(0.0, DELTA) + np.hypot(4.0, DELTA)
        assert got == pytest.approx(facade, abs=1e-12)

    def test_batch_shape_and_scalar_type(self):
        pts = np.array([[0.25, 0.0, 0.0], [0.0, 0.0, 2.25]])
        vals = asym.p_straight(pts, 4.0, DELTA, self.P0, self.Q0)
        assert vals.shape == (2,)
        single = asym.p_straight(pts[0], 4.0, DELTA, self.P0, self.Q0)
        assert isinstance(single, float)

    def test_off_surface_rejected(self):
        with pytest.raises(ValueError, match="not on the rod surface"):
            asym.p_straight([1.0, 1.0, 0.0], 4.0, DELTA, self.P0, self.Q0)

    def test_inconsistent_length_rejected(self):
        with pytest.raises(ValueError, match="apart"):
            asym.p_straight([0.25, 0.0, 0.0], 3.5, DELTA, self.P0, self.Q0)


# ---------------------------------------------------------------------------
# blowup scaling


class TestBlowupScaling:
    def test_dominant_term_ladder(self):
        # rho = -omega^2: the prediction grows like 1/omega
        a = asym.blowup_scaling_prediction(0.04, -0.04**2, DELTA)
        b = asym.blowup_scaling_prediction(0.02, -0.02**2, DELTA)
        assert a.dominant == pytest.approx(1 / 0.04)
        assert b.dominant == pytest.approx(2 * a.dominant)
        # rho = -omega: constant boundary case
        c = asym.blowup_scaling_prediction(0.04, -0.04, DELTA)
        d = asym.blowup_scaling_prediction(0.02, -0.02, DELTA)
        assert c.dominant == d.dominant == pytest.approx(1.0)

    def test_regime_flag(self):
        om = 0.05
        out = asym.blowup_scaling_prediction(om, -om**3, om)
        assert out.regime_ratio == pytest.approx(1.0)
        assert not out.in_regime
        good = asym.blowup_scaling_prediction(0.02, -0.04, DELTA)
        assert good.in_regime

    def test_input_validation(self):
        with pytest.raises(ValueError, match="rho"):
            asym.blowup_scaling_prediction(0.02, 0.0, DELTA)
        with pytest.raises(ValueError, match="radius"):
            asym.blowup_scaling_prediction(0.02, -0.01, 0.0)
        with pytest.raises(ValueError, match="c1"):
            asym.blowup_scaling_prediction(0.02, -0.01, DELTA, c1=0.0)
        with pytest.raises(ValueError, match="omega"):
            asym.blowup_scaling_prediction(0.0, -0.01, DELTA)

    def test_scattered_energy_follows_predicted_growth(self, rod_mesh_small):
        # mode 5 pinned on resonance with loss shrinking as omega^2: the
        # scattered energy must grow as omega drops; the prediction says 1/omega
        lam5 = spectral.raw_adjoint_lambdas(rod_mesh_small, 6)[5]
        eos, preds = [], []
        for om in OMEGAS:
            eps_b = spectral.resonant_permittivity_from_lambda(lam5, 1.0, -om * om)
            mat = wavenumbers(om, eps_b)
            wave = sol.plane_wave(DIRECTION, mat, amplitude=1.0)
            full = sol.solve_transmission(rod_mesh_small, mat, wave)
            rep = sol.energies(
                full, mat, wave, box=([-2.5, -2.5, -4.5], [2.5, 2.5, 4.5]), h=0.25
            )
            eos.append(rep.E_o)
            preds.append(asym.blowup_scaling_prediction(om, -om * om, DELTA).dominant)
        assert eos[0] < eos[1] < eos[2]
        slope = np.polyfit(np.log(OMEGAS), np.log(eos), 1)[0]
        assert slope <= -0.5  # measured -1.005, matching the 1/omega prediction
        # frozen regression values from the oracle run
        for got, want in zip(eos, (23.139, 46.483, 93.236)):
            assert abs(got - want) / want < 0.02
        assert preds[0] < preds[1] < preds[2]
