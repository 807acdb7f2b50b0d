"""Kernel values, gradients against finite differences, series resummation."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rodbem import kernels as ker

FOUR_PI = 4.0 * np.pi


def finite_points(draw_scale=2.0):
    coord = st.floats(-draw_scale, draw_scale, allow_nan=False, allow_infinity=False)
    return st.tuples(coord, coord, coord)


class TestWavenumbers:
    def test_background_real(self):
        wn = ker.wavenumbers(0.5, eps_c=-1 + 0.1j)
        assert wn.k_m == pytest.approx(0.5)
        assert wn.k_m.imag == 0.0

    def test_lossy_inclusion_decays(self):
        wn = ker.wavenumbers(0.5, eps_c=-1 + 0.1j)
        assert wn.k_c.imag > 0.0
        assert wn.k_c**2 == pytest.approx(0.25 * (-1 + 0.1j))

    def test_nonnegative_imaginary_branch(self):
        for eps in (-1 + 1e-8j, -2 + 0.5j, 3 + 0j, 1 - 0.2j):
            wn = ker.wavenumbers(1.0, eps_c=eps)
            assert wn.k_c.imag >= 0.0
            assert wn.k_c**2 == pytest.approx(eps, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            ker.wavenumbers(-1.0, eps_c=-1 + 0.1j)
        with pytest.raises(ValueError):
            ker.wavenumbers(1.0, eps_c=0.0)
        with pytest.raises(ValueError):
            ker.wavenumbers(1.0, eps_c=-1 + 0.1j, mu_m=np.inf)


class TestGreen:
    def test_static_unit_distance(self):
        # G_0 at r = 1 is -1/(4 pi): fixes the global sign convention
        assert ker.green(0.0, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]) == pytest.approx(
            -1.0 / FOUR_PI
        )

    def test_helmholtz_phase(self):
        val = ker.green_r(2.0, 1.0)
        assert val == pytest.approx(-np.exp(2j) / FOUR_PI)

    @settings(max_examples=50, deadline=None)
    @given(x=finite_points(), y=finite_points(), k=st.floats(0.0, 3.0))
    def test_symmetry(self, x, y, k):
        x, y = np.array(x), np.array(y)
        if np.linalg.norm(x - y) < 1e-6:
            return
        assert ker.green(k, x, y) == pytest.approx(ker.green(k, y, x), rel=1e-12)

    @pytest.mark.parametrize("k", [0.0, 0.5, 1.0 + 0.3j])
    def test_gradient_against_central_differences(self, k, rng):
        h = 1e-6
        for _ in range(20):
            x = rng.uniform(-2, 2, 3)
            y = rng.uniform(-2, 2, 3)
            if np.linalg.norm(x - y) < 0.1:
                y = x + (y - x) * 0.1 / max(np.linalg.norm(x - y), 1e-9)
            grad = ker.grad_green_target(k, x, y)
            fd = np.empty(3, dtype=complex)
            for axis in range(3):
                e = np.zeros(3)
                e[axis] = h
                fd[axis] = (ker.green(k, x + e, y) - ker.green(k, x - e, y)) / (2 * h)
            np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-10)

    def test_gradient_radial_alignment(self, rng):
        x = rng.uniform(-2, 2, 3)
        y = rng.uniform(-2, 2, 3)
        grad = ker.grad_green_target(0.7, x, y)
        direction = (x - y) / np.linalg.norm(x - y)
        cross = np.cross(grad, direction)
        assert np.abs(cross).max() < 1e-14 * max(1.0, np.abs(grad).max())


class TestSeries:
    def test_first_terms_closed_form(self):
        r = np.array([0.3, 1.0, 2.5])
        np.testing.assert_allclose(ker.series_s_r(0, r), -1.0 / (FOUR_PI * r))
        np.testing.assert_allclose(
            ker.series_s_r(1, r), np.full(3, -1j / FOUR_PI)
        )
        np.testing.assert_allclose(ker.series_s_r(2, r), r / (2 * FOUR_PI))

    def test_k_series_order_one_vanishes(self, rng):
        r = rng.uniform(0.1, 2.0, 10)
        dots = rng.uniform(-1.0, 1.0, 10)
        assert np.all(ker.series_k_r(1, r, dots) == 0.0)

    def test_k_series_static_term(self):
        # j = 0: (x - y, nu) / (4 pi r^3), the static adjoint double-layer kernel
        x = np.array([1.0, 0.0, 0.0])
        y = np.array([0.0, 0.0, 0.0])
        nu = np.array([1.0, 0.0, 0.0])
        val = ker.series_k_term(0, x, y, nu)
        assert val == pytest.approx(1.0 / FOUR_PI)

    @settings(max_examples=30, deadline=None)
    @given(
        k=st.floats(0.01, 1.0),
        r=st.floats(0.05, 1.0),
    )
    def test_single_layer_resummation(self, k, r):
        # kr <= 1: 20 terms reconstruct the kernel to ~1e-10 absolute
        total = sum(k**j * ker.series_s_r(j, np.array([r]))[0] for j in range(21))
        exact = ker.green_r(k, r)
        assert abs(total - exact) < 1e-10

    @settings(max_examples=30, deadline=None)
    @given(k=st.floats(0.01, 1.0), r=st.floats(0.05, 1.0))
    def test_normal_derivative_resummation(self, k, r):
        x = np.array([r, 0.0, 0.0])
        y = np.zeros(3)
        nu = np.array([0.6, 0.8, 0.0])
        total = sum(k**j * ker.series_k_term(j, x, y, nu) for j in range(21))
        exact = ker.normal_derivative_target(k, x, y, nu)
        assert abs(total - exact) < 1e-8

    def test_high_order_terms_uniformly_small(self):
        r = np.linspace(0.01, 2.0, 50)
        prev = np.abs(ker.series_s_r(5, r)).max()
        for j in range(6, 12):
            cur = np.abs(ker.series_s_r(j, r)).max()
            assert cur < prev
            prev = cur

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            ker.series_s_r(-1, np.array([1.0]))
        with pytest.raises(ValueError):
            ker.series_k_r(-2, np.array([1.0]), np.array([0.0]))
