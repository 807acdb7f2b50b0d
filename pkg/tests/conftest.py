"""Shared fixtures: meshes and spectra are expensive, so they are built once
per session at a small "desk" resolution unless a test needs more."""

from __future__ import annotations

import numpy as np
import pytest

from rodbem import geometry as geo


@pytest.fixture(scope="session")
def straight_curve():
    return geo.build_centerline("straight", length=4.0)


@pytest.fixture(scope="session")
def bent_curve():
    return geo.build_centerline("bent")


@pytest.fixture(scope="session")
def rod_mesh_small(straight_curve):
    spec = geo.RodSpec(curve=straight_curve, delta=0.25, n_axial=24, n_circum=12, cap_refine=4)
    return geo.build_rod_mesh(spec)


@pytest.fixture(scope="session")
def bent_mesh_small(bent_curve):
    spec = geo.RodSpec(curve=bent_curve, delta=0.25, n_axial=24, n_circum=12, cap_refine=4)
    return geo.build_rod_mesh(spec)


@pytest.fixture(scope="session")
def sphere_small():
    # 512 panels, cheap enough for operator assembly in every test
    return geo.build_sphere_mesh(refine=3, base="octa")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260814)
