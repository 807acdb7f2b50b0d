"""Boundary-integral toolkit for plasmon resonances of thin curved nanorods.

Pipeline: mesh a rod surface (``geometry``), assemble layer-potential
operators (``kernels``, ``operators``), extract the symmetrized
Neumann-Poincare spectrum (``spectral``), solve the Helmholtz transmission
problem (``solver``), and compare against closed-form thin-rod asymptotics
(``asymptotics``).  ``harness``/``cli`` run scenario files end to end.
"""

__version__ = "0.1.0"

from . import asymptotics, geometry, harness, kernels, operators, solver, spectral

__all__ = [
    "__version__",
    "asymptotics",
    "geometry",
    "harness",
    "kernels",
    "operators",
    "solver",
    "spectral",
]
