"""Numerical experiments on a 3D axisymmetric inviscid model with stretching.

Submodules:

* :mod:`axiblow.grid`: domains, tensor grids, r^3-weighted quadrature, finite differences
* :mod:`axiblow.specfun`: the Bessel-type function ``K``, radial eigenpairs, Robin resonance sets
* :mod:`axiblow.elliptic`: stream-function solvers for the four boundary regimes
* :mod:`axiblow.dynamics`: RK4 time stepping of the model and of the decay system
* :mod:`axiblow.diagnostics`: weighted functionals, admissibility, Riccati residuals, bounds
* :mod:`axiblow.oracle`: the comparison ODE and its closed-form equality solution
* :mod:`axiblow.cli`: scenario configs, runs, CSV/JSON output
"""

__version__ = "0.1.0"
