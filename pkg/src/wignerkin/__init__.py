"""Wigner-function dynamics of a free particle.

Closed-form coherent and even-cat Wigner functions, phase-space grids,
free-flight evolution with the absolute-deviation curvature test for
negative conditional kinetic energy, and a simulated homodyne witness of
Wigner negativity.
"""
from .kernels import BACKEND
from .states import (CatStateParams, CatWigner, CoherentStateParams, CoherentWigner,
                     Convention, PhasePoint, cat_norm_integral, eval_cat_wigner,
                     eval_coherent_wigner)
from .phase_space import (GridSpec, Marginal, WignerGrid, integrate_2d, marginal_along_p,
                          marginal_along_x, rasterize, rotated_marginal)
from .dynamics import (EvolutionSpec, absdev_curve, classicality_check,
                       conditional_kinetic_energy, evolve_free, moment_profile,
                       negativity_window, pi2_origin_analytic)
from .homodyne import (QuadratureAngle, Verdict, curvature_witness, estimate_abs_chi,
                       sample_quadrature)

__version__ = "0.1.0"
