"""Edge asymptotics of spectral densities for Jacobi matrices.

The package computes spectral densities of half-line Jacobi matrices with
eventually monotone, power-law decaying perturbations near the edge
``x = 2``, and compares them with closed-form asymptotic expansions.
"""

from ._backend import BACKEND
from .asymptotics import (
    ExpansionSeries,
    beta_integral,
    log_gamma,
    mass_point_check,
    opuc_transform,
    predict_series,
    series_coeffs,
    thm3_leading,
    thm4_series,
    thm5_leading,
    thm6_series,
    verify_expansion,
)
from .coefficients import (
    CoefficientModel,
    PowerLawTerm,
    VerblunskyModel,
    chebyshev_model,
    free_model,
    load_model,
    power_law_model,
    szego_sieve_map,
    tail_class,
)
from .density import DensityControls, density, density_curve
from .edge import edge_data, turning_point
from .recurrence import dirichlet, dirichlet_subordinacy_check, subordinate_at_edge

__version__ = "0.1.0"
