"""Exact and numeric invariants of test configurations.

Exact layer: weighted Groebner degenerations, graded weight spectra, the
Donaldson-Futaki invariant, Chow weights, and Donaldson's N_2 norm, all in
rational arithmetic.  Numeric layer: seeded Monte Carlo Fubini-Study
geometry, Bergman geodesic rays, their upper envelopes, and energy-slope
diagnostics.  The `kstab` console script drives both from JSON
configuration files; see the bundled files under kstab/configs/.
"""

from .asymptotics import (
    AsymptoticReport,
    ChowReport,
    ChowSweep,
    chow_sweep,
    chow_weight_algebraic,
    fit_asymptotics,
    futaki_f,
    operator_norm_check,
)
from .geometry import (
    Chart,
    GSResult,
    MCResult,
    bergman_density,
    energy_derivative,
    energy_derivative_at_t,
    equivariant_gram_schmidt,
    fs_mass,
    fs_volume_density,
    gram_matrix,
    mc_integrate,
    moment_matrix,
    n2_integral,
)
from .groebner import buchberger, initial_ideal, is_groebner_basis, normal_form
from .polynomials import Polynomial, TermOrder, parse_polynomial
from .rays import (
    ChowNumericReport,
    ComparisonReport,
    EnergyReport,
    PointGrid,
    RayGrid,
    SectionFrame,
    build_ray_grid,
    chow_weight_numeric,
    convexity_report,
    envelope,
    geometric_t_grid,
    grid_points,
    ma_mass,
    ray_comparison,
    ray_potential,
    section_frame,
    slope_report,
    sup_osc_report,
)
from .spectra import GradedSlice, TestConfiguration, graded_slice, spectrum_table

__all__ = [
    "AsymptoticReport",
    "Chart",
    "ChowNumericReport",
    "ChowReport",
    "ChowSweep",
    "ComparisonReport",
    "EnergyReport",
    "GSResult",
    "GradedSlice",
    "MCResult",
    "PointGrid",
    "Polynomial",
    "RayGrid",
    "SectionFrame",
    "TermOrder",
    "TestConfiguration",
    "bergman_density",
    "buchberger",
    "build_ray_grid",
    "chow_sweep",
    "chow_weight_algebraic",
    "chow_weight_numeric",
    "convexity_report",
    "energy_derivative",
    "energy_derivative_at_t",
    "envelope",
    "equivariant_gram_schmidt",
    "fit_asymptotics",
    "fs_mass",
    "fs_volume_density",
    "futaki_f",
    "geometric_t_grid",
    "gram_matrix",
    "graded_slice",
    "grid_points",
    "initial_ideal",
    "is_groebner_basis",
    "ma_mass",
    "mc_integrate",
    "moment_matrix",
    "n2_integral",
    "normal_form",
    "operator_norm_check",
    "parse_polynomial",
    "ray_comparison",
    "ray_potential",
    "section_frame",
    "slope_report",
    "spectrum_table",
    "sup_osc_report",
]

__version__ = "0.1.0"
