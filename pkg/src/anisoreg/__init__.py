"""Numerical companion for regularity of anisotropic nonlocal parabolic equations."""

__version__ = "0.1.0"

from .geometry import (
    AnisoBox,
    Cylinder,
    ExponentVector,
    ScalingMap,
    Slab,
    aniso_box,
    aniso_metric,
    rho_hat,
    scaling_forward,
    scaling_inverse,
    slab,
    standard_cylinders,
)
from .kernels import (
    Axes,
    CoefficientField,
    Cusp,
    CuspParams,
    DoubleExponent,
    JumpMeasure,
    ProductStable,
    cusp_kernel,
    cusp_params,
    in_gamma,
    make_measure,
    mass_outside_box,
    moment_condition,
    mu_axes_tail_exact,
    mu_eval_density,
    tail_mass,
)
from .spectral import SpectralField, apply_operator, evolve, evolve_forced, positivity_floor, sample_to_grid
from .cutoff import CutoffFunction, build_cutoff, cutoff_energy_bound, cutoff_energy_density, cutoff_weighted_l2_bound
from .stochastic import (
    EnsembleEstimate,
    PathEnsemble,
    StableSampler,
    estimate_solution,
    harnack_ratio,
    holder_quotient,
    oscillation_decay,
    sample_increment,
    spectral_accessor,
)
from .inequalities import (
    BGParams,
    MoserScheduleNeg,
    MoserSchedulePos,
    bombieri_giusti_check,
    check_guelle1,
    check_guelle2,
    guelle_sweep,
    holder_gamma,
    moser_exponent_sums,
    moser_product_bound,
    theta,
    zeta,
)
