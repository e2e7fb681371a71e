"""Discrete energy forms and the functional inequalities built on them."""

from .forms import (
    ComparabilityResult,
    DiscreteForm,
    assemble,
    bilinear,
    comparability_ratio,
    energy_axes,
    energy_general,
    random_test_functions,
    restrict,
)
from .functional import (
    ChainResult,
    LogInequalityResult,
    PoincareResult,
    RatioResult,
    ResidualResult,
    chain_lemma_check,
    lambda_term,
    log_inequality_check,
    poincare_constant,
    sobolev_check,
    weak_residual,
    weighted_poincare_check,
)
from .grid import GridFunction, WeightFunction, cell_centers, psi_weighted_poincare
