"""Numerical laboratory for subadditive vector-valued sequences."""

from .spaces import (
    ConvexityEstimate,
    FiniteVector,
    SpaceSpec,
    TailVector,
    gamma_from_delta,
    hilbert_modulus_closed_form,
    modulus_of_convexity,
    modulus_profile,
    norm,
)
from .sequences import SequenceFamily, parse_family
from .verify import (
    ConstraintBand,
    SubadditivityReport,
    check_lemma_bound,
    check_scalar_band_subadditivity,
    check_subadditivity,
    criterion_check,
    subset_uniform_convexity_probe,
)
from .analysis import (
    inductive_bound_trace,
    limit_diagnostics,
    proposition_gap_scan,
    sign_stabilization_check,
    spectral_radius_demo,
)

__version__ = "0.1.0"
