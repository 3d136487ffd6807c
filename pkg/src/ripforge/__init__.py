"""Restricted isometry certification, random designs and planted-subgraph reductions."""

from ripforge.certifiers import (
    CertifierOutcome,
    RegimeError,
    certify_incoherence_paper,
    certify_incoherence_sound,
    certify_opnorm_exact,
    get_certifier,
)
from ripforge.distributions import (
    SubGaussianDist,
    HalfDist,
    get_distribution,
    matrix_sample,
    rip_probability_lower_bound,
)
from ripforge.graphs import DenseSeed, Graph, PlantedInstance, er_generate, plant
from ripforge.reduction import ReductionConfig, derive_dims, reduce, hard_sequence
from ripforge.ripcore import (
    EnumerationError,
    RipParams,
    gram_deviation,
    is_rip,
    max_incoherence,
    rip_margin_exact,
    rip_margin_sampled,
    symmetric_eigen_range,
)

__version__ = "0.1.0"
