"""Probabilistic frames as finitely supported measures.

Analysis of finitely supported probability measures through their frame
operators: optimal bounds, redundancy, canonical and approximate duals,
Wasserstein-2 couplings between them, and perturbation certificates.
"""

from .errors import ProbFramesError
from .measures import DiscreteMeasure, dirac, mixture, uniform, validate
from .frames import FrameReport, analyze, canonical_dual, frame_operator
from .redundancy import (
    equivalence_redundancy_check,
    redundancy_rank,
    redundancy_trace,
    synthesis_matrix,
)
from .transport import (
    Coupling,
    TransportResult,
    glue,
    graph_coupling,
    mixed_frame_operator,
    optimize_mixed_operator,
    product_coupling,
    solve_w2,
    transport_cost,
    w2_bruteforce,
)
from .duals import (
    DualCertificate,
    approx_dual_pushforward,
    bound_inequalities,
    certify,
    convex_combination_certificate,
    neumann_approx_dual,
    pushforward_dual,
    rescue_exact_dual,
    uncertainty_product,
)
from .perturbation import (
    PerturbationReport,
    discrete_dual_pipeline,
    greedy_subsample,
    matched_mixed_dual,
    perturbed_approx_dual,
    perturbed_frame_bound,
    variant_certificates,
)

__version__ = "0.1.0"

__all__ = [
    "Coupling",
    "DiscreteMeasure",
    "DualCertificate",
    "FrameReport",
    "PerturbationReport",
    "ProbFramesError",
    "TransportResult",
    "analyze",
    "approx_dual_pushforward",
    "bound_inequalities",
    "canonical_dual",
    "certify",
    "convex_combination_certificate",
    "dirac",
    "discrete_dual_pipeline",
    "equivalence_redundancy_check",
    "frame_operator",
    "glue",
    "graph_coupling",
    "greedy_subsample",
    "matched_mixed_dual",
    "mixed_frame_operator",
    "mixture",
    "neumann_approx_dual",
    "optimize_mixed_operator",
    "perturbed_approx_dual",
    "perturbed_frame_bound",
    "product_coupling",
    "pushforward_dual",
    "redundancy_rank",
    "redundancy_trace",
    "rescue_exact_dual",
    "solve_w2",
    "synthesis_matrix",
    "transport_cost",
    "uniform",
    "uncertainty_product",
    "validate",
    "variant_certificates",
    "w2_bruteforce",
]
