"""Hidden-variable models of the spin singlet.

A zoo of local and nonlocal hidden-variable constructions that all
reproduce the singlet statistics P(sigma, tau | a, b) = (1 - sigma*tau
a.b)/4, tools to verify that they do, an auditor that classifies each
model by which classical plausibility hypotheses it violates, and an
admissibility checker for the correlator decomposition D = -a.b + C
with C = (1+a.b)^s+ (1-a.b)^s- G.
"""

from .geometry import (
    coplanar,
    fibonacci_sphere,
    geodesic_from,
    perp,
    sample_unit_sphere,
    sgn,
    unit,
)
from .quantum import (
    CHSH_QUANTUM_BOUND,
    OUTCOMES,
    JointTable,
    chsh,
    chsh_optimal_settings,
    qm_correlator,
    qm_joint,
)
from .models import (
    SATISFIED,
    UNDETERMINED,
    VIOLATED,
    AtomSet,
    Estimate,
    EstimatedTable,
    HiddenBatch,
    Model,
    estimate_joint,
    exact_average,
)
from .zoo import MODEL_NAMES, ZOO_NAMES, make_model, parse_model_name
from .audit import HypothesisProfile, full_audit
from .admissibility import (
    admissible,
    check_pac_zero,
    correlator_D,
    estimate_frobenius_indices,
    extract_C,
    extract_C_mean,
    frobenius_for_model,
    pac_zero_for_model,
)
from .expr import eval_expr, parse, to_source

__version__ = "0.1.0"

__all__ = [
    "coplanar", "fibonacci_sphere", "geodesic_from", "perp",
    "sample_unit_sphere", "sgn", "unit",
    "CHSH_QUANTUM_BOUND", "OUTCOMES", "JointTable", "chsh",
    "chsh_optimal_settings", "qm_correlator", "qm_joint",
    "SATISFIED", "UNDETERMINED", "VIOLATED", "AtomSet", "Estimate",
    "EstimatedTable", "HiddenBatch", "Model", "estimate_joint",
    "exact_average",
    "MODEL_NAMES", "ZOO_NAMES", "make_model", "parse_model_name",
    "HypothesisProfile", "full_audit",
    "admissible", "check_pac_zero", "correlator_D",
    "estimate_frobenius_indices", "extract_C", "extract_C_mean",
    "frobenius_for_model", "pac_zero_for_model",
    "eval_expr", "parse", "to_source",
    "__version__",
]
