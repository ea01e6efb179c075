"""H2-optimal output-feedback synthesis under communication-delay constraints.

The package computes the strictly proper controller minimizing the
closed-loop H2 norm of a discrete-time plant when the controller subsystems
exchange measurements over a delayed, strongly connected network.  The
constrained problem reduces to a centralized LQG design plus one
finite-horizon LQR solve over the first few impulse-response coefficients
of the free parameter.
"""

from .delaymodel import (
    ConstraintSpace,
    DelayGraph,
    DelayMatrix,
    QiCheck,
    check_qi,
    constraint_space,
    delay_matrix,
    expand_pattern,
    plant_block_delays,
)
from .errors import (
    AssumptionViolated,
    BezoutCheckFailed,
    ConfigError,
    DelayH2Error,
    DimensionMismatch,
    IllPosed,
    NotStronglyConnected,
    QIViolation,
    SolverFailure,
    UnstableSystem,
)
from .statespace import (
    ImpulseResponse,
    StateSpaceModel,
    conjugate_product,
    dare_solve,
    dlyap_cross,
    h2_norm_sq,
    impulse_response,
    spectral_radius,
)
from .synthesis import (
    CoprimeFactors,
    FirMatrix,
    GeneralizedPlant,
    RiccatiGains,
    SynthesisResult,
    VectorizedSystem,
    basis_matrices,
    coprime_factorization,
    model_matching_matrices,
    realize_controller,
    riccati_gains,
    solve_constrained_qp,
    synthesize,
    vectorized_system,
)
from .verify import ClosedLoop, ConformanceReport, closed_loop, conformance, kkt_oracle

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolated",
    "BezoutCheckFailed",
    "ClosedLoop",
    "ConfigError",
    "ConformanceReport",
    "ConstraintSpace",
    "CoprimeFactors",
    "DelayGraph",
    "DelayH2Error",
    "DelayMatrix",
    "DimensionMismatch",
    "FirMatrix",
    "GeneralizedPlant",
    "IllPosed",
    "ImpulseResponse",
    "NotStronglyConnected",
    "QIViolation",
    "QiCheck",
    "RiccatiGains",
    "SolverFailure",
    "StateSpaceModel",
    "SynthesisResult",
    "UnstableSystem",
    "VectorizedSystem",
    "basis_matrices",
    "check_qi",
    "closed_loop",
    "conformance",
    "conjugate_product",
    "constraint_space",
    "coprime_factorization",
    "dare_solve",
    "delay_matrix",
    "dlyap_cross",
    "expand_pattern",
    "h2_norm_sq",
    "impulse_response",
    "kkt_oracle",
    "model_matching_matrices",
    "plant_block_delays",
    "realize_controller",
    "riccati_gains",
    "solve_constrained_qp",
    "spectral_radius",
    "synthesize",
    "vectorized_system",
]
