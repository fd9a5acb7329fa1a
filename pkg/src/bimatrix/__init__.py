"""Analysis and design of complex-valued linear systems with conjugate coupling.

The library models systems whose update law couples the state with its
conjugate, ``x+ = A1 x + conj(A2) conj(x) + B1 u + conj(B2) conj(u)``, through
an algebra of matrix pairs.  It covers response computation, structural tests,
stability, Lyapunov and Riccati equations in pair form, eigenvalue assignment,
quadratic-optimal feedback, and observer synthesis, together with the
decoupled special cases of purely conjugate-driven (antilinear) systems.
"""

from .core import (
    Bimatrix,
    HermiteBimatrix,
    SpectrumSet,
    arrow,
    breve,
    unarrow,
    block_bimatrix,
    conjugate_complete,
    e_matrix,
    h_matrix,
    hermite_from_real_representation,
    is_positive_definite,
    quadratic_form_real,
)
from .systems import (
    CxSystem,
    RealSystem,
    TimeDomain,
    from_real_system,
    make_antilinear,
    make_normal,
    real_conversion_residual,
    system_from_json,
    system_to_json,
    transfer_function_eval,
)
from .analysis import (
    RankTest,
    SimTrace,
    StructureReport,
    TransitionPair,
    antilinear_controllable,
    antilinear_lyapunov_reduced,
    antilinear_observable,
    antilinear_stabilizable_discrete,
    is_asymptotically_stable,
    is_controllable,
    is_detectable,
    is_observable,
    is_stabilizable,
    solve_lyapunov,
    state_response,
    structure_report,
    transition_pair,
)
from .design import (
    LqrSolution,
    WeightPair,
    antilinear_lqr_continuous,
    antilinear_lqr_discrete,
    assign_eigenvalues,
    assign_eigenvalues_normal,
    closed_loop,
    design_observer,
    lqr,
    lqr_cost,
    observer_loop,
    stabilize,
)
from . import exceptions

__version__ = "0.1.0"

__all__ = [
    "Bimatrix",
    "HermiteBimatrix",
    "SpectrumSet",
    "arrow",
    "breve",
    "unarrow",
    "block_bimatrix",
    "conjugate_complete",
    "e_matrix",
    "h_matrix",
    "hermite_from_real_representation",
    "is_positive_definite",
    "quadratic_form_real",
    "CxSystem",
    "RealSystem",
    "TimeDomain",
    "from_real_system",
    "make_antilinear",
    "make_normal",
    "real_conversion_residual",
    "system_from_json",
    "system_to_json",
    "transfer_function_eval",
    "RankTest",
    "SimTrace",
    "StructureReport",
    "TransitionPair",
    "antilinear_controllable",
    "antilinear_lyapunov_reduced",
    "antilinear_observable",
    "antilinear_stabilizable_discrete",
    "is_asymptotically_stable",
    "is_controllable",
    "is_detectable",
    "is_observable",
    "is_stabilizable",
    "solve_lyapunov",
    "state_response",
    "structure_report",
    "transition_pair",
    "LqrSolution",
    "WeightPair",
    "antilinear_lqr_continuous",
    "antilinear_lqr_discrete",
    "assign_eigenvalues",
    "assign_eigenvalues_normal",
    "closed_loop",
    "design_observer",
    "lqr",
    "lqr_cost",
    "observer_loop",
    "stabilize",
    "exceptions",
    "__version__",
]
