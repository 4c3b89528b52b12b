"""Detection-loophole-free Bell inequalities and device-independent
detector-efficiency bounds for two-party, two-outcome scenarios."""

from .efficiency import (
    Certification,
    CurvePoint,
    EfficiencyBound,
    ModelClass,
    Oracle,
    bound_via_bisection,
    certify_from_observation,
    check_bracket,
    eta_crit_one_sided,
    eta_crit_symmetric,
    unknown_vs_known_curve,
)
from .errors import (
    CapExceeded,
    DetboundError,
    DimensionMismatch,
    InvalidBaseRate,
    InvalidBehavior,
    NeverViolated,
    NoThreshold,
    NotViolated,
    SizeExceeded,
    SolverFailure,
    Unbounded,
)
from .npa import (
    build_moment_structure,
    nonsignalling_feasible,
    nonsignalling_max_value,
    npa_certificate,
    npa_feasible,
    npa_max_value,
    npa_optimize,
)
from .scenario import (
    BehaviorVector,
    BellInequality,
    ClassicalityCertificate,
    CountRecord,
    Scenario,
    behavior_from_counts,
    ch_inequality,
    enumerate_vertices,
    evaluate_inequality,
    i6522_inequality,
    validate_inequality,
    vertex_matrix,
)
from .separation import SeparationResult, SeparationStatus, find_violated_inequality, is_classical
from .simulate import (
    DetectionModel,
    MeasurementDirection,
    TwoQubitState,
    apply_detection_efficiency,
    depolarized_state,
    make_rng,
    maximally_entangled_state,
    quantum_behavior,
    random_directions,
    sample_counts,
)

builtin_i6522 = i6522_inequality

__version__ = "0.1.0"
