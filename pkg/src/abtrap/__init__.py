"""abtrap: constrained quantization of a combined ion trap with an
Aharonov-Bohm flux line.

Exact Dirac-bracket reduction of the vanishing-kinetic-energy limit, radial
spectral solvers for the full two-dimensional Hamiltonian, gauge-structure
verification, and classical secular dynamics under the RF drive.
"""

from .algebra import (
    PhaseSpace,
    RationalPhaseFunction,
    evaluate,
    expression_sign,
    parse_expression,
    poisson_bracket,
    serialize_expression,
    substitute,
)
from .core import SIGN_CONVENTION, TrapConfig
from .errors import (
    AbtrapError,
    ConfigError,
    ConvergenceFailure,
    EvaluationError,
    ExpressionParseError,
    GridTooSmall,
    NoSecularPeak,
    NumericalFailure,
    ReductionImpossible,
    ShapeMismatch,
    SignUndecidableError,
    TowerIdentificationError,
    ZeroDenominatorError,
)

from .acceptance import CriterionResult, VerificationReport, verify_all
from .config import (
    DEFAULT_CONFIG_TEXT,
    RunConfig,
    SolverOptions,
    SweepOptions,
    parse_config,
)
from .gauge import (
    check_pure_gauge,
    circulation_over_2pi,
    gauge_block,
    gauge_invariance_of_Jz,
    gauge_spectrum_equivalence,
)
from .reduction import (
    Classification,
    angular_momentum,
    constraint_matrix,
    dirac_bracket,
    dirac_structure,
    flux_term,
    legendre_check,
    perp_hamiltonian,
    quantize,
    reduce,
    reduction_report,
    trap_constraints,
)
from .reporting import (
    attach_hash,
    config_hash,
    dump_lines,
    dumps,
    records_csv,
    trajectory_csv,
)
from .secular import (
    ClassicalState,
    FrequencyEstimate,
    PaulDrive,
    Trajectory,
    canonical_angular_momentum,
    effective_potential_check,
    extract_secular_frequency,
    integrate_trajectory,
)
from .spectral import (
    FINITE_SOLENOID,
    FLUX_LINE,
    RadialProblem,
    axial_spectrum,
    build_radial_hamiltonian,
    eigensolve,
    residual_identity,
    residual_scan,
    sector_records,
    slow_branch_check,
    solve_sectors,
)

__version__ = "0.1.0"

__all__ = [
    "PhaseSpace",
    "RationalPhaseFunction",
    "TrapConfig",
    "SIGN_CONVENTION",
    "poisson_bracket",
    "substitute",
    "evaluate",
    "parse_expression",
    "serialize_expression",
    "expression_sign",
    "AbtrapError",
    "ConfigError",
    "ConvergenceFailure",
    "EvaluationError",
    "ExpressionParseError",
    "GridTooSmall",
    "NoSecularPeak",
    "NumericalFailure",
    "ReductionImpossible",
    "ShapeMismatch",
    "SignUndecidableError",
    "TowerIdentificationError",
    "ZeroDenominatorError",
    "Classification",
    "trap_constraints",
    "perp_hamiltonian",
    "angular_momentum",
    "flux_term",
    "constraint_matrix",
    "dirac_bracket",
    "dirac_structure",
    "reduce",
    "quantize",
    "legendre_check",
    "reduction_report",
    "FLUX_LINE",
    "FINITE_SOLENOID",
    "RadialProblem",
    "build_radial_hamiltonian",
    "eigensolve",
    "residual_identity",
    "residual_scan",
    "slow_branch_check",
    "axial_spectrum",
    "solve_sectors",
    "sector_records",
    "check_pure_gauge",
    "circulation_over_2pi",
    "gauge_invariance_of_Jz",
    "gauge_spectrum_equivalence",
    "gauge_block",
    "PaulDrive",
    "ClassicalState",
    "Trajectory",
    "FrequencyEstimate",
    "canonical_angular_momentum",
    "effective_potential_check",
    "integrate_trajectory",
    "extract_secular_frequency",
    "RunConfig",
    "SolverOptions",
    "SweepOptions",
    "parse_config",
    "DEFAULT_CONFIG_TEXT",
    "config_hash",
    "dumps",
    "dump_lines",
    "records_csv",
    "trajectory_csv",
    "attach_hash",
    "CriterionResult",
    "VerificationReport",
    "verify_all",
    "__version__",
]
