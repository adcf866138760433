"""Machine checks for exchange algebras with a reflecting boundary.

The package realizes creation and annihilation operators whose exchange is
weighted by a concrete solution of the Yang-Baxter equation, builds the
vertex operator that intertwines them, dresses a reflection matrix into an
operator on the truncated Fock space, folds bulk into boundary generators,
and assembles the tower of conserved charges.  Every defining identity of
those objects is measured numerically; the test suites and the ``zfcheck``
command report the residuals.
"""

from .boundary import (
    BoundaryContext,
    boundary_relation_residuals,
    check_boundary_relations,
    check_rho_B_automorphism,
    check_rho_identity,
)
from .errors import (
    CapacityError,
    ConfigError,
    GridDomainError,
    GridValidationError,
    NotWhitelistedError,
    ReflectionTableError,
    ZfcheckError,
)
from .fock import (
    FockSpace,
    FockState,
    SpectralGrid,
    particle_number,
    states_equal,
)
from .harness import (
    CheckRecord,
    Report,
    RunConfig,
    emit_report,
    load_config,
    run_suites,
)
from .hierarchy import (
    HierarchyOperator,
    apply_H,
    check_eigenrelations,
    check_flow_commutes,
    check_integrals_of_motion,
    check_symmetry_breaking,
)
from .rmatrix import (
    ReflectionMatrixSpec,
    Residual,
    RMatrixSpec,
    WhitelistReport,
    check_b_unitarity,
    check_reflection_equation,
    check_unitarity,
    check_yang_baxter,
    constant_diagonal_b,
    identity_b,
    load_table_b,
    phase_diagonal_b,
    rational_r,
    table_b,
    whitelist_reflection,
)
from .vertex import (
    VertexContext,
    check_b_exchange,
    check_rtt,
    check_T_intertwining,
    check_T_inverse,
    check_T_vacuum,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryContext",
    "CapacityError",
    "CheckRecord",
    "ConfigError",
    "FockSpace",
    "FockState",
    "GridDomainError",
    "GridValidationError",
    "HierarchyOperator",
    "NotWhitelistedError",
    "ReflectionMatrixSpec",
    "ReflectionTableError",
    "Report",
    "Residual",
    "RMatrixSpec",
    "RunConfig",
    "SpectralGrid",
    "VertexContext",
    "WhitelistReport",
    "ZfcheckError",
    "apply_H",
    "boundary_relation_residuals",
    "check_b_exchange",
    "check_b_unitarity",
    "check_boundary_relations",
    "check_eigenrelations",
    "check_flow_commutes",
    "check_integrals_of_motion",
    "check_reflection_equation",
    "check_rho_B_automorphism",
    "check_rho_identity",
    "check_rtt",
    "check_symmetry_breaking",
    "check_T_intertwining",
    "check_T_inverse",
    "check_T_vacuum",
    "check_unitarity",
    "check_yang_baxter",
    "constant_diagonal_b",
    "emit_report",
    "identity_b",
    "load_config",
    "load_table_b",
    "particle_number",
    "phase_diagonal_b",
    "rational_r",
    "run_suites",
    "states_equal",
    "table_b",
    "whitelist_reflection",
]
