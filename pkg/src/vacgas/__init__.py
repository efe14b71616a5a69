"""1D compressible Navier-Stokes lab with far-field vacuum, Lagrangian mass coordinates."""

from vacgas.profiles import (
    GasConstants,
    DensityProfile,
    InitialFields,
    HypothesisReport,
    make_density_profile,
    default_initial_fields,
    check_hypotheses,
    truncate_and_extend,
)
from vacgas.grid import Grid, DomainSequence, build_grid, domain_sequence
from vacgas.solver import (
    SimState,
    SolverConfig,
    StepLog,
    StepRejected,
    SolverAbort,
    ZeroPivotError,
    make_state,
    step,
    run,
    compute_pressure,
    compute_G,
    solve_tridiagonal,
)

__all__ = [
    "GasConstants",
    "DensityProfile",
    "InitialFields",
    "HypothesisReport",
    "make_density_profile",
    "default_initial_fields",
    "check_hypotheses",
    "truncate_and_extend",
    "Grid",
    "DomainSequence",
    "build_grid",
    "domain_sequence",
    "SimState",
    "SolverConfig",
    "StepLog",
    "StepRejected",
    "SolverAbort",
    "ZeroPivotError",
    "make_state",
    "step",
    "run",
    "compute_pressure",
    "compute_G",
    "solve_tridiagonal",
]

__version__ = "0.1.0"
