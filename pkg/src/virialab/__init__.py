"""Pseudo-spectral laboratory for the equation u_t = Lap(u) + |grad u|^2 b(x).

The package simulates the dynamics on a periodic box, provides closed-form
oracles (exact heat decay, Cole-Hopf for constant coefficient), evaluates the
singular-weight virial functional and its identity decomposition, and exposes
the Riccati comparison solution with its explicit blow-up time.
"""

from .spectral import (
    GridSpec,
    ScalarField,
    SpectralField,
    VectorField,
    to_spectral,
    to_physical,
    gradient,
    laplacian,
    heat_propagate,
    sobolev_norm,
    dealias,
)
from .problem import (
    CoefficientProfile,
    CoefficientSpec,
    WeightSpec,
    InitialDataSpec,
    ConditionsReport,
    build_coefficient,
    build_weight,
    build_initial_data,
    weight_l1_norm,
    check_blowup_conditions,
)
from .virial import (
    VirialBreakdown,
    RiccatiParams,
    BlowupDomainError,
    virial_I,
    identity_terms,
    check_identity,
    riccati_c1,
    riccati_J,
    blowup_time,
    fit_c2,
    comparison_check,
)
from .dynamics import (
    SolverConfig,
    TrajectoryRecord,
    RunResult,
    PicardReport,
    nonlinear_term,
    step,
    evolve,
    picard_iterate,
)
from .oracles import OracleCase, heat_exact, cole_hopf, oracle_error

__all__ = [
    "GridSpec", "ScalarField", "SpectralField", "VectorField",
    "to_spectral", "to_physical", "gradient", "laplacian",
    "heat_propagate", "sobolev_norm", "dealias",
    "CoefficientProfile", "CoefficientSpec", "WeightSpec",
    "InitialDataSpec", "ConditionsReport",
    "build_coefficient", "build_weight", "build_initial_data",
    "weight_l1_norm", "check_blowup_conditions",
    "VirialBreakdown", "RiccatiParams", "BlowupDomainError",
    "virial_I", "identity_terms", "check_identity",
    "riccati_c1", "riccati_J", "blowup_time", "fit_c2", "comparison_check",
    "SolverConfig", "TrajectoryRecord", "RunResult", "PicardReport",
    "nonlinear_term", "step", "evolve", "picard_iterate",
    "OracleCase", "heat_exact", "cole_hopf", "oracle_error",
]

__version__ = "0.1.0"
