"""Numerical verification of non-Noether symmetries of Hamiltonian systems.

Given a Poisson bivector W, a Hamiltonian h, and a candidate symmetry
generator E, this package checks the defining identities ([W,W] = 0,
[E,W(h)] = 0, the Yang-Baxter condition, bi-Hamiltonian compatibility),
extracts the conserved quantities c_1..c_n and Y^(1)..Y^(n) from the
Pfaffian pencil of (W_hat, W) with W_hat = [E, W], and audits conservation
along the flow and pairwise involution under both Poisson structures.
"""

from .expr import (
    EvalDomainError,
    ExprError,
    Jet,
    ParseError,
    PhaseSpace,
    ScalarExpr,
    diff,
    evaluate,
    evaluate_jet,
    parse,
)
from .geometry import (
    MultiVectorField,
    PhasePoint,
    evaluate_mv,
    hamiltonian_vf,
    lie_derivative_mv,
    poisson_bracket,
    schouten_bb,
)
from .spectral import (
    InvariantVector,
    NonRealSpectrumError,
    RegularityError,
    SecularSpectrum,
    SpectralError,
    invariant_gradient,
    mixed_wedge_ratios,
    pfaffian,
    secular_roots,
    y_from_roots,
)
from .systems import SystemFileError, SystemSpec, builtin_system, load_system, run_report
from .verify import (
    CheckConfig,
    CheckRecord,
    CheckReport,
    FlowError,
    SamplingError,
    Trajectory,
    check_compatibility,
    check_involution,
    check_jacobi,
    check_non_noether,
    check_symmetry,
    check_yang_baxter,
    conservation_drift,
    integrate_flow,
)

__version__ = "0.1.0"
