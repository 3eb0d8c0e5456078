"""Shooting-method solver for steady states of a two-sided habitat.

Computes all positive nonconstant steady states (clines) of the Neumann
problem p'' + lam w(x) f(p) = 0 on [omega1, omega2], where w is a step
weight that is negative on the left side and positive on the right.
"""

__version__ = "0.1.0"

from .integrator import (
    BlowupError,
    IntegratorConfig,
    PhasePoint,
    Trajectory,
    energy_profile,
    integrate,
    piecewise_energy,
    poincare_map,
    sweep_terminals,
    vector_field,
)
from .nonlinearity import (
    ArctanDamped,
    CustomPolynomial,
    DegreeOfDominance,
    FStarReport,
    HatFamily,
    Nonlinearity,
    check_f_star,
    nonlinearity_from_dict,
)
from .problem import (
    ConjectureReport,
    Problem,
    StepWeight,
    neumann_necessary_integral,
    problem_from_dict,
    problem_from_json,
    validate_conjecture_hypotheses,
    weight_at,
    weight_mean,
)
from .reproduction import (
    ComparisonReport,
    NamedInstance,
    compare,
    named_instance_from_dict,
    named_instance_from_json,
    proposition_1,
    proposition_2,
    remark_instances,
    run_instance,
    sweep_cline_counts,
)
from .shooting import (
    Bracket,
    BracketLostError,
    Cline,
    ClineSearchResult,
    GammaCurve,
    GammaEntry,
    bisect_cline,
    build_gamma,
    find_all_clines,
    find_brackets,
)

__all__ = [
    "ArctanDamped",
    "BlowupError",
    "Bracket",
    "BracketLostError",
    "Cline",
    "ClineSearchResult",
    "ComparisonReport",
    "ConjectureReport",
    "CustomPolynomial",
    "DegreeOfDominance",
    "FStarReport",
    "GammaCurve",
    "GammaEntry",
    "HatFamily",
    "IntegratorConfig",
    "NamedInstance",
    "Nonlinearity",
    "PhasePoint",
    "Problem",
    "StepWeight",
    "Trajectory",
    "bisect_cline",
    "build_gamma",
    "check_f_star",
    "compare",
    "energy_profile",
    "find_all_clines",
    "find_brackets",
    "integrate",
    "named_instance_from_dict",
    "named_instance_from_json",
    "neumann_necessary_integral",
    "nonlinearity_from_dict",
    "piecewise_energy",
    "poincare_map",
    "problem_from_dict",
    "problem_from_json",
    "proposition_1",
    "proposition_2",
    "remark_instances",
    "run_instance",
    "sweep_cline_counts",
    "validate_conjecture_hypotheses",
    "vector_field",
    "weight_at",
    "weight_mean",
    "__version__",
]
