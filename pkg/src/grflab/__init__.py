"""Numerical laboratory for shrinking solitons of the generalized Ricci flow.

Subpackages by theme:

* odesolve: adaptive integration with events and blowup labels
* cylinder: the homogeneous (sphere) x (circle) flow, collapse and
  torsion diagnostics
* shooting: the phase-plane certificate for the smooth radial branch
* warped: explicit warped-product solitons and their residuals
* entropy: shrinking entropy, conjugate-heat weights, pointwise checks
* hodge: discrete exterior calculus oracle for the form identities
* cli: configuration-driven command-line front end
"""

from .cylinder import (
    BlowupReport,
    CylinderState,
    CylinderTrajectory,
    TorsionReport,
    blowup_analysis,
    run_flow,
    torsion_divergence,
)
from .entropy import (
    EntropyConfig,
    EntropyTrace,
    HeatWeight,
    HeatWeightPath,
    conjugate_heat_homogeneous,
    entropy_derivative_check,
    entropy_eval,
    mass,
    pointwise_monotonicity_check,
    soliton_heat_check,
)
from .hodge import (
    FormField,
    HodgeReport,
    PeriodicGrid,
    VectorField,
    adjointness_gap,
    check_divH2,
    check_integral_identity,
    check_suobing,
    check_twisted_codiff,
)
from .odesolve import EventSpec, OdeProblem, Trajectory, integrate
from .shooting import ShootingReport, shoot_r3_branch
from .warped import (
    ConventionReport,
    RadialProfile,
    ResidualReport,
    WarpedSolitonData,
    convention_check,
    cylinder_soliton,
    gaussian_shrinker,
    ode_residuals,
    tensor_residuals,
)

__version__ = "0.1.0"

__all__ = [
    "BlowupReport",
    "CylinderState",
    "CylinderTrajectory",
    "ConventionReport",
    "EntropyConfig",
    "EntropyTrace",
    "EventSpec",
    "FormField",
    "HeatWeight",
    "HeatWeightPath",
    "HodgeReport",
    "OdeProblem",
    "PeriodicGrid",
    "RadialProfile",
    "ResidualReport",
    "ShootingReport",
    "TorsionReport",
    "Trajectory",
    "VectorField",
    "WarpedSolitonData",
    "adjointness_gap",
    "blowup_analysis",
    "check_divH2",
    "check_integral_identity",
    "check_suobing",
    "check_twisted_codiff",
    "conjugate_heat_homogeneous",
    "convention_check",
    "cylinder_soliton",
    "entropy_derivative_check",
    "entropy_eval",
    "gaussian_shrinker",
    "integrate",
    "mass",
    "ode_residuals",
    "pointwise_monotonicity_check",
    "run_flow",
    "shoot_r3_branch",
    "soliton_heat_check",
    "tensor_residuals",
    "torsion_divergence",
]
