"""Spectral simulation lab for the Landau-Lifshitz-Baryakhtar equation
driven by pure-jump noise in the canonical (flow-map) jump convention."""

from .controls import Control
from .diagnostics import (
    EnergyRecord,
    energy_audit,
    energy_record,
    gn_check,
    moment_bounds,
    projection_discrepancy,
)
from .field import (
    VectorField,
    bilaplacian,
    cross_laplacian,
    cubic,
    drift,
    drift_via_effective_field,
    effective_field,
    laplacian,
)
from .integrator import (
    SolverConfig,
    Trajectory,
    integrate_controlled,
    integrate_sde,
    integrate_skeleton,
    step_drift,
)
from .ldp import (
    ConvergenceReport,
    ZDistance,
    check_condition1,
    check_condition2,
    rate_cost,
    z_distance,
    z_norm,
)
from .marcus import (
    NoiseCoefficients,
    drift_correction,
    flow_remainder,
    jump_field,
    jump_increment,
    marcus_flow,
)
from .noise import JumpPath, LevyMeasure, sample_controlled_prm, sample_prm
from .spectral import Basis, build_basis, forward, inverse, project, sobolev_norm_sq

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "Control",
    "ConvergenceReport",
    "EnergyRecord",
    "JumpPath",
    "LevyMeasure",
    "NoiseCoefficients",
    "SolverConfig",
    "Trajectory",
    "VectorField",
    "ZDistance",
    "bilaplacian",
    "build_basis",
    "check_condition1",
    "check_condition2",
    "cross_laplacian",
    "cubic",
    "drift",
    "drift_correction",
    "drift_via_effective_field",
    "effective_field",
    "energy_audit",
    "energy_record",
    "flow_remainder",
    "forward",
    "gn_check",
    "integrate_controlled",
    "integrate_sde",
    "integrate_skeleton",
    "inverse",
    "jump_field",
    "jump_increment",
    "laplacian",
    "marcus_flow",
    "moment_bounds",
    "project",
    "projection_discrepancy",
    "rate_cost",
    "sample_controlled_prm",
    "sample_prm",
    "sobolev_norm_sq",
    "step_drift",
    "z_distance",
    "z_norm",
    "__version__",
]
