"""Pseudo-spectral incompressible Navier-Stokes on the periodic 3-torus,
with forcing-threshold diagnostics and trajectory-contraction experiments."""

from .grid import GridSpec
from .field import SpectralField, FieldInvariantError, random_divfree, zero_field
from .operators import (
    bilinear_term,
    bilinear_term_direct,
    dw_distance,
    dw_max_value,
    dw_tail_bound,
    inner_product_l2,
    leray_project,
    norm_h,
    norm_v,
    norm_vprime,
    self_advection,
    stokes_apply,
)
from .forcing import (
    ConstantForcing,
    ForcingSpec,
    NormEquivalenceReport,
    QuasiperiodicForcing,
    TimePeriodicForcing,
    TranslationalBoundReport,
    WindowedForcing,
    build_profile,
    norm_equivalence_check,
    sample,
    scale_to_grashof,
    translational_norms,
    with_scale,
)
from .stepper import (
    BlowupError,
    StepperConfig,
    TrajectoryState,
    cfl_advisory,
    integrate,
    step,
)
from .analysis import (
    ConstantsReport,
    RateFit,
    absorbing_inequality_audit,
    constants_from_norms,
    constants_report,
    energy_balance_audit,
    enstrophy_window_audit,
    fit_decay_rate,
    gradient_bound_audit,
    grashof_bound,
)
from .experiments import (
    AuditRunReport,
    ContractionReport,
    PeriodicReport,
    PullbackReport,
    run_audits,
    run_contraction,
    run_periodic,
    run_pullback,
)
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import ConfigError, RunConfig, load_config, parse_config, serialize_config

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "SpectralField",
    "FieldInvariantError",
    "random_divfree",
    "zero_field",
    "bilinear_term",
    "bilinear_term_direct",
    "dw_distance",
    "dw_max_value",
    "dw_tail_bound",
    "inner_product_l2",
    "leray_project",
    "norm_h",
    "norm_v",
    "norm_vprime",
    "self_advection",
    "stokes_apply",
    "ConstantForcing",
    "TimePeriodicForcing",
    "QuasiperiodicForcing",
    "WindowedForcing",
    "ForcingSpec",
    "TranslationalBoundReport",
    "NormEquivalenceReport",
    "build_profile",
    "norm_equivalence_check",
    "sample",
    "scale_to_grashof",
    "translational_norms",
    "with_scale",
    "BlowupError",
    "StepperConfig",
    "TrajectoryState",
    "cfl_advisory",
    "integrate",
    "step",
    "ConstantsReport",
    "RateFit",
    "absorbing_inequality_audit",
    "constants_from_norms",
    "constants_report",
    "energy_balance_audit",
    "enstrophy_window_audit",
    "fit_decay_rate",
    "gradient_bound_audit",
    "grashof_bound",
    "AuditRunReport",
    "ContractionReport",
    "PeriodicReport",
    "PullbackReport",
    "run_audits",
    "run_contraction",
    "run_periodic",
    "run_pullback",
    "CheckpointError",
    "load_checkpoint",
    "save_checkpoint",
    "ConfigError",
    "RunConfig",
    "load_config",
    "parse_config",
    "serialize_config",
]
