from .backend import active_backend_name, get_kernels
from .core import (
    CALIBRATION_LEVELS,
    DEFAULT_LIBRARY,
    DEFAULT_NOISE,
    PITCH_CM,
    BuiltinEvaluator,
    CalibrationReport,
    FidelityTier,
    LevelStats,
    NeutronicsResult,
    NoiseModel,
    SolverConfig,
    TwoGroupXS,
    XsLibrary,
    analytic_kinf,
    calibrate,
    evaluate,
    solve_diffusion,
    solve_material_grid,
)

__all__ = [
    "CALIBRATION_LEVELS",
    "DEFAULT_LIBRARY",
    "DEFAULT_NOISE",
    "PITCH_CM",
    "BuiltinEvaluator",
    "CalibrationReport",
    "FidelityTier",
    "LevelStats",
    "NeutronicsResult",
    "NoiseModel",
    "SolverConfig",
    "TwoGroupXS",
    "XsLibrary",
    "active_backend_name",
    "analytic_kinf",
    "calibrate",
    "evaluate",
    "get_kernels",
    "solve_diffusion",
    "solve_material_grid",
]
