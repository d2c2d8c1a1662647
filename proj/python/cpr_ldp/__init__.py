"""Cycle and phase recovery for periodic time series under w-event LDP."""

from ._core import (
    BudgetSplit,
    DetectionConfig,
    DetectionFailure,
    DomainError,
    EmConfig,
    EmLikelihood,
    IngestionError,
    SwParams,
    cosine_distance,
    cpr_reconstruct,
    cpr_recover,
    detect_period,
    em_sw_decode,
    kde_mode,
    laplace_perturb_series,
    mirror_pad,
    normalize,
    period_loss,
    resample_linear,
    run_detection_trials,
    run_method,
    run_reconstruction_sweep,
    split_budget,
    sw_density,
    sw_params,
    sw_perturb_series,
    tile_crop,
)

__all__ = [
    "BudgetSplit",
    "DetectionConfig",
    "DetectionFailure",
    "DomainError",
    "EmConfig",
    "EmLikelihood",
    "IngestionError",
    "SwParams",
    "cosine_distance",
    "cpr_reconstruct",
    "cpr_recover",
    "detect_period",
    "em_sw_decode",
    "kde_mode",
    "laplace_perturb_series",
    "mirror_pad",
    "normalize",
    "period_loss",
    "resample_linear",
    "run_detection_trials",
    "run_method",
    "run_reconstruction_sweep",
    "split_budget",
    "sw_density",
    "sw_params",
    "sw_perturb_series",
    "tile_crop",
]
