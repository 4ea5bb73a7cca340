"""Caputo fractional SDEs with small-jump Levy noise and their averaged systems."""

from ._core import (
    ConfigError,
    DivergenceError,
    EnsembleError,
    InsufficientResolutionError,
    JumpMeasureSpec,
    SeriesDivergenceError,
    __version__,
    convergence_study,
    gamma_fn,
    kernel_weights,
    mittag_leffler,
    nu_integral,
    run_ensemble,
    stable_jump_gamma1,
    theorem_bound,
)

__all__ = [
    "ConfigError",
    "DivergenceError",
    "EnsembleError",
    "InsufficientResolutionError",
    "JumpMeasureSpec",
    "SeriesDivergenceError",
    "__version__",
    "convergence_study",
    "gamma_fn",
    "kernel_weights",
    "mittag_leffler",
    "nu_integral",
    "run_ensemble",
    "stable_jump_gamma1",
    "theorem_bound",
]
