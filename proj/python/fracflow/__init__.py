"""Fractional mean curvature of level sets and the nonlocal level-set flow."""

from ._core import (
    AccuracyError,
    ConfigError,
    DataError,
    DomainError,
    Error,
    Field,
    Grid,
    Kernel,
    NumericalError,
    PreconditionError,
    audit,
    ball_ode_trajectory,
    config_help,
    curvature_band,
    kappa_at,
    lens_mass,
    monte_carlo_ball_curvature,
    radial_ball_oracle,
    run,
    set_thread_count,
    simulate,
    thread_count,
)

__all__ = [name for name in dir() if not name.startswith("_")]
