"""Scaled mean curvature flow with surface diffusion.

Thin Python layer over the C++ solver: energy densities, the radial reduction,
the curve and axisymmetric flows, and the JSON scenario runner.
"""

from ._scmcf import (
    ConfigError,
    DomainError,
    EnergyDensity,
    EpsilonTooLarge,
    Error,
    FlowState,
    InvalidArgument,
    MeshQualityError,
    ParabolicityError,
    StabilityError,
    area,
    build_circle,
    build_convexity_scenario,
    build_cylinder,
    build_self_intersection_scenario,
    build_sphere,
    check_parabolicity,
    energy,
    gap_function,
    mass,
    radial,
    run,
    run_config,
    stable_step,
    step,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
