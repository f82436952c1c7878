"""Kinetic IMEX finite-volume solver for the layer-averaged hydrostatic shallow-water system."""

from .core import (
    FlowState,
    Grid1D,
    LayerPartition,
    PhysicalParams,
    Topography,
    free_surface,
    interface_elevations,
    layer_depth,
    velocities,
    velocity,
)
from .diagnostics import (
    EnergyBudget,
    energy_budget,
    lake_at_rest,
    layer_energy,
    total_energy,
    total_mass,
    total_momentum,
    vertical_velocity,
    well_balance_residual,
)
from .euler import CFLViolation, compute_dt, euler_step, euler_step_detailed, explicit_step, implicit_vertical_solve
from .kinetic_moments import chi_partial_moments, half_fluxes, maxwellian_density
from .reconstruction import interface_fluxes, reconstruct
from .scenario import ConfigError, ScenarioConfig, load_config, parse_config
from .viscous import ParabolicViolation, ViscousConfig, friction_coefficient, viscous_step

__version__ = "0.1.0"

__all__ = [
    "CFLViolation",
    "ConfigError",
    "EnergyBudget",
    "FlowState",
    "Grid1D",
    "LayerPartition",
    "ParabolicViolation",
    "PhysicalParams",
    "ScenarioConfig",
    "Topography",
    "ViscousConfig",
    "chi_partial_moments",
    "compute_dt",
    "energy_budget",
    "euler_step",
    "euler_step_detailed",
    "explicit_step",
    "free_surface",
    "friction_coefficient",
    "half_fluxes",
    "implicit_vertical_solve",
    "interface_elevations",
    "interface_fluxes",
    "lake_at_rest",
    "layer_depth",
    "layer_energy",
    "load_config",
    "maxwellian_density",
    "parse_config",
    "reconstruct",
    "total_energy",
    "total_mass",
    "total_momentum",
    "velocities",
    "velocity",
    "vertical_velocity",
    "viscous_step",
    "well_balance_residual",
]
