"""Networks of heteroclinic GLV units: simulation, equilibria and analysis."""

from .errors import ConfigError, IntegrationFault
from .model import GlvKinetics, Nine, Three, UnitParams, build_rate_matrix, rhs
from .topology import (CouplingMatrix, ParameterField, chain_bidirectional,
                       chain_unidirectional, disc_pacemaker_field, grid_diffusive,
                       random_defect_field, ring_directed, ring_distance_dependent)
from .integrate import (IntegratorConfig, QuenchSchedule, Trajectory,
                        initial_condition_uniform, simulate, step_deterministic,
                        step_stochastic)

__all__ = [
    "ConfigError", "IntegrationFault", "GlvKinetics", "Nine", "Three", "UnitParams",
    "build_rate_matrix", "rhs", "CouplingMatrix", "ParameterField", "chain_bidirectional",
    "chain_unidirectional", "disc_pacemaker_field", "grid_diffusive", "random_defect_field",
    "ring_directed", "ring_distance_dependent", "IntegratorConfig", "QuenchSchedule",
    "Trajectory", "initial_condition_uniform", "simulate", "step_deterministic",
    "step_stochastic",
]
