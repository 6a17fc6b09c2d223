"""Nonlocal traffic flow on road networks: upwind finite-volume solver, junction
couplings, local and infinite-range baselines, and traffic measures."""
from .core import BACKEND
from .kernels import Kernel, QuadratureWeights, gamma_weights
from .measures import MeasureReport, congestion, l1_distance, measure_report, outflow, total_travel_time
from .network import ConfigurationError, DomainError, Junction, Network, Road, VelocityLaw, validate_network
from .runner import run_and_measure, run_scenario
from .scenario import ScenarioConfig, builtin_diamond, load_scenario, save_scenario
from .scheme import SimulationError, State, Trajectory, simulate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigurationError",
    "DomainError",
    "Junction",
    "Kernel",
    "MeasureReport",
    "Network",
    "QuadratureWeights",
    "Road",
    "ScenarioConfig",
    "SimulationError",
    "State",
    "Trajectory",
    "VelocityLaw",
    "builtin_diamond",
    "congestion",
    "gamma_weights",
    "l1_distance",
    "load_scenario",
    "measure_report",
    "outflow",
    "run_and_measure",
    "run_scenario",
    "save_scenario",
    "simulate",
    "total_travel_time",
    "validate_network",
]
