"""Run a scenario with the model it selects."""
from __future__ import annotations

from .kernels import gamma_weights
from .local import simulate_limit, simulate_local
from .measures import MeasureReport, measure_report
from .network import ConfigurationError, validate_network
from .scenario import ScenarioConfig, build_kernel, build_network, initial_state, model_family, model_kind
from .scheme import Trajectory, simulate as simulate_nonlocal


def run_scenario(cfg: ScenarioConfig, snapshot_times=None) -> Trajectory:
    """Simulate ``cfg`` up to its horizon.

    Raises ``ConfigurationError`` when the network fails validation.
    """
    net = build_network(cfg)
    kind = model_kind(cfg.model)
    eta = cfg.kernel["eta"] if kind == "nonlocal" else 0.0
    problems = validate_network(net, eta)
    if problems:
        raise ConfigurationError("; ".join(problems))
    rho0 = initial_state(cfg, net)
    T = cfg.horizon["T"]
    snaps = cfg.horizon.get("snapshots", []) if snapshot_times is None else snapshot_times
    dx = cfg.grid["dx"]
    if kind == "nonlocal":
        weights = gamma_weights(build_kernel(cfg), dx)
        return simulate_nonlocal(net, weights, rho0, T, cfl=cfg.horizon["cfl"], snapshot_times=snaps, model=cfg.model)
    if kind == "local":
        return simulate_local(net, dx, rho0, T, variant=model_family(cfg.model), snapshot_times=snaps)
    return simulate_limit(net, dx, rho0, T, snapshot_times=snaps)


def run_and_measure(cfg: ScenarioConfig, snapshot_times=None) -> tuple[Trajectory, MeasureReport]:
    traj = run_scenario(cfg, snapshot_times)
    out = cfg.outputs
    return traj, measure_report(traj, exit_road=out.get("exit_road"), ttt_roads=out.get("ttt_roads"))
