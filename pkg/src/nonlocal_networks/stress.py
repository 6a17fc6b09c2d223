"""Randomized single-junction scenarios for maximum-principle checks."""
from __future__ import annotations

import numpy as np

from .kernels import gamma_weights, Kernel
from .network import COUPLING_SHAPES, Junction, Network, Road, VelocityLaw
from .scheme import SimulationError, simulate

COUPLINGS = tuple(COUPLING_SHAPES)


def random_scenario(rng: np.random.Generator, coupling: str, dx: float = 0.05):
    """Random network around one junction, its weights and piecewise-constant cell averages.

    Densities include exact zeros and exact rho_max plateaus, the usual trouble spots.
    """
    m, n = COUPLING_SHAPES[coupling]
    n_eta = int(rng.integers(1, 8))
    n_cells = int(rng.integers(n_eta + 2, n_eta + 20))
    length = n_cells * dx
    roads, rho0 = [], {}
    for rid in range(1, m + n + 1):
        law = VelocityLaw(float(rng.uniform(0.2, 3.0)), float(rng.uniform(0.3, 2.0)))
        a, b = (-length, 0.0) if rid <= m else (0.0, length)
        roads.append(Road(rid, a, b, law))
        k = int(rng.integers(1, 4))
        cuts = np.sort(rng.integers(0, n_cells, size=k - 1))
        vals = rng.uniform(0.0, 1.0, size=k) * law.rho_max
        vals[rng.random(k) < 0.2] = law.rho_max
        vals[rng.random(k) < 0.2] = 0.0
        rho0[rid] = np.repeat(vals, np.diff(np.concatenate(([0], cuts, [n_cells]))))
    alpha = priority = None
    if n == 2:
        a2 = float(rng.uniform(0.05, 0.95))
        alpha = (a2, 1.0 - a2)
    if m == 2:
        q = float(rng.uniform(0.05, 0.95))
        priority = (q, 1.0 - q)
    junc = Junction(1, list(range(1, m + 1)), list(range(m + 1, m + n + 1)), coupling, alpha, priority)
    family = str(rng.choice(["linear", "constant"]))
    return Network(roads, [junc]), gamma_weights(Kernel(n_eta * dx, family), dx), rho0


def max_principle_sweep(n_runs: int, seed: int, T: float = 3.0, modes=("strict", "relaxed")) -> list:
    """Run ``n_runs`` random scenarios cycling through couplings and CFL modes.

    Returns one ``(run, coupling, mode, message)`` tuple per bound violation.
    """
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(n_runs):
        coupling = COUPLINGS[i % len(COUPLINGS)]
        mode = modes[(i // len(COUPLINGS)) % len(modes)]
        net, weights, rho0 = random_scenario(rng, coupling)
        try:
            simulate(net, weights, rho0, T, cfl=mode)
        except SimulationError as exc:
            failures.append((i, coupling, mode, str(exc)))
    return failures
