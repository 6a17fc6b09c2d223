"""Scalar junction coupling functions g_e and the discrete nonlocal velocity.

These are the reference (one cell at a time) forms. The time stepper uses the
vectorised kernels in :mod:`nonlocal_networks.core`, which are tested against
these.
"""
from __future__ import annotations

from .network import ConfigurationError, Road


def coupling_one_to_one(rho_cell, rho_max_out, V_out):
    return min(rho_cell, rho_max_out) * V_out


def coupling_one_to_two_maxflux(rho_cell, alpha, rho_max, V):
    a2, a3 = alpha
    return min(a2 * rho_cell, rho_max[0]) * V[0] + min(a3 * rho_cell, rho_max[1]) * V[1]


def coupling_one_to_two_distribution(rho_cell, alpha, rho_max, V):
    a2, a3 = alpha
    if a2 <= 0.0 or a3 <= 0.0:
        raise ConfigurationError("distribution coupling needs strictly positive distribution parameters")
    return min(rho_cell * (a2 * V[0] + a3 * V[1]), rho_max[0] * V[0] / a2, rho_max[1] * V[1] / a3)


def coupling_two_to_one_maxflux(rho_cell, rho_other_boundary, q_self, rho_max_out, V_out):
    return min(rho_cell, max(q_self * rho_max_out, rho_max_out - rho_other_boundary)) * V_out


def coupling_two_to_one_priority(rho_cell, rho_other_boundary, q_self, q_other, rho_max_out, V_out):
    return min(rho_cell, q_self * rho_max_out, q_self / q_other * rho_other_boundary) * V_out


def discrete_velocity(road: Road, side: str, j: int, rho_road, weights) -> float:
    """Nonlocal velocity of cell ``j`` in the junction frame.

    ``side='incoming'``: ``rho_road`` holds the road's cells with the last cell
    at index -1 (j < 0 counts back from the junction). ``side='outgoing'``:
    ``rho_road[0]`` is the first cell past the junction; ``j`` may be negative,
    in which case only cells past the junction contribute.
    """
    law = road.velocity_law
    gamma = weights.gamma
    n_eta = weights.n_eta
    total = 0.0
    if side == "incoming":
        if j >= 0 or -j > len(rho_road):
            raise IndexError(f"cell {j} is not on the incoming road")
        for k in range(0, min(-j - 2, n_eta - 1) + 1):
            total += gamma[k] * law(rho_road[j + k + 1])
    elif side == "outgoing":
        for k in range(max(-j - 1, 0), n_eta):
            idx = j + k + 1
            if idx >= len(rho_road):
                raise IndexError(f"look-ahead of cell {j} runs past the end of road {road.id}")
            total += gamma[k] * law(rho_road[idx])
    else:
        raise ValueError(f"side must be 'incoming' or 'outgoing', got {side!r}")
    return float(total)
