"""Local LWR network baseline and the infinite-range limit models.

The local models use the Godunov scheme with demand/supply junction conditions.
The limit models replace every nonlocal velocity by its eta -> infinity limit:
zero on incoming roads and v_o(0) on outgoing roads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core
from .couplings import (
    coupling_one_to_one,
    coupling_one_to_two_distribution,
    coupling_one_to_two_maxflux,
    coupling_two_to_one_maxflux,
    coupling_two_to_one_priority,
)
from .network import ConfigurationError, DomainError, Junction, Network, VelocityLaw, n_cells
from .scheme import GridSpec, State, Trajectory, check_bounds, run


@dataclass(frozen=True)
class DemandSupply:
    law: VelocityLaw

    @property
    def sigma(self) -> float:
        # argmax of rho * v(rho) for the affine law
        return 0.5 * self.law.rho_max

    @property
    def fmax(self) -> float:
        return self.flux(self.sigma)

    def flux(self, rho):
        return rho * self.law.v_max * (1.0 - rho / self.law.rho_max)


def _check(ds: DemandSupply, rho: float):
    if not (-1e-12 <= rho <= ds.law.rho_max + 1e-12):
        raise DomainError(f"density {rho} outside [0, {ds.law.rho_max}]")


def demand(ds: DemandSupply, rho: float) -> float:
    _check(ds, rho)
    return float(ds.flux(rho)) if rho <= ds.sigma else ds.fmax


def supply(ds: DemandSupply, rho: float) -> float:
    _check(ds, rho)
    return ds.fmax if rho <= ds.sigma else float(ds.flux(rho))


def godunov_flux(ds: DemandSupply, rho_left: float, rho_right: float) -> float:
    return min(demand(ds, rho_left), supply(ds, rho_right))


def junction_fluxes_ds(variant: str, D: tuple, S: tuple, alpha=None, priority=None) -> tuple:
    """Junction fluxes from incoming demands ``D`` and outgoing supplies ``S``.

    Returns ``(incoming_fluxes, outgoing_fluxes)`` as tuples.
    """
    m, n = len(D), len(S)
    if (m, n) == (1, 1):
        f = min(D[0], S[0])
        return (f,), (f,)
    if (m, n) == (1, 2):
        a2, a3 = alpha
        if variant == "maxflux":
            f2 = min(a2 * D[0], S[0])
            f3 = min(a3 * D[0], S[1])
            return (f2 + f3,), (f2, f3)
        if a2 <= 0.0 or a3 <= 0.0:
            raise ConfigurationError("distribution variant needs strictly positive distribution parameters")
        f1 = min(D[0], S[0] / a2, S[1] / a3)
        return (f1,), (a2 * f1, a3 * f1)
    if (m, n) == (2, 1):
        q1, q2 = priority
        if variant == "maxflux":
            f1 = min(D[0], max(q1 * S[0], S[0] - D[1]))
            f2 = min(D[1], max(q2 * S[0], S[0] - D[0]))
        else:
            f1 = min(D[0], q1 / q2 * D[1], q1 * S[0])
            f2 = min(D[1], q2 / q1 * D[0], q2 * S[0])
        return (f1, f2), (f1 + f2,)
    raise ConfigurationError(f"unsupported {m}-to-{n} junction")


def local_junction_fluxes(junction: Junction, rho_boundary: dict, laws: dict, variant: str) -> dict:
    """Interface flows of every road at ``junction`` from the boundary cell densities."""
    D = tuple(demand(DemandSupply(laws[e]), rho_boundary[e]) for e in junction.incoming)
    S = tuple(supply(DemandSupply(laws[o]), rho_boundary[o]) for o in junction.outgoing)
    f_in, f_out = junction_fluxes_ds(variant, D, S, junction.distribution, junction.priority)
    out = dict(zip(junction.incoming, f_in))
    out.update(zip(junction.outgoing, f_out))
    return out


def _variant_of(junction: Junction) -> str:
    return "distribution" if junction.coupling in ("one_to_two_distribution", "two_to_one_priority") else "maxflux"


class _GridScheme:
    def __init__(self, net: Network, dx: float):
        self.net = net
        self.dx = float(dx)
        cells = {r.id: n_cells(r.length, dx) for r in net.roads}
        self.grid = GridSpec(dx=self.dx, n_eta=0, cells_per_road=cells)
        self.road_ids = tuple(r.id for r in net.roads)
        self.laws = {r.id: r.velocity_law for r in net.roads}
        self.v_max = {r.id: r.velocity_law.v_max for r in net.roads}
        self.rho_max = {r.id: r.velocity_law.rho_max for r in net.roads}
        self.has_down = {r.id: net.downstream_junction(r.id) is not None for r in net.roads}
        self.has_up = {r.id: net.upstream_junction(r.id) is not None for r in net.roads}
        self.warnings = []

    update = staticmethod(core.update)


class LocalScheme(_GridScheme):
    """Godunov scheme with demand/supply junctions.

    ``cm_flux='cell'`` reports rho * v(rho) per cell to the congestion measure;
    ``'face'`` reports the Godunov flux through the cell's right face.
    """

    model = "local"

    def __init__(self, net: Network, dx: float, variant: str = None, cm_flux: str = "cell"):
        super().__init__(net, dx)
        self.variant = variant
        if cm_flux not in ("cell", "face"):
            raise ValueError("cm_flux must be 'cell' or 'face'")
        self.cm_flux = cm_flux

    def fluxes(self, rho: dict):
        from .scheme import Fluxes

        face, influx, cell = {}, {}, {}
        b_in = b_out = 0.0
        for e in self.road_ids:
            vm, rm = self.v_max[e], self.rho_max[e]
            f = np.empty_like(rho[e])
            f[:-1] = core.godunov_interior(rho[e], vm, rm)
            face[e] = f
            phys = rho[e] * vm * (1.0 - rho[e] / rm)
            cell[e] = phys
            if not self.has_up[e]:
                # zero-order extrapolation ghost: Godunov flux of a constant state
                influx[e] = float(phys[0])
                b_in += influx[e]
            if not self.has_down[e]:
                f[-1] = phys[-1]
                b_out += float(f[-1])
        records = {}
        for junc in self.net.junctions:
            variant = self.variant or _variant_of(junc)
            boundary = {e: float(rho[e][-1]) for e in junc.incoming}
            boundary.update({o: float(rho[o][0]) for o in junc.outgoing})
            flows = local_junction_fluxes(junc, boundary, self.laws, variant)
            exits = {e: flows[e] for e in junc.incoming}
            entries = {o: flows[o] for o in junc.outgoing}
            for e in junc.incoming:
                face[e][-1] = flows[e]
            influx.update(entries)
            records[junc.id] = (exits, entries)
        if self.cm_flux == "face":
            cell = face
        return Fluxes(face=face, influx=influx, cell=cell, junction=records, boundary_in=b_in, boundary_out=b_out)


def simulate_local(net: Network, dx: float, rho0: dict, T: float, variant: str = None, cfl_factor: float = 0.5,
                   snapshot_times=(), cm_flux: str = "cell") -> Trajectory:
    """Godunov network run with time step ``cfl_factor * dx / max v_max``."""
    scheme = LocalScheme(net, dx, variant, cm_flux)
    check_bounds({e: np.asarray(rho0[e], dtype=float) for e in scheme.road_ids}, scheme.rho_max, 0.0)
    dt = cfl_factor * dx / net.v_norm
    name = f"local-{variant}" if variant else "local"
    return run(scheme, State(0.0, rho0), T, lambda s: dt, snapshot_times, model=name)


# ---------------------------------------------------------------------------
# eta -> infinity limits


def limit_flux_1to1(rho: float, v2_0: float, rho_max2: float) -> float:
    return min(rho, rho_max2) * v2_0


def limit_coupling_flux(tag: str, rho: float, rho_max, v0, alpha=None, q=None, rho_other: float = 0.0) -> float:
    """Limit of the coupling ``tag``: the nonlocal coupling evaluated at V_o = v_o(0).

    ``rho_max``/``v0`` are tuples over the outgoing roads; ``q`` is ``(q_self, q_other)``.
    """
    if tag == "one_to_one":
        return coupling_one_to_one(rho, rho_max[0], v0[0])
    if tag == "one_to_two_maxflux":
        return coupling_one_to_two_maxflux(rho, alpha, rho_max, v0)
    if tag == "one_to_two_distribution":
        return coupling_one_to_two_distribution(rho, alpha, rho_max, v0)
    if tag == "two_to_one_maxflux":
        return coupling_two_to_one_maxflux(rho, rho_other, q[0], rho_max[0], v0[0])
    if tag == "two_to_one_priority":
        return coupling_two_to_one_priority(rho, rho_other, q[0], q[1], rho_max[0], v0[0])
    raise ValueError(f"unknown coupling {tag!r}")


class LimitScheme(_GridScheme):
    """Upwind scheme for the production-type limit models.

    Roads ending at a junction carry the limit coupling flux (nondecreasing in rho,
    so the upwind value is the Godunov flux); terminal roads carry rho * v(0).
    """

    model = "limit"

    def fluxes(self, rho: dict):
        from .scheme import Fluxes

        face, influx = {}, {}
        b_in = b_out = 0.0
        for e in self.road_ids:
            if not self.has_down[e]:
                face[e] = rho[e] * self.v_max[e]
        records = {}
        for junc in self.net.junctions:
            tag = core.TAG_CODES[junc.coupling]
            outs = junc.outgoing
            v0 = [self.v_max[o] for o in outs]
            exits, entries = {}, {}
            if len(junc.incoming) == 2:
                q = junc.priority
                e1, e2 = junc.incoming
                last = {e1: float(rho[e1][-1]), e2: float(rho[e2][-1])}
                for idx, (e, other) in enumerate(((e1, e2), (e2, e1))):
                    va = np.full(len(rho[e]), v0[0])
                    params = (self.rho_max[outs[0]], 0.0, 0.0, 0.0, q[idx], q[1 - idx], last[other])
                    face[e] = core.coupling(tag, rho[e], va, va, params)
                    exits[e] = float(face[e][-1])
                entries[outs[0]] = exits[e1] + exits[e2]
            else:
                e = junc.incoming[0]
                va = np.full(len(rho[e]), v0[0])
                vb = np.full(len(rho[e]), v0[-1])
                alpha = junc.distribution or (1.0, 0.0)
                rb = self.rho_max[outs[-1]]
                params = (self.rho_max[outs[0]], rb, alpha[0], alpha[1], 0.0, 0.0, 0.0)
                face[e] = core.coupling(tag, rho[e], va, vb, params)
                exits[e] = float(face[e][-1])
                r_last = float(rho[e][-1])
                if len(outs) == 1:
                    entries[outs[0]] = exits[e]
                elif junc.coupling == "one_to_two_maxflux":
                    for k, o in enumerate(outs):
                        entries[o] = min(alpha[k] * r_last, self.rho_max[o]) * v0[k]
                else:
                    for k, o in enumerate(outs):
                        entries[o] = alpha[k] * exits[e]
            influx.update(entries)
            records[junc.id] = (exits, entries)
        for e in self.road_ids:
            if not self.has_up[e]:
                influx[e] = float(face[e][0])
                b_in += influx[e]
            if not self.has_down[e]:
                b_out += float(face[e][-1])
        return Fluxes(face=face, influx=influx, cell=face, junction=records, boundary_in=b_in, boundary_out=b_out)


def simulate_limit(net: Network, dx: float, rho0: dict, T: float, cfl_factor: float = 0.5, snapshot_times=()) -> Trajectory:
    scheme = LimitScheme(net, dx)
    dt = cfl_factor * dx / net.v_norm
    return run(scheme, State(0.0, rho0), T, lambda s: dt, snapshot_times, check=False, model="limit")


# ---------------------------------------------------------------------------
# exact solutions of the limit model f(rho) = v * min(rho, c)


def riemann_limit_1to1(rho_L: float, rho_R: float, rho_max2: float, v2_0: float, t: float, x):
    """Entropy solution of the 1-to-1 limit problem with a jump at x = 0."""
    x = np.asarray(x, dtype=float)
    if rho_L < 0 or rho_R < 0 or rho_R > rho_max2 + 1e-12:
        raise DomainError("Riemann data outside the admissible range")
    if t <= 0:
        return np.where(x < 0, rho_L, rho_R)
    c, v = rho_max2, v2_0
    if rho_L <= c:
        # both states on the linear branch: transport with speed v
        return np.where(x < v * t, rho_L, rho_R)
    # stationary contact rho_L | c at x = 0, then c | rho_R moving with speed v
    right_speed = v if rho_R < c else 0.0
    return np.where(x < 0, rho_L, np.where(x < right_speed * t, c, rho_R))


def _limit_flux(rho, c, v):
    return v * min(rho, c)


def _riemann_waves(rl, rr, c, v):
    """Waves (speed, left, right) of the Riemann problem for v * min(rho, c)."""
    if rl == rr:
        return []
    if rl < rr:
        speed = (_limit_flux(rr, c, v) - _limit_flux(rl, c, v)) / (rr - rl)
        return [(speed, rl, rr)]
    # decreasing jump: rarefaction, split at the kink
    if rl > c > rr:
        return [(0.0, rl, c), (v, c, rr)]
    return [((_limit_flux(rl, c, v) - _limit_flux(rr, c, v)) / (rl - rr), rl, rr)]


def front_tracking(breaks, states, c: float, v: float, t_end: float):
    """Exact solution of rho_t + (v min(rho, c))_x = 0 for piecewise-constant data.

    ``states[i]`` holds on (breaks[i-1], breaks[i]). Returns ``(positions, states)``
    of the solution at ``t_end`` in the same format.
    """
    if len(states) != len(breaks) + 1:
        raise ValueError("need one more state than breakpoints")
    fronts = []  # [x, speed, left, right]
    for xb, rl, rr in zip(breaks, states[:-1], states[1:]):
        for s, a, b in _riemann_waves(rl, rr, c, v):
            fronts.append([float(xb), s, a, b])
    t = 0.0
    while True:
        best = None
        for i in range(len(fronts) - 1):
            x1, s1 = fronts[i][0], fronts[i][1]
            x2, s2 = fronts[i + 1][0], fronts[i + 1][1]
            if s1 > s2:
                dt = max((x2 - x1) / (s1 - s2), 0.0)
                if best is None or dt < best[0]:
                    best = (dt, i)
        if best is None or t + best[0] >= t_end:
            break
        dt, i = best
        for f in fronts:
            f[0] += f[1] * dt
        t += dt
        xm = fronts[i + 1][0]
        left, right = fronts[i][2], fronts[i + 1][3]
        new = [[xm, s, a, b] for s, a, b in _riemann_waves(left, right, c, v)]
        fronts[i : i + 2] = new
    for f in fronts:
        f[0] += f[1] * (t_end - t)
    positions = [f[0] for f in fronts]
    out_states = [states[0]] + [f[3] for f in fronts]
    return positions, out_states


def piecewise_cell_averages(positions, states, edges) -> np.ndarray:
    """Cell averages over ``edges`` of a piecewise-constant profile."""
    edges = np.asarray(edges, dtype=float)
    bounds = [-np.inf] + list(positions) + [np.inf]
    out = np.zeros(len(edges) - 1)
    for lo_b, hi_b, val in zip(bounds[:-1], bounds[1:], states):
        lo = np.clip(edges[:-1], lo_b, hi_b)
        hi = np.clip(edges[1:], lo_b, hi_b)
        out += val * np.maximum(hi - lo, 0.0)
    return out / np.diff(edges)


__all__ = [
    "DemandSupply",
    "demand",
    "supply",
    "godunov_flux",
    "junction_fluxes_ds",
    "local_junction_fluxes",
    "LocalScheme",
    "simulate_local",
    "limit_flux_1to1",
    "limit_coupling_flux",
    "LimitScheme",
    "simulate_limit",
    "riemann_limit_1to1",
    "front_tracking",
    "piecewise_cell_averages",
    "ConfigurationError",
]
