"""Upwind finite-volume scheme for nonlocal conservation laws on road networks."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import core
from .couplings import (
    coupling_one_to_one,
    coupling_one_to_two_distribution,
    coupling_one_to_two_maxflux,
    coupling_two_to_one_maxflux,
    coupling_two_to_one_priority,
    discrete_velocity,
)
from .kernels import QuadratureWeights
from .network import ConfigurationError, Network, n_cells

log = logging.getLogger(__name__)

BOUND_TOL = 1e-12


class SimulationError(RuntimeError):
    """Raised when a step leaves the invariant region (usually a CFL violation)."""


@dataclass(frozen=True)
class GridSpec:
    dx: float
    n_eta: int
    cells_per_road: dict

    @classmethod
    def build(cls, net: Network, dx: float, n_eta: int) -> "GridSpec":
        cells = {}
        for road in net.roads:
            n = n_cells(road.length, dx)
            if n < n_eta + 1:
                raise ConfigurationError(f"road {road.id} has {n} cells, fewer than the look-ahead of {n_eta} + 1")
            cells[road.id] = n
        return cls(dx=float(dx), n_eta=int(n_eta), cells_per_road=cells)

    def centers(self, net: Network) -> dict:
        return {r.id: r.a + (np.arange(self.cells_per_road[r.id]) + 0.5) * self.dx for r in net.roads}


@dataclass
class State:
    time: float
    rho: dict

    def copy(self) -> "State":
        return State(self.time, {k: v.copy() for k, v in self.rho.items()})

    def max_density(self) -> float:
        return max((float(v.max()) for v in self.rho.values() if v.size), default=0.0)

    def total_mass(self, dx: float) -> float:
        return float(sum(v.sum() for v in self.rho.values()) * dx)


@dataclass
class Fluxes:
    """Interface fluxes of one evaluation.

    ``face[e][i]`` is the flux through the right face of cell ``i`` of road ``e``;
    ``influx[e]`` the flux through its left face. ``cell[e]`` is the per-cell flux
    used by the congestion measure. ``junction[jid]`` maps to two dicts giving the
    exit flux of each incoming road and the influx of each outgoing road.
    """

    face: dict
    influx: dict
    cell: dict
    junction: dict
    boundary_in: float
    boundary_out: float


@dataclass
class Trajectory:
    model: str
    road_ids: tuple
    dx: float
    times: np.ndarray
    dts: np.ndarray
    mass: np.ndarray
    excess: np.ndarray
    junction_flux: dict
    boundary_in: np.ndarray
    boundary_out: np.ndarray
    snapshots: dict
    snapshot_times: dict
    initial_state: State
    final_state: State
    artificial: dict
    x_centers: dict
    v_max: dict
    warnings: list = field(default_factory=list)

    @property
    def n_steps(self) -> int:
        return len(self.dts)

    @property
    def final_time(self) -> float:
        return self.final_state.time

    def snapshot(self, time: float) -> dict:
        """Stored snapshot nearest to ``time`` (final state included)."""
        candidates = dict(self.snapshot_times)
        candidates["__final__"] = self.final_state.time
        candidates["__initial__"] = self.initial_state.time
        key = min(candidates, key=lambda k: abs(candidates[k] - time))
        if key == "__final__":
            return self.final_state.rho
        if key == "__initial__":
            return self.initial_state.rho
        return self.snapshots[key]


def cfl_dt(net: Network, state: State, weights: QuadratureWeights, mode: str = "strict", adaptive: bool = False) -> float:
    """Largest stable time step.

    ``strict``: dx / (gamma_0 |v'| |rho| + 2 |v|); ``relaxed`` drops the factor 2.
    ``adaptive`` (or ``adaptive=True``) takes |rho| as the current largest cell
    density rather than the largest rho_max.
    """
    if mode == "adaptive":
        mode, adaptive = "strict", True
    if mode not in ("strict", "relaxed"):
        raise ValueError(f"unknown CFL mode {mode!r}")
    rho_norm = state.max_density() if adaptive else net.rho_norm
    factor = 2.0 if mode == "strict" else 1.0
    return weights.dx / (weights.gamma0 * net.dv_norm * rho_norm + factor * net.v_norm)


class NonlocalScheme:
    """Flux evaluation for the nonlocal network scheme on a fixed grid."""

    model = "nonlocal"
    update = staticmethod(core.update)

    def __init__(self, net: Network, weights: QuadratureWeights):
        self.net = net
        self.weights = weights
        self.dx = weights.dx
        self.n_eta = weights.n_eta
        self.gamma = np.ascontiguousarray(weights.gamma, dtype=np.float64)
        self.grid = GridSpec.build(net, weights.dx, weights.n_eta)
        self.road_ids = tuple(r.id for r in net.roads)
        self.v_max = {r.id: r.velocity_law.v_max for r in net.roads}
        self.rho_max = {r.id: r.velocity_law.rho_max for r in net.roads}
        self.has_down = {r.id: net.downstream_junction(r.id) is not None for r in net.roads}
        self.has_up = {r.id: net.upstream_junction(r.id) is not None for r in net.roads}
        for junc in net.junctions:
            if junc.coupling not in core.TAG_CODES:
                raise ConfigurationError(f"junction {junc.id}: unknown coupling {junc.coupling!r}")
        self.warnings = []
        self._warned = set()

    def velocities(self, rho: dict) -> tuple:
        """Own-road velocities per cell and the ghost-cell velocity of source roads."""
        m = self.n_eta
        own, ghost = {}, {}
        for e in self.road_ids:
            w = self.v_max[e] * (1.0 - rho[e] / self.rho_max[e])
            pad = np.zeros(m) if self.has_down[e] else np.full(m, w[-1])
            ext = np.concatenate((w, pad))
            own[e] = core.lookahead(ext, self.gamma, len(w))
            if not self.has_up[e]:
                ghost[e] = float(np.dot(self.gamma, ext[:m]))
        return own, ghost

    def outgoing_velocities(self, rho: dict, road_id: int) -> np.ndarray:
        """V_{o,j} for j = -n_eta..-1 (cells of the incoming roads in front of the junction)."""
        m = self.n_eta
        w = self.v_max[road_id] * (1.0 - rho[road_id][:m] / self.rho_max[road_id])
        return core.lookahead(np.concatenate((np.zeros(m), w)), self.gamma, m)

    def _warn_once(self, key, message):
        if key not in self._warned:
            self._warned.add(key)
            self.warnings.append(message)
            log.warning(message)

    def fluxes(self, rho: dict) -> Fluxes:
        m = self.n_eta
        own, ghost = self.velocities(rho)
        face = {e: rho[e] * own[e] for e in self.road_ids}
        influx = {}
        b_in = b_out = 0.0
        for e in self.road_ids:
            if not self.has_up[e]:
                influx[e] = float(rho[e][0]) * ghost[e]
                b_in += influx[e]
            if not self.has_down[e]:
                b_out += float(face[e][-1])

        records = {}
        for junc in self.net.junctions:
            tag = core.TAG_CODES[junc.coupling]
            outs = junc.outgoing
            W = [self.outgoing_velocities(rho, o) for o in outs]
            exits, entries = {}, {}
            if len(outs) == 1:
                o = outs[0]
                rmax_o = self.rho_max[o]
                if len(junc.incoming) == 1:
                    e = junc.incoming[0]
                    g = core.coupling(tag, np.ascontiguousarray(rho[e][-m:]), W[0], W[0], (rmax_o, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0))
                    face[e][-m:] += g
                    exits[e] = float(face[e][-1])
                    entries[o] = exits[e]
                else:
                    q = junc.priority
                    e1, e2 = junc.incoming
                    last = {e1: float(rho[e1][-1]), e2: float(rho[e2][-1])}
                    for idx, (e, other) in enumerate(((e1, e2), (e2, e1))):
                        if junc.coupling == "two_to_one_priority" and last[other] <= 0.0:
                            self._warn_once(
                                ("prio", junc.id, e),
                                f"junction {junc.id}: vanishing boundary density on road {other} blocks road {e}",
                            )
                        params = (rmax_o, 0.0, 0.0, 0.0, q[idx], q[1 - idx], last[other])
                        g = core.coupling(tag, np.ascontiguousarray(rho[e][-m:]), W[0], W[0], params)
                        face[e][-m:] += g
                        exits[e] = float(face[e][-1])
                    entries[o] = exits[e1] + exits[e2]
            else:
                e = junc.incoming[0]
                a, b = outs
                alpha = junc.distribution
                params = (self.rho_max[a], self.rho_max[b], alpha[0], alpha[1], 0.0, 0.0, 0.0)
                g = core.coupling(tag, np.ascontiguousarray(rho[e][-m:]), W[0], W[1], params)
                face[e][-m:] += g
                exits[e] = float(face[e][-1])
                if junc.coupling == "one_to_two_maxflux":
                    r_last = float(rho[e][-1])
                    for k, o in enumerate(outs):
                        entries[o] = min(alpha[k] * r_last, self.rho_max[o]) * float(W[k][-1])
                else:
                    for k, o in enumerate(outs):
                        entries[o] = alpha[k] * exits[e]
            influx.update(entries)
            records[junc.id] = (exits, entries)
        return Fluxes(face=face, influx=influx, cell=face, junction=records, boundary_in=b_in, boundary_out=b_out)

    def step(self, state: State, dt: float, fluxes: Fluxes = None) -> State:
        fl = fluxes if fluxes is not None else self.fluxes(state.rho)
        lam = dt / self.dx
        new = {e: self.update(state.rho[e], fl.influx[e], fl.face[e], lam) for e in self.road_ids}
        check_bounds(new, self.rho_max, state.time + dt)
        return State(state.time + dt, new)


def check_bounds(rho: dict, rho_max: dict, time: float):
    for e, r in rho.items():
        lo, hi = float(r.min()), float(r.max())
        if lo < -BOUND_TOL or hi > rho_max[e] + BOUND_TOL:
            raise SimulationError(
                f"density left [0, {rho_max[e]}] on road {e} at t={time:.6g}: min={lo:.3e}, max={hi:.6g}"
                " (time step violates the CFL condition?)"
            )


def numerical_flux(scheme: NonlocalScheme, state: State, road_id: int, j: int, frame: str = "incoming") -> float:
    """Flux F_{e,j} in a junction frame, computed cell by cell from the scalar couplings.

    ``frame='incoming'``: j < 0 counts back from the road's downstream junction.
    ``frame='outgoing'``: j >= 0 counts from the upstream junction and j = -1
    gives the influx of the road.
    """
    net, w = scheme.net, scheme.weights
    rho = state.rho
    road = net.road(road_id)
    n = len(rho[road_id])
    if frame == "outgoing" and j == -1:
        junc = net.upstream_junction(road_id)
        if junc is None:
            raise IndexError(f"road {road_id} has no upstream junction")
        return _junction_influx(scheme, state, junc, road_id)
    cell = j if frame == "outgoing" else n + j
    if not 0 <= cell < n:
        raise IndexError(f"cell {j} outside road {road_id}")
    junc = net.downstream_junction(road_id)
    jj = cell - n
    if junc is None:
        # terminal road: look-ahead runs onto constant-extrapolated ghost cells
        ext = np.concatenate((rho[road_id], np.full(w.n_eta, rho[road_id][-1])))
        V = discrete_velocity(road, "outgoing", cell, ext, w)
        return float(rho[road_id][cell]) * V
    V = discrete_velocity(road, "incoming", jj, rho[road_id], w)
    return float(rho[road_id][cell]) * V + _coupling_term(scheme, state, junc, road_id, jj)


def _vout(scheme, state, road_id, j):
    return discrete_velocity(scheme.net.road(road_id), "outgoing", j, state.rho[road_id], scheme.weights)


def _coupling_term(scheme, state, junc, road_id, j):
    rho = state.rho
    r = float(rho[road_id][j])
    rmax = scheme.rho_max
    if junc.coupling == "one_to_one":
        o = junc.outgoing[0]
        return coupling_one_to_one(r, rmax[o], _vout(scheme, state, o, j))
    if junc.coupling in ("one_to_two_maxflux", "one_to_two_distribution"):
        a, b = junc.outgoing
        V = (_vout(scheme, state, a, j), _vout(scheme, state, b, j))
        fn = coupling_one_to_two_maxflux if junc.coupling == "one_to_two_maxflux" else coupling_one_to_two_distribution
        return fn(r, junc.distribution, (rmax[a], rmax[b]), V)
    o = junc.outgoing[0]
    idx = junc.incoming.index(road_id)
    other = junc.incoming[1 - idx]
    q = junc.priority
    V3 = _vout(scheme, state, o, j)
    r_other = float(rho[other][-1])
    if junc.coupling == "two_to_one_maxflux":
        return coupling_two_to_one_maxflux(r, r_other, q[idx], rmax[o], V3)
    return coupling_two_to_one_priority(r, r_other, q[idx], q[1 - idx], rmax[o], V3)


def _junction_influx(scheme, state, junc, road_id):
    rho = state.rho
    if junc.coupling == "one_to_two_maxflux":
        e = junc.incoming[0]
        k = junc.outgoing.index(road_id)
        V = _vout(scheme, state, road_id, -1)
        return min(junc.distribution[k] * float(rho[e][-1]), scheme.rho_max[road_id]) * V
    if junc.coupling == "one_to_two_distribution":
        e = junc.incoming[0]
        k = junc.outgoing.index(road_id)
        return junc.distribution[k] * _coupling_term(scheme, state, junc, e, -1)
    return sum(_coupling_term(scheme, state, junc, e, -1) for e in junc.incoming)


def run(scheme, state0: State, T: float, dt_fn, snapshot_times=(), check: bool = True, model: str = None) -> Trajectory:
    """Advance ``state0`` to time ``T`` recording everything the measures need.

    ``dt_fn(state)`` returns the admissible step; the final step is shortened to
    land on ``T``. Snapshots use the stored state nearest to each requested time.
    """
    dx = scheme.dx
    ids = scheme.road_ids
    v_ref = np.array([0.5 * scheme.v_max[e] for e in ids])
    times, dts, mass, excess, b_in, b_out = [], [], [], [], [], []
    jflux = {j.id: ({e: [] for e in j.incoming}, {o: [] for o in j.outgoing}) for j in scheme.net.junctions}

    pending = sorted(float(s) for s in snapshot_times if 0.0 <= float(s) <= T)
    snaps, snap_t = {}, {}
    state = State(float(state0.time), {e: np.ascontiguousarray(state0.rho[e], dtype=np.float64) for e in ids})
    initial = state.copy()
    while pending and pending[0] <= state.time:
        s = pending.pop(0)
        snaps[s], snap_t[s] = state.copy().rho, state.time

    end_tol = 1e-12 * max(1.0, T)
    while T - state.time > end_tol:
        dt = min(dt_fn(state), T - state.time)
        fl = scheme.fluxes(state.rho)
        times.append(state.time)
        dts.append(dt)
        mass.append([state.rho[e].sum() * dx for e in ids])
        excess.append([np.sum(state.rho[e] - fl.cell[e] / v_ref[k]) * dx for k, e in enumerate(ids)])
        b_in.append(fl.boundary_in)
        b_out.append(fl.boundary_out)
        for jid, (exits, entries) in fl.junction.items():
            for e, val in exits.items():
                jflux[jid][0][e].append(val)
            for o, val in entries.items():
                jflux[jid][1][o].append(val)
        lam = dt / dx
        new = {e: scheme.update(state.rho[e], fl.influx[e], fl.face[e], lam) for e in ids}
        t_new = state.time + dt
        if T - t_new <= end_tol:
            t_new = T
        if check:
            check_bounds(new, scheme.rho_max, t_new)
        new_state = State(t_new, new)
        while pending and pending[0] <= t_new:
            s = pending.pop(0)
            pick = state if abs(s - state.time) < abs(t_new - s) else new_state
            snaps[s], snap_t[s] = pick.copy().rho, pick.time
        state = new_state

    for s in pending:
        snaps[s], snap_t[s] = state.copy().rho, state.time
    n_roads = len(ids)
    return Trajectory(
        model=model or scheme.model,
        road_ids=ids,
        dx=dx,
        times=np.asarray(times, dtype=float),
        dts=np.asarray(dts, dtype=float),
        mass=np.asarray(mass, dtype=float).reshape(-1, n_roads),
        excess=np.asarray(excess, dtype=float).reshape(-1, n_roads),
        junction_flux={
            jid: ({e: np.asarray(v) for e, v in ex.items()}, {o: np.asarray(v) for o, v in en.items()})
            for jid, (ex, en) in jflux.items()
        },
        boundary_in=np.asarray(b_in, dtype=float),
        boundary_out=np.asarray(b_out, dtype=float),
        snapshots=snaps,
        snapshot_times=snap_t,
        initial_state=initial,
        final_state=state,
        artificial={r.id: r.is_artificial for r in scheme.net.roads},
        x_centers=scheme.grid.centers(scheme.net),
        v_max=dict(scheme.v_max),
        warnings=list(getattr(scheme, "warnings", [])),
    )


def simulate(
    net: Network,
    weights: QuadratureWeights,
    rho0: dict,
    T: float,
    cfl: str = "adaptive",
    snapshot_times=(),
    model: str = "nonlocal",
) -> Trajectory:
    """Run the nonlocal scheme from cell averages ``rho0`` up to time ``T``."""
    scheme = NonlocalScheme(net, weights)
    for e in scheme.road_ids:
        if len(rho0[e]) != scheme.grid.cells_per_road[e]:
            raise ConfigurationError(f"initial data for road {e} has {len(rho0[e])} cells, expected {scheme.grid.cells_per_road[e]}")
    check_bounds({e: np.asarray(rho0[e], dtype=float) for e in scheme.road_ids}, scheme.rho_max, 0.0)

    def dt_fn(state):
        return cfl_dt(net, state, weights, cfl)

    return run(scheme, State(0.0, rho0), T, dt_fn, snapshot_times, model=model)
