"""Traffic performance measures and solution-comparison diagnostics.

All time integrals use the left rectangle rule over the recorded step sizes:
the quantity recorded at the start of step ``n`` is weighted by ``dts[n]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import Network

RATIO_FLOOR = 1e-12


def _physical_columns(traj, roads=None):
    if roads is None:
        roads = [e for e in traj.road_ids if not traj.artificial[e]]
    return [traj.road_ids.index(e) for e in roads], list(roads)


def travel_time_per_road(traj, roads=None) -> dict:
    cols, roads = _physical_columns(traj, roads)
    if traj.n_steps == 0:
        return {e: 0.0 for e in roads}
    per = traj.dts @ traj.mass[:, cols]
    return {e: float(v) for e, v in zip(roads, per)}


def total_travel_time(traj, roads=None) -> float:
    """Time integral of the vehicles on ``roads`` (default: every non-artificial road)."""
    return float(sum(travel_time_per_road(traj, roads).values()))


def exit_flux_series(traj, road: int) -> np.ndarray:
    """Recorded flux through the downstream end of ``road`` at every step."""
    for exits, _ in traj.junction_flux.values():
        if road in exits:
            return np.asarray(exits[road], dtype=float)
    raise KeyError(f"no junction records the exit flux of road {road}")


def outflow(traj, road: int = None) -> float:
    """Vehicles that left ``road`` through its downstream end.

    By default the last non-artificial road feeding a terminal artificial road is
    used (road 7 of the diamond); without such a road the total boundary outflux.
    """
    if traj.n_steps == 0:
        return 0.0
    if road is None:
        road = _default_exit_road(traj)
    if road is None:
        return float(traj.dts @ traj.boundary_out)
    return float(traj.dts @ exit_flux_series(traj, road))


def _default_exit_road(traj):
    candidates = []
    for exits, entries in traj.junction_flux.values():
        if any(traj.artificial[o] for o in entries) and len(exits) == 1:
            (e,) = exits
            if not traj.artificial[e]:
                candidates.append(e)
    return max(candidates) if candidates else None


def congestion_per_road(traj, roads=None) -> dict:
    cols, roads = _physical_columns(traj, roads)
    if traj.n_steps == 0:
        return {e: 0.0 for e in roads}
    clamped = np.maximum(traj.excess[:, cols], 0.0)
    per = traj.dts @ clamped
    return {e: float(v) for e, v in zip(roads, per)}


def congestion(traj, roads=None) -> float:
    """Time integral of the clamped per-road excess of density over flux / v_ref."""
    return float(sum(congestion_per_road(traj, roads).values()))


def actual_split_ratios(traj, junction_id) -> dict:
    """Observed ratios at one junction, NaN where the reference flux is below 1e-12.

    Diverges: influx of each outgoing road over the exit flux of the incoming road,
    keyed by outgoing road. Merges: exit flux of each incoming road over the influx
    of the outgoing road, keyed by incoming road. 1-to-1 junctions give no ratios.
    """
    exits, entries = traj.junction_flux[junction_id]
    if len(entries) == 2:
        (e,) = exits
        num, den = entries, np.asarray(exits[e], dtype=float)
    elif len(exits) == 2:
        (o,) = entries
        num, den = exits, np.asarray(entries[o], dtype=float)
    else:
        return {}
    out = {}
    with np.errstate(divide="ignore", invalid="ignore"):
        for road, series in num.items():
            r = np.asarray(series, dtype=float) / den
            out[road] = np.where(np.abs(den) < RATIO_FLOOR, np.nan, r)
    return out


def all_split_ratios(traj) -> dict:
    return {jid: r for jid in traj.junction_flux if (r := actual_split_ratios(traj, jid))}


def l1_distance(traj_a, traj_b, road: int, time: float) -> float:
    """Discrete L1 distance on ``road`` at the snapshots nearest to ``time``."""
    if traj_a.dx != traj_b.dx:
        raise ValueError(f"grid mismatch: dx {traj_a.dx} vs {traj_b.dx}")
    a = np.asarray(traj_a.snapshot(time)[road])
    b = np.asarray(traj_b.snapshot(time)[road])
    if a.shape != b.shape:
        raise ValueError(f"grid mismatch on road {road}: {a.shape[0]} vs {b.shape[0]} cells")
    return float(np.sum(np.abs(a - b)) * traj_a.dx)


def l1_profiles(a, b, dx: float) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"grid mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(np.abs(a - b)) * dx)


@dataclass
class TVBreakdown:
    incoming_interior: float
    outgoing_first: float
    junction_jumps: float
    outgoing_interior: float

    @property
    def total(self) -> float:
        return self.incoming_interior + self.outgoing_first + self.junction_jumps + self.outgoing_interior


def tv_seminorm(net: Network, rho: dict, breakdown: bool = False):
    """Total variation split into road-interior variation and junction jumps.

    Per road the within-road variation is counted once: roads leaving a junction
    contribute their first jump to ``outgoing_first`` and the rest to
    ``outgoing_interior``; all other roads go to ``incoming_interior``. Every
    junction adds |rho_o(first cell) - rho_i(last cell)| for each incoming/outgoing pair.
    """
    inc = first = jumps = out = 0.0
    for r in net.roads:
        d = np.abs(np.diff(np.asarray(rho[r.id], dtype=float)))
        if net.upstream_junction(r.id) is not None:
            first += float(d[:1].sum())
            out += float(d[1:].sum())
        else:
            inc += float(d.sum())
    for junc in net.junctions:
        for o in junc.outgoing:
            for i in junc.incoming:
                jumps += abs(float(rho[o][0]) - float(rho[i][-1]))
    tv = TVBreakdown(inc, first, jumps, out)
    return tv if breakdown else tv.total


def mass_balance_error(traj) -> float:
    """|change of total mass - time integral of (boundary influx - boundary outflux)|."""
    m0 = traj.initial_state.total_mass(traj.dx)
    m1 = traj.final_state.total_mass(traj.dx)
    net_flow = float(traj.dts @ (traj.boundary_in - traj.boundary_out)) if traj.n_steps else 0.0
    return abs((m1 - m0) - net_flow)


@dataclass
class MeasureReport:
    total_travel_time: float
    outflow: float
    congestion: float
    travel_time_by_road: dict = field(default_factory=dict)
    congestion_by_road: dict = field(default_factory=dict)
    ratios: dict = field(default_factory=dict)

    def scalars(self) -> dict:
        out = {"outflow": self.outflow, "total_travel_time": self.total_travel_time, "congestion": self.congestion}
        for e, v in sorted(self.travel_time_by_road.items()):
            out[f"total_travel_time_road_{e}"] = v
        for e, v in sorted(self.congestion_by_road.items()):
            out[f"congestion_road_{e}"] = v
        return out


def measure_report(traj, roads=None, exit_road: int = None, ttt_roads=None) -> MeasureReport:
    """All measures of one run.

    ``roads`` limits every per-road measure; ``ttt_roads`` further restricts the
    roads summed into the total travel time (the per-road breakdown keeps all).
    """
    ttt = travel_time_per_road(traj, roads)
    cm = congestion_per_road(traj, roads)
    summed = ttt if ttt_roads is None else {e: ttt[e] for e in ttt_roads}
    return MeasureReport(
        total_travel_time=float(sum(summed.values())),
        outflow=outflow(traj, exit_road),
        congestion=float(sum(cm.values())),
        travel_time_by_road=ttt,
        congestion_by_road=cm,
        ratios=all_split_ratios(traj),
    )
