"""Scenario configuration (JSON), the built-in diamond network and CSV output."""
from __future__ import annotations

import copy
import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .kernels import Kernel, eta_cells
from .network import ConfigurationError, Junction, Network, Road, VelocityLaw

MODELS = (
    "nonlocal-maxflux",
    "nonlocal-distribution",
    "local-maxflux",
    "local-distribution",
    "limit",
    "limit-maxflux",
    "limit-distribution",
)

_FAMILY_COUPLINGS = {
    "maxflux": {(1, 1): "one_to_one", (1, 2): "one_to_two_maxflux", (2, 1): "two_to_one_maxflux"},
    "distribution": {(1, 1): "one_to_one", (1, 2): "one_to_two_distribution", (2, 1): "two_to_one_priority"},
}

TOP_LEVEL_KEYS = ("roads", "junctions", "kernel", "grid", "initial", "model", "horizon", "outputs")


class ScenarioError(ConfigurationError):
    """Malformed or inconsistent scenario file."""


def model_family(model: str) -> str:
    if model == "limit":
        return "maxflux"
    return model.split("-", 1)[1]


def model_kind(model: str) -> str:
    return model.split("-", 1)[0]


@dataclass
class ScenarioConfig:
    """Everything needed to run one experiment.

    ``roads``: list of ``{id, length, v_max, rho_max, artificial}``. Artificial roads
    are truncated to ``grid['artificial_length']`` and their ``length`` is ignored.
    ``junctions``: list of ``{id, incoming, outgoing, alpha?, priority?, coupling?}``.
    ``initial``: road id (as string) -> constant or list of ``[start, end, value]``
    segments in road-local coordinates.
    """

    roads: list
    junctions: list
    kernel: dict
    grid: dict
    initial: dict
    model: str = "nonlocal-maxflux"
    horizon: dict = field(default_factory=lambda: {"T": 20.0, "cfl": "adaptive", "snapshots": []})
    outputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {k: copy.deepcopy(getattr(self, k)) for k in TOP_LEVEL_KEYS}

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ScenarioError("scenario must be a JSON object")
        unknown = set(data) - set(TOP_LEVEL_KEYS)
        if unknown:
            raise ScenarioError(f"unknown top-level keys: {sorted(unknown)}")
        for key in ("roads", "junctions", "kernel", "grid", "initial"):
            if key not in data:
                raise ScenarioError(f"{key}: missing")
        cfg = cls(
            roads=[_parse_road(r, i) for i, r in enumerate(_as_list(data["roads"], "roads"))],
            junctions=[_parse_junction(j, i) for i, j in enumerate(_as_list(data["junctions"], "junctions"))],
            kernel=_parse_kernel(data["kernel"]),
            grid=_parse_grid(data["grid"]),
            initial=_parse_initial(data["initial"]),
            model=str(data.get("model", "nonlocal-maxflux")),
            horizon=_parse_horizon(data.get("horizon", {})),
            outputs=dict(data.get("outputs", {})),
        )
        cfg.check()
        return cfg

    def check(self):
        if self.model not in MODELS:
            raise ScenarioError(f"model: unknown model {self.model!r}; expected one of {', '.join(MODELS)}")
        try:
            eta_cells(self.kernel["eta"], self.grid["dx"])
        except ConfigurationError as exc:
            raise ScenarioError(f"kernel.eta / grid.dx: {exc}") from None
        ids = {r["id"] for r in self.roads}
        for key in self.initial:
            if int(key) not in ids:
                raise ScenarioError(f"initial.{key}: unknown road")
        for r in self.roads:
            for seg in self.segments(r["id"]):
                if not 0.0 <= seg[2] <= r["rho_max"]:
                    raise ScenarioError(f"initial.{r['id']}: density {seg[2]} outside [0, {r['rho_max']}]")

    def segments(self, road_id: int) -> list:
        spec = self.initial.get(str(road_id), 0.0)
        length = self.road_length(road_id)
        if isinstance(spec, (int, float)):
            return [[0.0, length, float(spec)]]
        return [[float(a), float(b), float(v)] for a, b, v in spec]

    def road_length(self, road_id: int) -> float:
        for r in self.roads:
            if r["id"] == road_id:
                return self.grid["artificial_length"] if r["artificial"] else r["length"]
        raise KeyError(road_id)

    def with_overrides(self, **kw) -> "ScenarioConfig":
        """Copy with ``eta``, ``dx``, ``model``, ``T``, ``cfl`` or ``out`` replaced."""
        data = self.to_dict()
        if kw.get("eta") is not None:
            data["kernel"]["eta"] = float(kw["eta"])
        if kw.get("dx") is not None:
            data["grid"]["dx"] = float(kw["dx"])
        if kw.get("model") is not None:
            data["model"] = kw["model"]
        if kw.get("T") is not None:
            data["horizon"]["T"] = float(kw["T"])
        if kw.get("cfl") is not None:
            data["horizon"]["cfl"] = kw["cfl"]
        if kw.get("out") is not None:
            data["outputs"]["dir"] = kw["out"]
        return ScenarioConfig.from_dict(data)


def _as_list(value, name):
    if not isinstance(value, list):
        raise ScenarioError(f"{name}: expected a list")
    return value


def _require(obj, key, where):
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where}: expected an object")
    if key not in obj:
        raise ScenarioError(f"{where}.{key}: missing")
    return obj[key]


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _parse_road(r, i):
    where = f"roads[{i}]"
    out = {
        "id": int(_require(r, "id", where)),
        "v_max": _number(_require(r, "v_max", where), f"{where}.v_max"),
        "rho_max": _number(_require(r, "rho_max", where), f"{where}.rho_max"),
        "artificial": bool(r.get("artificial", False)),
    }
    if out["artificial"]:
        out["length"] = None
    else:
        out["length"] = _number(_require(r, "length", where), f"{where}.length")
    return out


def _parse_junction(j, i):
    where = f"junctions[{i}]"
    out = {
        "id": int(_require(j, "id", where)),
        "incoming": [int(x) for x in _require(j, "incoming", where)],
        "outgoing": [int(x) for x in _require(j, "outgoing", where)],
    }
    if len(out["outgoing"]) == 2:
        out["alpha"] = [_number(a, f"{where}.alpha") for a in _require(j, "alpha", where)]
    if len(out["incoming"]) == 2:
        out["priority"] = [_number(q, f"{where}.priority") for q in _require(j, "priority", where)]
    if "coupling" in j:
        out["coupling"] = str(j["coupling"])
    return out


def _parse_kernel(k):
    out = {
        "family": str(_require(k, "family", "kernel")),
        "eta": _number(_require(k, "eta", "kernel"), "kernel.eta"),
    }
    if out["family"] == "tabulated":
        out["nodes"] = [_number(x, "kernel.nodes") for x in _require(k, "nodes", "kernel")]
        out["values"] = [_number(x, "kernel.values") for x in _require(k, "values", "kernel")]
    return out


def _parse_grid(g):
    return {
        "dx": _number(_require(g, "dx", "grid"), "grid.dx"),
        "artificial_length": _number(g.get("artificial_length", 2.0), "grid.artificial_length"),
    }


def _parse_initial(init):
    if not isinstance(init, dict):
        raise ScenarioError("initial: expected an object keyed by road id")
    out = {}
    for key, spec in init.items():
        where = f"initial.{key}"
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            out[str(int(key))] = float(spec)
        elif isinstance(spec, list):
            segs = []
            for seg in spec:
                if not isinstance(seg, list) or len(seg) != 3:
                    raise ScenarioError(f"{where}: segments are [start, end, value]")
                segs.append([_number(v, where) for v in seg])
            out[str(int(key))] = segs
        else:
            raise ScenarioError(f"{where}: expected a number or a list of segments")
    return out


def _parse_horizon(h):
    if not isinstance(h, dict):
        raise ScenarioError("horizon: expected an object")
    cfl = str(h.get("cfl", "adaptive"))
    if cfl not in ("adaptive", "strict", "relaxed"):
        raise ScenarioError(f"horizon.cfl: unknown mode {cfl!r}")
    return {
        "T": _number(h.get("T", 20.0), "horizon.T"),
        "cfl": cfl,
        "snapshots": [_number(s, "horizon.snapshots") for s in h.get("snapshots", [])],
    }


def builtin_diamond(eta: float = 0.5, model: str = "nonlocal-maxflux", T: float = 20.0, dx: float = 0.01,
                    artificial_length: float = 2.0) -> ScenarioConfig:
    """Nine-road diamond network: roads 0 and 8 are artificial, roads 1-7 have unit length."""
    rho0 = (0.4, 0.4, 0.4, 0.4, 0.8, 0.4, 0.8, 0.2, 0.2)
    v_max = (0.5, 0.5, 2.0, 2.0, 0.5, 2.0, 0.5, 1.0, 1.0)
    roads = [
        {"id": e, "length": None if e in (0, 8) else 1.0, "v_max": v_max[e], "rho_max": 1.0, "artificial": e in (0, 8)}
        for e in range(9)
    ]
    junctions = [
        {"id": 1, "incoming": [0], "outgoing": [1]},
        {"id": 2, "incoming": [1], "outgoing": [2, 3], "alpha": [0.5, 0.5]},
        {"id": 3, "incoming": [2], "outgoing": [4, 5], "alpha": [0.2, 0.8]},
        {"id": 4, "incoming": [3, 4], "outgoing": [6], "priority": [0.8, 0.2]},
        {"id": 5, "incoming": [5, 6], "outgoing": [7], "priority": [0.8, 0.2]},
        {"id": 6, "incoming": [7], "outgoing": [8]},
    ]
    cfg = ScenarioConfig(
        roads=roads,
        junctions=junctions,
        kernel={"family": "linear", "eta": float(eta)},
        grid={"dx": float(dx), "artificial_length": float(artificial_length)},
        initial={str(e): rho0[e] for e in range(9)},
        model=model,
        horizon={"T": float(T), "cfl": "adaptive", "snapshots": []},
        # reference travel times for this network sum roads 1-6 only
        outputs={"exit_road": 7, "ttt_roads": [1, 2, 3, 4, 5, 6]},
    )
    cfg.check()
    return cfg


def build_network(cfg: ScenarioConfig) -> Network:
    """Network with couplings chosen by the model family (junction ``coupling`` overrides)."""
    family = model_family(cfg.model)
    upstream = {o for j in cfg.junctions for o in j["outgoing"]}
    roads = []
    for r in cfg.roads:
        law = VelocityLaw(r["v_max"], r["rho_max"])
        length = cfg.road_length(r["id"])
        if r["artificial"] and r["id"] in upstream:
            a, b = 0.0, length
        elif r["artificial"]:
            a, b = -length, 0.0
        else:
            a, b = 0.0, length
        roads.append(Road(r["id"], a, b, law, r["artificial"]))
    junctions = []
    for j in cfg.junctions:
        shape = (len(j["incoming"]), len(j["outgoing"]))
        coupling = j.get("coupling") or _FAMILY_COUPLINGS[family].get(shape)
        if coupling is None:
            raise ScenarioError(f"junction {j['id']}: unsupported {shape[0]}-to-{shape[1]} junction")
        junctions.append(Junction(j["id"], j["incoming"], j["outgoing"], coupling,
                                  distribution=j.get("alpha"), priority=j.get("priority")))
    return Network(roads, junctions)


def build_kernel(cfg: ScenarioConfig) -> Kernel:
    k = cfg.kernel
    return Kernel(k["eta"], k["family"], tuple(k.get("nodes", ())) or None, tuple(k.get("values", ())) or None)


def cell_averages(segments, a: float, length: float, dx: float) -> np.ndarray:
    """Exact cell averages of piecewise-constant data given in road-local coordinates."""
    n = int(round(length / dx))
    edges = np.arange(n + 1) * dx
    edges[-1] = length
    width = np.diff(edges)
    out = np.zeros(n)
    exact = np.full(n, np.nan)
    for start, end, value in segments:
        lo = np.clip(edges[:-1], start, end)
        hi = np.clip(edges[1:], start, end)
        cover = np.maximum(hi - lo, 0.0)
        out += value * cover
        # cells inside one segment take its value without rounding
        exact[np.abs(cover - width) <= 1e-12 * width] = value
    out /= width
    return np.where(np.isnan(exact), out, exact)


def initial_state(cfg: ScenarioConfig, net: Network) -> dict:
    dx = cfg.grid["dx"]
    return {r.id: cell_averages(cfg.segments(r.id), r.a, r.length, dx) for r in net.roads}


def dumps(cfg: ScenarioConfig) -> str:
    """Canonical JSON text (sorted keys, fixed indentation)."""
    return json.dumps(cfg.to_dict(), sort_keys=True, indent=2) + "\n"


def save_scenario(cfg: ScenarioConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(cfg))


def load_scenario(path) -> ScenarioConfig:
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return ScenarioConfig.from_dict(data)


def write_results(traj, report, out_dir, ratios=None) -> dict:
    """Write snapshots, measures and split ratios as CSV; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "measures": os.path.join(out_dir, "measures.csv"),
        "ratios": os.path.join(out_dir, "ratios.csv"),
        "snapshots": [],
    }
    frames = [(traj.snapshot_times[s], traj.snapshots[s]) for s in sorted(traj.snapshots)]
    if not frames or not math.isclose(frames[-1][0], traj.final_time):
        frames.append((traj.final_time, traj.final_state.rho))
    for t, rho in frames:
        path = os.path.join(out_dir, f"snapshot_t{float(t):g}.csv")
        paths["snapshots"].append(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["road", "x", "rho"])
            for e in traj.road_ids:
                for x, r in zip(traj.x_centers[e], rho[e]):
                    w.writerow([e, repr(float(x)), repr(float(r))])
    with open(paths["measures"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "value"])
        for name, value in report.scalars().items():
            w.writerow([name, repr(float(value))])
    with open(paths["ratios"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "junction", "out_road", "ratio"])
        for jid, series in sorted((ratios or {}).items()):
            for road, values in sorted(series.items()):
                for t, r in zip(traj.times, values):
                    w.writerow([repr(float(t)), jid, road, "" if np.isnan(r) else repr(float(r))])
    return paths
