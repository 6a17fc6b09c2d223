"""Road network data model, velocity laws and assumption checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

TOL = 1e-12

COUPLING_TAGS = (
    "one_to_one",
    "one_to_two_maxflux",
    "one_to_two_distribution",
    "two_to_one_maxflux",
    "two_to_one_priority",
)

# (M, N) junction shape each coupling applies to
COUPLING_SHAPES = {
    "one_to_one": (1, 1),
    "one_to_two_maxflux": (1, 2),
    "one_to_two_distribution": (1, 2),
    "two_to_one_maxflux": (2, 1),
    "two_to_one_priority": (2, 1),
}


class DomainError(ValueError):
    """A density or parameter lies outside the admissible range."""


class ConfigurationError(ValueError):
    """The scenario cannot be discretised or simulated as configured."""


@dataclass(frozen=True)
class VelocityLaw:
    """Affine velocity law v(rho) = v_max * (1 - rho / rho_max)."""

    v_max: float
    rho_max: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "v_max", float(self.v_max))
        object.__setattr__(self, "rho_max", float(self.rho_max))

    @property
    def slope(self) -> float:
        """Sup norm of v'."""
        return self.v_max / self.rho_max

    def __call__(self, rho):
        return self.v_max * (1.0 - np.asarray(rho) / self.rho_max)


def eval_velocity(law: VelocityLaw, rho: float) -> float:
    if not (-TOL <= rho <= law.rho_max + TOL):
        raise DomainError(f"density {rho} outside [0, {law.rho_max}]")
    return float(min(max(law.v_max * (1.0 - rho / law.rho_max), 0.0), law.v_max))


@dataclass(frozen=True)
class Road:
    id: int
    a: float
    b: float
    velocity_law: VelocityLaw
    is_artificial: bool = False

    @property
    def length(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class Junction:
    """A vertex joining one or two incoming roads to one or two outgoing roads.

    ``distribution`` holds alpha_{1,o} for each outgoing road (1-to-2 only);
    ``priority`` holds q_{i,out} for each incoming road (2-to-1 only).
    """

    id: int
    incoming: tuple
    outgoing: tuple
    coupling: str
    distribution: Optional[tuple] = None
    priority: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "incoming", tuple(self.incoming))
        object.__setattr__(self, "outgoing", tuple(self.outgoing))
        m, n = len(self.incoming), len(self.outgoing)
        if m < 1 or n < 1 or m > 2 or n > 2 or m * n > 2:
            raise ConfigurationError(
                f"junction {self.id}: only 1-to-1, 1-to-2 and 2-to-1 junctions are supported, got {m}-to-{n}"
            )
        if self.distribution is not None:
            object.__setattr__(self, "distribution", tuple(float(a) for a in self.distribution))
        if self.priority is not None:
            object.__setattr__(self, "priority", tuple(float(q) for q in self.priority))

    @property
    def shape(self) -> tuple:
        return len(self.incoming), len(self.outgoing)


@dataclass(frozen=True)
class Network:
    roads: tuple
    junctions: tuple
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "roads", tuple(self.roads))
        object.__setattr__(self, "junctions", tuple(self.junctions))
        object.__setattr__(self, "_by_id", {r.id: r for r in self.roads})

    def road(self, road_id: int) -> Road:
        return self._by_id[road_id]

    def upstream_junction(self, road_id: int) -> Optional[Junction]:
        for junc in self.junctions:
            if road_id in junc.outgoing:
                return junc
        return None

    def downstream_junction(self, road_id: int) -> Optional[Junction]:
        for junc in self.junctions:
            if road_id in junc.incoming:
                return junc
        return None

    @property
    def v_norm(self) -> float:
        return max(r.velocity_law.v_max for r in self.roads)

    @property
    def dv_norm(self) -> float:
        return max(r.velocity_law.slope for r in self.roads)

    @property
    def rho_norm(self) -> float:
        return max(r.velocity_law.rho_max for r in self.roads)


def _is_connected(net: Network) -> bool:
    ids = [r.id for r in net.roads]
    if not ids:
        return True
    adj = {i: set() for i in ids}
    for junc in net.junctions:
        members = [r for r in junc.incoming + junc.outgoing if r in adj]
        for r in members:
            adj[r].update(members)
    seen, stack = {ids[0]}, [ids[0]]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(ids)


def validate_network(net: Network, eta: float) -> list:
    """Return a list of human-readable violations; empty when the network is admissible."""
    problems = []
    ids = [r.id for r in net.roads]
    if len(set(ids)) != len(ids):
        problems.append("duplicate road ids")
    for road in net.roads:
        law = road.velocity_law
        if not law.v_max > 0:
            problems.append(f"road {road.id}: v_max must be positive")
        if not law.rho_max > 0:
            problems.append(f"road {road.id}: rho_max must be positive")
        if not road.b > road.a:
            problems.append(f"road {road.id}: b must exceed a")
        if not road.is_artificial and not eta < road.length:
            problems.append(f"road {road.id}: eta={eta} must be smaller than the road length {road.length}")

    known = set(ids)
    n_in = {i: 0 for i in ids}
    n_out = {i: 0 for i in ids}
    for junc in net.junctions:
        members = junc.incoming + junc.outgoing
        if len(set(members)) != len(members):
            problems.append(f"junction {junc.id}: a road appears twice")
        for r in members:
            if r not in known:
                problems.append(f"junction {junc.id}: unknown road {r}")
        for r in junc.incoming:
            if r in n_in:
                n_in[r] += 1
        for r in junc.outgoing:
            if r in n_out:
                n_out[r] += 1

        m, n = junc.shape
        if junc.coupling not in COUPLING_SHAPES:
            problems.append(f"junction {junc.id}: unknown coupling {junc.coupling!r}")
        elif COUPLING_SHAPES[junc.coupling] != (m, n):
            problems.append(f"junction {junc.id}: coupling {junc.coupling} does not fit a {m}-to-{n} junction")

        if n == 2:
            alpha = junc.distribution
            if alpha is None or len(alpha) != 2:
                problems.append(f"junction {junc.id}: distribution needs one entry per outgoing road")
            else:
                if any(not 0.0 <= a <= 1.0 for a in alpha):
                    problems.append(f"junction {junc.id}: distribution entries must lie in [0, 1]")
                if abs(sum(alpha) - 1.0) > 1e-9:
                    problems.append(f"junction {junc.id}: distribution row sums to {sum(alpha)}, not 1")
                if junc.coupling == "one_to_two_distribution" and min(alpha) <= 0.0:
                    problems.append(f"junction {junc.id}: distribution coupling needs positive entries")
        if m == 2:
            q = junc.priority
            if q is None or len(q) != 2:
                problems.append(f"junction {junc.id}: priority needs one entry per incoming road")
            else:
                if any(not 0.0 < p < 1.0 for p in q):
                    problems.append(f"junction {junc.id}: priority entries must lie in (0, 1)")
                if abs(sum(q) - 1.0) > 1e-9:
                    problems.append(f"junction {junc.id}: priorities sum to {sum(q)}, not 1")

    for road in net.roads:
        if n_in[road.id] > 1 or n_out[road.id] > 1:
            problems.append(f"road {road.id}: attached to more than one junction at the same end")
        if road.is_artificial and n_in[road.id] + n_out[road.id] > 1:
            problems.append(f"road {road.id}: artificial roads touch at most one junction")

    if not _is_connected(net):
        problems.append("network is not connected")
    return problems


def is_integer_ratio(eta: float, dx: float, tol: float = 1e-9) -> bool:
    ratio = eta / dx
    return abs(ratio - round(ratio)) <= tol * max(1.0, ratio) and round(ratio) >= 1


def n_cells(length: float, dx: float) -> int:
    n = length / dx
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise ConfigurationError(f"road length {length} is not a multiple of dx={dx}")
    return int(round(n))


__all__ = [
    "COUPLING_TAGS",
    "ConfigurationError",
    "DomainError",
    "Junction",
    "Network",
    "Road",
    "VelocityLaw",
    "eval_velocity",
    "validate_network",
    "is_integer_ratio",
    "n_cells",
]
