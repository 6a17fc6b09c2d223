"""Nonlocal look-ahead kernels and their exact per-cell weights."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .network import ConfigurationError

log = logging.getLogger(__name__)

FAMILIES = ("linear", "constant", "tabulated")
_ALIASES = {"linear-decreasing": "linear", "linear_decreasing": "linear"}


@dataclass(frozen=True)
class Kernel:
    """Nonincreasing unit-mass kernel supported on [0, eta].

    ``family='tabulated'`` takes ``nodes`` (from 0 to eta) and ``values`` describing
    a piecewise-linear kernel; it is renormalised to unit mass if needed.
    """

    eta: float
    family: str = "linear"
    nodes: Optional[tuple] = None
    values: Optional[tuple] = None

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        object.__setattr__(self, "family", family)
        if family not in FAMILIES:
            raise ConfigurationError(f"unknown kernel family {self.family!r}")
        if not self.eta > 0:
            raise ConfigurationError("kernel eta must be positive")
        if family == "tabulated":
            self._check_table()

    def _check_table(self):
        if self.nodes is None or self.values is None or len(self.nodes) != len(self.values) or len(self.nodes) < 2:
            raise ConfigurationError("tabulated kernel needs matching nodes and values (at least two)")
        x = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.values, dtype=float)
        if abs(x[0]) > 1e-12 or abs(x[-1] - self.eta) > 1e-12 * max(1.0, self.eta):
            raise ConfigurationError("tabulated kernel nodes must span [0, eta]")
        if np.any(np.diff(x) <= 0):
            raise ConfigurationError("tabulated kernel nodes must be strictly increasing")
        if np.any(w < 0) or np.any(np.diff(w) > 0):
            raise ConfigurationError("tabulated kernel values must be nonnegative and nonincreasing")
        mass = float(np.sum(0.5 * (w[1:] + w[:-1]) * np.diff(x)))
        if mass <= 0:
            raise ConfigurationError("tabulated kernel has zero mass")
        if abs(mass - 1.0) > 1e-9:
            log.warning("tabulated kernel mass %.12g renormalised to 1", mass)
        object.__setattr__(self, "nodes", tuple(float(v) for v in x))
        object.__setattr__(self, "values", tuple(float(v) for v in w / mass))

    def omega(self, x):
        """Kernel values; zero outside [0, eta]."""
        x = np.asarray(x, dtype=float)
        inside = (x >= 0) & (x <= self.eta)
        if self.family == "linear":
            vals = 2.0 * (self.eta - x) / self.eta**2
        elif self.family == "constant":
            vals = np.full_like(x, 1.0 / self.eta)
        else:
            vals = np.interp(x, self.nodes, self.values)
        return np.where(inside, vals, 0.0)

    def cumulative(self, x):
        """Exact integral of the kernel over [0, x] for x in [0, eta]."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, self.eta)
        if self.family == "linear":
            s = x / self.eta
            return s * (2.0 - s)
        if self.family == "constant":
            return x / self.eta
        nodes = np.asarray(self.nodes)
        vals = np.asarray(self.values)
        seg_mass = 0.5 * (vals[1:] + vals[:-1]) * np.diff(nodes)
        cum = np.concatenate(([0.0], np.cumsum(seg_mass)))
        idx = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, len(nodes) - 2)
        h = x - nodes[idx]
        slope = (vals[idx + 1] - vals[idx]) / (nodes[idx + 1] - nodes[idx])
        return cum[idx] + vals[idx] * h + 0.5 * slope * h * h


@dataclass(frozen=True)
class QuadratureWeights:
    gamma: np.ndarray
    dx: float
    n_eta: int

    @property
    def eta(self) -> float:
        return self.n_eta * self.dx

    @property
    def gamma0(self) -> float:
        return float(self.gamma[0])


def eta_cells(eta: float, dx: float) -> int:
    """Number of cells N with eta = N * dx; raises if eta is not a multiple of dx."""
    ratio = eta / dx
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ConfigurationError(f"eta={eta} is not an integer multiple of dx={dx}")
    return n


def gamma_weights(kernel: Kernel, dx: float) -> QuadratureWeights:
    n = eta_cells(kernel.eta, dx)
    k = np.arange(n, dtype=float)
    if kernel.family == "linear":
        # integral of 2(eta-x)/eta^2 over [k dx, (k+1) dx] with eta = n dx
        gamma = (2.0 * n - 2.0 * k - 1.0) / float(n * n)
    elif kernel.family == "constant":
        gamma = np.full(n, 1.0 / n)
    else:
        edges = np.arange(n + 1) * (kernel.eta / n)
        edges[-1] = kernel.eta
        gamma = np.diff(kernel.cumulative(edges))
        gamma = np.maximum(gamma, 0.0)
        gamma /= gamma.sum()
    gamma.setflags(write=False)
    return QuadratureWeights(gamma=gamma, dx=float(dx), n_eta=n)
