"""Random linear-Gaussian ts-SCMs and stationary series simulation.

A sampled model has one positive-lag-1 self link per variable (the
autocorrelation link) plus L = floor(density * N) cross links split
between contemporaneous and lagged slots. Cross-link weights come from
the discrete grid {+-0.1, ..., +-0.5}; the contemporaneous structure is
kept acyclic by sampling against a hidden variable ordering, and whole
parameterizations whose companion matrix is not a stable contraction are
rejected and redrawn.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from ._backend import simulate_paths
from .data import TimeSeriesDataset
from .errors import (
    GenerationFailureError,
    InvalidInputError,
    InvalidModelError,
)
from .graphs import Edge, NodeId, WindowGraph, expand_from_slice

COEFF_GRID = tuple(
    s * v for v in (0.1, 0.2, 0.3, 0.4, 0.5) for s in (1.0, -1.0)
)
STATIONARITY_MARGIN = 1e-6
MAX_SAMPLE_ATTEMPTS = 1000


@dataclass(frozen=True)
class LinearTsScm:
    """coeffs[tau, j, i] is the effect of variable i at lag tau on j."""

    coeffs: np.ndarray
    noise_std: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        noise = np.asarray(self.noise_std, dtype=np.float64)
        if coeffs.ndim != 3 or coeffs.shape[1] != coeffs.shape[2]:
            raise InvalidModelError(
                f"coeffs must be (tau_max+1, m, m), got {coeffs.shape}"
            )
        m = coeffs.shape[1]
        if noise.shape != (m,) or np.any(noise <= 0):
            raise InvalidModelError("noise_std must be m positive reals")
        if np.any(np.diag(coeffs[0]) != 0.0):
            raise InvalidModelError("contemporaneous self links are not allowed")
        if not _acyclic(coeffs[0]):
            raise InvalidModelError("contemporaneous structure must be acyclic")
        coeffs.setflags(write=False)
        noise.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "noise_std", noise)

    @property
    def m(self):
        return self.coeffs.shape[1]

    @property
    def tau_max(self):
        return self.coeffs.shape[0] - 1

    def contemporaneous_topological_order(self):
        return _topological_order(self.coeffs[0])


def _acyclic(a0):
    return _topological_order(a0) is not None


def _topological_order(a0):
    """Kahn order of the contemporaneous structure (a0[j, i] != 0 means
    i -> j); None when cyclic."""
    m = a0.shape[0]
    indeg = [int(np.count_nonzero(a0[j])) for j in range(m)]
    ready = [j for j in range(m) if indeg[j] == 0]
    order = []
    while ready:
        ready.sort()
        j = ready.pop(0)
        order.append(j)
        for k in range(m):
            if a0[k, j] != 0.0:
                indeg[k] -= 1
                if indeg[k] == 0:
                    ready.append(k)
    return order if len(order) == m else None


@dataclass(frozen=True)
class GenConfig:
    """Generator defaults; sizes and samplers follow the usual benchmark
    configuration for this family of simulations."""

    N: int = 5
    T: int = 1000
    K: int = 100
    density: float = 1.5
    frac_contemporaneous: float = 0.3
    autocorr: float = 0.3
    tau_max: int = 3
    burn_in_factor: float = 0.2
    rng_seed: int = 0
    noise_std: float = 1.0
    autocorr_lower: str = "paper"  # or "clamped": max(0.1, a-0.3)

    def __post_init__(self):
        if self.N < 1 or self.T < 1 or self.K < 1:
            raise InvalidInputError("N, T, K must be positive")
        if self.tau_max < 1:
            raise InvalidInputError("tau_max must be >= 1 (self links live at lag 1)")
        if not 0.0 <= self.frac_contemporaneous <= 1.0:
            raise InvalidInputError("frac_contemporaneous must be in [0, 1]")
        if self.density < 0 or self.burn_in_factor < 0 or self.noise_std <= 0:
            raise InvalidInputError("invalid density / burn-in / noise values")
        if self.autocorr_lower not in ("paper", "clamped"):
            raise InvalidInputError("autocorr_lower must be 'paper' or 'clamped'")

    @property
    def n_links(self):
        return math.floor(self.density * self.N)

    @property
    def burn_in(self):
        return int(round(self.burn_in_factor * self.T))

    @classmethod
    def from_json_dict(cls, obj):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(obj) - known
        if extra:
            raise InvalidInputError(f"unknown generator fields {sorted(extra)}")
        return cls(**obj)

    @classmethod
    def load_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def to_json_dict(self):
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


def autocorr_bounds(cfg):
    a = cfg.autocorr
    if cfg.autocorr_lower == "paper":
        lo = min(0.1, a - 0.3)
    else:
        lo = max(0.1, a - 0.3)
    return lo, a


def _draw_structure(cfg, rng):
    n = cfg.N
    coeffs = np.zeros((cfg.tau_max + 1, n, n))
    lo, hi = autocorr_bounds(cfg)
    for j in range(n):
        coeffs[1, j, j] = rng.uniform(lo, hi)
    n_contemp = int(round(cfg.frac_contemporaneous * cfg.n_links))
    n_lagged = cfg.n_links - n_contemp
    hidden = rng.permutation(n)
    contemp_slots = [
        (hidden[a], hidden[b])
        for a in range(n)
        for b in range(a + 1, n)
    ]
    if n_contemp > len(contemp_slots):
        raise GenerationFailureError(
            f"cannot place {n_contemp} contemporaneous links among {n} nodes"
        )
    lagged_slots = [
        (i, j, tau)
        for i in range(n)
        for j in range(n)
        if i != j
        for tau in range(1, cfg.tau_max + 1)
    ]
    if n_lagged > len(lagged_slots):
        raise GenerationFailureError(
            f"cannot place {n_lagged} lagged links in the window"
        )
    if n_contemp:
        for pick in rng.choice(len(contemp_slots), size=n_contemp, replace=False):
            i, j = contemp_slots[pick]
            coeffs[0, j, i] = rng.choice(COEFF_GRID)
    if n_lagged:
        for pick in rng.choice(len(lagged_slots), size=n_lagged, replace=False):
            i, j, tau = lagged_slots[pick]
            coeffs[tau, j, i] = rng.choice(COEFF_GRID)
    return LinearTsScm(coeffs, np.full(n, cfg.noise_std))


def sample_model(cfg, rng, max_attempts=MAX_SAMPLE_ATTEMPTS):
    """Draw structures and weights until one passes the stationarity
    check; non-stationary parameterizations are discarded."""
    for _ in range(max_attempts):
        model = _draw_structure(cfg, rng)
        if stationarity_check(model):
            return model
    raise GenerationFailureError(
        f"no stationary parameterization found in {max_attempts} attempts"
    )


def companion_matrix(model):
    """Companion form of the reduced VAR: contemporaneous dependencies are
    solved out via (I - A0)^-1 before stacking the lag blocks."""
    m, tau_max = model.m, model.tau_max
    i_minus_a0 = np.eye(m) - model.coeffs[0]
    if abs(np.linalg.det(i_minus_a0)) < 1e-12:
        raise InvalidModelError("contemporaneous structure is not solvable")
    reduced = [
        np.linalg.solve(i_minus_a0, model.coeffs[tau])
        for tau in range(1, tau_max + 1)
    ]
    size = m * tau_max
    comp = np.zeros((size, size))
    if reduced:
        comp[:m, :] = np.hstack(reduced)
        for b in range(tau_max - 1):
            comp[m * (b + 1) : m * (b + 2), m * b : m * (b + 1)] = np.eye(m)
    return comp


def spectral_radius(model):
    comp = companion_matrix(model)
    if comp.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def stationarity_check(model, margin=STATIONARITY_MARGIN):
    return spectral_radius(model) < 1.0 - margin


def simulate(model, T, burn_in, rng):
    """Iterate the structural equations in contemporaneous topological
    order from zero initial conditions; the first `burn_in` rows are
    discarded."""
    if T < 1:
        raise InvalidInputError("T must be >= 1")
    if burn_in < 0:
        raise InvalidInputError("burn_in must be >= 0")
    if not stationarity_check(model):
        raise InvalidModelError("refusing to simulate a non-stationary model")
    steps = burn_in + T
    topo = np.asarray(model.contemporaneous_topological_order(), dtype=np.int64)
    noise = rng.standard_normal((steps, model.m)) * model.noise_std
    out = np.zeros((steps, model.m))
    simulate_paths(model.coeffs, topo, noise, out)
    names = tuple(f"X{j + 1}" for j in range(model.m))
    return TimeSeriesDataset(out[burn_in:], names)


def true_graph(model):
    """Ground-truth stationary window DAG of the model."""
    edges = [
        Edge(NodeId(i, tau), NodeId(j, 0))
        for tau in range(model.tau_max + 1)
        for j in range(model.m)
        for i in range(model.m)
        if model.coeffs[tau, j, i] != 0.0
    ]
    return expand_from_slice(edges, model.m, model.tau_max)
