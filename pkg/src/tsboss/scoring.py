"""Decomposable Gaussian BIC local scores from cached sufficient statistics.

Conventions: higher is better; 2*pi constants are dropped; the penalty
counts |parents| parameters; the covariance and the residual variance both
use the 1/n maximum-likelihood normalization. These constants cancel in
every comparison the search algorithms make.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._backend import regression_residual
from .errors import InsufficientDataError, InvalidInputError
from .graphs import KIND_DAG, NodeId, is_stationary

SIGMA2_FLOOR = 1e-12
RIDGE = 1e-10


@dataclass(frozen=True)
class SufficientStats:
    """Sample covariance (1/n) over window columns plus the row count."""

    cov: np.ndarray
    n: int
    columns: tuple

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=np.float64)
        p = len(self.columns)
        if cov.shape != (p, p):
            raise InvalidInputError("covariance shape does not match columns")
        cov.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(
            self, "_index", {node: i for i, node in enumerate(self.columns)}
        )

    @property
    def p(self):
        return len(self.columns)

    def index_of(self, node):
        try:
            return self._index[NodeId(*node)]
        except KeyError:
            raise InvalidInputError(f"node {tuple(node)} not among columns") from None


@dataclass(frozen=True)
class LocalScore:
    value: float
    target: NodeId
    parent_set: frozenset


def compute_stats(window_dataset):
    """MLE covariance of an unrolled dataset, column order preserved."""
    x = window_dataset.values
    if x.shape[0] < 2:
        raise InsufficientDataError("need at least 2 rows for a covariance")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / x.shape[0]
    cov = (cov + cov.T) * 0.5  # enforce exact symmetry
    return SufficientStats(cov, x.shape[0], window_dataset.columns)


class BicScorer:
    """Caches local BIC values per (target, parent set) over fixed stats.

    The cache is a plain dict keyed by immutable tuples; concurrent
    readers racing an insert at worst recompute the same value.
    """

    def __init__(self, stats, penalty_discount=1.0, use_cache=True):
        if penalty_discount <= 0:
            raise InvalidInputError("penalty_discount must be > 0")
        self.stats = stats
        self.penalty_discount = penalty_discount
        self.use_cache = use_cache
        self._cache = {}
        self._log_n = math.log(stats.n)

    def local(self, target_idx, parent_idxs):
        """Score by column index; parent_idxs must be sorted and unique."""
        key = (target_idx, parent_idxs)
        if self.use_cache:
            hit = self._cache.get(key)
            if hit is not None:
                return hit
        value = self._compute(target_idx, parent_idxs)
        if self.use_cache:
            self._cache[key] = value
        return value

    def _compute(self, target_idx, parent_idxs):
        sigma2, used_ridge = regression_residual(
            self.stats.cov,
            target_idx,
            np.asarray(parent_idxs, dtype=np.int64),
            RIDGE,
        )
        if used_ridge:
            warnings.warn(
                "singular parent covariance; solved with ridge "
                f"{RIDGE:g} (target column {target_idx})",
                RuntimeWarning,
                stacklevel=3,
            )
        if sigma2 < SIGMA2_FLOOR:
            # covers the non-positive case; residuals this small only arise
            # in degenerate (exactly collinear) constructions
            warnings.warn(
                f"degenerate residual variance {sigma2:g} clamped to "
                f"{SIGMA2_FLOOR:g} (target column {target_idx})",
                RuntimeWarning,
                stacklevel=3,
            )
            sigma2 = SIGMA2_FLOOR
        n = self.stats.n
        return (
            -0.5 * n * math.log(sigma2)
            - 0.5 * self.penalty_discount * len(parent_idxs) * self._log_n
        )

    def local_for(self, target, parents):
        """NodeId-level variant; validates and returns a LocalScore."""
        target = NodeId(*target)
        parents = frozenset(NodeId(*p) for p in parents)
        if target in parents:
            raise InvalidInputError("target cannot be its own parent")
        t_idx = self.stats.index_of(target)
        p_idxs = tuple(sorted(self.stats.index_of(p) for p in parents))
        return LocalScore(self.local(t_idx, p_idxs), target, parents)


def local_bic(target, parents, stats, penalty_discount=1.0):
    """One-shot local score; see BicScorer for the cached variant."""
    return BicScorer(stats, penalty_discount).local_for(target, parents)


def graph_score(g, stats, penalty_discount=1.0):
    """Sum of local scores of the m lag-0 nodes with their graph parents."""
    if g.kind != KIND_DAG or not is_stationary(g):
        raise InvalidInputError("graph_score expects a stationary DAG")
    scorer = BicScorer(stats, penalty_discount)
    total = 0.0
    for var in range(g.m):
        node = NodeId(var, 0)
        total += scorer.local_for(node, g.parents(node)).value
    return total
