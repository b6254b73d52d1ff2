"""Permutation search over the contemporaneous block, projection to a
stationary window DAG, and the backward-deletion phase.

Phase 1 keeps the lagged prefix of the permutation fixed, repeatedly
relocates one contemporaneous variable to its best-scoring block position,
and restarts the sweep on the first strict improvement. The projection of
the final permutation is the fixpoint graph; the optional backward phase
then walks the window equivalence class by score-improving deletions of
edges incident into the contemporaneous slice.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .cpdag import _RepPdag, pdag_to_stationary_dag, ts_dag_to_ts_cpdag
from .errors import InvalidInputError
from .graphs import (
    KIND_DAG,
    MARK_UNDIRECTED,
    Edge,
    NodeId,
    WindowGraph,
    column_order,
    expand_from_slice,
    is_stationary,
)
from .gst import GrowShrinkTree
from .scoring import BicScorer, compute_stats


@dataclass(frozen=True)
class SearchConfig:
    penalty_discount: float = 1.0
    run_bes: bool = True
    num_restarts: int = 0
    rng_seed: int = 0
    use_gst_cache: bool = True  # False forces from-scratch grow/shrink

    def __post_init__(self):
        if self.penalty_discount <= 0:
            raise InvalidInputError("penalty_discount must be > 0")
        if self.num_restarts < 0:
            raise InvalidInputError("num_restarts must be >= 0")


@dataclass(frozen=True)
class AdmissiblePermutation:
    """Order over all window nodes: the lagged blocks come first in the
    canonical dataset order and are never permuted; only the lag-0 block
    varies."""

    order: tuple

    def __post_init__(self):
        order = tuple(NodeId(*n) for n in self.order)
        object.__setattr__(self, "order", order)
        lags = sorted({n.lag for n in order})
        m = sum(1 for n in order if n.lag == 0)
        if m == 0:
            raise InvalidInputError("permutation needs a lag-0 block")
        tau_max = max(n.lag for n in order)
        expected = column_order(m, tau_max)
        if len(order) != len(expected) or set(order) != set(expected):
            raise InvalidInputError("permutation must cover the window grid")
        split = m * tau_max
        if order[:split] != expected[:split]:
            raise InvalidInputError(
                "lagged prefix must equal the canonical lagged block order"
            )
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "tau_max", tau_max)

    @property
    def lag0_order(self):
        return self.order[self.m * self.tau_max :]

    def pre(self, node):
        node = NodeId(*node)
        i = self.order.index(node)
        return frozenset(self.order[:i])

    def with_lag0_order(self, lag0_nodes):
        return AdmissiblePermutation(
            self.order[: self.m * self.tau_max] + tuple(lag0_nodes)
        )


def initial_permutation(m, tau_max):
    """Lagged blocks oldest-first, then the natural contemporaneous order."""
    return AdmissiblePermutation(column_order(m, tau_max))


def build_trees(stats, penalty_discount=1.0, use_cache=True):
    """One grow-shrink tree per contemporaneous node."""
    tau_max = max(c.lag for c in stats.columns)
    m = len(stats.columns) // (tau_max + 1)
    return {
        NodeId(v, 0): GrowShrinkTree(
            NodeId(v, 0), stats, penalty_discount, use_cache=use_cache
        )
        for v in range(m)
    }


class _SweepState:
    """Index-level view of the search: trees keyed by column index."""

    def __init__(self, trees):
        nodes = sorted(trees)
        stats = trees[nodes[0]].stats
        self.m = len(nodes)
        self.stats = stats
        self.trees = {stats.index_of(n): trees[n] for n in nodes}
        self.lagged = frozenset(
            i for i, c in enumerate(stats.columns) if c.lag > 0
        )
        self.lag0_idx = [stats.index_of(n) for n in nodes]

    def order_score(self, order_idxs):
        total = 0.0
        prefix = set(self.lagged)
        for idx in order_idxs:
            _, s = self.trees[idx]._score_prefix_idx(frozenset(prefix))
            total += s
            prefix.add(idx)
        return total

    def best_move(self, order_idxs, node_idx):
        """Try the node at every contemporaneous position; keep the best
        strictly-improving one, else restore the original position."""
        base = self.order_score(order_idxs)
        j = order_idxs.index(node_idx)
        rest = [i for i in order_idxs if i != node_idx]
        best_k, best_score = j, base
        for k in range(len(order_idxs)):
            cand = rest[:k] + [node_idx] + rest[k:]
            s = self.order_score(cand)
            if s > best_score:
                best_score, best_k = s, k
        return rest[:best_k] + [node_idx] + rest[best_k:]

    def sweep_to_local_optimum(self, order_idxs):
        """The phase-1 loop: restart the variable scan on the first
        accepted strict improvement; stop after a full quiet scan."""
        order = list(order_idxs)
        improved = True
        while improved:
            s_best = self.order_score(order)
            improved = False
            for node_idx in self.lag0_idx:
                cand = self.best_move(order, node_idx)
                if self.order_score(cand) > s_best:
                    order = cand
                    improved = True
                    break
        return order

    def project(self, order_idxs):
        stats = self.stats
        edges = []
        prefix = set(self.lagged)
        for idx in order_idxs:
            parents, _ = self.trees[idx]._score_prefix_idx(frozenset(prefix))
            target = stats.columns[idx]
            edges.extend(Edge(stats.columns[p], target) for p in parents)
            prefix.add(idx)
        tau_max = max(c.lag for c in stats.columns)
        return expand_from_slice(edges, self.m, tau_max)

    def to_permutation(self, order_idxs, tau_max):
        lag0 = tuple(self.stats.columns[i] for i in order_idxs)
        return initial_permutation(self.m, tau_max).with_lag0_order(lag0)


def _coerce_permutation(pi):
    if isinstance(pi, AdmissiblePermutation):
        return pi
    return AdmissiblePermutation(tuple(pi))


def _check_trees(trees, pi):
    expected = set(pi.lag0_order)
    if set(trees) != expected:
        raise InvalidInputError("need exactly one tree per lag-0 node")


def permutation_score(trees, pi):
    """Sum over contemporaneous targets of their score under the
    permutation prefix."""
    pi = _coerce_permutation(pi)
    _check_trees(trees, pi)
    state = _SweepState(trees)
    order = [state.stats.index_of(n) for n in pi.lag0_order]
    return state.order_score(order)


def best_ts_move(trees, pi, node):
    """Relocate one contemporaneous node to its best block position."""
    node = NodeId(*node)
    if node.lag != 0:
        raise InvalidInputError("only contemporaneous nodes can be moved")
    pi = _coerce_permutation(pi)
    _check_trees(trees, pi)
    state = _SweepState(trees)
    order = [state.stats.index_of(n) for n in pi.lag0_order]
    new_order = state.best_move(order, state.stats.index_of(node))
    return state.to_permutation(new_order, pi.tau_max)


def is_local_optimum(trees, pi):
    """True iff one more sweep of single-node moves finds no improvement."""
    pi = _coerce_permutation(pi)
    _check_trees(trees, pi)
    state = _SweepState(trees)
    order = [state.stats.index_of(n) for n in pi.lag0_order]
    base = state.order_score(order)
    for node_idx in state.lag0_idx:
        if state.order_score(state.best_move(order, node_idx)) > base:
            return False
    return True


def project(trees, pi):
    """Stationary window DAG induced by the permutation: each lag-0 node
    keeps its grow-shrink parent set, replicated across lag slices."""
    pi = _coerce_permutation(pi)
    _check_trees(trees, pi)
    state = _SweepState(trees)
    order = [state.stats.index_of(n) for n in pi.lag0_order]
    return state.project(order)


def _phase1(stats, tau_max, cfg, trees=None):
    if trees is None:
        trees = build_trees(
            stats, cfg.penalty_discount, use_cache=cfg.use_gst_cache
        )
    state = _SweepState(trees)
    m = state.m
    rng = np.random.default_rng(cfg.rng_seed)
    best_order = None
    best_score = -np.inf
    for restart in range(cfg.num_restarts + 1):
        if restart == 0:
            start = list(state.lag0_idx)
        else:
            start = [state.lag0_idx[i] for i in rng.permutation(m)]
        order = state.sweep_to_local_optimum(start)
        score = state.order_score(order)
        if score > best_score:
            best_score, best_order = score, order
    return trees, state, best_order, best_score


def ts_boss_phase1(window_dataset, tau_max, cfg=SearchConfig()):
    """Permutation search over the contemporaneous block; returns the
    projected stationary window DAG of the best local optimum found."""
    if window_dataset.tau_max != tau_max:
        raise InvalidInputError(
            f"dataset is unrolled at tau_max={window_dataset.tau_max}, "
            f"not {tau_max}"
        )
    if window_dataset.m < 1:
        raise InvalidInputError("need at least one variable")
    stats = compute_stats(window_dataset)
    _, state, order, _ = _phase1(stats, tau_max, cfg)
    return state.project(order)


# ---------------------------------------------------------------------------
# backward phase: greedy score-improving deletions over the window MEC
# ---------------------------------------------------------------------------

def _delete_candidates(pdag):
    """Ordered (x, y) pairs with the edge incident into the lag-0 slice:
    y is contemporaneous; x may be lagged or contemporaneous."""
    out = []
    for src, dst_var in sorted(pdag.lagged):
        out.append((src, NodeId(dst_var, 0)))
    for pair in sorted(pdag.orient, key=sorted):
        state = pdag.orient[pair]
        if state is None:
            i, j = sorted(pair)
            out.append((NodeId(i, 0), NodeId(j, 0)))
            out.append((NodeId(j, 0), NodeId(i, 0)))
        else:
            out.append((NodeId(state[0], 0), NodeId(state[1], 0)))
    return out


def _adjacent_rep(pdag, x, z_var):
    """Adjacency between a lag-0 variable and x (lagged or lag-0)."""
    if x.lag > 0:
        return pdag.lag0_adjacent_to_lagged(z_var, x)
    return x.var != z_var and pdag.contemp_adjacent(x.var, z_var)


def _na_set(pdag, y, x):
    """Undirected neighbors of y that are adjacent to x."""
    return tuple(
        z
        for z in sorted(pdag.undirected_partners(y.var))
        if _adjacent_rep(pdag, x, z)
    )


def _directed_parents(pdag, y):
    pa = {NodeId(tail, 0) for tail in pdag.directed_in(y.var)}
    pa.update(src for src in pdag.lagged_parents(y.var))
    return pa


def _is_clique(pdag, vars_):
    return all(
        pdag.contemp_adjacent(a, b)
        for a, b in itertools.combinations(vars_, 2)
    )


def _apply_delete(pdag, x, y, h_vars):
    out = _RepPdag(pdag.m, pdag.tau_max)
    out.lagged = set(pdag.lagged)
    out.orient = dict(pdag.orient)
    if x.lag > 0:
        out.lagged.discard((x, y.var))
    else:
        del out.orient[frozenset((x.var, y.var))]
    for h in h_vars:
        out.direct(y.var, h)
        if x.lag == 0 and out.orient.get(frozenset((x.var, h))) is None:
            out.direct(x.var, h)
    return out


def ts_bes(g, stats, penalty_discount=1.0):
    """Backward phase: repeatedly apply the best valid score-improving
    delete operator among edges incident into the lag-0 slice, re-closing
    orientations after each step; returns the final window CPDAG."""
    if g.kind != KIND_DAG or not is_stationary(g):
        raise InvalidInputError("backward phase expects a stationary DAG")
    scorer = BicScorer(stats, penalty_discount)
    current = g
    while True:
        cpdag = ts_dag_to_ts_cpdag(current)
        pdag = _RepPdag.from_graph(cpdag)
        best = None
        best_delta = 0.0
        for x, y in _delete_candidates(pdag):
            na = _na_set(pdag, y, x)
            pa = _directed_parents(pdag, y)
            for r in range(len(na) + 1):
                for h_vars in itertools.combinations(na, r):
                    rest = [z for z in na if z not in h_vars]
                    if not _is_clique(pdag, rest):
                        continue
                    base = (pa - {x}) | {NodeId(z, 0) for z in rest}
                    s_without = scorer.local_for(y, base).value
                    s_with = scorer.local_for(y, base | {x}).value
                    delta = s_without - s_with
                    if delta > best_delta:
                        best_delta = delta
                        best = (x, y, h_vars)
        if best is None:
            return cpdag
        x, y, h_vars = best
        next_pdag = _apply_delete(pdag, x, y, h_vars)
        current = pdag_to_stationary_dag(next_pdag.to_graph())


# ---------------------------------------------------------------------------
# end-to-end pipeline
# ---------------------------------------------------------------------------

@dataclass
class TsBossResult:
    phase1_dag: WindowGraph
    cpdag: WindowGraph  # backward-phase output, or the phase-1 MEC
    output: WindowGraph  # what the CLI writes: cpdag, or the DAG w/o BES
    permutation: AdmissiblePermutation
    score: float
    trees: dict = field(repr=False, default=None)
    stats: object = field(repr=False, default=None)


def run_ts_boss(window_dataset, tau_max, cfg=SearchConfig()):
    """Full pipeline on an unrolled dataset: phase-1 permutation search,
    projection, and (optionally) the backward deletion phase."""
    if window_dataset.tau_max != tau_max:
        raise InvalidInputError(
            f"dataset is unrolled at tau_max={window_dataset.tau_max}, "
            f"not {tau_max}"
        )
    stats = compute_stats(window_dataset)
    trees, state, order, score = _phase1(stats, tau_max, cfg)
    dag = state.project(order)
    if cfg.run_bes:
        cpdag = ts_bes(dag, stats, cfg.penalty_discount)
        output = cpdag
    else:
        cpdag = ts_dag_to_ts_cpdag(dag)
        output = dag
    return TsBossResult(
        phase1_dag=dag,
        cpdag=cpdag,
        output=output,
        permutation=state.to_permutation(order, tau_max),
        score=score,
        trees=trees,
        stats=stats,
    )
