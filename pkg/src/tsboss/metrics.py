"""Adjacency and orientation precision/recall between window graphs.

Counting happens over the stationary representative slots so replication
never multiplies a link: one slot per unordered contemporaneous pair and
one per (source variable, lag, target variable) lagged triple. Orientation
is scored only on contemporaneous pairs via per-endpoint arrowhead
indicators; a pair absent from the truth charges exactly one false
positive when the estimate directs it, and nothing when the estimate is
undirected or absent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cpdag import ts_dag_to_ts_cpdag
from .errors import InvalidInputError
from .graphs import KIND_DAG, MARK_UNDIRECTED, NodeId, WindowGraph

ABSENT = "absent"
UNDIRECTED = "undirected"


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def precision(self):
        denom = self.tp + self.fp
        return self.tp / denom if denom else math.nan

    def recall(self):
        denom = self.tp + self.fn
        return self.tp / denom if denom else math.nan

    def f1(self):
        p, r = self.precision(), self.recall()
        if math.isnan(p) or math.isnan(r) or (p + r) == 0:
            return math.nan
        return 2 * p * r / (p + r)


def _contemp_state(g, i, j):
    """Representative state of the contemporaneous pair {i, j}: ABSENT,
    UNDIRECTED, or the (tail, head) orientation."""
    edge = g.edge_between(NodeId(i, 0), NodeId(j, 0))
    if edge is None:
        return ABSENT
    if edge.mark == MARK_UNDIRECTED:
        return UNDIRECTED
    return (edge.src.var, edge.dst.var)


def _lagged_present(g, i, tau, j):
    return g.adjacent(NodeId(i, tau), NodeId(j, 0))


def _check_shapes(truth, est):
    if truth.m != est.m or truth.tau_max != est.tau_max:
        raise InvalidInputError(
            "graphs must share the same variable count and maximum lag"
        )


def adjacency_metrics(truth, est):
    """Orientation-blind confusion counts over all representative slots."""
    _check_shapes(truth, est)
    counts = ConfusionCounts()
    m, tau_max = truth.m, truth.tau_max
    for i in range(m):
        for j in range(i + 1, m):
            in_truth = _contemp_state(truth, i, j) != ABSENT
            in_est = _contemp_state(est, i, j) != ABSENT
            _tally_adjacency(counts, in_truth, in_est)
    for tau in range(1, tau_max + 1):
        for i in range(m):
            for j in range(m):
                _tally_adjacency(
                    counts,
                    _lagged_present(truth, i, tau, j),
                    _lagged_present(est, i, tau, j),
                )
    return counts


def _tally_adjacency(counts, in_truth, in_est):
    if in_truth and in_est:
        counts.tp += 1
    elif in_truth:
        counts.fn += 1
    elif in_est:
        counts.fp += 1
    else:
        counts.tn += 1


def arrowhead_into(state, node_var):
    """1 iff the pair's edge carries an arrowhead into node_var."""
    if state in (ABSENT, UNDIRECTED):
        return 0
    return 1 if state[1] == node_var else 0


def orientation_metrics(truth, est):
    """Arrowhead confusion counts over contemporaneous pairs.

    Pairs present in the truth contribute one count per endpoint via the
    indicator comparison; truth-absent pairs contribute a single FP when
    the estimate directs them and are excluded otherwise.
    """
    _check_shapes(truth, est)
    counts = ConfusionCounts()
    m = truth.m
    for i in range(m):
        for j in range(i + 1, m):
            t_state = _contemp_state(truth, i, j)
            e_state = _contemp_state(est, i, j)
            if t_state == ABSENT:
                if e_state not in (ABSENT, UNDIRECTED):
                    counts.fp += 1
                continue
            for a in (i, j):
                it = arrowhead_into(t_state, a)
                ie = arrowhead_into(e_state, a)
                if it and ie:
                    counts.tp += 1
                elif it:
                    counts.fn += 1
                elif ie:
                    counts.fp += 1
                else:
                    counts.tn += 1
    return counts


@dataclass
class EvaluationResult:
    adjacency: ConfusionCounts
    orientation: ConfusionCounts
    adj_precision: float
    adj_recall: float
    ori_precision: float
    ori_recall: float
    adj_precision_undefined: bool
    adj_recall_undefined: bool
    ori_precision_undefined: bool
    ori_recall_undefined: bool

    def as_row(self):
        return {
            "adj_precision": self.adj_precision,
            "adj_recall": self.adj_recall,
            "ori_precision": self.ori_precision,
            "ori_recall": self.ori_recall,
            "adj_tp": self.adjacency.tp,
            "adj_fp": self.adjacency.fp,
            "adj_fn": self.adjacency.fn,
            "adj_tn": self.adjacency.tn,
            "ori_tp": self.orientation.tp,
            "ori_fp": self.orientation.fp,
            "ori_fn": self.orientation.fn,
            "ori_tn": self.orientation.tn,
        }


def evaluate(truth_dag, est, mode="cpdag"):
    """Compare an estimate against the ground truth.

    mode="cpdag" scores against the truth's equivalence class (the main
    protocol); mode="dag" scores against the raw generating DAG. Zero
    denominators yield NaN with an explicit flag so averaging can skip
    them.
    """
    if mode not in ("cpdag", "dag"):
        raise InvalidInputError(f"unknown evaluation mode {mode!r}")
    if truth_dag.kind != KIND_DAG:
        raise InvalidInputError("truth must be the generating DAG")
    reference = ts_dag_to_ts_cpdag(truth_dag) if mode == "cpdag" else truth_dag
    adj = adjacency_metrics(reference, est)
    ori = orientation_metrics(reference, est)
    return EvaluationResult(
        adjacency=adj,
        orientation=ori,
        adj_precision=adj.precision(),
        adj_recall=adj.recall(),
        ori_precision=ori.precision(),
        ori_recall=ori.recall(),
        adj_precision_undefined=(adj.tp + adj.fp) == 0,
        adj_recall_undefined=(adj.tp + adj.fn) == 0,
        ori_precision_undefined=(ori.tp + ori.fp) == 0,
        ori_recall_undefined=(ori.tp + ori.fn) == 0,
    )
