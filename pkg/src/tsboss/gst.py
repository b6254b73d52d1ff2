"""Grow-shrink trees: per-target caches of score-improving parent additions.

A tree node represents the parent set collected along its root path; its
children are the candidates whose addition strictly improves the local
score, kept sorted best-first. Growing under a permutation prefix walks
down the best permissible branch, materializing children on demand, and
shrinking greedily removes redundant parents (steepest improvement first).

Distinct trees (distinct targets) may be used from different threads; a
single tree must be driven by one logical thread at a time.
"""

from __future__ import annotations

import bisect

from .errors import InvalidInputError
from .graphs import NodeId
from .scoring import BicScorer


class _GstNode:
    __slots__ = ("parent_idxs", "score", "evaluated", "children", "child_order")

    def __init__(self, parent_idxs, score):
        self.parent_idxs = parent_idxs
        self.score = score
        self.evaluated = {}  # candidate idx -> score of parent_idxs | {cand}
        self.children = {}  # candidate idx -> _GstNode (improving only)
        self.child_order = []  # (-score, cand) ascending = best branch first


def _sorted_tuple(idxs):
    return tuple(sorted(idxs))


def naive_grow(scorer, target_idx, candidate_idxs):
    """From-scratch greedy grow: repeatedly add the candidate with the best
    strictly-improving score (ties to the lowest column index)."""
    parents = set()
    score = scorer.local(target_idx, ())
    while True:
        best = None
        best_key = None
        for cand in candidate_idxs:
            if cand in parents:
                continue
            trial = scorer.local(target_idx, _sorted_tuple(parents | {cand}))
            if trial > score:
                key = (trial, -cand)
                if best_key is None or key > best_key:
                    best, best_key = cand, key
        if best is None:
            return frozenset(parents), score
        parents.add(best)
        score = best_key[0]


def naive_shrink(scorer, target_idx, parents, score):
    """Steepest-descent shrink: drop the single parent whose removal best
    improves the score, until no removal improves."""
    parents = set(parents)
    while True:
        best = None
        best_key = None
        for cand in parents:
            trial = scorer.local(target_idx, _sorted_tuple(parents - {cand}))
            if trial > score:
                key = (trial, -cand)
                if best_key is None or key > best_key:
                    best, best_key = cand, key
        if best is None:
            return frozenset(parents), score
        parents.discard(best)
        score = best_key[0]


def naive_score_under_prefix(scorer, target_idx, candidate_idxs):
    """Tree-free grow-then-shrink; the differential reference for the tree."""
    grown, score = naive_grow(scorer, target_idx, candidate_idxs)
    return naive_shrink(scorer, target_idx, grown, score)


class GrowShrinkTree:
    """Parent-set search cache for one contemporaneous target."""

    def __init__(self, target, stats, penalty_discount=1.0, use_cache=True):
        target = NodeId(*target)
        if target.lag != 0:
            raise InvalidInputError(
                "grow-shrink trees exist only for lag-0 targets"
            )
        self.target = target
        self.stats = stats
        self.penalty_discount = penalty_discount
        self.use_cache = use_cache
        self._scorer = BicScorer(stats, penalty_discount, use_cache=use_cache)
        self._target_idx = stats.index_of(target)
        self._root = _GstNode(
            frozenset(), self._scorer.local(self._target_idx, ())
        )
        self._shrink_cache = {}  # grown parent frozenset -> (shrunk, score)
        self._prefix_memo = {}  # prefix frozenset -> (parent frozenset, score)

    @property
    def root_score(self):
        return self._root.score

    # -- index-level machinery ------------------------------------------------

    def _prefix_idxs(self, prefix):
        idxs = set()
        for node in prefix:
            node = NodeId(*node)
            if node == self.target:
                raise InvalidInputError("target cannot appear in its prefix")
            idxs.add(self.stats.index_of(node))
        return frozenset(idxs)

    def _grow_idx(self, prefix_idxs):
        if not self.use_cache:
            return naive_grow(self._scorer, self._target_idx, sorted(prefix_idxs))
        node = self._root
        while True:
            for cand in prefix_idxs:
                if cand in node.parent_idxs or cand in node.evaluated:
                    continue
                trial = self._scorer.local(
                    self._target_idx, _sorted_tuple(node.parent_idxs | {cand})
                )
                node.evaluated[cand] = trial
                if trial > node.score:
                    child = _GstNode(node.parent_idxs | {cand}, trial)
                    node.children[cand] = child
                    bisect.insort(node.child_order, (-trial, cand))
            step = None
            for _, cand in node.child_order:
                if cand in prefix_idxs:
                    step = node.children[cand]
                    break
            if step is None:
                return node.parent_idxs, node.score
            node = step

    def _shrink_idx(self, grown, score):
        if not self.use_cache:
            return naive_shrink(self._scorer, self._target_idx, grown, score)
        hit = self._shrink_cache.get(grown)
        if hit is None:
            hit = naive_shrink(self._scorer, self._target_idx, grown, score)
            self._shrink_cache[grown] = hit
        return hit

    def _score_prefix_idx(self, prefix_idxs):
        if self.use_cache:
            hit = self._prefix_memo.get(prefix_idxs)
            if hit is not None:
                return hit
        grown, grown_score = self._grow_idx(prefix_idxs)
        result = self._shrink_idx(grown, grown_score)
        if self.use_cache:
            self._prefix_memo[prefix_idxs] = result
        return result

    # -- NodeId-level API ------------------------------------------------------

    def grow(self, prefix):
        """Best permissible grow path under the prefix set."""
        idxs, score = self._grow_idx(self._prefix_idxs(prefix))
        return self._to_nodes(idxs), score

    def shrink(self, grown):
        """Greedy removal pass over a (parent_set, score) pair from grow."""
        parent_set, score = grown
        idxs = frozenset(self.stats.index_of(p) for p in parent_set)
        shrunk, new_score = self._shrink_idx(idxs, score)
        return self._to_nodes(shrunk), new_score

    def score_under_prefix(self, prefix):
        """shrink(grow(prefix)): this target's contribution under a
        permutation whose pre-target set equals `prefix`."""
        idxs, score = self._score_prefix_idx(self._prefix_idxs(prefix))
        return self._to_nodes(idxs), score

    def _to_nodes(self, idxs):
        return frozenset(self.stats.columns[i] for i in idxs)
