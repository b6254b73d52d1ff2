"""Window graphs over variable-by-lag nodes and their structural queries.

A window graph lives on the node grid {0..m-1} x {0..tau_max}, where lag 0
is the contemporaneous slice. Kind "dag" graphs materialize every
time-shifted edge copy inside the window; kind "cpdag" graphs are the
stationary quotient and store only the representative edges incident into
the lag-0 slice, with undirected marks allowed between lag-0 nodes.

JSON serialization:
    {"m": int, "tau_max": int, "kind": "dag"|"cpdag",
     "edges": [{"src_var", "src_lag", "dst_var", "dst_lag", "mark"}]}
with mark "->" (directed) or "o-o" (undirected). "kind" is an additive
field; readers that only know m/tau_max/edges can ignore it.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

import numpy as np

from ._backend import dsep_connected
from .errors import InvalidInputError, SizeCapError

MARK_DIRECTED = "->"
MARK_UNDIRECTED = "o-o"

KIND_DAG = "dag"
KIND_CPDAG = "cpdag"

# an oracle answers "is s1 independent of s2 given s3?"
CIOracle = Callable[[frozenset, frozenset, frozenset], bool]


class NodeId(NamedTuple):
    var: int
    lag: int


class Edge(NamedTuple):
    src: NodeId
    dst: NodeId
    mark: str = MARK_DIRECTED


def window_nodes(m, tau_max):
    """All window nodes in dense order (index = var + m * lag)."""
    return [NodeId(v, lag) for lag in range(tau_max + 1) for v in range(m)]


def dense_index(node, m):
    return node.var + m * node.lag


def column_order(m, tau_max):
    """Node order used by unrolled datasets: lag tau_max block first,
    contemporaneous block last, variables ascending within a block."""
    return tuple(
        NodeId(v, lag) for lag in range(tau_max, -1, -1) for v in range(m)
    )


def _canonical_edge(edge):
    src, dst, mark = edge
    src = NodeId(int(src[0]), int(src[1]))
    dst = NodeId(int(dst[0]), int(dst[1]))
    if mark == MARK_UNDIRECTED and (dst.var, dst.lag) < (src.var, src.lag):
        src, dst = dst, src
    return Edge(src, dst, mark)


@dataclass(frozen=True)
class SeparationQuery:
    """Disjoint node sets (s1, s2, s3) for a d-separation question."""

    s1: frozenset
    s2: frozenset
    s3: frozenset

    def __post_init__(self):
        object.__setattr__(self, "s1", frozenset(self.s1))
        object.__setattr__(self, "s2", frozenset(self.s2))
        object.__setattr__(self, "s3", frozenset(self.s3))
        if (self.s1 & self.s2) or (self.s1 & self.s3) or (self.s2 & self.s3):
            raise InvalidInputError("query sets must be pairwise disjoint")


class WindowGraph:
    """Immutable directed mixed graph over the window node grid."""

    def __init__(self, m, tau_max, edges=(), kind=KIND_DAG):
        if m < 1 or tau_max < 0:
            raise InvalidInputError(f"bad window shape m={m}, tau_max={tau_max}")
        if kind not in (KIND_DAG, KIND_CPDAG):
            raise InvalidInputError(f"unknown graph kind {kind!r}")
        self.m = m
        self.tau_max = tau_max
        self.kind = kind
        self.edges = frozenset(_canonical_edge(e) for e in edges)
        self._validate()
        self._parents = {}
        self._children = {}
        self._neighbors = {}
        self._adjacent = set()
        for src, dst, mark in self.edges:
            pair = frozenset((src, dst))
            if pair in self._adjacent:
                raise InvalidInputError(f"multiple edges between {src} and {dst}")
            self._adjacent.add(pair)
            if mark == MARK_DIRECTED:
                self._parents.setdefault(dst, set()).add(src)
                self._children.setdefault(src, set()).add(dst)
            else:
                self._neighbors.setdefault(src, set()).add(dst)
                self._neighbors.setdefault(dst, set()).add(src)
        if self._has_directed_cycle():
            raise InvalidInputError("directed edges contain a cycle")
        self._csr = None
        self._frozen = True

    def __setattr__(self, name, value):
        if getattr(self, "_frozen", False) and name != "_csr":
            raise AttributeError("WindowGraph is immutable")
        object.__setattr__(self, name, value)

    def _validate(self):
        for src, dst, mark in self.edges:
            for node in (src, dst):
                if not (0 <= node.var < self.m and 0 <= node.lag <= self.tau_max):
                    raise InvalidInputError(f"node {node} outside window")
            if src == dst:
                raise InvalidInputError(f"self edge at {src}")
            if mark == MARK_DIRECTED:
                if src.lag < dst.lag:
                    raise InvalidInputError(
                        f"edge {src}->{dst} points into the past"
                    )
            elif mark == MARK_UNDIRECTED:
                if self.kind != KIND_CPDAG:
                    raise InvalidInputError("undirected edges require kind=cpdag")
                if src.lag != 0 or dst.lag != 0:
                    raise InvalidInputError("undirected edges must join lag-0 nodes")
            else:
                raise InvalidInputError(f"unknown edge mark {mark!r}")
            if self.kind == KIND_CPDAG and dst.lag != 0:
                raise InvalidInputError(
                    "cpdag graphs store only edges into the lag-0 slice"
                )

    def _has_directed_cycle(self):
        state = {}

        def visit(node):
            state[node] = 1
            for child in self._children.get(node, ()):
                s = state.get(child, 0)
                if s == 1:
                    return True
                if s == 0 and visit(child):
                    return True
            state[node] = 2
            return False

        return any(
            state.get(n, 0) == 0 and visit(n) for n in list(self._children)
        )

    # -- basic queries ------------------------------------------------------

    @property
    def n_nodes(self):
        return self.m * (self.tau_max + 1)

    def nodes(self):
        return window_nodes(self.m, self.tau_max)

    def parents(self, node):
        self._check_node(node)
        return frozenset(self._parents.get(node, ()))

    def children(self, node):
        self._check_node(node)
        return frozenset(self._children.get(node, ()))

    def neighbors(self, node):
        """Nodes joined to `node` by an undirected edge."""
        self._check_node(node)
        return frozenset(self._neighbors.get(node, ()))

    def adjacent(self, a, b):
        return frozenset((NodeId(*a), NodeId(*b))) in self._adjacent

    def edge_between(self, a, b):
        a, b = NodeId(*a), NodeId(*b)
        for edge in self.edges:
            if {edge.src, edge.dst} == {a, b}:
                return edge
        return None

    def descendants(self, node):
        self._check_node(node)
        seen = set()
        stack = [node]
        while stack:
            for child in self._children.get(stack.pop(), ()):
                if child not in seen:
                    seen.add(child)
                    stack.append(child)
        seen.discard(node)
        return frozenset(seen)

    def nondescendants(self, node):
        self._check_node(node)
        out = set(self.nodes())
        out.discard(NodeId(*node))
        out -= self.descendants(node)
        return frozenset(out)

    def slice_edges(self):
        """Representative edges: those incident into the lag-0 slice."""
        return frozenset(e for e in self.edges if e.dst.lag == 0)

    def _check_node(self, node):
        var, lag = node
        if not (0 <= var < self.m and 0 <= lag <= self.tau_max):
            raise InvalidInputError(f"node {tuple(node)} outside window")

    # -- equality / serialization -------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, WindowGraph)
            and self.m == other.m
            and self.tau_max == other.tau_max
            and self.kind == other.kind
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.m, self.tau_max, self.kind, self.edges))

    def __repr__(self):
        return (
            f"WindowGraph(m={self.m}, tau_max={self.tau_max}, "
            f"kind={self.kind!r}, edges={len(self.edges)})"
        )

    def to_json_dict(self):
        edges = sorted(self.edges)
        return {
            "m": self.m,
            "tau_max": self.tau_max,
            "kind": self.kind,
            "edges": [
                {
                    "src_var": e.src.var,
                    "src_lag": e.src.lag,
                    "dst_var": e.dst.var,
                    "dst_lag": e.dst.lag,
                    "mark": e.mark,
                }
                for e in edges
            ],
        }

    @classmethod
    def from_json_dict(cls, obj):
        edges = [
            Edge(
                NodeId(e["src_var"], e["src_lag"]),
                NodeId(e["dst_var"], e["dst_lag"]),
                e["mark"],
            )
            for e in obj["edges"]
        ]
        kind = obj.get("kind")
        if kind is None:
            kind = (
                KIND_CPDAG
                if any(e.mark == MARK_UNDIRECTED for e in edges)
                else KIND_DAG
            )
        return cls(obj["m"], obj["tau_max"], edges, kind=kind)

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    # -- d-separation support -----------------------------------------------

    def _csr_arrays(self):
        if self._csr is None:
            m = self.m
            n = self.n_nodes
            par_lists = [[] for _ in range(n)]
            ch_lists = [[] for _ in range(n)]
            for src, dst, mark in self.edges:
                if mark != MARK_DIRECTED:
                    raise InvalidInputError("d-separation requires a DAG")
                par_lists[dense_index(dst, m)].append(dense_index(src, m))
                ch_lists[dense_index(src, m)].append(dense_index(dst, m))

            def csr(lists):
                ptr = np.zeros(n + 1, np.int64)
                for i, row in enumerate(lists):
                    ptr[i + 1] = ptr[i] + len(row)
                idx = np.zeros(max(int(ptr[-1]), 1), np.int64)
                for i, row in enumerate(lists):
                    idx[ptr[i] : ptr[i + 1]] = sorted(row)
                return ptr, idx

            self._csr = csr(par_lists) + csr(ch_lists)
        return self._csr


def expand_from_slice(slice_edges, m, tau_max):
    """Stationary window DAG generated by edges into the lag-0 slice.

    Each representative edge (j, lag s) -> (i, lag 0) is copied to
    (j, s + t) -> (i, t) for every shift t that keeps the source inside
    the window.
    """
    out = set()
    for edge in slice_edges:
        src, dst, mark = _canonical_edge(edge)
        if mark != MARK_DIRECTED:
            raise InvalidInputError("expand_from_slice expects directed edges")
        if dst.lag != 0:
            raise InvalidInputError(f"slice edge {src}->{dst} must end at lag 0")
        if src.lag > tau_max:
            raise InvalidInputError(f"edge source {src} beyond tau_max={tau_max}")
        for shift in range(tau_max - src.lag + 1):
            out.add(
                Edge(NodeId(src.var, src.lag + shift), NodeId(dst.var, shift))
            )
    return WindowGraph(m, tau_max, out, kind=KIND_DAG)


def is_stationary(g):
    """True iff the lag-0-incident edges reproduce the whole graph."""
    if g.kind == KIND_CPDAG:
        # cpdag graphs store exactly the representative set by construction
        return True
    return g.edges == expand_from_slice(g.slice_edges(), g.m, g.tau_max).edges


def d_separated(g, s1, s2, s3=frozenset()):
    """Standard d-separation of s1 and s2 given s3 in a window DAG."""
    if g.kind != KIND_DAG:
        raise InvalidInputError("d-separation requires a DAG")
    query = SeparationQuery(s1, s2, s3)
    if not query.s1 or not query.s2:
        return True
    masks = []
    for part in (query.s1, query.s2, query.s3):
        mask = np.zeros(g.n_nodes, np.uint8)
        for node in part:
            g._check_node(node)
            mask[dense_index(NodeId(*node), g.m)] = 1
        masks.append(mask)
    par_ptr, par_idx, ch_ptr, ch_idx = g._csr_arrays()
    return not dsep_connected(par_ptr, par_idx, ch_ptr, ch_idx, *masks)


def dsep_oracle(g, memoize=True):
    """Wrap a window DAG as a CI oracle (True = independent)."""
    if not memoize:
        return lambda s1, s2, s3: d_separated(g, s1, s2, s3)
    cache = {}

    def oracle(s1, s2, s3):
        key = (frozenset(s1), frozenset(s2), frozenset(s3))
        hit = cache.get(key)
        if hit is None:
            hit = d_separated(g, *key)
            cache[key] = hit
        return hit

    return oracle


def satisfies_window_markov(g, oracle):
    """Each lag-0 node independent of its non-descendants given parents."""
    for var in range(g.m):
        node = NodeId(var, 0)
        pa = g.parents(node)
        rest = g.nondescendants(node) - pa
        if rest and not oracle(frozenset((node,)), rest, pa):
            return False
    return True


def is_window_subgraph_minimal(g, oracle, max_nodes=8):
    """No proper stationary subgraph keeps the window Markov property.

    Brute-force enumeration over subsets of the representative edges;
    exponential, capped at `max_nodes` window nodes. Test oracle only.
    """
    if g.n_nodes > max_nodes:
        raise SizeCapError(
            f"{g.n_nodes} window nodes exceed the cap of {max_nodes}"
        )
    if not is_stationary(g):
        raise InvalidInputError("minimality is defined for stationary graphs")
    if not satisfies_window_markov(g, oracle):
        raise InvalidInputError("graph must itself satisfy window Markov")
    reps = sorted(g.slice_edges())
    for k in range(len(reps)):
        for subset in itertools.combinations(reps, k):
            sub = expand_from_slice(subset, g.m, g.tau_max)
            if satisfies_window_markov(sub, oracle):
                return False
    return True
