"""TS-DAG to TS-CPDAG conversion, Meek-rule closure, and a brute-force
Markov-equivalence oracle.

All orientation work happens at the stationary representative level: lagged
edges are permanently directed by temporal order, and each contemporaneous
variable pair carries one shared mark across slices.
"""

from __future__ import annotations

import itertools

import numpy as np

from ._backend import dsep_signature
from .errors import InternalConsistencyError, InvalidInputError, SizeCapError
from .graphs import (
    KIND_CPDAG,
    KIND_DAG,
    MARK_DIRECTED,
    MARK_UNDIRECTED,
    Edge,
    NodeId,
    WindowGraph,
    expand_from_slice,
    is_stationary,
)

MEEK_CONTEMPORANEOUS = ("R1", "R2", "R3")
MEEK_MIXED = ("R1_mixed",)


class _RepPdag:
    """Mutable representative-level view: lagged parent sets per lag-0
    variable plus one orientation state per contemporaneous pair."""

    def __init__(self, m, tau_max):
        self.m = m
        self.tau_max = tau_max
        self.lagged = set()  # (src NodeId with lag > 0, dst var)
        self.orient = {}  # frozenset({i, j}) -> None | (tail, head)

    @classmethod
    def from_graph(cls, g):
        pdag = cls(g.m, g.tau_max)
        for src, dst, mark in g.slice_edges():
            if src.lag > 0:
                pdag.lagged.add((src, dst.var))
            elif mark == MARK_UNDIRECTED:
                pdag.orient[frozenset((src.var, dst.var))] = None
            else:
                pdag.orient[frozenset((src.var, dst.var))] = (src.var, dst.var)
        return pdag

    def lagged_parents(self, var):
        return [src for src, dst in self.lagged if dst == var]

    def contemp_adjacent(self, i, j):
        return frozenset((i, j)) in self.orient

    def lag0_adjacent_to_lagged(self, var, lagged_node):
        return (lagged_node, var) in self.lagged

    def undirected_partners(self, var):
        out = []
        for pair, state in self.orient.items():
            if state is None and var in pair:
                (other,) = pair - {var}
                out.append(other)
        return out

    def directed_out(self, var):
        return [head for pair, state in self.orient.items()
                if state is not None and state[0] == var for head in [state[1]]]

    def directed_in(self, var):
        return [tail for pair, state in self.orient.items()
                if state is not None and state[1] == var for tail in [state[0]]]

    def direct(self, tail, head):
        pair = frozenset((tail, head))
        state = self.orient[pair]
        if state is None:
            self.orient[pair] = (tail, head)
            return True
        if state != (tail, head):
            raise InternalConsistencyError(
                f"conflicting orientation requested for pair {tuple(sorted(pair))}"
            )
        return False

    def has_directed_cycle(self):
        color = {}

        def visit(v):
            color[v] = 1
            for w in self.directed_out(v):
                c = color.get(w, 0)
                if c == 1 or (c == 0 and visit(w)):
                    return True
            color[v] = 2
            return False

        return any(color.get(v, 0) == 0 and visit(v) for v in range(self.m))

    def to_graph(self):
        edges = [Edge(src, NodeId(dst, 0)) for src, dst in self.lagged]
        for pair, state in self.orient.items():
            if state is None:
                i, j = sorted(pair)
                edges.append(Edge(NodeId(i, 0), NodeId(j, 0), MARK_UNDIRECTED))
            else:
                edges.append(Edge(NodeId(state[0], 0), NodeId(state[1], 0)))
        return WindowGraph(self.m, self.tau_max, edges, kind=KIND_CPDAG)


def _apply_rules(pdag, rules):
    """One pass over the requested rules; True when something fired."""
    changed = False
    if "R1_mixed" in rules:
        # lagged L -> y, y - z undirected, L and z non-adjacent  =>  y -> z
        for pair in list(pdag.orient):
            if pdag.orient[pair] is not None:
                continue
            for y, z in itertools.permutations(sorted(pair)):
                fired = False
                for lag_parent in pdag.lagged_parents(y):
                    if not pdag.lag0_adjacent_to_lagged(z, lag_parent):
                        changed |= pdag.direct(y, z)
                        fired = True
                        break
                if fired:
                    break
    if "R1" in rules:
        # a -> b, b - c, a and c non-adjacent  =>  b -> c
        for pair in list(pdag.orient):
            if pdag.orient[pair] is not None:
                continue
            for b, c in itertools.permutations(sorted(pair)):
                if any(
                    not pdag.contemp_adjacent(a, c)
                    for a in pdag.directed_in(b)
                    if a != c
                ):
                    changed |= pdag.direct(b, c)
                    break
    if "R2" in rules:
        # a -> b -> c with a - c  =>  a -> c
        for pair in list(pdag.orient):
            if pdag.orient[pair] is not None:
                continue
            for a, c in itertools.permutations(sorted(pair)):
                mids = set(pdag.directed_out(a)) & set(pdag.directed_in(c))
                if mids:
                    changed |= pdag.direct(a, c)
                    break
    if "R3" in rules:
        # a - b, a - c, a - d, c -> b, d -> b, c and d non-adjacent  =>  a -> b
        for pair in list(pdag.orient):
            if pdag.orient[pair] is not None:
                continue
            for a, b in itertools.permutations(sorted(pair)):
                partners = set(pdag.undirected_partners(a))
                heads = [c for c in pdag.directed_in(b) if c in partners]
                if any(
                    not pdag.contemp_adjacent(c, d)
                    for c, d in itertools.combinations(sorted(heads), 2)
                ):
                    changed |= pdag.direct(a, b)
                    break
    return changed


def meek_closure(p, rules=MEEK_CONTEMPORANEOUS):
    """Fixed point of the given orientation rules on a representative PDAG.

    Monotone: only undirected marks become directed. Raises when rule
    application yields a directed contemporaneous cycle (invalid input).
    """
    unknown = set(rules) - set(MEEK_CONTEMPORANEOUS) - set(MEEK_MIXED)
    if unknown:
        raise InvalidInputError(f"unknown Meek rules {sorted(unknown)}")
    pdag = _RepPdag.from_graph(p)
    if pdag.has_directed_cycle():
        raise InvalidInputError("input already contains a directed cycle")
    while _apply_rules(pdag, rules):
        pass
    if pdag.has_directed_cycle():
        raise InternalConsistencyError("rule closure created a directed cycle")
    return pdag.to_graph()


def ts_dag_to_ts_cpdag(g):
    """Markov-equivalence representative of a stationary window DAG.

    Lagged edges stay directed; contemporaneous edges start undirected,
    collider members (including mixed-time colliders) are re-oriented as
    in the DAG, the mixed-triple variant of R1 runs to fixed point, and
    the contemporaneous Meek rules R1-R3 close the result.
    """
    if g.kind != KIND_DAG:
        raise InvalidInputError("conversion expects a DAG")
    if not is_stationary(g):
        raise InvalidInputError("conversion expects a stationary window graph")
    pdag = _RepPdag.from_graph(g)
    for pair in pdag.orient:
        pdag.orient[pair] = None
    for w in g.nodes():
        parents = sorted(g.parents(w))
        for u, v in itertools.combinations(parents, 2):
            if g.adjacent(u, v):
                continue
            for parent in (u, v):
                if parent.lag == w.lag:
                    pair = frozenset((parent.var, w.var))
                    state = pdag.orient[pair]
                    if state is not None and state != (parent.var, w.var):
                        raise InternalConsistencyError(
                            "collider orientation disagrees with the DAG"
                        )
                    pdag.orient[pair] = (parent.var, w.var)
    while _apply_rules(pdag, MEEK_MIXED):
        pass
    while _apply_rules(pdag, MEEK_CONTEMPORANEOUS):
        pass
    if pdag.has_directed_cycle():
        raise InternalConsistencyError("orientation closure created a cycle")
    return pdag.to_graph()


def pdag_to_stationary_dag(p):
    """Consistent stationary DAG extension of a representative PDAG.

    Repeatedly selects a contemporaneous sink whose undirected neighbors
    are adjacent to all of its other adjacents (lagged parents included,
    so no new mixed-time collider can appear), orients that sink's
    undirected edges inward, and retires it.
    """
    pdag = _RepPdag.from_graph(p)
    remaining = set(range(pdag.m))
    while remaining:
        sink = None
        sink_nbrs = None
        for v in sorted(remaining):
            if any(h in remaining for h in pdag.directed_out(v)):
                continue
            nbrs = [w for w in pdag.undirected_partners(v) if w in remaining]
            adjacents = set(nbrs)
            adjacents.update(u for u in pdag.directed_in(v) if u in remaining)
            lag_parents = pdag.lagged_parents(v)
            ok = True
            for w in nbrs:
                for u in adjacents:
                    if u != w and not pdag.contemp_adjacent(u, w):
                        ok = False
                        break
                if ok:
                    for lp in lag_parents:
                        if not pdag.lag0_adjacent_to_lagged(w, lp):
                            ok = False
                            break
                if not ok:
                    break
            if ok:
                sink, sink_nbrs = v, nbrs
                break
        if sink is None:
            raise InternalConsistencyError(
                "PDAG admits no stationary DAG extension"
            )
        for w in sink_nbrs:
            pdag.direct(w, sink)
        remaining.discard(sink)
    edges = [Edge(src, NodeId(dst, 0)) for src, dst in pdag.lagged]
    edges.extend(
        Edge(NodeId(state[0], 0), NodeId(state[1], 0))
        for state in pdag.orient.values()
    )
    return expand_from_slice(edges, pdag.m, pdag.tau_max)


def graph_dsep_fingerprint(g):
    """Bytes identifying all d-separation statements of a window DAG.

    Pairwise separations over every conditioning subset; equality of
    fingerprints is equality of the full separation relation.
    """
    n = g.n_nodes
    par_ptr, par_idx, ch_ptr, ch_idx = g._csr_arrays()
    size = (n * (n - 1) // 2) * (1 << max(n - 2, 0))
    out = np.zeros(max(size, 1), np.uint8)
    dsep_signature(n, par_ptr, par_idx, ch_ptr, ch_idx, out)
    return out.tobytes()


def _contemp_orientation_acyclic(m, oriented_pairs):
    children = {}
    for tail, head in oriented_pairs:
        children.setdefault(tail, set()).add(head)
    color = {}

    def visit(v):
        color[v] = 1
        for w in children.get(v, ()):
            c = color.get(w, 0)
            if c == 1 or (c == 0 and visit(w)):
                return True
        color[v] = 2
        return False

    return not any(color.get(v, 0) == 0 and visit(v) for v in range(m))


def mec_brute_force(g, max_nodes=8):
    """All stationary window DAGs with g's skeleton and d-separations.

    Enumerates every orientation of the contemporaneous representative
    edges (lagged edges are fixed by time order) and keeps the acyclic
    ones whose d-separation fingerprint matches. Exponential; capped.
    """
    if g.kind != KIND_DAG:
        raise InvalidInputError("expected a DAG")
    if not is_stationary(g):
        raise InvalidInputError("expected a stationary window graph")
    if g.n_nodes > max_nodes:
        raise SizeCapError(f"{g.n_nodes} window nodes exceed cap {max_nodes}")
    lagged = []
    pairs = []
    for src, dst, _ in sorted(g.slice_edges()):
        if src.lag > 0:
            lagged.append(Edge(src, dst))
        else:
            pairs.append((src.var, dst.var))
    target = graph_dsep_fingerprint(g)
    members = []
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        oriented = [
            (i, j) if bit == 0 else (j, i) for (i, j), bit in zip(pairs, bits)
        ]
        if not _contemp_orientation_acyclic(g.m, oriented):
            continue
        edges = lagged + [
            Edge(NodeId(t, 0), NodeId(h, 0)) for t, h in oriented
        ]
        cand = expand_from_slice(edges, g.m, g.tau_max)
        if graph_dsep_fingerprint(cand) == target:
            members.append(cand)
    return members
