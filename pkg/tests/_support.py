"""Shared test oracles and generators, independent of the library's own
algorithm paths wherever they are used as references."""

import itertools

import numpy as np

from tsboss.graphs import (
    MARK_DIRECTED,
    Edge,
    NodeId,
    WindowGraph,
    column_order,
    expand_from_slice,
)
from tsboss.scoring import SufficientStats


# ---------------------------------------------------------------------------
# path-enumeration d-separation (reference for the reachability kernel)
# ---------------------------------------------------------------------------

def path_dsep(g, s1, s2, s3):
    """d-separation by brute-force enumeration of simple undirected paths."""
    s1, s2, s3 = set(s1), set(s2), set(s3)
    children = {n: set() for n in g.nodes()}
    parents = {n: set() for n in g.nodes()}
    for src, dst, mark in g.edges:
        assert mark == MARK_DIRECTED
        children[src].add(dst)
        parents[dst].add(src)
    neighbors = {n: children[n] | parents[n] for n in g.nodes()}

    def descendants_or_self(n):
        out = {n}
        stack = [n]
        while stack:
            for c in children[stack.pop()]:
                if c not in out:
                    out.add(c)
                    stack.append(c)
        return out

    def path_active(path):
        for i in range(1, len(path) - 1):
            prev, node, nxt = path[i - 1], path[i], path[i + 1]
            collider = node in children[prev] and node in children[nxt]
            if collider:
                if not (descendants_or_self(node) & s3):
                    return False
            elif node in s3:
                return False
        return True

    def connected(x, y):
        stack = [(x,)]
        while stack:
            path = stack.pop()
            node = path[-1]
            if node == y:
                if path_active(path):
                    return True
                continue
            for nxt in neighbors[node]:
                if nxt not in path:
                    stack.append(path + (nxt,))
        return False

    return not any(connected(x, y) for x in s1 for y in s2)


# ---------------------------------------------------------------------------
# random stationary window DAGs
# ---------------------------------------------------------------------------

def random_stationary_dag(m, tau_max, rng, p_edge=0.4):
    """Random representative edges: contemporaneous part acyclic along a
    random hidden order, every lagged slot filled independently."""
    order = list(rng.permutation(m))
    edges = []
    for a in range(m):
        for b in range(a + 1, m):
            if rng.random() < p_edge:
                edges.append(Edge(NodeId(order[a], 0), NodeId(order[b], 0)))
    for tau in range(1, tau_max + 1):
        for i in range(m):
            for j in range(m):
                if rng.random() < p_edge:
                    edges.append(Edge(NodeId(i, tau), NodeId(j, 0)))
    return expand_from_slice(edges, m, tau_max)


def all_stationary_dags(m, tau_max):
    """Every stationary window DAG on the grid (representative level)."""
    contemp_pairs = list(itertools.combinations(range(m), 2))
    lagged_slots = [
        (i, tau, j)
        for tau in range(1, tau_max + 1)
        for i in range(m)
        for j in range(m)
    ]
    for contemp_choice in itertools.product((0, 1, 2), repeat=len(contemp_pairs)):
        base = []
        for (i, j), c in zip(contemp_pairs, contemp_choice):
            if c == 1:
                base.append(Edge(NodeId(i, 0), NodeId(j, 0)))
            elif c == 2:
                base.append(Edge(NodeId(j, 0), NodeId(i, 0)))
        try:
            expand_from_slice(base, m, tau_max)
        except Exception:
            continue  # cyclic contemporaneous choice
        for lag_bits in itertools.product((0, 1), repeat=len(lagged_slots)):
            edges = list(base)
            edges.extend(
                Edge(NodeId(i, tau), NodeId(j, 0))
                for (i, tau, j), bit in zip(lagged_slots, lag_bits)
                if bit
            )
            yield expand_from_slice(edges, m, tau_max)


def random_admissible_lag0_order(m, tau_max, rng):
    from tsboss.search import initial_permutation

    perm = initial_permutation(m, tau_max)
    lag0 = [NodeId(int(v), 0) for v in rng.permutation(m)]
    return perm.with_lag0_order(lag0)


# ---------------------------------------------------------------------------
# population covariance of a window graph treated as a static linear SCM
# ---------------------------------------------------------------------------

def static_population_cov(g, rng, low=0.4, high=0.9):
    """Exact covariance of a linear-Gaussian SCM whose DAG is the window
    graph with random +-U[low, high] weights and unit noise. Columns are
    in the canonical dataset order."""
    cols = column_order(g.m, g.tau_max)
    idx = {n: i for i, n in enumerate(cols)}
    p = len(cols)
    w = np.zeros((p, p))
    for src, dst, _ in g.edges:
        sign = 1.0 if rng.random() < 0.5 else -1.0
        w[idx[dst], idx[src]] = sign * rng.uniform(low, high)
    ident = np.eye(p)
    inv = np.linalg.inv(ident - w)
    cov = inv @ inv.T
    return (cov + cov.T) * 0.5


def population_stats(g, rng, n=1_000_000):
    return SufficientStats(static_population_cov(g, rng), n, column_order(g.m, g.tau_max))


def faithful_population_stats(g, rng, n=1_000_000, tol=1e-9, max_tries=50):
    """Population stats whose vanishing partial correlations coincide with
    the graph's d-separations (resampling the generically-faithful draw)."""
    from tsboss.graphs import d_separated

    cols = column_order(g.m, g.tau_max)
    nodes = list(cols)
    for _ in range(max_tries):
        cov = static_population_cov(g, rng)
        ok = True
        for x, y in itertools.combinations(range(len(nodes)), 2):
            rest = [v for v in range(len(nodes)) if v not in (x, y)]
            for r in range(len(rest) + 1):
                for cond in itertools.combinations(rest, r):
                    sep = d_separated(
                        g, {nodes[x]}, {nodes[y]}, {nodes[c] for c in cond}
                    )
                    if abs(_partial_corr(cov, x, y, cond)) < tol:
                        if not sep:
                            ok = False
                    elif sep:
                        ok = False
                    if not ok:
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return SufficientStats(cov, n, cols)
    raise AssertionError("no faithful parameterization found")


def _partial_corr(cov, x, y, cond):
    sel = [x, y, *cond]
    sub = cov[np.ix_(sel, sel)]
    prec = np.linalg.inv(sub)
    return -prec[0, 1] / np.sqrt(prec[0, 0] * prec[1, 1])


# ---------------------------------------------------------------------------
# exhaustive permutation search (reference for phase 1 at tiny scale)
# ---------------------------------------------------------------------------

def exhaustive_best_permutation(trees, m, tau_max):
    from tsboss.search import initial_permutation, permutation_score

    base = initial_permutation(m, tau_max)
    best = None
    best_score = -np.inf
    for lag0 in itertools.permutations([NodeId(v, 0) for v in range(m)]):
        pi = base.with_lag0_order(lag0)
        s = permutation_score(trees, pi)
        if s > best_score:
            best, best_score = pi, s
    return best, best_score
