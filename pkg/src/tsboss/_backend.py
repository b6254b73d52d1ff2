"""Hot numeric kernels, numba-compiled when available.

The same source is used for both backends: each kernel is written as a
plain function (``*_py``) and wrapped with ``numba.njit`` unless the
environment variable ``TSBOSS_NUMBA`` is set to ``0``/``false``/``off``.
Because the fallback executes the identical statements, results are
bit-identical between the compiled and uncompiled paths.

``benchmarks/bench_kernels.py`` times both variants side by side.
"""

import os

import numpy as np

__all__ = [
    "NUMBA_ENABLED",
    "backend_name",
    "simulate_paths",
    "dsep_connected",
    "dsep_signature",
    "regression_residual",
]

_FALSY = ("0", "false", "off", "no")
_TRUTHY = ("1", "true", "on", "yes")


def _numba_requested():
    flag = os.environ.get("TSBOSS_NUMBA", "").strip().lower()
    if flag in _FALSY:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        if flag in _TRUTHY:
            raise RuntimeError("TSBOSS_NUMBA=1 but numba is not importable")
        return False
    return True


NUMBA_ENABLED = _numba_requested()


def backend_name():
    return "numba" if NUMBA_ENABLED else "python"


def _jit(fn):
    if not NUMBA_ENABLED:
        return fn
    import numba

    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------------------
# linear ts-SCM simulation
# ---------------------------------------------------------------------------

def _simulate_paths_py(coeffs, topo, noise, out):
    """Iterate the structural equations of a linear ts-SCM.

    coeffs[tau, j, i] is the effect of variable i at lag tau on variable j;
    topo is a topological order of the contemporaneous structure; noise is
    the pre-drawn (steps, m) innovation matrix. out must be zero-initialized
    with the same shape as noise (zero initial conditions).
    """
    steps, m = noise.shape
    tau_max = coeffs.shape[0] - 1
    for t in range(steps):
        for pos in range(m):
            j = topo[pos]
            acc = noise[t, j]
            for tau in range(1, tau_max + 1):
                if t - tau >= 0:
                    for i in range(m):
                        c = coeffs[tau, j, i]
                        if c != 0.0:
                            acc += c * out[t - tau, i]
            for i in range(m):
                c = coeffs[0, j, i]
                if c != 0.0:
                    acc += c * out[t, i]
            out[t, j] = acc
    return out


simulate_paths = _jit(_simulate_paths_py)


# ---------------------------------------------------------------------------
# d-separation by ball-passing reachability
# ---------------------------------------------------------------------------

def _dsep_connected_py(par_ptr, par_idx, ch_ptr, ch_idx, s1, s2, s3):
    """True iff some node of s2 is reachable from s1 along an active path.

    Graph is given in CSR form (parents and children lists per node); the
    node sets are uint8 masks. Standard two-direction reachability: a node
    is expanded upward unless conditioned, and a collider bounces upward
    only when it is an ancestor of the conditioning set.
    """
    n = s1.shape[0]
    anc = np.zeros(n, np.uint8)
    stack = np.empty(n, np.int64)
    sp = 0
    for v in range(n):
        if s3[v]:
            anc[v] = 1
            stack[sp] = v
            sp += 1
    while sp > 0:
        sp -= 1
        v = stack[sp]
        for k in range(par_ptr[v], par_ptr[v + 1]):
            p = par_idx[k]
            if anc[p] == 0:
                anc[p] = 1
                stack[sp] = p
                sp += 1

    vis_up = np.zeros(n, np.uint8)
    vis_dn = np.zeros(n, np.uint8)
    st_node = np.empty(2 * n, np.int64)
    st_dir = np.empty(2 * n, np.int64)
    sp = 0
    for v in range(n):
        if s1[v]:
            vis_up[v] = 1
            st_node[sp] = v
            st_dir[sp] = 0
            sp += 1
    while sp > 0:
        sp -= 1
        v = st_node[sp]
        d = st_dir[sp]
        if s2[v]:
            return True
        if d == 0:
            # reached from a child: pass through unless conditioned
            if s3[v] == 0:
                for k in range(par_ptr[v], par_ptr[v + 1]):
                    p = par_idx[k]
                    if vis_up[p] == 0:
                        vis_up[p] = 1
                        st_node[sp] = p
                        st_dir[sp] = 0
                        sp += 1
                for k in range(ch_ptr[v], ch_ptr[v + 1]):
                    c = ch_idx[k]
                    if vis_dn[c] == 0:
                        vis_dn[c] = 1
                        st_node[sp] = c
                        st_dir[sp] = 1
                        sp += 1
        else:
            # reached from a parent: continue down if unconditioned,
            # bounce up at (ancestors of) conditioned colliders
            if s3[v] == 0:
                for k in range(ch_ptr[v], ch_ptr[v + 1]):
                    c = ch_idx[k]
                    if vis_dn[c] == 0:
                        vis_dn[c] = 1
                        st_node[sp] = c
                        st_dir[sp] = 1
                        sp += 1
            if anc[v] == 1:
                for k in range(par_ptr[v], par_ptr[v + 1]):
                    p = par_idx[k]
                    if vis_up[p] == 0:
                        vis_up[p] = 1
                        st_node[sp] = p
                        st_dir[sp] = 0
                        sp += 1
    return False


dsep_connected = _jit(_dsep_connected_py)


def _dsep_signature_py(n, par_ptr, par_idx, ch_ptr, ch_idx, out):
    """Fill out with the pairwise-separation fingerprint of a DAG.

    For every unordered pair x < y and every subset of the remaining
    nodes (as a bitmask in canonical order), out holds 1 when x and y
    are d-separated given the subset. Pairwise separations over all
    conditioning sets determine the full relation (composition holds
    for d-separation), so equal fingerprints mean identical separation
    statements.
    """
    s1 = np.zeros(n, np.uint8)
    s2 = np.zeros(n, np.uint8)
    s3 = np.zeros(n, np.uint8)
    others = np.empty(n - 2 if n >= 2 else 0, np.int64)
    pos = 0
    for x in range(n):
        for y in range(x + 1, n):
            t = 0
            for v in range(n):
                if v != x and v != y:
                    others[t] = v
                    t += 1
            for v in range(n):
                s1[v] = 0
                s2[v] = 0
            s1[x] = 1
            s2[y] = 1
            for mask in range(1 << (n - 2)):
                for v in range(n):
                    s3[v] = 0
                for b in range(n - 2):
                    if (mask >> b) & 1:
                        s3[others[b]] = 1
                if dsep_connected(par_ptr, par_idx, ch_ptr, ch_idx, s1, s2, s3):
                    out[pos] = 0
                else:
                    out[pos] = 1
                pos += 1
    return out


dsep_signature = _jit(_dsep_signature_py)


# ---------------------------------------------------------------------------
# regression residual variance from a covariance matrix
# ---------------------------------------------------------------------------

def _chol_factor_py(a):
    """In-place lower Cholesky; False when a pivot is non-positive."""
    k = a.shape[0]
    for j in range(k):
        d = a[j, j]
        for s in range(j):
            d -= a[j, s] * a[j, s]
        if d <= 0.0:
            return False
        d = np.sqrt(d)
        a[j, j] = d
        for i in range(j + 1, k):
            v = a[i, j]
            for s in range(j):
                v -= a[i, s] * a[j, s]
            a[i, j] = v / d
    return True


_chol_factor = _jit(_chol_factor_py)


def _regression_residual_py(cov, target, parents, ridge):
    """Residual variance of regressing target on parents, from cov.

    Returns (sigma2, ridge_used). A singular parent submatrix is retried
    with `ridge` added to the diagonal (escalated deterministically in the
    pathological case where even that fails to factor); sigma2 may come
    back non-positive in degenerate setups and is clamped by the caller.
    """
    k = parents.shape[0]
    if k == 0:
        return cov[target, target], False
    a = np.empty((k, k), np.float64)
    b = np.empty(k, np.float64)
    x = np.empty(k, np.float64)
    for i in range(k):
        b[i] = cov[parents[i], target]
        for j in range(k):
            a[i, j] = cov[parents[i], parents[j]]
    ridge_used = False
    if not _chol_factor(a):
        ridge_used = True
        eps = ridge
        ok = False
        for _ in range(32):
            for i in range(k):
                for j in range(k):
                    a[i, j] = cov[parents[i], parents[j]]
                a[i, i] += eps
            if _chol_factor(a):
                ok = True
                break
            eps *= 1000.0
        if not ok:
            return -1.0, True
    for i in range(k):
        v = b[i]
        for s in range(i):
            v -= a[i, s] * x[s]
        x[i] = v / a[i, i]
    for i in range(k - 1, -1, -1):
        v = x[i]
        for s in range(i + 1, k):
            v -= a[s, i] * x[s]
        x[i] = v / a[i, i]
    sigma2 = cov[target, target]
    for i in range(k):
        sigma2 -= b[i] * x[i]
    return sigma2, ridge_used


regression_residual = _jit(_regression_residual_py)
