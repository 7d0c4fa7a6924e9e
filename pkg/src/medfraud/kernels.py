"""Hot numeric loops, each in a numba flavour and a pure-numpy flavour.

The public names at the bottom of the module are bound to one flavour based on
``MEDFRAUD_NUMBA``. Both flavours perform the same floating-point operations in
the same order so that exact kernels (distances, split scans, tree traversal)
return bit-identical results on either backend; ``welford`` is the exception
(the numpy path merges chunk moments and agrees to rounding only).
"""
import numpy as np

from ._accel import USE_NUMBA, njit, prange

# Upper bound on distance-matrix cells materialised per block by the numpy path.
_BLOCK_CELLS = 1 << 22


# --------------------------------------------------------------------------
# exact k-nearest-neighbour search
# --------------------------------------------------------------------------

@njit(parallel=True)
def _knn_numba(Q, R, k, exclude_self):
    nq = Q.shape[0]
    nr = R.shape[0]
    d = Q.shape[1]
    idx_out = np.full((nq, k), -1, dtype=np.int64)
    dist_out = np.full((nq, k), np.inf)
    for i in prange(nq):
        bd = np.full(k, np.inf)
        bi = np.full(k, -1, dtype=np.int64)
        q = Q[i]
        for j in range(nr):
            if exclude_self and i == j:
                continue
            r = R[j]
            lim = bd[k - 1]
            s = 0.0
            c = 0
            while c < d:
                t = q[c] - r[c]
                s += t * t
                c += 1
                # partial sums only grow, so abandoning here is exact
                if (c & 7) == 0 and s >= lim:
                    break
            if s < lim:
                p = k - 1
                while p > 0 and bd[p - 1] > s:
                    bd[p] = bd[p - 1]
                    bi[p] = bi[p - 1]
                    p -= 1
                bd[p] = s
                bi[p] = j
        idx_out[i] = bi
        dist_out[i] = bd
    return idx_out, dist_out


def _knn_numpy(Q, R, k, exclude_self):
    nq, d = Q.shape
    nr = R.shape[0]
    idx_out = np.empty((nq, k), dtype=np.int64)
    dist_out = np.empty((nq, k))
    block = max(1, _BLOCK_CELLS // max(nr, 1))
    for start in range(0, nq, block):
        stop = min(nq, start + block)
        d2 = np.zeros((stop - start, nr))
        for c in range(d):
            t = Q[start:stop, c, None] - R[None, :, c]
            d2 += t * t
        if exclude_self:
            rows = np.arange(stop - start)
            d2[rows, start + rows] = np.inf
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        idx_out[start:stop] = order
        dist_out[start:stop] = np.take_along_axis(d2, order, axis=1)
    return idx_out, dist_out


def _as_f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def knn_search(query, reference, k, exclude_self=False, backend=None):
    """Indices and squared distances of the ``k`` nearest reference rows.

    Neighbours are ordered by (squared Euclidean distance, reference index), so
    distance ties resolve to the lower row index. With ``exclude_self`` the
    query matrix must be the reference matrix and row ``i`` never lists itself.
    """
    Q = _as_f64(query)
    R = _as_f64(reference)
    if Q.ndim != 2 or R.ndim != 2 or Q.shape[1] != R.shape[1]:
        raise ValueError(f"incompatible shapes {Q.shape} and {R.shape}")
    available = R.shape[0] - (1 if exclude_self else 0)
    if not 1 <= k <= available:
        raise ValueError(f"k={k} must be in [1, {available}]")
    if exclude_self and Q.shape[0] != R.shape[0]:
        raise ValueError("exclude_self requires query and reference to be the same rows")
    fn = _pick(_knn_numba, _knn_numpy, backend)
    return fn(Q, R, int(k), bool(exclude_self))


# --------------------------------------------------------------------------
# CART split search (weighted Gini)
# --------------------------------------------------------------------------

@njit
def _best_split_numba(X, y, w, idx, features):
    n = idx.shape[0]
    best_f = -1
    best_t = 0.0
    best_imp = np.inf
    vals = np.empty(n)
    cw = np.empty(n)
    cp = np.empty(n)
    for f in features:
        for i in range(n):
            vals[i] = X[idx[i], f]
        order = np.argsort(vals, kind="mergesort")
        aw = 0.0
        ap = 0.0
        for j in range(n):
            r = idx[order[j]]
            aw += w[r]
            ap += w[r] * y[r]
            cw[j] = aw
            cp[j] = ap
        W = cw[n - 1]
        P = cp[n - 1]
        for j in range(n - 1):
            a = vals[order[j]]
            b = vals[order[j + 1]]
            if a < b:
                wl = cw[j]
                pl = cp[j]
                wr = W - wl
                pr = P - pl
                ql = pl / wl
                qr = pr / wr
                gl = 1.0 - ql * ql - (1.0 - ql) * (1.0 - ql)
                gr = 1.0 - qr * qr - (1.0 - qr) * (1.0 - qr)
                imp = (wl * gl + wr * gr) / W
                if imp < best_imp:
                    best_imp = imp
                    best_f = f
                    t = 0.5 * (a + b)
                    if not t < b:
                        t = a
                    best_t = t
    return best_f, best_t, best_imp


def _best_split_numpy(X, y, w, idx, features):
    best_f, best_t, best_imp = -1, 0.0, np.inf
    wi = w[idx]
    yi = y[idx]
    for f in features:
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        cw = np.cumsum(wi[order])
        cp = np.cumsum(wi[order] * yi[order])
        W = cw[-1]
        P = cp[-1]
        cand = np.flatnonzero(sv[:-1] < sv[1:])
        if cand.size == 0:
            continue
        wl = cw[cand]
        pl = cp[cand]
        wr = W - wl
        pr = P - pl
        ql = pl / wl
        qr = pr / wr
        gl = 1.0 - ql * ql - (1.0 - ql) * (1.0 - ql)
        gr = 1.0 - qr * qr - (1.0 - qr) * (1.0 - qr)
        imp = (wl * gl + wr * gr) / W
        j = int(np.argmin(imp))
        if imp[j] < best_imp:
            best_imp = float(imp[j])
            best_f = int(f)
            a, b = sv[cand[j]], sv[cand[j] + 1]
            t = 0.5 * (a + b)
            best_t = float(t if t < b else a)
    return best_f, best_t, best_imp


def best_split(X, y, w, idx, features, backend=None):
    """Best (feature, threshold, weighted Gini) over ``features`` for rows ``idx``.

    The impurity is the child Gini values averaged by child weight, i.e.
    normalised by the node's total weight.

    Thresholds sit at midpoints between consecutive distinct sorted values and
    rows with ``x <= threshold`` go left. Ties keep the earliest candidate in
    feature order, then the lowest threshold. Returns feature ``-1`` when every
    candidate feature is constant on the node.
    """
    fn = _pick(_best_split_numba, _best_split_numpy, backend)
    f, t, imp = fn(X, y, w, np.asarray(idx, dtype=np.int64), np.asarray(features, dtype=np.int64))
    return int(f), float(t), float(imp)


# --------------------------------------------------------------------------
# decision-stump search for boosting (presorted columns)
# --------------------------------------------------------------------------

@njit
def _best_stump_numba(X, order, y, w):
    n, d = X.shape
    best_err = np.inf
    best_f = -1
    best_t = 0.0
    best_s = 1
    cneg = np.empty(n)
    cpos = np.empty(n)
    for f in range(d):
        an = 0.0
        ap = 0.0
        for j in range(n):
            r = order[j, f]
            if y[r] > 0:
                ap += w[r]
            else:
                an += w[r]
            cneg[j] = an
            cpos[j] = ap
        Neg = cneg[n - 1]
        Pos = cpos[n - 1]
        for j in range(n - 1):
            a = X[order[j, f], f]
            b = X[order[j + 1, f], f]
            if a < b:
                e_plus = cneg[j] + (Pos - cpos[j])
                e_minus = cpos[j] + (Neg - cneg[j])
                if e_plus < best_err or e_minus < best_err:
                    t = 0.5 * (a + b)
                    if not t < b:
                        t = a
                    if e_plus <= e_minus:
                        best_err = e_plus
                        best_s = 1
                    else:
                        best_err = e_minus
                        best_s = -1
                    best_f = f
                    best_t = t
    return best_f, best_t, best_s, best_err


def _best_stump_numpy(X, order, y, w):
    best_err, best_f, best_t, best_s = np.inf, -1, 0.0, 1
    pos = y > 0
    for f in range(X.shape[1]):
        o = order[:, f]
        sv = X[o, f]
        cpos = np.cumsum(np.where(pos[o], w[o], 0.0))
        cneg = np.cumsum(np.where(pos[o], 0.0, w[o]))
        Pos = cpos[-1]
        Neg = cneg[-1]
        cand = np.flatnonzero(sv[:-1] < sv[1:])
        if cand.size == 0:
            continue
        e_plus = cneg[cand] + (Pos - cpos[cand])
        e_minus = cpos[cand] + (Neg - cneg[cand])
        e = np.minimum(e_plus, e_minus)
        j = int(np.argmin(e))
        if e[j] < best_err:
            c = cand[j]
            a, b = sv[c], sv[c + 1]
            t = 0.5 * (a + b)
            best_t = float(t if t < b else a)
            if e_plus[j] <= e_minus[j]:
                best_err, best_s = float(e_plus[j]), 1
            else:
                best_err, best_s = float(e_minus[j]), -1
            best_f = f
    return best_f, best_t, best_s, best_err


def best_stump(X, order, y, w, backend=None):
    """Exhaustive weighted-error stump search.

    ``order`` holds a stable argsort of every column of ``X``; ``y`` is in
    {-1, +1}. A stump with polarity ``s`` predicts ``s`` for ``x <= t`` and
    ``-s`` otherwise. Returns ``(feature, threshold, polarity, weighted_error)``
    with the error unnormalised (sum of misclassified weights).
    """
    if order.shape != X.shape or y.shape[0] != X.shape[0] or w.shape[0] != X.shape[0]:
        raise ValueError(f"order {order.shape}, y {y.shape} and w {w.shape} do not match X {X.shape}")
    fn = _pick(_best_stump_numba, _best_stump_numpy, backend)
    f, t, s, e = fn(X, order, y, w)
    return int(f), float(t), int(s), float(e)


# --------------------------------------------------------------------------
# tree traversal
# --------------------------------------------------------------------------

@njit
def _tree_apply_numba(feature, threshold, left, right, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


def _tree_apply_numpy(feature, threshold, left, right, X):
    nodes = np.zeros(X.shape[0], dtype=np.int64)
    active = np.flatnonzero(feature[nodes] >= 0)
    while active.size:
        cur = nodes[active]
        go_left = X[active, feature[cur]] <= threshold[cur]
        nodes[active] = np.where(go_left, left[cur], right[cur])
        active = active[feature[nodes[active]] >= 0]
    return nodes


def tree_apply(feature, threshold, left, right, X, backend=None):
    """Leaf index reached by every row of ``X`` (``feature < 0`` marks a leaf)."""
    fn = _pick(_tree_apply_numba, _tree_apply_numpy, backend)
    return fn(feature, threshold, left, right, _as_f64(X))


# --------------------------------------------------------------------------
# streaming moments
# --------------------------------------------------------------------------

@njit
def _welford_numba(x):
    n = 0
    mean = 0.0
    m2 = 0.0
    for v in x:
        n += 1
        delta = v - mean
        mean += delta / n
        m2 += delta * (v - mean)
    return n, mean, m2


def _welford_numpy(x, chunk=1 << 16):
    # Chan et al. pairwise merge of per-chunk moments.
    n, mean, m2 = 0, 0.0, 0.0
    for start in range(0, x.shape[0], chunk):
        c = x[start:start + chunk]
        nb = c.shape[0]
        mb = float(c.mean())
        m2b = float(((c - mb) ** 2).sum())
        if n == 0:
            n, mean, m2 = nb, mb, m2b
            continue
        tot = n + nb
        delta = mb - mean
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    return n, mean, m2


def welford(x, backend=None):
    """Single-pass ``(count, mean, sum of squared deviations)``."""
    fn = _pick(_welford_numba, _welford_numpy, backend)
    n, mean, m2 = fn(_as_f64(x).ravel())
    return int(n), float(mean), float(m2)


def _pick(numba_fn, numpy_fn, backend):
    if backend is None:
        return numba_fn if USE_NUMBA else numpy_fn
    if backend == "numba":
        return numba_fn
    if backend == "numpy":
        return numpy_fn
    raise ValueError(f"unknown backend {backend!r}")
