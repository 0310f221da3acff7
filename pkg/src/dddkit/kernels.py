"""Hot numeric kernels.

Every kernel exists twice: a loop version compiled by numba (``*_jit``) and a
vectorised numpy version (``*_np``). Both compute the same expressions in the
same order so results agree bit-for-bit on ordinary inputs. The public name
binds to the jit version unless numba is missing or disabled through
``DDDKIT_DISABLE_NUMBA``.
"""
import numpy as np

from ._accel import HAS_NUMBA, njit

HIST_BINS = 16
TAU = 1e-12


# -- CART split search ----------------------------------------------------------

@njit
def best_split_jit(X, y, min_leaf):
    """Best Gini split over the columns of ``X``.

    ``y`` holds 0/1 labels as float64. Returns ``(column, threshold, score)``
    where ``score`` is ``n`` times the weighted child impurity; ``column`` is
    -1 when no split satisfies ``min_leaf``.
    """
    n, m = X.shape
    total1 = 0.0
    for i in range(n):
        total1 += y[i]
    best_col = -1
    best_thr = 0.0
    best_score = np.inf
    for c in range(m):
        order = np.argsort(X[:, c], kind="mergesort")
        l1 = 0.0
        for k in range(n - 1):
            a = X[order[k], c]
            l1 += y[order[k]]
            b = X[order[k + 1], c]
            nl = k + 1.0
            nr = n - nl
            if nl < min_leaf or nr < min_leaf or not a < b:
                continue
            l0 = nl - l1
            r1 = total1 - l1
            r0 = nr - r1
            score = (nl - (l1 * l1 + l0 * l0) / nl) + (nr - (r1 * r1 + r0 * r0) / nr)
            if score < best_score:
                best_score = score
                best_col = c
                thr = (a + b) / 2.0
                if not thr < b:
                    thr = a
                best_thr = thr
    return best_col, best_thr, best_score


def best_split_np(X, y, min_leaf):
    n, m = X.shape
    best = (-1, 0.0, np.inf)
    if n < 2:
        return best
    total1 = y.sum()
    nl = np.arange(1.0, n)
    nr = n - nl
    for c in range(m):
        order = np.argsort(X[:, c], kind="mergesort")
        xs = X[order, c]
        l1 = np.cumsum(y[order])[:-1]
        ok = (nl >= min_leaf) & (nr >= min_leaf) & (xs[:-1] < xs[1:])
        if not ok.any():
            continue
        l0 = nl - l1
        r1 = total1 - l1
        r0 = nr - r1
        score = (nl - (l1 * l1 + l0 * l0) / nl) + (nr - (r1 * r1 + r0 * r0) / nr)
        score = np.where(ok, score, np.inf)
        k = int(np.argmin(score))
        if score[k] < best[2]:
            thr = (xs[k] + xs[k + 1]) / 2.0
            if not thr < xs[k + 1]:
                thr = xs[k]
            best = (c, float(thr), float(score[k]))
    return best


# -- tree traversal ------------------------------------------------------------

@njit
def tree_apply_jit(X, feature, threshold, left, right):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for r in range(n):
        node = 0
        while left[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = node
    return out


def tree_apply_np(X, feature, threshold, left, right):
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    active = left[node] >= 0
    while active.any():
        r = rows[active]
        cur = node[active]
        go_left = X[r, feature[cur]] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
        active = left[node] >= 0
    return node


# -- SMO (maximal-gain working set selection) -------------------------------------

@njit
def smo_solve_jit(K, y, C, tol, max_iter):
    """Solve the soft-margin SVM dual with second-order working set selection.

    Minimises ``0.5 a'Qa - sum(a)`` over ``0 <= a <= C, y'a = 0`` where
    ``Q = (y y') * K``. Returns ``(alpha, rho, iterations, converged)``; the
    decision function is ``sum(a_i y_i K(x_i, x)) - rho``.
    """
    n = y.size
    a = np.zeros(n)
    G = -np.ones(n)
    it = 0
    converged = False
    while it < max_iter:
        # select i: argmax over I_up of -y G
        gmax = -np.inf
        i = -1
        for t in range(n):
            if (y[t] > 0 and a[t] < C) or (y[t] < 0 and a[t] > 0):
                v = -y[t] * G[t]
                if v > gmax:
                    gmax = v
                    i = t
        gmin = np.inf
        j = -1
        best = np.inf
        for t in range(n):
            if (y[t] > 0 and a[t] > 0) or (y[t] < 0 and a[t] < C):
                v = -y[t] * G[t]
                if v < gmin:
                    gmin = v
                if i >= 0 and v < gmax:
                    b = gmax - v
                    quad = K[i, i] + K[t, t] - 2.0 * K[i, t]
                    if quad <= 0:
                        quad = TAU
                    obj = -(b * b) / quad
                    if obj < best:
                        best = obj
                        j = t
        if i < 0 or j < 0 or gmax - gmin < tol:
            converged = True
            break
        it += 1
        Qij = y[i] * y[j] * K[i, j]
        ai = a[i]
        aj = a[j]
        if y[i] != y[j]:
            quad = K[i, i] + K[j, j] + 2.0 * Qij
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if diff > 0:
                if a[j] < 0:
                    a[j] = 0.0
                    a[i] = diff
            else:
                if a[i] < 0:
                    a[i] = 0.0
                    a[j] = -diff
            if diff > 0:
                if a[i] > C:
                    a[i] = C
                    a[j] = C - diff
            else:
                if a[j] > C:
                    a[j] = C
                    a[i] = C + diff
        else:
            quad = K[i, i] + K[j, j] - 2.0 * Qij
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            s = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if s > C:
                if a[i] > C:
                    a[i] = C
                    a[j] = s - C
            else:
                if a[j] < 0:
                    a[j] = 0.0
                    a[i] = s
            if s > C:
                if a[j] > C:
                    a[j] = C
                    a[i] = s - C
            else:
                if a[i] < 0:
                    a[i] = 0.0
                    a[j] = s
        dai = a[i] - ai
        daj = a[j] - aj
        for t in range(n):
            G[t] = G[t] + (y[t] * y[i] * K[t, i] * dai + y[t] * y[j] * K[t, j] * daj)
    return a, _rho_jit(a, y, G, C), it, converged


@njit
def _rho_jit(a, y, G, C):
    ub = np.inf
    lb = -np.inf
    nfree = 0
    sfree = 0.0
    for t in range(y.size):
        yg = y[t] * G[t]
        if a[t] >= C:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif a[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            nfree += 1
            sfree += yg
    if nfree > 0:
        return sfree / nfree
    return (ub + lb) / 2.0


def smo_solve_np(K, y, C, tol, max_iter):
    n = y.size
    a = np.zeros(n)
    G = -np.ones(n)
    diagK = np.diag(K).copy()
    it = 0
    converged = False
    while it < max_iter:
        up = ((y > 0) & (a < C)) | ((y < 0) & (a > 0))
        low = ((y > 0) & (a > 0)) | ((y < 0) & (a < C))
        v = -y * G
        i = -1
        gmax = -np.inf
        if up.any():
            vu = np.where(up, v, -np.inf)
            i = int(np.argmax(vu))
            gmax = vu[i]
        gmin = np.min(v[low]) if low.any() else np.inf
        j = -1
        if i >= 0:
            cand = low & (v < gmax)
            if cand.any():
                b = gmax - v
                quad = diagK[i] + diagK - 2.0 * K[i]
                quad = np.where(quad <= 0, TAU, quad)
                obj = np.where(cand, -(b * b) / quad, np.inf)
                j = int(np.argmin(obj))
        if i < 0 or j < 0 or gmax - gmin < tol:
            converged = True
            break
        it += 1
        Qij = y[i] * y[j] * K[i, j]
        ai, aj = a[i], a[j]
        if y[i] != y[j]:
            quad = K[i, i] + K[j, j] + 2.0 * Qij
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if diff > 0:
                if a[j] < 0:
                    a[j] = 0.0
                    a[i] = diff
            elif a[i] < 0:
                a[i] = 0.0
                a[j] = -diff
            if diff > 0:
                if a[i] > C:
                    a[i] = C
                    a[j] = C - diff
            elif a[j] > C:
                a[j] = C
                a[i] = C + diff
        else:
            quad = K[i, i] + K[j, j] - 2.0 * Qij
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            s = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if s > C:
                if a[i] > C:
                    a[i] = C
                    a[j] = s - C
            elif a[j] < 0:
                a[j] = 0.0
                a[i] = s
            if s > C:
                if a[j] > C:
                    a[j] = C
                    a[i] = s - C
            elif a[i] < 0:
                a[i] = 0.0
                a[j] = s
        dai = a[i] - ai
        daj = a[j] - aj
        G = G + (y * y[i] * K[:, i] * dai + y * y[j] * K[:, j] * daj)
    return a, _rho_np(a, y, G, C), it, converged


def _rho_np(a, y, G, C):
    yg = y * G
    at_ub = a >= C
    at_lb = (a <= 0) & ~at_ub
    free = ~(at_ub | at_lb)
    if free.any():
        return float(yg[free].sum() / free.sum())
    ub_mask = (at_ub & (y < 0)) | (at_lb & (y > 0))
    lb_mask = (at_ub & (y > 0)) | (at_lb & (y < 0))
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2.0)


# -- per-row window statistics ----------------------------------------------------

@njit
def hist_entropy_jit(X, bins):
    """Shannon entropy (bits) of a ``bins``-bin min-max histogram, per row."""
    n, w = X.shape
    out = np.zeros(n)
    counts = np.zeros(bins)
    edges = np.empty(bins + 1)
    for r in range(n):
        lo = X[r, 0]
        hi = X[r, 0]
        for k in range(w):
            lo = min(lo, X[r, k])
            hi = max(hi, X[r, k])
        if not hi > lo:
            continue
        counts[:] = 0.0
        for e in range(bins + 1):
            edges[e] = lo + e * ((hi - lo) / bins)
        edges[bins] = hi
        norm = bins / (hi - lo)
        for k in range(w):
            x = X[r, k]
            idx = int((x - lo) * norm)
            if idx >= bins:
                idx = bins - 1
            if x < edges[idx]:
                idx -= 1
            elif x >= edges[idx + 1] and idx != bins - 1:
                idx += 1
            counts[idx] += 1.0
        h = 0.0
        for b in range(bins):
            if counts[b] > 0:
                p = counts[b] / w
                h -= p * np.log2(p)
        out[r] = h
    return out


def hist_entropy_np(X, bins):
    n, w = X.shape
    out = np.zeros(n)
    lo = X.min(axis=1)
    hi = X.max(axis=1)
    ok = hi > lo
    if not ok.any():
        return out
    Xo, lo, hi = X[ok], lo[ok], hi[ok]
    step = ((hi - lo) / bins)[:, None]
    edges = lo[:, None] + np.arange(bins + 1) * step
    edges[:, bins] = hi
    norm = (bins / (hi - lo))[:, None]
    idx = ((Xo - lo[:, None]) * norm).astype(np.int64)
    idx = np.minimum(idx, bins - 1)
    rows = np.arange(Xo.shape[0])[:, None]
    below = Xo < edges[rows, idx]
    above = (Xo >= edges[rows, idx + 1]) & (idx != bins - 1)
    idx = idx - below + (above & ~below)
    counts = np.zeros((Xo.shape[0], bins))
    np.add.at(counts, (np.broadcast_to(rows, idx.shape), idx), 1.0)
    p = counts / w
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(counts > 0, p * np.log2(np.where(counts > 0, p, 1.0)), 0.0)
    h = np.zeros(Xo.shape[0])
    for b in range(bins):
        h -= terms[:, b]
    out[ok] = h
    return out


@njit
def crossings_jit(D):
    """Sign changes between neighbouring samples of each (centred) row."""
    n, w = D.shape
    out = np.zeros(n)
    for r in range(n):
        c = 0
        for k in range(w - 1):
            if D[r, k] * D[r, k + 1] < 0:
                c += 1
        out[r] = c
    return out


def crossings_np(D):
    return (D[:, :-1] * D[:, 1:] < 0).sum(axis=1).astype(np.float64)


if HAS_NUMBA:
    best_split = best_split_jit
    tree_apply = tree_apply_jit
    smo_solve = smo_solve_jit
    hist_entropy = hist_entropy_jit
    crossings = crossings_jit
else:
    best_split = best_split_np
    tree_apply = tree_apply_np
    smo_solve = smo_solve_np
    hist_entropy = hist_entropy_np
    crossings = crossings_np

BACKEND = "numba" if HAS_NUMBA else "numpy"
