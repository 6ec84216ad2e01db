"""NumPy fallback for the compiled tree kernels (same results, bit for bit)."""
import numpy as np


def best_split(XT, idx, y, w, features, t0, t1):
    """Return ``(feature, threshold, impurity)``; feature is -1 when no split exists.

    ``XT`` is the feature-major (transposed) data matrix.
    """
    n = idx.shape[0]
    if n < 2:
        return -1, 0.0, 0.0
    T = t0 + t1
    yi = y[idx]
    wi = w[idx]
    best_f, best_thr, best_imp = -1, 0.0, 0.0
    for f in features:
        v = XT[f, idx]
        order = np.lexsort((idx, v))
        vs = v[order]
        l0 = np.cumsum(np.where(yi[order] == 0, wi[order], 0.0))[:-1]
        l1 = np.cumsum(np.where(yi[order] == 0, 0.0, wi[order]))[:-1]
        a = vs[:-1]
        b = vs[1:]
        r0 = t0 - l0
        r1 = t1 - l1
        L = l0 + l1
        R = r0 + r1
        ok = (a < b) & (L > 0.0) & (R > 0.0)
        if not ok.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            imp = ((L - (l0 * l0 + l1 * l1) / L) + (R - (r0 * r0 + r1 * r1) / R)) / T
        imp = np.where(ok, imp, np.inf)
        j = int(np.argmin(imp))
        if best_f == -1 or imp[j] < best_imp:
            mid = (a[j] + b[j]) * 0.5
            if mid >= b[j]:
                mid = a[j]
            best_f, best_thr, best_imp = int(f), float(mid), float(imp[j])
    return best_f, best_thr, best_imp


def apply_tree(X, feature, threshold, left, right):
    """Leaf node index reached by every row of ``X``."""
    node = np.zeros(X.shape[0], dtype=np.intp)
    active = feature[node] >= 0
    while active.any():
        rows = np.flatnonzero(active)
        cur = node[rows]
        go_left = X[rows, feature[cur]] <= threshold[cur]
        node[rows] = np.where(go_left, left[cur], right[cur])
        active[rows] = feature[node[rows]] >= 0
    return node
