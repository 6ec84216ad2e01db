# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled split-search and tree-traversal kernels.

Must stay numerically identical to ``_tree_py``; the arithmetic below is
written in the same order as the NumPy fallback.
"""
import numpy as np

cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


ctypedef struct Pair:
    double v
    Py_ssize_t i


cdef inline bint _less(Pair* a, Pair* b) noexcept nogil:
    return a.v < b.v or (a.v == b.v and a.i < b.i)


cdef inline void _swap(Pair* p, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    cdef Pair t = p[a]
    p[a] = p[b]
    p[b] = t


cdef void _insertion(Pair* p, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef Pair key
    for i in range(1, n):
        key = p[i]
        j = i - 1
        while j >= 0 and _less(&key, &p[j]):
            p[j + 1] = p[j]
            j -= 1
        p[j + 1] = key


cdef void _sift_down(Pair* p, Py_ssize_t start, Py_ssize_t end) noexcept nogil:
    cdef Py_ssize_t root = start, child
    while 2 * root + 1 < end:
        child = 2 * root + 1
        if child + 1 < end and _less(&p[child], &p[child + 1]):
            child += 1
        if _less(&p[root], &p[child]):
            _swap(p, root, child)
            root = child
        else:
            return


cdef void _heapsort(Pair* p, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t start = (n - 2) // 2, end
    while start >= 0:
        _sift_down(p, start, n)
        start -= 1
    end = n - 1
    while end > 0:
        _swap(p, 0, end)
        _sift_down(p, 0, end)
        end -= 1


cdef void _introsort(Pair* p, Py_ssize_t n, int maxd) noexcept nogil:
    # (value, index) keys are unique, so the order is fully determined
    cdef Py_ssize_t i, j, mid
    cdef Pair pivot
    while n > 16:
        if maxd <= 0:
            _heapsort(p, n)
            return
        maxd -= 1
        mid = n // 2
        if _less(&p[mid], &p[0]):
            _swap(p, 0, mid)
        if _less(&p[n - 1], &p[0]):
            _swap(p, 0, n - 1)
        if _less(&p[n - 1], &p[mid]):
            _swap(p, mid, n - 1)
        pivot = p[mid]
        i = 0
        j = n - 1
        while True:
            while _less(&p[i], &pivot):
                i += 1
            while _less(&pivot, &p[j]):
                j -= 1
            if i >= j:
                break
            _swap(p, i, j)
            i += 1
            j -= 1
        _introsort(p, j + 1, maxd)
        p += j + 1
        n -= j + 1
    _insertion(p, n)


cdef inline int _clz(Py_ssize_t n) noexcept nogil:
    cdef int c = 0
    cdef unsigned long long u = <unsigned long long>n
    while c < 64 and not (u & (1ULL << 63)):
        u <<= 1
        c += 1
    return c


def best_split(const double[:, ::1] XT, const Py_ssize_t[::1] idx,
               const signed char[::1] y, const double[::1] w,
               const Py_ssize_t[::1] features, double t0, double t1):
    """Return ``(feature, threshold, impurity)``; feature is -1 when no split exists.

    ``XT`` is the feature-major (transposed) data matrix.
    """
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t nf = features.shape[0]
    cdef Py_ssize_t best_f = -1
    cdef double best_thr = 0.0
    cdef double best_imp = 0.0
    cdef double T = t0 + t1
    cdef Py_ssize_t k, j, f, s
    cdef double l0, l1, r0, r1, L, R, imp, a, b, mid, ws
    cdef Pair* pairs
    if n < 2:
        return -1, 0.0, 0.0
    pairs = <Pair*>malloc(n * sizeof(Pair))
    if pairs == NULL:
        raise MemoryError()
    try:
        with nogil:
            for k in range(nf):
                f = features[k]
                for j in range(n):
                    pairs[j].v = XT[f, idx[j]]
                    pairs[j].i = idx[j]
                _introsort(pairs, n, 2 * (64 - _clz(n)))
                l0 = 0.0
                l1 = 0.0
                for j in range(n - 1):
                    s = pairs[j].i
                    ws = w[s]
                    if y[s] == 0:
                        l0 = l0 + ws
                        l1 = l1 + 0.0
                    else:
                        l0 = l0 + 0.0
                        l1 = l1 + ws
                    a = pairs[j].v
                    b = pairs[j + 1].v
                    if not (a < b):
                        continue
                    r0 = t0 - l0
                    r1 = t1 - l1
                    L = l0 + l1
                    R = r0 + r1
                    if L <= 0.0 or R <= 0.0:
                        continue
                    imp = ((L - (l0 * l0 + l1 * l1) / L) + (R - (r0 * r0 + r1 * r1) / R)) / T
                    if best_f == -1 or imp < best_imp:
                        mid = (a + b) * 0.5
                        if mid >= b:
                            mid = a
                        best_f = f
                        best_thr = mid
                        best_imp = imp
    finally:
        free(pairs)
    return best_f, best_thr, best_imp


def apply_tree(const double[:, ::1] X, const Py_ssize_t[::1] feature,
               const double[::1] threshold, const Py_ssize_t[::1] left,
               const Py_ssize_t[::1] right):
    """Leaf node index reached by every row of ``X``."""
    cdef Py_ssize_t n = X.shape[0]
    out = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] o = out
    cdef Py_ssize_t r, node
    with nogil:
        for r in range(n):
            node = 0
            while feature[node] >= 0:
                if X[r, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            o[r] = node
    return out
