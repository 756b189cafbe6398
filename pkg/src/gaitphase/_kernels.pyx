# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: windowed features, tree growing, SMO solver.

Semantics match ``_kernels_py`` (the pure-NumPy fallback); see there for
the contracts.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY

cnp.import_array()

BACKEND = "compiled"

DEF GAIN_EPS = 1e-12


def window_features(object x_in, object starts_in, int width):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] starts = np.ascontiguousarray(starts_in, dtype=np.int64)
    if width < 2:
        raise ValueError("window width must be >= 2")
    cdef Py_ssize_t m = starts.shape[0], n = x.shape[0]
    cdef Py_ssize_t w, i, s
    for w in range(m):
        if starts[w] < 0 or starts[w] + width > n:
            raise ValueError("window exceeds signal bounds")
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((m, 4), dtype=np.float64)
    cdef double sabs, ssum, mean, sdev2, sdev1, zc, a, b, d
    for w in range(m):
        s = starts[w]
        sabs = 0.0
        ssum = 0.0
        zc = 0.0
        for i in range(s, s + width):
            sabs += fabs(x[i])
            ssum += x[i]
        for i in range(s, s + width - 1):
            a = 0.0 if x[i] == 0.0 else (1.0 if x[i] > 0.0 else -1.0)
            b = 0.0 if x[i + 1] == 0.0 else (1.0 if x[i + 1] > 0.0 else -1.0)
            zc += fabs(a - b)
        mean = ssum / width
        sdev2 = 0.0
        sdev1 = 0.0
        for i in range(s, s + width):
            d = x[i] - mean
            sdev2 += d * d
            sdev1 += fabs(d)
        out[w, 0] = 0.5 * zc
        out[w, 1] = sabs / width
        out[w, 2] = sqrt(sdev2 / width)
        out[w, 3] = sdev1 / width
    return out


# ---------------------------------------------------------------------------
# tree growing

cdef unsigned long long _xs_next(unsigned long long *state) nogil:
    cdef unsigned long long s = state[0]
    s ^= s >> 12
    s ^= s << 25
    s ^= s >> 27
    state[0] = s
    return s * <unsigned long long>0x2545F4914F6CDD1D


cdef Py_ssize_t _xs_below(unsigned long long *state, Py_ssize_t n) nogil:
    return <Py_ssize_t>((_xs_next(state) >> 32) % <unsigned long long>n)


cdef inline bint _pair_lt(double va, double ra, double vb, double rb) nogil:
    # lexicographic (value, original position): the position tie-break
    # makes the sort stable, matching the pure backend's stable argsort
    return va < vb or (va == vb and ra < rb)


cdef void _sort4(double *v, double *r_, double *p, double *q,
                 Py_ssize_t lo, Py_ssize_t hi) nogil:
    # quicksort on (v, position) with payloads p, q; insertion sort for
    # small ranges
    cdef Py_ssize_t i, j, l, r
    cdef double piv, pivr, tv, tr, tp, tq
    while hi - lo > 16:
        piv = v[lo + (hi - lo) // 2]
        pivr = r_[lo + (hi - lo) // 2]
        l = lo
        r = hi
        while l <= r:
            while _pair_lt(v[l], r_[l], piv, pivr):
                l += 1
            while _pair_lt(piv, pivr, v[r], r_[r]):
                r -= 1
            if l <= r:
                tv = v[l]; v[l] = v[r]; v[r] = tv
                tr = r_[l]; r_[l] = r_[r]; r_[r] = tr
                tp = p[l]; p[l] = p[r]; p[r] = tp
                tq = q[l]; q[l] = q[r]; q[r] = tq
                l += 1
                r -= 1
        if r - lo < hi - l:
            _sort4(v, r_, p, q, lo, r)
            lo = l
        else:
            _sort4(v, r_, p, q, l, hi)
            hi = r
    for i in range(lo + 1, hi + 1):
        tv = v[i]; tr = r_[i]; tp = p[i]; tq = q[i]
        j = i - 1
        while j >= lo and _pair_lt(tv, tr, v[j], r_[j]):
            v[j + 1] = v[j]; r_[j + 1] = r_[j]; p[j + 1] = p[j]; q[j + 1] = q[j]
            j -= 1
        v[j + 1] = tv; r_[j + 1] = tr; p[j + 1] = tp; q[j + 1] = tq


cdef double _scan_gini(double *vs, double *ys, Py_ssize_t n, Py_ssize_t min_leaf,
                       double *thr_out) nogil:
    cdef double total1 = 0.0, l1 = 0.0, nl, nr, r1, gl, gr, p1, parent, gain
    cdef double best = -INFINITY, best_thr = 0.0
    cdef Py_ssize_t k
    for k in range(n):
        total1 += ys[k]
    p1 = total1 / n
    parent = 1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)
    for k in range(n - 1):
        l1 += ys[k]
        if vs[k] >= vs[k + 1]:
            continue
        if k + 1 < min_leaf or n - k - 1 < min_leaf:
            continue
        nl = <double>(k + 1)
        nr = <double>(n - k - 1)
        r1 = total1 - l1
        gl = 1.0 - (l1 / nl) * (l1 / nl) - ((nl - l1) / nl) * ((nl - l1) / nl)
        gr = 1.0 - (r1 / nr) * (r1 / nr) - ((nr - r1) / nr) * ((nr - r1) / nr)
        gain = parent - (nl * gl + nr * gr) / n
        if gain > best:
            best = gain
            best_thr = 0.5 * (vs[k] + vs[k + 1])
    thr_out[0] = best_thr
    return best


cdef double _scan_newton(double *vs, double *gs, double *hs, Py_ssize_t n,
                         Py_ssize_t min_leaf, double lam, double *thr_out) nogil:
    cdef double gt = 0.0, ht = 0.0, gl = 0.0, hl = 0.0, gain
    cdef double best = -INFINITY, best_thr = 0.0
    cdef Py_ssize_t k
    for k in range(n):
        gt += gs[k]
        ht += hs[k]
    for k in range(n - 1):
        gl += gs[k]
        hl += hs[k]
        if vs[k] >= vs[k + 1]:
            continue
        if k + 1 < min_leaf or n - k - 1 < min_leaf:
            continue
        gain = gl * gl / (hl + lam) \
            + (gt - gl) * (gt - gl) / (ht - hl + lam) \
            - gt * gt / (ht + lam)
        if gain > best:
            best = gain
            best_thr = 0.5 * (vs[k] + vs[k + 1])
    thr_out[0] = best_thr
    return best


def grow_tree(object X_in, object y1_in, object y2_in, object idx_in,
              int mtry, int max_depth, int min_leaf, int min_split,
              int mode, double lam, unsigned long long seed):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] X = np.ascontiguousarray(X_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y1 = np.ascontiguousarray(y1_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y2
    if y2_in is None:
        y2 = np.zeros(1, dtype=np.float64)
    else:
        y2 = np.ascontiguousarray(y2_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] idx = np.array(idx_in, dtype=np.int64)
    cdef Py_ssize_t n_total = idx.shape[0]
    cdef Py_ssize_t n_feat = X.shape[1]
    cdef unsigned long long state = seed if seed != 0 else <unsigned long long>0x9E3779B97F4A7C15

    cdef Py_ssize_t cap = 4 * n_total + 8
    cdef cnp.ndarray[cnp.int32_t, ndim=1] feature = np.full(cap, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] threshold = np.zeros(cap, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] left = np.full(cap, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] right = np.full(cap, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] value = np.zeros(cap, dtype=np.float64)

    # explicit stack of (node, start, end, depth) over the idx array
    cdef cnp.ndarray[cnp.int64_t, ndim=1] st_node = np.zeros(cap, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] st_lo = np.zeros(cap, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] st_hi = np.zeros(cap, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] st_depth = np.zeros(cap, dtype=np.int64)

    cdef cnp.ndarray[cnp.float64_t, ndim=1] svals = np.empty(n_total, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] spos = np.empty(n_total, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sp = np.empty(n_total, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sq = np.empty(n_total, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] feats = np.arange(n_feat, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] picked = np.empty(n_feat, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] scratch = np.empty(n_total, dtype=np.int64)

    cdef Py_ssize_t n_nodes = 1, sp_top = 1
    cdef Py_ssize_t node, lo, hi, depth, n, k, f, fi, m, j, nl, pos, a, b
    cdef double gsum, hsum, thr, gain, best_gain, best_thr, v
    cdef Py_ssize_t best_feat, n_try

    st_node[0] = 0
    st_lo[0] = 0
    st_hi[0] = n_total
    st_depth[0] = 0

    while sp_top > 0:
        sp_top -= 1
        node = st_node[sp_top]
        lo = st_lo[sp_top]
        hi = st_hi[sp_top]
        depth = st_depth[sp_top]
        n = hi - lo

        gsum = 0.0
        hsum = 0.0
        for k in range(lo, hi):
            gsum += y1[idx[k]]
            if mode == 1:
                hsum += y2[idx[k]]
        if mode == 0:
            value[node] = gsum / n
        else:
            value[node] = gsum / (hsum + lam)

        if depth >= max_depth or n < min_split or n < 2 * min_leaf:
            continue

        # choose candidate features (all of them, in order, when mtry >= n_feat)
        if mtry >= n_feat:
            n_try = n_feat
            for k in range(n_feat):
                picked[k] = k
        else:
            n_try = mtry
            for k in range(n_feat):
                feats[k] = k
            m = n_feat
            for k in range(mtry):
                j = _xs_below(&state, m)
                picked[k] = feats[j]
                feats[j] = feats[m - 1]
                m -= 1

        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        for fi in range(n_try):
            f = picked[fi]
            for k in range(n):
                svals[k] = X[idx[lo + k], f]
                spos[k] = <double>k
                sp[k] = y1[idx[lo + k]]
                if mode == 1:
                    sq[k] = y2[idx[lo + k]]
            _sort4(&svals[0], &spos[0], &sp[0], &sq[0], 0, n - 1)
            if mode == 0:
                gain = _scan_gini(&svals[0], &sp[0], n, min_leaf, &thr)
            else:
                gain = _scan_newton(&svals[0], &sp[0], &sq[0], n, min_leaf, lam, &thr)
            if gain <= GAIN_EPS or gain <= best_gain:
                continue
            nl = 0
            for k in range(n):
                if X[idx[lo + k], f] <= thr:
                    nl += 1
            if nl < min_leaf or n - nl < min_leaf:
                continue
            best_gain = gain
            best_feat = f
            best_thr = thr
        if best_feat < 0:
            continue

        # stable partition of idx[lo:hi] by the winning split
        a = 0
        for k in range(lo, hi):
            if X[idx[k], best_feat] <= best_thr:
                scratch[a] = idx[k]
                a += 1
        b = a
        for k in range(lo, hi):
            if X[idx[k], best_feat] > best_thr:
                scratch[b] = idx[k]
                b += 1
        for k in range(n):
            idx[lo + k] = scratch[k]

        feature[node] = <int>best_feat
        threshold[node] = best_thr
        left[node] = <int>n_nodes
        right[node] = <int>(n_nodes + 1)
        # push right child first so the left child is processed next
        st_node[sp_top] = n_nodes + 1
        st_lo[sp_top] = lo + a
        st_hi[sp_top] = hi
        st_depth[sp_top] = depth + 1
        sp_top += 1
        st_node[sp_top] = n_nodes
        st_lo[sp_top] = lo
        st_hi[sp_top] = lo + a
        st_depth[sp_top] = depth + 1
        sp_top += 1
        n_nodes += 2

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(), value[:n_nodes].copy())


def predict_tree(object feature_in, object threshold_in, object left_in,
                 object right_in, object value_in, object X_in):
    cdef cnp.ndarray[cnp.int32_t, ndim=1] feature = np.ascontiguousarray(feature_in, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] threshold = np.ascontiguousarray(threshold_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] left = np.ascontiguousarray(left_in, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] right = np.ascontiguousarray(right_in, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] value = np.ascontiguousarray(value_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] X = np.ascontiguousarray(X_in, dtype=np.float64)
    cdef Py_ssize_t m = X.shape[0], i
    cdef int node
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    for i in range(m):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


# ---------------------------------------------------------------------------
# SMO solver

def smo_solve(object K_in, object y_in, double C, double tol, long max_iter,
              bint record=False):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] K = np.ascontiguousarray(K_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef Py_ssize_t n = y.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] G = np.full(n, -1.0, dtype=np.float64)
    cdef list trace = [] if record else None
    cdef long it = 0
    cdef Py_ssize_t i, j, k
    cdef double m_val, M_val, yg, quad, delta, diff, total
    cdef double ai, aj, ai_old, aj_old, dai, daj, obj, rho, hi_v, lo_v
    cdef bint up_k, low_k, any_up, any_low, free_any

    while it < max_iter:
        m_val = -INFINITY
        M_val = INFINITY
        i = -1
        j = -1
        for k in range(n):
            yg = -y[k] * G[k]
            up_k = (y[k] > 0 and alpha[k] < C) or (y[k] < 0 and alpha[k] > 0)
            low_k = (y[k] > 0 and alpha[k] > 0) or (y[k] < 0 and alpha[k] < C)
            if up_k and yg > m_val:
                m_val = yg
                i = k
            if low_k and yg < M_val:
                M_val = yg
                j = k
        if i < 0 or j < 0 or m_val - M_val < tol:
            break

        ai_old = alpha[i]
        aj_old = alpha[j]
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = 1e-12
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai = ai_old + delta
            aj = aj_old + delta
            if diff > 0.0:
                if aj < 0.0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0.0:
                    ai = 0.0
                    aj = -diff
            if diff > 0.0:
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai_old + aj_old
            ai = ai_old - delta
            aj = aj_old + delta
            if total > C:
                if ai > C:
                    ai = C
                    aj = total - C
            else:
                if aj < 0.0:
                    aj = 0.0
                    ai = total
            if total > C:
                if aj > C:
                    aj = C
                    ai = total - C
            else:
                if ai < 0.0:
                    ai = 0.0
                    aj = total
        alpha[i] = ai
        alpha[j] = aj
        dai = ai - ai_old
        daj = aj - aj_old
        for k in range(n):
            G[k] += y[k] * y[i] * K[k, i] * dai + y[k] * y[j] * K[k, j] * daj
        it += 1
        if record:
            obj = 0.0
            for k in range(n):
                obj += alpha[k] * G[k] - alpha[k]
            trace.append(0.5 * obj)

    obj = 0.0
    for k in range(n):
        obj += alpha[k] * G[k] - alpha[k]
    obj *= 0.5

    free_any = False
    rho = 0.0
    m_val = 0.0
    for k in range(n):
        if alpha[k] > 0.0 and alpha[k] < C:
            rho += y[k] * G[k]
            m_val += 1.0
            free_any = True
    if free_any:
        rho = rho / m_val
    else:
        hi_v = -INFINITY
        lo_v = INFINITY
        for k in range(n):
            yg = -y[k] * G[k]
            up_k = (y[k] > 0 and alpha[k] < C) or (y[k] < 0 and alpha[k] > 0)
            low_k = (y[k] > 0 and alpha[k] > 0) or (y[k] < 0 and alpha[k] < C)
            if up_k and yg > hi_v:
                hi_v = yg
            if low_k and yg < lo_v:
                lo_v = yg
        if hi_v == -INFINITY:
            hi_v = 0.0
        if lo_v == INFINITY:
            lo_v = 0.0
        rho = -0.5 * (hi_v + lo_v)
    return alpha, rho, it, obj, (np.array(trace) if record else None)
