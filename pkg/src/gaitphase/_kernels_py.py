"""Pure-NumPy implementations of the hot kernels.

Mirrors the compiled extension in ``_kernels.pyx``: windowed feature
extraction, CART/Newton tree growing and the SMO solver. Selected by
``gaitphase.backend`` when the compiled module is unavailable or
``GAITPHASE_PURE=1`` is set.
"""

import numpy as np

BACKEND = "pure"

_GAIN_EPS = 1e-12


def window_features(x, starts, width):
    """Compute (zc, mav, sigma, mad) for each window x[s:s+width].

    zc counts half the summed sign-change magnitude, sigma/mad use the
    population mean of the window.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    starts = np.asarray(starts, dtype=np.int64)
    if width < 2:
        raise ValueError("window width must be >= 2")
    if starts.size and (starts.min() < 0 or starts.max() + width > x.size):
        raise ValueError("window exceeds signal bounds")
    out = np.empty((starts.size, 4), dtype=np.float64)
    if starts.size == 0:
        return out
    win = np.lib.stride_tricks.sliding_window_view(x, width)[starts]
    sgn = np.sign(x)
    dsgn = np.abs(np.diff(sgn))
    cs = np.concatenate(([0.0], np.cumsum(dsgn)))
    out[:, 0] = 0.5 * (cs[starts + width - 1] - cs[starts])
    out[:, 1] = np.abs(win).sum(axis=1) / width
    mean = win.sum(axis=1) / width
    dev = win - mean[:, None]
    out[:, 2] = np.sqrt((dev * dev).sum(axis=1) / width)
    out[:, 3] = np.abs(dev).sum(axis=1) / width
    return out


class _XorShift:
    """xorshift64* generator; kept identical to the Cython backend."""

    def __init__(self, seed):
        self.s = np.uint64(seed if seed != 0 else 0x9E3779B97F4A7C15)

    def next_below(self, n):
        s = self.s
        s ^= s >> np.uint64(12)
        s ^= np.uint64((int(s) << 25) & 0xFFFFFFFFFFFFFFFF)
        s ^= s >> np.uint64(27)
        self.s = s
        v = (int(s) * 0x2545F4914F6CDD1D) & 0xFFFFFFFFFFFFFFFF
        return (v >> 32) % n


def _node_features(rng, n_features, mtry):
    if mtry >= n_features:
        return list(range(n_features))
    feats = list(range(n_features))
    picked = []
    m = n_features
    for _ in range(mtry):
        j = rng.next_below(m)
        picked.append(feats[j])
        feats[j] = feats[m - 1]
        m -= 1
    return picked


def _best_split_gini(v, y, min_leaf):
    order = np.argsort(v, kind="stable")
    vs = v[order]
    ys = y[order]
    n = vs.size
    c1 = np.cumsum(ys)
    total1 = c1[-1]
    pos = np.arange(1, n)
    valid = (vs[:-1] < vs[1:]) & (pos >= min_leaf) & (pos <= n - min_leaf)
    if not valid.any():
        return -1, 0.0, 0.0
    nl = pos.astype(np.float64)
    nr = n - nl
    l1 = c1[:-1]
    r1 = total1 - l1
    gini_l = 1.0 - (l1 / nl) ** 2 - ((nl - l1) / nl) ** 2
    gini_r = 1.0 - (r1 / nr) ** 2 - ((nr - r1) / nr) ** 2
    p1 = total1 / n
    parent = 1.0 - p1 * p1 - (1.0 - p1) ** 2
    gain = parent - (nl * gini_l + nr * gini_r) / n
    gain[~valid] = -np.inf
    best = int(np.argmax(gain))
    if gain[best] <= _GAIN_EPS:
        return -1, 0.0, 0.0
    return best + 1, 0.5 * (vs[best] + vs[best + 1]), float(gain[best])


def _best_split_newton(v, g, h, lam, min_leaf):
    order = np.argsort(v, kind="stable")
    vs = v[order]
    # running (not pairwise) sums so the prefix totals round exactly like
    # the compiled backend's sequential accumulation
    gc = np.cumsum(g[order])
    hc = np.cumsum(h[order])
    gl = gc[:-1]
    hl = hc[:-1]
    gt = float(gc[-1])
    ht = float(hc[-1])
    pos = np.arange(1, vs.size)
    valid = (vs[:-1] < vs[1:]) & (pos >= min_leaf) & (pos <= vs.size - min_leaf)
    if not valid.any():
        return -1, 0.0, 0.0
    gain = gl * gl / (hl + lam) + (gt - gl) ** 2 / (ht - hl + lam) - gt * gt / (ht + lam)
    gain[~valid] = -np.inf
    best = int(np.argmax(gain))
    if gain[best] <= _GAIN_EPS:
        return -1, 0.0, 0.0
    return best + 1, 0.5 * (vs[best] + vs[best + 1]), float(gain[best])


def grow_tree(X, y1, y2, idx, mtry, max_depth, min_leaf, min_split, mode, lam, seed):
    """Grow a binary tree over X[idx] and return flat node arrays.

    mode 0: classification, y1 in {0,1}, Gini splits, leaf = mean(y1).
    mode 1: Newton boosting step, y1 = gradient, y2 = hessian, leaf =
            sum(g)/(sum(h)+lam).
    Returns (feature, threshold, left, right, value); feature == -1 marks
    a leaf.
    """
    X = np.asarray(X, dtype=np.float64)
    idx = np.array(idx, dtype=np.int64)
    rng = _XorShift(seed)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, idx, 0)]
    while stack:
        node, rows, depth = stack.pop()
        g = y1[rows]
        if mode == 0:
            value[node] = float(g.mean())
        else:
            h = y2[rows]
            # sequential sums, matching the compiled backend bit for bit
            gsum = float(np.cumsum(g)[-1]) if g.size else 0.0
            hsum = float(np.cumsum(h)[-1]) if h.size else 0.0
            value[node] = gsum / (hsum + lam)
        n = rows.size
        if depth >= max_depth or n < min_split or n < 2 * min_leaf:
            continue
        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        for f in _node_features(rng, X.shape[1], mtry):
            v = X[rows, f]
            if mode == 0:
                pos, thr, gain = _best_split_gini(v, g, min_leaf)
            else:
                pos, thr, gain = _best_split_newton(v, g, y2[rows], lam, min_leaf)
            if pos < 0:
                continue
            # re-check leaf sizes on the untied partition
            nl = int((v <= thr).sum())
            if nl < min_leaf or n - nl < min_leaf:
                continue
            if gain > best_gain:
                best_gain = gain
                best_feat = f
                best_thr = thr
        if best_feat < 0:
            continue
        mask = X[rows, best_feat] <= best_thr
        lrows = rows[mask]
        rrows = rows[~mask]
        lnode = new_node()
        rnode = new_node()
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = lnode
        right[node] = rnode
        stack.append((rnode, rrows, depth + 1))
        stack.append((lnode, lrows, depth + 1))
    return (
        np.array(feature, dtype=np.int32),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int32),
        np.array(right, dtype=np.int32),
        np.array(value, dtype=np.float64),
    )


def predict_tree(feature, threshold, left, right, value, X):
    X = np.asarray(X, dtype=np.float64)
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = feature[node] >= 0
    while active.any():
        idx = np.nonzero(active)[0]
        nd = node[idx]
        f = feature[nd]
        go_left = X[idx, f] <= threshold[nd]
        node[idx] = np.where(go_left, left[nd], right[nd])
        active = feature[node] >= 0
    return value[node]


def smo_solve(K, y, C, tol, max_iter, record=False):
    """Solve the SVM dual min 1/2 a'Qa - sum(a), 0<=a<=C, y'a=0 by SMO.

    Q_ij = y_i y_j K_ij. Maximal-violating-pair working set selection.
    Returns (alpha, rho, n_iter, objective, trace) where the decision
    value is sum_i alpha_i y_i K(x, x_i) - rho.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    alpha = np.zeros(n)
    G = np.full(n, -1.0)
    trace = [] if record else None
    it = 0
    while it < max_iter:
        yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(yG[up])])
        j = int(np.flatnonzero(low)[np.argmin(yG[low])])
        if yG[i] - yG[j] < tol:
            break
        ai_old, aj_old = alpha[i], alpha[j]
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = 1e-12
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai = ai_old + delta
            aj = aj_old + delta
            if diff > 0.0 and aj < 0.0:
                aj = 0.0
                ai = diff
            elif diff <= 0.0 and ai < 0.0:
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
        G += (y * y[i] * K[:, i]) * dai + (y * y[j] * K[:, j]) * daj
        it += 1
        if record:
            trace.append(0.5 * float(alpha @ G) - 0.5 * float(alpha.sum()))
    obj = 0.5 * float(alpha @ G) - 0.5 * float(alpha.sum())
    yG = -y * G
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = -float(yG[free].mean())
    else:
        hi = yG[up].max() if up.any() else 0.0
        lo = yG[low].min() if low.any() else 0.0
        rho = -0.5 * (hi + lo)
    return alpha, rho, it, obj, (np.array(trace) if record else None)
