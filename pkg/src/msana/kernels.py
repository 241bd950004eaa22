"""Hot numeric kernels.

Each kernel is plain Python over numpy arrays so the same source runs either
compiled by numba or interpreted. Where an interpreted loop would be slow a
vectorised numpy twin is provided and dispatched to when JIT is disabled.
"""

import math

import numpy as np

from ._jit import njit, using_jit

# ---------------------------------------------------------------------------
# ADWIN exponential histogram

ADWIN_MAX_LEVELS = 48
ADWIN_SCALARS = 5  # width, total, variance, n_levels, tick
_W, _TOTAL, _VAR, _NLEV, _TICK = range(ADWIN_SCALARS)


@njit
def adwin_bound(n0, n1, width, variance, delta, min_len):
    dd = math.log(2.0 * math.log(width) / delta)
    v = max(variance, 0.0) / width
    m = 1.0 / (n0 - min_len + 1) + 1.0 / (n1 - min_len + 1)
    return math.sqrt(2.0 * m * v * dd) + 2.0 / 3.0 * dd * m


@njit
def _adwin_drop_oldest(totals, variances, counts, scal):
    top = int(scal[_NLEV]) - 1
    size = 2.0 ** top
    t0 = totals[top, 0]
    v0 = variances[top, 0]
    scal[_W] -= size
    scal[_TOTAL] -= t0
    if scal[_W] > 0:
        u0 = t0 / size
        scal[_VAR] -= v0 + size * scal[_W] * (u0 - scal[_TOTAL] / scal[_W]) ** 2 / (size + scal[_W])
        if scal[_VAR] < 0.0:
            scal[_VAR] = 0.0
    else:
        scal[_VAR] = 0.0
    c = counts[top]
    for k in range(c - 1):
        totals[top, k] = totals[top, k + 1]
        variances[top, k] = variances[top, k + 1]
    counts[top] = c - 1
    if counts[top] == 0:
        scal[_NLEV] = top


@njit
def adwin_insert(value, totals, variances, counts, scal, delta, clock, min_len, max_buckets):
    """Insert ``value`` and run the cut test. Returns True when a cut happened."""
    width = scal[_W] + 1.0
    if width > 1.0:
        scal[_VAR] += (width - 1.0) * (value - scal[_TOTAL] / (width - 1.0)) ** 2 / width
    scal[_W] = width
    scal[_TOTAL] += value
    if scal[_NLEV] == 0:
        scal[_NLEV] = 1
    c0 = counts[0]
    totals[0, c0] = value
    variances[0, c0] = 0.0
    counts[0] = c0 + 1

    # compress full levels upward
    n_levels = int(scal[_NLEV])
    lev = 0
    while lev < n_levels and counts[lev] > max_buckets:
        size = 2.0 ** lev
        ta = totals[lev, 0]
        tb = totals[lev, 1]
        merged_var = variances[lev, 0] + variances[lev, 1] + size * size * (ta / size - tb / size) ** 2 / (2.0 * size)
        c = counts[lev]
        for k in range(c - 2):
            totals[lev, k] = totals[lev, k + 2]
            variances[lev, k] = variances[lev, k + 2]
        counts[lev] = c - 2
        nxt = lev + 1
        if nxt >= totals.shape[0]:
            break
        cn = counts[nxt]
        totals[nxt, cn] = ta + tb
        variances[nxt, cn] = merged_var
        counts[nxt] = cn + 1
        if nxt == n_levels:
            n_levels += 1
            scal[_NLEV] = n_levels
        lev += 1

    scal[_TICK] += 1.0
    detected = False
    if int(scal[_TICK]) % clock != 0 or scal[_W] <= min_len:
        return detected

    reduce = True
    while reduce:
        reduce = False
        n_levels = int(scal[_NLEV])
        n0 = 0.0
        n1 = scal[_W]
        u0 = 0.0
        u1 = scal[_TOTAL]
        done = False
        for lev in range(n_levels - 1, -1, -1):
            size = 2.0 ** lev
            for k in range(counts[lev]):
                if lev == 0 and k == counts[0] - 1:
                    done = True
                    break
                n0 += size
                n1 -= size
                u0 += totals[lev, k]
                u1 -= totals[lev, k]
                if n0 >= min_len and n1 >= min_len:
                    eps = adwin_bound(n0, n1, scal[_W], scal[_VAR], delta, min_len)
                    if abs(u0 / n0 - u1 / n1) > eps:
                        _adwin_drop_oldest(totals, variances, counts, scal)
                        reduce = scal[_W] > min_len
                        detected = True
                        done = True
                        break
            if done:
                break
    return detected


# ---------------------------------------------------------------------------
# k nearest neighbours


@njit
def _knn_query_loop(X, n, x, k):
    kk = min(k, n)
    best_d = np.full(kk, np.inf)
    best_i = np.full(kk, -1, dtype=np.int64)
    d_feat = X.shape[1]
    for i in range(n):
        s = 0.0
        for j in range(d_feat):
            t = X[i, j] - x[j]
            s += t * t
        if kk == 0 or s >= best_d[kk - 1]:
            continue
        pos = kk - 1
        while pos > 0 and best_d[pos - 1] > s:
            best_d[pos] = best_d[pos - 1]
            best_i[pos] = best_i[pos - 1]
            pos -= 1
        best_d[pos] = s
        best_i[pos] = i
    return best_d, best_i


def _knn_query_numpy(X, n, x, k):
    kk = min(k, n)
    if kk == 0:
        return np.empty(0), np.empty(0, dtype=np.int64)
    diff = X[:n] - x
    d = np.einsum("ij,ij->i", diff, diff)
    idx = np.argsort(d, kind="stable")[:kk]
    return d[idx], idx.astype(np.int64)


def knn_query(X, n, x, k):
    """Squared distances and row indices of the ``k`` nearest of the first ``n`` rows.

    Ties resolve toward the lower row index.
    """
    if using_jit():
        return _knn_query_loop(X, n, x, k)
    return _knn_query_numpy(X, n, x, k)


# ---------------------------------------------------------------------------
# Gaussian leaf statistics and split evaluation


@njit
def _gaussian_update_loop(weight, mean, m2, lo, hi, x, y, w):
    d = x.shape[0]
    w_old = weight[y]
    w_new = w_old + w
    weight[y] = w_new
    for j in range(d):
        v = x[j]
        delta = v - mean[y, j]
        mean[y, j] += w * delta / w_new
        m2[y, j] += w * delta * (v - mean[y, j])
        if v < lo[j]:
            lo[j] = v
        if v > hi[j]:
            hi[j] = v


@njit
def _entropy(counts, total):
    if total <= 0.0:
        return 0.0
    h = 0.0
    for c in range(counts.shape[0]):
        p = counts[c] / total
        if p > 0.0:
            h -= p * math.log2(p)
    return h


@njit
def split_gain(weight, mean, m2, j, t, min_frac):
    """Information gain of ``x_j <= t`` under per-class Gaussian approximations."""
    n_classes = weight.shape[0]
    left = np.zeros(n_classes)
    right = np.zeros(n_classes)
    total = 0.0
    for c in range(n_classes):
        wc = weight[c]
        if wc <= 0.0:
            continue
        total += wc
        var = m2[c, j] / (wc - 1.0) if wc > 1.0 else 0.0
        if var > 0.0:
            z = (t - mean[c, j]) / math.sqrt(var)
            p = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
        else:
            p = 1.0 if mean[c, j] <= t else 0.0
        left[c] = wc * p
        right[c] = wc - left[c]
    if total <= 0.0:
        return -np.inf
    nl = left.sum()
    nr = right.sum()
    if nl < min_frac * total or nr < min_frac * total:
        return -np.inf
    h_parent = _entropy(weight, total)
    return h_parent - (nl / total) * _entropy(left, nl) - (nr / total) * _entropy(right, nr)


@njit
def _best_splits_loop(weight, mean, m2, lo, hi, features, n_splits, min_frac):
    nf = features.shape[0]
    gains = np.full(nf, -np.inf)
    thresholds = np.zeros(nf)
    for a in range(nf):
        j = features[a]
        span = hi[j] - lo[j]
        if not (span > 0.0):
            continue
        for i in range(n_splits):
            t = lo[j] + span * (i + 1.0) / (n_splits + 1.0)
            g = split_gain(weight, mean, m2, j, t, min_frac)
            if g > gains[a]:
                gains[a] = g
                thresholds[a] = t
    return gains, thresholds


def _gaussian_update_numpy(weight, mean, m2, lo, hi, x, y, w):
    weight[y] += w
    delta = x - mean[y]
    mean[y] += w * delta / weight[y]
    m2[y] += w * delta * (x - mean[y])
    np.minimum(lo, x, out=lo)
    np.maximum(hi, x, out=hi)


def _entropy_rows(counts, totals):
    with np.errstate(divide="ignore", invalid="ignore"):
        p = counts / totals[..., None]
        terms = np.where(p > 0.0, -p * np.log2(np.where(p > 0.0, p, 1.0)), 0.0)
    return np.where(totals > 0.0, terms.sum(axis=-1), 0.0)


def _best_splits_numpy(weight, mean, m2, lo, hi, features, n_splits, min_frac):
    from scipy.special import ndtr

    nf = features.shape[0]
    gains = np.full(nf, -np.inf)
    thresholds = np.zeros(nf)
    total = weight[weight > 0.0].sum()
    if total <= 0.0 or nf == 0:
        return gains, thresholds
    span = hi[features] - lo[features]
    steps = (np.arange(n_splits) + 1.0) / (n_splits + 1.0)
    cuts = lo[features][:, None] + span[:, None] * steps[None, :]  # (nf, s)
    wpos = np.where(weight > 0.0, weight, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        var = np.where(wpos[:, None] > 1.0, m2[:, features] / (wpos[:, None] - 1.0), 0.0)  # (c, nf)
        sd = np.sqrt(np.maximum(var, 0.0))
        z = (cuts[None, :, :] - mean[:, features][:, :, None]) / sd[:, :, None]
    point = (mean[:, features][:, :, None] <= cuts[None, :, :]).astype(float)
    p = np.where(sd[:, :, None] > 0.0, ndtr(np.nan_to_num(z)), point)
    left = wpos[:, None, None] * p  # (c, nf, s)
    right = wpos[:, None, None] - left
    left = np.moveaxis(left, 0, -1)
    right = np.moveaxis(right, 0, -1)
    nl = left.sum(axis=-1)
    nr = right.sum(axis=-1)
    h_parent = _entropy_rows(wpos[None, :], np.array([total]))[0]
    g = h_parent - (nl / total) * _entropy_rows(left, nl) - (nr / total) * _entropy_rows(right, nr)
    g = np.where((nl < min_frac * total) | (nr < min_frac * total), -np.inf, g)
    g = np.where((span > 0.0)[:, None], g, -np.inf)
    best = np.argmax(g, axis=1)
    gains = g[np.arange(nf), best]
    thresholds = np.where(np.isfinite(gains), cuts[np.arange(nf), best], 0.0)
    return gains, thresholds


def gaussian_update(weight, mean, m2, lo, hi, x, y, w):
    """Weighted Welford update of per-class per-feature statistics, in place."""
    if using_jit():
        _gaussian_update_loop(weight, mean, m2, lo, hi, x, y, w)
    else:
        _gaussian_update_numpy(weight, mean, m2, lo, hi, x, y, w)


def best_splits(weight, mean, m2, lo, hi, features, n_splits, min_frac=0.01):
    """Best gain and threshold per candidate feature over evenly spaced cut points."""
    if using_jit():
        return _best_splits_loop(weight, mean, m2, lo, hi, features, n_splits, min_frac)
    return _best_splits_numpy(weight, mean, m2, lo, hi, features, n_splits, min_frac)
