"""Hot numeric kernels.

Each kernel exists twice: a loop form compiled with numba (``*_numba``) and a
vectorized numpy form (``*_numpy``). The public name is bound to one of them
at import time according to :mod:`kxsketch._accel`. Both forms sort the KX
terms and accumulate them in ascending order, so they agree bit for bit.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

NBINS = 16
PORTION = 22.5
PEAK_EPS = 1e-9


# -- turning angle -----------------------------------------------------------

def _turning_angles_loop(xy, k):
    n = xy.shape[0]
    out = np.zeros(n)
    for i in range(n):
        j0 = max(0, i - k)
        j1 = min(n - 1, i + k)
        if j0 == i or j1 == i:
            continue
        ax = xy[i, 0] - xy[j0, 0]
        ay = xy[i, 1] - xy[j0, 1]
        bx = xy[j1, 0] - xy[i, 0]
        by = xy[j1, 1] - xy[i, 1]
        cross = ax * by - ay * bx
        dot = ax * bx + ay * by
        out[i] = math.degrees(math.atan2(abs(cross), dot))
    return out


def turning_angles_numpy(xy, k):
    n = len(xy)
    idx = np.arange(n)
    j0 = np.maximum(0, idx - k)
    j1 = np.minimum(n - 1, idx + k)
    a = xy - xy[j0]
    b = xy[j1] - xy
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]
    out = np.degrees(np.arctan2(np.abs(cross), dot))
    out[(j0 == idx) | (j1 == idx)] = 0.0
    return out


turning_angles_numba = njit(_turning_angles_loop)


# -- sector histograms ----------------------------------------------------------

def _sector_histograms_loop(angles, offsets, sign):
    # portion 0 is centred on the offset direction; intervals are (lo, hi]
    h = np.zeros((offsets.shape[0], NBINS))
    for c in range(offsets.shape[0]):
        for j in range(angles.shape[0]):
            phi = (sign * (angles[j] - offsets[c])) % 360.0
            b = int(math.ceil((phi + PORTION / 2) / PORTION)) - 1
            h[c, b % NBINS] += 1.0
    return h


def sector_histograms_numpy(angles, offsets, sign):
    phi = np.mod(sign * (angles[None, :] - offsets[:, None]), 360.0)
    b = (np.ceil((phi + PORTION / 2) / PORTION).astype(np.int64) - 1) % NBINS
    h = np.zeros((len(offsets), NBINS))
    for c in range(len(offsets)):
        h[c] = np.bincount(b[c], minlength=NBINS)
    return h


sector_histograms_numba = njit(_sector_histograms_loop)


# -- KX distance -------------------------------------------------------------

def _peak_indices_loop(b, out):
    total = 0.0
    count = 0
    last = -1
    for i in range(NBINS):
        if b[i] > 0.0:
            total += b[i]
            count += 1
            last = i
    if count == 0:
        return 0
    if count == 1:
        out[0] = last
        return 1
    thr = (total / count) * (1.0 + PEAK_EPS)
    n = 0
    for i in range(NBINS):
        if b[i] > thr:
            out[n] = i
            n += 1
    return n


def _kx_one_order(u, v, pu, npu, pv, npv, best, best_rot, mirror_rot):
    # rotate u by r (u'[i] = u[(i - r) % 16]); K is set at the matched u' peaks.
    # Peaks pair in ascending order, read cyclically from every pair of
    # starting peaks, so no bin index acts as an origin.
    K = np.empty(NBINS)
    T = np.empty(NBINS)
    shifted = np.empty(NBINS, dtype=np.int64)
    m = min(npu, npv)
    ncand = npu * npv if m > 0 else 1
    for r in range(NBINS):
        for q in range(npu):
            shifted[q] = (pu[q] + r) % NBINS
        shifted[:npu].sort()
        for c in range(ncand):
            for i in range(NBINS):
                K[i] = 1.0
            for j in range(m):
                a = shifted[(c // npv + j) % npu]
                b = pv[(c % npv + j) % npv]
                g = abs(a - b)
                if NBINS - g < g:
                    g = NBINS - g
                K[a] = 1.0 + g
            for i in range(NBINS):
                x = u[(i - r) % NBINS]
                y = v[i]
                s = x + y
                if s > 0.0:
                    d = x - y
                    T[i] = K[i] * ((d * d) / s)
                else:
                    T[i] = 0.0
            # summing in ascending order makes the total independent of term order
            T.sort()
            d_r = 0.0
            for i in range(NBINS):
                d_r += T[i]
            if d_r < best:
                best = d_r
                best_rot = (NBINS - r) % NBINS if mirror_rot else r
    return best, best_rot


def _kx_loop(u, v):
    pu = np.zeros(NBINS, dtype=np.int64)
    pv = np.zeros(NBINS, dtype=np.int64)
    npu = _peak_indices_loop(u, pu)
    npv = _peak_indices_loop(v, pv)
    best, rot = _kx_one_order(u, v, pu, npu, pv, npv, np.inf, 0, False)
    best, rot = _kx_one_order(v, u, pv, npv, pu, npu, best, rot, True)
    return best, rot


def _kx_pairwise_loop(A, B):
    n = A.shape[0]
    m = B.shape[0]
    D = np.empty((n, m))
    R = np.empty((n, m), dtype=np.int64)
    for i in range(n):
        for j in range(m):
            D[i, j], R[i, j] = _kx_loop(A[i], B[j])
    return D, R


_peak_indices_numba = njit(_peak_indices_loop)
_kx_one_order_numba = njit(_kx_one_order)


@njit
def _kx_numba_inner(u, v):
    pu = np.zeros(NBINS, dtype=np.int64)
    pv = np.zeros(NBINS, dtype=np.int64)
    npu = _peak_indices_numba(u, pu)
    npv = _peak_indices_numba(v, pv)
    best, rot = _kx_one_order_numba(u, v, pu, npu, pv, npv, np.inf, 0, False)
    best, rot = _kx_one_order_numba(v, u, pv, npv, pu, npu, best, rot, True)
    return best, rot


@njit
def _kx_pairwise_numba(A, B):
    n = A.shape[0]
    m = B.shape[0]
    D = np.empty((n, m))
    R = np.empty((n, m), dtype=np.int64)
    for i in range(n):
        for j in range(m):
            D[i, j], R[i, j] = _kx_numba_inner(A[i], B[j])
    return D, R


def peak_indices(b) -> np.ndarray:
    """Ascending indices of bins strictly above the mean of non-empty bins."""
    b = np.asarray(b, dtype=float)
    nz = b > 0
    count = int(nz.sum())
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    if count == 1:
        return np.flatnonzero(nz).astype(np.int64)
    total = 0.0
    for x in b[nz]:
        total += x
    thr = (total / count) * (1.0 + PEAK_EPS)
    return np.flatnonzero(b > thr).astype(np.int64)


def _kx_order_numpy(u, v, pu, pv):
    """Distances for the 16 rotations of ``u`` against fixed ``v``."""
    r = np.arange(NBINS)
    i = np.arange(NBINS)
    U = u[(i[None, :] - r[:, None]) % NBINS]          # (rot, bin)
    npu, npv = len(pu), len(pv)
    m = min(npu, npv)
    C = npu * npv if m else 1
    K = np.ones((NBINS, C, NBINS))
    if m:
        shifted = np.sort((pu[None, :] + r[:, None]) % NBINS, axis=1)   # (rot, npu)
        c = np.arange(C)[:, None]
        j = np.arange(m)[None, :]
        A = shifted[:, (c // npv + j) % npu]                              # (rot, C, m)
        B = np.broadcast_to(pv[(c % npv + j) % npv], A.shape)
        g = np.abs(A - B)
        g = np.minimum(g, NBINS - g)
        K[r[:, None, None], np.arange(C)[None, :, None], A] = 1.0 + g
    Ub = U[:, None, :]
    S = Ub + v
    Dm = Ub - v
    with np.errstate(divide="ignore", invalid="ignore"):
        T = np.where(S > 0, K * ((Dm * Dm) / S), 0.0)
    T = np.sort(T, axis=2)
    acc = T[:, :, 0].copy()
    for k in range(1, NBINS):
        acc += T[:, :, k]
    return acc.min(axis=1)


def kx_numpy(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    pu, pv = peak_indices(u), peak_indices(v)
    fwd = _kx_order_numpy(u, v, pu, pv)
    bwd = _kx_order_numpy(v, u, pv, pu)
    r = int(np.argmin(fwd))
    best, rot = fwd[r], r
    r2 = int(np.argmin(bwd))
    if bwd[r2] < best:
        best, rot = bwd[r2], (NBINS - r2) % NBINS
    return float(best), rot


def kx_pairwise_numpy(A, B):
    A = np.asarray(A, dtype=float).reshape(-1, NBINS)
    B = np.asarray(B, dtype=float).reshape(-1, NBINS)
    D = np.empty((len(A), len(B)))
    R = np.empty((len(A), len(B)), dtype=np.int64)
    for i in range(len(A)):
        for j in range(len(B)):
            D[i, j], R[i, j] = kx_numpy(A[i], B[j])
    return D, R


def kx_numba(u, v):
    d, r = _kx_numba_inner(np.ascontiguousarray(u, dtype=np.float64),
                           np.ascontiguousarray(v, dtype=np.float64))
    return float(d), int(r)


def kx_pairwise_numba(A, B):
    A = np.ascontiguousarray(A, dtype=np.float64).reshape(-1, NBINS)
    B = np.ascontiguousarray(B, dtype=np.float64).reshape(-1, NBINS)
    return _kx_pairwise_numba(A, B)


def _wrap_turning(fn):
    def turning_angles(xy, k):
        return fn(np.ascontiguousarray(xy, dtype=np.float64), int(k))
    return turning_angles


def _wrap_sectors(fn):
    def sector_histograms(angles, offsets, sign):
        return fn(np.ascontiguousarray(angles, dtype=np.float64),
                  np.ascontiguousarray(offsets, dtype=np.float64), float(sign))
    return sector_histograms


BACKENDS = {
    "numpy": {
        "turning_angles": _wrap_turning(turning_angles_numpy),
        "sector_histograms": _wrap_sectors(sector_histograms_numpy),
        "kx": kx_numpy,
        "kx_pairwise": kx_pairwise_numpy,
    },
    "numba": {
        "turning_angles": _wrap_turning(turning_angles_numba),
        "sector_histograms": _wrap_sectors(sector_histograms_numba),
        "kx": kx_numba,
        "kx_pairwise": kx_pairwise_numba,
    },
}

_active = BACKENDS["numba" if USE_NUMBA else "numpy"]
turning_angles = _active["turning_angles"]
sector_histograms = _active["sector_histograms"]
kx = _active["kx"]
kx_pairwise = _active["kx_pairwise"]
