"""Independent reference implementations used as test oracles.

These are written for clarity, not speed, and share no code with the
package beyond plain data.
"""
import itertools
import math

import numpy as np

NB = 16


def naive_peaks(bins):
    nonzero = [i for i in range(NB) if bins[i] > 0]
    if not nonzero:
        return []
    if len(nonzero) == 1:
        return nonzero
    total = 0.0
    for i in nonzero:
        total += bins[i]
    mean = total / len(nonzero)
    return [i for i in range(NB) if bins[i] > mean * (1 + 1e-9)]


def naive_kx_one_way(u, v):
    """All 16 rotations of u against fixed v, each evaluated from scratch."""
    out = []
    pv = naive_peaks(v)
    for r in range(NB):
        ur = [u[(i - r) % NB] for i in range(NB)]
        pu = naive_peaks(ur)
        m = min(len(pu), len(pv))
        # both ascending lists read cyclically from every starting peak
        pairings = [[]] if not m else [list(zip(pu[a:] + pu[:a], pv[b:] + pv[:b]))
                                       for a in range(len(pu)) for b in range(len(pv))]
        best = math.inf
        for pairs in pairings:
            K = [1.0] * NB
            for a, b in pairs:
                gap = abs(a - b)
                K[a] = 1.0 + min(gap, NB - gap)
            terms = []
            for i in range(NB):
                s = ur[i] + v[i]
                diff = ur[i] - v[i]
                terms.append(K[i] * ((diff * diff) / s) if s > 0 else 0.0)
            d = 0.0
            for x in sorted(terms):
                d += x
            best = min(best, d)
        out.append(best)
    return out


def naive_kx(u, v):
    """Minimum over both matching orders; returns (distance, set of optimal rotations of u)."""
    u = [float(x) for x in u]
    v = [float(x) for x in v]
    fwd = naive_kx_one_way(u, v)
    bwd = naive_kx_one_way(v, u)
    best = min(min(fwd), min(bwd))
    rots = {r for r in range(NB) if fwd[r] == best} | {(NB - r) % NB for r in range(NB) if bwd[r] == best}
    return best, rots


def brute_assignment(C):
    """Exhaustive-permutation version of the matching cost with max-cost padding."""
    C = np.asarray(C, dtype=float)
    n, m = C.shape
    small, big = min(n, m), max(n, m)
    best = math.inf
    T = C if n <= m else C.T
    for cols in itertools.permutations(range(T.shape[1]), small):
        pairs = sorted(zip(range(small), cols)) if n <= m else sorted(zip(cols, range(small)))
        costs = [float(C[r, c]) for r, c in pairs]
        total = math.fsum(costs) + (big - small) * max(costs)
        best = min(best, total / big)
    return best


def walk_resample(poly, step):
    """Arc-length walk along a polyline, emitting a point every ``step``."""
    pts = [tuple(poly[0])]
    carry = 0.0
    for (x0, y0), (x1, y1) in zip(poly[:-1], poly[1:]):
        L = math.hypot(x1 - x0, y1 - y0)
        pos = step - carry
        while pos <= L + 1e-12:
            f = pos / L
            pts.append((x0 + f * (x1 - x0), y0 + f * (y1 - y0)))
            pos += step
        carry = L - (pos - step)
    if len(pts) == 1 or math.hypot(pts[-1][0] - poly[-1][0], pts[-1][1] - poly[-1][1]) > 1e-9 * step:
        pts.append(tuple(poly[-1]))
    if len(pts) == 2 and tuple(poly[0]) == tuple(poly[-1]):
        # a closed stroke shorter than one step keeps its half-way point
        lens = [math.hypot(x1 - x0, y1 - y0) for (x0, y0), (x1, y1) in zip(poly[:-1], poly[1:])]
        half = sum(lens) / 2
        for (x0, y0), (x1, y1), L in zip(poly[:-1], poly[1:], lens):
            if half <= L:
                pts.insert(1, (x0 + half / L * (x1 - x0), y0 + half / L * (y1 - y0)))
                break
            half -= L
    return np.array(pts)


def eig_axis(points):
    """Principal axis via a general eigensolver on the centred scatter matrix."""
    q = np.asarray(points, float) - np.mean(points, axis=0)
    w, V = np.linalg.eigh(q.T @ q)
    vx, vy = V[:, np.argmax(w)]
    a = math.degrees(math.atan2(vy, vx))
    while a <= -90:
        a += 180
    while a > 90:
        a -= 180
    return a


def sector_of(angle_deg, axis_deg, sign):
    """Portion index of a direction: portion 0 centred on the axis, (lo, hi] edges."""
    phi = (sign * (angle_deg - axis_deg)) % 360.0
    for k in range(NB + 2):
        lo, hi = -11.25 + 22.5 * (k - 1), -11.25 + 22.5 * k
        if lo < phi <= hi:
            return (k - 1) % NB
    raise AssertionError(phi)
