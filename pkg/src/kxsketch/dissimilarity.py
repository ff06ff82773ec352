"""KX dissimilarity between two 16-portion descriptors.

For a rotation r of U, the per-portion term is ``K_i (u_i - v_i)^2 / (u_i + v_i)``
(zero when both portions are empty). Peaks are portions whose mass exceeds
the mean of the non-empty portions. Peaks of the rotated U and of V are
paired in ascending order up to the shorter list; since the portions form a
circle, each list may be read from any of its peaks, and the cheapest pair
of starting peaks is kept. At a matched U peak ``K = 1 + cyclic gap``;
every other portion has K = 1. The search runs over the 16 rotations of U
against V and of V against U and keeps the smallest value, so the distance
is symmetric and blind to where the portion numbering starts.
"""
from __future__ import annotations

from typing import NamedTuple, Union

import numpy as np

from . import kernels
from .descriptor import Descriptor

Bins = Union[Descriptor, np.ndarray, list]


class KxResult(NamedTuple):
    distance: float
    best_rotation: int   # rotate U by this many portions (22.5 deg each) to match V


def _bins(d: Bins) -> np.ndarray:
    return d.bins if isinstance(d, Descriptor) else np.asarray(d, dtype=float)


def peaks(d: Bins) -> tuple[int, ...]:
    """Ascending portion indices of the peaks; a lone non-empty portion is a peak."""
    return tuple(int(i) for i in kernels.peak_indices(_bins(d)))


def reenumerate(bins: np.ndarray) -> np.ndarray:
    """Same sectors numbered in the opposite direction (portion 0 fixed)."""
    return np.asarray(bins)[(-np.arange(kernels.NBINS)) % kernels.NBINS]


def kx_distance(U: Bins, V: Bins, reenumerate_on_sign_mismatch: bool = False) -> KxResult:
    u, v = _bins(U), _bins(V)
    if (reenumerate_on_sign_mismatch and isinstance(U, Descriptor) and isinstance(V, Descriptor)
            and U.enumeration_sign != V.enumeration_sign):
        v = reenumerate(v)
    d, r = kernels.kx(u, v)
    return KxResult(d, r)


def kx_matrix(A, B, reenumerate_on_sign_mismatch: bool = False) -> np.ndarray:
    """Pairwise KX distances between two descriptor lists."""
    ua = np.array([_bins(a) for a in A], dtype=float).reshape(-1, kernels.NBINS)
    vb = np.array([_bins(b) for b in B], dtype=float).reshape(-1, kernels.NBINS)
    if not reenumerate_on_sign_mismatch:
        return kernels.kx_pairwise(ua, vb)[0]
    sa = np.array([a.enumeration_sign for a in A])
    D = np.empty((len(A), len(B)))
    for j, b in enumerate(B):
        col_same = kernels.kx_pairwise(ua, vb[j:j + 1])[0][:, 0]
        col_flip = kernels.kx_pairwise(ua, reenumerate(vb[j])[None, :])[0][:, 0]
        D[:, j] = np.where(sa == b.enumeration_sign, col_same, col_flip)
    return D
