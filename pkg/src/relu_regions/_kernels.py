"""Hot kernels of the cell enumerator.

Convex polygons are stored flat: ``vx[start[i]:start[i+1]]`` are the
counter-clockwise vertices of polygon ``i``.  ``vals`` holds the (already
snapped) value of the cutting functional at every vertex.

Two implementations of the half-plane clip are kept in sync: a numba kernel
and a vectorised numpy path.  ``RELU_REGIONS_BACKEND=numpy`` forces the
fallback; the default uses numba when it imports.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def default_backend() -> str:
    choice = os.environ.get("RELU_REGIONS_BACKEND", "").strip().lower()
    if choice == "numpy" or not HAVE_NUMBA:
        return "numpy"
    if choice not in ("", "numba"):
        raise ValueError(f"RELU_REGIONS_BACKEND must be one of {BACKENDS}, got {choice!r}")
    return "numba"


def gather_ranges(start, which):
    """Concatenated vertex indices of the polygons listed in ``which``."""
    lo = start[which]
    lengths = start[which + 1] - lo
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64), lengths
    first = np.repeat(np.cumsum(lengths) - lengths, lengths)
    return np.repeat(lo, lengths) + np.arange(total) - first, lengths


def _clip_numpy(vx, start, vals, cut):
    idx, lengths = gather_ranges(start, cut)
    pos_in_poly = idx - np.repeat(start[cut], lengths)
    nxt = np.repeat(start[cut], lengths) + (pos_in_poly + 1) % np.repeat(lengths, lengths)
    vi, vj = vals[idx], vals[nxt]
    pi, pj = vx[idx], vx[nxt]
    cross = vi * vj < 0
    t = np.where(cross, vi / np.where(cross, vi - vj, 1.0), 0.0)
    inter = pi + t[:, None] * (pj - pi)
    cand = np.stack([pi, inter], axis=1)  # (V, 2 slots, dim)
    poly_id = np.repeat(np.arange(len(cut)), lengths)
    out = []
    for keep in (vi <= 0, vi >= 0):
        mask = np.stack([keep, cross], axis=1)
        child_vx = cand[mask]
        counts = np.bincount(poly_id, weights=mask.sum(axis=1), minlength=len(cut)).astype(np.int64)
        child_start = np.zeros(len(cut) + 1, dtype=np.int64)
        np.cumsum(counts, out=child_start[1:])
        out += [child_vx, child_start]
    return tuple(out)


if HAVE_NUMBA:

    @njit(cache=True)
    def _clip_numba(vx, start, vals, cut):
        m = cut.shape[0]
        dim = vx.shape[1]
        cap = 0
        for c in range(m):
            cap += start[cut[c] + 1] - start[cut[c]] + 2
        neg = np.empty((cap, dim))
        pos = np.empty((cap, dim))
        neg_start = np.zeros(m + 1, dtype=np.int64)
        pos_start = np.zeros(m + 1, dtype=np.int64)
        nn = 0
        np_ = 0
        for c in range(m):
            lo = start[cut[c]]
            n = start[cut[c] + 1] - lo
            for a in range(n):
                i = lo + a
                j = lo + (a + 1) % n
                vi = vals[i]
                vj = vals[j]
                if vi <= 0:
                    for d in range(dim):
                        neg[nn, d] = vx[i, d]
                    nn += 1
                if vi >= 0:
                    for d in range(dim):
                        pos[np_, d] = vx[i, d]
                    np_ += 1
                if vi * vj < 0:
                    t = vi / (vi - vj)
                    for d in range(dim):
                        p = vx[i, d] + t * (vx[j, d] - vx[i, d])
                        neg[nn, d] = p
                        pos[np_, d] = p
                    nn += 1
                    np_ += 1
            neg_start[c + 1] = nn
            pos_start[c + 1] = np_
        return neg[:nn].copy(), neg_start, pos[:np_].copy(), pos_start


def clip_polygons(vx, start, vals, cut, backend=None):
    """Split polygons ``cut`` along the zero line of ``vals``.

    Returns ``(neg_vx, neg_start, pos_vx, pos_start)``: the non-positive and
    non-negative children, in the order of ``cut``.  Vertices where the value
    is exactly 0 are shared by both children.
    """
    backend = backend or default_backend()
    vx = np.ascontiguousarray(vx, dtype=np.float64)
    start = np.ascontiguousarray(start, dtype=np.int64)
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    cut = np.ascontiguousarray(cut, dtype=np.int64)
    if backend == "numba":
        if not HAVE_NUMBA:  # pragma: no cover
            raise RuntimeError("numba backend requested but numba is not installed")
        return _clip_numba(vx, start, vals, cut)
    if backend == "numpy":
        return _clip_numpy(vx, start, vals, cut)
    raise ValueError(f"unknown backend {backend!r}")


def polygon_areas(vx, start):
    """Signed shoelace areas (positive for counter-clockwise polygons)."""
    n_poly = len(start) - 1
    if n_poly == 0:
        return np.zeros(0)
    lengths = np.diff(start)
    idx = np.arange(len(vx))
    poly_id = np.repeat(np.arange(n_poly), lengths)
    nxt = start[poly_id] + (idx - start[poly_id] + 1) % lengths[poly_id]
    cross = vx[:, 0] * vx[nxt, 1] - vx[nxt, 0] * vx[:, 1]
    return 0.5 * np.bincount(poly_id, weights=cross, minlength=n_poly)


def polygon_centroids(vx, start):
    """Vertex averages; interior points of non-degenerate convex polygons."""
    n_poly = len(start) - 1
    lengths = np.diff(start)
    poly_id = np.repeat(np.arange(n_poly), lengths)
    out = np.empty((n_poly, vx.shape[1]))
    for d in range(vx.shape[1]):
        out[:, d] = np.bincount(poly_id, weights=vx[:, d], minlength=n_poly) / lengths
    return out
