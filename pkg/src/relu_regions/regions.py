"""Exact activation-region enumeration on 1-D and 2-D affine slices.

Neurons are added in layer-major order.  Every cell keeps the affine
functional (in slice coordinates) of each neuron processed so far; the next
neuron's functional on a cell is obtained by masking the previous layer's
functionals with the cell's pattern.  A cell is cut when its vertex values of
that functional take both signs.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .errors import (
    BoundaryPointError,
    BudgetExceededError,
    DegenerateNeuronError,
    DegenerateSliceError,
)
from .network import Network, cell_affine_map, forward

log = logging.getLogger(__name__)

SNAP_TOL = 1e-10
SLIVER_AREA = 1e-14
SLIVER_LENGTH = 1e-12
MERGE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AffineSlice:
    """``u -> origin + u @ basis``; ``basis`` has one orthonormal row per slice axis."""

    origin: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=np.float64).reshape(-1)
        basis = np.atleast_2d(np.asarray(self.basis, dtype=np.float64))
        if basis.shape[1] != origin.shape[0]:
            raise ValueError("basis vectors must live in the input space of the origin")
        if basis.shape[0] not in (1, 2) or basis.shape[0] > origin.shape[0]:
            raise DegenerateSliceError(f"slice dimension must be 1 or 2 and <= input dim, got {basis.shape}")
        if np.max(np.abs(basis @ basis.T - np.eye(basis.shape[0]))) > 1e-10:
            raise DegenerateSliceError("slice basis is not orthonormal")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def coordinate_plane(cls, input_dim=2, k=2):
        return cls(np.zeros(input_dim), np.eye(input_dim)[:k])

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    @property
    def input_dim(self) -> int:
        return self.origin.shape[0]

    def embed(self, u):
        u = np.asarray(u, dtype=np.float64)
        return self.origin + u @ self.basis

    def project(self, x):
        return (np.asarray(x, dtype=np.float64) - self.origin) @ self.basis.T

    def embedding_affine(self) -> np.ndarray:
        """``(input_dim, k + 1)``: columns are the basis vectors, then the origin."""
        return np.column_stack([self.basis.T, self.origin])


@dataclass(frozen=True)
class SplitLine:
    gradient: np.ndarray
    offset: float

    def __call__(self, u):
        return np.asarray(u, dtype=np.float64) @ self.gradient + self.offset


@dataclass(eq=False)
class Cell:
    """Convex cell of a slice.

    ``pattern`` has one entry per hidden neuron, 0 for neurons not processed
    yet.  Row ``z`` of ``neuron_affines`` is neuron ``z``'s pre-activation as
    ``[gradient..., offset]`` in slice coordinates.
    """

    vertices: np.ndarray
    pattern: np.ndarray
    neuron_affines: np.ndarray
    output_affine: np.ndarray | None = None

    @property
    def k(self):
        return self.vertices.shape[1]

    def measure(self) -> float:
        if self.k == 1:
            return float(self.vertices[1, 0] - self.vertices[0, 0])
        return float(_kernels.polygon_areas(self.vertices, np.array([0, len(self.vertices)]))[0])

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    @property
    def n_processed(self) -> int:
        return int(np.count_nonzero(self.pattern))


@dataclass
class RegionCensus:
    activation_count: int
    linear_count: int | None
    window: np.ndarray
    k: int
    wall_time: float = 0.0
    discarded_slivers: int = 0
    degenerate_events: int = 0
    partial: bool = False
    cells: list[Cell] | None = None
    patterns: np.ndarray | None = field(default=None, repr=False)
    vertices_flat: np.ndarray | None = field(default=None, repr=False)
    starts: np.ndarray | None = field(default=None, repr=False)

    def to_json(self, include_cells=True) -> dict:
        doc = {
            "k": self.k,
            "window": self.window.tolist(),
            "activation_count": self.activation_count,
            "linear_count": self.linear_count,
            "discarded_slivers": self.discarded_slivers,
            "degenerate_events": self.degenerate_events,
            "partial": self.partial,
            "wall_time": self.wall_time,
        }
        if include_cells and self.cells is not None:
            doc["cells"] = [
                {
                    "vertices": c.vertices.tolist(),
                    "pattern": c.pattern.astype(int).tolist(),
                    "gradient": c.output_affine[:, :-1].tolist(),
                    "offset": c.output_affine[:, -1].tolist(),
                }
                for c in self.cells
            ]
        return doc


def square_window(B: float) -> np.ndarray:
    return np.array([[-B, -B], [B, -B], [B, B], [-B, B]], dtype=np.float64)


def segment_window(lo: float, hi: float) -> np.ndarray:
    if not hi > lo:
        raise ValueError("segment must have hi > lo")
    return np.array([[lo], [hi]], dtype=np.float64)


def default_window(slc: AffineSlice, data_points=None, B: float | None = None) -> np.ndarray:
    """``[-B, B]^k`` with ``B = 3 * max |projected data point|`` (or 3 without data)."""
    if B is None:
        if data_points is None:
            B = 3.0
        else:
            proj = slc.project(np.atleast_2d(data_points))
            B = 3.0 * float(np.max(np.linalg.norm(proj, axis=1)))
            if B <= 0:
                B = 3.0
    return square_window(B) if slc.k == 2 else segment_window(-B, B)


def _window_measure(window):
    if window.shape[1] == 1:
        return float(window[1, 0] - window[0, 0])
    return float(_kernels.polygon_areas(window, np.array([0, len(window)]))[0])


def _check_window(window, k):
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape[1] != k:
        raise ValueError(f"window must have shape (m, {k})")
    if k == 1:
        if window.shape[0] != 2 or not window[1, 0] > window[0, 0]:
            raise ValueError("1-D window must be [[lo], [hi]] with hi > lo")
        return window
    if window.shape[0] < 3 or _window_measure(window) <= 0:
        raise ValueError("2-D window must be a counter-clockwise polygon with positive area")
    if not _is_convex(window):
        raise ValueError("2-D window must be convex")
    return window


def _is_convex(poly, tol=1e-12):
    d = np.roll(poly, -1, axis=0) - poly
    cr = d[:, 0] * np.roll(d, -1, axis=0)[:, 1] - d[:, 1] * np.roll(d, -1, axis=0)[:, 0]
    scale = max(1.0, float(np.max(np.abs(poly)))) ** 2
    return bool(np.all(cr >= -tol * scale))


def default_budget(n_neurons: int, k: int) -> int:
    return int(math.ceil(5 * n_neurons ** k / math.factorial(k)))


def _snap_tolerance(grad, off, radius):
    return SNAP_TOL * (1.0 + np.abs(off) + np.linalg.norm(grad, axis=-1) * radius)


def _layer_functionals(net, layer, E, aff, pattern, sls):
    """Pre-activation functionals of every neuron of ``layer`` on every cell."""
    w, b = net.weights[layer], net.biases[layer]
    if layer == 0:
        f = w @ E
        f[:, -1] += b
        return np.broadcast_to(f, (aff.shape[0],) + f.shape)
    prev_sl = sls[layer - 1]
    prev = aff[:, prev_sl, :] * (pattern[:, prev_sl] > 0)[:, :, None]
    f = np.einsum("jn,cnk->cjk", w, prev)
    f[:, :, -1] += b
    return f


def window_cell(window, n_neurons: int) -> Cell:
    """The starting cell: the whole window, no neuron processed."""
    window = np.asarray(window, dtype=np.float64)
    k = window.shape[1]
    return Cell(window.copy(), np.zeros(n_neurons, dtype=np.int8), np.zeros((n_neurons, k + 1)))


def restrict_neuron(net: Network, slc: AffineSlice, cell: Cell) -> SplitLine:
    """Functional of the next unprocessed neuron on ``cell``."""
    z = cell.n_processed
    if z >= net.n_neurons:
        raise ValueError("every neuron of this cell has already been processed")
    sls = net.layer_slices()
    layer = next(l for l, sl in enumerate(sls) if sl.start <= z < sl.stop)
    f = _layer_functionals(net, layer, slc.embedding_affine(), cell.neuron_affines[None],
                           cell.pattern[None], sls)[0]
    row = f[z - sls[layer].start]
    return SplitLine(np.array(row[:-1]), float(row[-1]))


def split_cell(cell: Cell, line: SplitLine, neuron_index: int, radius=None,
               backend=None) -> list[Cell]:
    """Cut ``cell`` by the zero set of ``line``; returns one cell or two (negative side first)."""
    vx = np.asarray(cell.vertices, dtype=np.float64)
    k = vx.shape[1]
    grad = np.asarray(line.gradient, dtype=np.float64).reshape(k)
    if radius is None:
        radius = float(np.max(np.linalg.norm(vx, axis=1)))
    vals = vx @ grad + line.offset
    vals[np.abs(vals) <= _snap_tolerance(grad, line.offset, radius)] = 0.0
    row = np.append(grad, line.offset)

    def child(verts, sign):
        pat = cell.pattern.copy()
        pat[neuron_index] = sign
        aff = cell.neuron_affines.copy()
        aff[neuron_index] = row
        return Cell(verts, pat, aff)

    has_pos, has_neg = np.any(vals > 0), np.any(vals < 0)
    if not has_pos and not has_neg:
        raise DegenerateNeuronError(f"neuron {neuron_index} vanishes on the whole cell",
                                    neuron=neuron_index)
    if not (has_pos and has_neg):
        return [child(vx.copy(), 1 if has_pos else -1)]
    if k == 1:
        t = vals[0] / (vals[0] - vals[1])
        p = vx[0] + t * (vx[1] - vx[0])
        left, right = np.array([vx[0], p]), np.array([p, vx[1]])
        if vals[0] < 0:
            return [child(left, -1), child(right, 1)]
        return [child(right, -1), child(left, 1)]
    neg, neg_s, pos, pos_s = _kernels.clip_polygons(
        vx, np.array([0, len(vx)]), vals, np.array([0]), backend=backend)
    return [child(neg, -1), child(pos, 1)]


class _Flat:
    """Working state of an enumeration: flat vertex storage plus per-cell arrays."""

    def __init__(self, window, n_neurons):
        k = window.shape[1]
        self.vx = window.copy()
        self.start = np.array([0, len(window)], dtype=np.int64)
        self.pattern = np.zeros((1, n_neurons), dtype=np.int8)
        self.aff = np.zeros((1, n_neurons, k + 1))

    @property
    def n_cells(self):
        return len(self.start) - 1


def _split_flat(state, z, radius, k, sliver_measure, backend, degenerate):
    """Process neuron ``z`` on every cell; returns (slivers, degenerate events)."""
    lengths = np.diff(state.start)
    cell_of_v = np.repeat(np.arange(state.n_cells), lengths)
    grad = state.aff[:, z, :-1]
    off = state.aff[:, z, -1]
    vals = np.einsum("vk,vk->v", state.vx, grad[cell_of_v]) + off[cell_of_v]
    tol = _snap_tolerance(grad, off, radius)
    vals[np.abs(vals) <= tol[cell_of_v]] = 0.0
    n = state.n_cells
    has_pos = np.bincount(cell_of_v, weights=vals > 0, minlength=n) > 0
    has_neg = np.bincount(cell_of_v, weights=vals < 0, minlength=n) > 0
    sign = np.where(has_pos, 1, -1).astype(np.int8)

    n_degenerate = 0
    dead = ~has_pos & ~has_neg
    if np.any(dead):
        if degenerate == "raise":
            ci = int(np.flatnonzero(dead)[0])
            raise DegenerateNeuronError(
                f"neuron {z} vanishes identically on cell {ci}", neuron=z, cell_index=ci)
        n_degenerate = int(dead.sum())
        sign[dead] = -1

    cut = np.flatnonzero(has_pos & has_neg)
    n_slivers = 0
    if len(cut):
        if k == 2:
            neg_vx, neg_s, pos_vx, pos_s = _kernels.clip_polygons(
                state.vx, state.start, vals, cut, backend=backend)
            neg_m = _kernels.polygon_areas(neg_vx, neg_s)
            pos_m = _kernels.polygon_areas(pos_vx, pos_s)
        else:
            lo = state.vx[state.start[cut], 0]
            hi = state.vx[state.start[cut] + 1, 0]
            va = vals[state.start[cut]]
            vb = vals[state.start[cut] + 1]
            p = lo + va / (va - vb) * (hi - lo)
            left_neg = va < 0
            neg_lo = np.where(left_neg, lo, p)
            neg_hi = np.where(left_neg, p, hi)
            pos_lo = np.where(left_neg, p, lo)
            pos_hi = np.where(left_neg, hi, p)
            neg_vx = np.column_stack([neg_lo, neg_hi]).reshape(-1, 1)
            pos_vx = np.column_stack([pos_lo, pos_hi]).reshape(-1, 1)
            neg_s = pos_s = np.arange(len(cut) + 1, dtype=np.int64) * 2
            neg_m, pos_m = neg_hi - neg_lo, pos_hi - pos_lo
        sliver = (neg_m < sliver_measure) | (pos_m < sliver_measure)
        if np.any(sliver):
            n_slivers = int(sliver.sum())
            log.debug("neuron %d: discarded %d sliver children", z, n_slivers)
            sign[cut[sliver]] = np.where(pos_m[sliver] >= neg_m[sliver], 1, -1)
            keep = ~sliver
            cut = cut[keep]
            neg_vx, neg_s = _select(neg_vx, neg_s, np.flatnonzero(keep))
            pos_vx, pos_s = _select(pos_vx, pos_s, np.flatnonzero(keep))

    if len(cut) == 0:
        state.pattern[:, z] = sign
        return n_slivers, n_degenerate

    # Rebuild in stable order: an uncut cell stays put, a cut cell becomes (neg, pos).
    counts = np.ones(n, dtype=np.int64)
    counts[cut] = 2
    pattern = np.repeat(state.pattern, counts, axis=0)
    aff = np.repeat(state.aff, counts, axis=0)
    new_sign = np.repeat(sign, counts)
    first = np.cumsum(counts) - counts
    new_sign[first[cut]] = -1
    new_sign[first[cut] + 1] = 1
    pattern[:, z] = new_sign

    n_old_v = len(state.vx)
    all_vx = np.concatenate([state.vx, neg_vx, pos_vx])
    src_lo = np.repeat(state.start[:-1], counts)
    src_len = np.repeat(lengths, counts)
    src_lo[first[cut]] = n_old_v + neg_s[:-1]
    src_len[first[cut]] = np.diff(neg_s)
    src_lo[first[cut] + 1] = n_old_v + len(neg_vx) + pos_s[:-1]
    src_len[first[cut] + 1] = np.diff(pos_s)
    new_start = np.zeros(len(src_lo) + 1, dtype=np.int64)
    np.cumsum(src_len, out=new_start[1:])
    idx, _ = _kernels.gather_ranges(_pairs_to_start(src_lo, src_len), np.arange(len(src_lo)) * 2)
    state.vx = all_vx[idx]
    state.start = new_start
    state.pattern = pattern
    state.aff = aff
    return n_slivers, n_degenerate


def _pairs_to_start(lo, length):
    """Encode (lo, length) pairs as a start array usable by ``gather_ranges`` at even slots."""
    out = np.empty(2 * len(lo) + 1, dtype=np.int64)
    out[0:-1:2] = lo
    out[1::2] = lo + length
    out[-1] = 0
    return out


def _select(vx, start, which):
    idx, lengths = _kernels.gather_ranges(start, which)
    new_start = np.zeros(len(which) + 1, dtype=np.int64)
    np.cumsum(lengths, out=new_start[1:])
    return vx[idx], new_start


def enumerate_regions(net: Network, slc: AffineSlice, window=None, *, retain_cells=True,
                      merge=True, budget=None, degenerate="raise", n_layers=None,
                      backend=None) -> RegionCensus:
    """Partition ``window`` into the activation regions of ``net`` restricted to ``slc``.

    ``n_layers`` restricts the enumeration to the first hidden layers.
    ``degenerate="assign"`` records cells where a neuron vanishes identically
    and marks that neuron off instead of raising.
    """
    if slc.input_dim != net.input_dim:
        raise ValueError("slice and network disagree on the input dimension")
    if degenerate not in ("raise", "assign"):
        raise ValueError("degenerate must be 'raise' or 'assign'")
    t0 = time.perf_counter()
    k = slc.k
    window = _check_window(default_window(slc) if window is None else window, k)
    depth = net.depth if n_layers is None else int(n_layers)
    if not 0 <= depth <= net.depth:
        raise ValueError(f"n_layers must be in [0, {net.depth}]")
    sls = net.layer_slices()
    n_used = sls[depth - 1].stop if depth else 0
    if budget is None:
        budget = default_budget(max(net.n_neurons, 1), k)
    radius = float(np.max(np.linalg.norm(window, axis=1)))
    sliver_measure = (SLIVER_AREA if k == 2 else SLIVER_LENGTH) * _window_measure(window)
    E = slc.embedding_affine()

    state = _Flat(window, net.n_neurons)
    slivers = degenerate_events = 0
    for layer in range(depth):
        state.aff[:, sls[layer], :] = _layer_functionals(
            net, layer, E, state.aff, state.pattern, sls)
        for z in range(sls[layer].start, sls[layer].stop):
            s, d = _split_flat(state, z, radius, k, sliver_measure, backend, degenerate)
            slivers += s
            degenerate_events += d
            if state.n_cells > budget:
                partial = _finish(net, state, window, k, depth, sls, n_used, E, t0,
                                  slivers, degenerate_events, retain_cells, merge=False)
                partial.partial = True
                raise BudgetExceededError(
                    f"{state.n_cells} cells after neuron {z} exceed budget {budget}",
                    partial=partial)
    return _finish(net, state, window, k, depth, sls, n_used, E, t0, slivers,
                   degenerate_events, retain_cells, merge)


def _finish(net, state, window, k, depth, sls, n_used, E, t0, slivers, degenerate_events,
            retain_cells, merge):
    census = RegionCensus(
        activation_count=state.n_cells, linear_count=None, window=window, k=k,
        discarded_slivers=slivers, degenerate_events=degenerate_events,
        patterns=state.pattern[:, :n_used].copy(), vertices_flat=state.vx, starts=state.start)
    if retain_cells:
        if depth == net.depth:
            w, b = net.weights[-1], net.biases[-1]
            if depth == 0:
                out = np.repeat((w @ E)[None], state.n_cells, axis=0)
                out[:, :, -1] += b
            else:
                last = sls[depth - 1]
                prev = state.aff[:, last, :] * (state.pattern[:, last] > 0)[:, :, None]
                out = np.einsum("jn,cnk->cjk", w, prev)
                out[:, :, -1] += b
        else:
            out = [None] * state.n_cells
        census.cells = [
            Cell(state.vx[state.start[i]:state.start[i + 1]].copy(), state.pattern[i, :n_used].copy(),
                 state.aff[i, :n_used].copy(), None if out[i] is None else np.array(out[i]))
            for i in range(state.n_cells)
        ]
        if merge and depth == net.depth:
            census.linear_count = merge_linear_regions(census, net)
    census.wall_time = time.perf_counter() - t0
    return census


def _cell_edges_on(cell, z, tol_scale):
    """Edges of ``cell`` lying on the zero line of neuron ``z``'s functional."""
    row = cell.neuron_affines[z]
    vals = cell.vertices @ row[:-1] + row[-1]
    tol = 1e-7 * (1.0 + abs(row[-1]) + np.linalg.norm(row[:-1]) * tol_scale)
    on = np.abs(vals) <= tol
    n = len(vals)
    return [(cell.vertices[i], cell.vertices[(i + 1) % n]) for i in range(n) if on[i] and on[(i + 1) % n]]


def _share_edge(ca, cb, z, tol_scale):
    ea = _cell_edges_on(ca, z, tol_scale)
    eb = _cell_edges_on(cb, z, tol_scale)
    if not ea or not eb:
        return False
    row = ca.neuron_affines[z, :-1]
    direction = np.array([-row[1], row[0]]) / max(np.linalg.norm(row), 1e-300)
    for a0, a1 in ea:
        ia = sorted([a0 @ direction, a1 @ direction])
        for b0, b1 in eb:
            ib = sorted([b0 @ direction, b1 @ direction])
            if min(ia[1], ib[1]) - max(ia[0], ib[0]) > 1e-9 * max(1.0, tol_scale):
                return True
    return False


def adjacency(census: RegionCensus) -> list[tuple[int, int]]:
    """Pairs of cells sharing a boundary piece of positive length (or an endpoint for k=1)."""
    cells = census.cells
    if census.k == 1:
        order = np.argsort([c.vertices[0, 0] for c in cells])
        return [(int(order[i]), int(order[i + 1])) for i in range(len(order) - 1)]
    scale = float(np.max(np.abs(census.window)))
    index = {c.pattern.tobytes(): i for i, c in enumerate(cells)}
    pairs = []
    for i, c in enumerate(cells):
        vals = c.vertices @ c.neuron_affines[:, :-1].T + c.neuron_affines[:, -1]
        tol = 1e-7 * (1.0 + np.abs(c.neuron_affines[:, -1])
                      + np.linalg.norm(c.neuron_affines[:, :-1], axis=1) * scale)
        on = np.abs(vals) <= tol
        on_edge = on & np.roll(on, -1, axis=0)
        for z in np.flatnonzero(on_edge.any(axis=0)):
            flipped = c.pattern.copy()
            flipped[z] = -flipped[z]
            j = index.get(flipped.tobytes())
            if j is not None and j > i and _share_edge(c, cells[j], z, scale):
                pairs.append((i, j))
    return pairs


def merge_linear_regions(census: RegionCensus, net: Network, tol=MERGE_TOL) -> int:
    """Number of linear regions: components of adjacent cells with equal affine maps."""
    if census.cells is None:
        raise ValueError("census must retain its cells")
    n = len(census.cells)
    if n == 0:
        return 0
    maps = [cell_affine_map(net, c.pattern) for c in census.cells]
    rows, cols = [], []
    for i, j in adjacency(census):
        gi, ci = maps[i]
        gj, cj = maps[j]
        scale = 1.0 + max(np.max(np.abs(gi)), np.max(np.abs(ci)), np.max(np.abs(gj)), np.max(np.abs(cj)))
        if np.max(np.abs(gi - gj)) <= tol * scale and np.max(np.abs(ci - cj)) <= tol * scale:
            rows.append(i)
            cols.append(j)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    n_comp, _ = connected_components(graph, directed=False)
    return int(n_comp)


def _points_in_window(points, window):
    if window.shape[1] == 1:
        return (points[:, 0] >= window[0, 0]) & (points[:, 0] <= window[1, 0])
    d = np.roll(window, -1, axis=0) - window
    rel = points[:, None, :] - window[None, :, :]
    cr = d[None, :, 0] * rel[:, :, 1] - d[None, :, 1] * rel[:, :, 0]
    return np.all(cr >= -1e-12, axis=1)


def grid_pattern_oracle(net: Network, slc: AffineSlice, window, resolution: int, seed=0,
                        chunk=16384, return_points=False):
    """Distinct activation patterns seen on a uniform grid over ``window``.

    Grid points on (or numerically at) a boundary are jittered by 1e-9 and
    re-evaluated; the few that still tie are skipped.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    window = _check_window(window, slc.k)
    lo, hi = window.min(axis=0), window.max(axis=0)
    axes = [np.linspace(lo[d], hi[d], resolution) for d in range(slc.k)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, slc.k)
    grid = grid[_points_in_window(grid, window)]
    rng = np.random.default_rng(seed)
    found = {}
    for s in range(0, len(grid), chunk):
        u = grid[s:s + chunk]
        for _ in range(4):
            x = slc.embed(u)
            _, pre = forward(net, x)
            tol = 1e-12 * (1.0 + np.max(np.abs(x), axis=1))
            tie = np.any(np.abs(pre) <= tol[:, None], axis=1)
            for i in np.flatnonzero(~tie):
                key = tuple(np.where(pre[i] > 0, 1, -1).tolist())
                if key not in found:
                    found[key] = u[i]
            if not np.any(tie):
                break
            u = u[tie] + 1e-9 * rng.standard_normal(u[tie].shape)
    if return_points:
        return found
    return set(found)


def inradius(vertices) -> float:
    """Radius of the largest disc (or half-length of the interval) inside a convex cell."""
    vertices = np.asarray(vertices, dtype=np.float64)
    if vertices.shape[1] == 1:
        return 0.5 * float(vertices[1, 0] - vertices[0, 0])
    d = np.roll(vertices, -1, axis=0) - vertices
    normals = np.column_stack([d[:, 1], -d[:, 0]])  # outward for CCW
    norms = np.linalg.norm(normals, axis=1)
    keep = norms > 0
    normals, norms, base = normals[keep], norms[keep], vertices[keep]
    # maximise r subject to n.(c - v) + r |n| <= 0
    A = np.column_stack([normals, norms])
    b = np.einsum("ij,ij->i", normals, base)
    res = linprog([0, 0, -1], A_ub=A, b_ub=b, bounds=[(None, None), (None, None), (0, None)],
                  method="highs")
    return float(res.x[2]) if res.success else 0.0


def point_in_cell(point, vertices, tol=1e-9) -> bool:
    vertices = np.asarray(vertices)
    if vertices.shape[1] == 1:
        return vertices[0, 0] - tol <= point[0] <= vertices[1, 0] + tol
    return bool(_points_in_window_tol(np.atleast_2d(point), vertices, tol)[0])


def _points_in_window_tol(points, poly, tol):
    d = np.roll(poly, -1, axis=0) - poly
    rel = points[:, None, :] - poly[None, :, :]
    cr = d[None, :, 0] * rel[:, :, 1] - d[None, :, 1] * rel[:, :, 0]
    return np.all(cr >= -tol * np.linalg.norm(d, axis=1)[None], axis=1)


def refinement_check(net: Network, slc: AffineSlice, window, layer_prefix_j: int,
                     full=None) -> bool:
    """Every cell of the full enumeration lies in exactly one cell of the first-``j``-layer one."""
    if not 1 <= layer_prefix_j <= net.depth:
        raise ValueError(f"layer prefix must be in [1, {net.depth}]")
    full = full or enumerate_regions(net, slc, window, merge=False)
    prefix = enumerate_regions(net, slc, window, merge=False, n_layers=layer_prefix_j)
    n_pre = prefix.patterns.shape[1]
    by_pattern = {}
    for c in prefix.cells:
        by_pattern.setdefault(c.pattern.tobytes(), []).append(c)
    scale = max(1.0, float(np.max(np.abs(full.window))))
    for c in full.cells:
        owners = by_pattern.get(c.pattern[:n_pre].tobytes(), [])
        if len(owners) != 1:
            return False
        if not all(point_in_cell(v, owners[0].vertices, 1e-9 * scale) for v in c.vertices):
            return False
    return True


def pattern_at_slice(net, slc, u):
    """Activation pattern at slice point ``u``; ``BoundaryPointError`` on ties."""
    from .network import pattern_at

    return pattern_at(net, slc.embed(u))


__all__ = [
    "AffineSlice", "Cell", "RegionCensus", "SplitLine", "BoundaryPointError",
    "restrict_neuron", "split_cell", "enumerate_regions", "merge_linear_regions",
    "grid_pattern_oracle", "refinement_check", "square_window", "segment_window",
    "default_window", "default_budget", "inradius", "adjacency", "point_in_cell", "window_cell",
]
