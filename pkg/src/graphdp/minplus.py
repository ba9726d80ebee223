"""Min-plus (tropical) kernels over saturating 32-bit distance blocks.

All kernels operate on dense ``int64`` matrices whose entries lie in
``[0, INF_SENTINEL]``; the sentinel means "unreachable".  Sums may
transiently exceed the sentinel inside a candidate computation, but every
stored entry is the minimum of an in-range incumbent and a candidate, so
stored values never exceed the sentinel (saturation by construction).
Writes follow a strict-improvement discipline: an entry changes only when
the candidate is strictly smaller, so ties keep the incumbent and repeated
closure passes are byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import INF_SENTINEL


class NegativeEntryError(ValueError):
    """Distance matrices must be non-negative."""


class BlockShapeError(ValueError):
    """Malformed distance block (not square, id mismatch, bad diagonal)."""


@dataclass
class PanelTrace:
    """One pivot step of a Floyd-Warshall closure, as seen by the cost model.

    ``rows`` is the number of logical rows the permutation unit repacks for
    this pivot (the full block height); ``improved`` is the population of
    the strict-improvement mask, i.e. the number of cells actually written.
    """

    pivot: int
    dim: int
    rows: int
    improved: int


@dataclass
class DistanceBlock:
    """Square distance matrix over an explicit vertex id set.

    ``ids[i]`` is the global vertex behind row/column ``i``.  The diagonal
    is identically zero and entries are saturating 32-bit values stored in
    int64 for overflow-free arithmetic.
    """

    data: np.ndarray
    ids: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.int64)
        self.ids = np.asarray(self.ids, dtype=np.int64)
        if self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
            raise BlockShapeError("block data must be square")
        if self.ids.shape != (self.data.shape[0],):
            raise BlockShapeError("ids length must match block dimension")

    @property
    def dim(self) -> int:
        return int(self.data.shape[0])

    def local(self, global_ids: np.ndarray) -> np.ndarray:
        """Map global vertex ids to local row indices (all must be present)."""
        order = np.argsort(self.ids, kind="stable")
        pos = np.searchsorted(self.ids[order], global_ids)
        if np.any(pos >= self.ids.size) or np.any(
            self.ids[order][np.minimum(pos, self.ids.size - 1)] != global_ids
        ):
            raise BlockShapeError("vertex id not present in block")
        return order[pos]

    def validate(self) -> None:
        if np.any(self.data < 0):
            raise NegativeEntryError("negative distance entry")
        if np.any(self.data > INF_SENTINEL):
            raise BlockShapeError("entry above the saturation sentinel")
        if np.any(np.diagonal(self.data) != 0):
            raise BlockShapeError("diagonal must be zero")


def _check_square_nonneg(d: np.ndarray) -> None:
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise BlockShapeError("distance matrix must be square")
    if np.any(d < 0):
        raise NegativeEntryError("negative distance entry")
    if np.any(np.diagonal(d) != 0):
        raise BlockShapeError("diagonal must be zero before closure")


def fw_panel_step(d: np.ndarray, k: int, trace: list | None = None) -> PanelTrace:
    """One Floyd-Warshall pivot: d[i,j] <- min(d[i,j], d[i,k] + d[k,j]).

    Updates ``d`` in place under strict-improvement writes.  The pivot row
    and column are fixed points (the diagonal is zero, so their candidates
    tie and the incumbent stays).  Returns the per-pivot trace event.
    """
    cand = d[:, k, None] + d[None, k, :]
    improved = cand < d
    d[improved] = cand[improved]
    ev = PanelTrace(pivot=k, dim=d.shape[0], rows=d.shape[0], improved=int(improved.sum()))
    if trace is not None:
        trace.append(ev)
    return ev


def floyd_warshall_dense(d: np.ndarray, trace: list | None = None) -> np.ndarray:
    """Exact all-pairs closure of a dense non-negative distance matrix.

    Works on a copy.  When ``trace`` is given, every pivot appends a
    :class:`PanelTrace` (this costs one extra comparison pass per pivot);
    otherwise the fast path runs plain fused min-updates.
    """
    _check_square_nonneg(d)
    out = np.array(d, dtype=np.int64, copy=True)
    n = out.shape[0]
    if trace is None:
        for k in range(n):
            np.minimum(out, out[:, k, None] + out[None, k, :], out=out)
    else:
        for k in range(n):
            fw_panel_step(out, k, trace)
    return out


def close_block(block: DistanceBlock, trace: list | None = None) -> DistanceBlock:
    """Floyd-Warshall closure of a :class:`DistanceBlock` (new block)."""
    return DistanceBlock(floyd_warshall_dense(block.data, trace), block.ids.copy())


def restrict(block: DistanceBlock, global_ids: np.ndarray) -> DistanceBlock:
    """Sub-block over the given global ids (order preserved).

    Restriction of a closed block stays closed: triangle inequalities over a
    subset are a subset of the original inequalities.
    """
    global_ids = np.asarray(global_ids, dtype=np.int64)
    ix = block.local(global_ids)
    return DistanceBlock(block.data[np.ix_(ix, ix)].copy(), global_ids.copy())


def inject(db: DistanceBlock, boundary: np.ndarray, d: DistanceBlock) -> DistanceBlock:
    """Lower ``d`` entries at boundary pairs using values from ``db``.

    ``boundary`` lists global ids present in both blocks.  Entries only ever
    decrease (min-merge), so injecting exact distances into a local closure
    and re-closing yields the exact closure.  ``d`` is modified in place and
    returned.
    """
    boundary = np.asarray(boundary, dtype=np.int64)
    if boundary.size == 0:
        return d
    src_ix = db.local(boundary)
    dst_ix = d.local(boundary)
    sub = db.data[np.ix_(src_ix, src_ix)]
    view = d.data[np.ix_(dst_ix, dst_ix)]
    d.data[np.ix_(dst_ix, dst_ix)] = np.minimum(view, sub)
    return d


def min_plus_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tropical matrix product: out[i,j] = min_k a[i,k] + b[k,j]."""
    if a.shape[1] != b.shape[0]:
        raise BlockShapeError("inner dimensions differ")
    out = np.full((a.shape[0], b.shape[1]), INF_SENTINEL, dtype=np.int64)
    for k in range(a.shape[1]):
        np.minimum(out, a[:, k, None] + b[None, k, :], out=out)
    return out


def min_plus_merge(
    d1: DistanceBlock,
    db: DistanceBlock,
    d2: DistanceBlock,
    b1: np.ndarray,
    b2: np.ndarray,
) -> np.ndarray:
    """Cross-component distances through the boundary matrix.

    out[m, n] = min over i in b1, j in b2 of
        d1[m, i] + db[i, j] + d2[j, n]

    with m ranging over d1's rows and n over d2's columns.  Empty boundary
    on either side yields an all-INF result (the components cannot reach
    each other through the closed boundary set).
    """
    b1 = np.asarray(b1, dtype=np.int64)
    b2 = np.asarray(b2, dtype=np.int64)
    m, n = d1.dim, d2.dim
    if b1.size == 0 or b2.size == 0:
        return np.full((m, n), INF_SENTINEL, dtype=np.int64)
    left = d1.data[:, d1.local(b1)]
    mid = db.data[np.ix_(db.local(b1), db.local(b2))]
    right = d2.data[d2.local(b2), :]
    out = min_plus_product(min_plus_product(left, mid), right)
    return np.minimum(out, INF_SENTINEL)
