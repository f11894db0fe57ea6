"""Vietoris-Rips persistent homology in dimensions 0 and 1.

The complex at scale eps contains every simplex whose diameter (max pairwise
distance among its vertices) is <= eps. The closed threshold makes merge and
birth scales coincide with exact distance values; with continuous random
inputs it agrees with the strict convention almost surely. Coefficients are
Z/2. Simplices are ordered by (diameter, dimension, lexicographic vertex
tuple).

Dimension 0 is computed by Kruskal union-find over the sorted edges: each
union event emits one death at the edge weight. Dimension 1 pairs come from
a column reduction of the edge coboundary matrix processed in reverse
filtration order, with two exact shortcuts:

  * clearing: edges that merge components (spanning-forest edges) are
    deaths in dimension 0, so their columns are skipped outright;
  * cone cap: at any scale >= the enclosing radius min_i max_j d(i, j) the
    complex is a cone, hence every 1-cycle born beyond that scale dies
    instantly and triangles beyond it never kill anything visible.

The pairs produced equal those of the textbook full-boundary-matrix
reduction (the test suite checks this against an independent brute force).
Zero-persistence pairs are dropped from the output but counted in the
barcode's diagnostics field, since pseudometric inputs create genuine
zero-distance pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
import numpy as np

from .errors import CapacityError, DataError, FormatError
from .grassmann import DistanceMatrix

MAX_TRIANGLES = 2**31


@dataclass(frozen=True)
class PersistenceInterval:
    """One bar: a feature of dimension dim alive on [birth, death).

    death is math.inf for the essential component. open_end marks dim-1
    intervals still alive at the construction cap; their true death is
    unknown, not infinite.
    """

    dim: int
    birth: float
    death: float
    open_end: bool = False

    def __post_init__(self):
        if self.dim not in (0, 1):
            raise DataError(f"interval dimension must be 0 or 1, got {self.dim}")
        if self.birth < 0:
            raise DataError(f"negative birth {self.birth}")
        if not self.birth < self.death:
            raise DataError(
                f"interval [{self.birth}, {self.death}) is empty; "
                "zero-persistence pairs are dropped, not stored"
            )

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class Barcode:
    """Multiset of persistence intervals plus the dim-1 scale cap.

    dropped_zero_persistence counts the pairs discarded because birth and
    death coincided (instant merges of duplicate points, instantly filled
    cycles).
    """

    intervals: tuple[PersistenceInterval, ...]
    scale_max: float
    dropped_zero_persistence: int = 0

    def __post_init__(self):
        ivs = tuple(
            sorted(
                self.intervals,
                key=lambda iv: (iv.dim, iv.birth, iv.death, iv.open_end),
            )
        )
        object.__setattr__(self, "intervals", ivs)
        dim0 = [iv for iv in ivs if iv.dim == 0]
        if dim0:
            essential = [iv for iv in dim0 if math.isinf(iv.death)]
            if len(essential) != 1:
                raise DataError(
                    f"expected exactly one essential dim-0 interval, got {len(essential)}"
                )
        for iv in ivs:
            if math.isinf(iv.death) and iv.dim != 0:
                raise DataError("infinite death is only valid in dimension 0")
            if not math.isinf(iv.death) and iv.death > self.scale_max:
                raise DataError(
                    f"death {iv.death} exceeds scale_max {self.scale_max}"
                )

    def in_dim(self, dim: int) -> tuple[PersistenceInterval, ...]:
        return tuple(iv for iv in self.intervals if iv.dim == dim)


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self, m: int):
        self.parent = list(range(m))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _sorted_edges(d: np.ndarray):
    """Edges (i < j) ordered by (weight, i, j): the filtration order."""
    m = d.shape[0]
    iu, ju = np.triu_indices(m, 1)
    w = d[iu, ju]
    order = np.lexsort((ju, iu, w))
    return iu[order], ju[order], w[order]


def rips_h0(d: DistanceMatrix) -> Barcode:
    """Dim-0 barcode: one [0, w) per union event over the Kruskal-ordered
    edges (the minimum spanning tree weights), plus the essential [0, inf).

    Zero-weight merges (duplicate points under a pseudometric) are dropped
    and counted in the diagnostics field.
    """
    e = d.entries
    m = e.shape[0]
    uf = _UnionFind(m)
    intervals = []
    dropped = 0
    if m > 1:
        iu, ju, w = _sorted_edges(e)
        for q in range(len(w)):
            if uf.union(int(iu[q]), int(ju[q])):
                if w[q] > 0.0:
                    intervals.append(PersistenceInterval(0, 0.0, float(w[q])))
                else:
                    dropped += 1
    intervals.append(PersistenceInterval(0, 0.0, math.inf))
    return Barcode(tuple(intervals), math.inf, dropped)


def _guard_triangle_count(d: np.ndarray, cap: float) -> None:
    m = d.shape[0]
    if m * (m - 1) * (m - 2) // 6 <= MAX_TRIANGLES:
        return
    adj = (d <= cap).astype(np.float32)
    np.fill_diagonal(adj, 0.0)
    count = float(((adj @ adj) * adj).sum()) / 6.0
    if count > MAX_TRIANGLES:
        raise CapacityError(
            f"filtration holds ~{count:.3g} triangles (> {MAX_TRIANGLES}); "
            "use a smaller scale_max"
        )


def rips_h1(d: DistanceMatrix, scale_max: float) -> Barcode:
    """Dim-1 barcode up to the cap scale_max.

    Intervals with death <= scale_max are closed; classes still alive at the
    cap are reported with death = scale_max and open_end set. Births at
    exactly scale_max have zero visible persistence and are dropped.
    """
    if not scale_max > 0:
        raise DataError(f"scale_max must be positive, got {scale_max}")
    e = d.entries
    m = e.shape[0]
    if m < 3:
        return Barcode((), scale_max, 0)

    iu, ju, w = _sorted_edges(e)
    keep = w <= scale_max
    iu, ju, w = iu[keep], ju[keep], w[keep]
    ne = len(w)
    if ne == 0:
        return Barcode((), scale_max, 0)

    # Cone cap: nothing visible is born or dies past the enclosing radius.
    r_enc = float(e.max(axis=1).min())
    cap = min(scale_max, r_enc)
    _guard_triangle_count(e, cap)

    uf = _UnionFind(m)
    negative = np.zeros(ne, dtype=bool)
    for q in range(ne):
        negative[q] = uf.union(int(iu[q]), int(ju[q]))

    dropped = int(((~negative) & (w > cap)).sum())
    bars: list[PersistenceInterval] = []

    # packed id of triangle a < b < c is (a*m + b)*m + c; within one
    # diameter, ascending id is ascending lexicographic vertex order
    dm = e
    idx = np.arange(m)

    def cofacets(q: int):
        """Triangles containing edge q with diameter <= cap, sorted by
        (diameter, packed id): the filtration order restricted to them."""
        i, j = int(iu[q]), int(ju[q])
        di = dm[i]
        dj = dm[j]
        ks = idx[(di <= cap) & (dj <= cap)]
        ks = ks[(ks != i) & (ks != j)]
        if ks.size == 0:
            return _EMPTY_COL
        ds = np.maximum(np.maximum(di[ks], dj[ks]), w[q])
        a = np.minimum(np.minimum(i, j), ks)
        c = np.maximum(np.maximum(i, j), ks)
        b = (i + j + ks) - a - c
        ids = (a * m + b) * m + c
        o = np.lexsort((ids, ds))
        return ds[o], ids[o]

    stored: dict[int, tuple] = {}
    for q in range(ne - 1, -1, -1):
        if negative[q] or w[q] > cap:
            continue
        birth = float(w[q])
        col = cofacets(q)
        raw = True
        while True:
            if col[1].size == 0:
                # essential within the cap: still open at scale_max
                if scale_max > birth:
                    bars.append(PersistenceInterval(1, birth, scale_max, open_end=True))
                else:
                    dropped += 1
                break
            piv_d, piv_id = float(col[0][0]), int(col[1][0])
            entry = stored.get(piv_id)
            if entry is None:
                # raw columns are pure cofacet sets; store just the edge and
                # regenerate on the rare later probe
                stored[piv_id] = ("lazy", q) if raw else ("full", col)
                if piv_d > birth:
                    bars.append(PersistenceInterval(1, birth, piv_d))
                else:
                    dropped += 1
                break
            kind, val = entry
            other = cofacets(val) if kind == "lazy" else val
            col = _xor_columns(col, other)
            raw = False
    return Barcode(tuple(bars), scale_max, dropped)


_EMPTY_COL = (np.empty(0, dtype=np.float64), np.empty(0, dtype=np.int64))


def _xor_columns(c1, c2):
    """Symmetric difference of two sorted (diameter, id) columns over Z/2."""
    ds = np.concatenate((c1[0], c2[0]))
    ids = np.concatenate((c1[1], c2[1]))
    o = np.lexsort((ids, ds))
    ids = ids[o]
    ds = ds[o]
    dup = np.zeros(len(ids), dtype=bool)
    same = ids[1:] == ids[:-1]
    dup[1:] |= same
    dup[:-1] |= same
    return ds[~dup], ids[~dup]


def rips_barcode(d: DistanceMatrix, scale_max: float) -> Barcode:
    """Combined dim-0 and dim-1 barcode with shared diagnostics."""
    h0 = rips_h0(d)
    h1 = rips_h1(d, scale_max)
    return Barcode(
        h0.intervals + h1.intervals,
        scale_max,
        h0.dropped_zero_persistence + h1.dropped_zero_persistence,
    )


def betti_at(b: Barcode, epsilon: float, dim: int) -> int:
    """Number of dim-bars alive at epsilon: birth <= epsilon < death."""
    if epsilon < 0:
        raise DataError(f"epsilon must be >= 0, got {epsilon}")
    return sum(
        1 for iv in b.intervals if iv.dim == dim and iv.birth <= epsilon < iv.death
    )


@dataclass(frozen=True)
class ComponentPartition:
    """Connected components of the scale-epsilon graph (edges with weight
    <= epsilon). Labels are dense from 0 in order of first appearance."""

    epsilon: float
    labels: tuple[int, ...]

    @property
    def n_components(self) -> int:
        return max(self.labels) + 1

    def components(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for i, lab in enumerate(self.labels):
            groups.setdefault(lab, []).append(i)
        return [groups[lab] for lab in sorted(groups)]

    def singletons(self) -> list[int]:
        return [c[0] for c in self.components() if len(c) == 1]


def components_at(d: DistanceMatrix, epsilon: float) -> ComponentPartition:
    """Partition points by connectivity through edges of weight <= epsilon."""
    if epsilon < 0:
        raise DataError(f"epsilon must be >= 0, got {epsilon}")
    e = d.entries
    m = e.shape[0]
    uf = _UnionFind(m)
    iu, ju = np.nonzero(np.triu(e <= epsilon, 1))
    for a, b in zip(iu, ju):
        uf.union(int(a), int(b))
    labels = []
    label_of: dict[int, int] = {}
    for i in range(m):
        root = uf.find(i)
        if root not in label_of:
            label_of[root] = len(label_of)
        labels.append(label_of[root])
    return ComponentPartition(float(epsilon), tuple(labels))


def write_barcode(b: Barcode, path: str | Path) -> None:
    """CSV rows dim,birth,death,open; death is "inf" for the essential class."""
    with open(path, "w") as fh:
        fh.write("dim,birth,death,open\n")
        for iv in b.intervals:
            death = "inf" if math.isinf(iv.death) else f"{iv.death:.17g}"
            fh.write(f"{iv.dim},{iv.birth:.17g},{death},{int(iv.open_end)}\n")


def read_barcode(path: str | Path) -> Barcode:
    """Parse a barcode CSV written by write_barcode.

    scale_max is not serialized; it is recovered as the death of any open
    interval, else the largest finite death, else infinity. Diagnostics
    counts are not serialized and read back as 0.
    """
    path = Path(path)
    intervals = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "dim,birth,death,open":
            raise FormatError(f"{path}:1: bad header {header!r}")
        for ln, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise FormatError(f"{path}:{ln}: expected 4 fields, got {len(parts)}")
            try:
                dim = int(parts[0])
                birth = float(parts[1])
                death = math.inf if parts[2] == "inf" else float(parts[2])
                open_end = bool(int(parts[3]))
            except ValueError as exc:
                raise FormatError(f"{path}:{ln}: {exc}") from None
            try:
                intervals.append(PersistenceInterval(dim, birth, death, open_end))
            except DataError as exc:
                raise FormatError(f"{path}:{ln}: {exc}") from None
    opens = [iv.death for iv in intervals if iv.open_end]
    finite = [iv.death for iv in intervals if not math.isinf(iv.death)]
    if opens:
        scale_max = max(opens)
    elif finite:
        scale_max = max(finite)
    else:
        scale_max = math.inf
    return Barcode(tuple(intervals), scale_max)
