"""Partial orders on interval forecasts and their Hasse diagrams.

Intervals are ordered componentwise: ``[l1, u1] <= [l2, u2]`` iff
``l1 <= l2`` and ``u1 <= u2``. Nested intervals are incomparable. The
midpoint order is a total preorder kept only to show how the decomposition
breaks when the covariate order is not aligned with the stochastic order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .scoring import DomainError, Interval


class OrderRelation(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    INCOMPARABLE = "incomparable"

    def inverse(self) -> "OrderRelation":
        return {
            OrderRelation.LESS: OrderRelation.GREATER,
            OrderRelation.GREATER: OrderRelation.LESS,
        }.get(self, self)


class OrderKind(enum.Enum):
    COMPONENTWISE = "componentwise"
    MIDPOINT = "midpoint"

    @property
    def unsafe(self) -> bool:
        return self is OrderKind.MIDPOINT


def compare(a: Interval, b: Interval, kind: OrderKind = OrderKind.COMPONENTWISE) -> OrderRelation:
    if kind is OrderKind.MIDPOINT:
        ma, mb = a.midpoint, b.midpoint
        if ma < mb:
            return OrderRelation.LESS
        if ma > mb:
            return OrderRelation.GREATER
        return OrderRelation.EQUAL
    if a.lower == b.lower and a.upper == b.upper:
        return OrderRelation.EQUAL
    if a.lower <= b.lower and a.upper <= b.upper:
        return OrderRelation.LESS
    if a.lower >= b.lower and a.upper >= b.upper:
        return OrderRelation.GREATER
    return OrderRelation.INCOMPARABLE


def _bounds(ivs):
    if isinstance(ivs, tuple) and len(ivs) == 2 and not isinstance(ivs[0], Interval):
        lower, upper = ivs
    else:
        ivs = list(ivs)
        lower = [iv.lower for iv in ivs]
        upper = [iv.upper for iv in ivs]
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape or lower.ndim != 1:
        raise DomainError("lower and upper bounds must be 1-d arrays of equal length")
    return lower, upper


def comparability_fraction(ivs, kind: OrderKind = OrderKind.COMPONENTWISE, chunk: int = 2048) -> float:
    """Fraction of unordered pairs that are comparable (``EQUAL`` counts).

    ``ivs`` is a sequence of :class:`Interval` or a ``(lower, upper)`` tuple of
    arrays. Only strictly nested pairs are incomparable, so those are counted
    in row blocks to keep memory bounded.
    """
    lower, upper = _bounds(ivs)
    n = lower.size
    if n < 2:
        raise DomainError("comparability needs at least two intervals")
    if kind is OrderKind.MIDPOINT:
        return 1.0
    nested = 0
    for start in range(0, n, chunk):
        lo = lower[start:start + chunk, None]
        up = upper[start:start + chunk, None]
        # i strictly contains j
        nested += int(np.count_nonzero((lo < lower[None, :]) & (up > upper[None, :])))
    pairs = n * (n - 1) // 2
    return (pairs - nested) / pairs


@dataclass(frozen=True, eq=False)
class OrderDag:
    """Hasse diagram of the order on deduplicated interval classes.

    ``edge_src[k] < edge_dst[k]`` are immediate-predecessor pairs. Classes are
    numbered in sort order, so every edge points from a lower to a higher
    class index. ``class_map[i]`` is the class of case ``i``.
    """

    n: int
    n_classes: int
    class_map: np.ndarray
    edge_src: np.ndarray
    edge_dst: np.ndarray
    kind: OrderKind = OrderKind.COMPONENTWISE
    class_lower: np.ndarray | None = None
    class_upper: np.ndarray | None = None

    def __post_init__(self):
        if self.edge_src.shape != self.edge_dst.shape:
            raise DomainError("edge arrays differ in length")
        if self.edge_src.size and (
            self.edge_src.min() < 0 or max(self.edge_src.max(), self.edge_dst.max()) >= self.n_classes
        ):
            raise DomainError("edge endpoint out of range")

    @classmethod
    def from_edges(cls, n_classes: int, edges) -> "OrderDag":
        """DAG on classes ``0..n_classes-1`` with one case per class.

        Edges need not be a transitive reduction; reachability defines the
        order. Cycles are rejected.
        """
        edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        dag = cls(
            n=n_classes,
            n_classes=n_classes,
            class_map=np.arange(n_classes),
            edge_src=edges[:, 0].copy(),
            edge_dst=edges[:, 1].copy(),
        )
        topological_order(dag)
        return dag

    def reachability(self) -> np.ndarray:
        """Boolean matrix ``R[i, j]`` true iff class i precedes class j (i != j)."""
        m = self.n_classes
        reach = np.zeros((m, m), dtype=bool)
        reach[self.edge_src, self.edge_dst] = True
        # Warshall closure; only used on small inputs
        for k in range(m):
            reach |= reach[:, k:k + 1] & reach[k:k + 1, :]
        return reach


def topological_order(dag: OrderDag) -> np.ndarray:
    m = dag.n_classes
    indeg = np.bincount(dag.edge_dst, minlength=m)
    adj = [[] for _ in range(m)]
    for s, d in zip(dag.edge_src.tolist(), dag.edge_dst.tolist()):
        adj[s].append(d)
    stack = sorted(np.flatnonzero(indeg == 0).tolist(), reverse=True)
    order = []
    while stack:
        v = stack.pop()
        order.append(v)
        for w in adj[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    if len(order) != m:
        raise DomainError("order relation contains a cycle")
    return np.asarray(order, dtype=np.int64)


def _hasse_componentwise(cl: np.ndarray, cu: np.ndarray):
    # classes are sorted by (lower, upper) and distinct; predecessors of j lie at indices < j
    src, dst = [], []
    for j in range(1, cl.size):
        cand = np.flatnonzero((cl[:j] <= cl[j]) & (cu[:j] <= cu[j]))
        if cand.size == 0:
            continue
        # maximal elements of the dominated set: scan by lower desc, upper desc
        order = np.lexsort((-cu[cand], -cl[cand]))
        ups = cu[cand][order]
        prev_max = np.maximum.accumulate(np.concatenate(([-np.inf], ups[:-1])))
        keep = cand[order][ups > prev_max]
        src.append(keep)
        dst.append(np.full(keep.size, j))
    if not src:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    return np.concatenate(src).astype(np.int64), np.concatenate(dst).astype(np.int64)


def build_dag(ivs, kind: OrderKind = OrderKind.COMPONENTWISE) -> OrderDag:
    """Deduplicate equal intervals and return the transitive reduction."""
    lower, upper = _bounds(ivs)
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise DomainError("interval bounds must be finite")
    if np.any(lower > upper):
        raise DomainError("lower bound exceeds upper bound")
    n = lower.size
    if kind is OrderKind.MIDPOINT:
        mid = 0.5 * (lower + upper)
        keys, class_map = np.unique(mid, return_inverse=True)
        m = keys.size
        first = np.full(m, n, dtype=np.int64)
        np.minimum.at(first, class_map, np.arange(n))
        src = np.arange(m - 1, dtype=np.int64)
        return OrderDag(n, m, class_map.astype(np.int64), src, src + 1, kind,
                        lower[first] if n else lower, upper[first] if n else upper)
    pairs = np.column_stack([lower, upper])
    keys, class_map = np.unique(pairs, axis=0, return_inverse=True)
    class_map = np.asarray(class_map).reshape(-1).astype(np.int64)
    cl, cu = keys[:, 0].copy(), keys[:, 1].copy()
    src, dst = _hasse_componentwise(cl, cu)
    return OrderDag(n, cl.size, class_map, src, dst, kind, cl, cu)
