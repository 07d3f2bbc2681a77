"""Isotonic distributional regression over a partial order of intervals.

For every threshold ``z`` the fitted CDF value ``F_i(z)`` is the weighted
least-squares antitonic regression of the indicators ``1{y <= z}``: larger
intervals get stochastically larger predictive distributions, so smaller
CDF values.

All solves are exact. Binary regressions are computed by recursive
partitioning: a block is split along a maximum-weight down-set computed by
min-cut with integer capacities, which makes every fitted value an exact
ratio ``count / weight``. Lower quantiles used by the decomposition come
from a second route that bisects directly over thresholds, again with
integer min-cuts; the two routes are checked against each other in tests.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .ordering import OrderDag, OrderKind, build_dag
from .scoring import DomainError, InvariantError, check_level, level_fraction

SMALL_SAMPLE = 500
MAX_CASES = 50_000
_FRONTIER_MAX = 256  # larger pieces use a sparse BFS for the residual search
_INT32_MAX = 2**31 - 1


class SmallSampleWarning(UserWarning):
    """Fewer cases than IDR typically needs for stable estimates."""


def _fits_int32(c) -> bool:
    if isinstance(c, np.ndarray) and c.dtype != object:
        return int(np.abs(c).sum()) + 1 < _INT32_MAX
    return sum(abs(int(v)) for v in c) + 1 < _INT32_MAX


def _closure_scipy(k, src, dst, c):
    s, t = k, k + 1
    c = np.asarray(c, dtype=np.int64)
    inf = int(np.abs(c).sum()) + 1
    pos = np.flatnonzero(c > 0)
    neg = np.flatnonzero(c < 0)
    rows = np.concatenate([np.full(pos.size, s), neg, dst])
    cols = np.concatenate([pos, np.full(neg.size, t), src])
    caps = np.concatenate([c[pos], -c[neg], np.full(src.size, inf)])
    cap = sparse.csr_matrix((caps.astype(np.int32), (rows, cols)), shape=(k + 2, k + 2))
    flow = maximum_flow(cap, s, t, method="dinic").flow.tocoo()
    # residual capacity per node pair: cap - flow (flow is antisymmetric)
    size = k + 2
    keys = np.concatenate([rows * size + cols, flow.row.astype(np.int64) * size + flow.col])
    vals = np.concatenate([caps, -flow.data.astype(np.int64)])
    uniq, inv = np.unique(keys, return_inverse=True)
    resid = np.bincount(inv.reshape(-1), weights=vals, minlength=uniq.size)
    arc = uniq[resid > 0.5]
    tail, head = arc // size, arc % size
    # nodes that can still reach t; the rest form the maximal optimal down-set
    reach = np.zeros(size, dtype=bool)
    if size > _FRONTIER_MAX:
        back = sparse.csr_matrix((np.ones(arc.size, dtype=np.int8), (head, tail)), shape=(size, size))
        reach[breadth_first_order(back, t, directed=True, return_predecessors=False)] = True
        return ~reach[:k]
    reach[t] = True
    while True:
        new = reach[head] & ~reach[tail]
        if not new.any():
            break
        reach[tail[new]] = True
    return ~reach[:k]


def _closure_networkx(k, src, dst, c):
    g = nx.DiGraph()
    s, t = "s", "t"
    g.add_nodes_from(range(k))
    g.add_nodes_from([s, t])
    for i, ci in enumerate(c):
        ci = int(ci)
        if ci > 0:
            g.add_edge(s, i, capacity=ci)
        elif ci < 0:
            g.add_edge(i, t, capacity=-ci)
    for a, b in zip(src.tolist(), dst.tolist()):
        g.add_edge(b, a)  # no capacity attribute: infinite
    r = nx.algorithms.flow.preflow_push(g, s, t)
    reach = {t}
    frontier = [t]
    while frontier:
        v = frontier.pop()
        for u, _, attr in r.in_edges(v, data=True):
            if u not in reach and attr["capacity"] - attr["flow"] > 0:
                reach.add(u)
                frontier.append(u)
    return np.array([i not in reach for i in range(k)], dtype=bool)


def _chain_order(k: int, src: np.ndarray, dst: np.ndarray):
    """Nodes in order if the edges form a single path through all k nodes."""
    if src.size != k - 1:
        return None
    nxt = np.full(k, -1, dtype=np.int64)
    indeg = np.bincount(dst, minlength=k)
    if np.any(indeg > 1) or np.any(np.bincount(src, minlength=k) > 1):
        return None
    nxt[src] = dst
    roots = np.flatnonzero(indeg == 0)
    if roots.size != 1:
        return None
    order = np.empty(k, dtype=np.int64)
    v = roots[0]
    for i in range(k):
        order[i] = v
        v = nxt[v]
    return order


def max_down_set(k: int, src: np.ndarray, dst: np.ndarray, c) -> np.ndarray:
    """Largest down-set ``D`` maximising ``sum(c[D])``.

    ``src[e]`` precedes ``dst[e]``; a down-set containing ``dst[e]`` must
    contain ``src[e]``. ``c`` holds integers (numpy or Python ints).
    """
    c_arr = np.asarray(c, dtype=object) if not isinstance(c, np.ndarray) else c
    positive = np.array([int(v) > 0 for v in c_arr]) if c_arr.dtype == object else c_arr > 0
    negative = np.array([int(v) < 0 for v in c_arr]) if c_arr.dtype == object else c_arr < 0
    if not negative.any():
        return np.ones(k, dtype=bool)
    if src.size == 0:
        return ~negative
    if not positive.any():
        # only zero-weight nodes with no negative ancestor can join
        bad = negative.copy()
        changed = True
        while changed:
            spread = bad[src] & ~bad[dst]
            changed = bool(spread.any())
            bad[dst[spread]] = True
        return ~bad
    order = _chain_order(k, src, dst)
    if order is not None:
        # down-sets of a chain are prefixes: take the longest best prefix
        gains = np.concatenate([[0], np.cumsum(np.asarray(c_arr[order], dtype=object
                                                          if c_arr.dtype == object else np.int64))])
        best = max(gains)
        cut = max(i for i, g in enumerate(gains) if g == best)
        out = np.zeros(k, dtype=bool)
        out[order[:cut]] = True
        return out
    if c_arr.dtype != object and _fits_int32(c_arr):
        return _closure_scipy(k, src, dst, c_arr)
    return _closure_networkx(k, src, dst, c_arr)


class _Subgraph:
    """Induced-subgraph edge lookup on the class DAG."""

    def __init__(self, dag: OrderDag):
        self.src = dag.edge_src
        self.dst = dag.edge_dst
        self.local = np.full(dag.n_classes, -1, dtype=np.int64)

    def edges(self, nodes: np.ndarray):
        self.local[nodes] = np.arange(nodes.size)
        ls, ld = self.local[self.src], self.local[self.dst]
        keep = (ls >= 0) & (ld >= 0)
        out = ls[keep], ld[keep]
        self.local[nodes] = -1
        return out


def _partition_fit(dag: OrderDag, counts, weights, sub: _Subgraph | None = None):
    """Exact antitonic least squares of ``counts / weights`` over ``dag``.

    Returns per-class numerators and denominators of the fitted values.
    Works on Python ints when the integers are too large for int32 flows.
    """
    m = dag.n_classes
    sub = sub or _Subgraph(dag)
    big = sum(int(w) for w in weights) > _INT32_MAX
    if big:
        counts = np.asarray([int(v) for v in counts], dtype=object)
        weights = np.asarray([int(v) for v in weights], dtype=object)
    else:
        counts = np.asarray(counts, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.int64)
    num = np.empty(m, dtype=object if big else np.int64)
    den = np.empty(m, dtype=object if big else np.int64)
    stack = [np.arange(m)]
    while stack:
        nodes = stack.pop()
        kk, ww = counts[nodes], weights[nodes]
        K, W = kk.sum(), ww.sum()
        if nodes.size > 1 and 0 < K < W:
            g = math.gcd(int(K), int(W))
            c = (W // g) * kk - (K // g) * ww
            src, dst = sub.edges(nodes)
            down = max_down_set(nodes.size, src, dst, c)
            gain = c[down].sum() if down.any() else 0
            if gain > 0:
                stack.append(nodes[down])
                stack.append(nodes[~down])
                continue
        num[nodes] = K
        den[nodes] = W
    return num, den


def isotonic_binary_fit(dag: OrderDag, values, weights=None) -> np.ndarray:
    """Weighted least-squares fit of ``values`` that is antitonic in ``dag``.

    ``values`` are per-class means in [0, 1] with positive ``weights``
    (default 1). The fit satisfies ``p[i] >= p[j]`` whenever class i precedes
    class j. Integer-valued ``values * weights`` take the fast exact path;
    anything else is solved exactly in rational arithmetic.
    """
    values = np.asarray(values, dtype=float)
    m = dag.n_classes
    weights = np.ones(m) if weights is None else np.asarray(weights, dtype=float)
    if values.shape != (m,) or weights.shape != (m,):
        raise DomainError(f"expected {m} values and weights")
    if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
        raise DomainError("weights must be positive and finite")
    if np.any(values < 0) or np.any(values > 1) or not np.all(np.isfinite(values)):
        raise DomainError("values must lie in [0, 1]")
    if m == 0:
        return values.copy()
    counts = values * weights
    if np.all(weights == np.round(weights)) and np.allclose(counts, np.round(counts), rtol=0, atol=1e-9):
        num, den = _partition_fit(dag, np.round(counts).astype(np.int64), weights.astype(np.int64))
    else:
        fw = [Fraction(float(w)) for w in weights]
        fk = [Fraction(float(v)) * w for v, w in zip(values, fw)]
        scale = math.lcm(*(f.denominator for f in fw + fk))
        num, den = _partition_fit(
            dag, [int(f * scale) for f in fk], [int(f * scale) for f in fw]
        )
    return np.array([int(a) / int(b) for a, b in zip(num, den)], dtype=float)


@dataclass(frozen=True, eq=False)
class IdrFit:
    """Per-class predictive CDFs evaluated at the sorted unique outcomes."""

    thresholds: np.ndarray
    cdf: np.ndarray
    class_map: np.ndarray
    dag: OrderDag

    def case_cdf(self, case: int) -> np.ndarray:
        return self.cdf[self.class_map[case]]

    def lower_quantiles(self, beta: float) -> np.ndarray:
        """Lower beta-quantile of every case's CDF."""
        check_level(beta, "beta")
        first = np.argmax(self.cdf >= beta, axis=1)
        return self.thresholds[first][self.class_map]


def _validate(lower, upper, y, max_cases):
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (lower.shape == upper.shape == y.shape) or y.ndim != 1:
        raise DomainError("intervals and outcomes must have matching lengths")
    if y.size < 2:
        raise DomainError("IDR needs at least two cases")
    if y.size > max_cases:
        raise DomainError(
            f"{y.size} cases exceed the IDR size cap of {max_cases}; "
            "evaluate a random subsample or raise max_cases explicitly"
        )
    if not np.all(np.isfinite(y)):
        raise DomainError("outcomes must be finite")
    return lower, upper, y


def _class_counts(dag: OrderDag, y: np.ndarray):
    thresholds, rank = np.unique(y, return_inverse=True)
    rank = rank.reshape(-1)
    counts = np.zeros((dag.n_classes, thresholds.size), dtype=np.int64)
    np.add.at(counts, (dag.class_map, rank), 1)
    return thresholds, np.cumsum(counts, axis=1)


def idr_fit(lower, upper, y, kind: OrderKind = OrderKind.COMPONENTWISE,
            max_cases: int = MAX_CASES) -> IdrFit:
    """Fit IDR with intervals ``[lower, upper]`` as covariates."""
    lower, upper, y = _validate(lower, upper, y, max_cases)
    if y.size < SMALL_SAMPLE:
        warnings.warn(
            f"IDR fitted on {y.size} cases; at least {SMALL_SAMPLE} are usually needed",
            SmallSampleWarning,
            stacklevel=2,
        )
    dag = build_dag((lower, upper), kind)
    return fit_on_dag(dag, y)


def fit_on_dag(dag: OrderDag, y) -> IdrFit:
    y = np.asarray(y, dtype=float)
    thresholds, cum = _class_counts(dag, y)
    weights = cum[:, -1]
    sub = _Subgraph(dag)
    cdf = np.empty(cum.shape, dtype=float)
    for j in range(thresholds.size):
        num, den = _partition_fit(dag, cum[:, j], weights, sub)
        cdf[:, j] = num.astype(float) / den.astype(float)
    if np.any(np.diff(cdf, axis=1) < -1e-10):
        raise InvariantError("IDR CDF rows are not monotone")
    if dag.edge_src.size and np.any(cdf[dag.edge_src] < cdf[dag.edge_dst] - 1e-10):
        raise InvariantError("IDR CDFs violate the stochastic order")
    return IdrFit(thresholds, cdf, dag.class_map, dag)


def idr_lower_quantile(fit: IdrFit, case: int, beta: float) -> float:
    check_level(beta, "beta")
    row = fit.case_cdf(case)
    return float(fit.thresholds[int(np.argmax(row >= beta))])


def empirical_lower_quantile(y, beta: float) -> float:
    """Order statistic ``y_(k)`` with ``k = ceil(n * beta)``."""
    check_level(beta, "beta")
    ys = np.sort(np.asarray(y, dtype=float))
    if ys.size == 0:
        raise DomainError("quantile of an empty sample")
    b = level_fraction(beta)
    k = -(-ys.size * b.numerator // b.denominator)
    return float(ys[k - 1])


def dag_lower_quantiles(dag: OrderDag, y, beta: float) -> np.ndarray:
    """Per-case lower beta-quantiles of the IDR fit, without the full CDF.

    Classes whose quantile lies in ``(lo, hi]`` form a convex piece of the
    order. Splitting a piece at a candidate threshold ``z`` reduces to one
    maximal down-set problem with weights ``b*count(y <= z) - a*weight``
    where ``beta = a/b``; the quantile of every class in a piece is one of
    the outcomes observed within the piece.
    """
    check_level(beta, "beta")
    y = np.asarray(y, dtype=float)
    frac = level_fraction(beta)
    a, b = frac.numerator, frac.denominator
    cm = dag.class_map
    weights = np.bincount(cm, minlength=dag.n_classes)
    sub = _Subgraph(dag)
    q = np.empty(dag.n_classes)
    class_cases = np.argsort(cm, kind="stable")
    stack = [(np.arange(dag.n_classes), class_cases, -np.inf, np.inf)]
    local = np.empty(dag.n_classes, dtype=np.int64)
    while stack:
        nodes, cases, lo, hi = stack.pop()
        yv = y[cases]
        cand = np.unique(yv[(yv > lo) & (yv <= hi)])
        if cand.size == 0:
            raise InvariantError("quantile search lost its candidate thresholds")
        if cand.size == 1:
            q[nodes] = cand[0]
            continue
        z = cand[(cand.size - 1) // 2]
        local[nodes] = np.arange(nodes.size)
        lc = local[cm[cases]]
        k = np.bincount(lc[yv <= z], minlength=nodes.size)
        if b < _INT32_MAX:
            c = b * k - a * weights[nodes]
        else:
            c = np.asarray([b * int(v) - a * int(w) for v, w in zip(k, weights[nodes])], dtype=object)
        src, dst = sub.edges(nodes)
        down = max_down_set(nodes.size, src, dst, c)
        case_down = down[lc]
        if down.any():
            stack.append((nodes[down], cases[case_down], lo, z))
        if not down.all():
            stack.append((nodes[~down], cases[~case_down], z, hi))
    return q[cm]


def idr_quantiles(lower, upper, y, beta: float, kind: OrderKind = OrderKind.COMPONENTWISE,
                  max_cases: int = MAX_CASES) -> np.ndarray:
    lower, upper, y = _validate(lower, upper, y, max_cases)
    return dag_lower_quantiles(build_dag((lower, upper), kind), y, beta)
