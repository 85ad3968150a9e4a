"""
Trace analysis and exact oracles.

* linked-pair decomposition of a 2-Opt trace and pair-type classification
* Held-Karp optimum and a hypercube-occupancy lower bound on OPT
* exact longest path in the 2-Opt state graph for small n
* crossing counts with exact orientation predicates
* smallest improvements over single moves or linked pairs
"""

from __future__ import annotations

import bisect
import enum
import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
from numba import njit

from .engine import RunTrace, StepRecord
from .errors import CapacityError
from .geometry import Instance, Tour, TwoChange, tour_length

HELD_KARP_MAX_N = 18
STATE_GRAPH_MAX_N = 10


class PairType(str, enum.Enum):
    TYPE0 = "0"
    TYPE1A = "1a"
    TYPE1B = "1b"
    TYPE2 = "2"
    UNLINKED = "unlinked"


def _change(s) -> TwoChange:
    if isinstance(s, StepRecord):
        return s.change
    if isinstance(s, TwoChange):
        return s
    return TwoChange.of(*s)


def _classify(c1: TwoChange, c2: TwoChange, link=None) -> PairType:
    """Type of the pair (c1, c2); both changes carry labels in tour order."""
    u1, u2, w1, w2 = c1.vertices
    added1 = [(u1, w1), (u2, w2)]
    partner1 = {u1: u2, u2: u1, w1: w2, w2: w1}  # removed-edge partners in c1
    removed2 = [frozenset(e) for e in c2.removed]
    links = [e for e in added1 if frozenset(e) in removed2]
    if link is not None:
        links = [e for e in links if frozenset(e) == frozenset(link)]
    if not links:
        return PairType.UNLINKED
    v1, v3 = links[0]
    v2, v4 = partner1[v1], partner1[v3]
    # c2 removes {v1,v3} and {v5,v6}; it adds {v1,v5} and {v3,v6}
    x1, x2, y1, y2 = c2.vertices
    adj2 = {x1: y1, y1: x1, x2: y2, y2: x2}  # added-edge partners in c2
    v5, v6 = adj2[v1], adj2[v3]
    overlap = {v2, v4} & {v5, v6}
    if len(overlap) == 0:
        return PairType.TYPE0
    if len(overlap) == 2:
        return PairType.TYPE2
    if v4 in overlap:
        v1, v3, v2, v4, v5, v6 = v3, v1, v4, v2, v6, v5
    return PairType.TYPE1A if v2 == v6 else PairType.TYPE1B


def classify_linked_pair(s1, s2) -> PairType:
    """Type of a pair of 2-changes linked by an edge added in ``s1`` and removed in ``s2``.

    Arguments are StepRecords, TwoChanges or ``(u1, u2, v1, v2)`` tuples
    whose labels are in tour order (as recorded by the engine).
    """
    return _classify(_change(s1), _change(s2))


@dataclass
class PairReport:
    t: int
    n: int
    pairs_all: int = 0
    pairs_disjoint: int = 0
    pairs_type01_disjoint: int = 0
    histogram: Dict[str, int] = field(default_factory=dict)
    disjoint_pairs: List[Tuple[int, int, PairType]] = field(default_factory=list, repr=False)
    type01_pairs: List[Tuple[int, int, PairType]] = field(default_factory=list, repr=False)

    @property
    def bound_disjoint(self) -> int:
        return max(0, math.ceil((2 * self.t - self.n) / 7))

    @property
    def bound_type01(self) -> int:
        return max(0, math.ceil(self.t / 7 - 3 * self.n / 28))


def _build_pairs(edges: np.ndarray, exclude_type2: bool):
    """List L: pair each step with the first later step removing each edge it adds."""
    removals = defaultdict(list)
    for k, (u1, u2, v1, v2) in enumerate(edges.tolist()):
        removals[frozenset((u1, u2))].append(k)
        removals[frozenset((v1, v2))].append(k)
    changes = [TwoChange.of(*row) for row in edges.tolist()]
    pairs = []
    for i, c in enumerate(changes):
        for e in c.added:
            lst = removals.get(frozenset(e))
            if not lst:
                continue
            pos = bisect.bisect_right(lst, i)
            if pos == len(lst):
                continue
            j = lst[pos]
            kind = _classify(c, changes[j], link=e)
            if exclude_type2 and kind is PairType.TYPE2:
                continue
            pairs.append((i, j, kind))
    return pairs


def _greedy_disjoint(pairs):
    used = set()
    out = []
    for i, j, kind in pairs:
        if i in used or j in used:
            continue
        used.update((i, j))
        out.append((i, j, kind))
    return out


def linked_pair_decomposition(trace: RunTrace, exclude_type2: bool = False) -> PairReport:
    """Linked pairs of a trace and a greedily chosen disjoint subset.

    ``pairs_all`` and ``histogram`` describe the list built with or without
    type-2 pairs according to ``exclude_type2``; ``pairs_disjoint`` always
    comes from the inclusive list and ``pairs_type01_disjoint`` from the list
    without type-2 pairs.
    """
    edges = np.asarray(trace.edges).reshape(-1, 4)
    n = trace.instance.n
    inclusive = _build_pairs(edges, exclude_type2=False)
    exclusive = [x for x in inclusive if x[2] is not PairType.TYPE2]
    chosen = exclusive if exclude_type2 else inclusive
    disjoint = _greedy_disjoint(inclusive)
    type01 = _greedy_disjoint(exclusive)
    hist = Counter(k.value for _, _, k in chosen)
    return PairReport(len(edges), n, len(chosen), len(disjoint), len(type01), dict(hist),
                      disjoint, type01)


# Exact optimum ------------------------------------------------------------------

def held_karp_opt(inst: Instance) -> Tuple[float, Tour]:
    """Exact optimal tour by dynamic programming over vertex subsets."""
    n = inst.n
    if n > HELD_KARP_MAX_N:
        raise CapacityError(f"Held-Karp is limited to n <= {HELD_KARP_MAX_N}, got {n}")
    D = np.asarray(inst.dist)
    m = n - 1  # vertices 1..n-1 are bits 0..m-1
    full = (1 << m) - 1
    W = D[1:, 1:]
    dp = np.full((1 << m, m), np.inf)
    parent = np.full((1 << m, m), -1, dtype=np.int8)
    for k in range(m):
        dp[1 << k, k] = D[0, k + 1]
    masks = np.arange(1 << m)
    pop = np.array([bin(x).count("1") for x in range(1 << m)])
    bits = (masks[:, None] >> np.arange(m)) & 1
    for size in range(1, m):
        layer = masks[pop == size]
        cand = dp[layer][:, :, None] + W[None, :, :]  # [mask, last j, next k]
        best_j = np.argmin(cand, axis=1)
        best = np.take_along_axis(cand, best_j[:, None, :], axis=1)[:, 0, :]
        for k in range(m):
            rows = bits[layer, k] == 0
            tgt = layer[rows] | (1 << k)
            dp[tgt, k] = best[rows, k]
            parent[tgt, k] = best_j[rows, k]
    closing = dp[full] + D[1:, 0]
    last = int(np.argmin(closing))
    order = []
    mask = full
    while last >= 0:
        order.append(last + 1)
        prev = int(parent[mask, last])
        mask ^= 1 << last
        last = prev
    tour = Tour(tuple([0] + order[::-1]))
    return tour_length(tour, inst), tour


def opt_lower_bound(inst: Instance, phi: float) -> float:
    """Lower bound on OPT from occupied cells of a grid with about n*phi cells.

    Uses the side ``l`` of the largest grid with ``l**d <= n*phi`` cells.
    Returns ``ceil(X / 3**d) / l`` for ``X > 3**d`` occupied cells, else 0.
    """
    if phi < 1:
        raise ValueError(f"phi must be >= 1, got {phi}")
    pts = np.asarray(inst.points)
    if np.any(pts < 0) or np.any(pts > 1):
        raise ValueError("opt_lower_bound needs all points in [0,1]^d")
    n, d = pts.shape
    target = n * phi
    ell = max(1, int(round(target ** (1.0 / d))))
    while ell ** d > target:
        ell -= 1
    while (ell + 1) ** d <= target:
        ell += 1
    cells = np.minimum(np.floor(pts * ell).astype(np.int64), ell - 1)
    X = len({tuple(c) for c in cells.tolist()})
    if X <= 3 ** d:
        return 0.0
    return math.ceil(X / 3 ** d) / ell


# State graph ---------------------------------------------------------------------

def all_canonical_tours(n: int) -> np.ndarray:
    """Every canonical tour on n vertices, as rows of an ``((n-1)!/2, n)`` array."""
    rows = [(0,) + p for p in itertools.permutations(range(1, n)) if p[0] < p[-1]]
    return np.array(rows, dtype=np.int64)


def _codes(tours: np.ndarray, n: int) -> np.ndarray:
    weights = n ** np.arange(tours.shape[1] - 1, -1, -1, dtype=np.int64)
    return tours @ weights


@njit(cache=True)
def _longest_from(order, indptr, targets, n_nodes):
    best = np.zeros(n_nodes, dtype=np.int64)
    nxt = np.full(n_nodes, -1, dtype=np.int64)
    for v in order:
        for e in range(indptr[v], indptr[v + 1]):
            w = targets[e]
            if best[w] + 1 > best[v]:
                best[v] = best[w] + 1
                nxt[v] = w
    return best, nxt


def state_graph_longest_path(inst: Instance, eps: float = 0.0):
    """Longest path in the 2-Opt state graph.

    Nodes are canonical tours, arcs are 2-changes improving by more than
    ``eps`` (the same delta formula as the engine). Returns
    ``(steps, [Tour, ...])`` with the witness path of ``steps + 1`` tours.
    """
    n = inst.n
    if n > STATE_GRAPH_MAX_N:
        raise CapacityError(f"state graph enumeration is limited to n <= {STATE_GRAPH_MAX_N}, got {n}")
    D = np.asarray(inst.dist)
    tours = all_canonical_tours(n)
    T = tours.shape[0]
    codes = _codes(tours, n)
    srt = np.argsort(codes)
    codes_sorted = codes[srt]
    src, dst = [], []
    for i in range(n - 2):
        for j in range(i + 2, (n - 1 if i > 0 else n - 2) + 1):
            a, b = tours[:, i], tours[:, i + 1]
            c, d = tours[:, j], tours[:, (j + 1) % n]
            delta = D[a, b] + D[c, d] - D[a, c] - D[b, d]
            hit = np.flatnonzero(delta > eps)
            if hit.size == 0:
                continue
            new = tours[hit].copy()
            new[:, i + 1:j + 1] = new[:, i + 1:j + 1][:, ::-1]
            flip = new[:, 1] > new[:, n - 1]
            new[flip, 1:] = new[flip, 1:][:, ::-1]
            idx = srt[np.searchsorted(codes_sorted, _codes(new, n))]
            src.append(hit)
            dst.append(idx)
    src = np.concatenate(src) if src else np.zeros(0, dtype=np.int64)
    dst = np.concatenate(dst) if dst else np.zeros(0, dtype=np.int64)
    by_src = np.argsort(src, kind="stable")
    targets = dst[by_src]
    indptr = np.zeros(T + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr)
    order = _topological_sinks_first(T, src, dst)
    best, nxt = _longest_from(order, indptr, targets, T)
    start = int(np.argmax(best))
    path = [start]
    while nxt[path[-1]] >= 0:
        path.append(int(nxt[path[-1]]))
    return int(best[start]), [Tour(tuple(tours[v])) for v in path]


def _topological_sinks_first(T, src, dst):
    """Reverse topological order (every arc's head before its tail)."""
    outdeg = np.bincount(src, minlength=T)
    by_dst = np.argsort(dst, kind="stable")
    preds = src[by_dst]
    ptr = np.zeros(T + 1, dtype=np.int64)
    np.add.at(ptr, dst + 1, 1)
    ptr = np.cumsum(ptr)
    order = _kahn(outdeg.astype(np.int64), ptr, preds)
    if order.shape[0] != T:
        raise RuntimeError("improvement graph has a cycle; rounding noise on exact ties, retry with eps > 0")
    return order


@njit(cache=True)
def _kahn(outdeg, ptr, preds):
    T = outdeg.shape[0]
    order = np.empty(T, dtype=np.int64)
    head = 0
    tail = 0
    for v in range(T):
        if outdeg[v] == 0:
            order[tail] = v
            tail += 1
    while head < tail:
        w = order[head]
        head += 1
        for e in range(ptr[w], ptr[w + 1]):
            v = preds[e]
            outdeg[v] -= 1
            if outdeg[v] == 0:
                order[tail] = v
                tail += 1
    return order[:tail]


# Crossings -----------------------------------------------------------------------

_EPS = np.finfo(float).eps
_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS


def _orient_exact(p, q, r) -> int:
    P = [Fraction(float(v)) for v in (*p, *q, *r)]
    det = (P[2] - P[0]) * (P[5] - P[1]) - (P[3] - P[1]) * (P[4] - P[0])
    return (det > 0) - (det < 0)


# second-order coefficients of det over (x_i, y_i, x_j, y_j, x_k, y_k)
_PAIR_COEF = {(0, 3): 1, (0, 5): -1, (1, 2): -1, (1, 4): 1, (2, 5): 1, (3, 4): -1}


def _orient_sos(pts, i, j, k) -> int:
    """Orientation sign of (i, j, k) with simulated perturbation, never 0."""
    idx = [i, j, k]
    perm_sign = 1
    # sort indices, tracking permutation parity
    for a in range(3):
        for b in range(2 - a):
            if idx[b] > idx[b + 1]:
                idx[b], idx[b + 1] = idx[b + 1], idx[b]
                perm_sign = -perm_sign
    s = _orient_exact(pts[idx[0]], pts[idx[1]], pts[idx[2]])
    if s:
        return s * perm_sign
    v = [Fraction(float(c)) for m in idx for c in pts[m]]
    first = [
        v[3] - v[5], v[4] - v[2], v[5] - v[1], v[0] - v[4], v[1] - v[3], v[2] - v[0],
    ]
    # perturbation of variable m has magnitude eps**(2**m); walk monomials by size
    for mask in range(1, 64):
        ms = [m for m in range(6) if mask >> m & 1]
        if len(ms) == 1:
            c = first[ms[0]]
        elif len(ms) == 2:
            c = _PAIR_COEF.get(tuple(ms), 0)
        else:
            continue
        if c:
            return (1 if c > 0 else -1) * perm_sign
    raise AssertionError("unreachable: det has a nonzero second-order term")


def _orient_batch(pts, I, J, K):
    a, b, c = pts[I], pts[J], pts[K]
    l = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
    r = (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    det = l - r
    bound = _ERRBOUND * (np.abs(l) + np.abs(r))
    out = np.sign(det).astype(np.int64)
    unsure = np.flatnonzero(~(np.abs(det) > bound))
    for u in unsure:
        out[u] = _orient_sos(pts, int(I[u]), int(J[u]), int(K[u]))
    return out


def crossing_count(t: Tour, inst: Instance) -> int:
    """Number of pairs of tour edges whose open segments properly cross."""
    if inst.d != 2:
        raise ValueError(f"crossing_count needs d = 2, got d = {inst.d}")
    pts = np.asarray(inst.points)
    o = np.asarray(t.order)
    n = len(o)
    ii, jj = np.triu_indices(n, 2)
    keep = ~((ii == 0) & (jj == n - 1))
    ii, jj = ii[keep], jj[keep]
    p, q = o[ii], o[(ii + 1) % n]
    r, s = o[jj], o[(jj + 1) % n]
    o1 = _orient_batch(pts, p, q, r)
    o2 = _orient_batch(pts, p, q, s)
    o3 = _orient_batch(pts, r, s, p)
    o4 = _orient_batch(pts, r, s, q)
    return int(np.sum((o1 != o2) & (o3 != o4)))


# Smallest improvements --------------------------------------------------------------

class Over(str, enum.Enum):
    SINGLE = "single"
    LINKED_PAIRS_01 = "linked_pairs_01"


@njit(cache=True)
def _min_positive_quadruple(D):
    n = D.shape[0]
    best = np.inf
    for a in range(n):
        for b in range(n):
            if b == a:
                continue
            dab = D[a, b]
            for c in range(n):
                if c == a or c == b:
                    continue
                dac = D[a, c]
                for d in range(n):
                    if d == a or d == b or d == c:
                        continue
                    delta = dab + D[c, d] - dac - D[b, d]
                    if delta > 0 and delta < best:
                        best = delta
    return best


def min_improvement(inst: Instance, over=Over.SINGLE, trace: Optional[RunTrace] = None) -> float:
    """Smallest positive improvement.

    SINGLE without a trace ranges over every ordered vertex quadruple
    (v1, v2, v3, v4) with improvement ``d(v1,v2) + d(v3,v4) - d(v1,v3) - d(v2,v4)``;
    with a trace it ranges over the 2-changes the trace made.
    LINKED_PAIRS_01 takes the minimum of ``delta1 + delta2`` over the
    disjoint type-0/1 pairs of ``trace``. Returns ``inf`` if nothing improves.

    Coincident points make some improvements exactly 0 in real arithmetic
    but tiny positive in floating point; such values are reported as is.
    """
    over = Over(over)
    if over is Over.SINGLE:
        if trace is not None:
            pos = trace.deltas[trace.deltas > 0]
            return float(pos.min()) if pos.size else math.inf
        return float(_min_positive_quadruple(np.asarray(inst.dist)))
    if trace is None:
        raise ValueError("LINKED_PAIRS_01 needs a trace")
    rep = linked_pair_decomposition(trace, exclude_type2=True)
    if not rep.type01_pairs:
        return math.inf
    d = trace.deltas
    return float(min(d[i] + d[j] for i, j, _ in rep.type01_pairs))
