"""
Points, L_p distances, tours and the 2-change primitive.

Distances are always evaluated unrounded in double precision. Tours are
undirected Hamiltonian cycles kept in a canonical form (vertex 0 first,
smaller neighbour of vertex 0 second) so that equal cycles compare equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidMoveError

INF = math.inf

Metric = Union[int, float]
Edge = Tuple[int, int]


def check_metric(p) -> Metric:
    """Normalize a metric selector to a positive int or ``INF``.

    Accepts ints, integral floats, ``math.inf`` and the strings
    ``"inf"``/``"INF"``.
    """
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "max"):
            return INF
        p = float(p)
    if p == INF:
        return INF
    if isinstance(p, bool) or float(p) != int(p) or int(p) < 1:
        raise ValueError(f"metric must be an integer p >= 1 or INF, got {p!r}")
    return int(p)


def metric_name(p: Metric) -> str:
    return "inf" if p == INF else str(int(p))


def lp_norm(diff, p: Metric):
    """L_p norm along the last axis of ``diff``.

    Large finite p is evaluated as ``m * (sum((|x|/m)**p))**(1/p)`` with
    ``m`` the largest absolute component, so p up to 64 cannot overflow.
    """
    a = np.abs(np.asarray(diff, dtype=float))
    if p == 1:
        return a.sum(axis=-1)
    if p == INF:
        return a.max(axis=-1)
    m = a.max(axis=-1)
    safe = np.where(m > 0, m, 1.0)
    scaled = a / np.expand_dims(safe, -1)
    r = safe * np.sum(scaled ** p, axis=-1) ** (1.0 / p)
    return np.where(m > 0, r, 0.0)


def distance(a, b, p: Metric = 2) -> float:
    """L_p distance between two points of equal dimension.

    >>> distance((0, 0), (3, 4), 2)
    5.0
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(lp_norm(a - b, check_metric(p)))


def distance_matrix(points, p: Metric = 2) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    return lp_norm(pts[:, None, :] - pts[None, :, :], check_metric(p))


@dataclass(frozen=True, eq=False)
class Instance:
    """A point set in R^d together with an L_p metric.

    Attributes:
        points: ``(n, d)`` float array, read-only.
        p: metric selector (positive int or ``INF``).
        name: free-text label.
        meta: optional string metadata carried into instance files.
    """

    points: np.ndarray
    p: Metric = 2
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-d array of shape (n, d)")
        n, d = pts.shape
        if n < 3:
            raise ValueError(f"an instance needs at least 3 points, got {n}")
        if d < 2:
            raise ValueError(f"points need dimension d >= 2, got {d}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("all coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "p", check_metric(self.p))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @cached_property
    def dist(self) -> np.ndarray:
        """Full ``(n, n)`` distance matrix (computed once)."""
        m = distance_matrix(self.points, self.p)
        m.setflags(write=False)
        return m

    def __repr__(self):
        return f"Instance(name={self.name!r}, n={self.n}, d={self.d}, p={metric_name(self.p)})"


def canonical_order(order: Sequence[int]) -> Tuple[int, ...]:
    seq = [int(v) for v in order]
    n = len(seq)
    if n < 3:
        raise ValueError("a tour needs at least 3 vertices")
    if sorted(seq) != list(range(n)):
        raise ValueError("tour order is not a permutation of 0..n-1")
    k = seq.index(0)
    seq = seq[k:] + seq[:k]
    if seq[1] > seq[-1]:
        seq[1:] = seq[:0:-1]
    return tuple(seq)


@dataclass(frozen=True)
class Tour:
    """Cyclic tour in canonical form.

    Any rotation or reflection passed to the constructor is normalized, so
    ``Tour((2, 0, 1)) == Tour((0, 1, 2))``.
    """

    order: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", canonical_order(self.order))

    def __len__(self):
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    @property
    def n(self) -> int:
        return len(self.order)

    def edges(self):
        o = self.order
        return [(o[i], o[(i + 1) % len(o)]) for i in range(len(o))]

    def edge_set(self):
        return {frozenset(e) for e in self.edges()}

    def positions(self) -> np.ndarray:
        pos = np.empty(self.n, dtype=np.int64)
        pos[list(self.order)] = np.arange(self.n)
        return pos

    def as_array(self) -> np.ndarray:
        return np.array(self.order, dtype=np.int64)


@dataclass(frozen=True)
class TwoChange:
    """Removal of edges ``{u1,u2}`` and ``{v1,v2}``.

    When the vertices appear as ``u1, u2, ..., v1, v2`` along the tour, the
    added edges are ``{u1,v1}`` and ``{u2,v2}``. For a given tour the two
    removed edges determine the result uniquely; use :func:`orient` to get
    the labels in tour order.
    """

    removed: Tuple[Edge, Edge]

    @classmethod
    def of(cls, u1, u2, v1, v2) -> "TwoChange":
        return cls(((int(u1), int(u2)), (int(v1), int(v2))))

    @property
    def vertices(self) -> Tuple[int, int, int, int]:
        (u1, u2), (v1, v2) = self.removed
        return u1, u2, v1, v2

    @property
    def added(self) -> Tuple[Edge, Edge]:
        u1, u2, v1, v2 = self.vertices
        return (u1, v1), (u2, v2)


def _locate(order: Sequence[int], pos, change: TwoChange) -> Tuple[int, int]:
    """Tour positions ``i < j`` of the two removed edges.

    Edge ``k`` is ``(order[k], order[k+1 mod n])``.
    """
    n = len(order)
    verts = change.vertices
    if len(set(verts)) != 4:
        raise InvalidMoveError(f"2-change {change.removed} does not use four distinct vertices",
                               "shared-vertex")
    idx = []
    for a, b in change.removed:
        if not (0 <= a < n and 0 <= b < n):
            raise InvalidMoveError(f"edge {{{a},{b}}} references unknown vertex", "edge-not-in-tour")
        pa, pb = int(pos[a]), int(pos[b])
        if (pa + 1) % n == pb:
            idx.append(pa)
        elif (pb + 1) % n == pa:
            idx.append(pb)
        else:
            raise InvalidMoveError(f"edge {{{a},{b}}} is not in the tour", "edge-not-in-tour")
    i, j = sorted(idx)
    return i, j


def orient(t: Tour, change: TwoChange) -> TwoChange:
    """Relabel ``change`` so its vertices read ``u1, u2, ..., v1, v2`` along ``t``."""
    o = t.order
    i, j = _locate(o, t.positions(), change)
    n = len(o)
    return TwoChange.of(o[i], o[(i + 1) % n], o[j], o[(j + 1) % n])


def tour_length(t: Tour, inst: Instance) -> float:
    if t.n != inst.n:
        raise ValueError(f"tour has {t.n} vertices but instance has {inst.n}")
    o = np.asarray(t.order)
    # left-to-right, like the compiled kernel, so lengths agree bit-for-bit
    return float(sum(inst.dist[o, np.roll(o, -1)].tolist(), 0.0))


def two_change_delta(t: Tour, change: TwoChange, inst: Instance) -> float:
    """Improvement (old length minus new length) of applying ``change`` to ``t``.

    Positive means the tour gets strictly shorter.
    """
    if t.n != inst.n:
        raise ValueError(f"tour has {t.n} vertices but instance has {inst.n}")
    u1, u2, v1, v2 = orient(t, change).vertices
    D = inst.dist
    return float(D[u1, u2] + D[v1, v2] - D[u1, v1] - D[u2, v2])


def apply_two_change(t: Tour, change: TwoChange) -> Tour:
    """Apply ``change`` by reversing the segment from ``u2`` to ``v1``.

    >>> apply_two_change(Tour((0, 1, 2, 3, 4, 5, 6)), TwoChange.of(0, 1, 4, 5)).order
    (0, 4, 3, 2, 1, 5, 6)
    """
    o = list(t.order)
    i, j = _locate(o, t.positions(), change)
    o[i + 1:j + 1] = o[i + 1:j + 1][::-1]
    return Tour(tuple(o))


def identity_tour(n: int) -> Tour:
    return Tour(tuple(range(n)))


def rotate_pi4(points, scale: float = math.sqrt(2.0)) -> np.ndarray:
    """Rotate planar points by pi/4 about the origin, then scale.

    With the default scale sqrt(2) the map is ``(x, y) -> (x - y, x + y)``
    and L_inf distances of the image equal L1 distances of the input.
    Any other scale keeps the two proportional.
    """
    pts = np.asarray(points, dtype=float)
    if scale == math.sqrt(2.0):
        return np.stack([pts[:, 0] - pts[:, 1], pts[:, 0] + pts[:, 1]], axis=1)
    c = math.cos(math.pi / 4) * scale
    s = math.sin(math.pi / 4) * scale
    return pts @ np.array([[c, -s], [s, c]]).T


def tours_from_orders(orders: Iterable[Sequence[int]]):
    return [Tour(tuple(o)) for o in orders]
