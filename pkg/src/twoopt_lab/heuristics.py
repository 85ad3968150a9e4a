"""Tour construction: insertion heuristics and random tours."""

from __future__ import annotations

import enum
from typing import Optional

import numpy as np

from .geometry import Instance, Tour


class InsertionPolicy(str, enum.Enum):
    NEAREST = "nearest"
    CHEAPEST = "cheapest"
    RANDOM_ORDER = "random_order"


def _closest_pair(D):
    iu, ju = np.triu_indices(D.shape[0], 1)
    k = int(np.argmin(D[iu, ju]))
    return int(iu[k]), int(ju[k])


def insertion_tour(inst: Instance, policy=InsertionPolicy.NEAREST, seed: Optional[int] = None) -> Tour:
    """Build a tour by repeatedly inserting a vertex where it adds the least length.

    The subtour starts from the two mutually closest vertices. NEAREST picks
    the outside vertex closest to the subtour, CHEAPEST the vertex whose best
    insertion is cheapest, RANDOM_ORDER a seeded random order. Ties go to the
    lowest vertex index and then to the earliest subtour position.
    """
    policy = InsertionPolicy(policy)
    D = inst.dist
    n = inst.n
    a, b = _closest_pair(D)
    tour = [a, b]
    outside = np.ones(n, dtype=bool)
    outside[[a, b]] = False
    if policy is InsertionPolicy.RANDOM_ORDER:
        rest = np.flatnonzero(outside)
        order = list(np.random.default_rng(seed).permutation(rest))
    near = np.minimum(D[a], D[b])

    while len(tour) < n:
        t = np.asarray(tour)
        nxt = np.roll(t, -1)
        if policy is InsertionPolicy.RANDOM_ORDER:
            v = int(order.pop(0))
        elif policy is InsertionPolicy.NEAREST:
            cand = np.where(outside, near, np.inf)
            v = int(np.argmin(cand))
        else:
            out_idx = np.flatnonzero(outside)
            cost = D[t][:, out_idx] + D[nxt][:, out_idx] - D[t, nxt][:, None]
            best = cost.min(axis=0)
            v = int(out_idx[int(np.argmin(best))])
        cost_v = D[t, v] + D[v, nxt] - D[t, nxt]
        k = int(np.argmin(cost_v))
        tour.insert(k + 1, v)
        outside[v] = False
        near = np.minimum(near, D[v])
    return Tour(tuple(tour))


def random_tour(inst: Instance, seed: int) -> Tour:
    perm = np.random.default_rng(seed).permutation(inst.n)
    return Tour(tuple(int(v) for v in perm))
