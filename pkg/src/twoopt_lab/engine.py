"""
2-Opt local search with pluggable pivot rules and full step traces.

A run keeps the tour in canonical form after every step, so the
lexicographic scan order of FIRST_IMPROVEMENT is well defined and a trace
can be replayed bit-identically with :func:`geometry.apply_two_change`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np

from . import _kernels as K
from .errors import ScriptViolation
from .geometry import Instance, Tour, TwoChange, apply_two_change, tour_length

MAX_STEPS = 2**31 - 1


class PivotKind(str, enum.Enum):
    FIRST_IMPROVEMENT = "first"
    BEST_IMPROVEMENT = "best"
    RANDOM_IMPROVEMENT = "random"
    SCRIPTED = "scripted"


class Termination(str, enum.Enum):
    LOCAL_OPT = "local_opt"
    STEP_LIMIT = "step_limit"
    SCRIPT_END = "script_end"


@dataclass(frozen=True)
class PivotRule:
    """Which improving move to apply next.

    ``seed`` is required for RANDOM_IMPROVEMENT and ``script`` (anything with
    an ``(m, 4)`` int array attribute ``moves``) for SCRIPTED.
    """

    kind: PivotKind
    seed: Optional[int] = None
    script: object = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PivotKind(self.kind))
        if self.kind is PivotKind.RANDOM_IMPROVEMENT and self.seed is None:
            raise ValueError("RANDOM_IMPROVEMENT needs a seed")
        if self.kind is PivotKind.SCRIPTED and self.script is None:
            raise ValueError("SCRIPTED needs a script")

    @classmethod
    def first(cls):
        return cls(PivotKind.FIRST_IMPROVEMENT)

    @classmethod
    def best(cls):
        return cls(PivotKind.BEST_IMPROVEMENT)

    @classmethod
    def random(cls, seed: int):
        return cls(PivotKind.RANDOM_IMPROVEMENT, seed=seed)

    @classmethod
    def scripted(cls, script):
        return cls(PivotKind.SCRIPTED, script=script)


@dataclass(frozen=True)
class StepRecord:
    index: int
    change: TwoChange
    delta: float
    length_after: float


@dataclass(frozen=True, eq=False)
class RunTrace:
    """Complete record of one engine run.

    Step data is kept columnar: ``edges[k] = (u1, u2, v1, v2)`` are the
    removed edges of step ``k`` in tour order, so the added edges are
    ``{u1, v1}`` and ``{u2, v2}``.
    """

    instance: Instance
    initial_tour: Tour
    final_tour: Tour
    terminated: Termination
    edges: np.ndarray
    deltas: np.ndarray
    lengths: np.ndarray
    initial_length: float

    def __len__(self):
        return int(self.deltas.shape[0])

    @property
    def step_count(self) -> int:
        return len(self)

    @property
    def final_length(self) -> float:
        return float(self.lengths[-1]) if len(self) else self.initial_length

    @cached_property
    def steps(self) -> Tuple[StepRecord, ...]:
        return tuple(
            StepRecord(k, TwoChange.of(*self.edges[k]), float(self.deltas[k]), float(self.lengths[k]))
            for k in range(len(self))
        )

    def replay(self) -> Tour:
        """Re-apply every step to ``initial_tour`` with the pure-Python primitive."""
        t = self.initial_tour
        for row in self.edges:
            t = apply_two_change(t, TwoChange.of(*row))
        return t


def default_step_limit(n: int, phi: Optional[float] = None) -> int:
    if phi is None:
        return MAX_STEPS
    return int(min(MAX_STEPS, 10 * n**4 * max(phi, 1.0)))


def _check(t: Tour, inst: Instance):
    if t.n != inst.n:
        raise ValueError(f"tour has {t.n} vertices but instance has {inst.n}")


def improving_moves(t: Tour, inst: Instance, eps: float = 0.0) -> List[Tuple[TwoChange, float]]:
    """All 2-changes of ``t`` improving by more than ``eps``, in scan order."""
    _check(t, inst)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    n = inst.n
    arr = t.as_array()
    cap = max(n * (n - 3) // 2, 1)
    oi = np.empty(cap, dtype=np.int64)
    oj = np.empty(cap, dtype=np.int64)
    od = np.empty(cap, dtype=float)
    k = K.all_improving(arr, inst.dist, float(eps), oi, oj, od)
    o = t.order
    return [
        (TwoChange.of(o[i], o[i + 1], o[j], o[(j + 1) % n]), float(d))
        for i, j, d in zip(oi[:k], oj[:k], od[:k])
    ]


def is_local_optimum(t: Tour, inst: Instance) -> bool:
    _check(t, inst)
    i, _, _ = K.first_improving(t.as_array(), inst.dist, 0.0)
    return i < 0


def replay_moves(inst: Instance, start: Tour, moves: np.ndarray, eps: float = 0.0):
    """Low-level scripted replay used by SCRIPTED runs and the gadget verifier.

    Returns ``(tour_array, edges, deltas, lengths, applied, code)``; arrays are
    sized to ``len(moves)`` and only the first ``applied`` rows are valid
    (``deltas[applied]`` also holds the failing delta for NOT_IMPROVING).
    """
    _check(start, inst)
    moves = np.ascontiguousarray(moves, dtype=np.int64).reshape(-1, 4)
    m = moves.shape[0]
    t = start.as_array()
    pos = start.positions()
    edges = np.zeros((m, 4), dtype=np.int64)
    deltas = np.full(m, np.nan)
    lengths = np.zeros(m)
    applied, code = K.replay_script(t, pos, inst.dist, moves, float(eps), edges, deltas, lengths)
    return t, edges, deltas, lengths, int(applied), int(code)


_FAILURE_TEXT = {
    K.SHARED_VERTEX: "removed edges share a vertex",
    K.EDGE_MISSING: "removed edge not in current tour",
    K.NOT_IMPROVING: "move is not strictly improving",
}


def run(inst: Instance, start: Tour, rule: PivotRule, step_limit: Optional[int] = None,
        eps: float = 0.0) -> RunTrace:
    """Run 2-Opt from ``start`` until a local optimum, the step limit or the script end.

    Raises:
        ScriptViolation: a SCRIPTED move is inapplicable or not improving;
            ``step_index`` is the 0-based index of that move.
    """
    _check(start, inst)
    if step_limit is None:
        step_limit = default_step_limit(inst.n)
    if step_limit < 0:
        raise ValueError("step_limit must be >= 0")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    init_len = tour_length(start, inst)

    if rule.kind is PivotKind.SCRIPTED:
        moves = np.asarray(rule.script.moves, dtype=np.int64).reshape(-1, 4)
        limited = moves.shape[0] > step_limit
        t, edges, deltas, lengths, applied, code = replay_moves(inst, start, moves[:step_limit], eps)
        if code != K.OK:
            d = deltas[applied]
            raise ScriptViolation(f"scripted move {applied}: {_FAILURE_TEXT[code]}", applied,
                                  None if np.isnan(d) else float(d))
        term = Termination.STEP_LIMIT if limited else Termination.SCRIPT_END
        return RunTrace(inst, start, Tour(tuple(t)), term, edges, deltas, lengths, init_len)

    D = inst.dist
    t = start.as_array()
    if rule.kind is PivotKind.RANDOM_IMPROVEMENT:
        edges, deltas, lengths, at_opt = _run_random(t, D, eps, step_limit, rule.seed)
    else:
        mode = K.MODE_FIRST if rule.kind is PivotKind.FIRST_IMPROVEMENT else K.MODE_BEST
        edges, deltas, lengths, at_opt = _run_greedy(t, D, eps, mode, step_limit)
    term = Termination.LOCAL_OPT if at_opt else Termination.STEP_LIMIT
    return RunTrace(inst, start, Tour(tuple(t)), term, edges, deltas, lengths, init_len)


def _run_greedy(t, D, eps, mode, step_limit, chunk=4096):
    parts = []
    remaining = step_limit
    at_opt = False
    while True:
        size = min(chunk, remaining)
        e = np.empty((size, 4), dtype=np.int64)
        d = np.empty(size)
        ln = np.empty(size)
        done, at_opt = K.run_greedy(t, D, float(eps), mode, size, e, d, ln)
        parts.append((e[:done], d[:done], ln[:done]))
        remaining -= done
        if at_opt or remaining == 0:
            break
        chunk = min(chunk * 2, 1 << 20)
    return (np.concatenate([p[0] for p in parts]).reshape(-1, 4),
            np.concatenate([p[1] for p in parts]),
            np.concatenate([p[2] for p in parts]),
            bool(at_opt))


def _run_random(t, D, eps, step_limit, seed):
    n = t.shape[0]
    rng = np.random.default_rng(seed)
    cap = max(n * (n - 3) // 2, 1)
    oi = np.empty(cap, dtype=np.int64)
    oj = np.empty(cap, dtype=np.int64)
    od = np.empty(cap)
    edges, deltas, lengths = [], [], []
    at_opt = False
    while len(deltas) < step_limit:
        k = K.all_improving(t, D, float(eps), oi, oj, od)
        if k == 0:
            at_opt = True
            break
        c = int(rng.integers(k))
        i, j = int(oi[c]), int(oj[c])
        edges.append((t[i], t[i + 1], t[j], t[(j + 1) % n]))
        deltas.append(od[c])
        K.apply_move(t, i, j)
        lengths.append(K.tour_length(t, D))
    else:
        at_opt = K.first_improving(t, D, float(eps))[0] < 0
    return (np.array(edges, dtype=np.int64).reshape(-1, 4), np.array(deltas, dtype=float),
            np.array(lengths, dtype=float), at_opt)
