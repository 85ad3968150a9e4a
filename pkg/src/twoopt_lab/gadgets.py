"""
Exponential-length 2-Opt instances built from 8-point gadgets.

Every gadget has two blocks of four points A, B, C, D. A block is *short*
when visited A B C D and *long* when visited A C B D. Blocks are laid out
consecutively in the tour (D of one block joined to A of the next, the
last D wrapping to the first A) and never change their order.

Three families are provided:

* ``euclidean``: g gadgets G_0..G_{g-1}, 8g points, 2^(g+3) - 14 moves.
* ``manhattan``: n propagation/reset pairs P_0 R_0 ... P_{n-1} R_{n-1},
  16n points, 2^(n+4) - 22 moves under L1.
* ``lp``: the same topology with coordinates that work for every
  L_p with p >= 3 and for L_inf.

Scripts address moves by the vertex labels of the two removed edges, so
they stay valid whatever orientation the canonical tour takes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .engine import replay_moves
from .geometry import INF, Instance, Metric, Tour, check_metric, distance, metric_name
from . import _kernels as K

MARGIN_GUARD = 1e-9

# base gadget coordinates, one 4-point block each (A, B, C, D)
EUCLID_BLOCK = ((0.0, 0.0), (1.0, 0.0), (-0.1, 1.4), (-1.1, 4.8))

MANHATTAN_R = ((0.0, 1.0), (0.0, 0.0), (-0.7, 0.1), (-1.2, 0.08))
MANHATTAN_P1 = ((-2.0, 1.8), (-3.3, 2.8), (-1.3, 1.4), (1.5, 0.9))
MANHATTAN_P2 = ((-0.7, 1.6), (-1.5, 1.2), (1.9, -1.5), (-0.8, -1.1))

LP_R = ((0.0, 1.0), (0.0, 0.0), (3.5, 3.7), (7.8, -3.2))
LP_P1 = ((-2.5, -2.4), (-4.7, -7.3), (-8.6, -4.6), (3.7, 9.8))
LP_P2 = ((3.2, 2.0), (7.2, 7.2), (-6.5, -1.6), (-1.5, -7.1))


def euclid_step(xy):
    """Place gadget i from gadget i+1: rotate by 3*pi/2, scale by 3, shift."""
    x, y = xy[..., 0], xy[..., 1]
    return np.stack([3.0 * y - 1.2, -3.0 * x + 0.1], axis=-1)


def manhattan_step(xy):
    return 7.7 * np.asarray(xy) + np.array([1.93, 0.3])


def lp_step(xy):
    return 7.8 * -np.asarray(xy) + np.array([7.2, 5.3])


class FamilyKind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"
    LP = "lp"


@dataclass(frozen=True)
class GadgetFamily:
    """A lower-bound family and its size.

    ``size`` is the number of gadgets g (euclidean) or of propagation/reset
    pairs n (manhattan, lp).
    """

    kind: FamilyKind
    size: int
    p: Metric = 2

    def __post_init__(self):
        kind = FamilyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if int(self.size) < 1:
            raise ValueError(f"family size must be >= 1, got {self.size}")
        object.__setattr__(self, "size", int(self.size))
        if kind is FamilyKind.EUCLIDEAN:
            object.__setattr__(self, "p", 2)
        elif kind is FamilyKind.MANHATTAN:
            object.__setattr__(self, "p", 1)
        else:
            p = check_metric(self.p)
            if p != INF and p < 3:
                raise ValueError("the lp family needs p >= 3 or INF; use the euclidean/manhattan families")
            object.__setattr__(self, "p", p)

    @property
    def n_points(self) -> int:
        return 8 * self.size if self.kind is FamilyKind.EUCLIDEAN else 16 * self.size

    @property
    def n_blocks(self) -> int:
        return self.n_points // 4

    @property
    def expected_count(self) -> int:
        if self.kind is FamilyKind.EUCLIDEAN:
            return 2 ** (self.size + 3) - 14
        return 2 ** (self.size + 4) - 22


@dataclass(frozen=True, eq=False)
class GadgetScript:
    """Ordered label-addressed 2-changes.

    ``moves[k] = (u1, u2, v1, v2)``: remove ``{u1,u2}`` and ``{v1,v2}``.
    """

    moves: np.ndarray
    expected_count: int
    labels: Tuple[str, ...] = ()

    def __len__(self):
        return int(self.moves.shape[0])


@dataclass
class VerificationReport:
    steps_checked: int
    min_margin: float
    max_margin: float
    ok: bool
    first_failure: Optional[int] = None
    reason: str = ""
    deltas: np.ndarray = field(default=None, repr=False)


class Margin(NamedTuple):
    name: str
    value: float


# Block helpers -------------------------------------------------------------

def _block(b: int) -> Tuple[int, int, int, int]:
    """Vertex ids (A, B, C, D) of the b-th block in tour order."""
    return 4 * b, 4 * b + 1, 4 * b + 2, 4 * b + 3


def flip(b: int):
    """Single 2-change turning block b from long (ACBD) to short (ABCD)."""
    a, bb, c, d = _block(b)
    return [(a, c, bb, d)]


def seven_step(x: int, y1: int, y2: int):
    """Block x goes long -> short while blocks y1, y2 go short -> long.

    Seven moves, each given by its two removed edges.
    """
    ax, bx, cx, dx = _block(x)
    a1, b1, c1, d1 = _block(y1)
    a2, b2, c2, d2 = _block(y2)
    return [
        (ax, cx, c2, d2),
        (b2, a2, dx, bx),
        (b2, dx, c1, d1),
        (b1, a1, cx, d2),
        (ax, c2, bx, a2),
        (c1, b2, a1, d2),
        (cx, b1, dx, d1),
    ]


def _as_moves(seq) -> np.ndarray:
    return np.asarray(seq, dtype=np.int64).reshape(-1, 4)


def _euclid_moves(g: int) -> np.ndarray:
    # gadget i owns blocks 2i, 2i+1; sub-scripts repeat verbatim so build bottom-up
    sub = _as_moves(flip(2 * (g - 1)) + flip(2 * (g - 1) + 1))
    for i in range(g - 2, -1, -1):
        b1, b2 = 2 * i, 2 * i + 1
        n1, n2 = 2 * i + 2, 2 * i + 3
        sub = np.concatenate([_as_moves(seven_step(b1, n1, n2)), sub,
                              _as_moves(seven_step(b2, n1, n2)), sub])
    return sub


def _pair_moves(n: int) -> np.ndarray:
    # pair i: P_i blocks 4i, 4i+1 ; R_i blocks 4i+2, 4i+3
    last = n - 1
    r_sub = _as_moves(flip(4 * last + 2) + flip(4 * last + 3))
    p_sub = None
    for i in range(last, -1, -1):
        p1, p2, r1, r2 = 4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3
        if i < last:
            q1, q2 = 4 * i + 4, 4 * i + 5
            r_sub = np.concatenate([_as_moves(seven_step(r1, q1, q2)), p_sub,
                                    _as_moves(seven_step(r2, q1, q2)), p_sub])
        p_sub = np.concatenate([_as_moves(flip(p1) + seven_step(p2, r1, r2)), r_sub])
    return p_sub


def _initial_tour(states: List[str]) -> Tour:
    order = []
    for b, s in enumerate(states):
        a, bb, c, d = _block(b)
        order += [a, bb, c, d] if s == "S" else [a, c, bb, d]
    return Tour(tuple(order))


def _jitter(points, jitter, seed):
    if not jitter:
        return points
    amp = 1e-7 if jitter is True else float(jitter)
    rng = np.random.default_rng(seed)
    return points + rng.uniform(-amp, amp, size=points.shape)


def _labels(family: GadgetFamily) -> Tuple[str, ...]:
    out = []
    for b in range(family.n_blocks):
        if family.kind is FamilyKind.EUCLIDEAN:
            tag = f"G{b // 2}.{b % 2 + 1}"
        else:
            pair, r = divmod(b, 4)
            tag = f"{'P' if r < 2 else 'R'}{pair}.{r % 2 + 1}"
        out += [f"{tag}.{x}" for x in "ABCD"]
    return tuple(out)


def gadget_points(family: GadgetFamily) -> np.ndarray:
    """Coordinates of all ``family.n_points`` points, block by block."""
    if family.kind is FamilyKind.EUCLIDEAN:
        unit = np.array(EUCLID_BLOCK * 2)
        step = euclid_step
    elif family.kind is FamilyKind.MANHATTAN:
        unit = np.array(MANHATTAN_P1 + MANHATTAN_P2 + MANHATTAN_R + MANHATTAN_R)
        step = manhattan_step
    else:
        unit = np.array(LP_P1 + LP_P2 + LP_R + LP_R)
        step = lp_step
    levels = [unit]
    for _ in range(family.size - 1):
        levels.append(step(levels[-1]))
    # the last gadget (pair) carries the base coordinates
    return np.concatenate(levels[::-1], axis=0)


def build_family(family: GadgetFamily, jitter=False, seed: int = 0):
    """Instance, initial tour and certified script for ``family``.

    ``jitter=True`` moves every coordinate by at most 1e-7 so that no two
    points coincide; a float sets a different amplitude.
    """
    pts = _jitter(gadget_points(family), jitter, seed)
    if family.kind is FamilyKind.EUCLIDEAN:
        states = ["L", "L"] + ["S"] * (family.n_blocks - 2)
        moves = _euclid_moves(family.size)
    else:
        states = ["L", "L"] + ["S"] * (family.n_blocks - 2)
        moves = _pair_moves(family.size)
    name = f"{family.kind.value}-{family.size}"
    if family.kind is FamilyKind.LP:
        name += f"-p{metric_name(family.p)}"
    inst = Instance(pts, family.p, name, meta={"model": "gadget", "family": family.kind.value,
                                               "size": str(family.size)})
    script = GadgetScript(moves, family.expected_count, _labels(family))
    return inst, _initial_tour(states), script


def build_euclidean_family(g: int, jitter=False, seed: int = 0):
    return build_family(GadgetFamily(FamilyKind.EUCLIDEAN, g), jitter, seed)


def build_manhattan_family(n: int, jitter=False, seed: int = 0):
    return build_family(GadgetFamily(FamilyKind.MANHATTAN, n), jitter, seed)


def build_lp_family(n: int, p: Metric, jitter=False, seed: int = 0):
    return build_family(GadgetFamily(FamilyKind.LP, n, p), jitter, seed)


def verify_script(inst: Instance, start: Tour, script: GadgetScript) -> VerificationReport:
    """Replay ``script`` from ``start`` and report margins.

    ``ok`` holds when every move applies, improves by at least
    ``MARGIN_GUARD`` and the number of moves equals ``script.expected_count``.
    Failures are reported, never raised.
    """
    moves = np.asarray(script.moves, dtype=np.int64).reshape(-1, 4)
    try:
        _, _, deltas, _, applied, code = replay_moves(inst, start, moves)
    except ValueError as exc:
        return VerificationReport(0, np.nan, np.nan, False, 0, str(exc))
    good = deltas[:applied]
    lo = float(good.min()) if applied else np.nan
    hi = float(good.max()) if applied else np.nan
    first_failure = None
    reason = ""
    if code != K.OK:
        first_failure = applied
        reason = {K.SHARED_VERTEX: "shared-vertex", K.EDGE_MISSING: "edge-not-in-tour",
                  K.NOT_IMPROVING: "not-improving"}[code]
    elif applied and lo < MARGIN_GUARD:
        first_failure = int(np.argmin(good))
        reason = "margin-below-guard"
    elif applied != script.expected_count:
        reason = f"expected {script.expected_count} moves, script has {applied}"
    ok = first_failure is None and applied == script.expected_count
    return VerificationReport(applied, lo, hi, ok, first_failure, reason, deltas=good)


# Block states --------------------------------------------------------------

def block_states(t: Tour, n_blocks: int) -> str:
    """One letter per block: S (ABCD), L (ACBD) or ``?`` (intermediate)."""
    pos = t.positions()
    n = t.n
    out = []
    for b in range(n_blocks):
        a, bb, c, d = _block(b)

        def run(seq):
            fwd = all((pos[seq[k]] + 1) % n == pos[seq[k + 1]] for k in range(3))
            bwd = all((pos[seq[k + 1]] + 1) % n == pos[seq[k]] for k in range(3))
            return fwd or bwd

        out.append("S" if run((a, bb, c, d)) else "L" if run((a, c, bb, d)) else "?")
    return "".join(out)


def expected_schedule(family: GadgetFamily) -> List[Tuple[int, str]]:
    """Block states after every flip / seven-step, as ``(moves_done, states)``.

    Simulated symbolically, independently of the geometric replay.
    """
    states = ["L", "L"] + ["S"] * (family.n_blocks - 2)
    out = [(0, "".join(states))]
    count = [0]

    def do_flip(b):
        assert states[b] == "L"
        states[b] = "S"
        count[0] += 1
        out.append((count[0], "".join(states)))

    def do_seven(x, y1, y2):
        assert states[x] == "L" and states[y1] == "S" and states[y2] == "S"
        states[x], states[y1], states[y2] = "S", "L", "L"
        count[0] += 7
        out.append((count[0], "".join(states)))

    if family.kind is FamilyKind.EUCLIDEAN:
        g = family.size

        def gadget(i):
            if i == g - 1:
                do_flip(2 * i)
                do_flip(2 * i + 1)
                return
            do_seven(2 * i, 2 * i + 2, 2 * i + 3)
            gadget(i + 1)
            do_seven(2 * i + 1, 2 * i + 2, 2 * i + 3)
            gadget(i + 1)

        gadget(0)
    else:
        m = family.size

        def reset(i):
            r1, r2 = 4 * i + 2, 4 * i + 3
            if i == m - 1:
                do_flip(r1)
                do_flip(r2)
                return
            do_seven(r1, 4 * i + 4, 4 * i + 5)
            prop(i + 1)
            do_seven(r2, 4 * i + 4, 4 * i + 5)
            prop(i + 1)

        def prop(i):
            do_flip(4 * i)
            do_seven(4 * i + 1, 4 * i + 2, 4 * i + 3)
            reset(i)

        prop(0)
    return out


# Closed-form margins --------------------------------------------------------

def _improvement(pts, p, u1, u2, v1, v2):
    """dist(u1,u2) + dist(v1,v2) - dist(u1,v1) - dist(u2,v2) from coordinates."""
    P = lambda k: pts[k]  # noqa: E731
    return (distance(P(u1), P(u2), p) + distance(P(v1), P(v2), p)
            - distance(P(u1), P(v1), p) - distance(P(u2), P(v2), p))


def _seven_margins(pts, p, x, y1, y2):
    """Improvements of the seven-step table, with added edges as printed."""
    A, B, C, D = _block(x)
    a1, b1, c1, d1 = _block(y1)
    a2, b2, c2, d2 = _block(y2)
    # (removed e1, removed e2) -> added (e1[0], e2[0]) and (e1[1], e2[1])
    rows = [
        (A, C, c2, d2),
        (b2, a2, D, B),
        (b2, D, c1, d1),
        (b1, a1, C, d2),
        (A, c2, B, a2),
        (c1, b2, a1, d2),
        (C, b1, D, d1),
    ]
    return [_improvement(pts, p, *r) for r in rows]


def _flip_margin(pts, p, b):
    A, B, C, D = _block(b)
    # long -> short: remove AC, BD ; add AB, CD
    return _improvement(pts, p, A, C, B, D)


def inequality_margins(kind, p: Metric = None) -> List[Margin]:
    """Every improvement inequality of a family at its two finest levels.

    Margins are evaluated directly from coordinates with the added edges
    taken from the construction, without touching any tour.

    * euclidean: block flip, 7 reset steps via block 1, 7 via block 2
    * manhattan / lp: R block flip, P block-1 flip, 7 steps P_2 resets R,
      7 steps R resets the next P
    """
    kind = FamilyKind(kind)
    if kind is FamilyKind.EUCLIDEAN:
        fam = GadgetFamily(kind, 2)
        pts = gadget_points(fam)
        out = [Margin("flip", _flip_margin(pts, 2, 2))]
        for blk in (0, 1):
            out += [Margin(f"G.{blk + 1}->G'.{k + 1}", v)
                    for k, v in enumerate(_seven_margins(pts, 2, blk, 2, 3))]
        return out
    fam = GadgetFamily(kind, 2, 1 if p is None and kind is FamilyKind.MANHATTAN else p)
    pts = gadget_points(fam)
    q = fam.p
    # finest pair is pair 1: P1 blocks 4,5 ; R1 blocks 6,7 ; coarser R0 blocks 2,3
    out = [Margin("flip R", _flip_margin(pts, q, 6)), Margin("flip P.1", _flip_margin(pts, q, 4))]
    out += [Margin(f"P.2->R.{k + 1}", v) for k, v in enumerate(_seven_margins(pts, q, 5, 6, 7))]
    out += [Margin(f"R->P.{k + 1}", v) for k, v in enumerate(_seven_margins(pts, q, 3, 4, 5))]
    return out
