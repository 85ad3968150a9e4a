import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import SQRT2, square
from twoopt_lab.errors import InvalidMoveError
from twoopt_lab.geometry import (INF, Instance, Tour, TwoChange, apply_two_change, canonical_order,
                                 check_metric, distance, distance_matrix, lp_norm, orient,
                                 rotate_pi4, tour_length, two_change_delta)

coord = st.floats(-100, 100, allow_nan=False, allow_infinity=False)
point2 = st.tuples(coord, coord)
metric = st.sampled_from([1, 2, 3, 7, 64, INF])


class TestDistance:
    def test_examples(self):
        assert distance((0, 0), (3, 4), 2) == 5.0
        assert distance((0, 0), (1, 1), 1) == 2.0
        assert distance((0, 0), (1, 1), INF) == 1.0
        assert distance((0, 0), (-0.1, 1.4), 2) == pytest.approx(math.sqrt(1.97), abs=1e-15)
        assert distance((0, 0), (-0.1, 1.4), 2) == pytest.approx(1.403567, abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            distance((0, 0), (1, 2, 3))

    def test_large_p_no_overflow(self):
        big = np.array([1e300, 1e300])
        assert np.isfinite(lp_norm(big, 64))
        assert distance((0, 0), (1e200, 1e200), 64) == pytest.approx(1e200 * 2 ** (1 / 64), rel=1e-12)

    def test_metric_selector(self):
        assert check_metric("inf") == INF and check_metric(3.0) == 3
        for bad in (0, -1, 2.5, "x"):
            with pytest.raises(ValueError):
                check_metric(bad)

    @settings(max_examples=200, deadline=None)
    @given(point2, point2, point2, metric)
    def test_metric_axioms(self, a, b, c, p):
        dab, dba = distance(a, b, p), distance(b, a, p)
        assert dab == dba
        assert distance(a, a, p) == 0.0
        assert (dab == 0) == (tuple(a) == tuple(b))
        tol = 1e-12 * (1 + dab + distance(b, c, p))
        assert distance(a, c, p) <= dab + distance(b, c, p) + tol

    def test_matrix_matches_pairwise(self):
        rng = np.random.default_rng(0)
        pts = rng.random((9, 3))
        for p in (1, 2, 5, INF):
            D = distance_matrix(pts, p)
            for i in range(9):
                for j in range(9):
                    assert D[i, j] == pytest.approx(distance(pts[i], pts[j], p), rel=1e-14, abs=0)

    @settings(max_examples=100, deadline=None)
    @given(point2, point2)
    def test_rotation_maps_l1_to_linf(self, a, b):
        ra, rb = rotate_pi4(np.array([a, b]))
        d1 = distance(a, b, 1)
        assert distance(ra, rb, INF) == pytest.approx(d1, rel=1e-12, abs=1e-12)
        # the 1/sqrt(2) scaling is the same map up to the constant factor 1/2
        sa, sb = rotate_pi4(np.array([a, b]), scale=1 / SQRT2)
        assert distance(sa, sb, INF) == pytest.approx(d1 / 2, rel=1e-12, abs=1e-12)


class TestInstance:
    def test_validation(self):
        with pytest.raises(ValueError):
            Instance(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            Instance(np.zeros((3, 1)))
        with pytest.raises(ValueError):
            Instance(np.array([[0, 0], [1, np.nan], [2, 2]]))

    def test_immutable_and_coincident_points(self):
        inst = Instance(np.array([[0, 0], [0, 0], [1, 1.0]]))
        assert inst.dist[0, 1] == 0.0
        with pytest.raises(ValueError):
            inst.points[0, 0] = 5
        with pytest.raises(ValueError):
            inst.dist[0, 0] = 5


class TestTour:
    def test_canonical_form(self):
        assert Tour((2, 0, 1)).order == (0, 1, 2)
        assert Tour((3, 2, 1, 0)).order == (0, 1, 2, 3)
        with pytest.raises(ValueError):
            Tour((0, 1, 1))

    @settings(max_examples=100, deadline=None)
    @given(st.permutations(list(range(7))), st.integers(0, 6), st.booleans())
    def test_rotations_and_reflections_agree(self, perm, shift, rev):
        other = perm[shift:] + perm[:shift]
        if rev:
            other = other[::-1]
        assert canonical_order(perm) == canonical_order(other)
        assert Tour(tuple(perm)) == Tour(tuple(other))

    def test_lengths(self):
        sq = square()
        assert tour_length(Tour((0, 1, 2, 3)), sq) == 4.0
        assert tour_length(Tour((0, 2, 1, 3)), sq) == pytest.approx(2 + 2 * SQRT2, abs=1e-15)
        A, B, C, D = (0, 0), (1, 0), (-0.1, 1.4), (-1.1, 4.8)
        blk = Instance(np.array([A, B, C, D]))
        want = distance(A, B) + distance(B, C) + distance(C, D) + distance(D, A)
        assert tour_length(Tour((0, 1, 2, 3)), blk) == pytest.approx(want, rel=1e-15)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            tour_length(Tour((0, 1, 2)), square())


class TestTwoChange:
    def test_reversal_example(self):
        # 1-based (1,...,7), remove {1,2},{5,6} -> (1,5,4,3,2,6,7)
        t = apply_two_change(Tour(tuple(range(7))), TwoChange.of(0, 1, 4, 5))
        assert t.order == (0, 4, 3, 2, 1, 5, 6)

    def test_square_uncrossing(self):
        sq = square()
        cross = Tour((0, 2, 1, 3))
        ch = TwoChange.of(0, 2, 1, 3)
        assert two_change_delta(cross, ch, sq) == pytest.approx(2 * SQRT2 - 2, abs=1e-15)
        out = apply_two_change(cross, ch)
        assert out == Tour((0, 1, 2, 3)) and tour_length(out, sq) == 4.0

    def test_edge_labels_in_any_order(self):
        t = Tour(tuple(range(7)))
        a = apply_two_change(t, TwoChange.of(0, 1, 4, 5))
        b = apply_two_change(t, TwoChange.of(5, 4, 1, 0))
        assert a == b
        assert orient(t, TwoChange.of(5, 4, 1, 0)).vertices == (0, 1, 4, 5)

    def test_errors(self):
        t = Tour(tuple(range(6)))
        with pytest.raises(InvalidMoveError) as e:
            apply_two_change(t, TwoChange.of(0, 2, 3, 4))
        assert e.value.reason == "edge-not-in-tour"
        with pytest.raises(InvalidMoveError) as e:
            apply_two_change(t, TwoChange.of(0, 1, 1, 2))
        assert e.value.reason == "shared-vertex"

    def test_added_edges(self):
        ch = TwoChange.of(0, 1, 4, 5)
        assert {frozenset(e) for e in ch.added} == {frozenset((0, 4)), frozenset((1, 5))}

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 10_000), st.integers(5, 12), st.data())
    def test_delta_and_involution(self, seed, n, data):
        rng = np.random.default_rng(seed)
        inst = Instance(rng.random((n, 2)), data.draw(metric))
        t = Tour(tuple(int(v) for v in rng.permutation(n)))
        i = data.draw(st.integers(0, n - 3))
        j = data.draw(st.integers(i + 2, n - 1 if i > 0 else n - 2))
        o = t.order
        ch = TwoChange.of(o[i], o[i + 1], o[j], o[(j + 1) % n])
        new = apply_two_change(t, ch)
        before, after = tour_length(t, inst), tour_length(new, inst)
        assert after == pytest.approx(before - two_change_delta(t, ch, inst), rel=1e-9)
        # exactly the two stated edges change
        assert t.edge_set() - new.edge_set() == {frozenset(e) for e in ch.removed}
        assert new.edge_set() - t.edge_set() == {frozenset(e) for e in ch.added}
        assert apply_two_change(new, orient(new, TwoChange.of(*ch.added[0], *ch.added[1]))) == t
