import numpy as np
import pytest

from twoopt_lab import gadgets as G
from twoopt_lab import io
from twoopt_lab.engine import PivotRule, run
from twoopt_lab.errors import ParseError, UnsupportedFormatError
from twoopt_lab.geometry import INF, Instance, Tour
from twoopt_lab.heuristics import random_tour
from twoopt_lab.random_models import sample_uniform


def test_instance_round_trip_exact(tmp_path):
    for inst in (sample_uniform(30, 3, 5, INF), G.build_manhattan_family(3)[0],
                 Instance(np.array([[0.1, 1 / 3], [1e-300, -2.5e17], [np.pi, np.e]]), 7, "odd", {"k": "v w"})):
        path = tmp_path / "i.txt"
        io.write_instance(inst, path)
        back = io.read_instance(path)
        assert np.array_equal(back.points, inst.points)
        assert back.p == inst.p and back.name == inst.name and back.meta == inst.meta


def test_gadget_margins_survive_round_trip(tmp_path):
    inst, t0, script = G.build_manhattan_family(3)
    io.write_instance(inst, tmp_path / "i.txt")
    io.write_tour(t0, tmp_path / "t.txt")
    io.write_script(script, tmp_path / "s.txt")
    rep = G.verify_script(io.read_instance(tmp_path / "i.txt"), io.read_tour(tmp_path / "t.txt"),
                          io.read_script(tmp_path / "s.txt"))
    assert rep.ok and rep.steps_checked == 106
    s2 = io.read_script(tmp_path / "s.txt")
    assert np.array_equal(s2.moves, script.moves) and s2.labels == script.labels


@pytest.mark.parametrize("text,line", [
    ("nope\n", 1),
    ("# twoopt-lab instance v1\nN 3\nD 2\nBOGUS 1\nPOINTS\n", 4),
    ("# twoopt-lab instance v1\nN x\n", 2),
    ("# twoopt-lab instance v1\nN 3\nD 2\nPOINTS\n0 0\n1 1\n2\n", 7),
    ("# twoopt-lab instance v1\nN 3\nD 2\nPOINTS\n0 0\n1 1\n2 z\n", 7),
    ("# twoopt-lab instance v1\nN 3\nD 2\n", 3),
])
def test_instance_parse_errors(text, line):
    with pytest.raises(ParseError) as e:
        io.parse_instance(text)
    assert e.value.line == line and f"line {line}" in str(e.value)


def test_tour_and_script_errors(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("# twoopt-lab tour v1\n0 1 x\n")
    with pytest.raises(ParseError):
        io.read_tour(p)
    p.write_text("# twoopt-lab tour v1\n0 1 1\n")
    with pytest.raises(ParseError):
        io.read_tour(p)
    s = tmp_path / "s.txt"
    s.write_text("# twoopt-lab script v1\nEXPECTED 2\n0 1 2 3 4\n2 1 2 3 4\n")
    with pytest.raises(ParseError) as e:
        io.read_script(s)
    assert e.value.line == 4


def test_trace_round_trip(tmp_path):
    inst = sample_uniform(30, 2, 1)
    tr = run(inst, random_tour(inst, 1), PivotRule.first())
    io.write_trace(tr, tmp_path / "tr.csv")
    edges, deltas, lengths = io.read_trace_rows(tmp_path / "tr.csv")
    assert np.array_equal(edges, tr.edges)
    assert np.array_equal(deltas, tr.deltas) and np.array_equal(lengths, tr.lengths)
    assert (tmp_path / "tr.csv").read_text().startswith(io.TRACE_HEADER)


class TestTsplib:
    def test_round_trip(self, tmp_path):
        for p in (1, 2):
            inst = sample_uniform(12, 2, 3, p)
            io.write_tsplib(inst, tmp_path / "a.tsp")
            text = (tmp_path / "a.tsp").read_text()
            assert "unrounded" in text
            with pytest.warns(UserWarning, match="unrounded"):
                back = io.read_tsplib(tmp_path / "a.tsp")
            assert np.array_equal(back.points, inst.points) and back.p == p

    def test_hand_written(self):
        text = """NAME : four
TYPE : TSP
COMMENT : unit square
DIMENSION : 4
EDGE_WEIGHT_TYPE : EUC_2D
NODE_COORD_SECTION
1 0 0
2 1 0
3 1 1
4 0 1
EOF
"""
        with pytest.warns(UserWarning):
            inst = io.parse_tsplib(text)
        assert inst.n == 4 and inst.dist[0, 2] == np.sqrt(2)

    def test_unsupported(self):
        text = "NAME : x\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : GEO\nNODE_COORD_SECTION\n1 0 0\n"
        with pytest.raises(UnsupportedFormatError):
            io.parse_tsplib(text)
        with pytest.raises(UnsupportedFormatError):
            io.write_tsplib(sample_uniform(5, 2, 0, 3), "unused.tsp")

    @pytest.mark.parametrize("text,line", [
        ("NAME x\n", 1),
        ("DIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 0\n", 5),
        ("DIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n1 0 1\n", 5),
        ("DIMENSION : 2x\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n", 3),
    ])
    def test_malformed(self, text, line):
        with pytest.raises(ParseError) as e:
            io.parse_tsplib(text)
        assert e.value.line == line
