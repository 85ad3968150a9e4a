"""
Plain-text file formats: instances, tours, scripts, traces and TSPLIB.

Floats are written with 17 significant digits so every coordinate
round-trips exactly (gadget margins of 0.012 must survive a save/load).
"""

from __future__ import annotations

import csv
import warnings
from pathlib import Path
from typing import List, Union

import numpy as np

from .engine import RunTrace
from .errors import ParseError, UnsupportedFormatError
from .gadgets import GadgetScript
from .geometry import Instance, Tour, check_metric, metric_name

PathLike = Union[str, Path]

INSTANCE_HEADER = "# twoopt-lab instance v1"
TOUR_HEADER = "# twoopt-lab tour v1"
SCRIPT_HEADER = "# twoopt-lab script v1"
TRACE_HEADER = "# twoopt-lab trace v1"


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _lines(path: PathLike) -> List[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


def _expect_header(lines, header, path):
    if not lines or lines[0].strip() != header:
        raise ParseError(f"{path}: expected header {header!r}", 1)


# Instances ---------------------------------------------------------------------

def format_instance(inst: Instance) -> str:
    out = [INSTANCE_HEADER, f"NAME {inst.name}", f"N {inst.n}", f"D {inst.d}",
           f"P {metric_name(inst.p)}"]
    for k in sorted(inst.meta):
        out.append(f"META {k} {inst.meta[k]}")
    out.append("POINTS")
    out.extend(" ".join(fmt(c) for c in row) for row in inst.points)
    return "\n".join(out) + "\n"


def write_instance(inst: Instance, path: PathLike) -> None:
    Path(path).write_text(format_instance(inst), encoding="utf-8")


def parse_instance(text: str, source: str = "<string>") -> Instance:
    lines = text.splitlines()
    _expect_header(lines, INSTANCE_HEADER, source)
    name, n, d, p, meta = "", None, None, 2, {}
    k = 1
    while k < len(lines):
        raw = lines[k].strip()
        k += 1
        if not raw or raw.startswith("#"):
            continue
        key, _, rest = raw.partition(" ")
        try:
            if key == "NAME":
                name = rest
            elif key == "N":
                n = int(rest)
            elif key == "D":
                d = int(rest)
            elif key == "P":
                p = check_metric(rest)
            elif key == "META":
                mk, _, mv = rest.partition(" ")
                meta[mk] = mv
            elif key == "POINTS":
                break
            else:
                raise ParseError(f"unknown key {key!r}", k)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad value for {key}: {exc}", k) from None
    else:
        raise ParseError("missing POINTS section", k)
    if n is None or d is None:
        raise ParseError("header must define N and D", k)
    rows = []
    for line_no in range(k, len(lines)):
        raw = lines[line_no].strip()
        if not raw or raw.startswith("#"):
            continue
        parts = raw.split()
        if len(parts) != d:
            raise ParseError(f"expected {d} coordinates, got {len(parts)}", line_no + 1)
        try:
            rows.append([float(v) for v in parts])
        except ValueError:
            raise ParseError(f"non-numeric coordinate in {raw!r}", line_no + 1) from None
    if len(rows) != n:
        raise ParseError(f"expected {n} points, got {len(rows)}", len(lines))
    return Instance(np.array(rows, dtype=float).reshape(n, d), p, name, meta)


def read_instance(path: PathLike) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"), str(path))


# Tours ---------------------------------------------------------------------------

def write_tour(t: Tour, path: PathLike) -> None:
    Path(path).write_text(f"{TOUR_HEADER}\n{' '.join(map(str, t.order))}\n", encoding="utf-8")


def read_tour(path: PathLike) -> Tour:
    lines = _lines(path)
    _expect_header(lines, TOUR_HEADER, path)
    order = []
    for k, raw in enumerate(lines[1:], start=2):
        if raw.strip().startswith("#"):
            continue
        try:
            order.extend(int(v) for v in raw.split())
        except ValueError:
            raise ParseError(f"non-integer vertex in {raw.strip()!r}", k) from None
    try:
        return Tour(tuple(order))
    except ValueError as exc:
        raise ParseError(str(exc), len(lines)) from None


# Scripts ---------------------------------------------------------------------------

def write_script(script: GadgetScript, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{SCRIPT_HEADER}\nEXPECTED {script.expected_count}\n")
        if script.labels:
            fh.write("LABELS " + " ".join(script.labels) + "\n")
        fh.write("# step u1 u2 v1 v2: remove {u1,u2} and {v1,v2}\n")
        np.savetxt(fh, np.column_stack([np.arange(len(script)), script.moves]), fmt="%d")


def read_script(path: PathLike) -> GadgetScript:
    lines = _lines(path)
    _expect_header(lines, SCRIPT_HEADER, path)
    expected, labels, moves = None, (), []
    for k, raw in enumerate(lines[1:], start=2):
        raw = raw.strip()
        if not raw or raw.startswith("#"):
            continue
        if raw.startswith("EXPECTED"):
            try:
                expected = int(raw.split()[1])
            except (IndexError, ValueError):
                raise ParseError("EXPECTED needs an integer", k) from None
            continue
        if raw.startswith("LABELS"):
            labels = tuple(raw.split()[1:])
            continue
        parts = raw.split()
        if len(parts) != 5:
            raise ParseError(f"a move line needs 5 integers, got {len(parts)}", k)
        try:
            step, *move = (int(v) for v in parts)
        except ValueError:
            raise ParseError(f"non-integer field in {raw!r}", k) from None
        if step != len(moves):
            raise ParseError(f"step {step} out of sequence (expected {len(moves)})", k)
        moves.append(move)
    arr = np.array(moves, dtype=np.int64).reshape(-1, 4)
    return GadgetScript(arr, len(arr) if expected is None else expected, labels)


# Traces ------------------------------------------------------------------------------

TRACE_COLUMNS = ("step", "u1", "u2", "v1", "v2", "delta", "length_after")


def write_trace(trace: RunTrace, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"{TRACE_HEADER}\n# initial_length {fmt(trace.initial_length)} "
                 f"terminated {trace.terminated.value}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for k in range(len(trace)):
            w.writerow([k, *map(int, trace.edges[k]), fmt(trace.deltas[k]), fmt(trace.lengths[k])])


def read_trace_rows(path: PathLike):
    """Trace CSV as ``(edges (k,4) int, deltas (k,), lengths (k,))``."""
    body = [l for l in _lines(path) if not l.startswith("#")]
    rows = list(csv.reader(body))[1:]
    edges = np.array([[int(v) for v in r[1:5]] for r in rows], dtype=np.int64).reshape(-1, 4)
    deltas = np.array([float(r[5]) for r in rows])
    lengths = np.array([float(r[6]) for r in rows])
    return edges, deltas, lengths


# TSPLIB --------------------------------------------------------------------------------

_TSPLIB_TYPES = {"EUC_2D": 2, "MAN_2D": 1}
UNROUNDED_NOTE = "distances are unrounded L_p values, not TSPLIB integer-rounded"


def write_tsplib(inst: Instance, path: PathLike) -> None:
    if inst.d != 2 or inst.p not in (1, 2):
        raise UnsupportedFormatError("TSPLIB output needs d = 2 and p in {1, 2}")
    kind = "EUC_2D" if inst.p == 2 else "MAN_2D"
    out = [f"NAME : {inst.name or 'twoopt-lab'}", "TYPE : TSP",
           f"COMMENT : {UNROUNDED_NOTE}", f"DIMENSION : {inst.n}",
           f"EDGE_WEIGHT_TYPE : {kind}", "NODE_COORD_SECTION"]
    out.extend(f"{k + 1} {fmt(x)} {fmt(y)}" for k, (x, y) in enumerate(inst.points))
    out.append("EOF")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def parse_tsplib(text: str) -> Instance:
    """Parse a TSPLIB TSP file with EUC_2D or MAN_2D node coordinates.

    Distances of the returned instance are exact (unrounded); a warning
    flags the difference from TSPLIB's integer rounding.
    """
    lines = text.splitlines()
    spec = {}
    k = 0
    while k < len(lines):
        raw = lines[k].strip()
        k += 1
        if not raw:
            continue
        if raw.startswith("NODE_COORD_SECTION"):
            break
        if raw == "EOF":
            raise ParseError("EOF before NODE_COORD_SECTION", k)
        if ":" not in raw:
            raise ParseError(f"expected 'KEY : value', got {raw!r}", k)
        key, _, val = raw.partition(":")
        spec[key.strip().upper()] = val.strip()
    else:
        raise ParseError("missing NODE_COORD_SECTION", k)
    kind = spec.get("EDGE_WEIGHT_TYPE", "")
    if kind not in _TSPLIB_TYPES:
        raise UnsupportedFormatError(f"EDGE_WEIGHT_TYPE {kind or '(missing)'} is not supported; "
                                     "use EUC_2D or MAN_2D")
    try:
        n = int(spec["DIMENSION"])
    except (KeyError, ValueError):
        raise ParseError("DIMENSION missing or not an integer", k) from None
    coords = {}
    for line_no in range(k, len(lines)):
        raw = lines[line_no].strip()
        if not raw:
            continue
        if raw == "EOF":
            break
        parts = raw.split()
        if len(parts) != 3:
            raise ParseError(f"node line needs 'id x y', got {raw!r}", line_no + 1)
        try:
            idx, x, y = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"bad node line {raw!r}", line_no + 1) from None
        if not 1 <= idx <= n or idx in coords:
            raise ParseError(f"node id {idx} out of range or repeated", line_no + 1)
        coords[idx] = (x, y)
    if len(coords) != n:
        raise ParseError(f"expected {n} nodes, got {len(coords)}", len(lines))
    warnings.warn(f"TSPLIB {kind}: {UNROUNDED_NOTE}", UserWarning, stacklevel=2)
    pts = np.array([coords[i] for i in range(1, n + 1)], dtype=float)
    return Instance(pts, _TSPLIB_TYPES[kind], spec.get("NAME", ""), {"source": "tsplib"})


def read_tsplib(path: PathLike) -> Instance:
    return parse_tsplib(Path(path).read_text(encoding="utf-8"))
