"""
Command-line front end.

    twoopt-lab gen gadget --family euclidean --gadgets 3 --out DIR
    twoopt-lab gen random --model phi --n 100 --phi 4 --seed 7 --out DIR
    twoopt-lab run --instance I --tour T --pivot first --out trace.csv
    twoopt-lab verify --instance I --tour T --script S
    twoopt-lab experiment --config cfg.json --out rows.csv
    twoopt-lab opt --instance I
    twoopt-lab bound --instance I --phi 4
    twoopt-lab longest-path --instance I

Exit codes: 0 ok, 1 verification failure, 2 usage or input error, 3 capacity.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

from . import analysis, engine, experiments, gadgets, heuristics, io, random_models
from .errors import CapacityError, LabError, ScriptViolation
from .geometry import Instance, metric_name

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3


class _Usage(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--out", default=None, help="output file or directory (default: stdout / cwd)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv", help="report format")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="twoopt-lab", description="2-Opt laboratory")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate an instance and a start tour")
    gsub = g.add_subparsers(dest="kind", required=True)
    gg = gsub.add_parser("gadget", parents=[common], help="lower-bound gadget family")
    gg.add_argument("--family", choices=[k.value for k in gadgets.FamilyKind], required=True)
    gg.add_argument("--gadgets", type=int, help="number of gadgets (euclidean)")
    gg.add_argument("--pairs", type=int, help="number of gadget pairs (manhattan, lp)")
    gg.add_argument("--p", default="3", help="metric for the lp family (int >= 3 or inf)")
    gg.add_argument("--jitter", type=float, default=0.0, help="coordinate jitter amplitude")
    gr = gsub.add_parser("random", parents=[common], help="random instance")
    gr.add_argument("--model", choices=("uniform", "phi", "gaussian"), default="uniform")
    gr.add_argument("--n", type=int, required=True)
    gr.add_argument("--d", type=int, default=2)
    gr.add_argument("--phi", type=float, default=1.0)
    gr.add_argument("--sigma", type=float, default=0.1)
    gr.add_argument("--alpha", type=float, default=1.0)
    gr.add_argument("--p", default="2")
    gr.add_argument("--init", choices=[i.value for i in experiments.Init], default="random")
    for q in (gg, gr):
        q.add_argument("--tsplib", action="store_true", help="also write a TSPLIB .tsp file")

    r = sub.add_parser("run", parents=[common], help="run 2-Opt and write the trace")
    r.add_argument("--instance", required=True)
    r.add_argument("--tour", help="start tour (default: random tour from --seed)")
    r.add_argument("--pivot", choices=[k.value for k in engine.PivotKind], default="first")
    r.add_argument("--script", help="script file for --pivot scripted")
    r.add_argument("--step-limit", type=int, default=None)
    r.add_argument("--eps", type=float, default=0.0)

    v = sub.add_parser("verify", parents=[common], help="verify a gadget script")
    v.add_argument("--instance", required=True)
    v.add_argument("--tour", required=True)
    v.add_argument("--script", required=True)

    e = sub.add_parser("experiment", parents=[common], help="run an experiment sweep")
    e.add_argument("--config", required=True, help="JSON file with ExperimentConfig fields")
    e.add_argument("--workers", type=int, default=None)

    o = sub.add_parser("opt", parents=[common], help="exact optimum (Held-Karp, n <= 18)")
    o.add_argument("--instance", required=True)

    b = sub.add_parser("bound", parents=[common], help="occupancy lower bound on OPT")
    b.add_argument("--instance", required=True)
    b.add_argument("--phi", type=float, required=True)

    lp = sub.add_parser("longest-path", parents=[common], help="longest state-graph path (n <= 10)")
    lp.add_argument("--instance", required=True)
    lp.add_argument("--eps", type=float, default=0.0)
    return ap


# helpers -------------------------------------------------------------------------------

def _load_instance(path: str) -> Instance:
    if path.lower().endswith(".tsp"):
        return io.read_tsplib(path)
    return io.read_instance(path)


def _emit(records: List[Dict], fmt: str, out: Optional[str]):
    buf = _io.StringIO()
    if fmt == "jsonl":
        for rec in records:
            buf.write(json.dumps(rec) + "\n")
    else:
        w = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
        w.writeheader()
        for rec in records:
            w.writerow({k: io.fmt(v) if isinstance(v, float) else v for k, v in rec.items()})
    _write(buf.getvalue(), out)


def _write(text: str, out: Optional[str]):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _outdir(args) -> Path:
    d = Path(args.out or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


# commands ----------------------------------------------------------------------------

def cmd_generate(args) -> int:
    out = _outdir(args)
    if args.kind == "gadget":
        size = args.gadgets if args.family == "euclidean" else args.pairs
        if size is None:
            raise _Usage("--gadgets is required for euclidean, --pairs for manhattan/lp")
        fam = gadgets.GadgetFamily(args.family, size, args.p if args.family == "lp" else 2)
        inst, tour, script = gadgets.build_family(fam, jitter=args.jitter or False, seed=args.seed)
        io.write_script(script, out / "script.txt")
    else:
        p = args.p
        if args.model == "uniform":
            inst = random_models.sample_uniform(args.n, args.d, args.seed, p)
        elif args.model == "phi":
            inst = random_models.sample_phi_perturbed(args.n, args.d, args.phi, args.seed, p=p)
        else:
            base = random_models.sample_uniform(args.n, args.d, args.seed + 1, p).points
            params = random_models.SmoothingParams(args.sigma, args.alpha)
            inst = random_models.sample_smoothed_gaussian(base, params, args.seed, p)
        cfg = experiments.ExperimentConfig(init=args.init, seeds=[args.seed])
        tour = experiments.initial_tour(cfg, inst, args.seed, 0)
    io.write_instance(inst, out / "instance.txt")
    io.write_tour(tour, out / "tour.txt")
    if args.tsplib:
        io.write_tsplib(inst, out / "instance.tsp")
    print(f"wrote {inst.n} points to {out}")
    return EXIT_OK


def cmd_run(args) -> int:
    inst = _load_instance(args.instance)
    tour = io.read_tour(args.tour) if args.tour else heuristics.random_tour(inst, args.seed)
    kind = engine.PivotKind(args.pivot)
    if kind is engine.PivotKind.SCRIPTED:
        if not args.script:
            raise _Usage("--pivot scripted needs --script")
        rule = engine.PivotRule.scripted(io.read_script(args.script))
    elif kind is engine.PivotKind.RANDOM_IMPROVEMENT:
        rule = engine.PivotRule.random(args.seed)
    else:
        rule = engine.PivotRule(kind)
    try:
        trace = engine.run(inst, tour, rule, args.step_limit, args.eps)
    except ScriptViolation as exc:
        print(f"script violation at step {exc.step_index}: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    if args.out:
        io.write_trace(trace, args.out)
    summary = {"n": inst.n, "pivot": kind.value, "steps": trace.step_count,
               "terminated": trace.terminated.value, "init_length": trace.initial_length,
               "final_length": trace.final_length}
    _emit([summary], args.format, None)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    rep = gadgets.verify_script(inst, io.read_tour(args.tour), io.read_script(args.script))
    rec = {"ok": int(rep.ok), "steps_checked": rep.steps_checked, "min_margin": rep.min_margin,
           "max_margin": rep.max_margin,
           "first_failure": "" if rep.first_failure is None else rep.first_failure,
           "reason": rep.reason}
    _emit([rec], args.format, args.out)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_experiment(args) -> int:
    try:
        cfg = experiments.ExperimentConfig.from_json(args.config)
    except (OSError, json.JSONDecodeError, TypeError) as exc:
        raise _Usage(f"cannot load config: {exc}") from None
    if args.workers is not None:
        cfg.workers = args.workers
    rows = experiments.run_experiment(cfg)
    _write(experiments.format_rows(rows, cfg, args.format), args.out)
    bad = [r for r in rows if r.check()]
    return EXIT_VERIFY if bad else EXIT_OK


def cmd_opt(args) -> int:
    inst = _load_instance(args.instance)
    length, tour = analysis.held_karp_opt(inst)
    _emit([{"n": inst.n, "p": metric_name(inst.p), "opt_length": length,
            "tour": " ".join(map(str, tour.order))}], args.format, args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    inst = _load_instance(args.instance)
    lb = analysis.opt_lower_bound(inst, args.phi)
    _emit([{"n": inst.n, "phi": args.phi, "opt_lower_bound": lb}], args.format, args.out)
    return EXIT_OK


def cmd_longest_path(args) -> int:
    inst = _load_instance(args.instance)
    steps, path = analysis.state_graph_longest_path(inst, args.eps)
    _emit([{"n": inst.n, "longest_path": steps,
            "start": " ".join(map(str, path[0].order)),
            "end": " ".join(map(str, path[-1].order))}], args.format, args.out)
    return EXIT_OK


COMMANDS = {"gen": cmd_generate, "run": cmd_run, "verify": cmd_verify,
            "experiment": cmd_experiment, "opt": cmd_opt, "bound": cmd_bound,
            "longest-path": cmd_longest_path}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return COMMANDS[args.cmd](args)
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (_Usage, LabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
