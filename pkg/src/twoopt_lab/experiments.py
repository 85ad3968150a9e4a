"""
Experiment harness: sweep instance models, run 2-Opt, emit one row per (seed, setting).

Output is deterministic for a fixed config: every random choice is derived
from the row seed, rows are sorted by (seed, setting) and timing is off
unless explicitly requested.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import analysis, engine, gadgets, heuristics, random_models
from .engine import PivotRule, Termination
from .geometry import Instance, Tour, check_metric, metric_name

CSV_VERSION = "# twoopt-lab experiment v1"
OPT_MAX_N = analysis.HELD_KARP_MAX_N


class Model(str, enum.Enum):
    UNIFORM = "uniform"
    PHI = "phi"
    GAUSSIAN = "gaussian"
    GADGET = "gadget"


class Init(str, enum.Enum):
    RANDOM = "random"
    NEAREST = "nearest"
    CHEAPEST = "cheapest"
    RANDOM_ORDER = "random_order"


@dataclass
class ExperimentConfig:
    """One sweep. Settings are the product of ``n`` and ``phi`` (``phi`` only for PHI).

    For GADGET, ``n`` lists family sizes (gadgets or pairs) and ``family``
    selects euclidean, manhattan or lp; the start tour is the family's own.
    ``starts > 1`` keeps the worst (longest) local optimum of that many starts.
    """

    model: Model = Model.UNIFORM
    n: List[int] = field(default_factory=lambda: [20])
    d: int = 2
    phi: List[float] = field(default_factory=lambda: [1.0])
    sigma: float = 0.1
    alpha: float = 1.0
    p: object = 2
    pivot: engine.PivotKind = engine.PivotKind.FIRST_IMPROVEMENT
    init: Init = Init.RANDOM
    seeds: List[int] = field(default_factory=lambda: [0])
    step_limit: Optional[int] = None
    eps: float = 0.0
    starts: int = 1
    family: str = "euclidean"
    with_opt: bool = True
    with_pairs: bool = True
    record_timing: bool = False
    workers: int = 1

    def __post_init__(self):
        self.model = Model(self.model)
        self.pivot = engine.PivotKind(self.pivot)
        self.init = Init(self.init)
        self.p = check_metric(self.p)
        self.n = [int(v) for v in _as_list(self.n)]
        self.phi = [float(v) for v in _as_list(self.phi)]
        self.seeds = [int(s) for s in _as_list(self.seeds)]
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if not self.n:
            raise ValueError("n must be non-empty")
        if self.model is Model.GADGET:
            gadgets.FamilyKind(self.family)
            if any(v < 1 for v in self.n):
                raise ValueError("gadget sizes must be >= 1")
        elif any(v < 3 for v in self.n):
            raise ValueError("n must be >= 3")
        if self.model is Model.PHI and any(not v >= 1 for v in self.phi):
            raise ValueError("phi must be >= 1")
        if self.model is Model.GAUSSIAN:
            random_models.SmoothingParams(self.sigma, self.alpha)
        if self.pivot is engine.PivotKind.SCRIPTED and self.model is not Model.GADGET:
            raise ValueError("the scripted pivot needs the gadget model")
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if not self.eps >= 0:
            raise ValueError("eps must be >= 0")

    @classmethod
    def from_dict(cls, data: Dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known - {"outputs"}
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**{k: v for k, v in data.items() if k in known})

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def settings(self) -> List[Tuple[int, float]]:
        phis = self.phi if self.model is Model.PHI else [self.phi[0] if self.phi else 1.0]
        return [(n, phi) for n in self.n for phi in phis]


def _as_list(v) -> list:
    if isinstance(v, (list, tuple, np.ndarray)):
        return list(v)
    return [v]


@dataclass
class RecordRow:
    seed: int
    model: str
    n: int
    d: int
    phi_effective: Optional[float]
    p: str
    pivot: str
    init: str
    steps: int
    init_length: float
    final_length: float
    opt_length: Optional[float]
    opt_lower_bound: Optional[float]
    ratio: Optional[float]
    pairs_disjoint: Optional[int]
    pairs_type01: Optional[int]
    min_delta: Optional[float]
    runtime_ms: Optional[float]
    truncated: bool = False
    phi_raw: Optional[float] = None
    error: str = ""

    def check(self):
        """RecordRow invariants; returns a list of violated ones."""
        bad = []
        if self.error:
            return bad
        if self.steps < 0:
            bad.append("steps < 0")
        if self.final_length > self.init_length:
            bad.append("final_length > init_length")
        if self.ratio is not None and self.ratio < 1 - 1e-12:
            bad.append("ratio < 1")
        return bad


COLUMNS = tuple(f.name for f in fields(RecordRow))


def _sub_seed(seed: int, purpose: int, k: int = 0) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=(100 + purpose, k))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def build_instance(cfg: ExperimentConfig, n: int, phi: float, seed: int):
    """Instance for one row, with (phi_effective, phi_raw, gadget start, gadget script)."""
    if cfg.model is Model.UNIFORM:
        return random_models.sample_uniform(n, cfg.d, seed, cfg.p), 1.0, 1.0, None, None
    if cfg.model is Model.PHI:
        return random_models.sample_phi_perturbed(n, cfg.d, phi, seed, p=cfg.p), phi, phi, None, None
    if cfg.model is Model.GAUSSIAN:
        base = random_models.sample_uniform(n, cfg.d, _sub_seed(seed, 0), cfg.p).points
        params = random_models.SmoothingParams(cfg.sigma, cfg.alpha)
        inst = random_models.sample_smoothed_gaussian(base, params, seed, cfg.p)
        return inst, float(inst.meta["phi_rescaled"]), float(inst.meta["phi"]), None, None
    fam = gadgets.GadgetFamily(cfg.family, n, cfg.p if cfg.family == "lp" else None)
    inst, start, script = gadgets.build_family(fam)
    return inst, None, None, start, script


def initial_tour(cfg: ExperimentConfig, inst: Instance, seed: int, k: int) -> Tour:
    if cfg.init is Init.RANDOM:
        return heuristics.random_tour(inst, _sub_seed(seed, 1, k))
    return heuristics.insertion_tour(inst, cfg.init.value, _sub_seed(seed, 1, k))


def _rule(cfg, seed, k, script):
    if cfg.pivot is engine.PivotKind.RANDOM_IMPROVEMENT:
        return PivotRule.random(_sub_seed(seed, 2, k))
    if cfg.pivot is engine.PivotKind.SCRIPTED:
        return PivotRule.scripted(script)
    return PivotRule(cfg.pivot)


def run_row(cfg: ExperimentConfig, n: int, phi: float, seed: int) -> RecordRow:
    """Compute one row; failures are recorded in ``error`` rather than raised."""
    base = dict(seed=seed, model=cfg.model.value, n=n, d=cfg.d, phi_effective=None,
                p=metric_name(cfg.p), pivot=cfg.pivot.value, init=cfg.init.value, steps=0,
                init_length=math.nan, final_length=math.nan, opt_length=None,
                opt_lower_bound=None, ratio=None, pairs_disjoint=None, pairs_type01=None,
                min_delta=None, runtime_ms=None)
    try:
        inst, phi_eff, phi_raw, g_start, g_script = build_instance(cfg, n, phi, seed)
        base.update(n=inst.n, d=inst.d, p=metric_name(inst.p), phi_effective=phi_eff,
                    phi_raw=phi_raw)
        if cfg.model is Model.GADGET:
            base["init"] = "gadget"
        limit = cfg.step_limit
        if limit is None:
            # gadgets have exact ties, so rounding noise can cycle; keep a finite cap
            limit = engine.default_step_limit(inst.n, 1.0 if phi_eff is None else phi_eff)
        worst, elapsed = None, 0.0
        for k in range(cfg.starts):
            start = g_start if g_start is not None else initial_tour(cfg, inst, seed, k)
            t0 = time.perf_counter()
            tr = engine.run(inst, start, _rule(cfg, seed, k, g_script), limit, cfg.eps)
            elapsed += time.perf_counter() - t0
            if worst is None or tr.final_length > worst.final_length:
                worst = tr
        base.update(steps=worst.step_count, init_length=worst.initial_length,
                    final_length=worst.final_length,
                    truncated=worst.terminated is Termination.STEP_LIMIT)
        if worst.step_count:
            base["min_delta"] = float(worst.deltas.min())
        if cfg.record_timing:
            base["runtime_ms"] = elapsed * 1e3
        if cfg.with_pairs:
            rep = analysis.linked_pair_decomposition(worst)
            base.update(pairs_disjoint=rep.pairs_disjoint, pairs_type01=rep.pairs_type01_disjoint)
        pts = inst.points
        if phi_eff is not None and phi_eff >= 1 and np.all((pts >= 0) & (pts <= 1)):
            base["opt_lower_bound"] = analysis.opt_lower_bound(inst, phi_eff)
        if cfg.with_opt and inst.n <= OPT_MAX_N:
            opt, _ = analysis.held_karp_opt(inst)
            base.update(opt_length=opt, ratio=worst.final_length / opt if opt > 0 else None)
    except Exception as exc:  # recorded per row, the sweep continues
        base["error"] = f"{type(exc).__name__}: {exc}"
    return RecordRow(**base)


def _run_task(args):
    return run_row(*args)


def run_experiment(cfg: ExperimentConfig) -> List[RecordRow]:
    """All rows, sorted by (seed, setting index)."""
    tasks = []
    for seed in cfg.seeds:
        for si, (n, phi) in enumerate(cfg.settings()):
            tasks.append(((seed, si), (cfg, n, phi, seed)))
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(_run_task, [t[1] for t in tasks]))
    else:
        rows = [_run_task(t[1]) for t in tasks]
    order = sorted(range(len(tasks)), key=lambda i: tasks[i][0])
    return [rows[i] for i in order]


# Formatting -------------------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def summarize(rows: Sequence[RecordRow], cfg: ExperimentConfig) -> List[str]:
    """Human-readable footer lines (non-binding trend report)."""
    ok = [r for r in rows if not r.error]
    out = [f"rows {len(rows)} errors {len(rows) - len(ok)} "
           f"truncated {sum(r.truncated for r in ok)}"]
    groups: Dict[Tuple, List[RecordRow]] = {}
    for r in ok:
        groups.setdefault((r.n, r.phi_effective), []).append(r)
    means = []
    for (n, phi), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1] or 0.0)):
        steps = float(np.mean([r.steps for r in rs]))
        line = f"n {n} phi {_cell(phi)} mean_steps {steps:.6g}"
        ratios = [r.ratio for r in rs if r.ratio is not None]
        if ratios:
            line += f" mean_ratio {np.mean(ratios):.6g} max_ratio {np.max(ratios):.6g}"
        out.append(line)
        means.append((n, phi, steps))
    ns = sorted({m[0] for m in means})
    if len(ns) >= 2 and all(m[2] > 0 for m in means):
        slope = loglog_slope([m[0] for m in means], [m[2] for m in means])
        out.append(f"loglog_slope_steps_vs_n {slope:.6g}")
    phis = [m for m in means if m[1] is not None]
    if cfg.model is Model.PHI and len({m[1] for m in phis}) >= 2:
        for n in ns:
            seq = [m[2] for m in sorted(phis, key=lambda m: m[1]) if m[0] == n]
            trend = ("increasing" if all(a <= b for a, b in zip(seq, seq[1:])) else
                     "decreasing" if all(a >= b for a, b in zip(seq, seq[1:])) else "mixed")
            out.append(f"phi_trend n {n} {trend}")
    return out


def loglog_slope(ns: Iterable[float], values: Iterable[float]) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    x = np.log(np.asarray(list(ns), dtype=float))
    y = np.log(np.asarray(list(values), dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def format_rows(rows: Sequence[RecordRow], cfg: ExperimentConfig, fmt: str = "csv") -> str:
    buf = io.StringIO()
    footer = summarize(rows, cfg)
    if fmt == "csv":
        buf.write(CSV_VERSION + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([_cell(getattr(r, c)) for c in COLUMNS])
        for line in footer:
            buf.write(f"# {line}\n")
    elif fmt == "jsonl":
        for r in rows:
            rec = {k: (None if isinstance(v, float) and math.isnan(v) else v)
                   for k, v in asdict(r).items()}
            buf.write(json.dumps(rec, sort_keys=False) + "\n")
        buf.write(json.dumps({"summary": footer}) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return buf.getvalue()


def read_rows_csv(text: str) -> List[Dict[str, str]]:
    body = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(body))
