"""Benchmark sweeps: seeded instance generators, certified runs, growth fitting."""
from __future__ import annotations

import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from . import graphs as gl
from .encoders import encode_kneser, encode_schrijver
from .proof import bound_evaluate, size_report
from .reduction import (ArrowInstance, GraphInstance, GSInstance, HittingInstance, ReductionError,
                        kernelize)
from .rng import SplitMix64

GOLDEN = 0x9E3779B97F4A7C15
MASK = (1 << 64) - 1


class BenchError(ValueError):
    pass


@dataclass
class BenchRecord:
    instance: str
    phi: int  # clause count of the root encoding
    C: int
    R: int
    total_steps: int
    ext_vars: int
    kernel_sizes: list
    wall_time: float | None
    bound_predicted: int | None
    verdict: str
    check: str | None = None
    fragment_sizes: list = field(default_factory=list)
    error: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def instance_seed(seed: int, index: int) -> int:
    return (seed + (index + 1) * GOLDEN) & MASK


# ---------------------------------------------------------------- generators


def gen_vc(rng, n, k, tries=60):
    p = min(0.9, 2.0 * (k + 2) / n)
    for _ in range(tries):
        g = gl.random_graph(rng, n, p)
        if not gl.has_vertex_cover(g, k):
            return GraphInstance("vc", g, k)
    raise BenchError(f"no vertex-cover no-instance found for n={n}, k={k}")


def _plant(rng, n, k):
    """Random graph with a planted isolated block or twin class large enough for a rule."""
    need = math.ceil(n / 2 ** k)
    base = gl.random_graph(rng, n - need, rng.choice([0.2, 0.5, 0.8]))
    es = set(base.edges)
    if rng.chance(0.5) or base.n == 0:
        return gl.Graph(n, frozenset(es))
    v = rng.randint(1, base.n)
    for t in range(base.n + 1, n + 1):
        es |= {(min(t, w), max(t, w)) for w in base.adj(v)}
        es.add((v, t))
    for a, b in itertools.combinations(range(base.n + 1, n + 1), 2):
        es.add((a, b))
    return gl.Graph(n, frozenset(es))


def gen_ecc(rng, n, k, tries=60):
    for _ in range(tries):
        g = _plant(rng, n, k) if rng.chance(0.5) else gl.random_graph(rng, n, rng.choice([0.2, 0.5, 0.8]))
        if not gl.has_ecc(g, k) and kernelize(GraphInstance("ecc", g, k)).steps():
            return GraphInstance("ecc", g, k)
    raise BenchError(f"no reducible clique-cover no-instance found for n={n}, k={k}")


def gen_hitting(rng, u, k, d=2, tries=60):
    pairs = list(itertools.combinations(range(1, u + 1), d))
    for _ in range(tries):
        m = min(len(pairs), rng.randint(4 * k * k + 1, 4 * k * k + 12))
        fam = rng.sample(pairs, m)
        if gl.has_hitting_set(fam, k):
            continue
        inst = HittingInstance(tuple(range(1, u + 1)), tuple(fam), k, d)
        if kernelize(inst).steps():
            return inst
    raise BenchError(f"no reducible hitting-set no-instance found for u={u}, k={k}")


def gen_dualcol(rng, c, r=None):
    g, k = gl.crown_dualcol_fixture(rng, c, c + 2 if r is None else r)
    return GraphInstance("dualcol", g, k)


def make_instance(problem, params, rng):
    if problem == "vc":
        return gen_vc(rng, params["n"], params["k"])
    if problem == "ecc":
        return gen_ecc(rng, params["n"], params["k"])
    if problem == "hitting":
        return gen_hitting(rng, params["u"], params["k"], params.get("d", 2))
    if problem == "dualcol":
        return gen_dualcol(rng, params["c"], params.get("r"))
    if problem == "arrow":
        return ArrowInstance(params["m"], params["n"])
    if problem == "gs":
        return GSInstance(params["m"], params["n"])
    raise BenchError(f"unknown bench problem {problem!r}")


PROBLEMS = ("vc", "ecc", "hitting", "dualcol", "arrow", "gs", "kneser", "schrijver")


# ---------------------------------------------------------------- one run


def _direct(problem, params, max_conflicts):
    """Kneser-type formulas are refuted directly: a single node, C = 0, R = 1."""
    from .checker import check_certificate
    from .solver import Sat
    from .witness import refute_kernel
    enc = (encode_kneser if problem == "kneser" else encode_schrijver)(params["n"], params["k"])
    cert = refute_kernel(enc, max_conflicts)
    desc = f"{problem}(n={params['n']}, k={params['k']})"
    if isinstance(cert, Sat):
        return BenchRecord(desc, len(enc.formula.clauses), 0, 1, 0, 0, [], None, None, "sat"), None
    rep = size_report(cert, 1, 0, [cert.step_count()])
    bound, _ = bound_evaluate(rep, 0, cert.step_count(), 1, 0)
    rec = BenchRecord(desc, len(enc.formula.clauses), 0, 1, rep.step_count, rep.ext_vars,
                      [cert.step_count()], None, bound, "unsat",
                      str(check_certificate(enc.formula, cert)))
    return rec, cert


def _certified(problem, params, seed, max_conflicts):
    from .reduction import encode_instance
    from .witness import certify
    inst = make_instance(problem, params, SplitMix64(seed))
    phi = len(encode_instance(inst).formula.clauses)
    res = certify(inst, max_conflicts=max_conflicts)
    trace = res.trace
    if res.certificate is None:
        return BenchRecord(inst.describe(), phi, trace.depth, trace.R, 0, 0, [], None, None,
                           res.verdict, error="; ".join(res.notes) or None), None
    rep = res.report
    bound = res.bound_predicted
    verdict = "partial" if res.partial else res.verdict
    rec = BenchRecord(inst.describe(), phi, rep.C, rep.R, rep.step_count, rep.ext_vars,
                      list(res.kernel_sizes), None, bound, verdict, str(res.check),
                      [s for _, _, s in res.fragment_sizes])
    return rec, res.certificate


def run_one(job):
    index, problem, params, seed, timing, out_dir, max_conflicts = job
    t0 = time.perf_counter()
    cert = None
    try:
        if problem in ("kneser", "schrijver"):
            rec, cert = _direct(problem, params, max_conflicts)
        else:
            rec, cert = _certified(problem, params, seed, max_conflicts)
    except (BenchError, ReductionError, ValueError, RuntimeError) as e:
        desc = f"{problem}({', '.join(f'{k}={v}' for k, v in sorted(params.items()))})"
        rec = BenchRecord(desc, 0, 0, 1, 0, 0, [], None, None, "error", error=f"{type(e).__name__}: {e}")
    if timing:
        rec.wall_time = round(time.perf_counter() - t0, 4)
    if out_dir and cert is not None:
        with open(os.path.join(out_dir, f"{index:04d}-{problem}.ecert"), "w") as fh:
            fh.write(cert.to_text())
    return rec


def expand_grid(grid: dict) -> list:
    """Cartesian product of the list-valued keys, repeated `reps` times."""
    grid = dict(grid or {})
    reps = int(grid.pop("reps", 1))
    if not grid:
        return []
    keys = sorted(grid)
    vals = [v if isinstance(v, (list, tuple)) else [v] for v in (grid[k] for k in keys)]
    return [dict(zip(keys, combo)) for combo in itertools.product(*vals) for _ in range(reps)]


def run_bench(problem, grid, seed, workers=1, timing=False, out_dir=None, max_conflicts=2_000_000):
    """Yield BenchRecords in submission order; a failing instance becomes an error record."""
    if problem not in PROBLEMS:
        raise BenchError(f"unknown bench problem {problem!r}")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    jobs = [(i, problem, p, instance_seed(seed, i), timing, out_dir, max_conflicts)
            for i, p in enumerate(expand_grid(grid))]
    if workers <= 1 or len(jobs) <= 1:
        for j in jobs:
            yield run_one(j)
        return
    with ProcessPoolExecutor(max_workers=workers) as ex:
        yield from ex.map(run_one, jobs)


# ---------------------------------------------------------------- growth fit


@dataclass
class GrowthFit:
    slope: float
    intercept: float
    r2: float
    points: int
    ceiling: float | None = None

    @property
    def within_ceiling(self) -> bool:
        return self.ceiling is None or self.slope <= self.ceiling


def fit_growth(records, ceiling=None) -> GrowthFit:
    """Least-squares slope of log(total steps) against log(|Phi|)."""
    pts = [(r.phi, r.total_steps) if isinstance(r, BenchRecord) else (r["phi"], r["total_steps"])
           for r in records]
    pts = [(x, y) for x, y in pts if x > 0 and y > 0]
    if len(pts) < 4:
        raise BenchError(f"need at least 4 records, got {len(pts)}")
    xs = [math.log(x) for x, _ in pts]
    ys = [math.log(y) for _, y in pts]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx < 1e-12:
        raise BenchError("degenerate variance in log |Phi|")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    icpt = my - slope * mx
    syy = sum((y - my) ** 2 for y in ys)
    res = sum((y - (icpt + slope * x)) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 if syy < 1e-12 else 1.0 - res / syy
    return GrowthFit(slope, icpt, r2, len(pts), ceiling)
