"""Acceptance suite: one PASS/FAIL line per criterion (shown in the pytest summary)."""
import json
import math
import os
import subprocess
import sys
import time

import networkx as nx
import pytest

from kernelcert import graphs as gl
from kernelcert.bench import (fit_growth, gen_dualcol, gen_ecc, gen_hitting, gen_vc, run_bench)
from kernelcert.checker import check_certificate, check_text
from kernelcert.combinatorics import (enumerate_compositions, lemma_report, nonstar_bound_check,
                                      segment_stable_count, stars_and_bars, stable_count_comparison)
from kernelcert.encoders import encode_arrow, encode_gs, encode_kneser, encode_schrijver
from kernelcert.formula import fingerprint
from kernelcert.proof import ListBuilder, deduction_transform
from kernelcert.reduction import (ArrowInstance, GraphInstance, GSInstance, HittingInstance, Kernel,
                                  KernelBoundError, ReductionStep, Solved, check_kernel_size,
                                  encode_instance, kernelize, reduce_dualcol_step)
from kernelcert.rng import SplitMix64
from kernelcert.solver import Sat, is_sat, refute
from kernelcert.witness import certify, emit_php_refutation, refute_formula, refute_kernel


def _certified_ok(inst):
    """certify + independent re-check + fingerprint match against the root encoding."""
    res = certify(inst)
    if res.verdict != "unsat" or res.certificate is None:
        return False, res, f"verdict {res.verdict}"
    root = encode_instance(inst).formula
    if res.certificate.fingerprint != fingerprint(root):
        return False, res, "fingerprint mismatch"
    v = check_certificate(root, res.certificate)
    return bool(v), res, str(v)


# ---------------------------------------------------------------- 1


def test_criterion_1_base_cases(accept_line):
    out = []
    ok = True
    for enc, nv in ((encode_arrow(3, 2), 216), (encode_gs(3, 2), 108)):
        t0 = time.perf_counter()
        cert = refute_formula(enc.formula)
        dt = time.perf_counter() - t0
        good = (enc.formula.nvars == nv and not isinstance(cert, Sat)
                and bool(check_certificate(enc.formula, cert)) and dt <= 600)
        ok &= good
        out.append(f"{enc.kind}(3,2) vars={enc.formula.nvars} steps="
                   f"{'-' if isinstance(cert, Sat) else cert.step_count()} {dt:.2f}s")
    assert accept_line(1, ok, "; ".join(out))


# ---------------------------------------------------------------- 2


def _pipeline_instances():
    rng = SplitMix64(2024)
    vc = [GraphInstance("vc", gl.complete_graph(3), 1)]
    for _ in range(20):
        vc.append(gen_vc(rng, rng.randint(6, 30), rng.randint(1, 3)))
    hit = []
    for _ in range(20):
        k = rng.randint(1, 2)
        # below 8 elements a k=2 family cannot exceed the kernel bound, so no rule would fire
        hit.append(gen_hitting(rng, rng.randint(4 if k == 1 else 8, 12), k))
    ecc = [GraphInstance("ecc", gl.cycle_graph(4), 2)]
    for _ in range(10):
        k = rng.randint(1, 3)
        ecc.append(gen_ecc(rng, rng.randint(max(4, 2 ** k + 1), min(16, 2 ** k + 6)), k))
    dual = [gen_dualcol(rng, rng.randint(1, 3)) for _ in range(10)]
    return {"vc": vc, "hitting": hit, "ecc": ecc, "dualcol": dual,
            "arrow": [ArrowInstance(3, 3)], "gs": [GSInstance(3, 3)]}


_PIPELINE_RESULTS: list = []


def test_criterion_2_pipelines(accept_line):
    fails = []
    counts = {}
    for prob, insts in _pipeline_instances().items():
        counts[prob] = len(insts)
        for inst in insts:
            ok, res, why = _certified_ok(inst)
            if prob in ("arrow", "gs") and res.trace.R != 3:
                ok, why = False, f"R={res.trace.R}"
            if res.partial:
                ok, why = False, "partial"
            _PIPELINE_RESULTS.append(res)
            if not ok:
                fails.append(f"{inst.describe()}: {why}")
    detail = " ".join(f"{p}={c}" for p, c in counts.items()) + f" failures={len(fails)}"
    assert accept_line(2, not fails, detail + ("" if not fails else " " + "; ".join(fails[:3]))), fails


# ---------------------------------------------------------------- 3


def _sweep_instances():
    """Bench-style sweep (satisfiable and unsatisfiable instances alike)."""
    rng = SplitMix64(33)
    out = []
    for k in (1, 2, 3):
        for n in range(10, 41, 5):
            for _ in range(3):
                out.append(GraphInstance("vc", gl.random_graph(rng, n, rng.random()), k))
    for k in (1, 2, 3):
        for n in range(2 ** k + 1, min(16, 2 ** k + 8) + 1):
            for _ in range(3):
                out.append(GraphInstance("ecc", gl.random_graph(rng, n, rng.random()), k))
    for k in (1, 2, 3, 4, 5):
        for n in range(3 * k - 1, 3 * k + 12, 3):
            for _ in range(3):
                out.append(GraphInstance("dualcol", gl.random_graph(rng, n, rng.random()), k))
    for c in (1, 2, 3, 4):
        out.append(gen_dualcol(rng, c))
    for k in (1, 2, 3):
        for u in (6, 10, 14):
            for _ in range(3):
                pairs = [tuple(sorted(rng.sample(range(1, u + 1), rng.randint(1, 2))))
                         for _ in range(rng.randint(1, 4 * k * k + 20))]
                out.append(HittingInstance(tuple(range(1, u + 1)), tuple(pairs), k, 2))
    return out


def test_criterion_3_kernel_sizes(accept_line):
    violations = []
    kernels = 0
    insts = _sweep_instances()
    for inst in insts:
        try:
            trace = kernelize(inst)
        except KernelBoundError as e:
            violations.append(f"{inst.describe()}: {e}")
            continue
        for node in trace.root.walk():
            if isinstance(node.leaf, Kernel):
                kernels += 1
                try:
                    check_kernel_size(node.instance)
                except KernelBoundError as e:
                    violations.append(str(e))
    for res in _PIPELINE_RESULTS:
        for node in res.trace.root.walk():
            if isinstance(node.leaf, Kernel):
                kernels += 1
                try:
                    check_kernel_size(node.instance)
                except KernelBoundError as e:
                    violations.append(str(e))
    assert accept_line(3, not violations,
                       f"instances={len(insts)} kernels={kernels} violations={len(violations)}"), violations


# ---------------------------------------------------------------- 4


def _classify(g, k):
    r = reduce_dualcol_step(GraphInstance("dualcol", g, k))
    if isinstance(r, ReductionStep):
        if r.rule == "dualcol.c":
            cr = r.evidence["crown"]
            assert gl.validate_crown(g.complement(), cr) is None
        return r.rule
    if isinstance(r, Solved):
        return "dualcol.b" if "matching" in r.reason else "dualcol.a"
    return "kernel"


def test_criterion_4_crown_trichotomy(accept_line):
    viol = 0
    checked = 0
    # every graph on at most 7 vertices up to isomorphism (the rules are isomorphism invariant)
    for G in nx.graph_atlas_g():
        n = G.number_of_nodes()
        if n == 0:
            continue
        g = gl.Graph(n, frozenset((min(u, v) + 1, max(u, v) + 1) for u, v in G.edges()))
        for k in (1, 2):
            if n > 3 * k - 2:
                checked += 1
                try:
                    viol += _classify(g, k) == "kernel"
                except KernelBoundError:
                    viol += 1
    rng = SplitMix64(4)
    for _ in range(10_000):
        n, k = rng.randint(1, 40), rng.randint(1, 5)
        if n <= 3 * k - 2:
            continue
        checked += 1
        try:
            viol += _classify(gl.random_graph(rng, n, rng.random()), k) == "kernel"
        except KernelBoundError:
            viol += 1
    assert accept_line(4, viol == 0, f"graphs checked={checked} violations={viol}")


# ---------------------------------------------------------------- 5


def _forced_cnf(rng):
    while True:
        nv = rng.randint(4, 12)
        m = rng.randint(nv, 4 * nv)
        F = []
        for _ in range(m):
            vs = rng.sample(range(1, nv + 1), 3)
            F.append(tuple(sorted(v if rng.chance(0.5) else -v for v in vs)))
        Z = [v if rng.chance(0.5) else -v for v in rng.sample(range(1, nv + 1), rng.randint(1, 3))]
        if is_sat(nv, F) and not is_sat(nv, F + [(z,) for z in Z]):
            return nv, F, Z


def test_criterion_5_deduction_transform(accept_line):
    rng = SplitMix64(55)
    viol = []
    for case in range(100):
        nv, F, Z = _forced_cnf(rng)
        b = ListBuilder(nv, F + [(z,) for z in Z])
        r = refute(b, nv, b.premises)
        cert = b.finish([r])
        out = deduction_transform(F, Z, cert)
        negz = tuple(sorted(-z for z in Z))
        v = check_text(nv, F, out.to_text(), expect=[negz], want_empty=False)
        if not v or out.step_count() > cert.step_count():
            viol.append((case, str(v), out.step_count(), cert.step_count()))
    assert accept_line(5, not viol, f"cases=100 violations={len(viol)}"), viol


# ---------------------------------------------------------------- 6


def test_criterion_6_php(accept_line):
    sizes = []
    ok = True
    t7 = None
    for k in range(1, 8):
        t0 = time.perf_counter()
        cert = emit_php_refutation(k + 1, k)
        dt = time.perf_counter() - t0
        if k == 7:
            t7 = dt
        x = {(i, j): (i - 1) * k + j for i in range(1, k + 2) for j in range(1, k + 1)}
        from kernelcert.witness import php_clauses
        ok &= bool(check_text(k * (k + 1), php_clauses(k + 1, k, x), cert.to_text()))
        sizes.append(cert.step_count())
    ok &= t7 <= 60
    assert accept_line(6, ok, f"steps k=1..7 {sizes}; k=7 {t7:.1f}s")


# ---------------------------------------------------------------- 7


def test_criterion_7_oracles(accept_line):
    seg = [segment_stable_count(a, b, r) for b in range(2, 14) for a in range(1, b) for r in range(6)]
    seg_ok = all(c.agree for c in seg)
    sb_ok = all(stars_and_bars(n, k) == sum(1 for _ in enumerate_compositions(n, k))
                for n in range(13) for k in range(1, 6))
    ns = [nonstar_bound_check(n, 2) for n in range(4, 10)]
    ns_ok = all(c.enumeration <= c.formula for c in ns)
    rep = list(lemma_report("stablecount", k_max=4, n_max=14))
    full = {(r["n"], r["k"]) for r in rep} == {(n, k) for k in range(1, 5) for n in range(2 * k, 15)}
    c52 = stable_count_comparison(5, 2)
    dis_ok = (c52.formula, c52.enumeration, c52.agree) == (9, 5, False)
    ok = seg_ok and sb_ok and ns_ok and full and dis_ok
    assert accept_line(7, ok, f"segment={len(seg)} exact={seg_ok}; starsbars={sb_ok}; nonstar<=bound={ns_ok}; "
                              f"stablecount report rows={len(rep)} (5,2) formula={c52.formula} "
                              f"enumeration={c52.enumeration}")


# ---------------------------------------------------------------- 8


def test_criterion_8_growth(accept_line):
    recs = list(run_bench("vc", {"n": [10, 15, 20, 25, 30], "k": [2], "reps": 2}, seed=8))
    good = [r for r in recs if r.verdict == "unsat" and r.check == "Accept"]
    fit = fit_growth(good)
    chains = [r for r in good if r.R == 1]
    viol = [r.instance for r in chains if r.total_steps > r.bound_predicted]
    for res in _PIPELINE_RESULTS:
        if res.report is not None and res.report.R == 1 and res.report.step_count > res.bound_predicted:
            viol.append(res.to_json()["instance"])
    ok = math.isfinite(fit.slope) and not viol and len(good) >= 4
    assert accept_line(8, ok, f"VC k=2 slope={fit.slope:.3f} r2={fit.r2:.3f} points={fit.points}; "
                              f"bound checks={len(chains) + len(_PIPELINE_RESULTS)} violations={len(viol)}")


# ---------------------------------------------------------------- 9


def test_criterion_9_kneser(accept_line):
    out = []
    ok = True
    for enc in [encode_kneser(n, 2) for n in (5, 6, 7)] + [encode_schrijver(n, 2) for n in range(5, 10)]:
        cert = refute_kernel(enc)
        good = not isinstance(cert, Sat) and bool(check_certificate(enc.formula, cert))
        ok &= good
        out.append(f"{enc.kind}({enc.params['n']},2)={'ok' if good else 'FAIL'}")
    chi = gl.chromatic_number(gl.build_kneser(5, 2))
    ok &= chi == 3
    assert accept_line(9, ok, " ".join(out) + f"; chi(Kn_5,2)={chi}")


# ---------------------------------------------------------------- 10


def _bench_cli(tmp, seed, hashseed):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    for prob, grid in (("vc", {"n": [10, 14], "k": [2]}), ("hitting", {"u": [8], "k": [2], "reps": 2}),
                       ("dualcol", {"c": [2]})):
        subprocess.run([sys.executable, "-m", "kernelcert.cli", "--seed", str(seed), "--out-dir",
                        os.path.join(tmp, prob), "bench", "--problem", prob, "--grid", json.dumps(grid),
                        "--workers", "2", "--out", "records.jsonl"], env=env, check=True,
                       capture_output=True)
    files = {}
    for root, _, names in os.walk(tmp):
        for nm in names:
            p = os.path.join(root, nm)
            with open(p, "rb") as fh:
                files[os.path.relpath(p, tmp)] = fh.read()
    return files


def test_criterion_10_reproducible(accept_line, tmp_path):
    a = _bench_cli(str(tmp_path / "a"), 99, 1)
    b = _bench_cli(str(tmp_path / "b"), 99, 2)
    same = a == b and len(a) > 3
    certs = sum(1 for k in a if k.endswith(".ecert"))
    assert accept_line(10, same, f"files={len(a)} certificates={certs} byte-identical={a == b}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
