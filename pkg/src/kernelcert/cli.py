"""Command line: encode, kernelize, certify, check, oracle, scf, bench.

Exit codes: 0 ok, 1 negative verdict (sat, partial, reject), 2 usage, 3 internal error.
"""
from __future__ import annotations

import json
import os
import signal
import sys

import click

from . import encoders as en
from . import social
from .graphs import GraphError, graph_from_dimacs

PROBLEMS = ["col", "dualcol", "vc", "ecc", "hitting", "kneser", "schrijver", "arrow", "gs"]
SCF_PROPERTIES = ["strategyproof", "onto", "unanimous", "iia", "dictatorial"]


class Negative(Exception):
    """A run that completed but produced a negative verdict (exit code 1)."""


def _read(path):
    with open(path) as fh:
        return fh.read()


def _write(path, text, out_dir):
    if path is None or path == "-":
        click.echo(text, nl=False)
        return
    if out_dir and not os.path.isabs(path):
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, path)
    with open(path, "w") as fh:
        fh.write(text)


def _family(text):
    return [tuple(int(x) for x in line.split()) for line in text.splitlines()
            if line.strip() and not line.startswith("c")]


def instance_options(f):
    opts = [
        click.option("--problem", type=click.Choice(PROBLEMS), required=True),
        click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False),
                     help="graph in DIMACS edge format"),
        click.option("--family", "family_path", type=click.Path(exists=True, dir_okay=False),
                     help="hitting-set family, one set per line"),
        click.option("-k", "--k", type=int, help="parameter k"),
        click.option("--colors", type=int, help="number of colours (col)"),
        click.option("-n", "--n", type=int, help="n for kneser/schrijver, agents for arrow/gs"),
        click.option("-m", "--m", type=int, help="number of alternatives (arrow/gs)"),
        click.option("-d", "--d", type=int, default=None, help="set-size bound (hitting)"),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _need(val, name, problem):
    if val is None:
        raise click.UsageError(f"--{name} is required for --problem {problem}")
    return val


def build_instance(problem, graph_path, family_path, k, colors, n, m, d):
    """Reduction-level instance for reducible problems, else None."""
    from .reduction import ArrowInstance, GraphInstance, GSInstance, HittingInstance
    if problem in ("dualcol", "vc", "ecc"):
        g = graph_from_dimacs(_read(_need(graph_path, "graph", problem)))
        return GraphInstance(problem, g, _need(k, "k", problem))
    if problem == "hitting":
        fam = _family(_read(_need(family_path, "family", problem)))
        universe = sorted({x for s in fam for x in s})
        return HittingInstance(tuple(universe), tuple(fam), _need(k, "k", problem),
                               d if d is not None else max((len(s) for s in fam), default=1))
    if problem == "arrow":
        return ArrowInstance(_need(m, "m", problem), _need(n, "n", problem))
    if problem == "gs":
        return GSInstance(_need(m, "m", problem), _need(n, "n", problem))
    return None


def build_encoding(problem, graph_path, family_path, k, colors, n, m, d, max_lits):
    from .reduction import encode_instance
    if problem == "col":
        g = graph_from_dimacs(_read(_need(graph_path, "graph", problem)))
        return en.encode_col(g, _need(colors, "colors", problem))
    if problem == "kneser":
        return en.encode_kneser(_need(n, "n", problem), _need(k, "k", problem))
    if problem == "schrijver":
        return en.encode_schrijver(_need(n, "n", problem), _need(k, "k", problem))
    inst = build_instance(problem, graph_path, family_path, k, colors, n, m, d)
    return encode_instance(inst, max_lits)


def _on_alarm(signum, frame):
    raise TimeoutError("time limit reached")


@click.group()
@click.option("--seed", type=int, default=1, show_default=True, help="64-bit seed for all randomness")
@click.option("--max-lits", type=int, default=en.DEFAULT_MAX_LITS, show_default=True,
              help="literal cap for the social-choice encodings")
@click.option("--timeout-s", type=int, default=0, help="wall-clock limit in seconds (0 = none)")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None,
              help="directory for relative output paths")
@click.pass_context
def main(ctx, seed, max_lits, timeout_s, out_dir):
    """Certified kernelization toolkit."""
    ctx.obj = {"seed": seed, "max_lits": max_lits, "out_dir": out_dir}
    if timeout_s > 0 and hasattr(signal, "SIGALRM"):
        signal.signal(signal.SIGALRM, _on_alarm)
        signal.alarm(timeout_s)


@main.command()
@instance_options
@click.option("--out", default="-", help="DIMACS output path (- for stdout)")
@click.option("--map", "map_path", default=None, help="semantic map sidecar (default: <out>.map)")
@click.pass_obj
def encode(obj, problem, graph_path, family_path, k, colors, n, m, d, out, map_path):
    """Write the CNF encoding of an instance in DIMACS format."""
    from .formula import dimacs_write
    enc = build_encoding(problem, graph_path, family_path, k, colors, n, m, d, obj["max_lits"])
    _write(out, dimacs_write(enc.formula), obj["out_dir"])
    if map_path is None and out != "-":
        map_path = out + ".map"
    if map_path:
        _write(map_path, enc.semantic_map, obj["out_dir"])


@main.command()
@instance_options
@click.option("--emit-trace", default=None, help="write the reduction trace here")
@click.pass_obj
def kernelize(obj, problem, graph_path, family_path, k, colors, n, m, d, emit_trace):
    """Apply reduction rules until a kernel or a decided leaf is reached."""
    from .reduction import kernelize as run
    inst = build_instance(problem, graph_path, family_path, k, colors, n, m, d)
    if inst is None:
        raise click.UsageError(f"--problem {problem} has no reduction rules")
    trace = run(inst)
    if emit_trace:
        _write(emit_trace, trace.to_text(), obj["out_dir"])
    click.echo(json.dumps({"instance": inst.describe(), "verdict": trace.verdict(),
                           "C": trace.depth, "R": trace.R, "steps": len(trace.steps()),
                           "leaves": len(trace.leaves())}, sort_keys=True))
    if trace.verdict() == "sat":
        raise Negative("satisfiable")


@main.command()
@instance_options
@click.option("--out", default=None, help="certificate output path")
@click.option("--report", default=None, help="append a JSON-lines report record here")
@click.option("--max-conflicts", type=int, default=2_000_000, show_default=True)
@click.pass_obj
def certify(obj, problem, graph_path, family_path, k, colors, n, m, d, out, report, max_conflicts):
    """Kernelize, emit witnesses, refute kernels and compose one checked certificate."""
    from .checker import check_certificate
    from .proof import bound_evaluate, size_report
    from .solver import Sat
    from .witness import certify as run, refute_kernel
    inst = build_instance(problem, graph_path, family_path, k, colors, n, m, d)
    if inst is None:
        enc = build_encoding(problem, graph_path, family_path, k, colors, n, m, d, obj["max_lits"])
        cert = refute_kernel(enc, max_conflicts)
        if isinstance(cert, Sat):
            rec = {"instance": problem, "verdict": "sat"}
        else:
            rep = size_report(cert, 1, 0, [cert.step_count()])
            desc = ", ".join(f"{key}={v}" for key, v in sorted(enc.params.items()) if key != "graph")
            rec = {"instance": f"{problem}({desc})", "verdict": "unsat", "C": 0, "R": 1,
                   "fragment_sizes": [], "kernel_sizes": [cert.step_count()],
                   "total_steps": rep.step_count, "ext_vars": rep.ext_vars,
                   "bound_predicted": bound_evaluate(rep, 0, cert.step_count(), 1, 0)[0],
                   "check": str(check_certificate(enc.formula, cert))}
    else:
        res = run(inst, max_conflicts=max_conflicts, max_lits=obj["max_lits"])
        cert = res.certificate
        rec = res.to_json()
    if out and cert is not None and not isinstance(cert, Sat):
        _write(out, cert.to_text(), obj["out_dir"])
    line = json.dumps(rec, sort_keys=True)
    if report:
        path = os.path.join(obj["out_dir"], report) if obj["out_dir"] and not os.path.isabs(report) else report
        with open(path, "a") as fh:
            fh.write(line + "\n")
    click.echo(line)
    if rec["verdict"] != "unsat" or rec.get("partial") or rec.get("check") not in (None, "Accept"):
        raise Negative(rec["verdict"])


@main.command()
@click.option("--cnf", "cnf_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--cert", "cert_path", type=click.Path(exists=True, dir_okay=False), required=True)
def check(cnf_path, cert_path):
    """Re-check a certificate against a DIMACS formula with the standalone checker."""
    from .checker import check_text
    from .formula import dimacs_read
    f = dimacs_read(_read(cnf_path))
    v = check_text(f.nvars, f.clauses, _read(cert_path))
    click.echo(str(v))
    if not v.ok:
        raise Negative(str(v))


@main.command()
@click.option("--lemma", type=click.Choice(["starsbars", "stablecount", "containing", "segment",
                                            "nonstar", "beta", "chainlen"]), required=True)
@click.option("-k", "--k", type=int, default=None)
@click.option("--beta", default=None, help="rational beta, e.g. 1/2")
@click.option("--n-max", type=int, default=None)
def oracle(lemma, k, beta, n_max):
    """Closed-form counts against exhaustive enumeration, as JSON lines."""
    from .combinatorics import lemma_report
    kw = {key: v for key, v in (("k", k), ("beta", beta), ("n_max", n_max)) if v is not None}
    bad = False
    for rec in lemma_report(lemma, **kw):
        click.echo(json.dumps(rec, sort_keys=True))
        bad |= rec.get("bound_holds") is False
    if bad:
        raise Negative("bound violated")


@main.group()
def scf():
    """Social choice tables."""


@scf.command("check")
@click.option("--table", "table_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--property", "prop", type=click.Choice(SCF_PROPERTIES), required=True)
def scf_check(table_path, prop):
    """Decide a property of a tabulated welfare or choice function."""
    t = social.Table.from_text(_read(table_path))
    test = {"strategyproof": social.is_strategyproof, "onto": social.is_onto,
            "unanimous": social.is_unanimous, "iia": social.is_iia,
            "dictatorial": social.is_dictatorial}[prop]
    res = test(t)
    ok = res[0] if isinstance(res, tuple) else bool(res)
    out = {"property": prop, "kind": t.kind, "m": len(t.objects), "n": t.n, "holds": ok}
    if isinstance(res, tuple) and len(res) > 1 and res[1] is not None:
        out["witness"] = repr(res[1])
    click.echo(json.dumps(out, sort_keys=True))
    if not ok:
        raise Negative(prop)


@main.command()
@click.option("--problem", type=click.Choice(["vc", "ecc", "hitting", "dualcol", "arrow", "gs",
                                              "kneser", "schrijver"]), required=True)
@click.option("--grid", required=True, help='JSON object of parameter lists, e.g. {"n":[10,15],"k":[2]}')
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--timing", is_flag=True, help="record wall time (makes output run-dependent)")
@click.option("--out", default="-", help="JSON-lines output path")
@click.option("--max-conflicts", type=int, default=2_000_000, show_default=True)
@click.option("--fit", is_flag=True, help="print a log-log growth fit to stderr")
@click.pass_obj
def bench(obj, problem, grid, workers, timing, out, max_conflicts, fit):
    """Certified sweep over a parameter grid; one JSON line per instance."""
    from .bench import fit_growth, run_bench
    try:
        g = json.loads(grid)
    except json.JSONDecodeError as e:
        raise click.UsageError(f"--grid is not valid JSON: {e}") from None
    if not isinstance(g, dict):
        raise click.UsageError("--grid must be a JSON object")
    cert_dir = os.path.join(obj["out_dir"], "certs") if obj["out_dir"] else None
    recs = list(run_bench(problem, g, obj["seed"], workers, timing, cert_dir, max_conflicts))
    _write(out, "".join(r.to_json() + "\n" for r in recs), obj["out_dir"])
    if fit:
        f = fit_growth([r for r in recs if r.verdict == "unsat"])
        click.echo(json.dumps({"slope": f.slope, "r2": f.r2, "points": f.points}), err=True)
    if any(r.verdict != "unsat" or r.check != "Accept" for r in recs):
        raise Negative("some instances were not certified")


def run(argv=None):
    """Entry point with the documented exit codes."""
    try:
        main.main(args=argv, standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 2
    except click.exceptions.Abort:
        return 2
    except Negative as e:
        click.echo(f"negative: {e}", err=True)
        return 1
    except TimeoutError as e:
        click.echo(f"internal error: {e}", err=True)
        return 3
    except (en.EncodeError, GraphError, social.SocialError, OSError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        return 2
    except click.exceptions.Exit as e:
        return e.exit_code
    except Exception as e:  # noqa: BLE001 - internal failure, reported with exit code 3
        click.echo(f"internal error: {type(e).__name__}: {e}", err=True)
        return 3
    return 0


def entry():
    sys.exit(run())


if __name__ == "__main__":
    entry()
