"""CNF encodings of the parameterized problems. Variable and clause order is fixed."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .formula import Formula, VarRegistry, make_clause
from .graphs import Graph, build_kneser, build_stable_kneser
from . import social

DEFAULT_MAX_LITS = 10 ** 7


class EncodeError(ValueError):
    pass


@dataclass
class EncodedInstance:
    formula: Formula
    kind: str
    params: dict

    @property
    def semantic_map(self) -> str:
        return self.formula.registry.semantic_map()


def _mk(kind, params):
    return Formula(registry=VarRegistry(), meta={"problem": kind, **params})


def _pairs(n):
    return itertools.combinations(range(1, n + 1), 2)


# ---------------------------------------------------------------- colouring


def encode_col(g: Graph, colors: int, kind="col") -> EncodedInstance:
    if colors < 1:
        raise EncodeError("need at least one colour")
    f = _mk(kind, {"n": g.n, "colors": colors})
    reg = f.registry
    X = {(v, i): reg.register(("X", v, i)) for v in g.vertices for i in range(1, colors + 1)}
    Y = {(v, w): reg.register(("Y", v, w)) for v, w in _pairs(g.n)}
    for (v, w), y in Y.items():
        f.add([y] if g.has_edge(v, w) else [-y])
    for v in g.vertices:
        f.add([X[v, i] for i in range(1, colors + 1)])
    for v in g.vertices:
        for i, j in itertools.combinations(range(1, colors + 1), 2):
            f.add([-X[v, i], -X[v, j]])
    for (v, w), y in Y.items():
        for i in range(1, colors + 1):
            f.add([-y, -X[v, i], -X[w, i]])
    return EncodedInstance(f, kind, {"graph": g, "colors": colors})


def encode_dualcol(g: Graph, k: int) -> EncodedInstance:
    if k >= g.n:
        raise EncodeError(f"DualCol needs k < n (k={k}, n={g.n})")
    e = encode_col(g, g.n - k, kind="dualcol")
    e.params["k"] = k
    e.formula.meta["k"] = k
    return e


def encode_kneser(n, k) -> EncodedInstance:
    e = encode_col(build_kneser(n, k), n - 2 * k + 1, kind="kneser")
    e.params.update(n=n, k=k)
    return e


def encode_schrijver(n, k) -> EncodedInstance:
    e = encode_col(build_stable_kneser(n, k), n - 2 * k + 1, kind="schrijver")
    e.params.update(n=n, k=k)
    return e


def schrijver_into_kneser(n, k) -> dict:
    """Variable renaming of the Schrijver encoding into the Kneser encoding (by vertex label)."""
    s = encode_schrijver(n, k)
    kn = encode_kneser(n, k)
    gs, gk = s.params["graph"], kn.params["graph"]
    pos = {lab: v for v, lab in enumerate(gk.labels, 1)}
    vmap = {v: pos[lab] for v, lab in enumerate(gs.labels, 1)}
    m = {}
    for vid, name in s.formula.registry.items():
        if name[0] == "X":
            m[vid] = kn.formula.registry.id(("X", vmap[name[1]], name[2]))
        else:
            a, b = sorted((vmap[name[1]], vmap[name[2]]))
            m[vid] = kn.formula.registry.id(("Y", a, b))
    return m


# ---------------------------------------------------------------- vertex cover


def encode_vc(g: Graph, k: int) -> EncodedInstance:
    if k < 1:
        raise EncodeError("VC encoding needs k >= 1")
    f = _mk("vc", {"n": g.n, "k": k})
    reg = f.registry
    X = {(v, i): reg.register(("X", v, i)) for v in g.vertices for i in range(1, k + 1)}
    Y = {(v, w): reg.register(("Y", v, w)) for v, w in _pairs(g.n)}

    def y(v, w):
        return Y[(v, w) if v < w else (w, v)]

    for (v, w), yv in Y.items():
        f.add([yv] if g.has_edge(v, w) else [-yv])
    for v in g.vertices:
        for i in range(1, k + 1):
            f.add([-X[v, i]] + [y(v, w) for w in g.vertices if w != v])
    for i in range(1, k + 1):
        f.add([X[v, i] for v in g.vertices])
    for v, w in _pairs(g.n):
        for i in range(1, k + 1):
            f.add([-X[v, i], -X[w, i]])
    for v in g.vertices:
        for i, j in itertools.combinations(range(1, k + 1), 2):
            f.add([-X[v, i], -X[v, j]])
    for (v, w), yv in Y.items():
        f.add([-yv] + [X[v, i] for i in range(1, k + 1)] + [X[w, i] for i in range(1, k + 1)])
    return EncodedInstance(f, "vc", {"graph": g, "k": k})


# ---------------------------------------------------------------- edge clique cover


def encode_ecc(g: Graph, k: int) -> EncodedInstance:
    if k < 1:
        raise EncodeError("ECC encoding needs k >= 1")
    f = _mk("ecc", {"n": g.n, "k": k})
    reg = f.registry
    X = {(v, i): reg.register(("X", v, i)) for v in g.vertices for i in range(1, k + 1)}
    Y = {(v, w): reg.register(("Y", v, w)) for v, w in _pairs(g.n)}
    G = {(v, w, j): reg.register(("G", v, w, j)) for v, w in _pairs(g.n) for j in range(1, k + 1)}
    for (v, w), yv in Y.items():
        f.add([yv] if g.has_edge(v, w) else [-yv])
    for (v, w), yv in Y.items():
        for i in range(1, k + 1):
            f.add([-X[v, i], -X[w, i], yv])
    for (v, w), yv in Y.items():
        f.add([-yv] + [G[v, w, j] for j in range(1, k + 1)])
    # conjunction gates G <-> X_v & X_w
    for (v, w), _ in Y.items():
        for j in range(1, k + 1):
            gv = G[v, w, j]
            f.add([-gv, X[v, j]])
            f.add([-gv, X[w, j]])
            f.add([gv, -X[v, j], -X[w, j]])
    return EncodedInstance(f, "ecc", {"graph": g, "k": k})


# ---------------------------------------------------------------- hitting set


def normalize_family(family) -> list:
    out = sorted({tuple(sorted(set(s))) for s in family}, key=lambda s: (len(s), s))
    return out


def encode_hitting(universe, family, k: int, d: int) -> EncodedInstance:
    U = sorted(set(universe))
    fam = normalize_family(family)
    for s in fam:
        if len(s) > d:
            raise EncodeError(f"set {s} is larger than d={d}")
        if not set(s) <= set(U):
            raise EncodeError(f"set {s} is not inside the universe")
    f = _mk("hitting", {"u": len(U), "k": k, "d": d})
    reg = f.registry
    X = {(i, j): reg.register(("X", i, j)) for i in U for j in range(1, k + 1)}
    for j in range(1, k + 1):
        f.add([X[i, j] for i in U])
    for j in range(1, k + 1):
        for a, b in itertools.combinations(U, 2):
            f.add([-X[a, j], -X[b, j]])
    for s in fam:
        f.add([X[i, j] for i in s for j in range(1, k + 1)])
    return EncodedInstance(f, "hitting", {"universe": tuple(U), "family": fam, "k": k, "d": d})


# ---------------------------------------------------------------- Arrow / GS


def _guard(lits, cap):
    if lits > cap:
        raise EncodeError(f"encoding would have about {lits} literals, cap is {cap}")


def arrow_layout(m, n):
    ords = social.orderings(m)
    profs = list(itertools.product(ords, repeat=n))
    return ords, profs


def encode_arrow(m, n, max_lits=DEFAULT_MAX_LITS) -> EncodedInstance:
    if m < 2 or n < 1:
        raise EncodeError("Arrow encoding needs m >= 2, n >= 1")
    mf = math.factorial(m)
    est = (mf ** n) * mf * mf + (m * (m - 1) // 2) * (mf ** (2 * n)) // (2 ** n) * (mf // 2) ** 2 * 4
    _guard(est, max_lits)
    ords, profs = arrow_layout(m, n)
    oi = {pi: i for i, pi in enumerate(ords)}
    f = _mk("arrow", {"m": m, "n": n})
    reg = f.registry
    for r in range(len(profs)):
        for p in range(mf):
            reg.register(("X", r, p))

    def X(r, p):
        return r * mf + p + 1

    for r in range(len(profs)):
        f.add([X(r, p) for p in range(mf)])
        for p, q in itertools.combinations(range(mf), 2):
            f.add([-X(r, p), -X(r, q)])
    for i in range(n):
        f.add([-X(r, oi[R[i]]) for r, R in enumerate(profs)])
    for a, b in itertools.permutations(range(1, m + 1), 2):
        sab = [oi[pi] for pi in ords if social.prefers(pi, a, b)]
        for r, R in enumerate(profs):
            if all(social.prefers(pi, a, b) for pi in R):
                f.add([X(r, p) for p in sab])
    seen = set()
    for a, b in itertools.combinations(range(1, m + 1), 2):
        sab = [oi[pi] for pi in ords if social.prefers(pi, a, b)]
        sba = [oi[pi] for pi in ords if not social.prefers(pi, a, b)]
        groups = {}
        for r, R in enumerate(profs):
            groups.setdefault(tuple(social.prefers(pi, a, b) for pi in R), []).append(r)
        for key in sorted(groups):
            rs = groups[key]
            for r1, r2 in itertools.permutations(rs, 2):
                for p1 in sab:
                    for p2 in sba:
                        c = make_clause([-X(r1, p1), -X(r2, p2)])
                        if c not in seen:
                            seen.add(c)
                            f.clauses.append(c)
    return EncodedInstance(f, "arrow", {"m": m, "n": n})


def encode_gs(m, n, max_lits=DEFAULT_MAX_LITS) -> EncodedInstance:
    if m < 2 or n < 1:
        raise EncodeError("GS encoding needs m >= 2, n >= 1")
    mf = math.factorial(m)
    est = (mf ** n) * m * n * mf * (m + 1)
    _guard(est, max_lits)
    ords, profs = arrow_layout(m, n)
    pidx = {R: r for r, R in enumerate(profs)}
    f = _mk("gs", {"m": m, "n": n})
    reg = f.registry
    for r in range(len(profs)):
        for o in range(1, m + 1):
            reg.register(("X", r, o))

    def X(r, o):
        return r * m + o

    for r in range(len(profs)):
        f.add([X(r, o) for o in range(1, m + 1)])
        for o1, o2 in itertools.combinations(range(1, m + 1), 2):
            f.add([-X(r, o1), -X(r, o2)])
    for i in range(n):
        f.add([-X(r, R[i][0]) for r, R in enumerate(profs)])
    for o in range(1, m + 1):
        f.add([X(r, o) for r in range(len(profs))])
    for r, R in enumerate(profs):
        for o in range(1, m + 1):
            for i in range(1, n + 1):
                pr = sorted(social.pr_set(i, o, R))
                for pi in ords:
                    if pi == R[i - 1]:
                        continue  # the clause would contain X_{R,o} and its negation
                    r2 = pidx[social.deviate(i, R, pi)]
                    f.add([-X(r, o)] + [X(r2, o2) for o2 in pr])
    return EncodedInstance(f, "gs", {"m": m, "n": n})
