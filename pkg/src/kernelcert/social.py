"""Preference profiles and explicit SWF/SCF tables.

An ordering is a tuple of objects, most preferred first. A profile tuple R has one
ordering per agent (agents are numbered from 1).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass


class SocialError(ValueError):
    pass


def orderings(objects) -> list:
    if isinstance(objects, int):
        objects = range(1, objects + 1)
    return list(itertools.permutations(sorted(objects)))


def profiles(objects, n) -> list:
    return list(itertools.product(orderings(objects), repeat=n))


def top(pi):
    return pi[0]


def rank(pi, o) -> int:
    return pi.index(o)


def prefers(pi, a, b) -> bool:
    return pi.index(a) < pi.index(b)


def pr_set(i, o, R) -> frozenset:
    """Objects that agent i ranks no higher than o in R_i (o included)."""
    pi = R[i - 1]
    return frozenset(pi[pi.index(o):])


def deviate(i, R, pi) -> tuple:
    return R[:i - 1] + (tuple(pi),) + R[i:]


def drop_objects(pi, B) -> tuple:
    B = set(B)
    if B >= set(pi):
        raise SocialError("cannot drop every object")
    return tuple(o for o in pi if o not in B)


def demote_objects(pi, B) -> tuple:
    return tuple(pi) + tuple(sorted(B))


@dataclass
class Table:
    """Total map from profile tuples to an outcome: an ordering (swf) or an object (scf)."""
    kind: str  # "swf" | "scf"
    objects: tuple
    n: int
    f: dict

    def __call__(self, R):
        return self.f[tuple(R)]

    def to_text(self) -> str:
        lines = []
        for R in profiles(self.objects, self.n):
            out = self.f[R]
            out_s = ",".join(map(str, out)) if self.kind == "swf" else str(out)
            lines.append(" ".join(",".join(map(str, pi)) for pi in R) + " -> " + out_s)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Table":
        f = {}
        kind = None
        for no, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                lhs, rhs = line.split("->")
                R = tuple(tuple(int(x) for x in tok.split(",")) for tok in lhs.split())
                rhs = rhs.strip()
                k = "swf" if "," in rhs else "scf"
                out = tuple(int(x) for x in rhs.split(",")) if k == "swf" else int(rhs)
            except ValueError:
                raise SocialError(f"line {no}: cannot parse {line!r}") from None
            if kind is None:
                kind = k
            f[R] = out
        if not f:
            raise SocialError("empty table")
        R0 = next(iter(f))
        objects = tuple(sorted(R0[0]))
        t = cls(kind, objects, len(R0), f)
        missing = [R for R in profiles(objects, t.n) if R not in f]
        if missing:
            raise SocialError(f"table is not total, e.g. {missing[0]} missing")
        return t


# ------------------------------------------------------------ constructors


def dictator_swf(objects, n, i) -> Table:
    objs = tuple(sorted(range(1, objects + 1) if isinstance(objects, int) else objects))
    return Table("swf", objs, n, {R: R[i - 1] for R in profiles(objs, n)})


def dictator_scf(objects, n, i) -> Table:
    objs = tuple(sorted(range(1, objects + 1) if isinstance(objects, int) else objects))
    return Table("scf", objs, n, {R: R[i - 1][0] for R in profiles(objs, n)})


def constant_scf(objects, n, o) -> Table:
    objs = tuple(sorted(range(1, objects + 1) if isinstance(objects, int) else objects))
    return Table("scf", objs, n, {R: o for R in profiles(objs, n)})


def borda_scf(objects, n) -> Table:
    """Borda count, ties broken towards the smaller object."""
    objs = tuple(sorted(range(1, objects + 1) if isinstance(objects, int) else objects))
    m = len(objs)
    f = {}
    for R in profiles(objs, n):
        score = {o: sum(m - 1 - pi.index(o) for pi in R) for o in objs}
        f[R] = min(objs, key=lambda o: (-score[o], o))
    return Table("scf", objs, n, f)


def majority_scf_2(n) -> Table:
    """Two objects: majority of tops, ties to object 1."""
    f = {}
    for R in profiles(2, n):
        ones = sum(1 for pi in R if pi[0] == 1)
        f[R] = 1 if 2 * ones >= n else 2
    return Table("scf", (1, 2), n, f)


def majority_swf_2(n) -> Table:
    f = {}
    for R in profiles(2, n):
        ones = sum(1 for pi in R if pi[0] == 1)
        f[R] = (1, 2) if 2 * ones >= n else (2, 1)
    return Table("swf", (1, 2), n, f)


def relabel_agents(t: Table, perm) -> Table:
    """perm[i-1] = agent whose column feeds position i."""
    f = {R: t.f[tuple(R[p - 1] for p in perm)] for R in t.f}
    return Table(t.kind, t.objects, t.n, f)


# ------------------------------------------------------------ operators


def restrict(t: Table, B) -> Table:
    B = frozenset(B)
    rest = tuple(o for o in t.objects if o not in B)
    if not rest:
        raise SocialError("cannot drop every object")
    f = {}
    for R in profiles(rest, t.n):
        big = tuple(demote_objects(pi, B) for pi in R)
        out = t.f[big]
        if t.kind == "swf":
            f[R] = drop_objects(out, B)
        else:
            if out in B:
                raise SocialError(f"outcome {out} of profile {big} lies in the dropped set")
            f[R] = out
    return Table(t.kind, rest, t.n, f)


restrict_scf = restrict


def merge_agents(t: Table, a, b) -> Table:
    """(n-1)-agent table: agent a's column is a copy of agent b's."""
    if t.n < 2 or a == b:
        raise SocialError("merge needs two distinct agents")
    f = {}
    for R in profiles(t.objects, t.n - 1):
        f[R] = t.f[expand_merged(R, a, b)]
    return Table(t.kind, t.objects, t.n - 1, f)


def expand_merged(R, a, b) -> tuple:
    """Full profile from a reduced one (agent a removed, copied from b)."""
    others = [i for i in range(1, len(R) + 2) if i != a]
    full = {i: R[k] for k, i in enumerate(others)}
    full[a] = full[b]
    return tuple(full[i] for i in range(1, len(R) + 2))


# ------------------------------------------------------------ axiom checks


def is_unanimous(t: Table):
    for R, out in t.f.items():
        for a, b in itertools.permutations(t.objects, 2):
            if all(prefers(pi, a, b) for pi in R) and not prefers(out, a, b):
                return False, (R, a, b)
    return True, None


def is_iia(t: Table, guard=True):
    if guard and (len(t.objects) > 3 or t.n > 2):
        raise SocialError("IIA check limited to m <= 3, n <= 2")
    for a, b in itertools.combinations(t.objects, 2):
        groups = {}
        for R, out in t.f.items():
            key = tuple(prefers(pi, a, b) for pi in R)
            val = prefers(out, a, b)
            if key in groups and groups[key][0] != val:
                return False, (groups[key][1], R, a, b)
            groups.setdefault(key, (val, R))
    return True, None


def dictator_of(t: Table):
    for i in range(1, t.n + 1):
        if t.kind == "swf":
            ok = all(out == R[i - 1] for R, out in t.f.items())
        else:
            ok = all(out == R[i - 1][0] for R, out in t.f.items())
        if ok:
            return i
    return None


def is_dictatorial(t: Table):
    d = dictator_of(t)
    return d is not None, d


def is_onto(t: Table):
    img = set(t.f.values())
    for o in t.objects:
        if o not in img:
            return False, o
    return True, None


def is_strategyproof(t: Table, guard=True):
    if guard and (len(t.objects) > 3 or t.n > 3):
        raise SocialError("strategyproofness check limited to m <= 3, n <= 3")
    ords = orderings(t.objects)
    for R, out in t.f.items():
        for i in range(1, t.n + 1):
            pi_i = R[i - 1]
            for pi in ords:
                if pi == pi_i:
                    continue
                alt = t.f[deviate(i, R, pi)]
                if pi_i.index(alt) < pi_i.index(out):
                    return False, (R, i, pi, alt)
    return True, None


# ------------------------------------------------------------ preservation


def preservation_tests(samples: int = 50, rng=None) -> dict:
    """Restriction keeps unanimity+IIA (SWF) and onto+strategyproofness (SCF)
    on dictators and agent relabelings of them (m=3, n=2)."""
    from .rng import SplitMix64

    rng = rng or SplitMix64(7)
    report = {"swf": 0, "scf": 0, "failures": []}
    for s in range(samples):
        i = rng.randint(1, 2)
        perm = [1, 2]
        rng.shuffle(perm)
        B = {rng.randint(1, 3)}
        w = relabel_agents(dictator_swf(3, 2, i), perm)
        r = restrict(w, B)
        if not (is_unanimous(r)[0] and is_iia(r)[0]):
            report["failures"].append(("swf", i, perm, sorted(B)))
        report["swf"] += 1
        c = relabel_agents(dictator_scf(3, 2, i), perm)
        rc = restrict(c, B)
        if not (is_onto(rc)[0] and is_strategyproof(rc)[0]):
            report["failures"].append(("scf", i, perm, sorted(B)))
        report["scf"] += 1
    report["ok"] = not report["failures"]
    return report


def all_tables(kind, m, n):
    """Every table at tiny scale (for encoder/semantics agreement)."""
    profs = profiles(m, n)
    outs = orderings(m) if kind == "swf" else list(range(1, m + 1))
    for choice in itertools.product(outs, repeat=len(profs)):
        yield Table(kind, tuple(range(1, m + 1)), n, dict(zip(profs, choice)))
