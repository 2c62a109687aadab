"""Stand-alone certificate checker.

Reads the text format and re-derives every clause itself; it deliberately
does not import anything from the emitting side of the package.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass
class Verdict:
    ok: bool
    step: int = 0
    reason: str = ""

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "Accept" if self.ok else f"Reject(step {self.step}: {self.reason})"


class _Reject(Exception):
    def __init__(self, step, reason):
        self.step, self.reason = step, reason


def _fnv(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def cnf_fingerprint(nvars: int, clauses) -> str:
    parts = [f"p cnf {nvars} {len(clauses)}\n"]
    for c in clauses:
        parts.append("".join(f"{l} " for l in sorted(c, key=lambda l: (abs(l), l < 0))) + "0\n")
    return f"{_fnv(''.join(parts).encode('ascii')):016x}"


def _ref(tok, step):
    try:
        if "." in tok:
            a, b = tok.split(".")
            a, b = int(a), int(b)
            if b not in (1, 2, 3):
                raise _Reject(step, f"bad gate sub-clause {tok}")
            return a, b
        return int(tok), 0
    except ValueError:
        raise _Reject(step, f"bad reference {tok!r}") from None


def check_text(nvars: int, clauses, text: str, expect=None, want_empty=True) -> Verdict:
    """Check certificate text against an explicit clause list.

    expect: optional list of clauses the targets must derive (in order).
    want_empty: the last target must be the empty clause.
    """
    clauses = [tuple(c) for c in clauses]
    try:
        return _check(nvars, clauses, text, expect, want_empty)
    except _Reject as r:
        return Verdict(False, r.step, r.reason)


def _check(nvars, clauses, text, expect, want_empty):
    lines = text.split("\n")
    head = lines[0].split() if lines else []
    if len(head) != 5 or head[0] != "p" or head[1] != "ecert":
        raise _Reject(0, "bad header")
    try:
        hv, hc = int(head[2]), int(head[3])
    except ValueError:
        raise _Reject(0, "bad header numbers") from None
    if hv != nvars or hc != len(clauses):
        raise _Reject(0, f"header says {hv} vars/{hc} clauses, formula has {nvars}/{len(clauses)}")
    if head[4] != cnf_fingerprint(nvars, clauses):
        raise _Reject(0, "fingerprint mismatch")

    derived = [None]  # frozenset per step, or list of 3 (frozenset|None) for gates
    known = set(range(1, nvars + 1))
    seen = set()  # variables mentioned so far by steps
    for c in clauses:
        for l in c:
            seen.add(abs(l))
    targets = []
    sid = 0

    def fetch(tok, cur):
        i, k = _ref(tok, cur)
        if not 1 <= i < cur:
            raise _Reject(cur, f"reference {tok} does not precede step")
        d = derived[i]
        if isinstance(d, list):
            if k == 0:
                raise _Reject(cur, f"gate step {i} needs a sub-clause index")
            if d[k - 1] is None:
                raise _Reject(cur, f"gate clause {tok} is tautological")
            return d[k - 1]
        if k:
            raise _Reject(cur, f"step {i} is not a gate")
        return d

    def lit_ok(l, cur):
        if l == 0 or abs(l) not in known:
            raise _Reject(cur, f"literal {l} uses an undefined variable")

    for line in lines[1:]:
        t = line.split()
        if not t:
            continue
        if t[0] == "T":
            if len(t) != 2:
                raise _Reject(sid, "bad target line")
            try:
                ti = int(t[1])
            except ValueError:
                raise _Reject(sid, "bad target line") from None
            if not 1 <= ti <= sid or isinstance(derived[ti], list):
                raise _Reject(sid, f"target {t[1]} is not a derived clause")
            targets.append(ti)
            continue
        sid += 1
        kind = t[0]
        try:
            if kind == "A":
                if len(t) != 2:
                    raise _Reject(sid, "bad axiom line")
                i = int(t[1])
                if not 1 <= i <= len(clauses):
                    raise _Reject(sid, f"axiom index {i} out of range")
                derived.append(frozenset(clauses[i - 1]))
            elif kind == "R":
                if len(t) != 4:
                    raise _Reject(sid, "bad resolution line")
                a = fetch(t[1], sid)
                b = fetch(t[2], sid)
                p = int(t[3])
                if p <= 0:
                    raise _Reject(sid, "pivot must be a positive variable")
                if p in a and -p in b:
                    pos, neg = a, b
                elif -p in a and p in b:
                    pos, neg = b, a
                else:
                    raise _Reject(sid, f"bad pivot {p}")
                res = (pos - {p}) | (neg - {-p})
                for l in res:
                    if -l in res:
                        raise _Reject(sid, "tautological resolvent")
                derived.append(frozenset(res))
            elif kind in ("GA", "GO"):
                if len(t) != 4:
                    raise _Reject(sid, "bad gate line")
                v, l1, l2 = int(t[1]), int(t[2]), int(t[3])
                if v <= nvars or v in seen or v in known:
                    raise _Reject(sid, f"gate variable {v} is not fresh")
                lit_ok(l1, sid)
                lit_ok(l2, sid)
                if l1 == l2:
                    raise _Reject(sid, "gate inputs coincide")
                if kind == "GA":
                    cs = [{-v, l1}, {-v, l2}, {v, -l1, -l2}]
                else:
                    cs = [{v, -l1}, {v, -l2}, {-v, l1, l2}]
                derived.append([None if any(-x in c for x in c) else frozenset(c) for c in cs])
                known.add(v)
                seen.add(v)
            elif kind == "W":
                if len(t) < 3 or t[-1] != "0":
                    raise _Reject(sid, "bad weakening line")
                base = fetch(t[1], sid)
                add = [int(x) for x in t[2:-1]]
                for l in add:
                    lit_ok(l, sid)
                res = base | frozenset(add)
                for l in res:
                    if -l in res:
                        raise _Reject(sid, "tautological weakening")
                derived.append(res)
            else:
                raise _Reject(sid, f"unknown step kind {kind!r}")
        except ValueError:
            raise _Reject(sid, "malformed number") from None
    if not targets:
        raise _Reject(sid, "no targets")
    if expect is not None:
        if len(expect) != len(targets):
            raise _Reject(sid, f"expected {len(expect)} targets, found {len(targets)}")
        for ti, c in zip(targets, expect):
            if derived[ti] != frozenset(c):
                raise _Reject(ti, f"target derives {sorted(derived[ti])}, expected {sorted(c)}")
    if want_empty and derived[targets[-1]]:
        raise _Reject(targets[-1], "final target is not the empty clause")
    return Verdict(True)


def check_certificate(formula, cert, expect=None, want_empty=True) -> Verdict:
    """formula: object with .clauses and .nvars. cert: text or object with .to_text()."""
    text = cert if isinstance(cert, str) else cert.to_text()
    return check_text(formula.nvars, formula.clauses, text, expect, want_empty)
