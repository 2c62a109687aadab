"""Extended-resolution certificates: data model, text format, building, splicing,
the deduction transform and size accounting.

Step tuples:
    ('A', i)                 axiom, 1-based index into the premise list
    ('R', r1, r2, pivot)     resolution; refs are ints or (id, k) for gate sub-clauses
    ('GA', v, l1, l2)        v <-> l1 & l2
    ('GO', v, l1, l2)        v <-> l1 | l2
    ('W', r, lits)           weakening by the added literals
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

from .formula import Formula, fingerprint, fnv1a64, var_order

TOP = None


class ProofError(ValueError):
    pass


def resolve_clauses(c1, c2, pivot: int) -> tuple:
    p = abs(pivot)
    if p in c1 and -p in c2:
        a, b = c1, c2
    elif -p in c1 and p in c2:
        a, b = c2, c1
    else:
        raise ProofError(f"pivot {p} does not clash between {c1} and {c2}")
    out = set(a)
    out.discard(p)
    for l in b:
        if l == -p:
            continue
        if -l in out:
            raise ProofError(f"resolvent on {p} is tautological (literal {l})")
        out.add(l)
    return tuple(sorted(out))


def gate_clauses(kind: str, v: int, l1: int, l2: int):
    """The three defining clauses; a tautological third clause is returned as None."""
    if kind == "GA":
        cs = [(-v, l1), (-v, l2), (v, -l1, -l2)]
    else:
        cs = [(v, -l1), (v, -l2), (-v, l1, l2)]
    out = []
    for c in cs:
        s = set(c)
        out.append(None if any(-l in s for l in s) else tuple(sorted(s)))
    return out


def ref_str(r) -> str:
    return f"{r[0]}.{r[1]}" if isinstance(r, tuple) else str(r)


def parse_ref(tok: str):
    if "." in tok:
        a, b = tok.split(".")
        return (int(a), int(b))
    return int(tok)


def step_weight(step) -> int:
    return 3 if step[0] in ("GA", "GO") else 1


@dataclass
class Certificate:
    nvars: int
    nclauses: int
    fingerprint: str
    steps: list = field(default_factory=list)
    targets: list = field(default_factory=list)
    labels: list | None = None

    def step_count(self) -> int:
        return sum(step_weight(s) for s in self.steps)

    def ext_vars(self) -> int:
        return sum(1 for s in self.steps if s[0] in ("GA", "GO"))

    def to_text(self) -> str:
        out = io.StringIO()
        out.write(f"p ecert {self.nvars} {self.nclauses} {self.fingerprint}\n")
        for s in self.steps:
            k = s[0]
            if k == "A":
                out.write(f"A {s[1]}\n")
            elif k == "R":
                out.write(f"R {ref_str(s[1])} {ref_str(s[2])} {s[3]}\n")
            elif k in ("GA", "GO"):
                out.write(f"{k} {s[1]} {s[2]} {s[3]}\n")
            else:
                lits = " ".join(map(str, s[2]))
                out.write(f"W {ref_str(s[1])} {lits} 0\n" if lits else f"W {ref_str(s[1])} 0\n")
        for t in self.targets:
            out.write(f"T {t}\n")
        return out.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "Certificate":
        lines = text.splitlines()
        if not lines:
            raise ProofError("empty certificate")
        head = lines[0].split()
        if len(head) != 5 or head[:2] != ["p", "ecert"]:
            raise ProofError(f"line 1: bad header {lines[0]!r}")
        cert = cls(int(head[2]), int(head[3]), head[4])
        for no, line in enumerate(lines[1:], 2):
            t = line.split()
            if not t:
                continue
            try:
                if t[0] == "A":
                    cert.steps.append(("A", int(t[1])))
                elif t[0] == "R":
                    cert.steps.append(("R", parse_ref(t[1]), parse_ref(t[2]), int(t[3])))
                elif t[0] in ("GA", "GO"):
                    cert.steps.append((t[0], int(t[1]), int(t[2]), int(t[3])))
                elif t[0] == "W":
                    if t[-1] != "0":
                        raise ValueError("unterminated weakening")
                    cert.steps.append(("W", parse_ref(t[1]), tuple(int(x) for x in t[2:-1])))
                elif t[0] == "T":
                    cert.targets.append(int(t[1]))
                else:
                    raise ValueError(f"unknown step kind {t[0]!r}")
            except (ValueError, IndexError) as e:
                raise ProofError(f"line {no}: {e}") from None
        return cert


def replay(premises, steps):
    """Clause of every step (gates give a 3-list). Emitter-side helper, not a checker."""
    out = [None]

    def get(r):
        if isinstance(r, tuple):
            c = out[r[0]][r[1] - 1]
            if c is None:
                raise ProofError(f"gate clause {ref_str(r)} is tautological")
            return c
        return out[r]

    for s in steps:
        k = s[0]
        if k == "A":
            out.append(tuple(premises[s[1] - 1]))
        elif k == "R":
            out.append(resolve_clauses(get(s[1]), get(s[2]), s[3]))
        elif k in ("GA", "GO"):
            out.append(gate_clauses(k, s[1], s[2], s[3]))
        else:
            out.append(tuple(sorted(set(get(s[1])) | set(s[2]))))
    return out


# ---------------------------------------------------------------- building


class VarPool:
    def __init__(self, start: int):
        self.next = start

    def fresh(self) -> int:
        v = self.next
        self.next += 1
        return v


class ProofBuilder:
    """Emits steps lazily; clauses are linked by content through `ctx`."""

    def __init__(self, pool: VarPool, label: str = "main"):
        self.pool = pool
        self.steps: list = []
        self.labels: list = []
        self.clauses: list = [None]
        self.ctx: dict = {}
        self.label = label

    # premise interface, overridden by subclasses
    def premise_has(self, clause) -> bool:
        return False

    def premise_emit(self, clause):
        raise ProofError(f"clause {clause} is not available")

    def has(self, clause) -> bool:
        return clause in self.ctx or self.premise_has(clause)

    def need(self, clause):
        clause = tuple(sorted(clause))
        r = self.ctx.get(clause)
        if r is None:
            if not self.premise_has(clause):
                raise ProofError(f"clause {clause} is not available")
            r = self.premise_emit(clause)
        return r

    def get(self, clause):
        clause = tuple(sorted(clause))
        if self.has(clause):
            return self.need(clause)
        return None

    def clause(self, r):
        if isinstance(r, tuple):
            return self.clauses[r[0]][r[1] - 1]
        return self.clauses[r]

    def _push(self, step, clause) -> int:
        self.steps.append(step)
        self.labels.append(self.label)
        self.clauses.append(clause)
        return len(self.steps)

    def axiom(self, idx: int, clause) -> int:
        sid = self._push(("A", idx), clause)
        self.ctx.setdefault(clause, sid)
        return sid

    def resolve(self, r1, r2, pivot: int | None = None):
        c1, c2 = self.clause(r1), self.clause(r2)
        if pivot is None:
            s2 = set(c2)
            clash = [abs(l) for l in c1 if -l in s2]
            if len(clash) != 1:
                raise ProofError(f"no unique pivot between {c1} and {c2}")
            pivot = clash[0]
        c = resolve_clauses(c1, c2, pivot)
        old = self.ctx.get(c)
        if old is not None:
            return old
        sid = self._push(("R", r1, r2, abs(pivot)), c)
        self.ctx[c] = sid
        return sid

    def chain(self, r, others):
        """Resolve r successively with each ref in others (pivot auto-detected)."""
        for o in others:
            r = self.resolve(r, o)
        return r

    def gate(self, kind: str, l1: int, l2: int, v: int | None = None) -> int:
        if v is None:
            v = self.pool.fresh()
        cs = gate_clauses(kind, v, l1, l2)
        sid = self._push((kind, v, l1, l2), cs)
        for k, c in enumerate(cs, 1):
            if c is not None:
                self.ctx.setdefault(c, (sid, k))
        return v

    def gate_and(self, l1, l2, v=None) -> int:
        return self.gate("GA", l1, l2, v)

    def gate_or(self, l1, l2, v=None) -> int:
        return self.gate("GO", l1, l2, v)

    def weaken(self, r, target):
        target = tuple(sorted(target))
        c = self.clause(r)
        if c == target:
            return r
        old = self.ctx.get(target)
        if old is not None:
            return old
        extra = tuple(sorted(set(target) - set(c)))
        if not set(c) <= set(target):
            raise ProofError(f"{c} is not a subclause of {target}")
        sid = self._push(("W", r, extra), target)
        self.ctx[target] = sid
        return sid

    def splice(self, cert: Certificate, premises, rename: dict | None = None, keep_labels=False):
        """Re-emit cert here. Premise i is looked up by content (after renaming);
        gate variables of cert get fresh variables when a rename map is given.
        Returns (target refs, rename)."""
        rename = dict(rename) if rename is not None else None
        labels = cert.labels if keep_labels and cert.labels else None
        saved = self.label

        def rl(l):
            if rename is None:
                return l
            v = rename.get(abs(l))
            if v is None:
                raise ProofError(f"variable {abs(l)} has no image")
            return v if l > 0 else -v

        m = [None]

        def mr(r):
            return (m[r[0]], r[1]) if isinstance(r, tuple) else m[r]

        try:
            for i, s in enumerate(cert.steps):
                if labels is not None:
                    self.label = labels[i]
                k = s[0]
                if k == "A":
                    m.append(self.need(tuple(sorted(rl(l) for l in premises[s[1] - 1]))))
                elif k == "R":
                    m.append(self.resolve(mr(s[1]), mr(s[2]), abs(rl(s[3]))))
                elif k in ("GA", "GO"):
                    if rename is not None:
                        rename[s[1]] = self.pool.fresh()
                    self.gate(k, rl(s[2]), rl(s[3]), rl(s[1]))
                    m.append(len(self.steps))
                else:
                    base = mr(s[1])
                    m.append(self.weaken(base, set(self.clause(base)) | {rl(l) for l in s[2]}))
        finally:
            self.label = saved
        return [mr(t) for t in cert.targets], rename

    def certificate(self, nvars, nclauses, fp, targets) -> Certificate:
        return Certificate(nvars, nclauses, fp, list(self.steps), list(targets), list(self.labels))


class RootBuilder(ProofBuilder):
    """Builder whose premises are the clauses of a formula."""

    def __init__(self, formula: Formula, pool: VarPool | None = None, label="main"):
        super().__init__(pool or VarPool(formula.nvars + 1), label)
        self.formula = formula
        self.index = {}
        for i, c in enumerate(formula.clauses, 1):
            self.index.setdefault(tuple(c), i)

    def premise_has(self, clause):
        return clause in self.index

    def premise_emit(self, clause):
        return self.axiom(self.index[clause], clause)

    def finish(self, targets) -> Certificate:
        f = self.formula
        return self.certificate(f.nvars, len(f.clauses), fingerprint(f), targets)


class ListBuilder(ProofBuilder):
    """Builder over an explicit premise list (fragments checked in isolation)."""

    def __init__(self, nvars: int, premises, pool: VarPool | None = None, label="main"):
        super().__init__(pool or VarPool(nvars + 1), label)
        self.nvars = nvars
        self.premises = [tuple(sorted(c)) for c in premises]
        self.index = {}
        for i, c in enumerate(self.premises, 1):
            self.index.setdefault(c, i)

    def premise_has(self, clause):
        return clause in self.index

    def premise_emit(self, clause):
        return self.axiom(self.index[clause], clause)

    def finish(self, targets) -> Certificate:
        return self.certificate(self.nvars, len(self.premises),
                                premise_fingerprint(self.nvars, self.premises), targets)


class NestedBuilder(ProofBuilder):
    """Builder whose premises are whatever the parent can provide plus assumed units.
    Premises are collected in first-use order; `close` turns the refutation into a
    derivation of the negated assumptions and splices it into the parent."""

    def __init__(self, parent: ProofBuilder, assumed, label=None):
        super().__init__(parent.pool, parent.label if label is None else label)
        self.parent = parent
        self.assumed = [int(z) for z in assumed]
        self.zset = {(z,) for z in self.assumed}
        self.used: list = []
        self.uindex: dict = {}

    def premise_has(self, clause):
        return clause in self.zset or self.parent.has(clause)

    def premise_emit(self, clause):
        i = self.uindex.get(clause)
        if i is None:
            self.used.append(clause)
            i = self.uindex[clause] = len(self.used)
        return self.axiom(i, clause)

    def close(self, empty_ref):
        """Derive the clause of negated assumptions in the parent; returns its parent ref."""
        if self.clause(empty_ref) != ():
            raise ProofError("nested builder did not reach the empty clause")
        base = [c for c in self.used if c not in self.zset]
        order = {c: i for i, c in enumerate(base, 1)}
        zpos = {(z,): len(base) + j for j, z in enumerate(self.assumed, 1)}
        steps = []
        for s in self.steps:
            if s[0] == "A":
                c = self.used[s[1] - 1]
                steps.append(("A", zpos[c] if c in zpos else order[c]))
            else:
                steps.append(s)
        cert = Certificate(0, len(base) + len(self.assumed), "", steps, [empty_ref], list(self.labels))
        out = deduction_transform(base, self.assumed, cert)
        refs, _ = self.parent.splice(out, base, keep_labels=True)
        negz = tuple(sorted(-z for z in self.assumed))
        saved, self.parent.label = self.parent.label, "glue"
        try:
            return self.parent.weaken(refs[0], negz)
        finally:
            self.parent.label = saved


def premise_fingerprint(nvars: int, premises) -> str:
    out = io.StringIO()
    out.write(f"p cnf {nvars} {len(premises)}\n")
    for c in premises:
        out.write(" ".join(map(str, sorted(c, key=var_order))))
        out.write(" 0\n" if c else "0\n")
    return f"{fnv1a64(out.getvalue().encode('ascii')):016x}"


# ---------------------------------------------------------- deduction transform


def deduction_transform(premises, assumed, cert: Certificate) -> Certificate:
    """Turn a refutation of premises + assumed units (appended as axioms
    len(premises)+1..) into a derivation of the clause of negated assumptions
    from premises alone. Never emits more steps than the input has."""
    m0 = len(premises)
    assumed = [int(z) for z in assumed]
    zs = set(assumed)
    if any(-z in zs for z in zs):
        raise ProofError("assumed literals are contradictory")
    if len(zs) != len(assumed):
        raise ProofError("assumed literals repeat")
    allp = [tuple(c) for c in premises] + [(z,) for z in assumed]
    clauses = replay(allp, cert.steps)
    if not cert.targets or clauses[cert.targets[-1]] != ():
        raise ProofError("input certificate is not a refutation")
    labels = cert.labels or ["main"] * len(cert.steps)
    negz = tuple(sorted(-z for z in assumed))

    out_steps: list = []
    out_labels: list = []
    out_clauses: list = [None]
    lift: list = [None]  # per input step: out ref, TOP, or for gates the out step id

    def emit(step, clause, lab):
        out_steps.append(step)
        out_labels.append(lab)
        out_clauses.append(clause)
        return len(out_steps)

    def L(r):
        if isinstance(r, tuple):
            return (lift[r[0]], r[1])
        return lift[r]

    def oc(r):
        if isinstance(r, tuple):
            return out_clauses[r[0]][r[1] - 1]
        return out_clauses[r]

    def in_clause(r):
        if isinstance(r, tuple):
            return clauses[r[0]][r[1] - 1]
        return clauses[r]

    def has_z(c):
        return any(l in zs for l in c)

    for sid, s in enumerate(cert.steps, 1):
        k, lab = s[0], labels[sid - 1]
        if k == "A":
            if s[1] > m0:
                lift.append(TOP)
            else:
                lift.append(emit(s, allp[s[1] - 1], lab))
        elif k in ("GA", "GO"):
            lift.append(emit(s, gate_clauses(k, s[1], s[2], s[3]), lab))
        elif k == "W":
            lift.append(L(s[1]))
        else:
            p, q, piv = s[1], s[2], s[3]
            cr = clauses[sid]
            lp_ = L(p)
            lq_ = L(q)
            cp = in_clause(p)
            lp = piv if piv in cp else -piv
            lq = -lp
            if lp_ is TOP and lq_ is TOP:
                lift.append(TOP)
                continue
            if lp_ is TOP or lq_ is TOP:
                if has_z(cr):
                    lift.append(TOP)
                else:
                    lift.append(lq_ if lp_ is TOP else lp_)
                continue
            dp, dq = oc(lp_), oc(lq_)
            if lp not in dp:
                lift.append(lp_)
            elif lq not in dq:
                lift.append(lq_)
            else:
                try:
                    c = resolve_clauses(dp, dq, piv)
                except ProofError:
                    lift.append(TOP)
                    continue
                lift.append(emit(("R", lp_, lq_, piv), c, lab))
    final = lift[cert.targets[-1]]
    if final is TOP:
        raise ProofError("final lift is trivial; input was not a refutation")
    fc = oc(final)
    if not set(fc) <= set(negz):
        raise ProofError("lifted clause escapes the negated assumptions")
    # prune to what the final step needs
    need = set()
    stack = [final[0] if isinstance(final, tuple) else final]
    while stack:
        i = stack.pop()
        if i in need:
            continue
        need.add(i)
        s = out_steps[i - 1]
        if s[0] == "R":
            for r in (s[1], s[2]):
                stack.append(r[0] if isinstance(r, tuple) else r)
        elif s[0] == "W":
            stack.append(s[1][0] if isinstance(s[1], tuple) else s[1])
    newid = {}
    steps, labs = [], []
    for i in range(1, len(out_steps) + 1):
        if i not in need:
            continue
        s = out_steps[i - 1]

        def nr(r):
            return (newid[r[0]], r[1]) if isinstance(r, tuple) else newid[r]

        if s[0] == "R":
            s = ("R", nr(s[1]), nr(s[2]), s[3])
        elif s[0] == "W":
            s = ("W", nr(s[1]), s[2])
        steps.append(s)
        labs.append(out_labels[i - 1])
        newid[i] = len(steps)
    tgt = (newid[final[0]], final[1]) if isinstance(final, tuple) else newid[final]
    # widen to the exact negated clause when the budget allows (always the case
    # once an assumption was used, since assumption axioms emit nothing)
    budget = cert.step_count() - sum(step_weight(x) for x in steps)
    if (fc != negz or isinstance(tgt, tuple)) and budget >= 1:
        steps.append(("W", tgt, tuple(sorted(set(negz) - set(fc)))))
        labs.append("glue")
        tgt = len(steps)
    elif isinstance(tgt, tuple):
        raise ProofError("conclusion is a bare gate clause and no budget is left to expose it")
    return Certificate(cert.nvars, m0, premise_fingerprint(cert.nvars, premises) if cert.nvars else "",
                       steps, [tgt], labs)


# ---------------------------------------------------------- size accounting


@dataclass
class SizeReport:
    step_count: int
    ext_vars: int
    subtotals: dict
    R: int = 1
    C: int = 0
    steps_gate_as_one: int = 0
    kernel_sizes: list = field(default_factory=list)

    def consistent(self) -> bool:
        return sum(self.subtotals.values()) == self.step_count


def size_report(cert: Certificate, R=1, C=0, kernel_sizes=()) -> SizeReport:
    sub: dict = {}
    labels = cert.labels or ["main"] * len(cert.steps)
    for s, lab in zip(cert.steps, labels):
        sub[lab] = sub.get(lab, 0) + step_weight(s)
    return SizeReport(cert.step_count(), cert.ext_vars(), dict(sorted(sub.items())), R, C,
                      len(cert.steps), list(kernel_sizes))


SATURATE = 2 ** 63 - 1


def bound_evaluate(report, h: float, g_pow: float, R: int, C: int):
    """(sum_{i<=C} R^i) * (h + 2^g). Returns (value, saturated)."""
    if R < 0 or C < 0:
        raise ProofError("R and C must be nonnegative")
    geo = C + 1 if R == 1 else (R ** (C + 1) - 1) // (R - 1) if R > 1 else 1
    val = geo * (h + g_pow)
    if val > SATURATE:
        return SATURATE, True
    return val, False
