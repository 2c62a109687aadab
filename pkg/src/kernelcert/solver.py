"""CDCL with resolution logging.

Every learned clause keeps a recipe [c0, (c1, pivot), (c2, pivot), ...]: start
from clause c0 and resolve in order. Recipes are replayed into a ProofBuilder
on demand, so only clauses needed for the final conflict are emitted.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

from .formula import Formula
from .proof import ListBuilder, ProofBuilder, RootBuilder


class SolverLimit(RuntimeError):
    pass


@dataclass
class Sat:
    model: dict

    def __bool__(self):
        return False


def _luby(i: int) -> int:
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class CDCL:
    def __init__(self, nvars: int, clauses=(), max_conflicts: int | None = None):
        self.n = nvars
        self.cl: list = []        # literal lists (watched ones first)
        self.orig: list = []      # ('P', tuple) premise | ('L', recipe)
        self.watches = [[] for _ in range(2 * nvars + 2)]
        self.val = [0] * (nvars + 1)
        self.level = [0] * (nvars + 1)
        self.reason = [None] * (nvars + 1)
        self.trail: list = []
        self.lim: list = []
        self.qhead = 0
        self.act = [0.0] * (nvars + 1)
        self.inc = 1.0
        self.phase = [False] * (nvars + 1)
        self.heap = [(0.0, v) for v in range(1, nvars + 1)]
        self.unit_of: dict = {}
        self.empty = None
        self.max_conflicts = max_conflicts
        self.conflicts = 0
        self._memo: dict = {}
        for c in clauses:
            self.add_clause(c)

    # -- basics
    def _w(self, lit):
        return 2 * lit if lit > 0 else -2 * lit + 1

    def value(self, lit):
        v = self.val[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    def _enqueue(self, lit, cid):
        v = abs(lit)
        self.val[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.lim)
        self.reason[v] = cid
        self.trail.append(lit)

    def _new(self, lits, origin):
        self.cl.append(lits)
        self.orig.append(origin)
        return len(self.cl) - 1

    def add_clause(self, clause):
        """Add a premise (only valid at decision level 0)."""
        if self.lim:
            self._backtrack(0)
        c = tuple(sorted(set(clause)))
        cid = self._new(list(c), ("P", c))
        if self.empty is not None:
            return cid
        lits = self.cl[cid]
        if not lits:
            self.empty = cid
            return cid
        # keep unassigned/true literals in the watch slots
        lits.sort(key=lambda l: 0 if self.value(l) >= 0 else 1)
        if len(lits) == 1 or self.value(lits[1]) < 0:
            if self.value(lits[0]) < 0:
                self.empty = self._level0_conflict(cid)
            elif self.value(lits[0]) == 0:
                self._enqueue(lits[0], cid)
                confl = self._propagate()
                if confl is not None:
                    self.empty = self._level0_conflict(confl)
        if len(lits) >= 2:
            self.watches[self._w(lits[0])].append(cid)
            self.watches[self._w(lits[1])].append(cid)
        return cid

    def _propagate(self):
        trail, cl, watches, val = self.trail, self.cl, self.watches, self.val
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            fl = -p
            ws = watches[2 * fl if fl > 0 else -2 * fl + 1]
            i = j = 0
            nw = len(ws)
            confl = None
            while i < nw:
                cid = ws[i]
                i += 1
                c = cl[cid]
                if c[0] == fl:
                    c[0], c[1] = c[1], fl
                f = c[0]
                fv = val[f] if f > 0 else -val[-f]
                if fv == 1:
                    ws[j] = cid
                    j += 1
                    continue
                found = False
                for k in range(2, len(c)):
                    l = c[k]
                    if (val[l] if l > 0 else -val[-l]) != -1:
                        c[1], c[k] = l, fl
                        watches[2 * l if l > 0 else -2 * l + 1].append(cid)
                        found = True
                        break
                if found:
                    continue
                ws[j] = cid
                j += 1
                if fv == -1:
                    confl = cid
                    while i < nw:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                else:
                    self._enqueue(f, cid)
            del ws[j:]
            if confl is not None:
                return confl
        return None

    # -- level-0 units as proof objects
    def _unit(self, v):
        """Clause id of the unit fixing v at level 0."""
        u = self.unit_of.get(v)
        if u is not None:
            return u
        r = self.reason[v]
        if len(self.cl[r]) == 1:
            self.unit_of[v] = r
            return r
        recipe = [r]
        for l in self.cl[r]:
            if abs(l) != v:
                recipe.append((self._unit(abs(l)), abs(l)))
        lit = v if self.val[v] > 0 else -v
        u = self._new([lit], ("L", recipe))
        self.unit_of[v] = u
        return u

    def _level0_conflict(self, cid):
        recipe = [cid] + [(self._unit(abs(l)), abs(l)) for l in self.cl[cid]]
        if len(recipe) == 1:
            return cid
        return self._new([], ("L", recipe))

    # -- heuristics
    def _bump(self, v):
        self.act[v] += self.inc
        if self.act[v] > 1e100:
            for u in range(1, self.n + 1):
                self.act[u] *= 1e-100
            self.inc *= 1e-100
            self.heap = [(-self.act[u], u) for u in range(1, self.n + 1) if self.val[u] == 0]
            heapq.heapify(self.heap)
        elif self.val[v] == 0:
            heapq.heappush(self.heap, (-self.act[v], v))

    def _pick(self):
        heap, val, act = self.heap, self.val, self.act
        while heap:
            a, v = heapq.heappop(heap)
            if val[v] == 0 and -a == act[v]:
                return v
        for v in range(1, self.n + 1):
            if val[v] == 0:
                return v
        return 0

    def _backtrack(self, lvl):
        if len(self.lim) <= lvl:
            return
        start = self.lim[lvl]
        heap, act = self.heap, self.act
        for lit in self.trail[start:]:
            v = abs(lit)
            self.phase[v] = lit > 0
            self.val[v] = 0
            self.reason[v] = None
            heapq.heappush(heap, (-act[v], v))
        del self.trail[start:]
        del self.lim[lvl:]
        self.qhead = start
        if len(heap) > 4 * self.n + 1000:
            self.heap = [(-act[u], u) for u in range(1, self.n + 1) if self.val[u] == 0]
            heapq.heapify(self.heap)

    # -- conflict analysis
    def _analyze(self, confl):
        seen = set()
        cur = len(self.lim)
        learnt = [0]
        recipe = [confl]
        zeros = []
        path = 0
        p = 0
        idx = len(self.trail) - 1
        c = self.cl[confl]
        while True:
            for q in c:
                v = abs(q)
                if v == p or v in seen:
                    continue
                seen.add(v)
                lv = self.level[v]
                if lv == 0:
                    zeros.append(v)
                    continue
                self._bump(v)
                if lv == cur:
                    path += 1
                else:
                    learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            lit = self.trail[idx]
            idx -= 1
            p = abs(lit)
            path -= 1
            if path == 0:
                learnt[0] = -lit
                break
            r = self.reason[p]
            recipe.append((r, p))
            c = self.cl[r]
        for v in zeros:
            recipe.append((self._unit(v), v))
        self.inc *= 1.0 / 0.95
        bt = 0
        if len(learnt) > 1:
            mi = max(range(1, len(learnt)), key=lambda i: self.level[abs(learnt[i])])
            learnt[1], learnt[mi] = learnt[mi], learnt[1]
            bt = self.level[abs(learnt[1])]
        return learnt, recipe, bt

    def _analyze_final(self, p):
        """p is an assumption made false; derive a clause over negated assumptions."""
        v0 = abs(p)
        if self.level[v0] == 0:
            return self._unit(v0)
        r0 = self.reason[v0]
        recipe = [r0]
        seen = set()
        zeros = []

        def mark(c, skip):
            for q in c:
                v = abs(q)
                if v == skip or v in seen:
                    continue
                seen.add(v)
                if self.level[v] == 0:
                    zeros.append(v)

        mark(self.cl[r0], v0)
        lits = [-p]
        for i in range(len(self.trail) - 1, self.lim[0] - 1, -1):
            x = self.trail[i]
            v = abs(x)
            if v not in seen or self.level[v] == 0:
                continue
            r = self.reason[v]
            if r is None:
                lits.append(-x)
            else:
                recipe.append((r, v))
                mark(self.cl[r], v)
        for v in zeros:
            recipe.append((self._unit(v), v))
        if len(recipe) == 1:
            return r0
        return self._new(sorted(lits), ("L", recipe))

    # -- search
    def solve(self, assumptions=()):
        """('sat', model) or ('unsat', clause-id); the clause is a subset of the
        negated assumptions (the empty clause when they play no role)."""
        if self.empty is not None:
            return "unsat", self.empty
        self._backtrack(0)
        assumptions = list(assumptions)
        restart = 0
        budget = 100 * _luby(restart)
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                budget -= 1
                if self.max_conflicts is not None and self.conflicts > self.max_conflicts:
                    raise SolverLimit(f"conflict cap {self.max_conflicts} reached "
                                      f"({len(self.cl)} clauses, {len(self.trail)} assigned)")
                if not self.lim:
                    self.empty = self._level0_conflict(confl)
                    return "unsat", self.empty
                learnt, recipe, bt = self._analyze(confl)
                self._backtrack(bt)
                cid = self._new(learnt, ("L", recipe))
                if len(learnt) == 1:
                    self.unit_of[abs(learnt[0])] = cid
                else:
                    self.watches[self._w(learnt[0])].append(cid)
                    self.watches[self._w(learnt[1])].append(cid)
                self._enqueue(learnt[0], cid)
                continue
            if budget <= 0:
                restart += 1
                budget = 100 * _luby(restart)
                self._backtrack(0)
                continue
            lvl = len(self.lim)
            if lvl < len(assumptions):
                a = assumptions[lvl]
                av = self.value(a)
                if av == 1:
                    self.lim.append(len(self.trail))
                    continue
                if av == -1:
                    cid = self._analyze_final(a)
                    self._backtrack(0)
                    return "unsat", cid
                self.lim.append(len(self.trail))
                self._enqueue(a, None)
                continue
            v = self._pick()
            if v == 0:
                model = {u: self.val[u] > 0 for u in range(1, self.n + 1)}
                self._backtrack(0)
                return "sat", model
            self.lim.append(len(self.trail))
            self._enqueue(v if self.phase[v] else -v, None)

    # -- proof emission
    def emit(self, cid, builder: ProofBuilder):
        memo = self._memo.setdefault(id(builder), {})
        if cid in memo:
            return memo[cid]
        stack = [cid]
        while stack:
            c = stack[-1]
            if c in memo:
                stack.pop()
                continue
            kind, data = self.orig[c]
            if kind == "P":
                memo[c] = builder.need(data)
                stack.pop()
                continue
            missing = [d for d in ([data[0]] + [x for x, _ in data[1:]]) if d not in memo]
            if missing:
                stack.extend(missing)
                continue
            r = memo[data[0]]
            for x, piv in data[1:]:
                r = builder.resolve(r, memo[x], piv)
            memo[c] = r
            stack.pop()
        return memo[cid]


def refute(builder: ProofBuilder, nvars: int, clauses, max_conflicts=None):
    """Refute clauses (all available in builder); returns the ref of the empty clause or Sat."""
    s = CDCL(nvars, clauses, max_conflicts)
    res, data = s.solve()
    if res == "sat":
        return Sat(data)
    return s.emit(data, builder)


def refute_kernel(formula: Formula, max_conflicts: int | None = 2_000_000):
    """Resolution refutation of formula, or Sat(model)."""
    b = RootBuilder(formula)
    r = refute(b, formula.nvars, formula.clauses, max_conflicts)
    if isinstance(r, Sat):
        return r
    return b.finish([r])


def refute_clauses(nvars: int, clauses, max_conflicts=None):
    b = ListBuilder(nvars, clauses)
    r = refute(b, nvars, b.premises, max_conflicts)
    if isinstance(r, Sat):
        return r
    return b.finish([r])


def is_sat(nvars: int, clauses) -> bool:
    return CDCL(nvars, clauses).solve()[0] == "sat"


class ClauseDeriver:
    """Derives target clauses from a fixed premise set inside a builder.

    Each target is refuted under the negation of its literals; the resulting
    clause (a subclause of the target) is weakened up to the target."""

    def __init__(self, builder: ProofBuilder, nvars: int, premises, max_conflicts=None):
        self.b = builder
        self._args = (nvars, premises, max_conflicts)
        self.s = None  # built on first use; many targets are plain lookups

    def derive(self, target):
        target = tuple(sorted(target))
        r = self.b.get(target)
        if r is not None:
            return r
        if self.s is None:
            self.s = CDCL(*self._args)
        res, data = self.s.solve([-l for l in target])
        if res == "sat":
            raise ValueError(f"clause {target} does not follow from the premises")
        r = self.s.emit(data, self.b)
        return self.b.weaken(r, target)
