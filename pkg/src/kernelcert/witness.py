"""Certificate fragments witnessing reduction steps, kernel refutations and their composition.

A fragment for a step parent -> child is an extended-resolution derivation whose
premises are the parent clauses (plus shared gate definitions and side-condition
units) and whose targets are the images of the child clauses under a substitution
tau: child variable -> piece variable. Composition replays fragments inside one
builder over the root formula, so a child's clauses are available by content.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx

from . import social
from .checker import check_text
from .formula import Formula
from .proof import (Certificate, ListBuilder, NestedBuilder, ProofBuilder, RootBuilder,
                    premise_fingerprint, size_report)
from .solver import CDCL, ClauseDeriver, Sat, refute


class WitnessError(RuntimeError):
    pass


class FragmentUnavailable(WitnessError):
    """The construction's preconditions fail on this step; the engine falls back."""


# ---------------------------------------------------------------- gate helper


class _Const:
    def __init__(self, val):
        self.val = val

    def __repr__(self):
        return "TRUE" if self.val else "FALSE"


TRUE, FALSE = _Const(True), _Const(False)


class Gates:
    """Fanin-2 definitions with constant folding. Every clause it introduces is kept in
    `clauses` so a refuter can be pointed at premises + definitions."""

    def __init__(self, b: ProofBuilder):
        self.b = b
        self.clauses: list = []
        self.defs: dict = {}  # var -> (kind, l1, l2)
        self.owned: set = set()
        self.claimed: set = set()
        self._cache: dict = {}
        self._true = None

    def _new(self, kind, l1, l2, cache=True):
        key = (kind, min(l1, l2), max(l1, l2))
        if cache and key in self._cache:
            return self._cache[key]
        v = self.b.gate(kind, l1, l2)
        self.defs[v] = (kind, l1, l2)
        self.owned.add(v)
        sid = len(self.b.steps)
        for c in self.b.clauses[sid]:
            if c is not None:
                self.clauses.append(c)
        if cache:
            self._cache[key] = v
        return v

    def true_lit(self):
        if self._true is None:
            self._true = self._new("GO", 1, -1)
        return self._true

    def lit(self, x):
        if x is TRUE:
            return self.true_lit()
        if x is FALSE:
            return -self.true_lit()
        return x

    @staticmethod
    def neg(x):
        if isinstance(x, _Const):
            return FALSE if x.val else TRUE
        return -x

    def AND(self, a, b):
        if a is FALSE or b is FALSE:
            return FALSE
        if a is TRUE:
            return b
        if b is TRUE:
            return a
        if a == b:
            return a
        if a == -b:
            return FALSE
        return self._new("GA", a, b)

    def OR(self, a, b):
        if a is TRUE or b is TRUE:
            return TRUE
        if a is FALSE:
            return b
        if b is FALSE:
            return a
        if a == b:
            return a
        if a == -b:
            return TRUE
        return self._new("GO", a, b)

    def and_all(self, xs):
        out = TRUE
        for x in xs:
            out = self.AND(out, x)
        return out

    def or_all(self, xs):
        out = FALSE
        for x in xs:
            out = self.OR(out, x)
        return out

    def fresh(self, x) -> int:
        """A new variable equivalent to x (constant or literal)."""
        t = self.true_lit()
        if x is TRUE:
            return self._new("GO", t, 1 if t != 1 else 2, cache=False)
        if x is FALSE:
            return self._new("GA", -t, 1 if t != 1 else 2, cache=False)
        return self._new("GA", x, t, cache=False)

    def claim(self, x) -> int:
        """A positive variable equivalent to x, distinct from every earlier claim."""
        if not isinstance(x, _Const) and x > 0 and x in self.owned and x not in self.claimed:
            self.claimed.add(x)
            return x
        v = self.fresh(x)
        self.claimed.add(v)
        return v

    def counter(self, inputs, tmax):
        """Sequential counter: S[t] is 'at least t of inputs hold' for 0 <= t <= tmax."""
        S = [TRUE] + [FALSE] * tmax
        for x in inputs:
            for t in range(tmax, 0, -1):
                S[t] = self.OR(S[t], self.AND(x, S[t - 1]))
        return S

    def exactly(self, S, t):
        """'exactly t' from a counter built with tmax > t."""
        return self.AND(S[t], self.neg(S[t + 1]))

    # derivations over definitions
    def expand_or(self, o, leaves):
        """Derive (-o v leaves...) by unwinding the OR definitions below o."""
        leaves = set(leaves)
        kind, l1, l2 = self.defs[o]
        if kind != "GO":
            raise WitnessError(f"{o} is not an OR gate")
        r = self.b.need((-o, l1, l2) if l1 != l2 else (-o, l1))
        for l in (l1, l2):
            if l not in leaves and l > 0 and l in self.defs and self.defs[l][0] == "GO":
                r = self.b.resolve(r, self.expand_or(l, leaves), l)
        return r

    def and_units(self, unit_ref, o, leaves):
        """From the unit (o) derive units for every leaf below a tree of AND gates."""
        leaves = set(leaves)
        out = {}
        stack = [(o, unit_ref)]
        while stack:
            x, ref = stack.pop()
            if x in leaves or not (x > 0 and x in self.defs and self.defs[x][0] == "GA"):
                out[x] = ref
                continue
            _, l1, l2 = self.defs[x]
            for l in (l1, l2):
                stack.append((l, self.b.resolve(ref, self.b.need((-x, l)), x)))
        return out


# ---------------------------------------------------------------- pigeonhole


def php_clauses(p, h, x):
    """Pigeon and hole clauses over x[(i, j)], pigeons 1..p, holes 1..h."""
    out = [tuple(sorted(x[i, j] for j in range(1, h + 1))) for i in range(1, p + 1)]
    for j in range(1, h + 1):
        for a, b in itertools.combinations(range(1, p + 1), 2):
            out.append(tuple(sorted((-x[a, j], -x[b, j]))))
    return out


def php_into(b: ProofBuilder, pigeons, holes, x):
    """Refute PHP inside b (pigeon clauses over `holes` and hole clauses available);
    returns the ref of the empty clause. Case split on the last pigeon's hole."""
    pigeons, holes = list(pigeons), list(holes)
    last = pigeons[-1]
    if not holes:
        return b.need(())
    units = []
    for j in holes:
        nb = NestedBuilder(b, [x[last, j]])
        hj = [h for h in holes if h != j]
        for i in pigeons[:-1]:
            no = nb.resolve(nb.need((-x[i, j], -x[last, j])), nb.need((x[last, j],)), x[last, j])
            nb.resolve(nb.need(tuple(sorted(x[i, h] for h in holes))), no, x[i, j])
            if not hj:
                break
        units.append(nb.close(php_into(nb, pigeons[:-1], hj, x)))
    return b.chain(b.need(tuple(sorted(x[last, j] for j in holes))), units)


def emit_php_refutation(p, h, varmap=None) -> Certificate:
    """Resolution refutation of PHP with p pigeons and h holes."""
    if not (p > h >= 1):
        raise WitnessError(f"PHP needs p > h >= 1 (p={p}, h={h})")
    x = varmap or {(i, j): (i - 1) * h + j for i in range(1, p + 1) for j in range(1, h + 1)}
    prem = php_clauses(p, h, x)
    b = ListBuilder(max(x.values()), prem)
    return b.finish([php_into(b, range(1, p + 1), range(1, h + 1), x)])


# ---------------------------------------------------------------- counting gadget


def emit_count_gadget(inputs, t, builder=None):
    """(output literal, certificate of definition steps) for 'at least t of inputs'."""
    if t > len(inputs):
        raise WitnessError("threshold larger than the number of inputs")
    b = builder or ListBuilder(max([abs(l) for l in inputs] + [1]), [])
    g = Gates(b)
    out = g.lit(g.counter(list(inputs), t)[t])
    cert = Certificate(b.pool.next - 1, 0, "", list(b.steps), [], list(b.labels))
    return out, cert


def evaluate_definitions(steps, assignment):
    """Extend a full input assignment through gate definitions (forward propagation)."""
    val = dict(assignment)

    def v(l):
        return val[abs(l)] if l > 0 else not val[abs(l)]

    for s in steps:
        if s[0] == "GA":
            val[s[1]] = v(s[2]) and v(s[3])
        elif s[0] == "GO":
            val[s[1]] = v(s[2]) or v(s[3])
    return val


# ---------------------------------------------------------------- fragments


@dataclass
class WitnessFragment:
    rule: str
    nvars: int
    premises: list  # parent clauses, shared definitions, side units (piece variables)
    side: list  # side-condition unit literals among the premises
    cert: Certificate  # targets = images of the child clauses, in child order
    tau: dict  # child variable -> piece variable
    child: Formula
    images: list
    refutes_premises: bool = False  # the derivation passed through the empty clause

    @property
    def fingerprint(self):
        return premise_fingerprint(self.nvars, self.premises)

    @property
    def step_count(self):
        return self.cert.step_count()

    @property
    def ext_vars(self):
        return self.cert.ext_vars()

    def check(self):
        return check_text(self.nvars, self.premises, self.cert.to_text(),
                          expect=self.images, want_empty=False)

    def audit(self):
        """Image of the child encoding under tau equals the derived target set."""
        return self.images == image_clauses(self.child, self.tau)

    def fresh_ok(self, reserved=()):
        """Extension variables are above the premise variables and pairwise distinct."""
        vs = [s[1] for s in self.cert.steps if s[0] in ("GA", "GO")]
        return len(set(vs)) == len(vs) and all(v > self.nvars for v in vs) and not set(vs) & set(reserved)


@dataclass
class StepWitness:
    step: object
    shared: list = field(default_factory=list)  # gate steps over the parent variables
    nvars: int = 0  # parent variables + shared definition variables
    shared_clauses: list = field(default_factory=list)
    fragments: list = field(default_factory=list)  # one per branch
    sides: list = field(default_factory=list)  # per branch: side-condition unit literals
    cover: Certificate | None = None  # refutes parent + shared + negated sides
    cover_premises: list = field(default_factory=list)
    partial: bool = False
    note: str = ""

    def check(self):
        """Checker verdicts for every fragment and the covering refutation."""
        out = [f.check() for f in self.fragments]
        if self.cover is not None:
            out.append(check_text(self.nvars, self.cover_premises, self.cover.to_text()))
        return out


@dataclass
class Partial:
    step: object
    reason: str
    semantic_check: dict | None = None


def lit_image(l, tau):
    v = tau[abs(l)]
    return v if l > 0 else -v


def image_clauses(child: Formula, tau):
    return [tuple(sorted(lit_image(l, tau) for l in c)) for c in child.clauses]


class LocalDeriver:
    """Derives clauses from premises by proof-logging CDCL over a small window of them.

    The window starts with the premises over the target's variables (closed downwards
    through gate definitions) and widens only when that fails: with unit facts, then with
    every premise touching the window, then everything. Keeping the window small stops
    the search from refuting an unsatisfiable premise set wholesale."""

    def __init__(self, b: ProofBuilder, premises, defs=None, max_conflicts=2_000_000):
        self.b = b
        self.prem = list(dict.fromkeys(tuple(sorted(c)) for c in premises))
        self.defs = defs or {}
        self.max_conflicts = max_conflicts
        self.by_var: dict = {}
        self.units = set()
        for i, c in enumerate(self.prem):
            for l in c:
                self.by_var.setdefault(abs(l), []).append(i)
            if len(c) == 1:
                self.units.add(i)
        self.unit_vars = {abs(self.prem[i][0]) for i in self.units}
        self._solvers: dict = {}
        self.levels_used: dict = {}

    def _closure(self, vs):
        out, stack = set(), list(vs)
        while stack:
            v = stack.pop()
            if v in out:
                continue
            out.add(v)
            d = self.defs.get(v)
            if d is not None:
                stack.extend((abs(d[1]), abs(d[2])))
        return out

    def _window(self, V, level):
        if level == 3:
            return tuple(range(len(self.prem)))
        touch = {i for v in V for i in self.by_var.get(v, ())}
        if level == 0:
            ids = {i for i in touch if all(abs(l) in V for l in self.prem[i])}
        elif level == 1:
            W = V | self.unit_vars
            ids = {i for i in touch if all(abs(l) in W for l in self.prem[i])}
            used = {abs(l) for i in ids for l in self.prem[i]}
            ids |= {i for i in self.units if abs(self.prem[i][0]) in used}
        else:
            ids = touch | self.units
        return tuple(sorted(ids))

    def derive(self, target):
        target = tuple(sorted(target))
        r = self.b.get(target)
        if r is not None:
            return r
        V = self._closure(abs(l) for l in target)
        last = None
        for level in range(4):
            ids = self._window(V, level)
            if ids == last:
                continue
            last = ids
            s = self._solvers.get(ids)
            if s is None:
                nv = max(self.b.pool.next - 1, max(self.by_var, default=1))
                s = self._solvers[ids] = CDCL(nv, [self.prem[i] for i in ids], self.max_conflicts)
            res, data = s.solve([-l for l in target])
            if res == "unsat":
                self.levels_used[level] = self.levels_used.get(level, 0) + 1
                return self.b.weaken(s.emit(data, self.b), target)
        raise WitnessError(f"clause {target} does not follow from the premises")


class _Piece:
    """Builder over parent clauses + extra premises, with a gate helper and a local deriver."""

    def __init__(self, parent: Formula, extra=(), nvars=None):
        self.premises = list(parent.clauses) + [tuple(sorted(c)) for c in extra]
        self.nvars = nvars if nvars is not None else parent.nvars
        self.b = ListBuilder(self.nvars, self.premises)
        self.g = Gates(self.b)
        self._d = None

    def deriver(self, more=(), defs=None):
        if self._d is None:
            self._d = LocalDeriver(self.b, self.premises + self.g.clauses + list(more),
                                   {**(defs or {}), **self.g.defs})
        return self._d

    def fragment(self, rule, child: Formula, tau, side=(), derive=None) -> WitnessFragment:
        imgs = image_clauses(child, tau)
        refs = []
        for img in imgs:
            r = self.b.get(img)
            if r is None:
                r = derive(img) if derive else self.deriver().derive(img)
            refs.append(r)
        refs = [_as_step(self.b, r) for r in refs]
        cert = self.b.finish(refs)
        frag = WitnessFragment(rule, self.nvars, self.premises, list(side), cert, dict(tau), child, imgs)
        frag.refutes_premises = () in self.b.ctx
        return frag


def _as_step(b: ProofBuilder, r):
    """Targets must be step ids; a bare gate clause is exposed through an empty weakening."""
    if isinstance(r, tuple):
        b.steps.append(("W", r, ()))
        b.labels.append(b.label)
        b.clauses.append(b.clause(r))
        return len(b.steps)
    return r


# ---------------------------------------------------------------- graph substitutions


def _graph_tau(pf: Formula, cf: Formula, vmap, xmap=None, gmap=None):
    """child var -> piece var. Vertices map back through vmap (old -> new); X (and G)
    variables may be redirected through xmap(old_vertex, slot) / gmap(a, b, slot)."""
    inv = {new: old for old, new in vmap.items()}
    reg = pf.registry
    tau = {}
    for vid, name in cf.registry.items():
        kind = name[0]
        if kind == "X":
            u = inv[name[1]]
            tau[vid] = xmap(u, name[2]) if xmap else reg.id(("X", u, name[2]))
        elif kind == "Y":
            tau[vid] = reg.id(("Y", inv[name[1]], inv[name[2]]))
        else:
            a, b = inv[name[1]], inv[name[2]]
            tau[vid] = gmap(a, b, name[3]) if gmap else reg.id(("G", a, b, name[3]))
    return tau


def _slot_shift(l, j):
    """Parent slot holding child slot j once slot l is taken away."""
    return j if j < l else j + 1


def _X(f: Formula):
    return lambda u, i: f.registry.id(("X", u, i))


def _Y(f: Formula):
    return lambda a, b: f.registry.id(("Y", min(a, b), max(a, b)))


# ---------------------------------------------------------------- vertex cover


def emit_vc_witness(step, parent_enc, child_enc) -> WitnessFragment:
    br = step.branches[0]
    if child_enc is None:
        raise FragmentUnavailable("child has no encoding (k = 0)")
    pf, cf = parent_enc.formula, child_enc.formula
    if step.rule == "vc.b":
        piece = _Piece(pf)
        return piece.fragment(step.rule, cf, _graph_tau(pf, cf, br.data["vmap"]))
    g, k = step.parent.graph, step.parent.k
    v = step.evidence["vertex"]
    X, Y = _X(pf), _Y(pf)
    piece = _Piece(pf)
    b, gt = piece.b, piece.g
    # v must be in the cover: k+1 neighbours outside it would need k+1 distinct slots
    nb = NestedBuilder(b, [-X(v, i) for i in range(1, k + 1)])
    x = {}
    for p, w in enumerate(sorted(g.adj(v))[:k + 1], 1):
        cov = nb.need([-Y(v, w)] + [X(v, i) for i in range(1, k + 1)] + [X(w, i) for i in range(1, k + 1)])
        r = nb.resolve(cov, nb.need((Y(v, w),)), Y(v, w))
        for i in range(1, k + 1):
            r = nb.resolve(r, nb.need((-X(v, i),)), X(v, i))
        for i in range(1, k + 1):
            x[p, i] = X(w, i)
    forced = b.clause(nb.close(php_into(nb, range(1, k + 2), range(1, k + 1), x)))
    child = br.child.graph
    vmap = br.data["vmap"]
    inv = {new: old for old, new in vmap.items()}
    k2 = k - 1
    Z = {(u, j): gt.or_all(gt.AND(X(v, l), X(u, _slot_shift(l, j))) for l in range(1, k + 1))
         for u in vmap for j in range(1, k2 + 1)}
    iso_child = {inv[u] for u in child.isolated()}
    leaves = sorted(u for u in iso_child if g.degree(u) > 0)
    img = {}
    if leaves:
        # a leaf's slot is handed to the first uncovered reserve vertex
        live = sorted(inv[u] for u in child.vertices if inv[u] not in iso_child)
        if len(live) < k2 * k2:
            raise FragmentUnavailable("too few non-isolated vertices for the reserve scheme")
        U = {r: gt.or_all(X(r, i) for i in range(1, k + 1)) for r in live[:k2 * k2]}
        for j in range(1, k2 + 1):
            res = live[(j - 1) * k2:j * k2]
            LJ = gt.or_all(Z[u, j] for u in leaves)
            prev = TRUE
            for r in res:
                A = gt.AND(LJ, gt.AND(gt.neg(U[r]), prev))
                img[r, j] = gt.OR(Z[r, j], A)
                prev = gt.AND(prev, U[r])
    xv = {}
    for u in vmap:
        for j in range(1, k2 + 1):
            val = FALSE if u in leaves else img.get((u, j), Z[u, j])
            xv[u, j] = gt.claim(val)
    tau = _graph_tau(pf, cf, vmap, xmap=lambda u, i: xv[u, i])
    piece.deriver(more=[forced])
    return piece.fragment(step.rule, cf, tau)


# ---------------------------------------------------------------- kernel refutation


def refute_formula(formula: Formula, max_conflicts=2_000_000) -> Certificate | Sat:
    """Resolution refutation found by the proof-logging CDCL engine (or Sat(model))."""
    b = RootBuilder(formula)
    r = refute(b, formula.nvars, formula.clauses, max_conflicts)
    if isinstance(r, Sat):
        return r
    return b.finish([r])


def refute_kernel(enc, max_conflicts=2_000_000, symmetry=True):
    """Refute an encoded instance; colouring formulas first pin a maximum clique."""
    f = enc.formula if hasattr(enc, "formula") else enc
    kind = getattr(enc, "kind", None)
    if symmetry and kind in ("col", "dualcol", "kneser", "schrijver"):
        cert = refute_coloring(enc, max_conflicts)
        if cert is not None:
            return cert
    return refute_formula(f, max_conflicts)


def refute_coloring(enc, max_conflicts=2_000_000):
    """Colouring refutation under the recolouring that sends a maximum clique K to
    colours 1..|K|. The recoloured variables X' are definitions over X; the colouring
    clauses over X' and the clique units X'_{K_i, i} are derived, then refuted.
    Returns None when there is nothing to pin (no edge) or the clique is too large."""
    f = enc.formula
    g, c = enc.params["graph"], enc.params["colors"]
    if not g.edges:
        return None
    ng = nx.Graph()
    ng.add_nodes_from(g.vertices)
    ng.add_edges_from(g.edges)
    K = max(nx.find_cliques(ng), key=lambda q: (len(q), sorted(q)))
    K = sorted(K)
    if len(K) > c:
        return None  # too many mutually adjacent vertices: a direct refutation is short
    X = _X(f)
    b = RootBuilder(f)
    gt = Gates(b)
    q = len(K)
    used = {col: gt.or_all(X(a, col) for a in K) for col in range(1, c + 1)}
    # sel[i, col]: new colour i is old colour col
    sel = {}
    for i in range(1, q + 1):
        for col in range(1, c + 1):
            sel[i, col] = X(K[i - 1], col)
    for col in range(1, c + 1):
        S = gt.counter([gt.neg(used[d]) for d in range(1, col)], c - q + 1)
        for r in range(1, c - q + 1):
            sel[q + r, col] = gt.AND(gt.neg(used[col]), gt.exactly(S, r - 1))
    xv = {}
    for v in g.vertices:
        for i in range(1, c + 1):
            xv[v, i] = gt.claim(gt.or_all(gt.AND(sel[i, col], X(v, col)) for col in range(1, c + 1)))
    tau = {}
    for vid, name in f.registry.items():
        tau[vid] = xv[name[1], name[2]] if name[0] == "X" else vid
    imgs = image_clauses(f, tau) + [(xv[K[i - 1], i],) for i in range(1, q + 1)]
    d = ClauseDeriver(b, b.pool.next - 1, list(f.clauses) + gt.clauses, max_conflicts)
    for img in imgs:
        d.derive(img)
    r = refute(b, b.pool.next - 1, imgs, max_conflicts)
    if isinstance(r, Sat):
        raise WitnessError("recoloured formula is satisfiable although the original is not")
    return b.finish([r])


# ---------------------------------------------------------------- composition


def emit_step_witness(step, parent_enc, child_encs):
    """StepWitness (or Partial) for one reduction step; child_encs[t] is None when the
    child has no encoding."""
    kind = step.rule.split(".")[0]
    if kind in ("arrow", "gs"):
        return (emit_arrow_witness if kind == "arrow" else emit_gs_witness)(step, parent_enc, child_encs)
    emit = {"vc": emit_vc_witness, "ecc": emit_ecc_witness, "dualcol": emit_dualcol_witness,
            "hitting": emit_hitting_witness}[kind]
    frag = emit(step, parent_enc, child_encs[0])
    return StepWitness(step, nvars=parent_enc.formula.nvars, fragments=[frag], sides=[[]])


@dataclass
class CertifyResult:
    verdict: str  # "unsat" | "sat" | "open"
    certificate: Certificate | None
    report: object | None
    trace: object
    partial: bool = False
    fragment_sizes: list = field(default_factory=list)  # (node path, rule, step count)
    kernel_sizes: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    check: str | None = None

    @property
    def h_observed(self) -> int:
        return max((s for _, _, s in self.fragment_sizes), default=0)

    @property
    def bound_predicted(self):
        """Size bound with h = largest fragment and 2^g = largest kernel refutation."""
        if self.report is None:
            return None
        from .proof import bound_evaluate
        val, _ = bound_evaluate(self.report, self.h_observed, max(self.kernel_sizes, default=0),
                                self.report.R, self.report.C)
        return val

    def to_json(self) -> dict:
        rep = self.report
        return {"instance": self.trace.root.instance.describe(), "verdict": self.verdict,
                "partial": self.partial, "C": self.trace.depth, "R": self.trace.R,
                "fragment_sizes": [s for _, _, s in self.fragment_sizes],
                "kernel_sizes": list(self.kernel_sizes),
                "total_steps": rep.step_count if rep else None,
                "ext_vars": rep.ext_vars if rep else None,
                "bound_predicted": self.bound_predicted,
                "check": None if self.check is None else str(self.check), "notes": self.notes}


class _Composer:
    def __init__(self, max_conflicts, symmetry=True, max_lits=None):
        self.max_conflicts = max_conflicts
        self.symmetry = symmetry
        self.max_lits = max_lits
        self.cache: dict = {}
        self.fragment_sizes: list = []
        self.kernel_sizes: list = []
        self.notes: list = []
        self.partial = False

    def encode(self, inst):
        from .reduction import encodable, encode_instance
        return encode_instance(inst, self.max_lits) if encodable(inst) else None

    def leaf(self, B, enc, sigma, label):
        fp = fingerprint_of(enc.formula)
        cert = self.cache.get(fp)
        if cert is None:
            cert = refute_kernel(enc, self.max_conflicts, self.symmetry)
            if isinstance(cert, Sat):
                raise _Satisfiable(label)
            self.cache[fp] = cert
        self.kernel_sizes.append(cert.step_count())
        saved, B.label = B.label, label
        try:
            refs, _ = B.splice(cert, enc.formula.clauses, rename=sigma)
        finally:
            B.label = saved
        return refs[0]

    def node(self, B, node, enc, sigma, path):
        if node.leaf is not None or node.step is None:
            return self.leaf(B, enc, sigma, f"leaf@{path}")
        step = node.step
        try:
            cencs = [self.encode(br.child) for br in step.branches]
            sw = emit_step_witness(step, enc, cencs)
        except FragmentUnavailable as e:
            self.notes.append(f"{path} {step.rule}: {e}; node refuted directly")
            return self.leaf(B, enc, sigma, f"leaf@{path}")
        if isinstance(sw, Partial):
            self.partial = True
            self.notes.append(f"{path} {step.rule}: partial ({sw.reason}); node refuted directly")
            return self.leaf(B, enc, sigma, f"leaf@{path}")
        for t, f in enumerate(sw.fragments):
            self.fragment_sizes.append((f"{path}.{t}", step.rule, f.step_count))
        ren = dict(sigma)
        if sw.shared:
            B.label = f"shared@{path}"
            _, ren = B.splice(Certificate(sw.nvars, 0, "", sw.shared, []), [], rename=ren)
        if sw.cover is None:
            f = sw.fragments[0]
            B.label = f"frag:{step.rule}@{path}"
            _, r2 = B.splice(f.cert, f.premises, rename=ren)
            child = node.children[0]
            if cencs[0] is None:
                raise WitnessError("fragment emitted for a child without encoding")
            return self.node(B, child, cencs[0], {cv: r2[pv] for cv, pv in f.tau.items()}, path + ".0")
        for t, (f, side, child, cenc) in enumerate(zip(sw.fragments, sw.sides, node.children, cencs)):
            lab = f"frag:{step.rule}@{path}.{t}"
            N = NestedBuilder(B, [lit_image(z, ren) for z in side], label=lab)
            _, r2 = N.splice(f.cert, f.premises, rename=ren)
            e = self.node(N, child, cenc, {cv: r2[pv] for cv, pv in f.tau.items()}, f"{path}.{t}")
            N.close(e)
        B.label = f"cover@{path}"
        refs, _ = B.splice(sw.cover, sw.cover_premises, rename=ren)
        return refs[0]


class _Satisfiable(Exception):
    pass


def fingerprint_of(f: Formula) -> str:
    from .formula import fingerprint
    return fingerprint(f)


def certify(inst, max_conflicts=2_000_000, check=True, symmetry=True, max_lits=None) -> CertifyResult:
    """kernelize -> per-step fragments -> kernel refutations -> one composed certificate."""
    from .reduction import kernelize
    from .checker import check_certificate
    trace = kernelize(inst)
    if trace.verdict() == "sat":
        return CertifyResult("sat", None, None, trace, notes=["reduction reached a satisfiable leaf"])
    comp = _Composer(max_conflicts, symmetry, max_lits)
    enc = comp.encode(inst)
    if enc is None:
        return CertifyResult("open", None, None, trace, notes=["root instance has no encoding"])
    B = RootBuilder(enc.formula)
    sigma = {v: v for v in range(1, enc.formula.nvars + 1)}
    try:
        empty = comp.node(B, trace.root, enc, sigma, "r")
    except _Satisfiable as e:
        return CertifyResult("sat", None, None, trace, notes=comp.notes + [f"satisfiable leaf at {e}"])
    B.label = "main"
    cert = B.finish([_as_step(B, empty)])
    rep = size_report(cert, R=trace.R, C=trace.depth, kernel_sizes=comp.kernel_sizes)
    res = CertifyResult("unsat", cert, rep, trace, comp.partial, comp.fragment_sizes,
                        comp.kernel_sizes, comp.notes)
    if check:
        res.check = check_certificate(enc.formula, cert)
    return res


# ---------------------------------------------------------------- edge clique cover


def emit_ecc_witness(step, parent_enc, child_enc) -> WitnessFragment:
    if child_enc is None:
        raise FragmentUnavailable("child has no encoding (k = 0)")
    br = step.branches[0]
    pf, cf = parent_enc.formula, child_enc.formula
    vmap = br.data["vmap"]
    piece = _Piece(pf)
    if step.rule == "ecc.a" or not step.evidence.get("component"):
        return piece.fragment(step.rule, cf, _graph_tau(pf, cf, vmap))
    # {v, w} is a whole component: drop the slot that covers vw and renumber the rest
    k = step.parent.k
    v, w = br.data["keep"], br.data["drop"]
    X, gt = _X(pf), piece.g
    Gvw = [pf.registry.id(("G", min(v, w), max(v, w), l)) for l in range(1, k + 1)]
    first, seen = [], FALSE
    for l in range(k):
        first.append(gt.AND(Gvw[l], gt.neg(seen)))
        seen = gt.OR(seen, Gvw[l])
    xs = {(u, j): gt.claim(gt.or_all(gt.AND(first[l - 1], X(u, _slot_shift(l, j))) for l in range(1, k + 1)))
          for u in vmap for j in range(1, k)}
    gs = {(a, b, j): gt.claim(gt.AND(xs[a, j], xs[b, j]))
          for a, b in itertools.combinations(sorted(vmap), 2) for j in range(1, k)}
    tau = _graph_tau(pf, cf, vmap, xmap=lambda u, i: xs[u, i], gmap=lambda a, b, j: gs[a, b, j])
    return piece.fragment(step.rule, cf, tau)


# ---------------------------------------------------------------- dual colouring


def emit_dualcol_witness(step, parent_enc, child_enc) -> WitnessFragment:
    if step.rule not in ("dualcol.a", "dualcol.c"):
        raise WitnessError(f"no witness for {step.rule}")
    if child_enc is None:
        raise FragmentUnavailable("child has no encoding")
    br = step.branches[0]
    pf, cf = parent_enc.formula, child_enc.formula
    g = step.parent.graph
    c = parent_enc.params["colors"]
    vmap = br.data["vmap"]
    X = _X(pf)
    piece = _Piece(pf)
    gt = piece.g
    if step.rule == "dualcol.a":
        # remove universal vertices one at a time; the rest is recoloured around each one
        A = list(step.evidence["universal"])
        cur = {(u, i): X(u, i) for u in g.vertices for i in range(1, c + 1)}
        rest, cc = [u for u in g.vertices], c
        for a in A:
            rest = [u for u in rest if u != a]
            cur = {(u, j): gt.or_all(gt.AND(cur[a, l], cur[u, _slot_shift(l, j)]) for l in range(1, cc + 1))
                   for u in rest for j in range(1, cc)}
            cc -= 1
        xv = {(u, j): gt.claim(cur[u, j]) for u in vmap for j in range(1, cc + 1)}
    else:
        # C is a clique joined to every remaining vertex: recolour v by the rank of its colour
        # among the colours that C leaves free. T[v, w] says w's colour is below v's.
        crown = step.evidence["crown"]
        C = list(crown.C)
        below = {(w, i): gt.or_all(X(w, i2) for i2 in range(1, i)) for w in C for i in range(1, c + 1)}
        xv = {}
        cc = c - len(C)
        for v in vmap:
            T = [gt.or_all(gt.AND(X(v, i), below[w, i]) for i in range(1, c + 1)) for w in C]
            S = gt.counter(T, len(C) + 1)
            for j in range(1, cc + 1):
                xv[v, j] = gt.claim(gt.or_all(gt.AND(X(v, i), gt.exactly(S, i - j))
                                              for i in range(j, min(c, j + len(C)) + 1)))
    tau = _graph_tau(pf, cf, vmap, xmap=lambda u, i: xv[u, i])
    return piece.fragment(step.rule, cf, tau)


# ---------------------------------------------------------------- hitting set


def emit_hitting_witness(step, parent_enc, child_enc) -> WitnessFragment:
    core = step.evidence["core"]
    if not core:
        raise WitnessError("an empty core means the instance is decided, not reduced")
    if child_enc is None:
        raise FragmentUnavailable("child has no encoding")
    pf, cf = parent_enc.formula, child_enc.formula
    k = step.parent.k
    X = _X(pf)
    piece = _Piece(pf)
    b, gt = piece.b, piece.g
    petals = [sorted(set(s) - set(core)) for s in step.evidence["petals"]]
    p = {(l, j): gt.or_all(X(i, j) for i in petals[l - 1]) for l in range(1, k + 2) for j in range(1, k + 1)}
    U, U2 = step.parent.universe, child_enc.params["universe"]
    gone = [i for i in U if i not in set(U2)]
    i0 = U2[0]
    out = {j: gt.or_all(X(i, j) for i in gone) for j in range(1, k + 1)}
    xv = {(i, j): gt.claim(gt.OR(X(i, j), out[j]) if i == i0 else X(i, j)) for i in U2 for j in range(1, k + 1)}
    corelits = [X(i, j) for i in core for j in range(1, k + 1)]
    d = LocalDeriver(b, piece.premises + gt.clauses, gt.defs)
    pig = [d.derive(corelits + [p[l, j] for j in range(1, k + 1)]) for l in range(1, k + 2)]
    for j in range(1, k + 1):
        for l1, l2 in itertools.combinations(range(1, k + 2), 2):
            d.derive((-p[l1, j], -p[l2, j]))
    # assuming the core unhit, the k+1 petals need k+1 distinct slots
    nb = NestedBuilder(b, [-x for x in corelits])
    for r in pig:
        nb.chain(nb.need(b.clause(r)), [nb.need((-x,)) for x in corelits])
    coreclause = b.clause(nb.close(php_into(nb, range(1, k + 2), range(1, k + 1), p)))
    piece._d = LocalDeriver(b, piece.premises + gt.clauses + [coreclause], gt.defs)
    tau = {cf.registry.id(("X", i, j)): xv[i, j] for i in U2 for j in range(1, k + 1)}
    return piece.fragment(step.rule, cf, tau)


# ---------------------------------------------------------------- Arrow / Gibbard-Satterthwaite


def _merge_tau(parent_enc, child_enc, a, b):
    """child var -> parent var: a reduced profile is expanded by copying agent b into a."""
    m, n = parent_enc.params["m"], parent_enc.params["n"]
    _, profs = encoders_layout(m, n)
    pidx = {R: r for r, R in enumerate(profs)}
    _, cprofs = encoders_layout(m, n - 1)
    kind = parent_enc.kind
    per = len(social.orderings(m)) if kind == "arrow" else m
    tau = {}
    for rc, Rc in enumerate(cprofs):
        r = pidx[social.expand_merged(Rc, a, b)]
        for o in range(per):
            # arrow: X(r, p) = r*m! + p + 1 ; gs: X(r, o) = r*m + o (o from 1)
            tau[rc * per + o + 1] = r * per + o + 1
    return tau, cprofs


def encoders_layout(m, n):
    from .encoders import arrow_layout
    return arrow_layout(m, n)


def _nondict_lits(child_enc, tau, cprofs):
    """Per child agent: images of the literals of its non-dictatorship clause."""
    m = child_enc.params["m"]
    ords = social.orderings(m)
    oi = {pi: i for i, pi in enumerate(ords)}
    out = []
    for c in range(child_enc.params["n"]):
        if child_enc.kind == "arrow":
            lits = [-tau[r * len(ords) + oi[R[c]] + 1] for r, R in enumerate(cprofs)]
        else:
            lits = [-tau[r * m + R[c][0]] for r, R in enumerate(cprofs)]
        out.append(lits)
    return out


def _merge_witness(step, parent_enc, child_encs, max_conflicts=2_000_000) -> StepWitness:
    pf = parent_enc.formula
    # shared definitions: ND[t][c] = child agent c is not a dictator of branch t's child,
    # N[t] = the whole child is non-dictatorial
    sb = ListBuilder(pf.nvars, [])
    sg = Gates(sb)
    taus, ND, N = [], [], []
    for br, cenc in zip(step.branches, child_encs):
        a, b = br.data["merge"]
        tau, cprofs = _merge_tau(parent_enc, cenc, a, b)
        nds = [sg.or_all(lits) for lits in _nondict_lits(cenc, tau, cprofs)]
        taus.append(tau)
        ND.append(nds)
        N.append(sg.and_all(nds))
    if any(isinstance(x, _Const) for x in N):
        raise FragmentUnavailable("degenerate non-dictatorship definition")
    nv = sb.pool.next - 1
    shared_clauses = list(sg.clauses)
    sw = StepWitness(step, shared=list(sb.steps), nvars=nv, shared_clauses=shared_clauses)
    for t, (cenc, tau) in enumerate(zip(child_encs, taus)):
        piece = _Piece(pf, shared_clauses + [(N[t],)], nvars=nv)
        g2 = Gates(piece.b)
        g2.defs = sg.defs
        piece.deriver(defs=sg.defs)
        units = g2.and_units(piece.b.need((N[t],)), N[t], ND[t])
        for nd in ND[t]:
            # the unit ND resolves against its unwound definition: the image clause
            if nd in sg.defs:
                piece.b.resolve(g2.expand_or(nd, set(_leaf_lits(sg, nd))), units[nd], nd)
        sw.fragments.append(piece.fragment(step.rule, cenc.formula, tau))
        sw.sides.append([N[t]])
    cover_prem = list(pf.clauses) + shared_clauses + [(-x,) for x in N]
    cb = ListBuilder(nv, cover_prem)
    r = refute(cb, nv, cover_prem + [], max_conflicts)
    if isinstance(r, Sat):
        raise WitnessError("branch cover is satisfiable")
    sw.cover = cb.finish([r])
    sw.cover_premises = cover_prem
    return sw


def _leaf_lits(g: Gates, o):
    """Literals at the bottom of the OR tree rooted at o."""
    out, stack = [], [o]
    while stack:
        x = stack.pop()
        if x > 0 and x in g.defs and g.defs[x][0] == "GO":
            stack.extend(g.defs[x][1:])
        else:
            out.append(x)
    return out


def emit_arrow_witness(step, parent_enc, child_encs, max_conflicts=2_000_000):
    if step.rule == "arrow.a":
        return Partial(step, "object-restriction branches are not emitted propositionally")
    return _merge_witness(step, parent_enc, child_encs, max_conflicts)


def emit_gs_witness(step, parent_enc, child_encs, max_conflicts=2_000_000):
    if step.rule == "gs.a":
        return Partial(step, "object-restriction step is checked semantically only",
                       gs_restriction_check(step))
    return _merge_witness(step, parent_enc, child_encs, max_conflicts)


def gs_restriction_check(step) -> dict:
    """Semantic check of the restriction step on dictators: restricting a dictatorial
    SCF to the kept objects leaves an onto, strategyproof SCF with the same dictator."""
    m, n = step.parent.m, step.parent.n
    T = step.evidence["T"]
    fails = []
    for i in range(1, n + 1):
        r = social.restrict(social.dictator_scf(m, n, i), T)
        ok = social.is_onto(r)[0] and social.is_strategyproof(r, guard=False)[0] and social.dictator_of(r) == i
        if not ok:
            fails.append(i)
    return {"m": m, "n": n, "dropped": list(T), "dictators_checked": n, "failures": fails, "ok": not fails}
