"""Data-reduction rules, kernelization traces and kernel-size assertions."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from . import graphs as gl
from .encoders import (encode_arrow, encode_dualcol, encode_ecc, encode_gs, encode_hitting,
                       encode_vc, normalize_family)
from .graphs import Graph


class ReductionError(RuntimeError):
    pass


class KernelBoundError(ReductionError):
    pass


# ---------------------------------------------------------------- instances


@dataclass
class GraphInstance:
    problem: str  # "dualcol" | "vc" | "ecc"
    graph: Graph
    k: int

    def describe(self):
        return f"{self.problem}(n={self.graph.n}, m={len(self.graph.edges)}, k={self.k})"

    def measure(self):
        return (self.graph.n, len(self.graph.edges))


@dataclass
class HittingInstance:
    universe: tuple
    family: tuple
    k: int
    d: int

    def __post_init__(self):
        self.family = tuple(normalize_family(self.family))
        self.universe = tuple(sorted(set(self.universe)))
        if any(len(s) > self.d for s in self.family):
            raise ReductionError("a set is larger than d")

    problem = "hitting"

    def describe(self):
        return f"hitting(|U|={len(self.universe)}, |A|={len(self.family)}, k={self.k}, d={self.d})"

    def measure(self):
        return (len(self.family), len(self.universe))


@dataclass
class ArrowInstance:
    m: int
    n: int
    problem = "arrow"

    def describe(self):
        return f"arrow(m={self.m}, n={self.n})"

    def measure(self):
        return (self.m, self.n)


@dataclass
class GSInstance:
    m: int
    n: int
    problem = "gs"

    def describe(self):
        return f"gs(m={self.m}, n={self.n})"

    def measure(self):
        return (self.m, self.n)


def encode_instance(inst, max_lits=None):
    kw = {} if max_lits is None else {"max_lits": max_lits}
    p = inst.problem
    if p == "dualcol":
        return encode_dualcol(inst.graph, inst.k)
    if p == "vc":
        return encode_vc(inst.graph, inst.k)
    if p == "ecc":
        return encode_ecc(inst.graph, inst.k)
    if p == "hitting":
        return encode_hitting(inst.universe, inst.family, inst.k, inst.d)
    if p == "arrow":
        return encode_arrow(inst.m, inst.n, **kw)
    if p == "gs":
        return encode_gs(inst.m, inst.n, **kw)
    raise ReductionError(f"unknown problem {p!r}")


def encodable(inst) -> bool:
    p = inst.problem
    if p == "dualcol":
        return 0 <= inst.k < inst.graph.n
    if p in ("vc", "ecc", "hitting"):
        return inst.k >= 1
    return True


# ---------------------------------------------------------------- steps and traces


@dataclass
class Branch:
    side: str  # side-condition descriptor ("" when unconditional)
    child: object
    data: dict = field(default_factory=dict)  # renaming data (vertex maps, merged agents, ...)


@dataclass
class ReductionStep:
    rule: str
    parent: object
    branches: list
    evidence: dict = field(default_factory=dict)


@dataclass
class Kernel:
    instance: object


@dataclass
class Solved:
    instance: object
    verdict: str  # "sat" | "unsat"
    reason: str
    witness: object = None


@dataclass
class TraceNode:
    instance: object
    step: ReductionStep | None = None
    leaf: Kernel | Solved | None = None
    children: list = field(default_factory=list)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class ReductionTrace:
    root: TraceNode

    @property
    def depth(self) -> int:
        def d(node):
            return 0 if not node.children else 1 + max(d(c) for c in node.children)
        return d(self.root)

    @property
    def R(self) -> int:
        return max([len(n.step.branches) for n in self.root.walk() if n.step] or [1])

    def leaves(self) -> list:
        return [n.leaf for n in self.root.walk() if n.leaf is not None]

    def steps(self) -> list:
        return [n.step for n in self.root.walk() if n.step is not None]

    def verdict(self) -> str:
        vs = [lf.verdict if isinstance(lf, Solved) else "kernel" for lf in self.leaves()]
        if "sat" in vs:
            return "sat"
        return "unsat" if all(v == "unsat" for v in vs) else "open"

    def to_text(self) -> str:
        out = []

        def go(node, ind):
            pad = "  " * ind
            if node.step:
                st = node.step
                ev = ", ".join(f"{k}={_digest(v)}" for k, v in sorted(st.evidence.items()))
                out.append(f"{pad}{st.rule} branches={len(st.branches)} {node.instance.describe()} [{ev}]")
                for b, c in zip(st.branches, node.children):
                    out.append(f"{pad}  -> {b.side or 'always'}: {c.instance.describe()}")
                    go(c, ind + 2)
            elif isinstance(node.leaf, Kernel):
                out.append(f"{pad}kernel {node.instance.describe()}")
            else:
                out.append(f"{pad}solved {node.leaf.verdict} ({node.leaf.reason}) {node.instance.describe()}")
        go(self.root, 0)
        return "\n".join(out) + "\n"


def _digest(v):
    s = str(v)
    return s if len(s) <= 40 else s[:37] + "..."


# ---------------------------------------------------------------- DualCol


def dualcol_kernel_bound(k):
    return 3 * k - 2


def reduce_dualcol_step(inst: GraphInstance):
    g, k = inst.graph, inst.k
    n = g.n
    colors = n - k
    if k <= 0:
        return Solved(inst, "sat", "at least n colours", {v: v for v in g.vertices})
    if n == 0:
        return Solved(inst, "sat", "empty graph")
    # rule (a): universal vertices need pairwise distinct colours unused elsewhere
    A = g.universal()
    if A:
        if len(A) > colors or n - len(A) <= k:
            return Solved(inst, "unsat", "universal vertices exhaust the colours", A)
        child, vmap = g.remove(A)
        return ReductionStep("dualcol.a", inst, [Branch("", GraphInstance("dualcol", child, k), {"vmap": vmap})],
                             {"universal": A})
    comp = g.complement()
    res = gl.find_crown(comp, k)
    if isinstance(res, gl.NoCrown) and res.reason == "matching":
        return Solved(inst, "sat", "complement has a matching of size k", res.matching)
    if isinstance(res, gl.Crown):
        drop = set(res.C) | set(res.H)
        child, vmap = g.remove(drop)
        k2 = k - len(res.H)
        return ReductionStep("dualcol.c", inst,
                             [Branch("", GraphInstance("dualcol", child, k2), {"vmap": vmap})],
                             {"crown": res})
    if n > dualcol_kernel_bound(k):
        raise KernelBoundError(f"no DualCol rule applies to a graph with {n} > 3k-2 vertices")
    return Kernel(inst)


# ---------------------------------------------------------------- vertex cover


def reduce_vc_step(inst: GraphInstance):
    g, k = inst.graph, inst.k
    if g.n == 0:
        return Kernel(inst)
    if k <= 0:
        if g.edges:
            return Solved(inst, "unsat", "k=0 with edges present", g.sorted_edges()[0])
        return Solved(inst, "sat", "no edges")
    high = [v for v in g.vertices if g.degree(v) > k]
    if high:
        v = high[0]
        child, vmap = g.remove([v])
        return ReductionStep("vc.a", inst, [Branch("", GraphInstance("vc", child, k - 1), {"vmap": vmap})],
                             {"vertex": v, "degree": g.degree(v)})
    iso = g.isolated()
    if iso:
        child, vmap = g.remove(iso)
        return ReductionStep("vc.b", inst, [Branch("", GraphInstance("vc", child, k), {"vmap": vmap})],
                             {"isolated": iso})
    if g.n == 0:
        return Kernel(inst)
    ne = len(g.edges)
    if ne > k * k:
        return Solved(inst, "unsat", "more than k^2 edges with maximum degree k", ne)
    if g.n > k * k + k:
        return Solved(inst, "unsat", "more than k^2+k non-isolated vertices with maximum degree k", g.n)
    if g.n > k * k:
        # between the claimed k^2 bound and the exact k^2+k bound: decide exactly
        vc = gl.vc_min(g)
        return Solved(inst, "sat" if vc <= k else "unsat", "above the k^2 kernel bound, decided exactly", vc)
    return Kernel(inst)


# ---------------------------------------------------------------- edge clique cover


def reduce_ecc_step(inst: GraphInstance):
    g, k = inst.graph, inst.k
    n = g.n
    if k <= 0:
        if g.edges:
            return Solved(inst, "unsat", "k=0 with edges present")
        return Solved(inst, "sat", "no edges")
    if n <= 2 ** k:
        return Kernel(inst)
    thr = n / 2 ** k
    iso = g.isolated()
    if iso and len(iso) >= thr:
        child, vmap = g.remove(iso)
        return ReductionStep("ecc.a", inst, [Branch("", GraphInstance("ecc", child, k), {"vmap": vmap})],
                             {"isolated": iso})
    for cls in gl.twin_classes(g):
        if len(cls) >= 2 and len(cls) >= thr:
            v, w = cls[0], cls[1]
            whole = set(g.adj(v)) | {v} == {v, w}
            k2 = k - 1 if whole else k
            child, vmap = g.remove([w])
            return ReductionStep("ecc.b", inst,
                                 [Branch("", GraphInstance("ecc", child, k2), {"vmap": vmap, "keep": v, "drop": w})],
                                 {"twins": cls, "merge": (v, w), "component": whole})
    return Solved(inst, "unsat", "more than 2^k vertices and no rule applies", n)


# ---------------------------------------------------------------- hitting set


def hitting_kernel_bound(d, k):
    return d * math.factorial(d) * k ** d


def find_sunflower(family, petals, d=None):
    """(core, sets) for `petals` distinct sets pairwise meeting exactly in core, or None.

    Exact search: every candidate core is an intersection of two members (or empty);
    for each core a petal-disjoint selection is searched by backtracking."""
    fam = [frozenset(s) for s in normalize_family(family)]
    if len(fam) < petals:
        return None
    cores = {frozenset()}
    for a, b in itertools.combinations(fam, 2):
        cores.add(a & b)
    for core in sorted(cores, key=lambda c: (-len(c), sorted(c))):
        cand = [s for s in fam if core <= s and s != core]
        if len(cand) < petals:
            continue
        got = _disjoint_petals(cand, core, petals)
        if got is not None:
            return tuple(sorted(core)), [tuple(sorted(s)) for s in got]
    return None


def _disjoint_petals(cand, core, petals):
    ps = [(s, s - core) for s in cand]
    chosen = []

    def go(i, used):
        if len(chosen) == petals:
            return True
        if len(ps) - i < petals - len(chosen):
            return False
        for j in range(i, len(ps)):
            s, p = ps[j]
            if not (p & used):
                chosen.append(s)
                if go(j + 1, used | p):
                    return True
                chosen.pop()
        return False

    return list(chosen) if go(0, frozenset()) else None


def reduce_hitting_step(inst: HittingInstance):
    fam, k, d = inst.family, inst.k, inst.d
    if k <= 0:
        if fam:
            return Solved(inst, "unsat", "k=0 with a nonempty family")
        return Solved(inst, "sat", "empty family")
    if any(len(s) == 0 for s in fam):
        return Solved(inst, "unsat", "empty set cannot be hit")
    # the sunflower rule is safe at every size; the kernel is reached when it no longer applies
    sf = find_sunflower(fam, k + 1, d) if len(fam) > k else None
    if sf is None:
        if len(fam) > math.factorial(d) * k ** d:
            raise ReductionError("sunflower lemma guarantee violated")
        return Kernel(inst)
    core, sets = sf
    if not core:
        return Solved(inst, "unsat", f"{k + 1} pairwise disjoint sets", sets)
    keep = [s for s in fam if s not in set(sets)] + [core]
    fam2 = tuple(normalize_family(keep))
    uni2 = tuple(sorted({x for s in fam2 for x in s}))
    child = HittingInstance(uni2, fam2, k, d)
    return ReductionStep("hitting.sunflower", inst, [Branch("", child, {})],
                         {"core": core, "petals": sets})


# ---------------------------------------------------------------- Arrow / GS


AGENT_PAIRS = ((1, 2), (1, 3), (2, 3))


def reduce_arrow_step(inst: ArrowInstance):
    m, n = inst.m, inst.n
    if m < 3:
        raise ReductionError("Arrow kernelization needs m >= 3")
    if m >= 6 and n >= 2:
        T = tuple(range(6, m + 1))
        br = [Branch(f"every W_-{{6..{m}}} agent is not a dictator", ArrowInstance(5, n), {"drop": T}),
              Branch(f"some agent dictates W_-{{6..{m}}}", ArrowInstance(5, n), {"drop": T, "witness": True})]
        return ReductionStep("arrow.a", inst, br, {"T": T})
    if n >= 3:
        br = [Branch(f"W_{a},{b} non-dictatorial", ArrowInstance(m, n - 1), {"merge": (a, b)})
              for a, b in AGENT_PAIRS]
        return ReductionStep("arrow.b", inst, br, {"pairs": AGENT_PAIRS})
    return Kernel(inst)


def reduce_gs_step(inst: GSInstance):
    m, n = inst.m, inst.n
    if m < 3:
        raise ReductionError("GS kernelization needs m >= 3")
    if m >= 4 and n >= 2:
        T = tuple(range(4, m + 1))
        br = [Branch(f"W_-{{4..{m}}} non-dictatorial", GSInstance(3, n), {"drop": T})]
        br += [Branch(f"agent {i} dictates W_-{{4..{m}}}", GSInstance(3, n), {"drop": T, "dictator": i})
               for i in range(1, n + 1)]
        return ReductionStep("gs.a", inst, br, {"T": T, "interpretation": "branch per candidate dictator"})
    if n >= 3:
        br = [Branch(f"W_{a},{b} non-dictatorial", GSInstance(m, n - 1), {"merge": (a, b)})
              for a, b in AGENT_PAIRS]
        return ReductionStep("gs.b", inst, br, {"pairs": AGENT_PAIRS})
    return Kernel(inst)


# ---------------------------------------------------------------- driver


STEP_OPS = {"dualcol": reduce_dualcol_step, "vc": reduce_vc_step, "ecc": reduce_ecc_step,
            "hitting": reduce_hitting_step, "arrow": reduce_arrow_step, "gs": reduce_gs_step}


def reduce_step(inst):
    return STEP_OPS[inst.problem](inst)


def check_kernel_size(inst):
    """Raise KernelBoundError when a kernel leaf exceeds the claimed size."""
    p = inst.problem
    if p == "dualcol" and inst.graph.n > dualcol_kernel_bound(inst.k):
        raise KernelBoundError(f"DualCol kernel with {inst.graph.n} > 3k-2 vertices")
    if p == "vc":
        noniso = inst.graph.n - len(inst.graph.isolated())
        if noniso > inst.k ** 2:
            raise KernelBoundError(f"VC kernel with {noniso} > k^2 non-isolated vertices")
    if p == "ecc" and inst.graph.n > 2 ** inst.k:
        raise KernelBoundError(f"ECC kernel with {inst.graph.n} > 2^k vertices")
    if p == "hitting" and len(inst.family) > hitting_kernel_bound(inst.d, inst.k):
        raise KernelBoundError("hitting-set kernel exceeds d*d!*k^d sets")


def kernelize(inst, max_steps=100_000) -> ReductionTrace:
    budget = [max_steps]

    def go(x):
        budget[0] -= 1
        if budget[0] < 0:
            raise ReductionError("step budget exhausted")
        r = reduce_step(x)
        node = TraceNode(x)
        if isinstance(r, ReductionStep):
            node.step = r
            for b in r.branches:
                if not b.child.measure() < x.measure():
                    raise ReductionError(f"{r.rule} did not decrease the measure")
                node.children.append(go(b.child))
        else:
            if isinstance(r, Kernel):
                check_kernel_size(x)
            node.leaf = r
        return node

    return ReductionTrace(go(inst))
