"""Graphs on vertices 1..n, matchings, crown decompositions, Kneser builders and exact oracles."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx


class GraphError(ValueError):
    pass


class OracleLimit(GraphError):
    pass


def _e(u, v):
    return (u, v) if u < v else (v, u)


@dataclass
class Graph:
    n: int
    edges: frozenset = frozenset()
    labels: list | None = None  # labels[v-1] for v in 1..n

    def __post_init__(self):
        es = set()
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise GraphError(f"edge ({u},{v}) outside 1..{self.n}")
            es.add(_e(u, v))
        self.edges = frozenset(es)
        self._adj = {v: set() for v in range(1, self.n + 1)}
        for u, v in self.edges:
            self._adj[u].add(v)
            self._adj[v].add(u)

    @property
    def vertices(self):
        return range(1, self.n + 1)

    def adj(self, v) -> set:
        return self._adj[v]

    def has_edge(self, u, v) -> bool:
        return _e(u, v) in self.edges

    def degree(self, v) -> int:
        return len(self._adj[v])

    def sorted_edges(self):
        return sorted(self.edges)

    def complement(self) -> "Graph":
        es = [(u, v) for u, v in itertools.combinations(self.vertices, 2) if not self.has_edge(u, v)]
        return Graph(self.n, frozenset(es), self.labels)

    def isolated(self) -> list:
        return [v for v in self.vertices if not self._adj[v]]

    def universal(self) -> list:
        return [v for v in self.vertices if len(self._adj[v]) == self.n - 1]

    def induced(self, keep):
        """Subgraph on `keep` (relabelled 1..|keep| in increasing order) and the old->new map."""
        keep = sorted(keep)
        m = {v: i for i, v in enumerate(keep, 1)}
        es = [(m[u], m[v]) for u, v in self.edges if u in m and v in m]
        labels = [self.labels[v - 1] for v in keep] if self.labels else None
        return Graph(len(keep), frozenset(es), labels), m

    def remove(self, drop):
        drop = set(drop)
        return self.induced([v for v in self.vertices if v not in drop])

    def to_dimacs(self) -> str:
        lines = []
        if self.labels:
            for v in self.vertices:
                lines.append(f"c label {v} {' '.join(map(str, self.labels[v - 1]))}")
        lines.append(f"p edge {self.n} {len(self.edges)}")
        lines += [f"e {u} {v}" for u, v in self.sorted_edges()]
        return "\n".join(lines) + "\n"


def graph_from_dimacs(text: str) -> Graph:
    n = None
    es = []
    for no, line in enumerate(text.splitlines(), 1):
        t = line.split()
        if not t or t[0] == "c":
            continue
        try:
            if t[0] == "p":
                if len(t) != 4 or t[1] not in ("edge", "col"):
                    raise ValueError("bad header")
                n = int(t[2])
            elif t[0] == "e":
                if n is None:
                    raise ValueError("edge before header")
                es.append((int(t[1]), int(t[2])))
            else:
                raise ValueError(f"unknown line kind {t[0]!r}")
        except (ValueError, IndexError) as e:
            raise GraphError(f"line {no}: {e}") from None
    if n is None:
        raise GraphError("missing header")
    return Graph(n, frozenset(es))


def complete_graph(n):
    return Graph(n, frozenset(itertools.combinations(range(1, n + 1), 2)))


def cycle_graph(n):
    return Graph(n, frozenset(_e(i, i % n + 1) for i in range(1, n + 1)))


def star_graph(leaves):
    return Graph(leaves + 1, frozenset((1, i) for i in range(2, leaves + 2)))


def path_graph(n):
    return Graph(n, frozenset((i, i + 1) for i in range(1, n)))


def random_graph(rng, n, p):
    es = [(u, v) for u, v in itertools.combinations(range(1, n + 1), 2) if rng.chance(p)]
    return Graph(n, frozenset(es))


# the crown example drawn in the source figure (C = 1..4, H = 5..7, R = 8..11)
FIG_CROWN_EDGES = [(1, 5), (1, 6), (2, 5), (2, 6), (2, 7), (3, 6), (3, 7), (4, 6), (4, 7),
                   (5, 9), (6, 8), (6, 10), (7, 9), (8, 11), (9, 11), (10, 11)]


def fig_crown_graph() -> Graph:
    return Graph(11, frozenset(FIG_CROWN_EDGES))


def crown_dualcol_fixture(rng, c, r):
    """(graph, k) whose complement has a crown: a clique C of size c joined to a clique R
    of size r, and a set H matched into C by non-edges. Every R vertex misses some H vertex,
    so no vertex is universal. With r >= c + 2 the graph needs c + r colours, one more than
    the n - k = c + r - 1 allowed."""
    C = list(range(1, c + 1))
    H = list(range(c + 1, 2 * c + 1))
    R = list(range(2 * c + 1, 2 * c + r + 1))
    E = set(itertools.combinations(C, 2)) | set(itertools.combinations(R, 2))
    E |= {(a, x) for a in C for x in R}
    for i, a in enumerate(C):
        for j, h in enumerate(H):
            if i != j and rng.random() < 0.5:
                E.add((a, h))
    for e in itertools.combinations(H, 2):
        if rng.random() < 0.5:
            E.add(e)
    for x in R:
        miss = rng.randint(0, len(H) - 1)
        for j, h in enumerate(H):
            if j != miss and rng.random() < 0.6:
                E.add((h, x))
    return Graph(2 * c + r, frozenset(E)), c + 1


# ---------------------------------------------------------------- Kneser family


def is_cyclically_stable(s, n) -> bool:
    s = sorted(s)
    for a, b in zip(s, s[1:]):
        if b - a < 2:
            return False
    return not (len(s) > 1 and s[0] == 1 and s[-1] == n)


def _subset_graph(subsets) -> Graph:
    es = []
    for i, j in itertools.combinations(range(len(subsets)), 2):
        if not set(subsets[i]) & set(subsets[j]):
            es.append((i + 1, j + 1))
    return Graph(len(subsets), frozenset(es), [tuple(s) for s in subsets])


def build_kneser(n, k) -> Graph:
    if k < 1 or n < 2 * k:
        raise GraphError(f"Kneser graph needs n >= 2k >= 2, got n={n}, k={k}")
    return _subset_graph(list(itertools.combinations(range(1, n + 1), k)))


def build_stable_kneser(n, k) -> Graph:
    if k < 1 or n < 2 * k:
        raise GraphError(f"stable Kneser graph needs n >= 2k >= 2, got n={n}, k={k}")
    subs = [s for s in itertools.combinations(range(1, n + 1), k) if is_cyclically_stable(s, n)]
    return _subset_graph(subs)


# ---------------------------------------------------------------- matchings


def max_matching(g: Graph) -> list:
    """Maximum-cardinality matching as a sorted list of edges."""
    h = nx.Graph()
    h.add_nodes_from(g.vertices)
    h.add_edges_from(g.sorted_edges())
    m = nx.max_weight_matching(h, maxcardinality=True)
    return sorted(_e(u, v) for u, v in m)


def brute_max_matching(g: Graph) -> int:
    if len(g.edges) > 40:
        raise OracleLimit("too many edges for brute-force matching")
    es = g.sorted_edges()
    best = 0

    def go(i, used, size):
        nonlocal best
        best = max(best, size)
        if i == len(es) or size + (len(es) - i) <= best:
            return
        u, v = es[i]
        if u not in used and v not in used:
            go(i + 1, used | {u, v}, size + 1)
        go(i + 1, used, size)

    go(0, frozenset(), 0)
    return best


def is_matching(g: Graph, m) -> bool:
    seen = set()
    for u, v in m:
        if not g.has_edge(u, v) or u in seen or v in seen:
            return False
        seen |= {u, v}
    return True


def greedy_matching(g: Graph) -> list:
    used = set()
    m = []
    for u, v in g.sorted_edges():
        if u not in used and v not in used:
            m.append((u, v))
            used |= {u, v}
    return m


def bipartite_matching(left, right_adj) -> dict:
    """Kuhn's augmenting paths. right_adj[u] lists right neighbours of left vertex u.
    Returns match_right: right -> left."""
    match_r: dict = {}

    def augment(u, seen):
        for w in right_adj[u]:
            if w in seen:
                continue
            seen.add(w)
            if w not in match_r or augment(match_r[w], seen):
                match_r[w] = u
                return True
        return False

    for u in left:
        augment(u, set())
    return match_r


def konig_cover(left, right_adj, match_r) -> set:
    """Minimum vertex cover from a maximum matching (König)."""
    match_l = {u: w for w, u in match_r.items()}
    zl, zr = set(), set()
    stack = [u for u in left if u not in match_l]
    zl.update(stack)
    while stack:
        u = stack.pop()
        for w in right_adj[u]:
            if w in zr or match_l.get(u) == w:
                continue
            zr.add(w)
            x = match_r.get(w)
            if x is not None and x not in zl:
                zl.add(x)
                stack.append(x)
    return (set(left) - zl) | zr


# ---------------------------------------------------------------- crowns


@dataclass
class Crown:
    C: list
    H: list
    R: list
    matching: dict  # H -> C


@dataclass
class NoCrown:
    reason: str  # "matching" or "small"
    matching: list = field(default_factory=list)


def validate_crown(g: Graph, cr: Crown) -> str | None:
    """None when (C,H,R) is a crown of g, else the violated condition."""
    C, H, R = set(cr.C), set(cr.H), set(cr.R)
    if C & H or C & R or H & R or (C | H | R) != set(g.vertices):
        return "not a partition"
    if not C:
        return "C is empty"
    if any(g.has_edge(u, v) for u, v in itertools.combinations(sorted(C), 2)):
        return "C is not independent"
    if any(g.has_edge(u, v) for u in C for v in R):
        return "edge between C and R"
    m = cr.matching
    if set(m) != H:
        return "matching does not saturate H"
    if len(set(m.values())) != len(m) or not set(m.values()) <= C:
        return "matching not injective into C"
    if any(not g.has_edge(h, c) for h, c in m.items()):
        return "matching uses a non-edge"
    return None


def find_crown(g: Graph, k: int):
    """Crown (normalized: H nonempty, every C vertex matched), a matching of size k,
    or NoCrown('small') when the graph has at most 3k-2 vertices.
    The graph must not have isolated vertices."""
    iso = g.isolated()
    if iso:
        raise GraphError(f"vertex {iso[0]} is isolated")
    m1 = greedy_matching(g)
    if len(m1) >= k:
        return NoCrown("matching", m1[:k])
    if g.n <= 3 * k - 2:
        return NoCrown("small")
    vm = sorted({x for e in m1 for x in e})
    vmset = set(vm)
    indep = [v for v in g.vertices if v not in vmset]
    radj = {u: sorted(g.adj(u)) for u in indep}
    match_r = bipartite_matching(indep, radj)
    if len(match_r) >= k:
        es = sorted(_e(u, w) for w, u in match_r.items())
        return NoCrown("matching", es[:k])
    cover = konig_cover(indep, radj, match_r)
    H = sorted(v for v in cover if v in vmset)
    matching = {h: match_r[h] for h in H}
    C = sorted(set(matching.values()))
    R = sorted(set(g.vertices) - set(C) - set(H))
    cr = Crown(C, H, R, matching)
    bad = validate_crown(g, cr)
    if bad or not H:
        raise GraphError(f"internal crown construction failed: {bad or 'H empty'}")
    return cr


# ---------------------------------------------------------------- twins


def twin_classes(g: Graph) -> list:
    """Partition of V by closed neighbourhood, classes sorted, in order of least member."""
    by = {}
    for v in g.vertices:
        key = frozenset(g.adj(v) | {v})
        by.setdefault(key, []).append(v)
    return sorted((sorted(c) for c in by.values()), key=lambda c: c[0])


# ---------------------------------------------------------------- exact oracles


def is_colorable(g: Graph, colors: int) -> bool:
    if g.n == 0:
        return True
    if colors <= 0:
        return False
    order = sorted(g.vertices, key=lambda v: -g.degree(v))
    col = {}

    def go(i):
        if i == len(order):
            return True
        v = order[i]
        used = {col[w] for w in g.adj(v) if w in col}
        top = max(col.values(), default=0)
        for c in range(1, min(colors, top + 1) + 1):  # symmetry: new colour only once
            if c not in used:
                col[v] = c
                if go(i + 1):
                    return True
                del col[v]
        return False

    return go(0)


def chromatic_number(g: Graph, max_n: int = 30) -> int:
    if g.n > max_n:
        raise OracleLimit(f"chromatic number oracle limited to {max_n} vertices")
    c = 0
    while not is_colorable(g, c):
        c += 1
    return c


def has_vertex_cover(g: Graph, k: int) -> bool:
    def go(es, k):
        if not es:
            return True
        if k == 0:
            return False
        u, v = es[0]
        return go([e for e in es if u not in e], k - 1) or go([e for e in es if v not in e], k - 1)

    return go(g.sorted_edges(), k)


def vc_min(g: Graph, max_n: int = 60) -> int:
    if g.n > max_n:
        raise OracleLimit(f"vertex cover oracle limited to {max_n} vertices")
    k = 0
    while not has_vertex_cover(g, k):
        k += 1
    return k


def maximal_cliques(g: Graph) -> list:
    h = nx.Graph()
    h.add_nodes_from(g.vertices)
    h.add_edges_from(g.sorted_edges())
    return sorted(tuple(sorted(c)) for c in nx.find_cliques(h))


def has_ecc(g: Graph, k: int) -> bool:
    cliques = [c for c in maximal_cliques(g) if len(c) >= 2]

    def go(uncovered, k):
        if not uncovered:
            return True
        if k == 0:
            return False
        u, v = min(uncovered)
        for c in cliques:
            if u in c and v in c:
                cs = set(c)
                rest = {e for e in uncovered if not (e[0] in cs and e[1] in cs)}
                if go(rest, k - 1):
                    return True
        return False

    return go(set(g.edges), k)


def ecc_min(g: Graph, max_n: int = 16) -> int:
    if g.n > max_n:
        raise OracleLimit(f"edge clique cover oracle limited to {max_n} vertices")
    k = 0
    while not has_ecc(g, k):
        k += 1
    return k


def has_hitting_set(family, k: int) -> bool:
    fam = [frozenset(s) for s in family]

    def go(fam, k):
        if not fam:
            return True
        if k == 0 or any(not s for s in fam):
            return False
        s = min(fam, key=lambda x: (len(x), sorted(x)))
        for x in sorted(s):
            if go([t for t in fam if x not in t], k - 1):
                return True
        return False

    return go(fam, k)


def hitting_min(universe, family, max_u: int = 40) -> int:
    if len(universe) > max_u:
        raise OracleLimit(f"hitting set oracle limited to {max_u} elements")
    if any(not s for s in family):
        raise GraphError("empty set in family cannot be hit")
    k = 0
    while not has_hitting_set(family, k):
        k += 1
    return k
