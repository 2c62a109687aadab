import itertools

import pytest
from hypothesis import given, settings, strategies as st

from kernelcert import graphs as gl
from kernelcert.rng import SplitMix64


def test_kneser_5_2():
    g = gl.build_kneser(5, 2)
    assert g.n == 10 and len(g.edges) == 15


def test_stable_kneser_5_2_is_cycle():
    g = gl.build_stable_kneser(5, 2)
    assert g.n == 5 and len(g.edges) == 5 and all(g.degree(v) == 2 for v in g.vertices)
    import networkx as nx
    h = nx.Graph(list(g.edges))
    assert nx.is_connected(h)


def test_kneser_4_2_is_perfect_matching():
    g = gl.build_kneser(4, 2)
    assert g.n == 6 and len(g.edges) == 3 and all(g.degree(v) == 1 for v in g.vertices)


def test_matching_small():
    assert len(gl.max_matching(gl.cycle_graph(4))) == 2
    assert len(gl.max_matching(gl.complete_graph(3))) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 36 - 1))
def test_matching_vs_brute_force(mask):
    pairs = list(itertools.combinations(range(1, 10), 2))
    g = gl.Graph(9, frozenset(p for i, p in enumerate(pairs) if mask >> i & 1 and i % 3 == 0))
    m = gl.max_matching(g)
    assert gl.is_matching(g, m)
    assert len(m) == gl.brute_max_matching(g)


def test_figure_crown():
    g = gl.fig_crown_graph()
    drawn = gl.Crown([1, 2, 3, 4], [5, 6, 7], [8, 9, 10, 11], {5: 1, 6: 2, 7: 3})
    assert gl.validate_crown(g, drawn) is None
    for k in range(1, 6):
        res = gl.find_crown(g, k)
        if isinstance(res, gl.Crown):
            assert gl.validate_crown(g, res) is None
        else:
            assert res.reason == "small" or gl.is_matching(g, res.matching)


def test_validator_rejects_broken_crowns():
    g = gl.fig_crown_graph()
    assert gl.validate_crown(g, gl.Crown([1, 2, 3, 4, 5], [6, 7], [8, 9, 10, 11], {6: 2, 7: 3}))
    assert gl.validate_crown(g, gl.Crown([1, 2, 3, 4], [5, 6, 7], [8, 9, 10, 11], {5: 1, 6: 1, 7: 3}))
    assert gl.validate_crown(g, gl.Crown([1, 2, 3, 4], [5, 6, 7], [8, 9, 10], {5: 1, 6: 2, 7: 3}))


def test_star_after_center_removal():
    g = gl.star_graph(6)
    child, _ = g.remove([1])
    # the complement of six isolated vertices is K6: a matching of size 2 exists
    res = gl.find_crown(child.complement(), 2)
    assert isinstance(res, gl.NoCrown) or gl.validate_crown(child.complement(), res) is None


def test_perfect_matching_has_no_crown():
    k = 3
    g = gl.Graph(2 * k, frozenset((2 * i + 1, 2 * i + 2) for i in range(k)))
    res = gl.find_crown(g, k)
    assert isinstance(res, gl.NoCrown) and res.reason == "matching" and len(res.matching) >= k


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 64 - 1), st.integers(2, 14), st.integers(1, 4))
def test_crowns_are_valid(seed, n, k):
    rng = SplitMix64(seed)
    g = gl.random_graph(rng, n, rng.random() * 0.5)
    iso = g.isolated()
    if iso:
        g, _ = g.remove(iso)
    if g.n == 0:
        return
    res = gl.find_crown(g, k)
    if isinstance(res, gl.Crown):
        assert gl.validate_crown(g, res) is None
    elif res.reason == "matching":
        assert gl.is_matching(g, res.matching) and len(res.matching) == k
    else:
        assert g.n <= 3 * k - 2


def test_twins_k4():
    assert gl.twin_classes(gl.complete_graph(4)) == [[1, 2, 3, 4]]


def test_twins_c4_by_definition():
    g = gl.cycle_graph(4)
    for cls in gl.twin_classes(g):
        for a, b in itertools.combinations(cls, 2):
            assert g.adj(a) | {a} == g.adj(b) | {b}
    assert all(len(c) == 1 for c in gl.twin_classes(g))


def test_twins_path_endpoints_not_twins_of_center():
    cls = gl.twin_classes(gl.path_graph(3))
    assert not any(2 in c and len(c) > 1 for c in cls)


def test_oracles():
    assert gl.chromatic_number(gl.build_kneser(5, 2)) == 3
    assert gl.vc_min(gl.complete_graph(3)) == 2
    assert gl.ecc_min(gl.cycle_graph(4)) == 4
    assert gl.hitting_min([1, 2, 3, 4], [(1, 2), (3, 4)]) == 2


@pytest.mark.parametrize("n,k", [(5, 2), (6, 2), (7, 2)])
def test_kneser_chromatic_number(n, k):
    assert gl.chromatic_number(gl.build_kneser(n, k)) == n - 2 * k + 2


def test_oracle_limit():
    with pytest.raises(gl.OracleLimit):
        gl.chromatic_number(gl.complete_graph(31))


def test_graph_dimacs_roundtrip():
    g = gl.fig_crown_graph()
    assert gl.graph_from_dimacs(g.to_dimacs()).edges == g.edges


def test_graph_rejects_loops():
    with pytest.raises(gl.GraphError):
        gl.Graph(2, frozenset([(1, 1)]))


def test_crown_fixture_is_unsat():
    rng = SplitMix64(5)
    for c in (1, 2, 3):
        g, k = gl.crown_dualcol_fixture(rng, c, c + 2)
        assert not g.universal()
        assert gl.chromatic_number(g) > g.n - k
