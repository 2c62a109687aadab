import itertools

import pytest
from hypothesis import given, settings, strategies as st

from kernelcert import graphs as gl
from kernelcert import social
from kernelcert.encoders import (EncodeError, arrow_layout, encode_arrow, encode_col, encode_dualcol,
                                 encode_ecc, encode_gs, encode_hitting, encode_kneser, encode_schrijver,
                                 encode_vc, schrijver_into_kneser)
from kernelcert.formula import eval_formula
from kernelcert.solver import is_sat


def sat(enc):
    return is_sat(enc.formula.nvars, enc.formula.clauses)


def test_col_k3_two_colours():
    e = encode_col(gl.complete_graph(3), 2)
    assert e.formula.nvars == 9 and len(e.formula.clauses) == 15 and not sat(e)


def test_col_k3_three_colours():
    assert sat(encode_col(gl.complete_graph(3), 3))


def test_kneser_as_colouring():
    e = encode_col(gl.build_kneser(5, 2), 2)
    names = [nm for _, nm in e.formula.registry.items()]
    assert sum(nm[0] == "X" for nm in names) == 20 and sum(nm[0] == "Y" for nm in names) == 45
    assert not sat(e)


def test_dualcol_examples():
    e = encode_dualcol(gl.complete_graph(4), 2)
    assert e.params["colors"] == 2 and not sat(e)
    e = encode_dualcol(gl.Graph(3), 2)
    assert e.params["colors"] == 1 and sat(e)
    e = encode_dualcol(gl.cycle_graph(5), 2)
    assert e.params["colors"] == 3 and sat(e)


def test_dualcol_needs_k_below_n():
    with pytest.raises(EncodeError):
        encode_dualcol(gl.complete_graph(3), 3)


def test_vc_examples():
    assert not sat(encode_vc(gl.complete_graph(3), 1))
    assert sat(encode_vc(gl.path_graph(2), 1))
    assert sat(encode_vc(gl.star_graph(5), 2))


def test_ecc_examples():
    assert not sat(encode_ecc(gl.cycle_graph(4), 2))
    assert sat(encode_ecc(gl.complete_graph(3), 1))
    assert sat(encode_ecc(gl.complete_graph(4), 1))


def test_hitting_examples():
    assert not sat(encode_hitting([1, 2, 3, 4], [(1, 2), (3, 4)], 1, 2))
    assert sat(encode_hitting([1, 2, 3, 4], [(1, 2), (3, 4)], 2, 2))
    assert sat(encode_hitting([1], [(1,)], 1, 1))


def test_hitting_rejects_large_set():
    with pytest.raises(EncodeError):
        encode_hitting([1, 2, 3], [(1, 2, 3)], 1, 2)


def test_kneser_family():
    assert not sat(encode_kneser(5, 2))
    s = encode_schrijver(5, 2)
    assert s.params["graph"].n == 5 and s.params["colors"] == 2 and not sat(s)
    s6 = encode_schrijver(6, 2)
    assert sat(s6) == (gl.chromatic_number(s6.params["graph"]) <= 3)


def test_schrijver_embeds_into_kneser():
    m = schrijver_into_kneser(6, 2)
    s, kn = encode_schrijver(6, 2), encode_kneser(6, 2)
    assert len(set(m.values())) == len(m)
    kc = set(kn.formula.clauses)
    for c in s.formula.clauses:
        img = tuple(sorted((1 if l > 0 else -1) * m[abs(l)] for l in c))
        if len(img) > 1 or img[0] < 0 or kn.formula.registry.name(abs(img[0]))[0] == "X":
            # colouring clauses map onto Kneser clauses; Y units map onto Y units of the same edge
            assert img in kc


def test_arrow_sizes_and_base_case():
    e = encode_arrow(3, 2)
    assert e.formula.nvars == 216 and not sat(e)


def test_gs_sizes_and_base_case():
    e = encode_gs(3, 2)
    assert e.formula.nvars == 108 and not sat(e)


def _arrow_assignment(table, m, n):
    ords, profs = arrow_layout(m, n)
    mf = len(ords)
    a = {}
    for r, R in enumerate(profs):
        for p, pi in enumerate(ords):
            a[r * mf + p + 1] = table(R) == pi
    return a


def test_arrow_two_alternatives_satisfiable():
    t = social.majority_swf_2(2)
    e = encode_arrow(2, 2)
    assert eval_formula(e.formula, _arrow_assignment(t, 2, 2))


def test_gs_two_objects_satisfiable():
    t = social.majority_scf_2(2)
    assert social.is_strategyproof(t)[0] and social.is_onto(t)[0]
    _, profs = arrow_layout(2, 2)
    a = {r * 2 + o: t(R) == o for r, R in enumerate(profs) for o in (1, 2)}
    assert eval_formula(encode_gs(2, 2).formula, a)


def test_literal_cap():
    with pytest.raises(EncodeError):
        encode_arrow(4, 3, max_lits=1000)


@pytest.mark.parametrize("kind", ["swf", "scf"])
def test_encoding_semantics_exhaustive(kind):
    """Tiny scale: a table satisfies the encoding iff it has the axioms."""
    enc = encode_arrow(2, 2) if kind == "swf" else encode_gs(2, 2)
    _, profs = arrow_layout(2, 2)
    for t in social.all_tables(kind, 2, 2):
        if kind == "swf":
            a = _arrow_assignment(t, 2, 2)
            want = social.is_unanimous(t)[0] and social.is_iia(t)[0] and not social.is_dictatorial(t)[0]
        else:
            a = {r * 2 + o: t(R) == o for r, R in enumerate(profs) for o in (1, 2)}
            want = (social.is_onto(t)[0] and social.is_strategyproof(t)[0]
                    and not social.is_dictatorial(t)[0])
        assert eval_formula(enc.formula, a) == want


graph_st = st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.just(n), st.sets(st.sampled_from(list(itertools.combinations(range(1, n + 1), 2)) or [(0, 0)]))))


def _graph(data):
    n, es = data
    return gl.Graph(n, frozenset(e for e in es if e[0] > 0))


@settings(max_examples=60, deadline=None)
@given(graph_st, st.integers(1, 4))
def test_col_matches_oracle(data, c):
    g = _graph(data)
    assert sat(encode_col(g, c)) == gl.is_colorable(g, c)


@settings(max_examples=60, deadline=None)
@given(graph_st, st.integers(1, 3))
def test_vc_matches_oracle(data, k):
    g = _graph(data)
    # the encoding asks for exactly k distinct cover vertices, all non-isolated
    noniso = g.n - len(g.isolated())
    want = gl.has_vertex_cover(g, k) and noniso >= k
    assert sat(encode_vc(g, k)) == want


@settings(max_examples=60, deadline=None)
@given(graph_st, st.integers(1, 3))
def test_ecc_matches_oracle(data, k):
    g = _graph(data)
    assert sat(encode_ecc(g, k)) == gl.has_ecc(g, k)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6).flatmap(lambda u: st.tuples(st.just(u), st.lists(
    st.lists(st.integers(1, u), min_size=1, max_size=2, unique=True), min_size=1, max_size=6))),
    st.integers(1, 3))
def test_hitting_matches_oracle(data, k):
    u, fam = data
    want = gl.has_hitting_set(fam, k)  # slots may repeat an element
    assert sat(encode_hitting(range(1, u + 1), fam, k, 2)) == want
