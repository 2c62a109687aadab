
import pytest
from hypothesis import given, settings, strategies as st

from kernelcert.checker import check_certificate, check_text, cnf_fingerprint
from kernelcert.formula import formula_from_clauses
from kernelcert.proof import (Certificate, ListBuilder, NestedBuilder, ProofError, RootBuilder,
                              bound_evaluate, deduction_transform, replay, resolve_clauses,
                              size_report)
from kernelcert.solver import is_sat, refute
from kernelcert.witness import emit_php_refutation, php_clauses


def _text(nvars, clauses, body):
    return f"p ecert {nvars} {len(clauses)} {cnf_fingerprint(nvars, clauses)}\n{body}"


# ---------------------------------------------------------------- resolution


def test_resolve_basic():
    assert resolve_clauses((1, 2), (-1, 3), 1) == (2, 3)


def test_resolve_to_empty():
    assert resolve_clauses((1,), (-1,), 1) == ()


def test_resolve_tautology_rejected():
    with pytest.raises(ProofError):
        resolve_clauses((1, 2), (-1, -2), 1)


def test_resolve_missing_pivot():
    with pytest.raises(ProofError):
        resolve_clauses((1, 2), (1, 3), 1)


# ---------------------------------------------------------------- checker


CONTRA = [(1,), (-1,)]


def test_checker_accepts_contradiction():
    v = check_text(1, CONTRA, _text(1, CONTRA, "A 1\nA 2\nR 1 2 1\nT 3\n"))
    assert v.ok and str(v) == "Accept"


def test_checker_bad_pivot():
    cs = [(1,), (-1,), (2,)]
    v = check_text(2, cs, _text(2, cs, "A 1\nA 2\nR 1 2 2\nT 3\n"))
    assert not v.ok and v.step == 3 and "pivot" in v.reason


def test_checker_axiom_out_of_range():
    v = check_text(1, CONTRA, _text(1, CONTRA, "A 1\nA 3\nR 1 2 1\nT 3\n"))
    assert not v.ok and v.step == 2


def test_checker_forward_reference():
    v = check_text(1, CONTRA, _text(1, CONTRA, "A 1\nR 1 3 1\nA 2\nT 2\n"))
    assert not v.ok and v.step == 2


def test_checker_non_fresh_gate():
    v = check_text(1, CONTRA, _text(1, CONTRA, "GA 1 1 1\nA 1\nA 2\nR 2 3 1\nT 4\n"))
    assert not v.ok and v.step == 1


def test_checker_reused_gate_var():
    cs = [(1,), (-2,)]
    v = check_text(2, cs, _text(2, cs, "GA 3 1 2\nGO 3 2 1\nT 1\n"), want_empty=False)
    assert not v.ok and v.step == 2


def test_checker_fingerprint_mismatch():
    v = check_text(1, CONTRA, "p ecert 1 2 0000000000000000\nA 1\nA 2\nR 1 2 1\nT 3\n")
    assert not v.ok and "fingerprint" in v.reason


def test_checker_nonempty_final_target():
    cs = [(1, 2), (-1,)]
    v = check_text(2, cs, _text(2, cs, "A 1\nA 2\nR 1 2 1\nT 3\n"))
    assert not v.ok
    assert check_text(2, cs, _text(2, cs, "A 1\nA 2\nR 1 2 1\nT 3\n"), expect=[(2,)], want_empty=False).ok


def test_checker_gate_subclauses_and_weakening():
    # v3 <-> x1 & x2 ; from (x1), (x2) derive v3, then the empty clause against (-v3)
    cs = [(1,), (2,), (-3 + 0,)]
    cs = [(1,), (2,)]
    body = "GA 3 1 2\nA 1\nA 2\nR 1.3 2 1\nR 4 3 2\nW 5 -1 0\nT 5\nT 6\n"
    v = check_text(2, cs, _text(2, cs, body), expect=[(3,), (-1, 3)], want_empty=False)
    assert v.ok, v


def test_php_3_2_accepted():
    cert = emit_php_refutation(3, 2)
    x = {(i, j): (i - 1) * 2 + j for i in range(1, 4) for j in range(1, 3)}
    assert check_text(6, php_clauses(3, 2, x), cert.to_text()).ok


def test_certificate_text_roundtrip():
    cert = emit_php_refutation(4, 3)
    back = Certificate.from_text(cert.to_text())
    assert back.to_text() == cert.to_text()
    assert back.step_count() == cert.step_count()


def test_certificate_bad_text():
    with pytest.raises(ProofError):
        Certificate.from_text("p ecert 1 1 abc\nX 1\n")


# ---------------------------------------------------------------- deduction transform


def test_deduction_single_unit():
    prem = [(-1,)]
    cert = Certificate(1, 2, "", [("A", 1), ("A", 2), ("R", 1, 2, 1)], [3])
    out = deduction_transform(prem, [1], cert)
    assert out.step_count() <= min(3, cert.step_count())
    assert check_text(1, prem, out.to_text(), expect=[(-1,)], want_empty=False).ok


def test_deduction_target_is_axiom():
    prem = [(-2, -1)]
    cert = Certificate(2, 3, "", [("A", 1), ("A", 2), ("R", 1, 2, 1), ("A", 3), ("R", 3, 4, 2)], [5])
    out = deduction_transform(prem, [1, 2], cert)
    assert out.step_count() <= cert.step_count()
    assert check_text(2, prem, out.to_text(), expect=[(-2, -1)], want_empty=False).ok


def test_deduction_rejects_non_refutation():
    cert = Certificate(2, 2, "", [("A", 1)], [1])
    with pytest.raises(ProofError):
        deduction_transform([(1, 2)], [1], cert)


cnf_st = st.integers(3, 7).flatmap(lambda nv: st.tuples(
    st.just(nv),
    st.lists(st.lists(st.integers(1, nv), min_size=1, max_size=3, unique=True).flatmap(
        lambda vs: st.tuples(*[st.sampled_from([v, -v]) for v in vs])), min_size=1, max_size=25),
    st.lists(st.integers(1, nv), min_size=1, max_size=3, unique=True).flatmap(
        lambda vs: st.tuples(*[st.sampled_from([v, -v]) for v in vs]))))


@settings(max_examples=80, deadline=None)
@given(cnf_st)
def test_deduction_property(data):
    nv, F, Z = data
    F = [tuple(sorted(c)) for c in F]
    prem = F + [(z,) for z in Z]
    if is_sat(nv, prem):
        return
    b = ListBuilder(nv, prem)
    cert = b.finish([refute(b, nv, b.premises)])
    out = deduction_transform(F, list(Z), cert)
    assert out.step_count() <= cert.step_count()
    negz = tuple(sorted(-z for z in Z))
    if is_sat(nv, F):
        assert check_text(nv, F, out.to_text(), expect=[negz], want_empty=False).ok
    else:
        # a refutation that never used an assumption has no step to spare for weakening:
        # the conclusion is then a subclause of the negated assumptions
        assert check_text(nv, F, out.to_text(), want_empty=False).ok
        got = replay(F, out.steps)[out.targets[-1]]
        assert set(got) <= set(negz)


# ---------------------------------------------------------------- composition


def test_two_branch_composition():
    # (a | b), (-a | c), (-b | c), (-c): branch on a and on -a, cover by resolution
    f = formula_from_clauses([(1, 2), (-1, 3), (-2, 3), (-3,)])
    B = RootBuilder(f)
    ends = []
    for z in (1, -1):
        N = NestedBuilder(B, [z], label=f"branch{z}")
        r = refute(N, 3, [(1, 2), (-1, 3), (-2, 3), (-3,), (z,)])
        ends.append(N.close(r))
    B.label = "cover"
    empty = B.resolve(ends[0], ends[1])
    cert = B.finish([empty])
    assert check_certificate(f, cert).ok
    rep = size_report(cert, R=2, C=1)
    assert rep.R == 2 and rep.consistent()
    assert set(rep.subtotals) <= {"branch1", "branch-1", "cover", "glue"}


def test_size_report_subtotals():
    cert = emit_php_refutation(4, 3)
    rep = size_report(cert)
    assert rep.consistent() and rep.step_count == cert.step_count()


# ---------------------------------------------------------------- bound


def test_bound_single_node():
    assert bound_evaluate(None, 10, 4, 1, 0) == (14, False)


def test_bound_chain():
    assert bound_evaluate(None, 10, 4, 1, 2)[0] == 3 * 14


def test_bound_tree():
    assert bound_evaluate(None, 10, 4, 2, 2)[0] == 7 * 14


def test_bound_saturates():
    val, sat = bound_evaluate(None, 10 ** 9, 10 ** 9, 10, 40)
    assert sat and val == 2 ** 63 - 1


def test_bound_negative_rejected():
    with pytest.raises(ProofError):
        bound_evaluate(None, 1, 1, -1, 0)


@given(st.integers(0, 5), st.integers(0, 6), st.integers(0, 100), st.integers(0, 100))
def test_bound_is_geometric(R, C, h, g):
    val, _ = bound_evaluate(None, h, g, R, C)
    assert val == sum(R ** i for i in range(C + 1)) * (h + g)
