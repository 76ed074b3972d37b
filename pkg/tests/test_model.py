import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from unfotr.model import (
    FiniteStructure,
    atomic_type,
    check_constraints,
    check_hom_conditions,
    check_normal_form,
    class_of,
    disjoint_union,
    eval_formula,
    format_model,
    one_type,
    parse_model,
    transitive_close,
)
from unfotr.model.io import ModelFormatError, model_from_json, model_to_json
from unfotr.model.structure import closure_reference
from unfotr.oracle import FoundModel, brute_force_sat
from unfotr.syntax import parse_formula, to_normal_form

from conftest import F_CYC_SRC, F_INF_SRC, random_structure


def test_close_one_step(sig1):
    S = transitive_close(FiniteStructure(sig1, 3, {"T": {(0, 1), (1, 2)}}))
    assert S.tuples("T") == {(0, 1), (1, 2), (0, 2)}
    assert S.tuples("T~") == {(1, 0), (2, 1), (2, 0)}


def test_close_idempotent(m_path2):
    assert transitive_close(transitive_close(m_path2)) == transitive_close(m_path2)


def test_close_uses_inverse_rows(sig1):
    S = transitive_close(FiniteStructure(sig1, 3, {"T": {(0, 1)}, "T~": {(2, 1)}}))
    assert (0, 2) in S.tuples("T")


@pytest.mark.parametrize("seed", range(100))
def test_close_matches_reference(seed, sig1):
    rng = random.Random(seed)
    n = rng.randint(1, 8)
    pairs = {(a, b) for a in range(n) for b in range(n) if rng.random() < 0.25}
    S = transitive_close(FiniteStructure(sig1, n, {"T": pairs}))
    assert set(S.tuples("T")) == closure_reference(pairs, n)


def test_close_large_path_uses_scc(sig1):
    n = 90
    pairs = {(i, i + 1) for i in range(n - 1)} | {(n - 1, 50)}
    S = transitive_close(FiniteStructure(sig1, n, {"T": pairs}))
    assert set(S.tuples("T")) == closure_reference(pairs, n)


@given(st.sets(st.tuples(st.integers(0, 5), st.integers(0, 5))), st.sets(st.tuples(st.integers(0, 5), st.integers(0, 5))))
def test_close_monotone(a, b):
    sig, _ = parse_formula(F_INF_SRC)
    A = transitive_close(FiniteStructure(sig, 6, {"T": a}))
    B = transitive_close(FiniteStructure(sig, 6, {"T": a | b}))
    assert A.tuples("T") <= B.tuples("T")
    assert check_constraints(B).ok


def test_eval_path2(m_path2):
    sig = m_path2.signature
    assert eval_formula(m_path2, parse_formula("P(x)", sig)[1], {"x": 1})
    assert not eval_formula(m_path2, parse_formula("T(x,y)", sig)[1], {"x": 1, "y": 0})
    assert eval_formula(m_path2, parse_formula("E y. T(x,y)", sig)[1], {"x": 0})


def test_eval_unbound(m_path2):
    with pytest.raises(Exception):
        eval_formula(m_path2, parse_formula("P(x)", m_path2.signature)[1], {})


def test_check_nf_examples(f_inf, f_cyc):
    sig, _, nf = f_inf
    S = FiniteStructure(sig, 1, {"T": {(0, 0)}, "T~": {(0, 0)}})
    rep = check_normal_form(S, nf)
    assert not rep.ok and any("(0,)" in i for i in rep.issues)
    sig, _, nf = f_cyc
    out = brute_force_sat(nf, max_n=4)
    assert isinstance(out, FoundModel)
    assert check_normal_form(out.structure, nf).ok
    # hand-written two-cycle
    cyc = FiniteStructure(nf.signature, 2, {"R": {(0, 1), (1, 0)}})
    assert check_normal_form(cyc, nf).ok


def test_empty_conjuncts_vacuous():
    sig, f = parse_formula("sig { unary P; trans T; } A x. !(P(x) & !P(x))")
    nf = to_normal_form(f, sig)
    assert nf.m == 0
    assert check_normal_form(FiniteStructure(nf.signature, 3, {}), nf).ok


def test_atomic_types(m_path2):
    assert one_type(m_path2, 0).atoms == frozenset()
    assert one_type(m_path2, 0).literals(m_path2.signature) == ["!P", "!T(x,x)"]
    ab = atomic_type(m_path2, (0, 1))
    assert ("T", (1, 2)) in ab and ("T~", (2, 1)) in ab
    assert ("T", (2, 1)) not in ab
    loop = FiniteStructure(m_path2.signature, 1, {"T": {(0, 0)}, "T~": {(0, 0)}})
    assert "T" in atomic_type(loop, 0)
    with pytest.raises(ValueError):
        atomic_type(m_path2, (0, 0))


@pytest.mark.parametrize("seed", range(20))
def test_two_type_restricts_to_one_type(seed, sig1):
    rng = random.Random(seed)
    S = random_structure(rng, sig1, 4)
    for a in range(4):
        for b in range(4):
            if a != b:
                assert atomic_type(S, (a, b)).restrict_left() == atomic_type(S, a)


def test_class_of(m_path2, sig1):
    E = {"T", "T~"}
    assert class_of(m_path2, 0, E) == {0}
    assert class_of(m_path2, 1, set()) == {0, 1}
    tot = FiniteStructure(sig1, 2, {"T": {(a, b) for a in range(2) for b in range(2)}})
    tot = transitive_close(tot)
    assert class_of(tot, 0, E) == {0, 1}
    with pytest.raises(ValueError, match="inverses"):
        class_of(m_path2, 0, {"T"})


def test_constraints(sig1, m_path2):
    S = FiniteStructure(sig1, 3, {"T": {(0, 1), (1, 2)}, "T~": {(1, 0), (2, 1)}})
    rep = check_constraints(S)
    assert any("(0,1,2)" in i for i in rep.issues)
    assert check_constraints(transitive_close(m_path2)).ok
    bad = FiniteStructure(sig1, 2, {"T": {(0, 1)}, "T~": {(0, 1)}})
    assert any("inverse pair" in i for i in check_constraints(bad).issues)


def test_hom_conditions(f_cyc):
    _, _, nf = f_cyc
    S1 = brute_force_sat(nf, max_n=4).structure
    assert check_hom_conditions(S1, S1, nf).ok
    S2, _ = disjoint_union([S1, S1])
    assert check_hom_conditions(S2, S1, nf).ok
    lonely, _ = disjoint_union([S1, FiniteStructure(S1.signature, 1, {})])
    rep = check_hom_conditions(lonely, S1, nf)
    assert any(i.startswith("(a1)") for i in rep.issues)


@pytest.mark.parametrize("seed", range(15))
def test_hom_conditions_transfer_formula(seed):
    """Passing conditions plus a model S1 imply S2 is a model."""
    sig, f = parse_formula(F_CYC_SRC)
    nf = to_normal_form(f, sig)
    rng = random.Random(seed)
    S1 = brute_force_sat(nf, max_n=4).structure
    S2 = random_structure(rng, nf.signature, rng.randint(1, 4), density=0.5)
    if check_hom_conditions(S2, S1, nf).ok:
        assert check_normal_form(S2, nf).ok


def test_model_io_round_trip(m_path2):
    text = format_model(m_path2)
    assert text.splitlines()[0] == "domain 2"
    assert parse_model(text, m_path2.signature) == m_path2
    assert model_from_json(model_to_json(m_path2), m_path2.signature) == m_path2
    inferred = parse_model("domain 2\nT : (0,1)\nT~ : (1,0)\nP : (1)\n")
    assert inferred.signature.trans_symbols == ("T", "T~")
    with pytest.raises(ModelFormatError):
        parse_model("domain 2\nT : (0,5)\n", m_path2.signature)
    with pytest.raises(ModelFormatError):
        parse_model("T : (0,1)\n")


def test_oracle_models_satisfy_source():
    for src in (F_CYC_SRC, "sig { unary P; trans T; } (E x. P(x)) & (A x. !(P(x) & !(E y. T(x,y) & !P(y))))"):
        sig, f = parse_formula(src)
        nf = to_normal_form(f, sig)
        out = brute_force_sat(nf, max_n=4)
        assert isinstance(out, FoundModel)
        assert check_normal_form(out.structure, nf).ok
        assert eval_formula(out.structure.reduct(sig), f)
