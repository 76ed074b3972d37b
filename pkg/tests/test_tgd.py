import random

import pytest

from unfotr.decide import DecideConfig
from unfotr.oracle import FoundModel, brute_force_sat
from unfotr.syntax import ParseError, to_normal_form, validate_unfo
from unfotr.syntax.ast import Atom, And, Exists, Not
from unfotr.tgd import (
    TGD,
    EntailConfig,
    check_counter_model,
    finite_entails,
    parse_kb,
    tgd_formula,
    translate,
    validate_frontier_one,
)

from conftest import TGD_PART

TGD_PART_REL = TGD_PART.replace("trans T;", "rel T/2;")


def test_parse_part():
    kb = parse_kb(TGD_PART)
    assert kb.facts == (("P", ("0",)),)
    assert kb.individuals == ["0"]
    (t,) = kb.tgds
    assert t.exists == ("y",) and t.frontier == {"x"}
    assert str(t) == "P(x) -> E y. T(x,y) & P(y)"


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_kb("facts { P(a); }")
    with pytest.raises(ParseError, match="positive"):
        parse_kb("sig { unary P; } query { E x. !P(x); }")
    with pytest.raises(ParseError, match="free"):
        parse_kb("sig { unary P; } query { P(x); }")
    with pytest.raises(ParseError, match="unknown block"):
        parse_kb("sig { unary P; } rules { P(a); }")


def test_frontier_one_validation():
    x, y, z = "x", "y", "z"
    ok = TGD((Atom("P", (x,)),), (y,), (Atom("T", (x, y)), Atom("P", (y,))))
    assert validate_frontier_one(ok).ok
    wide = TGD((Atom("R", (x, y)),), (z,), (Atom("S", (x, y, z)),))
    rep = validate_frontier_one(wide)
    assert not rep.ok and "['x', 'y']" in rep.issues[0]
    assert validate_frontier_one(TGD((Atom("P", (x,)),), (), (Atom("Q", (x,)),))).ok


def test_tgd_formula_shape():
    t = parse_kb(TGD_PART).tgds[0]
    f = tgd_formula(t)
    assert isinstance(f, Not) and isinstance(f.body, Exists) and f.body.vars == ("x",)
    assert isinstance(f.body.body, And)


def test_translate_is_unfo():
    kb = parse_kb(TGD_PART)
    sig, f = translate(kb)
    assert "ind_0" in sig.unary
    assert validate_unfo(f, sig).ok
    two = parse_kb(TGD_PART.replace("tgd {", "tgd { P(x) -> Q(x);").replace("unary P;", "unary P; unary Q;"))
    _, g = translate(two)
    assert sum(1 for p in g.parts if isinstance(p, Not) and isinstance(p.body, Exists)) == 2 + 1


def test_translate_rejects_wide_tgd():
    kb = parse_kb("sig { unary P; rel R/2; rel S/3; } tgd { R(x,y) -> E z. S(x,y,z); }")
    with pytest.raises(ValueError, match="frontier"):
        translate(kb)


def test_entailed_with_transitivity():
    res = finite_entails(parse_kb(TGD_PART))
    assert res.status == "entailed"
    sig, f = translate(parse_kb(TGD_PART))
    assert not isinstance(brute_force_sat(to_normal_form(f, sig), max_n=5), FoundModel)


def test_not_entailed_without_transitivity():
    kb = parse_kb(TGD_PART_REL)
    res = finite_entails(kb)
    assert res.status == "not-entailed"
    M = res.counter_model
    assert M.n <= 3
    assert check_counter_model(kb, M).ok
    assert not any(M.holds("T", (a, a)) for a in M.domain)


def test_query_among_facts():
    kb = parse_kb("sig { unary P; trans T; } facts { P(a); T(a,a); } query { E x. T(x,x); }")
    assert finite_entails(kb).status == "entailed"


def test_no_dependencies():
    kb = parse_kb("sig { unary P; unary Q; } facts { P(a); } query { E x. P(x); }")
    assert finite_entails(kb).status == "entailed"
    kb = parse_kb("sig { unary P; unary Q; } facts { P(a); } query { E x. Q(x); }")
    assert finite_entails(kb).status == "not-entailed"


def _random_kb(rng):
    lines = ["sig { unary P; unary Q; trans T; }"]
    # one named individual: each individual doubles the 1-type universe
    facts = [rng.choice(["P(a)", "Q(a)", "T(a,a)"]) for _ in range(rng.randint(1, 2))]
    lines.append("facts { " + " ".join(f + ";" for f in facts) + " }")
    tgds = []
    for _ in range(rng.randint(0, 2)):
        body = rng.choice(["P(x)", "Q(x)", "T(w,x)", "P(w) & T(w,x)"])
        head = rng.choice(["E y. T(x,y) & Q(y)", "Q(x)", "E y. T(y,x) & P(y)", "P(x)"])
        tgds.append(f"{body} -> {head};")
    if tgds:
        lines.append("tgd { " + " ".join(tgds) + " }")
    q = rng.choice(["E x. T(x,x)", "E x y. P(x) & T(x,y) & Q(y)", "E x. P(x) & Q(x)"])
    lines.append(f"query {{ {q}; }}")
    return parse_kb("\n".join(lines))


@pytest.mark.parametrize("seed", range(20))
def test_agrees_with_oracle(seed):
    kb = _random_kb(random.Random(seed))
    res = finite_entails(kb, EntailConfig(DecideConfig(time_budget=10), oracle_max_n=3))
    sig, f = translate(kb)
    out = brute_force_sat(to_normal_form(f, sig), max_n=3)
    if res.status == "entailed":
        assert not isinstance(out, FoundModel)
    if isinstance(out, FoundModel):
        assert res.status == "not-entailed"
    if res.status == "not-entailed":
        assert check_counter_model(kb, res.counter_model).ok
