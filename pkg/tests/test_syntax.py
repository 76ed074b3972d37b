import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from unfotr.model import FiniteStructure, eval_formula
from unfotr.oracle import brute_force_sat
from unfotr.syntax import (
    And,
    Atom,
    Eq,
    Exists,
    Not,
    Or,
    ParseError,
    apply_sugar,
    dnf_matrix,
    parse_formula,
    render,
    to_normal_form,
    validate_unfo,
)
from unfotr.syntax.ast import strip_pos

from conftest import F_INF_SRC, F_TRIV_SRC, random_structure


def test_parse_triv(sig1):
    sig, f = parse_formula(F_TRIV_SRC)
    assert sig == sig1
    assert strip_pos(f) == Exists(("x",), Atom("P", ("x",)))
    assert sig.trans_symbols == ("T", "T~")


def test_parse_inf_shape():
    sig, f = parse_formula(F_INF_SRC)
    assert isinstance(f, And) and len(f.parts) == 2
    assert all(isinstance(p, Not) and isinstance(p.body, Exists) for p in f.parts)


def test_unknown_symbol_and_arity(sig1):
    with pytest.raises(ParseError, match="unknown symbol"):
        parse_formula("E x. Q(x)", sig1)
    with pytest.raises(ParseError, match="arity"):
        parse_formula("E x. T(x)", sig1)
    with pytest.raises(ParseError) as e:
        parse_formula("sig { unary P; }\nE x. P(x) &")
    assert e.value.line == 2


def test_reserved_names():
    with pytest.raises(ParseError, match="reserved"):
        parse_formula("sig { unary @nf0; } E x. @nf0(x)")


def test_validate_unfo(sig1):
    _, f = parse_formula(F_INF_SRC)
    assert validate_unfo(f, sig1).ok
    bad = Exists(("x", "y"), Not(Atom("T", ("x", "y"))))
    rep = validate_unfo(bad, sig1)
    assert not rep.ok and "T(x,y)" in rep.issues[0]
    assert validate_unfo(Exists(("x",), Not(Exists(("y",), Atom("T", ("x", "y"))))), sig1).ok


def test_nf_of_inf(f_inf):
    _, _, nf = f_inf
    assert nf.t == 1 and nf.m == 1
    assert strip_pos(nf.phi0) == Atom("T", ("x1", "x1"))
    assert nf.conjuncts[0].witnesses == ("y1",)
    assert not nf.introduced


def test_nf_introduces_unary():
    sig, f = parse_formula("sig { unary P; trans T; } E x. !(E y. T(x,y) & !P(y))")
    nf = to_normal_form(f, sig)
    assert nf.introduced == ("@nf0",)
    assert validate_unfo(nf.to_formula(), nf.signature).ok


def _equisat_small(src, n_max=3):
    """Every small model of the normal form satisfies the source; sat status agrees at this bound."""
    sig, f = parse_formula(src)
    nf = to_normal_form(f, sig)
    found_nf = brute_force_sat(nf, max_n=n_max)
    has_src = any(
        eval_formula(S, f)
        for n in range(1, n_max + 1)
        for S in _all_structures(sig, n)
    )
    assert (found_nf.__class__.__name__ == "FoundModel") == has_src
    if has_src:
        assert eval_formula(found_nf.structure.reduct(sig), f)


def _all_structures(sig, n):
    from unfotr.model import check_constraints

    cells = [(u, (a,)) for u in sig.unary for a in range(n)]
    cells += [(p.name, (a, b)) for p in sig.trans for a in range(n) for b in range(n)]
    for bits in itertools.product((0, 1), repeat=len(cells)):
        rows = {}
        for b, (name, t) in zip(bits, cells):
            if b:
                rows.setdefault(name, set()).add(t)
        S = FiniteStructure(sig, n, rows)
        if check_constraints(S).ok:
            yield S


def test_nf_equisat_triv():
    _equisat_small(F_TRIV_SRC, 2)


def test_nf_equisat_nested():
    _equisat_small("sig { unary P; trans T; } E x. !(E y. T(x,y) & !P(y))", 2)


def test_dnf_examples():
    sig, f = parse_formula("sig { unary P; trans T; } A x1 x2. !(T(x1,x2) & (P(x1) | !P(x2)))")
    nf = to_normal_form(f, sig)
    assert len(dnf_matrix(nf)) == 2
    _, _, nf_inf = _load(F_INF_SRC)
    ds = dnf_matrix(nf_inf)
    assert len(ds) == 1 and ds[0].T == frozenset({("T", 1, 1)})


def _load(src):
    sig, f = parse_formula(src)
    return sig, f, to_normal_form(f, sig)


def _random_nnf(rng, vs, depth):
    if depth == 0 or rng.random() < 0.3:
        kind = rng.random()
        if kind < 0.4:
            a = Atom("P", (rng.choice(vs),))
            return Not(a) if rng.random() < 0.5 else a
        return Atom(rng.choice(["T", "T~", "R"]), (rng.choice(vs), rng.choice(vs)))
    parts = tuple(_random_nnf(rng, vs, depth - 1) for _ in range(2))
    return And(parts) if rng.random() < 0.5 else Or(parts)


def test_dnf_equivalence_random():
    sig, _ = parse_formula("sig { unary P; rel R/2; trans T; } E x. P(x)")
    from unfotr.syntax.normal_form import NormalFormFormula

    rng = random.Random(5)
    for _ in range(40):
        phi0 = _random_nnf(rng, ["x1", "x2"], 3)
        nf = NormalFormFormula(sig, 2, phi0, ())
        ds = dnf_matrix(nf)
        for n in (1, 2, 3):
            S = random_structure(rng, sig, n)
            for tup in itertools.product(range(n), repeat=2):
                asg = dict(zip(("x1", "x2"), tup))
                want = eval_formula(S, phi0, asg)
                got = any(_disjunct_true(S, d, tup) for d in ds)
                assert got == want


def _disjunct_true(S, d, tup):
    for l in d.R:
        if S.holds(l.symbol, tuple(tup[i - 1] for i in l.args)) != l.positive:
            return False
    for s, i, j in d.T:
        if not S.holds(s, (tup[i - 1], tup[j - 1])):
            return False
    return True


@st.composite
def formulas(draw, depth=3, bound=("x",)):
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        v = draw(st.sampled_from(bound))
        w = draw(st.sampled_from(bound))
        kind = draw(st.integers(0, 2))
        if kind == 0:
            return Atom("P", (v,))
        if kind == 1:
            return Atom(draw(st.sampled_from(["T", "T~", "R"])), (v, w))
        return Eq(v, w)
    kind = draw(st.integers(0, 3))
    if kind == 0:
        return And((draw(formulas(depth - 1, bound)), draw(formulas(depth - 1, bound))))
    if kind == 1:
        return Or((draw(formulas(depth - 1, bound)), draw(formulas(depth - 1, bound))))
    if kind == 2:
        return Not(draw(formulas(depth - 1, bound)))
    new = f"v{depth}"
    return Exists((new,), draw(formulas(depth - 1, bound + (new,))))


@given(formulas())
def test_render_round_trip(f):
    sig, _ = parse_formula("sig { unary P; rel R/2; trans T; } E x. P(x)")
    text = render(Exists(("x",), f), sig)
    sig2, g = parse_formula(text)
    assert sig2 == sig
    assert strip_pos(g) == strip_pos(Exists(("x",), f))


def test_render_examples():
    sig, f = parse_formula(F_TRIV_SRC)
    assert render(f).replace(" ", "") == "Ex.P(x)"
    sig, f = parse_formula(F_INF_SRC)
    assert strip_pos(parse_formula(render(f, sig))[1]) == strip_pos(f)


def test_sugar():
    sig, f = parse_formula("sig { equiv E; } E x y. E(x,y)")
    plain, g = apply_sugar(sig, f)
    assert strip_pos(g) == Exists(("x", "y"), Or((And((Atom("E", ("x", "y")), Atom("E~", ("x", "y")))), Eq("x", "y"))))
    assert all(p.flag == "plain" for p in plain.trans)
    sig, f = parse_formula("sig { unary P; order T; } E x. P(x)")
    _, g = apply_sugar(sig, f)
    assert isinstance(g, And)
    assert strip_pos(g.parts[-1]) == Not(Exists(("x", "y"), And((Atom("T", ("x", "y")), Atom("T", ("y", "x"))))))
    sig, f = parse_formula(F_TRIV_SRC)
    assert apply_sugar(sig, f) == (sig, f)


@given(formulas())
def test_normal_form_is_unfo_and_sound(f):
    sig, _ = parse_formula("sig { unary P; rel R/2; trans T; } E x. P(x)")
    g = Exists(("x",), f)
    if not validate_unfo(g, sig).ok:
        return
    nf = to_normal_form(g, sig)
    assert validate_unfo(nf.to_formula(), nf.signature).ok
    out = brute_force_sat(nf, max_n=2)
    if hasattr(out, "structure"):
        assert eval_formula(out.structure.reduct(sig), g)
