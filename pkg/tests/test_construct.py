import pytest
from hypothesis import given
from hypothesis import strategies as st

from unfotr.construct import (
    BuildError,
    LogBound,
    build_finite_model,
    color_border_violations,
    estimate_size,
    instance_estimate,
    make_context,
    verify_build,
)
from unfotr.corpus import corpus
from unfotr.decide import decide_fin_sat
from unfotr.model import check_normal_form, one_type
from unfotr.syntax import parse_formula, to_normal_form


def _cert(nf):
    res = decide_fin_sat(nf)
    assert res.status == "sat"
    return res.certificate.tree


def test_estimate_base_cases():
    assert estimate_size(5, 7, 3, 1, l=0) == 1
    assert estimate_size(1, 1, 0, 0, l=1) == 2
    assert estimate_size(1, 1, 0, 0) == 2
    assert estimate_size(2, 2, 0, 0, l=1) == 2 * 4 * 2**18  # exponent 8·2·1+2


def test_estimate_switches_to_log_domain():
    big = estimate_size(10, 30, 16, 2)
    assert isinstance(big, LogBound)
    assert big > 10**100 and not big < 10**100
    assert big >= estimate_size(10, 30, 16, 1)


@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 3), st.integers(1, 2))
def test_estimate_monotone(g, n, M, l):
    base = estimate_size(g, n, M, 0, l=l)
    assert estimate_size(g + 1, n, M, 0, l=l) > base
    assert estimate_size(g, n + 1, M, 0, l=l) > base
    assert estimate_size(g, n, M + 1, 0, l=l) >= base
    if n >= 2:
        assert estimate_size(g, n, M + 1, 0, l=l) > base
    assert estimate_size(g, n, M, 0, l=l + 1) > base


def test_triv_builds_singleton(f_triv):
    _, _, nf = f_triv
    S, ctx = build_finite_model(_cert(nf), nf)
    assert S.n == 1 and S.unary("P") == {0}
    assert verify_build(S, nf, ctx).ok


def test_cyc_build(f_cyc):
    _, _, nf = f_cyc
    S, ctx = build_finite_model(_cert(nf), nf)
    assert check_normal_form(S, nf).ok
    assert verify_build(S, nf, ctx).ok
    assert S.n <= instance_estimate(ctx, nf)


def test_rejects_wide_formulas():
    sig, f = parse_formula("sig { unary P; rel R/2; trans T; } A x y z. !(R(x,y) & R(y,z) & R(x,z) & P(x))")
    nf = to_normal_form(f, sig)
    assert nf.t == 3
    with pytest.raises(BuildError, match="two-variable"):
        make_context(_cert(nf), nf)


def test_broken_pattern_type_is_reported(f_cyc):
    _, _, nf = f_cyc
    S, ctx = build_finite_model(_cert(nf), nf)
    rec = ctx.records[-1]
    rec.piece.rows.setdefault("P", set()).add((0,))
    rep = verify_build(S, nf, ctx)
    assert any(i.startswith("(b3)") and "1-type" in i for i in rep.issues)


def test_missing_total_tuple_is_reported():
    nf = corpus(7, 60)[10]
    S, ctx = build_finite_model(_cert(nf), nf)
    assert verify_build(S, nf, ctx).ok
    rec = next(r for r in ctx.records if r.piece.n > 1 and "T" not in r.E0)
    a, b = next(t for t in sorted(rec.piece.rows["T"]) if t[0] != t[1])
    rec.piece.rows["T"].discard((a, b))
    rep = verify_build(S, nf, ctx)
    assert any(i.startswith("(b1)") for i in rep.issues)


def test_color_borders():
    sig = parse_formula("sig { unary P; trans T; } E x. P(x)")[0]
    rows = {"T": {(0, 1), (1, 2), (2, 3)}}
    assert color_border_violations(sig, rows, {(0, 1): 0}) == []
    both = color_border_violations(sig, rows, {(0, 1): 0, (2, 3): 1})
    assert both and "T" in both[0]
    assert color_border_violations(sig, rows, {(0, 1): 0, (2, 3): 1}, syms=[]) == []


def test_build_is_deterministic(f_cyc):
    _, _, nf = f_cyc
    S1, _ = build_finite_model(_cert(nf), nf)
    S2, _ = build_finite_model(_cert(nf), nf)
    assert S1 == S2


def test_element_cap():
    nf = corpus(7, 60)[10]
    with pytest.raises(BuildError, match="exceeds"):
        build_finite_model(_cert(nf), nf, max_elements=2)


@pytest.mark.parametrize("idx", range(40))
def test_corpus_builds(idx):
    nf = corpus(53, 40)[idx]
    res = decide_fin_sat(nf)
    if res.status != "sat" or nf.t > 2:
        return
    try:
        S, ctx = build_finite_model(res.certificate.tree, nf, max_elements=20_000)
    except BuildError as e:
        pytest.skip(f"capped build: {e}")
    rep = verify_build(S, nf, ctx)
    assert rep.ok, rep.issues[:3]
    assert S.n <= instance_estimate(ctx, nf)
    for a in S.domain:
        assert one_type(S, a) in set(ctx.pt.types)
