import pytest

from unfotr.corpus import corpus
from unfotr.model import check_constraints, check_normal_form
from unfotr.oracle import (
    FoundModel,
    NoModelUpTo,
    OracleBudgetExceeded,
    OracleConfig,
    brute_force_sat,
    cross_check,
    expand_model,
    min_model_size,
)
from unfotr.syntax import parse_formula, to_normal_form

ENUM = OracleConfig(backend="enum")


def test_inf_has_no_small_model(f_inf):
    out = brute_force_sat(f_inf[2], max_n=5)
    assert out == NoModelUpTo(5)
    assert min_model_size(f_inf[2], max_n=4) is None


def test_cyc_smallest_model_is_a_two_cycle(f_cyc):
    out = brute_force_sat(f_cyc[2], max_n=3)
    assert isinstance(out, FoundModel) and out.size == 2
    assert out.structure.tuples("R") == {(0, 1), (1, 0)}
    assert min_model_size(f_cyc[2], max_n=4) == 2


def test_triv(f_triv):
    out = brute_force_sat(f_triv[2], max_n=1)
    assert out.size == 1 and out.structure.unary("P") == {0}
    assert min_model_size(f_triv[2]) == 1


def test_backends_agree_on_examples(f_inf, f_cyc, f_triv):
    for _, _, nf in (f_inf, f_cyc, f_triv):
        a = brute_force_sat(nf, max_n=3)
        b = brute_force_sat(nf, max_n=3, cfg=ENUM)
        assert type(a) is type(b)
        if isinstance(a, FoundModel):
            assert a.size == b.size


@pytest.mark.parametrize("idx", range(30))
def test_backends_agree_on_corpus(idx):
    nf = corpus(19, 30)[idx]
    a = brute_force_sat(nf, max_n=2)
    b = brute_force_sat(nf, max_n=2, cfg=ENUM)
    assert type(a) is type(b)
    for out in (a, b):
        if isinstance(out, FoundModel):
            assert check_normal_form(out.structure, nf).ok
            assert check_constraints(out.structure).ok
    if isinstance(a, FoundModel):
        assert a.size == b.size


@pytest.mark.parametrize("idx", range(20))
def test_monotone_in_bound(idx):
    nf = corpus(23, 20)[idx]
    a = brute_force_sat(nf, max_n=2)
    b = brute_force_sat(nf, max_n=3)
    if isinstance(a, FoundModel):
        assert isinstance(b, FoundModel) and b.size <= a.size


def test_deterministic(f_cyc):
    assert brute_force_sat(f_cyc[2], max_n=4) == brute_force_sat(f_cyc[2], max_n=4)


def test_budget(f_inf):
    with pytest.raises(OracleBudgetExceeded):
        brute_force_sat(f_inf[2], max_n=6, cfg=OracleConfig(clause_budget=10))


class _Stub:
    def __init__(self, status, certificate=None):
        self.status = status
        self.certificate = certificate


def test_cross_check(f_inf, f_cyc):
    assert cross_check(f_cyc[2], None, _Stub("sat"), 4).agree
    assert cross_check(f_inf[2], None, _Stub("unsat"), 5).agree
    bad = cross_check(f_cyc[2], None, _Stub("unsat"), 4)
    assert not bad.agree and "size 2" in bad.notes[0]


def test_expand_model_fills_introduced_unaries():
    sig, f = parse_formula("sig { unary P; trans T; } E x. !(E y. T(x,y) & !P(y))")
    nf = to_normal_form(f, sig)
    plain = brute_force_sat(nf, max_n=2).structure.reduct(sig)
    M = expand_model(plain, nf)
    assert M is not None and check_normal_form(M, nf).ok
    assert M.reduct(sig) == plain
