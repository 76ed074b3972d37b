import random

import pytest

from unfotr.model import FiniteStructure, one_type
from unfotr.oracle import brute_force_sat
from unfotr.syntax import parse_formula
from unfotr.treelike import (
    FamilyTemplate,
    PeriodicTree,
    TreeLikeStructure,
    make_tree,
    rank,
    ranks,
    stopwatch_labeling,
    stopwatch_path,
    to_dot,
    unfold,
    unravel,
    verify_tree_like,
)

from conftest import F_INF_SRC, random_tree

SIG2 = parse_formula("sig { unary P; trans T; trans U; } E x. P(x)")[0]


def chain(sig, n, sym=True):
    rows = {"T": {(i, i + 1) for i in range(n)}}
    if sym:
        rows["T"] |= {(i + 1, i) for i in range(n)}
    return make_tree(sig, [None] + list(range(n)), rows)


def test_unravel_two_cycle(f_cyc):
    _, _, nf = f_cyc
    S = brute_force_sat(nf, max_n=3).structure
    tl, h = unravel(S, nf, 3)
    assert tl.parent == (None, 0, 1, 2)
    assert h == (0, 1, 0, 1)
    assert verify_tree_like(tl).ok
    assert tl.frontier == {3}
    for v in range(3):
        assert tl.local.holds("R", (v, v + 1))


def test_unravel_self_witness(f_triv):
    _, _, nf = f_triv
    S = brute_force_sat(nf, max_n=1).structure
    tl, h = unravel(S, nf, 2)
    assert tl.n == 1 and h == (0,)


def test_unravel_depth_zero(f_cyc):
    _, _, nf = f_cyc
    S = brute_force_sat(nf, max_n=3).structure
    tl, h = unravel(S, nf, 0, start=1)
    assert tl.n == 1 and h == (1,)
    assert tl.types[0] == one_type(S, 1)


def test_unravel_rejects_non_models(f_inf):
    sig, _, nf = f_inf
    with pytest.raises(ValueError):
        unravel(FiniteStructure(sig, 1, {}), nf, 2)


@pytest.mark.parametrize("idx", range(25))
def test_unravel_preserves_types_and_witnesses(idx):
    from unfotr.corpus import corpus
    from unfotr.model.evaluate import WitnessChecker
    from unfotr.oracle import FoundModel

    nf = corpus(29, 25)[idx]
    out = brute_force_sat(nf, max_n=3)
    if not isinstance(out, FoundModel):
        return
    S = out.structure
    tl, h = unravel(S, nf, S.n + 2)
    assert verify_tree_like(tl).ok
    for v in tl.domain:
        assert tl.types[v] == one_type(S, h[v])
        if tl.parent[v] is not None:
            p = tl.parent[v]
            if h[p] != h[v]:
                for name in S.signature.binary_symbols():
                    assert tl.local.holds(name, (p, v)) == S.holds(name, (h[p], h[v]))
    # witnesses inside the downward family, away from the frontier
    wc = WitnessChecker(nf)
    M = tl.materialize()
    for v in tl.domain:
        if v in tl.frontier:
            continue
        fam = set(tl.family(v))
        for i in range(nf.m):
            assert wc.witness(M, v, i, candidates=sorted(fam)) is not None
    # ranks of an unraveled finite model are bounded by its size
    for s in S.signature.trans_symbols:
        assert max(ranks(tl, s)) <= S.n


def test_rank_examples(sig1):
    strict = chain(sig1, 3, sym=False)
    assert rank(strict, "T", 0) == 3
    assert rank(strict, "T", 3) == 0
    assert ranks(chain(sig1, 3), "T") == [0, 0, 0, 0]


def test_stopwatch_examples(sig1):
    strict = chain(sig1, 3, sym=False)
    assert stopwatch_labeling(strict, "T", 2) is None
    assert stopwatch_path(strict, "T", 2) == [0, 1, 2, 3]
    lab = stopwatch_labeling(strict, "T", 3)
    assert [lab[v] for v in range(4)] == [0, 1, 2, 3]
    lab = stopwatch_labeling(chain(sig1, 3), "T", 0)
    assert all(lab[v] == 0 for v in range(4))


def _path_rank_reference(tl, sym, a):
    best = 0
    for c in tl.children[a]:
        if tl.local.holds(sym, (a, c)):
            step = 0 if tl.local.holds(sym, (c, a)) else 1
            best = max(best, step + _path_rank_reference(tl, sym, c))
    return best


def _ending_reference(tl, sym, a):
    """Max rank over downward sym-paths ending at a (walk up while edges are sym-edges)."""
    best, cur, count = 0, a, 0
    while tl.parent[cur] is not None:
        p = tl.parent[cur]
        if not tl.local.holds(sym, (p, cur)):
            break
        count += 0 if tl.local.holds(sym, (cur, p)) else 1
        best = max(best, count)
        cur = p
    return best


@pytest.mark.parametrize("seed", range(40))
def test_ranks_and_stopwatch_against_reference(seed):
    rng = random.Random(seed)
    tl = random_tree(rng, SIG2, rng.randint(1, 30))
    assert verify_tree_like(tl).ok
    for s in SIG2.trans_symbols:
        rs = ranks(tl, s)
        assert rs == [_path_rank_reference(tl, s, a) for a in tl.domain]
        top = max(_ending_reference(tl, s, a) for a in tl.domain)
        assert stopwatch_labeling(tl, s, top - 1) is None if top else True
        lab = stopwatch_labeling(tl, s, top)
        assert lab is not None
        for a in tl.domain:
            assert lab[a] == _ending_reference(tl, s, a)


def test_verify_tree_like_violations(sig1):
    sig, _ = parse_formula("sig { unary P; rel R/2; trans T; } E x. P(x)")
    parent = (None, 0, 0, 1, 2)
    bad = make_tree(sig, parent, {"R": {(3, 4)}})
    rep = verify_tree_like(bad)
    assert not rep.ok and "R(3, 4)" in rep.issues[0]
    loose = TreeLikeStructure(sig, parent, FiniteStructure(sig, 5, {"T": {(0, 3)}}))
    rep = verify_tree_like(loose)
    assert not rep.ok and "T(0,3)" in rep.issues[0]
    ok = make_tree(sig, parent, {"T": {(0, 1), (1, 3)}})
    assert verify_tree_like(ok).ok
    assert ok.holds("T", (0, 3)) and not ok.holds("T", (3, 0))


def _loop_tree(sig1, strict: bool):
    tp = one_type(FiniteStructure(sig1, 1, {}), 0)
    rows = {"T": {(0, 1)}}
    if not strict:
        rows["T"].add((1, 0))
    fam = FamilyTemplate(FiniteStructure(sig1, 2, rows).with_tuples({"T~": {(j, i) for i, j in rows["T"]}}), (0,))
    return PeriodicTree(sig1, (tp,), (fam,))


def test_unfold(sig1):
    pt = _loop_tree(sig1, strict=False)
    assert pt.check().ok
    assert unfold(pt, 0).n == 1
    tl = unfold(pt, 4)
    assert tl.parent == (None, 0, 1, 2, 3)
    assert verify_tree_like(tl).ok
    assert tl.frontier == {4}


def test_periodic_stopwatch_fixpoint(sig1):
    assert stopwatch_labeling(_loop_tree(sig1, strict=True), "T", 50) is None
    lab = stopwatch_labeling(_loop_tree(sig1, strict=False), "T", 0)
    assert lab[0] == 0


def test_rank_on_unfoldings_is_monotone(sig1):
    pt = _loop_tree(sig1, strict=True)
    prev = -1
    for d in range(1, 6):
        r = rank(unfold(pt, d), "T", 0)
        assert r >= prev
        prev = r


def test_unfold_of_certificate_is_tree_like(f_cyc):
    from unfotr.decide import decide_fin_sat

    res = decide_fin_sat(f_cyc[2])
    tl = unfold(res.certificate.tree, 4)
    assert verify_tree_like(tl).ok


def test_dot(sig1):
    text = to_dot(chain(sig1, 2, sym=False), stopwatch="T")
    assert text.startswith("digraph") and text.rstrip().endswith("}")
    assert "digraph" in to_dot(_loop_tree(sig1, strict=False))


def test_inf_chain_is_strict():
    sig, f = parse_formula(F_INF_SRC)
    tl = chain(sig, 3, sym=False)
    assert ranks(tl, "T~") == [0, 0, 0, 0]
