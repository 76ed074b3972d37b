import random

import pytest

from unfotr.corpus import corpus
from unfotr.declarations import family_structure, ldec_all
from unfotr.model.evaluate import WitnessChecker, phi0_violations
from unfotr.oracle import FoundModel, brute_force_sat
from unfotr.pruning import (
    bounds_from_mphi,
    compute_bounds,
    generalized_types,
    prune,
    replay_check,
    verify_rank_bound,
)
from unfotr.syntax import parse_formula
from unfotr.treelike import make_tree, ranks, unravel

from conftest import random_tree

SIG2 = parse_formula("sig { unary P; trans T; trans U; } E x. P(x)")[0]


def test_bounds_hand_recurrence():
    b = bounds_from_mphi(2, 1)
    assert b.meta["per_position"] == [2, 8]
    assert (b.Mbar_phi, b.M_hat) == (8, 16)


@pytest.mark.parametrize("m", [1, 3, 7, 100])
def test_bounds_first_position(m):
    assert bounds_from_mphi(m, 1).meta["per_position"][0] == m


@pytest.mark.parametrize("m,k", [(2, 1), (3, 2), (5, 3), (10**6, 4)])
def test_bounds_shape(m, k):
    b = bounds_from_mphi(m, k)
    assert b.M_hat == 2 * k * b.Mbar_phi
    vals = b.meta["per_position"]
    for i, v in enumerate(vals):
        s = sum(vals[:i])
        assert v == m * s + s + m
    assert vals == sorted(vals)


def test_compute_bounds_flavors(sig1):
    assert compute_bounds(sig1, decl_count=0, flavor="light").M_phi == 2
    assert compute_bounds(sig1, decl_count=3, flavor="general").M_phi == 4 * 3 + 2
    assert compute_bounds(sig1, decl_count=0, flavor="light").M_hat == 16


def _chain(sig, edges):
    n = len(edges) + 1
    rows: dict[str, set] = {}
    for i, kinds in enumerate(edges):
        for s, kind in kinds.items():
            if kind in ("down", "both"):
                rows.setdefault(s, set()).add((i, i + 1))
            if kind in ("up", "both"):
                rows.setdefault(s, set()).add((i + 1, i))
    return make_tree(sig, [None] + list(range(n - 1)), rows)


def test_symmetric_tree_unchanged(sig1):
    tl = _chain(sig1, [{"T": "both"}, {"T": "both"}, {}])
    pr, st = prune(tl)
    assert st.pattern == [0, 1, 2, 3]
    assert pr.local == tl.local
    assert all(not e.D for e in st.edges)
    assert replay_check(tl, pr, st).ok


def test_strict_chain_is_shortened(sig1):
    # long strict chain of identical nodes: replacements jump to the lowest-rank copy
    tl = _chain(sig1, [{"T": "down"}] * 12)
    pr, st = prune(tl)
    assert replay_check(tl, pr, st).ok
    assert max(ranks(pr, "T")) < max(ranks(tl, "T"))
    assert verify_rank_bound(pr, compute_bounds(sig1, decl_count=len(set(generalized_types(tl))), flavor="light")).ok


def test_rank_bound_failure_cites_path(sig1):
    tl = _chain(sig1, [{"T": "down"}] * 5)
    rep = verify_rank_bound(tl, 3)
    assert not rep.ok and "[0, 1, 2, 3, 4]" in rep.issues[0]
    assert verify_rank_bound(_chain(sig1, [{"T": "both"}] * 5), 0).ok


def test_two_symbol_rotation_replay():
    edges = [{"T": "down", "U": "up"}, {"U": "down"}, {"T": "down", "U": "both"}, {"T": "up"}] * 3
    tl = _chain(SIG2, edges)
    pr, st = prune(tl)
    assert replay_check(tl, pr, st).ok
    rotated = [e for e in st.edges if e.K]
    assert rotated
    for e in st.edges:
        changed = st.perm[e.child] != st.perm[e.parent]
        assert changed == (bool(e.K) and min(e.K) < len(SIG2.trans_symbols))


@pytest.mark.parametrize("seed", range(30))
def test_prune_random_trees(seed):
    rng = random.Random(seed)
    tl = random_tree(rng, SIG2, rng.randint(2, 40))
    decls = ldec_all(tl)
    pr, st = prune(tl, decls)
    assert replay_check(tl, pr, st).ok
    for a in pr.domain:
        assert generalized_types(tl, decls)[st.pattern[a]][1] == pr.types[a]
    b = compute_bounds(SIG2, decl_count=len(set(generalized_types(tl, decls))), flavor="light")
    assert verify_rank_bound(pr, b).ok


def _sat_models(seed, count):
    for nf in corpus(seed, count):
        out = brute_force_sat(nf, max_n=3)
        if isinstance(out, FoundModel):
            yield nf, out.structure


@pytest.mark.parametrize("idx", range(12))
def test_prune_unraveled_models(idx):
    items = list(_sat_models(41, 40))
    if idx >= len(items):
        return
    nf, S = items[idx]
    tl, _ = unravel(S, nf, S.n * (2 * nf.signature.k + 1) + 2)
    decls = ldec_all(tl)
    pr, st = prune(tl, decls)
    assert not st.issues
    assert replay_check(tl, pr, st).ok
    b = compute_bounds(nf.signature, nf, len(set(zip(decls, tl.types))), "light")
    assert verify_rank_bound(pr, b).ok
    wc = WitnessChecker(nf)
    for a in pr.domain:
        if a in pr.frontier:
            continue
        F = family_structure(pr, a)
        for j in range(nf.m):
            assert wc.witness(F, 0, j) is not None
    assert not phi0_violations(pr.materialize(), nf, 1)
    # with τ(1) fixed, original ranks do not increase along pruned paths
    rk = {s: ranks(tl, s) for s in nf.signature.trans_symbols}
    for e in st.edges:
        u = st.perm[e.parent][0]
        if st.perm[e.child][0] == u and pr.local.holds(u, (e.parent, e.child)):
            assert rk[u][e.chosen] <= rk[u][st.pattern[e.parent]]
