"""Rank bounds and top-down pruning of tree-like structures with a permutation strategy."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .declarations import TypeUniverse, ldec_all
from .report import Report
from .syntax.ast import Signature
from .treelike import TreeLikeStructure, make_tree, ranks, stopwatch_labeling, stopwatch_path


@dataclass(frozen=True)
class Bounds:
    M_phi: int
    Mbar_phi: int
    Mhat_phi: int
    k: int
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def M_hat(self) -> int:
        return self.Mhat_phi


def bounds_from_mphi(M_phi: int, k: int, **meta) -> Bounds:
    """B(v0) = M·Sum + Sum + M with Sum = Σ_{v<v0} B(v), for v0 = 1..2k; M̄ = B(2k), M̂ = 2k·M̄."""
    vals: list[int] = []
    for _ in range(2 * k):
        s = sum(vals)
        vals.append(M_phi * s + s + M_phi)
    Mbar = vals[-1] if vals else 0
    return Bounds(M_phi, Mbar, 2 * k * Mbar, k, dict(meta, per_position=vals))


def compute_bounds(sig: Signature, nf=None, decl_count: int = 1, flavor: str = "general") -> Bounds:
    """M_φ = |𝒜|·decl_count + 2 (general) or decl_count + 2 (light: decl_count = generalized types)."""
    n_types = len(TypeUniverse(sig))
    if flavor == "light":
        M = decl_count + 2
    else:
        M = n_types * decl_count + 2
    return bounds_from_mphi(M, sig.k, types=n_types, decl_count=decl_count, flavor=flavor, t=getattr(nf, "t", None))


# ---------------------------------------------------------------- pruning


@dataclass
class EdgeRecord:
    parent: int  # node of the pruned tree
    child: int
    original_child: int  # a_j in the input tree
    chosen: int  # b_j in the input tree
    K: frozenset[int]
    S: frozenset[int]
    D: frozenset[int]


@dataclass
class PruningState:
    perm: dict[int, tuple[str, ...]]  # pruned node -> τ (position v-1 holds the symbol τ(v))
    edges: list[EdgeRecord]
    pattern: list[int]  # pruned node -> node of the input tree
    issues: list[str]


def _rotate(tau: tuple, vK: int) -> tuple:
    """Positions vK..2k moved cyclically one to the left (1-based vK)."""
    i = vK - 1
    return tau[:i] + tau[i + 1 :] + (tau[i],)


def generalized_types(tl: TreeLikeStructure, decls=None) -> list:
    decls = decls if decls is not None else ldec_all(tl)
    return [(d, ty) for d, ty in zip(decls, tl.types)]


def prune(tl: TreeLikeStructure, decls=None, bounds: Bounds | None = None, root_perm=None):
    """Top-down pruning; returns (pruned tree, PruningState).

    The pruned tree copies, for each surviving node, the downward family of its
    pattern in tl; its children's subtrees are replaced following the strategy.
    """
    sig = tl.signature
    syms = sig.trans_symbols
    gt = generalized_types(tl, decls)
    rk = {s: ranks(tl, s) for s in syms}
    depth = tl.depth
    order = {v: i for i, v in enumerate(tl.bfs_order)}
    tau0 = tuple(root_perm) if root_perm is not None else tuple(syms)
    parent: list[int | None] = [None]
    pattern = [tl.bfs_order[0] if tl.parent[tl.bfs_order[0]] is None else 0]
    root = pattern[0]
    perm = {0: tau0}
    edges: list[EdgeRecord] = []
    issues: list[str] = []
    rows: dict[str, set] = {}
    frontier = set()
    F = tl.local

    def copy(nodes_src, nodes_dst, head_only=False):
        pos = dict(zip(nodes_src, nodes_dst))
        for name, ts in F.interp.items():
            for t in ts:
                if all(x in pos for x in t):
                    if head_only and len(set(t)) > 1:
                        continue
                    rows.setdefault(name, set()).add(tuple(pos[x] for x in t))

    copy([root], [0], head_only=True)
    q = deque([0])
    while q:
        a2 = q.popleft()
        x = pattern[a2]
        tau = perm[a2]
        if x in tl.frontier:
            frontier.add(a2)
            continue
        kids_src = list(tl.children[x])
        kids_dst = []
        for aj in kids_src:
            K = frozenset(v for v in range(1, len(tau) + 1) if not F.holds(tau[v - 1], (x, aj)))
            S = frozenset(v for v in range(1, len(tau) + 1) if v not in K and F.holds(tau[v - 1], (aj, x)))
            D = frozenset(range(1, len(tau) + 1)) - K - S
            if not D:
                b = aj
            else:
                vD = min(D)
                cands = []
                for c in tl.subtree(aj):
                    if gt[c] != gt[aj]:
                        continue
                    if any(rk[tau[v - 1]][c] > rk[tau[v - 1]][aj] for v in S if v < vD):
                        continue
                    cands.append((rk[tau[vD - 1]][c], depth[c], order[c], c))
                b = min(cands)[3]  # aj itself is always a candidate
            if b in tl.frontier and aj not in tl.frontier:
                issues.append(f"truncation too shallow: replacement {b} for {aj} lies on the frontier")
            new = len(parent)
            parent.append(a2)
            pattern.append(b)
            perm[new] = _rotate(tau, min(K)) if K else tau
            edges.append(EdgeRecord(a2, new, aj, b, K, S, D))
            kids_dst.append(new)
            q.append(new)
            # the new node carries b's 1-type (same generalized type as aj)
            copy([b], [new], head_only=True)
        # edges of the family: copy of x's downward family (children as original a_j)
        pos = dict(zip([x] + kids_src, [a2] + kids_dst))
        for name, ts in F.interp.items():
            for t in ts:
                if all(y in pos for y in t) and len(set(t)) > 1:
                    rows.setdefault(name, set()).add(tuple(pos[y] for y in t))
    h = tuple(tl.h[p] for p in pattern) if tl.h is not None else tuple(pattern)
    out = make_tree(sig, tuple(parent), rows, frozenset(frontier), h)
    return out, PruningState(perm, edges, pattern, issues)


def verify_rank_bound(tl, bounds) -> Report:
    M = bounds.M_hat if isinstance(bounds, Bounds) else int(bounds)
    rep = Report("rank-bound")
    for s in tl.signature.trans_symbols:
        if stopwatch_labeling(tl, s, M) is None:
            path = stopwatch_path(tl, s, M) if isinstance(tl, TreeLikeStructure) else None
            rep.fail(f"{s}: stopwatch exceeds {M}" + (f" along path {path}" if path else ""))
    return rep


def replay_check(tl: TreeLikeStructure, pruned: TreeLikeStructure, state: PruningState) -> Report:
    """Edge-by-edge replay of the strategy: K/S/D partition, permutation updates, type preservation."""
    rep = Report("pruning-replay")
    sig = tl.signature
    syms = sig.trans_symbols
    gt = generalized_types(tl)
    for e in state.edges:
        tau = state.perm[e.parent]
        allpos = frozenset(range(1, len(syms) + 1))
        if e.K | e.S | e.D != allpos or e.K & e.S or e.K & e.D or e.S & e.D:
            rep.fail(f"edge {e.parent}->{e.child}: K/S/D do not partition the positions")
        want = _rotate(tau, min(e.K)) if e.K else tau
        if state.perm[e.child] != want:
            rep.fail(f"edge {e.parent}->{e.child}: permutation not updated by the rotation rule")
        if sorted(state.perm[e.child]) != sorted(syms):
            rep.fail(f"node {e.child}: permutation is not bijective")
        if gt[e.chosen] != gt[e.original_child]:
            rep.fail(f"edge {e.parent}->{e.child}: replacement changes the generalized type")
        if not e.D and e.chosen != e.original_child:
            rep.fail(f"edge {e.parent}->{e.child}: D is empty but the subtree was replaced")
    # family isomorphism: downward family of each pruned node matches its pattern's family in tl
    for a in pruned.domain:
        x = state.pattern[a]
        if pruned.types[a] != tl.types[x]:
            rep.fail(f"node {a}: 1-type differs from its pattern {x}")
    return rep
