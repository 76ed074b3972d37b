"""Finite-model construction for two-variable formulas from a rank-bounded periodic tree.

The source is the (infinite) unfolding of a certificate. Components are built
layer by layer: layer u stops the u-th transitive symbol, its sublayers lower
that symbol's rank, subcomponents come from the same construction with one
symbol pair fewer, and copies of the components are glued with two colors so
that no transitive path re-enters a component.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .declarations import refine_periodic
from .model.evaluate import WitnessChecker, check_normal_form, compile_qf
from .model.structure import FiniteStructure, transitive_close
from .model.types import one_type
from .report import Report
from .syntax.normal_form import NormalFormFormula
from .treelike import PeriodicTree

ID, ID_INV = "@id", "@id~"  # artificial identity pair, never materialized


class BuildError(RuntimeError):
    pass


@dataclass
class Piece:
    """A built structure with its origin and pattern map (closed unless stated)."""

    n: int
    types: list
    p: list  # element -> refined source vertex
    rows: dict  # name -> set of tuples
    origin: int = 0


@dataclass
class BuildRecord:
    vertex: int
    E0: frozenset
    piece: Piece


@dataclass
class BuildContext:
    pt: PeriodicTree
    nf: NormalFormFormula
    rt: object = None
    ranks: dict = field(default_factory=dict)
    sigma: tuple = ()  # ordered distinguished symbols, possibly with the identity pair
    use_id: bool = False
    records: list = field(default_factory=list)
    memo: dict = field(default_factory=dict)
    max_elements: int = 200_000
    max_rank: int = 0
    stats: dict = field(default_factory=dict)
    border_issues: list = field(default_factory=list)


# ---------------------------------------------------------------- source access


def _family(ctx: BuildContext, r: int):
    return ctx.pt.families[ctx.rt.base[r]].local


def _holds(ctx, F, s, a, b) -> bool:
    if s in (ID, ID_INV):
        return a == b
    return F.holds(s, (a, b))


def _sym_edge(ctx, r: int, slot: int, E) -> bool:
    F = _family(ctx, r)
    return all(_holds(ctx, F, s, 0, slot) and _holds(ctx, F, s, slot, 0) for s in E)


def _gtype(ctx, r):
    return (ctx.rt.ldec[r], ctx.pt.types[ctx.rt.base[r]])


def _class_vertices(ctx, x: int, Etot) -> list[int]:
    """Refined vertices of the subtree of x joined to x by every symbol of Etot (BFS order)."""
    seen = {x}
    order = [x]
    q = deque([x])
    while q:
        r = q.popleft()
        for slot, w in enumerate(ctx.rt.children[r], start=1):
            if w not in seen and _sym_edge(ctx, r, slot, Etot):
                seen.add(w)
                order.append(w)
                q.append(w)
    return order


def source_ranks(pt: PeriodicTree) -> dict[str, list[int]]:
    """Per symbol, the rank of every periodic vertex; a one-directional edge on a cycle is an error."""
    out = {}
    for s in pt.signature.trans_symbols:
        G = nx.DiGraph()
        G.add_nodes_from(range(pt.size))
        for v, fam in enumerate(pt.families):
            for slot, w in enumerate(fam.targets, start=1):
                if fam.local.holds(s, (0, slot)):
                    wt = 0 if fam.local.holds(s, (slot, 0)) else 1
                    if G.has_edge(v, w):
                        wt = max(wt, G[v][w]["w"])
                    G.add_edge(v, w, w=wt)
        C = nx.condensation(G)
        comp = C.graph["mapping"]
        for a, b, d in G.edges(data=True):
            if comp[a] == comp[b] and d["w"]:
                raise BuildError(f"{s}: one-directional edge {a}->{b} lies on a cycle (unbounded rank)")
        best = {}
        for c in reversed(list(nx.topological_sort(C))):
            val = 0
            for v in C.nodes[c]["members"]:
                for _, w, d in G.out_edges(v, data=True):
                    if comp[w] != c:
                        val = max(val, best[comp[w]] + d["w"])
            best[c] = val
        out[s] = [best[comp[v]] for v in range(pt.size)]
    return out


def _witness_slot(ctx, fns, r: int, i: int, Etot):
    """None if self-witnessed, a child slot inside the class, or False when no witness is in the class."""
    F = _family(ctx, r)
    if fns[i](F, (0, 0)):
        return None
    for slot in range(1, F.n):
        if fns[i](F, (0, slot)) and _sym_edge(ctx, r, slot, Etot):
            return slot
    return False


# ---------------------------------------------------------------- components


class _Store:
    def __init__(self, cap: int):
        self.cap = cap
        self.types: list = []
        self.p: list = []
        self.rows: dict = {}
        self.layer: list = []

    def new(self, ty, p, layer) -> int:
        if len(self.types) >= self.cap:
            raise BuildError(f"component exceeds {self.cap} elements")
        self.types.append(ty)
        self.p.append(p)
        self.layer.append(layer)
        return len(self.types) - 1

    def add(self, name, tup):
        self.rows.setdefault(name, set()).add(tup)


def _beta(ctx, F, slot):
    """Binary atoms between head (0) and slot, as (name, forward?) pairs."""
    out = []
    for name in ctx.pt.signature.binary_symbols():
        if F.holds(name, (0, slot)):
            out.append((name, True))
        if F.holds(name, (slot, 0)):
            out.append((name, False))
    return out


def build_component(ctx: BuildContext, root_vertex: int, E0: tuple, Etot: frozenset, fns):
    """Extended pattern component: store, root element, interface element list."""
    st = _Store(ctx.max_elements)
    ptypes = ctx.pt.types
    base = ctx.rt.base
    root = st.new(ptypes[base[root_vertex]], root_vertex, (1, 1))
    init = [root]
    interface: list[int] = []
    syms = list(E0)
    for u, s in enumerate(syms, start=1):
        inv = s[:-1] if s.endswith("~") else s + "~"
        sub_E0 = tuple(x for x in E0 if x not in (s, inv))
        sub_Etot = Etot | {s, inv}
        next_layer: list[int] = []
        j = 1
        while init:
            if j > ctx.max_rank + 1:
                raise BuildError(f"sublayer {j} of layer {u} needed; ranks exceed {ctx.max_rank}")
            layer_elems = []
            for b in init:
                sub = build(ctx, st.p[b], sub_E0, sub_Etot, fns)
                ids = []
                for e in range(sub.n):
                    if e == sub.origin:
                        ids.append(b)
                    else:
                        ids.append(st.new(sub.types[e], sub.p[e], (u, j)))
                for name, ts in sub.rows.items():
                    for t in ts:
                        st.add(name, tuple(ids[x] for x in t))
                layer_elems.extend(ids)
                if rank_of(ctx, s, sub.p[sub.origin]) < max(rank_of(ctx, s, q) for q in sub.p):
                    raise BuildError("subcomponent pattern rank exceeds its origin's rank")
            nxt: list[int] = []
            for b in layer_elems:
                r = st.p[b]
                F = _family(ctx, r)
                for i in range(ctx.nf.m):
                    slot = _witness_slot(ctx, fns, r, i, Etot)
                    if slot is None or slot is False:
                        continue
                    fwd = _holds(ctx, F, s, 0, slot)
                    bwd = _holds(ctx, F, s, slot, 0)
                    if fwd and bwd:
                        continue  # provided inside the subcomponent
                    c = ctx.rt.children[r][slot - 1]
                    if fwd:
                        if rank_of(ctx, s, c) >= rank_of(ctx, s, r):
                            raise BuildError("one-directional witness does not lower the rank")
                        c2 = st.new(ptypes[base[c]], c, (u, j + 1))
                        nxt.append(c2)
                    else:
                        c2 = st.new(ptypes[base[c]], c, (u + 1, 1))
                        next_layer.append(c2)
                    for name, forward in _beta(ctx, F, slot):
                        st.add(name, (b, c2) if forward else (c2, b))
            init = nxt
            j += 1
        init = next_layer
    interface = init
    for e in interface:
        st.layer[e] = (len(syms) + 1, 1)
    return st, root, interface


def rank_of(ctx, s, r) -> int:
    if s in (ID, ID_INV):
        return 0
    return ctx.ranks[s][ctx.rt.base[r]]


def join_components(ctx: BuildContext, x: int, comps: dict, gt_of, E0=None, color_check: bool = True):
    """Glue colored copies of the extended components; returns a closed Piece."""
    gx = gt_of(x)
    copies: dict = {}
    order = []
    start = (gx, 0, None, None)
    copies[start] = None
    order.append(start)
    q = deque([start])
    while q:
        key = q.popleft()
        g, col, _, _ = key
        st, root, iface = comps[g]
        for i, e in enumerate(iface, start=1):
            k2 = (gt_of(st.p[e]), 1 - col, i, g)
            if k2 not in copies:
                copies[k2] = None
                order.append(k2)
                q.append(k2)
    # element ids: non-interface elements of each copy
    elem_of: dict = {}
    types, p = [], []
    for key in order:
        st, root, iface = comps[key[0]]
        ifs = set(iface)
        ids = {}
        for e in range(len(st.types)):
            if e in ifs:
                continue
            ids[e] = len(types)
            types.append(st.types[e])
            p.append(st.p[e])
        elem_of[key] = ids
        if len(types) > ctx.max_elements:
            raise BuildError(f"model exceeds {ctx.max_elements} elements")
    rows: dict = {}
    border: dict = {}  # (leaf, root of the next copy) -> color of the leaf's copy
    for key in order:
        g, col, _, _ = key
        st, root, iface = comps[g]
        ids = dict(elem_of[key])
        for i, e in enumerate(iface, start=1):
            k2 = (gt_of(st.p[e]), 1 - col, i, g)
            r2 = comps[k2[0]][1]
            if gt_of(comps[k2[0]][0].p[r2]) != gt_of(st.p[e]):
                raise BuildError("identification joins elements of different generalized types")
            ids[e] = elem_of[k2][r2]
        for name, ts in st.rows.items():
            if name in (ID, ID_INV):
                continue
            for t in ts:
                tt = tuple(ids[y] for y in t)
                rows.setdefault(name, set()).add(tt)
                if len(t) == 2 and (t[0] in iface or t[1] in iface):
                    leaf, r = (tt[0], tt[1]) if t[1] in iface else (tt[1], tt[0])
                    border[(leaf, r)] = col
    if color_check:
        syms = [u for u in (E0 if E0 is not None else ctx.sigma) if u not in (ID, ID_INV)]
        ctx.border_issues.extend(color_border_violations(ctx.pt.signature, rows, border, syms))
    S = FiniteStructure(ctx.pt.signature, len(types), rows)
    S = transitive_close(S)
    origin = elem_of[start][comps[gx][1]]
    ctx.stats["copies"] = ctx.stats.get("copies", 0) + len(order)
    return Piece(S.n, types, p, {k: set(v) for k, v in S.interp.items()}, origin)


def color_border_violations(sig, rows: dict, border: dict, syms=None) -> list[str]:
    """Paths along the given transitive symbols of the un-closed join that cross both kinds of color border."""
    out = []
    for s in sig.trans_symbols if syms is None else syms:
        base, swap = sig.canonical(s)
        edges = set()
        for name, fwd in ((base, True), (base + "~", False)):
            for t in rows.get(name, ()):
                edges.add(t if fwd else (t[1], t[0]))
        if swap:
            edges = {(b, a) for a, b in edges}
        succ: dict = {}
        for a, b in edges:
            succ.setdefault(a, []).append(b)
        for first in (0, 1):
            # elements reachable after crossing a border of color `first`
            starts = [(a, b) for a, b in edges if border.get((a, b), border.get((b, a))) == first]
            seen = {b for _, b in starts}
            stack = list(seen)
            while stack:
                v = stack.pop()
                for w in succ.get(v, ()):
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            for a, b in edges:
                if a in seen and border.get((a, b), border.get((b, a))) == 1 - first:
                    out.append(f"{s}: a path crosses a color-{first} border and then a color-{1 - first} border at {a}->{b}")
                    break
    return out


def build(ctx: BuildContext, x: int, E0: tuple, Etot: frozenset, fns) -> Piece:
    key = (x, E0)
    if key in ctx.memo:
        return ctx.memo[key]
    if not E0:
        ty = ctx.pt.types[ctx.rt.base[x]]
        rows: dict = {}
        for a in ty.atoms:
            ar = ctx.pt.signature.arity(a)
            rows.setdefault(a, set()).add((0,) * ar)
            if ctx.pt.signature.is_transitive(a):
                rows.setdefault(a + "~", set()).add((0, 0))
        piece = Piece(1, [ty], [x], rows, 0)
    else:
        verts = _class_vertices(ctx, x, Etot)
        gt_of = lambda r: _gtype(ctx, r)  # noqa: E731
        reps: dict = {}
        reps[gt_of(x)] = x
        for r in verts:
            reps.setdefault(gt_of(r), r)
        comps = {g: build_component(ctx, r, E0, Etot, fns) for g, r in reps.items()}
        piece = join_components(ctx, x, comps, gt_of, E0)
    ctx.memo[key] = piece
    ctx.records.append(BuildRecord(x, frozenset(E0), piece))
    return piece


# ---------------------------------------------------------------- entry points


def make_context(pt: PeriodicTree, nf: NormalFormFormula, max_elements: int = 200_000) -> BuildContext:
    if nf.t > 2 or any(c.p > 1 for c in nf.conjuncts):
        raise BuildError("the builder handles two-variable normal forms only (t <= 2, one witness per conjunct)")
    if any(a > 2 for _, a in pt.signature.relations):
        raise BuildError("the builder handles relations of arity <= 2 only")
    ctx = BuildContext(pt, nf, max_elements=max_elements)
    ctx.rt = refine_periodic(pt)
    ctx.ranks = source_ranks(pt)
    ctx.max_rank = max((max(v) for v in ctx.ranks.values()), default=0)
    syms = tuple(pt.signature.trans_symbols)
    # classes of the full distinguished signature must be singletons, else add an identity pair
    need_id = False
    for r in range(len(ctx.rt.base)):
        for slot in range(1, len(ctx.rt.children[r]) + 1):
            if syms and _sym_edge(ctx, r, slot, syms):
                need_id = True
    ctx.use_id = need_id or not syms
    ctx.sigma = syms + ((ID, ID_INV) if ctx.use_id else ())
    return ctx


def build_finite_model(pt: PeriodicTree, nf: NormalFormFormula, sig=None, bounds=None, max_elements: int = 200_000):
    """Finite model of nf built from a rank-bounded periodic tree; returns (structure, context)."""
    ctx = make_context(pt, nf, max_elements)
    fns = [compile_qf(c.matrix, ("x",) + c.witnesses) for c in nf.conjuncts]
    root = 0  # refined vertex of the periodic root
    piece = build(ctx, root, ctx.sigma, frozenset(), fns)
    S = FiniteStructure(pt.signature, piece.n, piece.rows)
    ctx.stats["size"] = S.n
    ctx.top = piece
    return S, ctx


def verify_build(S: FiniteStructure, nf: NormalFormFormula, ctx: BuildContext) -> Report:
    rep = Report("build")
    fns = [compile_qf(c.matrix, ("x",) + c.witnesses) for c in nf.conjuncts]
    wc = WitnessChecker(nf)
    for rec in ctx.records:
        pc = rec.piece
        Etot = frozenset(ctx.sigma) - rec.E0
        B = FiniteStructure(ctx.pt.signature, pc.n, {k: v for k, v in pc.rows.items()})
        if pc.n > 1:
            for s in Etot:
                if s in (ID, ID_INV):
                    rep.fail(f"(b1) vertex {rec.vertex}: identity in the total part but {pc.n} elements")
                    break
                if len(B.tuples(s)) != pc.n * pc.n:
                    rep.fail(f"(b1) vertex {rec.vertex}, E0={sorted(rec.E0)}: {s} is not total")
                    break
        if pc.p[pc.origin] != rec.vertex:
            rep.fail(f"(b2) vertex {rec.vertex}: origin is mapped to {pc.p[pc.origin]}")
        for a in range(pc.n):
            r = pc.p[a]
            if one_type(B, a) != ctx.pt.types[ctx.rt.base[r]]:
                rep.fail(f"(b3) element {a} of the build for vertex {rec.vertex}: 1-type differs from its pattern")
                break
            for i in range(nf.m):
                slot = _witness_slot(ctx, fns, r, i, Etot)
                if slot is False:
                    continue
                if wc.witness(B, a, i) is None:
                    rep.fail(f"(b3) element {a} of the build for vertex {rec.vertex}: no witness for conjunct {i}")
                    break
    for msg in ctx.border_issues:
        rep.fail("color border: " + msg)
    rep.extend(check_normal_form(S, nf), "model: ")
    return rep


# ---------------------------------------------------------------- size estimate


@dataclass(frozen=True)
class LogBound:
    """A positive integer known through its base-2 logarithm (too large to materialize)."""

    log2: float

    def __ge__(self, other):
        return self.log2 >= _log2(other)

    def __le__(self, other):
        return self.log2 <= _log2(other)

    def __gt__(self, other):
        return self.log2 > _log2(other)

    def __lt__(self, other):
        return self.log2 < _log2(other)


def _log2(x) -> float:
    if isinstance(x, LogBound):
        return x.log2
    return math.log2(x) if x > 0 else float("-inf")


MATERIALIZE_BITS = 1 << 20


def estimate_size(gamma_count: int, n: int, Mhat: int, k: int, l: int | None = None):
    """S_0 = 1, S_{2l} = 2·g²·(S_{2l-2}·n)^{8n(M̂+1)+2}; returns S_{2l} (default l = k+1).

    Exact integers while they stay below about a million bits, LogBound beyond.
    """
    l = k + 1 if l is None else l
    e = 8 * n * (Mhat + 1) + 2
    S = 1
    for _ in range(l):
        if isinstance(S, LogBound) or e * (_log2(S) + _log2(n)) > MATERIALIZE_BITS:
            S = LogBound(1 + 2 * _log2(gamma_count) + e * (_log2(S) + _log2(n)))
        else:
            S = 2 * gamma_count**2 * (S * n) ** e
    return S


def instance_estimate(ctx: BuildContext, nf: NormalFormFormula):
    """estimate_size at the parameters of a build: realized generalized types, formula size, max rank, pairs."""
    gammas = {_gtype(ctx, r) for r in range(len(ctx.rt.base))}
    return estimate_size(len(gammas), nf.size, ctx.max_rank, len(ctx.sigma) // 2)
