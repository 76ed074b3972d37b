"""Tree-like structures, unravelings, ranks, stopwatch labelings and periodic trees."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from .model.evaluate import WitnessChecker, check_normal_form
from .model.structure import FiniteStructure, transitive_close
from .model.types import OneType, one_type
from .report import Report
from .syntax.ast import Signature
from .syntax.normal_form import NormalFormFormula


@dataclass(frozen=True, eq=False)
class TreeLikeStructure:
    """A rooted tree (root 0) with family-local tuples.

    `local` holds the tuples inside families (node plus its children), each
    family transitively closed. Transitive atoms between distant nodes are not
    stored: they are derived along the tree route between the two nodes.
    """

    signature: Signature
    parent: tuple[int | None, ...]
    local: FiniteStructure
    frontier: frozenset[int] = frozenset()
    h: tuple | None = None

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def domain(self) -> range:
        return range(self.n)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        ch: list[list[int]] = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p is not None:
                ch[p].append(v)
        return tuple(tuple(c) for c in ch)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        d = [0] * self.n
        for v in self.bfs_order:
            p = self.parent[v]
            if p is not None:
                d[v] = d[p] + 1
        return tuple(d)

    @cached_property
    def bfs_order(self) -> tuple[int, ...]:
        out, q = [], deque([0]) if self.n else deque()
        while q:
            v = q.popleft()
            out.append(v)
            q.extend(self.children[v])
        return tuple(out)

    def family(self, a: int) -> tuple[int, ...]:
        return (a,) + self.children[a]

    @cached_property
    def types(self) -> tuple[OneType, ...]:
        return tuple(one_type(self.local, a) for a in self.domain)

    def subtree(self, a: int) -> list[int]:
        out, stack = [], [a]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children[v]))
        return out

    # -- atoms
    def route(self, x: int, y: int) -> list[tuple[int, int]]:
        """Consecutive family-local steps from x to y (sibling shortcut at the top)."""
        up, down = [], []
        dx, dy = self.depth[x], self.depth[y]
        a, b = x, y
        while dx > dy:
            up.append(a)
            a = self.parent[a]
            dx -= 1
        while dy > dx:
            down.append(b)
            b = self.parent[b]
            dy -= 1
        while a != b:
            up.append(a)
            down.append(b)
            a, b = self.parent[a], self.parent[b]
        # a == b is the lowest common ancestor
        path = up + [a] + list(reversed(down))
        if up and down:
            # skip the ancestor: the last up-node and first down-node are siblings
            path = up + list(reversed(down))
        return list(zip(path, path[1:]))

    def trans_holds(self, sym: str, x: int, y: int) -> bool:
        if x == y:
            return self.local.holds(sym, (x, x))
        return all(self.local.holds(sym, st) for st in self.route(x, y))

    def holds(self, name: str, args: tuple[int, ...]) -> bool:
        if self.signature.is_transitive(name) and len(set(args)) == 2:
            return self.trans_holds(name, args[0], args[1])
        return self.local.holds(name, tuple(args))

    def materialize(self) -> FiniteStructure:
        """The full structure with all transitive connections (for small trees)."""
        return transitive_close(self.local)

    def truncate(self, depth: int) -> "TreeLikeStructure":
        keep = [v for v in self.bfs_order if self.depth[v] <= depth]
        idx = {v: i for i, v in enumerate(keep)}
        parent = tuple(None if self.parent[v] is None else idx[self.parent[v]] for v in keep)
        local, _ = self.local.restrict(keep)
        # restrict renumbers by sorted order; redo it with the BFS numbering
        rows = {}
        for k, ts in self.local.interp.items():
            rows[k] = {tuple(idx[x] for x in t) for t in ts if all(x in idx for x in t)}
        local = FiniteStructure(self.signature, len(keep), rows)
        frontier = {idx[v] for v in keep if v in self.frontier or (self.depth[v] == depth and self.children[v])}
        h = None if self.h is None else tuple(self.h[v] for v in keep)
        return TreeLikeStructure(self.signature, parent, local, frozenset(frontier), h)


def make_tree(sig: Signature, parent, tuples, frontier=(), h=None, close_families=True) -> TreeLikeStructure:
    """Build a tree-like structure from raw family tuples, closing each family."""
    parent = tuple(parent)
    S = FiniteStructure(sig, len(parent), tuples)
    if close_families:
        S = _close_families(S, parent)
    return TreeLikeStructure(sig, parent, S, frozenset(frontier), None if h is None else tuple(h))


def _close_families(S: FiniteStructure, parent) -> FiniteStructure:
    sig = S.signature
    if not sig.trans:
        return S
    children: dict[int, list[int]] = {}
    for v, p in enumerate(parent):
        if p is not None:
            children.setdefault(p, []).append(v)
    extra: dict[str, set] = {}
    for z, ch in children.items():
        fam = [z] + ch
        sub, old = S.restrict(fam)
        closed = transitive_close(sub)
        for name in sig.trans_symbols:
            for i, j in closed.tuples(name):
                extra.setdefault(name, set()).add((old[i], old[j]))
    for v in range(S.n):  # keep T / T~ loops mirrored on isolated nodes too
        for p in sig.trans:
            if S.holds(p.name, (v, v)) or S.holds(p.inverse, (v, v)):
                extra.setdefault(p.name, set()).add((v, v))
                extra.setdefault(p.inverse, set()).add((v, v))
    return S.with_tuples(extra)


def verify_tree_like(tl: TreeLikeStructure) -> Report:
    """Non-transitive tuples inside one family; transitive tuples realized by family-edge chains."""
    rep = Report("tree-like")
    sig = tl.signature

    def in_family(elems) -> bool:
        es = set(elems)
        if len(es) <= 1:
            return True
        top = min(es, key=lambda v: tl.depth[v])
        if all(v == top or tl.parent[v] == top for v in es):
            return True
        p = tl.parent[top]
        return p is not None and all(v == p or tl.parent[v] == p for v in es)

    for name, ts in tl.local.interp.items():
        if sig.is_transitive(name):
            continue
        for t in sorted(ts):
            if not in_family(t):
                rep.fail(f"{name}{t} spans several families")
    for name in sig.trans_symbols:
        ts = tl.local.tuples(name)
        fam_edges: dict[int, set[int]] = {}
        for i, j in ts:
            if i != j and in_family((i, j)):
                fam_edges.setdefault(i, set()).add(j)
        for i, j in sorted(ts):
            if i == j or in_family((i, j)):
                continue
            seen, q = {i}, deque([i])
            while q:
                v = q.popleft()
                for w in fam_edges.get(v, ()):
                    if w not in seen:
                        seen.add(w)
                        q.append(w)
            if j not in seen:
                rep.fail(f"{name}({i},{j}) between distant nodes has no connecting chain of family edges")
    return rep


# ---------------------------------------------------------------- unraveling


def unravel(S: FiniteStructure, nf: NormalFormFormula, depth: int, start: int = 0, check: bool = True):
    """Truncated unraveling of a model into a tree-like structure plus the map h.

    Each node spawns, per conjunct it does not witness by itself, one group of
    children copying the chosen witness tuple's elements (other than the node's
    own element); tuples among node and group are copied from S.
    """
    if check:
        rep = check_normal_form(S, nf)
        if not rep.ok:
            raise ValueError(f"unravel needs a model: {rep}")
    wc = WitnessChecker(nf)
    parent: list[int | None] = [None]
    h = [start]
    rows: dict[str, set] = {}
    sig = S.signature

    def copy_tuples(nodes: list[int]):
        elems = [h[v] for v in nodes]
        pos = {}
        for v, e in zip(nodes, elems):
            pos.setdefault(e, v)
        es = set(elems)
        for name, ts in S.interp.items():
            for t in ts:
                if set(t) <= es:
                    rows.setdefault(name, set()).add(tuple(pos[x] for x in t))

    copy_tuples([0])
    frontier = set()
    q = deque([(0, 0)])
    while q:
        v, d = q.popleft()
        if d >= depth:
            if nf.m:
                frontier.add(v)
            continue
        a = h[v]
        for i in range(nf.m):
            if wc.self_witness(S, a, i):
                continue
            ys = wc.witness(S, a, i)
            group = []
            for e in dict.fromkeys(ys):
                if e == a:
                    continue
                parent.append(v)
                h.append(e)
                group.append(len(h) - 1)
                q.append((len(h) - 1, d + 1))
            copy_tuples([v] + group)
    tl = make_tree(sig, parent, rows, frontier, h)
    return tl, tuple(h)


# ---------------------------------------------------------------- ranks


def ranks(tl: TreeLikeStructure, sym: str) -> list[int]:
    """rank_sym of every node: max number of one-directional edges on downward sym-paths."""
    r = [0] * tl.n
    for a in reversed(tl.bfs_order):
        best = 0
        for c in tl.children[a]:
            if tl.local.holds(sym, (a, c)):
                best = max(best, r[c] + (0 if tl.local.holds(sym, (c, a)) else 1))
        r[a] = best
    return r


def rank(tl: TreeLikeStructure, sym: str, a: int) -> int:
    return ranks(tl, sym)[a]


def edge_kind(F, sym: str, a, c) -> str:
    """'reset' (no sym edge down), 'strict' (one-directional) or 'sym' (both directions)."""
    if not F.holds(sym, (a, c)):
        return "reset"
    return "sym" if F.holds(sym, (c, a)) else "strict"


@dataclass(frozen=True)
class StopwatchLabeling:
    symbol: str
    bound: int
    values: dict = field(hash=False)
    value_sets: dict | None = field(default=None, hash=False)

    def __getitem__(self, v):
        return self.values[v]


def stopwatch_labeling(tl, sym: str, M: int):
    """Labeling with values in [0, M], or None when some rank exceeds M."""
    if isinstance(tl, PeriodicTree):
        return _stopwatch_periodic(tl, sym, M)
    vals = {}
    for a in tl.bfs_order:
        p = tl.parent[a]
        if p is None:
            v = 0
        else:
            kind = edge_kind(tl.local, sym, p, a)
            v = 0 if kind == "reset" else vals[p] + (kind == "strict")
        if v > M:
            return None
        vals[a] = v
    return StopwatchLabeling(sym, M, vals)


def _stopwatch_periodic(pt: "PeriodicTree", sym: str, M: int):
    sets: dict[int, set[int]] = {pt.root: {0}}
    q = deque([(pt.root, 0)])
    while q:
        v, val = q.popleft()
        fam = pt.families[v]
        for slot, w in enumerate(fam.targets, start=1):
            kind = edge_kind(fam.local, sym, 0, slot)
            nv = 0 if kind == "reset" else val + (kind == "strict")
            if nv > M:
                return None
            if nv not in sets.setdefault(w, set()):
                sets[w].add(nv)
                q.append((w, nv))
    return StopwatchLabeling(sym, M, {v: max(s) for v, s in sets.items()}, {v: frozenset(s) for v, s in sets.items()})


def stopwatch_path(tl: TreeLikeStructure, sym: str, M: int) -> list[int] | None:
    """A root-to-node path along which the stopwatch value first exceeds M."""
    vals = {}
    for a in tl.bfs_order:
        p = tl.parent[a]
        if p is None:
            vals[a] = 0
            continue
        kind = edge_kind(tl.local, sym, p, a)
        vals[a] = 0 if kind == "reset" else vals[p] + (kind == "strict")
        if vals[a] > M:
            path = [a]
            while tl.parent[path[-1]] is not None:
                path.append(tl.parent[path[-1]])
            return list(reversed(path))
    return None


# ---------------------------------------------------------------- periodic trees


@dataclass(frozen=True, eq=False)
class FamilyTemplate:
    """Closed structure on {0 (head), 1..s (children)}; child i unfolds vertex targets[i-1]."""

    local: FiniteStructure
    targets: tuple[int, ...]

    @property
    def s(self) -> int:
        return len(self.targets)


@dataclass(frozen=True, eq=False)
class PeriodicTree:
    signature: Signature
    types: tuple[OneType, ...]
    families: tuple[FamilyTemplate, ...]
    root: int = 0

    @property
    def size(self) -> int:
        return len(self.types)

    def check(self) -> Report:
        rep = Report("periodic-tree")
        seen = {self.root}
        q = deque([self.root])
        while q:
            v = q.popleft()
            fam = self.families[v]
            if one_type(fam.local, 0) != self.types[v]:
                rep.fail(f"vertex {v}: family head type differs from vertex type")
            for slot, w in enumerate(fam.targets, start=1):
                if one_type(fam.local, slot) != self.types[w]:
                    rep.fail(f"vertex {v} slot {slot}: type differs from target vertex {w}")
                if w not in seen:
                    seen.add(w)
                    q.append(w)
        if len(seen) != self.size:
            rep.fail(f"{self.size - len(seen)} vertices unreachable from the root")
        return rep


def unfold(pt: PeriodicTree, depth: int) -> TreeLikeStructure:
    parent: list[int | None] = [None]
    h = [pt.root]
    rows: dict[str, set] = {}

    def copy(fam: FamilyTemplate, nodes: list[int], head_only=False):
        for name, ts in fam.local.interp.items():
            for t in ts:
                if head_only and any(x != 0 for x in t):
                    continue
                rows.setdefault(name, set()).add(tuple(nodes[x] for x in t))

    copy(pt.families[pt.root], [0], head_only=True)
    frontier = set()
    q = deque([(0, 0)])
    while q:
        v, d = q.popleft()
        fam = pt.families[h[v]]
        if d >= depth:
            if fam.targets:
                frontier.add(v)
            continue
        nodes = [v]
        for w in fam.targets:
            parent.append(v)
            h.append(w)
            nodes.append(len(h) - 1)
            q.append((len(h) - 1, d + 1))
        copy(fam, nodes)
    return TreeLikeStructure(pt.signature, tuple(parent), FiniteStructure(pt.signature, len(parent), rows), frozenset(frontier), tuple(h))


# ---------------------------------------------------------------- DOT export


def to_dot(obj, stopwatch: str | None = None, M: int = 10**9) -> str:
    lines = ["digraph G {", "  node [shape=box, fontsize=10];"]
    if isinstance(obj, PeriodicTree):
        sw = stopwatch_labeling(obj, stopwatch, M) if stopwatch else None
        for v, ty in enumerate(obj.types):
            extra = f"\\n{stopwatch}={sorted(sw.value_sets.get(v, ()))}" if sw else ""
            lines.append(f'  v{v} [label="{v}: {ty.label()}{extra}"];')
        for v, fam in enumerate(obj.families):
            for slot, w in enumerate(fam.targets, start=1):
                atoms = _edge_label(fam.local, 0, slot)
                lines.append(f'  v{v} -> v{w} [label="{atoms}"];')
    else:
        sw = stopwatch_labeling(obj, stopwatch, M) if stopwatch else None
        for v in obj.domain:
            extra = f"\\n{stopwatch}={sw[v]}" if sw else ""
            lines.append(f'  n{v} [label="{v}: {obj.types[v].label()}{extra}"];')
        for v in obj.domain:
            for c in obj.children[v]:
                lines.append(f'  n{v} -> n{c} [label="{_edge_label(obj.local, v, c)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _edge_label(S: FiniteStructure, a: int, b: int) -> str:
    out = []
    for name in S.signature.binary_symbols():
        if S.holds(name, (a, b)):
            out.append(name)
    return ",".join(out)
