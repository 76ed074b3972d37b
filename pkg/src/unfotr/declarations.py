"""Light declarations and φ-declarations, their local consistency conditions and canonical values."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .model.evaluate import Matcher
from .model.structure import FiniteStructure
from .model.types import OneType, one_type
from .report import Report
from .syntax.ast import Signature
from .syntax.normal_form import Lit, NormalFormFormula, all_subsets, dnf_matrix


class DeclarationCapExceeded(RuntimeError):
    pass


LIGHT_SUBSET_CAP = 8  # 2k <= 8 symbols, i.e. at most 256 subsets


class TypeUniverse:
    """All atomic 1-types over a signature, in a fixed order."""

    def __init__(self, sig: Signature):
        self.sig = sig
        atoms = sig.one_var_atoms()
        self.types: tuple[OneType, ...] = tuple(
            OneType(frozenset(c)) for c in (s for s in all_subsets(atoms))
        )
        self.index = {ty: i for i, ty in enumerate(self.types)}

    def __len__(self) -> int:
        return len(self.types)

    def __iter__(self):
        return iter(self.types)

    def mask(self, types) -> int:
        m = 0
        for ty in types:
            m |= 1 << self.index[ty]
        return m

    def unmask(self, m: int) -> frozenset[OneType]:
        return frozenset(ty for i, ty in enumerate(self.types) if m >> i & 1)

    @property
    def full(self) -> int:
        return (1 << len(self.types)) - 1


def trans_subsets(sig: Signature) -> list[frozenset[str]]:
    syms = sig.trans_symbols
    if len(syms) > LIGHT_SUBSET_CAP:
        raise DeclarationCapExceeded(f"2k={len(syms)} exceeds the light-declaration cap {LIGHT_SUBSET_CAP}")
    return all_subsets(syms)


# ---------------------------------------------------------------- light declarations


@dataclass(frozen=True)
class LightDeclaration:
    """For each 𝒯 ⊆ {T1..T2k}, the 1-types promised not reachable via all of 𝒯.

    Monotonicity (𝒯 ⊆ 𝒯' ⇒ fd(𝒯) ⊆ fd(𝒯')) is enforced on construction.
    """

    table: tuple[tuple[frozenset[str], frozenset[OneType]], ...]

    @staticmethod
    def make(mapping: dict) -> "LightDeclaration":
        keys = sorted(mapping, key=lambda s: (len(s), sorted(s)))
        closed = {}
        for K in keys:
            acc = set(mapping[K])
            for K2 in keys:
                if K2 < K:
                    acc |= mapping[K2]
            closed[K] = frozenset(acc)
        return LightDeclaration(tuple((K, closed[K]) for K in keys))

    @cached_property
    def as_dict(self) -> dict:
        return dict(self.table)

    def __call__(self, K) -> frozenset[OneType]:
        return self.as_dict.get(frozenset(K), frozenset())

    def subsets(self):
        return [K for K, _ in self.table]

    def remove(self, K, ty) -> "LightDeclaration":
        d = {k: (v - {ty} if k == frozenset(K) else v) for k, v in self.table}
        return LightDeclaration(tuple(d.items()))

    def add(self, K, ty) -> "LightDeclaration":
        return LightDeclaration.make({k: (v | {ty} if k == frozenset(K) else v) for k, v in self.table})

    def to_json(self) -> dict:
        return {",".join(sorted(K)) or "-": sorted(ty.label() for ty in v) for K, v in self.table}


def ldec_all(tl, universe: TypeUniverse | None = None) -> list[LightDeclaration]:
    """Canonical light declaration of every node of a finite tree-like structure."""
    sig = tl.signature
    U = universe or TypeUniverse(sig)
    subsets = trans_subsets(sig)
    tmask = [1 << U.index[ty] for ty in tl.types]
    local = tl.local
    order = tl.bfs_order
    per_node: list[dict] = [dict() for _ in tl.domain]
    for K in subsets:
        Ks = sorted(K)

        def step(x, y):
            return all(local.holds(s, (x, y)) for s in Ks)

        down = [0] * tl.n
        for v in reversed(order):
            m = 0
            for c in tl.children[v]:
                if step(v, c):
                    m |= tmask[c] | down[c]
            down[v] = m
        up = [0] * tl.n
        for v in order:
            p = tl.parent[v]
            if p is None:
                continue
            m = 0
            for w in tl.family(p):
                if w == v or not step(v, w):
                    continue
                m |= tmask[w] | (up[p] if w == p else down[w])
            up[v] = m
        for v in tl.domain:
            reach = down[v] | up[v] | (tmask[v] if step(v, v) else 0)
            per_node[v][K] = U.unmask(U.full & ~reach)
    return [LightDeclaration.make(d) for d in per_node]


def ldec(tl, a: int, universe: TypeUniverse | None = None) -> LightDeclaration:
    from .treelike import PeriodicTree

    if isinstance(tl, PeriodicTree):
        ref = refine_periodic(tl, universe)
        return ref.ldec[ref.first_instance[a]]
    return ldec_all(tl, universe)[a]


def ldec_reference(S: FiniteStructure, a: int, universe: TypeUniverse) -> LightDeclaration:
    """Direct definition over a materialized structure (used as an oracle in tests)."""
    d = {}
    types = [one_type(S, b) for b in S.domain]
    for K in trans_subsets(S.signature):
        reached = {types[b] for b in S.domain if all(S.holds(s, (a, b)) for s in K)}
        d[K] = frozenset(ty for ty in universe.types if ty not in reached)
    return LightDeclaration.make(d)


def check_lcc_light(F: FiniteStructure, decls) -> Report:
    """(ld1) propagation and (ld2) exclusion for every ordered member pair of a closed family."""
    rep = Report("lcc-light")
    sig = F.signature
    types = [one_type(F, v) for v in F.domain]
    for a1, a2 in itertools.product(F.domain, repeat=2):
        for K in trans_subsets(sig):
            if not all(F.holds(s, (a1, a2)) for s in K):
                continue
            if a1 == a2 and not K:
                continue
            f1, f2 = decls[a1](K), decls[a2](K)
            if not f1 <= f2:
                rep.fail(f"(ld1) at members {a1}->{a2}, {sorted(K)}: {sorted(t.label() for t in f1 - f2)} not propagated")
            if types[a2] in f1:
                rep.fail(f"(ld2) at members {a1}->{a2}, {sorted(K)}: type {types[a2].label()} declared unreachable")
    return rep


# ---------------------------------------------------------------- φ-declarations


@dataclass(frozen=True, order=True)
class Triple:
    """(R, T, Q): ψ(x̄, y) = ⋀R ∧ ⋀_{(u,j,j')∈T} T_u x_j x_j' ∧ ⋀_{i∈Q} x_i = y ∧ ⋀_{i∉Q} x_i ≠ y."""

    R: frozenset[Lit]
    T: frozenset[tuple[str, int, int]]
    Q: frozenset[int]

    def __str__(self) -> str:
        r = ",".join(str(l) for l in sorted(self.R))
        tt = ",".join(f"{s}{i}{j}" for s, i, j in sorted(self.T))
        return f"({{{r}}},{{{tt}}},{set(sorted(self.Q)) or '{}'})"

    def subsumes(self, other: "Triple") -> bool:
        """Promise self forbids at least what other forbids."""
        return self.Q == other.Q and self.R <= other.R and self.T <= other.T

    def to_json(self) -> dict:
        return {
            "R": [[l.symbol, list(l.args), l.positive] for l in sorted(self.R)],
            "T": [list(x) for x in sorted(self.T)],
            "Q": sorted(self.Q),
        }

    @staticmethod
    def from_json(doc) -> "Triple":
        return Triple(
            frozenset(Lit(s, tuple(a), p) for s, a, p in doc["R"]),
            frozenset((s, i, j) for s, i, j in doc["T"]),
            frozenset(doc["Q"]),
        )


PhiDeclaration = frozenset  # a set of Triples


def seed_triples(nf: NormalFormFormula) -> list[Triple]:
    qs = all_subsets(range(1, nf.t + 1))
    return [Triple(d.R, d.T, Q) for d in dnf_matrix(nf) for Q in qs]


def image(tr: Triple, t: int, inside: frozenset[int], qc: frozenset[int]) -> Triple:
    """Promise handed to a child whose subtree holds the indices `inside` ((l8) / (l9)).

    qc ⊆ inside are the indices mapped to the child itself. A transitive atom
    joining an outside index to an index in qc was already decided on the
    family and is dropped: it cannot be routed through the child.
    """
    rest = frozenset(range(1, t + 1)) - inside
    if not rest:
        return Triple(tr.R, tr.T, qc)
    h = min(rest)
    R2 = frozenset(r for r in tr.R if set(r.args) <= inside)
    T2 = set()
    for s, j, j2 in tr.T:
        ij, ij2 = j in inside, j2 in inside
        if ij and ij2:
            T2.add((s, j, j2))
        elif ij and j not in qc:
            T2.add((s, j, h))
        elif ij2 and j2 not in qc:
            T2.add((s, h, j2))
    return Triple(R2, frozenset(T2), qc | rest)


def triple_space(nf: NormalFormFormula, cap: int = 200_000) -> frozenset[Triple]:
    """Seeds from the DNF of φ0 closed under the (l8)/(l9) images."""
    t = nf.t
    idx = frozenset(range(1, t + 1))
    splits = [(S, Qc) for S in all_subsets(idx) if S for Qc in all_subsets(S)]
    space = set(seed_triples(nf))
    todo = list(space)
    while todo:
        tr = todo.pop()
        for S, Qc in splits:
            im = image(tr, t, S, Qc)
            if im not in space:
                space.add(im)
                todo.append(im)
                if len(space) > cap:
                    raise DeclarationCapExceeded(f"triple space exceeds {cap}")
    return frozenset(space)


def dec_all(tl, nf: NormalFormFormula, space=None) -> list[frozenset[Triple]]:
    """Canonical φ-declaration of each node: admissible triples with no ψ-witness in its subtree."""
    space = sorted(space if space is not None else triple_space(nf))
    S = tl.materialize()
    M = Matcher(S)
    t = nf.t
    sub = [0] * tl.n
    for v in reversed(tl.bfs_order):
        m = 1 << v
        for c in tl.children[v]:
            m |= sub[c]
        sub[v] = m
    out = []
    for a in tl.domain:
        keep = []
        for tr in space:
            eq = {i: a for i in tr.Q}
            neq = {i: a for i in range(1, t + 1) if i not in tr.Q}
            if M.find(t, tr.R, tr.T, allowed=sub[a], eq=eq, neq=neq) is None:
                keep.append(tr)
        out.append(frozenset(keep))
    return out


def dec(tl, nf: NormalFormFormula, a: int, space=None) -> frozenset[Triple]:
    return dec_all(tl, nf, space)[a]


# ---------------------------------------------------------------- LCC (l1)–(l9)

HEAD = 0


@dataclass(frozen=True)
class Fitting:
    """f(i) for i = 1..t: 0 = head, ('c', j) = child j, ('s', j) = subtree of child j below it."""

    f: tuple

    @property
    def fbar(self) -> tuple:
        return tuple(x if x == HEAD else x[1] for x in self.f)


def fittings(t: int, s: int):
    targets = [HEAD] + [(k, j) for j in range(1, s + 1) for k in ("c", "s")]
    for f in itertools.product(targets, repeat=t):
        yield Fitting(f)


class FamilyView:
    """A closed family structure on {0 (head), 1..s (children)}."""

    def __init__(self, F: FiniteStructure):
        self.F = F
        self.s = F.n - 1

    def elem(self, x):
        return HEAD if x == HEAD else x[1]


def _lit_true(F: FiniteStructure, l: Lit, elems) -> bool:
    return F.holds(l.symbol, tuple(elems[a - 1] for a in l.args)) == l.positive


def lcc_requirements(F: FiniteStructure, tr: Triple, t: int, fitting_cap: int = 2_000_000):
    """For each fitting where (l1)–(l7) all fail: the list of (child, triple) options of (l8)/(l9).

    An empty option list means no child declaration can rescue that fitting.
    Yields (fitting, options).
    """
    s = F.n - 1
    if (1 + 2 * s) ** t > fitting_cap:
        raise DeclarationCapExceeded(f"fitting space (1+2s)^t = {(1 + 2 * s) ** t} exceeds cap")
    idx = range(1, t + 1)
    Rvars = [(r, frozenset(r.args)) for r in tr.R]
    # fittings violating (l4) or (l5) are discharged outright, so only
    # those sending exactly the Q-indices to the head are enumerated
    away = [(k, j) for j in range(1, s + 1) for k in ("c", "s")]
    choices = [(HEAD,) if i in tr.Q else away for i in idx]
    for f in itertools.product(*choices):
        fit = Fitting(f)
        fb = fit.fbar

        def fully(vs):
            return all(not isinstance(f[v - 1], tuple) or f[v - 1][0] == "c" for v in vs)

        elems = [x if x == HEAD else x[1] for x in f]
        ok = False
        for r, vs in Rvars:
            if fully(vs):
                if not _lit_true(F, r, elems):  # (l2)
                    ok = True
                    break
            else:
                fv = {f[v - 1] for v in vs}
                kids = {x[1] for x in fv if x != HEAD and x[0] == "c"}
                if HEAD in fv or len(kids) >= 2:  # (l1)
                    ok = True
                    break
                if len({fb[v - 1] for v in vs} - {HEAD}) >= 2:  # (l6)
                    ok = True
                    break
        if ok:
            continue
        for sym, j, j2 in tr.T:
            if fully((j, j2)):
                if not F.holds(sym, (elems[j - 1], elems[j2 - 1])):  # (l3)
                    ok = True
                    break
            elif fb[j - 1] != fb[j2 - 1] and not F.holds(sym, (fb[j - 1], fb[j2 - 1])):  # (l7)
                ok = True
                break
        if ok:
            continue
        options = []
        if all(x == HEAD or x[0] == "c" for x in f):
            # the whole tuple lies in the family: nothing left to delegate
            yield fit, options
            continue
        for child in sorted({x for x in fb if x != HEAD}):
            inside = frozenset(i for i in idx if fb[i - 1] == child)
            qc = frozenset(i for i in idx if f[i - 1] == ("c", child))
            options.append((child, image(tr, t, inside, qc)))  # (l8) if inside is everything, else (l9)
        yield fit, options


def _contains(decl, tr: Triple) -> bool:
    if tr in decl:
        return True
    return any(d.subsumes(tr) for d in decl)


def check_lcc(F: FiniteStructure, decls, nf_or_t) -> Report:
    """Every triple of the head declaration and every fitting satisfy one of (l1)–(l9)."""
    t = nf_or_t if isinstance(nf_or_t, int) else nf_or_t.t
    rep = Report("lcc")
    for tr in sorted(decls[0]):
        for fit, options in lcc_requirements(F, tr, t):
            if not any(_contains(decls[c], im) for c, im in options):
                rep.fail(f"triple {tr} fitting {fit.f}: none of (l1)-(l9) holds")
                break
    return rep


def family_structure(tl, a: int) -> FiniteStructure:
    fam = tl.family(a)
    rows = {}
    pos = {v: i for i, v in enumerate(fam)}
    for name, ts in tl.local.interp.items():
        for tup in ts:
            if all(x in pos for x in tup):
                rows.setdefault(name, set()).add(tuple(pos[x] for x in tup))
    return FiniteStructure(tl.signature, len(fam), rows)


# ---------------------------------------------------------------- local ⇒ global


@dataclass
class LocalGlobalReport:
    local: Report
    global_: Report

    @property
    def falsified(self) -> bool:
        return self.local.ok and not self.global_.ok

    @property
    def ok(self) -> bool:
        return self.local.ok and self.global_.ok


def verify_local_global(tl, system, flavor: str, nf: NormalFormFormula | None = None) -> LocalGlobalReport:
    """Local consistency at every node, then every promise checked by enumeration."""
    local, glob = Report("local"), Report("global")
    for a in tl.domain:
        F = family_structure(tl, a)
        decls = [system[v] for v in tl.family(a)]
        rep = check_lcc_light(F, decls) if flavor == "light" else check_lcc(F, decls, nf)
        local.extend(rep, f"node {a}: ")
    S = tl.materialize()
    if flavor == "light":
        U = TypeUniverse(tl.signature)
        types = [one_type(S, b) for b in S.domain]
        for a in tl.domain:
            for K in system[a].subsets():
                for b in S.domain:
                    if types[b] in system[a](K) and all(S.holds(s, (a, b)) for s in K):
                        glob.fail(f"node {a} declares {types[b].label()} unreachable via {sorted(K)} but reaches {b}")
                        break
        del U
    else:
        M = Matcher(S)
        t = nf.t
        for a in tl.domain:
            sub = 0
            for v in tl.subtree(a):
                sub |= 1 << v
            for tr in system[a]:
                eq = {i: a for i in tr.Q}
                neq = {i: a for i in range(1, t + 1) if i not in tr.Q}
                w = M.find(t, tr.R, tr.T, allowed=sub, eq=eq, neq=neq)
                if w is not None:
                    glob.fail(f"node {a} promise {tr} broken by {w}")
    return LocalGlobalReport(local, glob)


# ---------------------------------------------------------------- periodic trees


@dataclass
class RefinedTree:
    """Vertices (periodic vertex, upward-reach context) so that ldec is vertex-level."""

    base: list[int]
    ctx: list[tuple]
    children: list[list[int]]
    ldec: list[LightDeclaration]
    first_instance: dict[int, int]


def refine_periodic(pt, universe: TypeUniverse | None = None, cap: int = 200_000) -> RefinedTree:
    sig = pt.signature
    U = universe or TypeUniverse(sig)
    subsets = trans_subsets(sig)
    tbit = [1 << U.index[ty] for ty in pt.types]

    def step(F, x, y, K):
        return all(F.holds(s, (x, y)) for s in K)

    # downward reach per vertex and subset: least fixpoint
    down = {(v, K): 0 for v in range(pt.size) for K in subsets}
    changed = True
    while changed:
        changed = False
        for v in range(pt.size):
            fam = pt.families[v]
            for K in subsets:
                m = down[(v, K)]
                for slot, w in enumerate(fam.targets, start=1):
                    if step(fam.local, 0, slot, K):
                        m |= tbit[w] | down[(w, K)]
                if m != down[(v, K)]:
                    down[(v, K)] = m
                    changed = True
    root_ctx = tuple(0 for _ in subsets)
    key_of: dict[tuple, int] = {}
    base, ctx, children = [], [], []

    def vertex(v, c):
        k = (v, c)
        if k not in key_of:
            key_of[k] = len(base)
            base.append(v)
            ctx.append(c)
            children.append(None)
            if len(base) > cap:
                raise DeclarationCapExceeded("refined periodic tree too large")
        return key_of[k]

    vertex(pt.root, root_ctx)
    i = 0
    while i < len(base):
        v, c = base[i], ctx[i]
        fam = pt.families[v]
        kids = []
        for slot, w in enumerate(fam.targets, start=1):
            new = []
            for ki, K in enumerate(subsets):
                m = 0
                for other in range(fam.s + 1):
                    if other == slot or not step(fam.local, slot, other, K):
                        continue
                    if other == 0:
                        m |= tbit[v] | c[ki]
                    else:
                        m |= tbit[fam.targets[other - 1]] | down[(fam.targets[other - 1], K)]
                new.append(m)
            kids.append(vertex(w, tuple(new)))
        children[i] = kids
        i += 1
    decls = []
    first: dict[int, int] = {}
    for i, (v, c) in enumerate(zip(base, ctx)):
        first.setdefault(v, i)
        loop_F = pt.families[v].local
        d = {}
        for ki, K in enumerate(subsets):
            reach = down[(v, K)] | c[ki] | (tbit[v] if step(loop_F, 0, 0, K) else 0)
            d[K] = U.unmask(U.full & ~reach)
        decls.append(LightDeclaration.make(d))
    return RefinedTree(base, ctx, children, decls, first)
