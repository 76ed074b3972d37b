"""Successor generation: witness families of a state and the obligations they pass down."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..declarations import TypeUniverse, lcc_requirements, seed_triples
from ..model.evaluate import Matcher, compile_qf
from ..model.structure import FiniteStructure, close_rows, rows_to_pairs, transitive_close
from ..model.types import OneType
from ..syntax.ast import Atom, subformulas
from ..syntax.normal_form import NormalFormFormula, dnf_matrix
from ..treelike import edge_kind
from .states import implied, normalize_triple, reduce_obligations


class ExpansionBudget(RuntimeError):
    pass


@dataclass(frozen=True)
class GroupPattern:
    """Children added for one conjunct: their 1-types and tuples over {0 = head, 1..g}."""

    types: tuple[OneType, ...]
    tuples: frozenset  # (name, args) with at least one child among args, closed


@dataclass(frozen=True)
class Move:
    family: FiniteStructure  # closed, head 0, children 1..s
    children: tuple  # (OneType, frozenset[Triple]) per child
    labels: tuple  # per child: tuple of edge kinds, one per trans symbol


class _Rows:
    """Bare tuple sets with the holds() interface of a structure (no validation)."""

    __slots__ = ("rows",)

    def __init__(self, rows: dict):
        self.rows = rows

    def holds(self, name: str, args: tuple) -> bool:
        return args in self.rows.get(name, ())


def _surjections(p: int):
    """Maps of witness vars into {0} ∪ {1..g} hitting every 1..g, children numbered by first use."""
    for g in range(1, p + 1):
        for asg in itertools.product(range(g + 1), repeat=p):
            nxt = 1
            ok = True
            for v in asg:
                if v == 0:
                    continue
                if v > nxt:
                    ok = False
                    break
                if v == nxt:
                    nxt += 1
            if ok and nxt == g + 1:
                yield g, asg


def type_atoms(sig, ty: OneType, e: int):
    for a in ty.atoms:
        ar = sig.arity(a)
        yield a, (e,) * ar


class Expander:
    def __init__(self, nf: NormalFormFormula, family_budget: int = 200_000, branch_cap: int = 256):
        self.nf = nf
        self.sig = nf.signature
        self.t = nf.t
        self.universe = TypeUniverse(self.sig)
        self.syms = self.sig.trans_symbols
        self.fns = [compile_qf(c.matrix, ("x",) + c.witnesses) for c in nf.conjuncts]
        self.family_budget = family_budget
        self.branch_cap = branch_cap
        self.families_seen = 0
        cs = nf.conjuncts
        self.distinct = [i for i in range(nf.m) if cs[i] not in cs[:i]]  # equal conjuncts share a group
        self._pools: dict = {}
        self._closures: dict = {}
        self._type_ok: dict = {}
        self._single = {ty: self._singleton(ty) for ty in self.universe}
        self.disjuncts = dnf_matrix(nf)
        self.seeds = reduce_obligations(seed_triples(nf), self.t)

    # ---------------------------------------------------------------- types

    def _singleton(self, ty: OneType) -> FiniteStructure:
        rows: dict = {}
        for a, args in type_atoms(self.sig, ty, 0):
            rows.setdefault(a, set()).add(args)
            if self.sig.is_transitive(a):
                rows.setdefault(self.sig.canonical(a)[0] + "~", set()).add(args)
        return FiniteStructure(self.sig, 1, rows)

    def type_ok(self, ty: OneType) -> bool:
        """Witness-free conjuncts hold and no φ0 disjunct matches with all variables on this element."""
        r = self._type_ok.get(ty)
        if r is None:
            S = self._single[ty]
            r = True
            for c, fn in zip(self.nf.conjuncts, self.fns):
                if c.p == 0 and not fn(S, (0,)):
                    r = False
            if r:
                M = Matcher(S)
                r = all(M.find(self.t, d.R, d.T) is None for d in self.disjuncts)
            self._type_ok[ty] = r
        return r

    def valid_types(self) -> list[OneType]:
        return [ty for ty in self.universe if self.type_ok(ty)]

    def root_obligations(self):
        return self.seeds

    # ---------------------------------------------------------------- group patterns

    def pool(self, head: OneType, i: int) -> list[GroupPattern] | None:
        """None when the head witnesses conjunct i by itself."""
        key = (head, i)
        if key in self._pools:
            return self._pools[key]
        c = self.nf.conjuncts[i]
        if self.fns[i](self._single[head], (0,) * (1 + c.p)):
            self._pools[key] = None
            return None
        sig = self.sig
        atoms = [a for a in subformulas(c.matrix) if isinstance(a, Atom)]
        names = ("x",) + c.witnesses
        out: dict = {}
        valid = [ty for ty in self.universe if self.type_ok(ty)]
        for g, asg in _surjections(c.p):
            emap = dict(zip(names, (0,) + asg))
            free = set()
            for a in atoms:
                els = tuple(emap[v] for v in a.args)
                if len(set(els)) == 1:
                    continue
                name = a.symbol
                if sig.is_transitive(name):
                    base, swap = sig.canonical(name)
                    name = base
                    if swap:
                        els = (els[1], els[0])
                free.add((name, els))
            for p in sig.trans:
                for ch in range(1, g + 1):
                    free.add((p.name, (0, ch)))
                    free.add((p.name, (ch, 0)))
            free = sorted(free)
            for tys in itertools.product(valid, repeat=g):
                allt = (head,) + tys
                base_rows: dict = {}
                for e, ty in enumerate(allt):
                    for a, args in type_atoms(sig, ty, e):
                        if not sig.is_transitive(a):
                            base_rows.setdefault(a, set()).add(args)
                loops = {p.name: [p.name in ty.atoms for ty in allt] for p in sig.trans}
                for bits in itertools.product((0, 1), repeat=len(free)):
                    rows = {k: set(v) for k, v in base_rows.items()}
                    trows = {p.name: [(1 << e) if loops[p.name][e] else 0 for e in range(g + 1)] for p in sig.trans}
                    for b, (name, els) in zip(bits, free):
                        if not b:
                            continue
                        if name in trows:
                            trows[name][els[0]] |= 1 << els[1]
                        else:
                            rows.setdefault(name, set()).add(els)
                    ok = True
                    for name, tr in trows.items():
                        pairs = self._closed(tuple(tr))
                        if pairs is None:
                            ok = False
                            break
                        if pairs[0]:
                            rows[name], rows[name + "~"] = set(pairs[0]), set(pairs[1])
                    if not ok:
                        continue
                    if not self.fns[i](_Rows(rows), (0,) + asg):
                        continue
                    tuples = frozenset(
                        (name, t) for name, ts in rows.items() for t in ts if any(x != 0 for x in t) and len(set(t)) > 1
                    )
                    out.setdefault((tys, tuples), GroupPattern(tys, tuples))
        res = list(out.values())
        self._pools[key] = res
        return res

    def _closed(self, tr: tuple):
        """Closed pairs and their inverses for a bitset relation, or None when closing adds a loop."""
        if tr in self._closures:
            return self._closures[tr]
        closed = close_rows(list(tr))
        res = None
        if all(bool(closed[e] >> e & 1) == bool(tr[e] >> e & 1) for e in range(len(tr))):
            pairs = frozenset(rows_to_pairs(closed))
            res = (pairs, frozenset((j, i) for i, j in pairs))
        self._closures[tr] = res
        return res

    # ---------------------------------------------------------------- families and moves

    def families(self, head: OneType):
        """Closed witness families for a head type (an empty pool list means no family exists)."""
        pools = []
        for i in self.distinct:
            pl = self.pool(head, i)
            if pl is None:
                continue
            if not pl:
                return
            pools.append(pl)
        sig = self.sig
        for choice in itertools.product(*pools):
            self.families_seen += 1
            if self.families_seen > self.family_budget:
                raise ExpansionBudget(f"family budget {self.family_budget} exhausted")
            rows: dict = {}
            for a, args in type_atoms(sig, head, 0):
                rows.setdefault(a, set()).add(args)
            types = []
            off = 0
            for gp in choice:
                g = len(gp.types)
                for j, ty in enumerate(gp.types, start=1):
                    for a, args in type_atoms(sig, ty, off + j):
                        rows.setdefault(a, set()).add(args)
                for name, tup in gp.tuples:
                    rows.setdefault(name, set()).add(tuple(0 if x == 0 else x + off for x in tup))
                types.extend(gp.types)
                off += g
            F = transitive_close(FiniteStructure(sig, off + 1, rows))
            yield F, tuple(types)

    def labels(self, F: FiniteStructure, c: int) -> tuple[str, ...]:
        return tuple(edge_kind(F, s, 0, c) for s in self.syms)

    def moves(self, head: OneType, obligations) -> list[Move]:
        out: dict = {}
        for F, types in self.families(head):
            s = len(types)
            for assignment in self._assignments(F, s, obligations):
                kids = tuple(
                    (types[j], reduce_obligations(assignment[j + 1], self.t)) for j in range(s)
                )
                labs = tuple(self.labels(F, j + 1) for j in range(s))
                key = frozenset(zip(kids, labs))
                out.setdefault(key, Move(F, kids, labs))
        return list(out.values())

    def _assignments(self, F, s: int, obligations):
        """Inclusion-minimal child obligation sets making the family locally consistent."""
        forced = {j: set(self.seeds) for j in range(1, s + 1)}
        pending = []
        for tr in obligations:
            for _fit, options in lcc_requirements(F, tr, self.t):
                opts = []
                vacuous = False
                for child, im in options:
                    n = normalize_triple(im, self.t)
                    if n is None:
                        vacuous = True
                        break
                    opts.append((child, n))
                if vacuous:
                    continue
                if not opts:
                    return []
                if len(opts) == 1:
                    forced[opts[0][0]].add(opts[0][1])
                else:
                    pending.append(opts)
        pending = [o for o in pending if not any(implied(forced[c], tr) for c, tr in o)]
        if not pending:
            return [forced]
        results: list[dict] = []

        def rec(k: int, cur: dict):
            if len(results) > self.branch_cap:
                raise ExpansionBudget("obligation branching cap exceeded")
            while k < len(pending) and any(implied(cur[c], tr) for c, tr in pending[k]):
                k += 1
            if k == len(pending):
                results.append({j: frozenset(v) for j, v in cur.items()})
                return
            for c, tr in pending[k]:
                nxt = dict(cur)
                nxt[c] = cur[c] | {tr}
                rec(k + 1, nxt)

        rec(0, {j: frozenset(v) for j, v in forced.items()})
        minimal = []
        for r in results:
            if not any(all(o[j] <= r[j] for j in r) and o != r for o in results):
                if r not in minimal:
                    minimal.append(r)
        return minimal
