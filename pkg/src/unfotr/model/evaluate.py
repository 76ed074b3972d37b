"""Tarskian evaluation, normal-form model checking and conjunctive pattern search."""
from __future__ import annotations

import itertools
from functools import cached_property

from ..report import Report
from ..syntax.ast import And, Atom, Eq, Exists, Formula, Not, Or, free_vars
from ..syntax.normal_form import DNFBlowup, NormalFormFormula, dnf_matrix
from .structure import FiniteStructure


def eval_formula(S: FiniteStructure, f: Formula, asg: dict[str, int] | None = None) -> bool:
    asg = asg or {}
    missing = free_vars(f) - set(asg)
    if missing:
        raise KeyError(f"unbound variables {sorted(missing)}")
    return _ev(S, f, dict(asg))


def _ev(S, f, asg) -> bool:
    if isinstance(f, Atom):
        return S.holds(f.symbol, tuple(asg[v] for v in f.args))
    if isinstance(f, Eq):
        return asg[f.left] == asg[f.right]
    if isinstance(f, And):
        return all(_ev(S, p, asg) for p in f.parts)
    if isinstance(f, Or):
        return any(_ev(S, p, asg) for p in f.parts)
    if isinstance(f, Not):
        return not _ev(S, f.body, asg)
    if isinstance(f, Exists):
        saved = {v: asg[v] for v in f.vars if v in asg}
        try:
            for vals in itertools.product(S.domain, repeat=len(f.vars)):
                asg.update(zip(f.vars, vals))
                if _ev(S, f.body, asg):
                    return True
            return False
        finally:
            for v in f.vars:
                asg.pop(v, None)
            asg.update(saved)
    raise TypeError(f)


# public name used across the package and in docs
eval = eval_formula


def compile_qf(f: Formula, variables: tuple[str, ...]):
    """Compile a quantifier-free formula into fn(S, values) -> bool."""
    idx = {v: i for i, v in enumerate(variables)}

    def build(g):
        if isinstance(g, Atom):
            sym, pos = g.symbol, tuple(idx[v] for v in g.args)
            return lambda S, vals: S.holds(sym, tuple(vals[p] for p in pos))
        if isinstance(g, Eq):
            a, b = idx[g.left], idx[g.right]
            return lambda S, vals: vals[a] == vals[b]
        if isinstance(g, Not):
            h = build(g.body)
            return lambda S, vals: not h(S, vals)
        if isinstance(g, And):
            hs = [build(p) for p in g.parts]
            return lambda S, vals: all(h(S, vals) for h in hs)
        if isinstance(g, Or):
            hs = [build(p) for p in g.parts]
            return lambda S, vals: any(h(S, vals) for h in hs)
        raise ValueError("compile_qf needs a quantifier-free formula")

    return build(f)


# ---------------------------------------------------------------- pattern search


class Matcher:
    """Backtracking search for tuples satisfying a conjunction of literals.

    Used for φ0 disjuncts (model checking) and for the formulas ψ_d of
    declarations, which add equalities/disequalities with a fixed element.
    """

    def __init__(self, S: FiniteStructure):
        self.S = S
        self.full = (1 << S.n) - 1

    @cached_property
    def pred(self) -> dict[str, list[int]]:
        out = {}
        for name, rows in self.S.succ.items():
            p = [0] * self.S.n
            for i, r in enumerate(rows):
                x = r
                while x:
                    low = x & -x
                    p[low.bit_length() - 1] |= 1 << i
                    x ^= low
            out[name] = p
        return out

    @cached_property
    def _diag(self) -> dict[str, int]:
        out = {}
        sig = self.S.signature
        for name, ts in self.S.interp.items():
            if sig.arity(name) == 1:
                out[name] = sum(1 << t[0] for t in ts)
            else:
                out[name] = sum(1 << t[0] for t in ts if len(set(t)) == 1)
        return out

    def find(self, t: int, R, T=(), allowed=None, eq=None, neq=None, first=True):
        """Tuples (x_1..x_t) with all literals of R and atoms (sym,i,j) of T true.

        allowed: bitmask restricting every variable; eq / neq: per-index element
        that the variable must equal / differ from.
        Returns the first tuple found (or None); with first=False a list of all.
        """
        allowed = self.full if allowed is None else allowed
        eq = eq or {}
        neq = neq or {}
        base = []
        for i in range(1, t + 1):
            m = allowed
            if i in eq:
                m &= 1 << eq[i]
            if i in neq:
                m &= ~(1 << neq[i])
            base.append(m)
        binary = []  # (sym, i, j) with i != j
        higher = []  # literals over several variables, not binary
        for l in R:
            vs = set(l.args)
            if len(vs) == 1:
                (i,) = vs
                d = self._diag.get(l.symbol, 0)
                base[i - 1] &= d if l.positive else ~d
            elif len(l.args) == 2 and l.positive:
                binary.append((l.symbol, l.args[0], l.args[1]))
            else:
                higher.append(l)
        for s, i, j in T:
            if i == j:
                base[i - 1] &= self._diag.get(s, 0)
            else:
                binary.append((s, i, j))
        if any(b == 0 for b in base):
            return None if first else []
        succ, pred = self.S.succ, None
        checks_at: dict[int, list] = {i: [] for i in range(1, t + 1)}
        for s, i, j in binary:
            checks_at[max(i, j)].append((s, i, j))
        higher_at: dict[int, list] = {i: [] for i in range(1, t + 1)}
        for l in higher:
            higher_at[max(l.args)].append(l)
        out = []
        vals = [0] * (t + 1)

        def rec(i: int):
            nonlocal pred
            if i > t:
                out.append(tuple(vals[1:]))
                return first
            m = base[i - 1]
            for s, a, b in checks_at[i]:
                if a == i:  # atom s(x_i, x_b) with b < i
                    if pred is None:
                        pred = self.pred
                    m &= pred[s][vals[b]]
                else:
                    m &= succ[s][vals[a]]
                if not m:
                    return False
            while m:
                low = m & -m
                m ^= low
                vals[i] = low.bit_length() - 1
                if all(
                    self.S.holds(l.symbol, tuple(vals[a] for a in l.args)) == l.positive for l in higher_at[i]
                ):
                    if rec(i + 1):
                        return True
            return False

        rec(1)
        if first:
            return out[0] if out else None
        return out


# ---------------------------------------------------------------- normal-form checks


def phi0_violations(S: FiniteStructure, nf: NormalFormFormula, limit: int = 10) -> list[tuple[int, ...]]:
    """Tuples satisfying φ0 (each one violates ∀x̄ ¬φ0)."""
    out: list[tuple[int, ...]] = []
    try:
        ds = dnf_matrix(nf)
    except DNFBlowup:
        fn = compile_qf(nf.phi0, nf.xs)
        for tup in itertools.product(S.domain, repeat=nf.t):
            if fn(S, tup):
                out.append(tup)
                if len(out) >= limit:
                    break
        return out
    M = Matcher(S)
    for d in ds:
        for tup in M.find(nf.t, d.R, d.T, first=False):
            if tup not in out:
                out.append(tup)
            if len(out) >= limit:
                return out
    return out


class WitnessChecker:
    def __init__(self, nf: NormalFormFormula):
        self.nf = nf
        self.fns = [compile_qf(c.matrix, ("x",) + c.witnesses) for c in nf.conjuncts]

    def witness(self, S, a: int, i: int, candidates=None):
        c = self.nf.conjuncts[i]
        dom = S.domain if candidates is None else candidates
        fn = self.fns[i]
        for ys in itertools.product(dom, repeat=c.p):
            if fn(S, (a,) + ys):
                return ys
        return None

    def self_witness(self, S, a: int, i: int) -> bool:
        return self.fns[i](S, (a,) * (1 + self.nf.conjuncts[i].p))


def check_normal_form(S: FiniteStructure, nf: NormalFormFormula, skip_witness=frozenset()) -> Report:
    """∀x̄¬φ0 on all n^t tuples and ∀∃-witnesses for every element (except skip_witness)."""
    rep = Report("normal-form")
    for tup in phi0_violations(S, nf):
        rep.fail(f"phi0 holds at {tup}")
    wc = WitnessChecker(nf)
    for a in S.domain:
        if a in skip_witness:
            continue
        for i in range(nf.m):
            if wc.witness(S, a, i) is None:
                rep.fail(f"element {a} has no witness for conjunct {i}")
    return rep


def check_hom_conditions(S2: FiniteStructure, S1: FiniteStructure, nf: NormalFormFormula) -> Report:
    """(a1) witnesses in S2 and (a2) 1-type-preserving homomorphisms of t-tuples into S1."""
    from .types import one_type

    rep = Report("homomorphism-conditions")
    wc = WitnessChecker(nf)
    for a in S2.domain:
        for i in range(nf.m):
            if wc.witness(S2, a, i) is None:
                rep.fail(f"(a1) element {a} lacks a witness for conjunct {i}")
    types1: dict = {}
    for b in S1.domain:
        types1.setdefault(one_type(S1, b), []).append(b)
    types2 = [one_type(S2, a) for a in S2.domain]
    seen = set()
    for tup in itertools.product(S2.domain, repeat=nf.t):
        elems = tuple(sorted(set(tup)))
        if elems in seen:
            continue
        seen.add(elems)
        if _find_hom(S2, S1, elems, types2, types1) is None:
            rep.fail(f"(a2) no 1-type-preserving homomorphism for tuple {tup}")
    return rep


def _find_hom(S2, S1, elems, types2, types1):
    facts = []
    es = set(elems)
    for name, ts in S2.interp.items():
        for t in ts:
            if len(set(t)) > 1 and set(t) <= es:
                facts.append((name, t))
    h: dict[int, int] = {}

    def rec(i: int):
        if i == len(elems):
            return True
        a = elems[i]
        for b in types1.get(types2[a], ()):
            h[a] = b
            ok = True
            for name, t in facts:
                if a in t and all(x in h for x in t):
                    if not S1.holds(name, tuple(h[x] for x in t)):
                        ok = False
                        break
            if ok and rec(i + 1):
                return True
            del h[a]
        return False

    return dict(h) if rec(0) else None
