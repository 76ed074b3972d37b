"""UNFO well-formedness checks and the equivalence/order sugar."""
from __future__ import annotations

from ..report import Report
from .ast import EQUIV, ORDER, And, Atom, Eq, Exists, Formula, Not, Or, Signature, TransPair, conj, free_vars, subformulas
from .render import render_formula


def validate_unfo(f: Formula, sig: Signature) -> Report:
    """Every negation scope has at most one free variable and atoms match the signature."""
    rep = Report("unfo")
    for g in subformulas(f):
        if isinstance(g, Atom):
            a = sig.arity(g.symbol)
            if a is None:
                rep.fail(f"unknown symbol {g.symbol} in {render_formula(g)}")
            elif a != len(g.args):
                rep.fail(f"arity mismatch in {render_formula(g)} (expected {a})")
        elif isinstance(g, Not):
            fv = free_vars(g.body)
            if len(fv) > 1:
                rep.fail(f"negation over {len(fv)} free variables {sorted(fv)}: {render_formula(g)}")
    return rep


def apply_sugar(sig: Signature, f: Formula) -> tuple[Signature, Formula]:
    """Compile equivalence- and order-flagged transitive symbols into plain UNFO+S."""
    equiv = {p.name for p in sig.trans if p.flag == EQUIV}
    order = [p.name for p in sig.trans if p.flag == ORDER]
    if not equiv and not order:
        return sig, f
    equiv |= {n + "~" for n in equiv}

    def go(g: Formula) -> Formula:
        if isinstance(g, Atom):
            if g.symbol in equiv:
                x, y = g.args
                base = g.symbol.rstrip("~")
                return Or((And((Atom(base, (x, y)), Atom(base + "~", (x, y)))), Eq(x, y)))
            return g
        if isinstance(g, Eq):
            return g
        if isinstance(g, And):
            return And(tuple(go(p) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(go(p) for p in g.parts))
        if isinstance(g, Not):
            return Not(go(g.body))
        return Exists(g.vars, go(g.body))

    out = go(f)
    axioms = [Not(Exists(("x", "y"), And((Atom(o, ("x", "y")), Atom(o, ("y", "x")))))) for o in order]
    if axioms:
        out = conj([out] + axioms)
    plain = Signature(sig.unary, sig.relations, tuple(TransPair(p.name) for p in sig.trans))
    return plain, out
