"""Formula pretty printer; output re-parses to a structurally equal tree."""
from __future__ import annotations

from .ast import EQUIV, ORDER, And, Atom, Eq, Exists, Formula, Not, Or, Signature


def render_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f"{f.symbol}({','.join(f.args)})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Not):
        b = f.body
        inner = render_formula(b)
        if isinstance(b, (And, Or)):
            inner = f"({inner})"
        return "!" + inner
    if isinstance(f, Exists):
        return f"E {' '.join(f.vars)}. {render_formula(f.body)}"
    if isinstance(f, (And, Or)):
        if not f.parts:
            raise ValueError("empty conjunction/disjunction has no surface syntax")
        if len(f.parts) == 1:
            # a one-element And/Or only arises programmatically; keep its shape
            raise ValueError("unary And/Or has no surface syntax")
        op = " & " if isinstance(f, And) else " | "
        return op.join(_operand(p, f) for p in f.parts)
    raise TypeError(f)


def _extends_right(f: Formula) -> bool:
    while isinstance(f, Not):
        f = f.body
    return isinstance(f, Exists)


def _operand(p: Formula, parent: Formula) -> str:
    s = render_formula(p)
    if isinstance(p, (Or, type(parent))) or _extends_right(p):
        return f"({s})"
    return s


def render_signature(sig: Signature) -> str:
    items = []
    if sig.unary:
        items.append("unary " + " ".join(sig.unary) + ";")
    for r, a in sig.relations:
        items.append(f"rel {r}/{a};")
    for p in sig.trans:
        kw = {EQUIV: "equiv", ORDER: "order"}.get(p.flag, "trans")
        items.append(f"{kw} {p.name};")
    return "sig { " + " ".join(items) + " }"


def render(f, sig: Signature | None = None) -> str:
    """Render a Formula or NormalFormFormula, optionally prefixed by its signature."""
    from .normal_form import NormalFormFormula

    if isinstance(f, NormalFormFormula):
        sig = sig or f.signature
        body = render_formula(f.to_formula())
    else:
        body = render_formula(f)
    return f"{render_signature(sig)}\n{body}\n" if sig is not None else body
