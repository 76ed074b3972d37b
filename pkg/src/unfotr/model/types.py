"""Atomic 1-types and 2-types."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..syntax.ast import Signature, inverse_name
from .structure import FiniteStructure


@dataclass(frozen=True, order=True)
class OneType:
    """The set of one-variable atoms true at an element; all others are false.

    Atom names follow Signature.one_var_atoms(): a unary symbol, or the name of
    a relation standing for its diagonal instance.
    """

    atoms: frozenset[str]

    def __contains__(self, atom: str) -> bool:
        return atom in self.atoms

    def has_loop(self, sym: str) -> bool:
        return sym.rstrip("~") in self.atoms

    def literals(self, sig: Signature) -> list[str]:
        out = []
        for a in sig.one_var_atoms():
            ar = sig.arity(a)
            s = a if ar == 1 else f"{a}({','.join(['x'] * ar)})"
            out.append(s if a in self.atoms else "!" + s)
        return out

    def label(self) -> str:
        return "{" + ",".join(sorted(self.atoms)) + "}"

    def __str__(self) -> str:
        return self.label()


@dataclass(frozen=True)
class TwoType:
    left: OneType
    right: OneType
    atoms: frozenset[tuple[str, tuple[int, ...]]]

    def __contains__(self, item) -> bool:
        return item in self.atoms

    def restrict_left(self) -> OneType:
        return self.left


def one_type(S: FiniteStructure, a: int) -> OneType:
    sig = S.signature
    atoms = set()
    for u in sig.unary:
        if S.holds(u, (a,)):
            atoms.add(u)
    for r, ar in sig.relations:
        if S.holds(r, (a,) * ar):
            atoms.add(r)
    for p in sig.trans:
        if S.holds(p.name, (a, a)):
            atoms.add(p.name)
    return OneType(frozenset(atoms))


def two_type(S: FiniteStructure, a: int, b: int) -> TwoType:
    if a == b:
        raise ValueError("2-types are defined for distinct elements")
    sig = S.signature
    atoms = set()
    rels = list(sig.relations) + [(s, 2) for s in sig.trans_symbols]
    for r, ar in rels:
        for pos in itertools.product((1, 2), repeat=ar):
            if 1 in pos and 2 in pos:
                args = tuple(a if p == 1 else b for p in pos)
                if S.holds(r, args):
                    atoms.add((r, pos))
    return TwoType(one_type(S, a), one_type(S, b), frozenset(atoms))


def atomic_type(S: FiniteStructure, elems):
    """1-type of a single element or 2-type of an ordered pair of distinct elements."""
    if isinstance(elems, int):
        return one_type(S, elems)
    elems = tuple(elems)
    if len(elems) == 1:
        return one_type(S, elems[0])
    if len(elems) == 2:
        return two_type(S, *elems)
    raise ValueError("atomic types are defined for one or two elements")


def class_of(S: FiniteStructure, a: int, E) -> frozenset[int]:
    """[a]_E: a together with all b such that T(a,b) for every T in E."""
    E = set(E)
    for name in E:
        if not S.signature.is_transitive(name):
            raise ValueError(f"{name} is not a transitive symbol")
        if inverse_name(name) not in E:
            raise ValueError(f"E is not closed under inverses: {name} without {inverse_name(name)}")
    if not E:
        return frozenset(S.domain)
    out = {a}
    for b in S.domain:
        if all(S.holds(T, (a, b)) for T in E):
            out.add(b)
    return frozenset(out)
