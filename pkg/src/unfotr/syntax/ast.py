"""Signatures and formula syntax trees."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

PLAIN, EQUIV, ORDER = "plain", "equiv", "order"


def inverse_name(name: str) -> str:
    return name[:-1] if name.endswith("~") else name + "~"


@dataclass(frozen=True)
class TransPair:
    name: str
    flag: str = PLAIN

    @property
    def inverse(self) -> str:
        return self.name + "~"


@dataclass(frozen=True)
class Signature:
    """Unary symbols, base relations with arities and inverse-paired transitive symbols."""

    unary: tuple[str, ...] = ()
    relations: tuple[tuple[str, int], ...] = ()
    trans: tuple[TransPair, ...] = ()

    def __post_init__(self):
        names = list(self.unary) + [r for r, _ in self.relations]
        for p in self.trans:
            names += [p.name, p.inverse]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise ValueError(f"duplicate symbol names: {sorted(dup)}")
        for r, a in self.relations:
            if a < 1:
                raise ValueError(f"relation {r} has arity {a}")

    @property
    def k(self) -> int:
        return len(self.trans)

    @property
    def trans_symbols(self) -> tuple[str, ...]:
        """T_1, T_2=T_1~, T_3, T_4=T_3~, ... in declaration order."""
        out: list[str] = []
        for p in self.trans:
            out += [p.name, p.inverse]
        return tuple(out)

    @property
    def base_symbols(self) -> tuple[str, ...]:
        return tuple(r for r, _ in self.relations)

    def arity(self, name: str) -> int | None:
        if name in self.unary:
            return 1
        for r, a in self.relations:
            if r == name:
                return a
        if name in self.trans_symbols:
            return 2
        return None

    def is_transitive(self, name: str) -> bool:
        return name in self.trans_symbols

    def canonical(self, name: str) -> tuple[str, bool]:
        """Declared symbol of a transitive name and whether arguments are swapped."""
        if name.endswith("~"):
            return name[:-1], True
        return name, False

    def pair_index(self, name: str) -> int:
        base = self.canonical(name)[0]
        for i, p in enumerate(self.trans):
            if p.name == base:
                return i
        raise KeyError(name)

    def binary_symbols(self) -> tuple[str, ...]:
        return tuple(r for r, a in self.relations if a == 2) + self.trans_symbols

    def one_var_atoms(self) -> tuple[str, ...]:
        """Names of the atoms over a single variable that make up a 1-type.

        Unary symbols are listed by name, diagonals of base relations and of
        declared transitive symbols by relation name. T~(x,x) coincides with
        T(x,x) and is not listed separately.
        """
        return tuple(self.unary) + tuple(r for r, _ in self.relations) + tuple(p.name for p in self.trans)

    def extend_unary(self, names) -> "Signature":
        return Signature(self.unary + tuple(n for n in names if n not in self.unary), self.relations, self.trans)

    def without_flags(self) -> "Signature":
        return Signature(self.unary, self.relations, tuple(TransPair(p.name) for p in self.trans))

    def restrict(self, unary=None) -> "Signature":
        keep = self.unary if unary is None else tuple(u for u in self.unary if u in unary)
        return Signature(keep, self.relations, self.trans)


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Atom:
    symbol: str
    args: tuple[str, ...]
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Eq:
    left: str
    right: str
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    body: "Formula"
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Exists:
    vars: tuple[str, ...]
    body: "Formula"
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


Formula = Union[Atom, Eq, And, Or, Not, Exists]

TRUE = And(())
FALSE = Or(())


def conj(parts) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(parts) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.parts)
        else:
            flat.append(p)
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def forall_not(vars, body: Formula) -> Formula:
    """The formula ∀vars ¬body, i.e. ¬∃vars body."""
    return Not(Exists(tuple(vars), body)) if vars else Not(body)


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    if isinstance(f, (And, Or)):
        out: frozenset[str] = frozenset()
        for p in f.parts:
            out |= free_vars(p)
        return out
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, Exists):
        return free_vars(f.body) - set(f.vars)
    raise TypeError(f)


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (And, Or)):
        for p in f.parts:
            yield from subformulas(p)
    elif isinstance(f, (Not, Exists)):
        yield from subformulas(f.body)


def size(f: Formula) -> int:
    return sum(1 for _ in subformulas(f))


def symbols(f: Formula) -> set[str]:
    return {g.symbol for g in subformulas(f) if isinstance(g, Atom)}


def rename(f: Formula, m: dict[str, str]) -> Formula:
    """Substitute free variables according to m (capture is the caller's concern)."""
    if isinstance(f, Atom):
        return Atom(f.symbol, tuple(m.get(v, v) for v in f.args))
    if isinstance(f, Eq):
        return Eq(m.get(f.left, f.left), m.get(f.right, f.right))
    if isinstance(f, And):
        return And(tuple(rename(p, m) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(rename(p, m) for p in f.parts))
    if isinstance(f, Not):
        return Not(rename(f.body, m))
    if isinstance(f, Exists):
        inner = {k: v for k, v in m.items() if k not in f.vars}
        return Exists(f.vars, rename(f.body, inner))
    raise TypeError(f)


def strip_pos(f: Formula) -> Formula:
    return rename(f, {})
