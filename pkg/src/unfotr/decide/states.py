"""Search states and the normalization of obligation sets."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ..declarations import Triple
from ..model.types import OneType
from ..syntax.normal_form import Lit


@dataclass(frozen=True)
class SearchState:
    """A node of the decision graph: 1-type, obligations (a φ-declaration lower bound), ranks."""

    one_type: OneType
    obligations: frozenset[Triple]
    ranks: tuple[int, ...] = ()

    def core(self) -> tuple[OneType, frozenset[Triple]]:
        return self.one_type, self.obligations

    def __str__(self) -> str:
        obs = " ".join(str(t) for t in sorted(self.obligations))
        return f"<{self.one_type.label()} | {obs} | {self.ranks}>"


@lru_cache(maxsize=200_000)
def normalize_triple(tr: Triple, t: int) -> Triple | None:
    """Close T transitively (indices in Q are the same element y); None if ψ is unsatisfiable."""
    Q = tr.Q

    def node(i):
        return 0 if i in Q else i

    by_sym: dict[str, set[tuple[int, int]]] = {}
    for s, i, j in tr.T:
        by_sym.setdefault(s, set()).add((node(i), node(j)))
    closed: dict[str, set[tuple[int, int]]] = {}
    for s, pairs in by_sym.items():
        rel = set(pairs)
        changed = True
        while changed:
            changed = False
            for a, b in list(rel):
                for c, d in list(rel):
                    if b == c and (a, d) not in rel:
                        rel.add((a, d))
                        changed = True
        closed[s] = rel
    # literals on merged elements
    lits: dict[tuple, bool] = {}
    for l in tr.R:
        key = (l.symbol, tuple(node(a) for a in l.args))
        if lits.get(key, l.positive) != l.positive:
            return None
        lits[key] = l.positive
    for (sym, args), pos in lits.items():
        if not pos and len(set(args)) == 1 and (args[0], args[0]) in closed.get(sym, ()):
            return None
    # expand closed pairs back to indices
    members = {0: sorted(Q)}
    for i in range(1, t + 1):
        if i not in Q:
            members[i] = [i]
    T = set()
    for s, rel in closed.items():
        for a, b in rel:
            for i in members.get(a, ()):
                for j in members.get(b, ()):
                    T.add((s, i, j))
    return Triple(tr.R, frozenset(T), Q)


def reduce_obligations(triples, t: int) -> frozenset[Triple]:
    return _reduce(frozenset(triples), t)


@lru_cache(maxsize=100_000)
def _reduce(triples: frozenset, t: int) -> frozenset[Triple]:
    """Normalize each triple, drop vacuous ones and keep only subsumption-minimal ones."""
    norm = set()
    for tr in triples:
        n = normalize_triple(tr, t)
        if n is not None:
            norm.add(n)
    by_q: dict[frozenset, list[Triple]] = {}
    for tr in norm:
        by_q.setdefault(tr.Q, []).append(tr)
    out = []
    for group in by_q.values():
        group.sort(key=lambda x: (len(x.R) + len(x.T), sorted(x.R), sorted(x.T)))
        kept: list[Triple] = []
        for tr in group:
            if not any(k.subsumes(tr) for k in kept):
                kept.append(tr)
        out.extend(kept)
    return frozenset(out)


def implied(decl, tr: Triple) -> bool:
    """Does a declaration already contain a promise at least as strong as tr?"""
    return tr in decl or any(d.subsumes(tr) for d in decl)


def unused_lit(symbol: str, args, positive=True) -> Lit:
    return Lit(symbol, tuple(args), positive)
