"""Finite relational structures over a signature with inverse-paired transitive symbols."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from ..report import Report
from ..syntax.ast import Signature


@dataclass(frozen=True, eq=False)
class FiniteStructure:
    """Domain {0..n-1}; every symbol is interpreted as a set of tuples (unary: 1-tuples)."""

    signature: Signature
    n: int
    interp: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for name, tuples in self.interp.items():
            a = self.signature.arity(name)
            if a is None:
                raise ValueError(f"unknown symbol {name}")
            ts = frozenset(tuple(t) for t in tuples)
            for t in ts:
                if len(t) != a or any(not 0 <= x < self.n for x in t):
                    raise ValueError(f"bad tuple {t} for {name} on domain of size {self.n}")
            if ts:
                clean[name] = ts
        object.__setattr__(self, "interp", clean)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FiniteStructure)
            and self.n == other.n
            and self.interp == other.interp
            and self.signature == other.signature
        )

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self.interp.items())))

    def __repr__(self) -> str:
        return f"FiniteStructure(n={self.n}, {dict(sorted((k, sorted(v)) for k, v in self.interp.items()))})"

    @property
    def domain(self) -> range:
        return range(self.n)

    def tuples(self, name: str) -> frozenset:
        return self.interp.get(name, frozenset())

    def unary(self, name: str) -> frozenset[int]:
        return frozenset(t[0] for t in self.tuples(name))

    def holds(self, name: str, args: tuple[int, ...]) -> bool:
        return tuple(args) in self.interp.get(name, ())

    @cached_property
    def succ(self) -> dict[str, list[int]]:
        """Dense fast path: per binary symbol a bitmask row of successors."""
        out = {}
        for name in self.signature.binary_symbols():
            rows = [0] * self.n
            for i, j in self.tuples(name):
                rows[i] |= 1 << j
            out[name] = rows
        return out

    def with_tuples(self, extra: Mapping[str, Iterable]) -> "FiniteStructure":
        new = {k: set(v) for k, v in self.interp.items()}
        for k, v in extra.items():
            new.setdefault(k, set()).update(tuple(t) for t in v)
        return FiniteStructure(self.signature, self.n, new)

    def restrict(self, elems) -> tuple["FiniteStructure", list[int]]:
        """Induced substructure; returns it with the list old index of each new element."""
        old = sorted(set(elems))
        idx = {a: i for i, a in enumerate(old)}
        new = {}
        for k, ts in self.interp.items():
            new[k] = {tuple(idx[x] for x in t) for t in ts if all(x in idx for x in t)}
        return FiniteStructure(self.signature, len(old), new), old

    def reduct(self, sig: Signature) -> "FiniteStructure":
        keep = {k: v for k, v in self.interp.items() if sig.arity(k) is not None}
        return FiniteStructure(sig, self.n, keep)

    def expand_signature(self, sig: Signature) -> "FiniteStructure":
        return FiniteStructure(sig, self.n, self.interp)


def disjoint_union(parts: list[FiniteStructure]) -> tuple[FiniteStructure, list[int]]:
    """Disjoint union; also returns the offset of each part."""
    sig = parts[0].signature
    offsets, off = [], 0
    new: dict[str, set] = {}
    for p in parts:
        offsets.append(off)
        for k, ts in p.interp.items():
            new.setdefault(k, set()).update(tuple(x + off for x in t) for t in ts)
        off += p.n
    return FiniteStructure(sig, off, new), offsets


def close_rows(rows: list[int]) -> list[int]:
    """Transitive closure of a bitset adjacency matrix.

    Warshall for small inputs; otherwise successor sets are accumulated over
    the strongly connected components in reverse topological order.
    """
    n = len(rows)
    if n <= 64:
        rows = list(rows)
        for k in range(n):
            bit = 1 << k
            rk = rows[k]
            if not rk:
                continue
            for i in range(n):
                if rows[i] & bit:
                    rows[i] |= rk
        return rows
    comp, comps = _scc(rows)
    reach = [0] * len(comps)  # components come out in reverse topological order
    out = [0] * n
    for ci, members in enumerate(comps):
        r = 0
        inner = 0
        for v in members:
            inner |= 1 << v
        for v in members:
            for w in _bits(rows[v]):
                cw = comp[w]
                if cw != ci:
                    r |= (1 << w) | reach[cw]
        cyclic = len(members) > 1 or (rows[members[0]] >> members[0]) & 1
        if cyclic:
            r |= inner
        reach[ci] = r
        for v in members:
            out[v] = r
    return out


def _scc(rows: list[int]):
    """Iterative Tarjan; components are listed in reverse topological order."""
    n = len(rows)
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    stack: list[int] = []
    comp = [-1] * n
    comps: list[list[int]] = []
    counter = 0
    for s in range(n):
        if index[s] != -1:
            continue
        work = [(s, iter(list(_bits(rows[s]))))]
        index[s] = low[s] = counter
        counter += 1
        stack.append(s)
        on[s] = True
        while work:
            v, it = work[-1]
            pushed = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on[w] = True
                    work.append((w, iter(list(_bits(rows[w])))))
                    pushed = True
                    break
                if on[w]:
                    low[v] = min(low[v], index[w])
            if pushed:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                members = []
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp[w] = len(comps)
                    members.append(w)
                    if w == v:
                        break
                comps.append(members)
    return comp, comps


def rows_to_pairs(rows: list[int]) -> set[tuple[int, int]]:
    out = set()
    for i, r in enumerate(rows):
        for j in _bits(r):
            out.add((i, j))
    return out


def transitive_close(S: FiniteStructure, sig: Signature | None = None) -> FiniteStructure:
    """Minimal transitive superset per transitive pair with T~ the inverse of T."""
    sig = sig or S.signature
    new = {k: set(v) for k, v in S.interp.items()}
    for p in sig.trans:
        rows = [0] * S.n
        for i, j in S.tuples(p.name):
            rows[i] |= 1 << j
        for i, j in S.tuples(p.inverse):
            rows[j] |= 1 << i
        pairs = rows_to_pairs(close_rows(rows))
        new[p.name] = pairs
        new[p.inverse] = {(j, i) for i, j in pairs}
    return FiniteStructure(S.signature, S.n, new)


def closure_reference(pairs: set[tuple[int, int]], n: int) -> set[tuple[int, int]]:
    """Naive cubic-time closure, used as an independent reference in tests."""
    rel = set(pairs)
    changed = True
    while changed:
        changed = False
        for i, j, k in itertools.product(range(n), repeat=3):
            if (i, j) in rel and (j, k) in rel and (i, k) not in rel:
                rel.add((i, k))
                changed = True
    return rel


def check_constraints(S: FiniteStructure, sig: Signature | None = None) -> Report:
    """Non-transitive triples and inverse-pair mismatches."""
    sig = sig or S.signature
    rep = Report("constraints")
    for p in sig.trans:
        T, Ti = S.tuples(p.name), S.tuples(p.inverse)
        for i, j in sorted(T):
            if (j, i) not in Ti:
                rep.fail(f"{p.inverse} misses inverse pair ({j},{i}) of {p.name}({i},{j})")
        for i, j in sorted(Ti):
            if (j, i) not in T:
                rep.fail(f"{p.name} misses inverse pair ({j},{i}) of {p.inverse}({i},{j})")
        for name in (p.name, p.inverse):
            rows = S.succ[name]
            for i in range(S.n):
                for j in _bits(rows[i]):
                    missing = rows[j] & ~rows[i]
                    for k in _bits(missing):
                        rep.fail(f"{name} not transitive: ({i},{j},{k})")
    return rep


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low
