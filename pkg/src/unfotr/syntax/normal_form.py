"""Scott-style normal form  ∀x1..xt ¬φ0 ∧ ⋀_i ∀x ∃ȳ_i φ_i  and the DNF of φ0."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .ast import (
    FALSE,
    TRUE,
    And,
    Atom,
    Eq,
    Exists,
    Formula,
    Not,
    Or,
    Signature,
    conj,
    disj,
    free_vars,
    rename,
    size,
)
from .validate import apply_sugar, validate_unfo

DNF_CAP = 4096


class NormalFormError(ValueError):
    pass


class DNFBlowup(NormalFormError):
    pass


@dataclass(frozen=True)
class Conjunct:
    """∀x ∃ witnesses . matrix, with the universal variable named "x"."""

    witnesses: tuple[str, ...]
    matrix: Formula

    @property
    def p(self) -> int:
        return len(self.witnesses)


@dataclass(frozen=True)
class NormalFormFormula:
    signature: Signature
    t: int
    phi0: Formula
    conjuncts: tuple[Conjunct, ...]
    introduced: tuple[str, ...] = ()
    source_size: int = field(default=0, compare=False)

    @property
    def m(self) -> int:
        return len(self.conjuncts)

    @property
    def xs(self) -> tuple[str, ...]:
        return tuple(f"x{i}" for i in range(1, self.t + 1))

    def to_formula(self) -> Formula:
        parts: list[Formula] = []
        if self.phi0 != FALSE:
            parts.append(Not(Exists(self.xs, self.phi0)))
        for c in self.conjuncts:
            inner = Exists(c.witnesses, c.matrix) if c.witnesses else c.matrix
            parts.append(Not(Exists(("x",), _negate(inner))))
        if not parts:
            return Not(Exists(("x",), Not(Eq("x", "x"))))
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    @property
    def size(self) -> int:
        """Formula length used by the size estimates (at least the source length)."""
        return max(self.source_size, size(self.to_formula()))


def _negate(f: Formula) -> Formula:
    return f.body if isinstance(f, Not) else Not(f)


# ---------------------------------------------------------------- helpers


def simplify(f: Formula) -> Formula:
    """Fold x=x and constant subformulas; flatten nested And/Or."""
    if isinstance(f, Eq):
        return TRUE if f.left == f.right else f
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        b = simplify(f.body)
        if b == TRUE:
            return FALSE
        if b == FALSE:
            return TRUE
        return Not(b)
    if isinstance(f, Exists):
        b = simplify(f.body)
        if b in (TRUE, FALSE):
            return b
        return Exists(f.vars, b)
    parts = [simplify(p) for p in f.parts]
    if isinstance(f, And):
        if FALSE in parts:
            return FALSE
        parts = [p for p in parts if p != TRUE]
        return conj(parts) if parts else TRUE
    if TRUE in parts:
        return TRUE
    parts = [p for p in parts if p != FALSE]
    return disj(parts) if parts else FALSE


def nnf(f: Formula, neg: bool = False) -> Formula:
    """Negation normal form of a quantifier-free formula."""
    if isinstance(f, (Atom, Eq)):
        return Not(f) if neg else f
    if isinstance(f, Not):
        return nnf(f.body, not neg)
    if isinstance(f, And):
        parts = tuple(nnf(p, neg) for p in f.parts)
        return Or(parts) if neg else And(parts)
    if isinstance(f, Or):
        parts = tuple(nnf(p, neg) for p in f.parts)
        return And(parts) if neg else Or(parts)
    raise NormalFormError("nnf of a quantified formula")


def _quantifier_free(f: Formula) -> bool:
    if isinstance(f, Exists):
        return False
    if isinstance(f, (And, Or)):
        return all(_quantifier_free(p) for p in f.parts)
    if isinstance(f, Not):
        return _quantifier_free(f.body)
    return True


class _Fresh:
    def __init__(self):
        self.n = 0

    def __call__(self) -> str:
        self.n += 1
        return f"_v{self.n}"


def standardize_apart(f: Formula, fresh: _Fresh, m: dict[str, str] | None = None) -> Formula:
    m = m or {}
    if isinstance(f, Atom):
        return Atom(f.symbol, tuple(m.get(v, v) for v in f.args))
    if isinstance(f, Eq):
        return Eq(m.get(f.left, f.left), m.get(f.right, f.right))
    if isinstance(f, And):
        return And(tuple(standardize_apart(p, fresh, m) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(standardize_apart(p, fresh, m) for p in f.parts))
    if isinstance(f, Not):
        return Not(standardize_apart(f.body, fresh, m))
    new = {v: fresh() for v in f.vars}
    return Exists(tuple(new[v] for v in f.vars), standardize_apart(f.body, fresh, {**m, **new}))


# ---------------------------------------------------------------- translation


class _Normalizer:
    def __init__(self, sig: Signature):
        self.sig = sig
        self.fresh = _Fresh()
        self.universal: list[tuple[tuple[str, ...], Formula]] = []
        self.exist: list[tuple[str, tuple[str, ...], Formula]] = []
        self.introduced: list[str] = []
        self.defs: dict[tuple[Formula, str | None], str] = {}

    def new_unary(self) -> str:
        i = len(self.introduced)
        name = f"@nf{i}"
        while name in self.sig.unary:
            i += 1
            name = f"@nf{i}"
        self.introduced.append(name)
        return name

    def positive(self, f: Formula, anchor: str) -> tuple[tuple[str, ...], Formula]:
        """Prenex the positive part of f: returns (zs, μ) with f ≡ ∃zs μ and μ quantifier-free NNF."""
        if isinstance(f, (Atom, Eq)):
            return (), f
        if isinstance(f, (And, Or)):
            zs: tuple[str, ...] = ()
            ms = []
            for p in f.parts:
                z, mu = self.positive(p, anchor)
                zs += z
                ms.append(mu)
            return zs, (And if isinstance(f, And) else Or)(tuple(ms))
        if isinstance(f, Exists):
            z, mu = self.positive(f.body, anchor)
            return tuple(f.vars) + z, mu
        body = f.body
        if _quantifier_free(body):
            return (), nnf(body, True)
        fv = sorted(free_vars(body))
        w = fv[0] if fv else anchor
        p = self.define(body, fv[0] if fv else None)
        return (), Not(Atom(p, (w,)))

    def define(self, body: Formula, w: str | None) -> str:
        key = (body, w)
        if key in self.defs:
            return self.defs[key]
        x = w if w is not None else self.fresh()
        zs, mu = self.positive(body, x)
        p = self.new_unary()
        self.defs[key] = p
        px = Atom(p, (x,))
        # P(x) -> ∃zs μ(x, zs)
        self.exist.append((x, zs, Or((Not(px), mu))))
        # ∃zs μ(x, zs) -> P(x)
        self.universal.append(((x,) + zs, And((mu, Not(px)))))
        return p

    def top(self, c: Formula) -> None:
        if isinstance(c, And):
            for p in c.parts:
                self.top(p)
            return
        if isinstance(c, Not):
            b = c.body
            if isinstance(b, Not):
                return self.top(b.body)
            if isinstance(b, Or):
                return self.top(And(tuple(Not(p) for p in b.parts)))
            if isinstance(b, Exists):
                inner = b.body
                if len(b.vars) == 1 and isinstance(inner, Not) and isinstance(inner.body, Exists):
                    x = b.vars[0]
                    zs, mu = self.positive(inner.body, x)
                    self.exist.append((x, zs, mu))
                    return
                if len(b.vars) == 1 and isinstance(inner, Not) and _quantifier_free(inner.body):
                    self.exist.append((b.vars[0], (), nnf(inner.body)))
                    return
                zs, mu = self.positive(inner, b.vars[0])
                self.universal.append((tuple(b.vars) + zs, mu))
                return
        d = self.fresh()
        zs, mu = self.positive(c, d)
        self.exist.append((d, zs, mu))


def to_normal_form(f: Formula, sig: Signature) -> NormalFormFormula:
    """Equisatisfiable normal form; fresh unaries are named @nf0, @nf1, ..."""
    sig, f = apply_sugar(sig, f)
    rep = validate_unfo(f, sig)
    if not rep.ok:
        raise NormalFormError("; ".join(rep.issues))
    if free_vars(f):
        raise NormalFormError(f"formula has free variables {sorted(free_vars(f))}")
    norm = _Normalizer(sig)
    norm.top(standardize_apart(f, norm.fresh))

    t = max([len(vs) for vs, _ in norm.universal] + [1])
    bodies = []
    for vs, body in norm.universal:
        m = {v: f"x{i + 1}" for i, v in enumerate(vs)}
        bodies.append(simplify(rename(body, m)))
    phi0 = simplify(Or(tuple(bodies)))
    if phi0 == TRUE:
        phi0 = Eq("x1", "x1")

    conjuncts = []
    for x, zs, mu in norm.exist:
        m = {x: "x"} | {z: f"y{i + 1}" for i, z in enumerate(zs)}
        mat = simplify(rename(mu, m))
        if mat == TRUE:
            continue
        if mat == FALSE:
            mat = Not(Eq("x", "x"))
        conjuncts.append(Conjunct(tuple(f"y{i + 1}" for i in range(len(zs))), mat))
    out_sig = sig.extend_unary(norm.introduced)
    return NormalFormFormula(out_sig, t, phi0, tuple(conjuncts), tuple(norm.introduced), source_size=size(f))


# ---------------------------------------------------------------- DNF of φ0


@dataclass(frozen=True, order=True)
class Lit:
    """A literal of φ0 over variable indices 1..t (non-transitive, or a negated diagonal)."""

    symbol: str
    args: tuple[int, ...]
    positive: bool = True

    def negated(self) -> "Lit":
        return Lit(self.symbol, self.args, not self.positive)

    def __str__(self) -> str:
        s = f"{self.symbol}({','.join('x%d' % a for a in self.args)})"
        return s if self.positive else "!" + s


@dataclass(frozen=True)
class Disjunct:
    """A conjunction of literals: non-transitive literals R and positive transitive atoms T.

    Transitive atoms are (declared symbol, i, j) meaning T(x_i, x_j); inverse
    symbols are folded into their declared partner.
    """

    R: frozenset[Lit]
    T: frozenset[tuple[str, int, int]]

    def __str__(self) -> str:
        items = [str(l) for l in sorted(self.R)] + [f"{s}(x{i},x{j})" for s, i, j in sorted(self.T)]
        return " & ".join(items) or "true"


def _var_index(v: str) -> int:
    if not v.startswith("x"):
        raise NormalFormError(f"unexpected variable {v} in phi0")
    return int(v[1:])


def _lit_of(a: Atom | Eq, positive: bool, sig: Signature):
    if isinstance(a, Eq):
        return ("eq", _var_index(a.left), _var_index(a.right), positive)
    args = tuple(_var_index(v) for v in a.args)
    if sig.is_transitive(a.symbol):
        base, swap = sig.canonical(a.symbol)
        i, j = (args[1], args[0]) if swap else args
        if positive:
            return ("T", (base, i, j))
        if i != j:
            raise NormalFormError(f"negated binary transitive atom in phi0: {a}")
        return ("R", Lit(base, (i, i), False))
    if not positive and len(set(args)) > 1:
        raise NormalFormError(f"negated atom over several variables in phi0: {a}")
    return ("R", Lit(a.symbol, args, positive))


def dnf_matrix(nf: NormalFormFormula, cap: int = DNF_CAP) -> tuple[Disjunct, ...]:
    """Disjuncts of φ0 after equality elimination; contradictory disjuncts are dropped."""
    sig = nf.signature

    def go(f: Formula) -> list[list]:
        if isinstance(f, (Atom, Eq)):
            return [[_lit_of(f, True, sig)]]
        if isinstance(f, Not):
            if not isinstance(f.body, (Atom, Eq)):
                raise NormalFormError("phi0 is not in NNF")
            return [[_lit_of(f.body, False, sig)]]
        if isinstance(f, Or):
            out = []
            for p in f.parts:
                out.extend(go(p))
                if len(out) > cap:
                    raise DNFBlowup(f"DNF of phi0 exceeds {cap} disjuncts")
            return out
        if isinstance(f, And):
            out = [[]]
            for p in f.parts:
                sub = go(p)
                out = [a + b for a in out for b in sub]
                if len(out) > cap:
                    raise DNFBlowup(f"DNF of phi0 exceeds {cap} disjuncts")
            return out
        raise NormalFormError(f"quantifier in phi0: {f}")

    result: list[Disjunct] = []
    seen = set()
    for raw in go(nf.phi0):
        d = _close_disjunct(raw)
        if d is not None and d not in seen:
            seen.add(d)
            result.append(d)
    return tuple(result)


def _close_disjunct(raw: list) -> Disjunct | None:
    parent: dict[int, int] = {}

    def find(i: int) -> int:
        while parent.get(i, i) != i:
            i = parent[i]
        return i

    for item in raw:
        if item[0] == "eq":
            _, i, j, pos = item
            if pos:
                a, b = sorted((find(i), find(j)))
                if a != b:
                    parent[b] = a
    neq = []
    R, T = set(), set()
    for item in raw:
        if item[0] == "eq":
            if not item[3]:
                neq.append((item[1], item[2]))
        elif item[0] == "T":
            s, i, j = item[1]
            T.add((s, find(i), find(j)))
        else:
            l = item[1]
            R.add(Lit(l.symbol, tuple(find(a) for a in l.args), l.positive))
    if any(find(i) == find(j) for i, j in neq):
        return None
    if neq:
        raise NormalFormError("inequality between distinct variables in phi0")
    for l in R:
        if l.positive and l.negated() in R:
            return None
        if not l.positive and (l.symbol, l.args[0], l.args[0]) in T:
            return None
    return Disjunct(frozenset(R), frozenset(T))


def disjunct_formula(d: Disjunct) -> Formula:
    parts: list[Formula] = []
    for l in sorted(d.R):
        a = Atom(l.symbol, tuple(f"x{i}" for i in l.args))
        parts.append(a if l.positive else Not(a))
    for s, i, j in sorted(d.T):
        parts.append(Atom(s, (f"x{i}", f"x{j}")))
    return conj(parts) if parts else TRUE


def dnf_formula(ds) -> Formula:
    return disj([disjunct_formula(d) for d in ds]) if ds else FALSE


def all_subsets(xs):
    xs = list(xs)
    return [frozenset(c) for r in range(len(xs) + 1) for c in itertools.combinations(xs, r)]
