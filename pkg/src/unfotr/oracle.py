"""Brute-force bounded finite-model finder used as ground truth.

Two independent backends: a SAT grounding (python-sat) and a plain
enumeration over 1-type vectors and closed relations for tiny sizes.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from pysat.solvers import Solver

from .model.evaluate import check_normal_form
from .model.structure import FiniteStructure, check_constraints, transitive_close
from .model.types import one_type
from .report import Report
from .syntax.ast import And, Atom, Eq, Formula, Not, Signature
from .syntax.normal_form import NormalFormFormula


class OracleBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class FoundModel:
    structure: FiniteStructure
    size: int


@dataclass(frozen=True)
class NoModelUpTo:
    bound: int


OracleOutcome = FoundModel | NoModelUpTo


@dataclass
class OracleConfig:
    backend: str = "sat"
    time_budget: float = 60.0
    clause_budget: int = 5_000_000
    solver: str = "cadical153"


# ---------------------------------------------------------------- SAT backend


class _Grounding:
    def __init__(self, sig: Signature, n: int):
        self.sig, self.n = sig, n
        self.var: dict[tuple, int] = {}
        self.clauses: list[list[int]] = []
        self.top = 0

    def new(self) -> int:
        self.top += 1
        return self.top

    def atom(self, name: str, args: tuple[int, ...]) -> int:
        if self.sig.is_transitive(name):
            base, swap = self.sig.canonical(name)
            if swap:
                args = (args[1], args[0])
            name = base
        key = (name, args)
        v = self.var.get(key)
        if v is None:
            v = self.var[key] = self.new()
        return v

    def encode(self, f: Formula, asg: dict[str, int]):
        """Literal equivalent to f under asg, or a Python bool for constants."""
        if isinstance(f, Atom):
            return self.atom(f.symbol, tuple(asg[v] for v in f.args))
        if isinstance(f, Eq):
            return asg[f.left] == asg[f.right]
        if isinstance(f, Not):
            x = self.encode(f.body, asg)
            return (not x) if isinstance(x, bool) else -x
        is_and = isinstance(f, And)
        lits = []
        for p in f.parts:
            x = self.encode(p, asg)
            if isinstance(x, bool):
                if x != is_and:  # False in a conjunction / True in a disjunction
                    return x
                continue
            lits.append(x)
        if not lits:
            return is_and
        if len(lits) == 1:
            return lits[0]
        v = self.new()
        if is_and:
            for l in lits:
                self.clauses.append([-v, l])
            self.clauses.append([v] + [-l for l in lits])
        else:
            self.clauses.append([-v] + lits)
            for l in lits:
                self.clauses.append([v, -l])
        return v

    def require(self, x) -> bool:
        if isinstance(x, bool):
            if not x:
                self.clauses.append([])
            return x
        self.clauses.append([x])
        return True


def _sat_model(nf: NormalFormFormula, sig: Signature, n: int, cfg: OracleConfig, deadline: float, fixed=None):
    g = _Grounding(sig, n)
    dom = range(n)
    if fixed is not None:
        fs = fixed.signature
        for name, ar in [(u, 1) for u in fs.unary] + list(fs.relations) + [(p.name, 2) for p in fs.trans]:
            for args in itertools.product(dom, repeat=ar):
                v = g.atom(name, args)
                g.clauses.append([v] if fixed.holds(name, args) else [-v])
    for p in sig.trans:
        for i, j, k in itertools.product(dom, repeat=3):
            g.clauses.append([-g.atom(p.name, (i, j)), -g.atom(p.name, (j, k)), g.atom(p.name, (i, k))])
    for tup in itertools.product(dom, repeat=nf.t):
        x = g.encode(nf.phi0, dict(zip(nf.xs, tup)))
        if x is True:
            return None
        if x is not False:
            g.clauses.append([-x])
        if len(g.clauses) > cfg.clause_budget or time.monotonic() > deadline:
            raise OracleBudgetExceeded(f"grounding budget exceeded at n={n}")
    for c in nf.conjuncts:
        names = ("x",) + c.witnesses
        for a in dom:
            lits = []
            sat = False
            for ys in itertools.product(dom, repeat=c.p):
                x = g.encode(c.matrix, dict(zip(names, (a,) + ys)))
                if x is True:
                    sat = True
                    break
                if x is not False:
                    lits.append(x)
            if not sat:
                if not lits:
                    return None
                g.clauses.append(lits)
        if len(g.clauses) > cfg.clause_budget or time.monotonic() > deadline:
            raise OracleBudgetExceeded(f"grounding budget exceeded at n={n}")
    # make every symbol of the signature known to the solver so models are total
    for u in sig.unary:
        for a in dom:
            g.atom(u, (a,))
    if any(not c for c in g.clauses):
        return None
    with Solver(name=cfg.solver, bootstrap_with=g.clauses) as s:
        if not s.solve():
            return None
        model = set(l for l in s.get_model() if l > 0)
    interp: dict[str, set] = {}
    for (name, args), v in g.var.items():
        if v in model:
            interp.setdefault(name, set()).add(args)
    return transitive_close(FiniteStructure(sig, n, interp))


# ---------------------------------------------------------------- enumeration backend


def type_universe_atoms(sig: Signature):
    from .declarations import TypeUniverse

    return TypeUniverse(sig).types


def _enum_model(nf: NormalFormFormula, sig: Signature, n: int, cfg: OracleConfig, deadline: float):
    """Sorted 1-type vector first, then off-diagonal binary tuples in row-major order."""
    from .model.evaluate import WitnessChecker, phi0_violations

    types = type_universe_atoms(sig)
    wc = WitnessChecker(nf)
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    bin_syms = [r for r, a in sig.relations if a == 2] + [p.name for p in sig.trans]
    higher = [(r, a) for r, a in sig.relations if a > 2]
    if higher:
        raise OracleBudgetExceeded("enumeration backend handles arity <= 2 only")
    slots = [(s, pr) for pr in pairs for s in bin_syms]
    seen: set = set()
    for tv in itertools.combinations_with_replacement(range(len(types)), n):
        base: dict[str, set] = {}
        for a, ti in enumerate(tv):
            for atom in types[ti].atoms:
                ar = sig.arity(atom)
                base.setdefault(atom, set()).add((a,) * ar)
        S0 = FiniteStructure(sig, n, base)
        # φ0 only negates one-variable atoms, so a match here survives any extension
        if phi0_violations(S0, nf, limit=1):
            continue
        for bits in itertools.product((0, 1), repeat=len(slots)):
            if time.monotonic() > deadline:
                raise OracleBudgetExceeded("enumeration time budget exceeded")
            interp = {k: set(v) for k, v in base.items()}
            for (s, pr), b in zip(slots, bits):
                if b:
                    interp.setdefault(s, set()).add(pr)
            S = transitive_close(FiniteStructure(sig, n, interp))
            key = frozenset(S.interp.items())
            if key in seen:
                continue
            seen.add(key)
            if any(one_type(S, a) != types[tv[a]] for a in range(n)):
                continue
            if phi0_violations(S, nf, limit=1):
                continue
            if all(wc.witness(S, a, i) is not None for a in range(n) for i in range(nf.m)):
                return S
    return None


# ---------------------------------------------------------------- API


def brute_force_sat(nf: NormalFormFormula, sig: Signature | None = None, max_n: int = 4, cfg: OracleConfig | None = None):
    """Search domain sizes 1..max_n; the first model found is returned verified."""
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    cfg = cfg or OracleConfig()
    sig = nf.signature if sig is None else sig
    if set(nf.signature.unary) - set(sig.unary):
        sig = nf.signature
    deadline = time.monotonic() + cfg.time_budget
    find = _sat_model if cfg.backend == "sat" else _enum_model
    for n in range(1, max_n + 1):
        S = find(nf, sig, n, cfg, deadline)
        if S is not None:
            rep = check_normal_form(S, nf)
            rep.extend(check_constraints(S))
            if not rep.ok:
                raise AssertionError(f"oracle produced an invalid model: {rep}")
            return FoundModel(S, n)
    return NoModelUpTo(max_n)


def min_model_size(nf: NormalFormFormula, sig: Signature | None = None, max_n: int = 4, cfg=None) -> int | None:
    out = brute_force_sat(nf, sig, max_n, cfg)
    return out.size if isinstance(out, FoundModel) else None


@dataclass
class Agreement:
    agree: bool
    oracle: OracleOutcome
    decide_status: str
    notes: list[str] = field(default_factory=list)


def cross_check(nf: NormalFormFormula, sig: Signature | None, decide_result, max_n: int = 4, cfg=None) -> Agreement:
    """Flag UNSAT-vs-model contradictions and SAT answers whose certificate fails."""
    outcome = brute_force_sat(nf, sig, max_n, cfg)
    status = getattr(decide_result, "status", str(decide_result))
    notes: list[str] = []
    agree = True
    if status == "unsat" and isinstance(outcome, FoundModel):
        agree = False
        notes.append(f"decide says unsat but the oracle found a model of size {outcome.size}")
    if status == "sat":
        cert = getattr(decide_result, "certificate", None)
        if cert is not None:
            from .decide import verify_certificate

            rep = verify_certificate(cert, nf)
            if not rep.ok:
                agree = False
                notes.append("certificate fails verification: " + "; ".join(rep.issues[:3]))
        if isinstance(outcome, NoModelUpTo):
            notes.append(f"sat without a model of size <= {max_n} (not a contradiction)")
    return Agreement(agree, outcome, status, notes)


def expand_model(S: FiniteStructure, nf: NormalFormFormula, cfg: OracleConfig | None = None) -> FiniteStructure | None:
    """Interpret the symbols nf adds to S's signature so that nf holds, keeping S fixed; None if impossible."""
    cfg = cfg or OracleConfig()
    deadline = time.monotonic() + cfg.time_budget
    M = _sat_model(nf, nf.signature, S.n, cfg, deadline, fixed=S)
    if M is None or not check_normal_form(M, nf).ok:
        return None
    return M


def verify_model(S: FiniteStructure, nf: NormalFormFormula) -> Report:
    rep = check_normal_form(S, nf)
    rep.extend(check_constraints(S))
    return rep
