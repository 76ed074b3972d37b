"""Frontier-one TGDs with conjunctive queries: parsing, translation and finite entailment.

KB file format (same lexical rules as formula files)::

    sig   { unary P; trans T; }
    facts { P(a); T(a, b); }
    tgd   { P(x) -> E y. T(x,y) & P(y); }
    query { E x. T(x,x); }

Facts are ground atoms over individual names (identifiers or integers). A tgd
body is a conjunction of atoms; its head is a conjunction of atoms, optionally
under one existential block. Each query entry is a positive existential
sentence; several entries form a union.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .construct import BuildError, build_finite_model
from .decide import DecideConfig, decide_fin_sat
from .model.evaluate import eval_formula
from .model.structure import FiniteStructure
from .oracle import FoundModel, brute_force_sat
from .report import Report
from .syntax.ast import TRUE, And, Atom, Exists, Formula, Not, Or, Signature, conj, disj, free_vars, subformulas
from .syntax.normal_form import to_normal_form
from .syntax.parser import ParseError, Parser
from .syntax.validate import validate_unfo


@dataclass(frozen=True)
class TGD:
    body: tuple[Atom, ...]
    exists: tuple[str, ...]
    head: tuple[Atom, ...]

    @property
    def frontier(self) -> frozenset[str]:
        bv = {v for a in self.body for v in a.args}
        hv = {v for a in self.head for v in a.args} - set(self.exists)
        return frozenset(bv & hv)

    def __str__(self) -> str:
        body = " & ".join(_atom_str(a) for a in self.body)
        head = " & ".join(_atom_str(a) for a in self.head)
        if self.exists:
            head = f"E {' '.join(self.exists)}. {head}"
        return f"{body} -> {head}"


def _atom_str(a: Atom) -> str:
    return f"{a.symbol}({','.join(a.args)})"


@dataclass
class KnowledgeBase:
    signature: Signature
    facts: tuple[tuple[str, tuple[str, ...]], ...]
    tgds: tuple[TGD, ...]
    queries: tuple[Formula, ...] = ()

    @property
    def individuals(self) -> list[str]:
        out: list[str] = []
        for _, args in self.facts:
            for a in args:
                if a not in out:
                    out.append(a)
        return out

    @property
    def query(self) -> Formula:
        return disj(self.queries) if self.queries else Or(())


# ---------------------------------------------------------------- parsing


def _atoms_of(f: Formula, what: str) -> tuple[Atom, ...]:
    parts = f.parts if isinstance(f, And) else (f,)
    for p in parts:
        if not isinstance(p, Atom):
            raise ParseError(f"{what} must be a conjunction of atoms")
    return tuple(Atom(p.symbol, p.args) for p in parts)


def _tgd(p: Parser) -> TGD:
    body = _atoms_of(p.conjunction(), "tgd body")
    if p.tok.kind != "arrow":
        p.error("expected '->'")
    p.i += 1
    head = p.formula()
    exists: tuple[str, ...] = ()
    if isinstance(head, Exists):
        exists, head = head.vars, head.body
    return TGD(body, exists, _atoms_of(head, "tgd head"))


def _fact(p: Parser):
    name = p.name("predicate").text
    p.expect("(")
    args = []
    while True:
        tok = p.tok
        if tok.kind not in ("name", "int"):
            p.error("expected an individual name")
        args.append(tok.text)
        p.i += 1
        if not p.accept(","):
            break
    p.expect(")")
    p.check_atom(name, len(args), p.toks[p.i - 1])
    return name, tuple(args)


def parse_kb(text: str) -> KnowledgeBase:
    p = Parser(text)
    if not (p.tok.text == "sig" and p.peek().text == "{"):
        p.error("a KB file starts with a signature block")
    p.sig = p.signature()
    facts, tgds, queries = [], [], []
    while p.tok.kind != "eof":
        kw = p.name("block keyword")
        p.expect("{")
        while not p.accept("}"):
            if kw.text == "facts":
                facts.append(_fact(p))
            elif kw.text == "tgd":
                tgds.append(_tgd(p))
            elif kw.text == "query":
                q = p.formula()
                for g in subformulas(q):
                    if isinstance(g, Not):
                        p.error("queries must be positive existential")
                if free_vars(q):
                    p.error(f"query has free variables {sorted(free_vars(q))}")
                queries.append(q)
            else:
                p.error(f"unknown block {kw.text!r}", kw)
            p.expect(";")
    return KnowledgeBase(p.sig, tuple(facts), tuple(tgds), tuple(queries))


# ---------------------------------------------------------------- translation


def validate_frontier_one(tgd: TGD) -> Report:
    rep = Report("frontier-one")
    fr = tgd.frontier
    if len(fr) != 1:
        rep.fail(f"{tgd}: frontier {sorted(fr)} must be a single variable")
    bv = {v for a in tgd.body for v in a.args}
    loose = {v for a in tgd.head for v in a.args} - bv - set(tgd.exists)
    if loose:
        rep.fail(f"{tgd}: head variables {sorted(loose)} are neither in the body nor quantified")
    return rep


def tgd_formula(tgd: TGD) -> Formula:
    """¬∃x̄y(ψ ∧ ¬∃z̄ ψ′(y, z̄)), the UNFO form of a frontier-one TGD."""
    head = conj(list(tgd.head))
    if tgd.exists:
        head = Exists(tgd.exists, head)
    bv = []
    for a in tgd.body:
        for v in a.args:
            if v not in bv:
                bv.append(v)
    return Not(Exists(tuple(bv), conj(list(tgd.body) + [Not(head)])))


def _var(ind: str) -> str:
    return "v_" + ind


def diagram(kb: KnowledgeBase, markers: dict[str, str] | None = None) -> Formula:
    """Existential closure of the facts, each individual optionally tagged by its marker."""
    inds = kb.individuals
    if not inds:
        return TRUE
    parts: list[Formula] = [Atom(s, tuple(_var(a) for a in args)) for s, args in kb.facts]
    for a in inds if markers else ():
        parts.append(Atom(markers[a], (_var(a),)))
    return Exists(tuple(_var(a) for a in inds), conj(parts))


def marker_names(kb: KnowledgeBase) -> dict[str, str]:
    taken = set(kb.signature.unary) | {n for n, _ in kb.signature.relations} | set(kb.signature.trans_symbols)
    out = {}
    for a in kb.individuals:
        name = f"ind_{a}"
        while name in taken:
            name += "_"
        taken.add(name)
        out[a] = name
    return out


def translate(kb: KnowledgeBase) -> tuple[Signature, Formula]:
    """Signature with individual markers and the sentence facts ∧ dependencies ∧ ¬query."""
    for t in kb.tgds:
        rep = validate_frontier_one(t)
        if not rep.ok:
            raise ValueError("; ".join(rep.issues))
    markers = marker_names(kb)
    sig = kb.signature.extend_unary(tuple(markers.values()))
    parts = [diagram(kb, markers)] + [tgd_formula(t) for t in kb.tgds] + [Not(kb.query)]
    f = conj([p for p in parts if p != TRUE])
    rep = validate_unfo(f, sig)
    if not rep.ok:
        raise ValueError("translation is not UNFO: " + "; ".join(rep.issues))
    return sig, f


# ---------------------------------------------------------------- entailment


@dataclass
class EntailConfig:
    decide: DecideConfig = field(default_factory=DecideConfig)
    oracle_max_n: int = 4
    build_max_elements: int = 20_000


@dataclass
class EntailmentResult:
    status: str  # entailed | not-entailed | unknown
    counter_model: FiniteStructure | None = None
    reason: str = ""
    decide_status: str = ""

    def __str__(self) -> str:
        if self.status == "not-entailed" and self.counter_model is not None:
            return f"NOT ENTAILED (counter-model of size {self.counter_model.n})"
        return self.status.upper() + (f" ({self.reason})" if self.reason else "")


def check_counter_model(kb: KnowledgeBase, S: FiniteStructure) -> Report:
    """Facts embed, every dependency holds, the query fails."""
    rep = Report("counter-model")
    if not eval_formula(S, diagram(kb)):
        rep.fail("the facts do not map into the structure")
    for t in kb.tgds:
        if not eval_formula(S, tgd_formula(t)):
            rep.fail(f"dependency violated: {t}")
    if eval_formula(S, kb.query):
        rep.fail("the query holds")
    return rep


def finite_entails(kb: KnowledgeBase, cfg: EntailConfig | None = None) -> EntailmentResult:
    cfg = cfg or EntailConfig()
    sig, f = translate(kb)
    nf = to_normal_form(f, sig)
    res = decide_fin_sat(nf, cfg=cfg.decide)
    if res.status == "unsat":
        return EntailmentResult("entailed", decide_status=res.status)
    candidates = []
    out = brute_force_sat(nf, max_n=cfg.oracle_max_n)
    if isinstance(out, FoundModel):
        candidates.append(out.structure)
    elif res.status == "sat":
        try:
            S, _ = build_finite_model(res.certificate.tree, nf, max_elements=cfg.build_max_elements)
            candidates.append(S)
        except BuildError as e:
            return EntailmentResult("unknown", reason=f"satisfiable but no counter-model built: {e}", decide_status=res.status)
    for S in candidates:
        M = S.reduct(kb.signature)
        if check_counter_model(kb, M).ok:
            return EntailmentResult("not-entailed", M, decide_status=res.status)
    reason = res.reason if res.status == "unknown" else "no verified counter-model"
    return EntailmentResult("unknown", reason=reason, decide_status=res.status)


__all__ = [
    "TGD",
    "KnowledgeBase",
    "EntailConfig",
    "EntailmentResult",
    "parse_kb",
    "validate_frontier_one",
    "tgd_formula",
    "diagram",
    "translate",
    "check_counter_model",
    "finite_entails",
]
