"""Seeded random normal-form formulas for cross-validation against the oracle."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .syntax.ast import PLAIN, Atom, Not, Signature, TransPair, conj, disj
from .syntax.normal_form import Conjunct, NormalFormFormula


@dataclass
class CorpusConfig:
    n_unary: int = 2
    base_binary: bool = True
    max_t: int = 2
    max_m: int = 2
    max_disjuncts: int = 2
    max_literals: int = 3


def corpus_signature(cfg: CorpusConfig) -> Signature:
    unary = ("P", "Q")[: cfg.n_unary]
    rels = (("R", 2),) if cfg.base_binary else ()
    return Signature(unary, rels, (TransPair("T", PLAIN),))


def _literal(rng: random.Random, sig: Signature, vs: list[str], allow_neg=True):
    """A literal over variables vs; negation only on one-variable atoms."""
    kinds = ["unary"] * bool(sig.unary) + ["T", "T"] + ["R"] * bool(sig.relations)
    kind = rng.choice(kinds)
    if kind == "unary":
        a = Atom(rng.choice(sig.unary), (rng.choice(vs),))
        return Not(a) if allow_neg and rng.random() < 0.4 else a
    name = "T" if kind == "T" else "R"
    if kind == "T" and rng.random() < 0.3:
        name = "T~"
    u, v = rng.choice(vs), rng.choice(vs)
    a = Atom(name, (u, v))
    if u == v and allow_neg and rng.random() < 0.6:
        return Not(a)
    return a


def random_nf(rng: random.Random, cfg: CorpusConfig | None = None) -> NormalFormFormula:
    cfg = cfg or CorpusConfig()
    sig = corpus_signature(cfg)
    t = rng.randint(1, cfg.max_t)
    xs = [f"x{i}" for i in range(1, t + 1)]
    ds = []
    for _ in range(rng.randint(1, cfg.max_disjuncts)):
        ds.append(conj([_literal(rng, sig, xs) for _ in range(rng.randint(1, cfg.max_literals))]))
    phi0 = disj(ds)
    conjuncts = []
    for _ in range(rng.randint(0, cfg.max_m)):
        lits = [Atom(rng.choice(["T", "T~", "R"] if sig.relations else ["T", "T~"]), ("x", "y1"))]
        for _ in range(rng.randint(0, 2)):
            lits.append(_literal(rng, sig, ["x", "y1"]))
        body = conj(lits)
        if rng.random() < 0.2:
            body = disj([body, _literal(rng, sig, ["x", "y1"])])
        conjuncts.append(Conjunct(("y1",), body))
    return NormalFormFormula(sig, t, phi0, tuple(conjuncts))


def corpus(seed: int, count: int, cfg: CorpusConfig | None = None) -> list[NormalFormFormula]:
    rng = random.Random(seed)
    return [random_nf(rng, cfg) for _ in range(count)]
