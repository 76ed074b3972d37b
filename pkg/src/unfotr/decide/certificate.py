"""Certificates of finite satisfiability: a periodic tree annotated with search states."""
from __future__ import annotations

import json
from dataclasses import dataclass

from ..declarations import Triple, lcc_requirements, seed_triples
from ..model.evaluate import WitnessChecker, phi0_violations
from ..model.structure import FiniteStructure, transitive_close
from ..model.types import OneType, one_type
from ..report import Report
from ..syntax.ast import Signature
from ..syntax.normal_form import NormalFormFormula
from ..syntax.parser import parse_signature
from ..syntax.render import render_signature
from ..treelike import FamilyTemplate, PeriodicTree, edge_kind, unfold
from .states import SearchState, implied, normalize_triple, reduce_obligations


@dataclass(frozen=True, eq=False)
class Certificate:
    tree: PeriodicTree
    states: tuple[SearchState, ...]
    bound: int  # every rank is <= bound

    @property
    def size(self) -> int:
        return self.tree.size

    def to_json(self) -> dict:
        pt = self.tree
        fams = []
        for fam in pt.families:
            fams.append(
                {
                    "size": fam.local.n,
                    "tuples": {k: sorted(list(t) for t in v) for k, v in sorted(fam.local.interp.items())},
                    "targets": list(fam.targets),
                }
            )
        return {
            "signature": render_signature(pt.signature),
            "root": pt.root,
            "bound": self.bound,
            "vertices": [
                {
                    "type": sorted(st.one_type.atoms),
                    "obligations": [tr.to_json() for tr in sorted(st.obligations)],
                    "ranks": list(st.ranks),
                    "family": fam,
                }
                for st, fam in zip(self.states, fams)
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    @staticmethod
    def from_json(doc, signature: Signature | None = None) -> "Certificate":
        sig = signature or parse_signature(doc["signature"], allow_reserved=True)
        types, fams, states = [], [], []
        for v in doc["vertices"]:
            ty = OneType(frozenset(v["type"]))
            f = v["family"]
            local = FiniteStructure(sig, f["size"], {k: {tuple(t) for t in ts} for k, ts in f["tuples"].items()})
            types.append(ty)
            fams.append(FamilyTemplate(local, tuple(f["targets"])))
            obs = frozenset(Triple.from_json(t) for t in v["obligations"])
            states.append(SearchState(ty, obs, tuple(v["ranks"])))
        pt = PeriodicTree(sig, tuple(types), tuple(fams), doc.get("root", 0))
        return Certificate(pt, tuple(states), doc["bound"])


def lcc_violation(F, decls, t: int) -> str | None:
    """Like check_lcc, but required child triples are compared after normalization."""
    for tr in sorted(decls[0]):
        for fit, options in lcc_requirements(F, tr, t):
            ok = False
            for c, im in options:
                n = normalize_triple(im, t)
                if n is None or implied(decls[c], im) or implied(decls[c], n):
                    ok = True
                    break
            if not ok:
                return f"triple {tr} fitting {fit.f}: none of (l1)-(l9) holds"
    return None


def verify_certificate(cert: Certificate, nf: NormalFormFormula, bounds=None, sanity_depth: int = 3) -> Report:
    """Independent re-check of a certificate against a normal-form formula."""
    rep = Report("certificate")
    pt = cert.tree
    bound = cert.bound
    if bounds is not None:
        bound = min(bound, getattr(bounds, "M_hat", bounds))
    rep.extend(pt.check(), "structure: ")
    if len(cert.states) != pt.size:
        rep.fail("state list and vertex list differ in length")
        return rep
    syms = pt.signature.trans_symbols
    wc = WitnessChecker(nf)
    seeds = reduce_obligations(seed_triples(nf), nf.t)
    for v, (st, fam) in enumerate(zip(cert.states, pt.families)):
        F = fam.local
        if transitive_close(F) != F:
            rep.fail(f"vertex {v}: family is not transitively closed")
        if one_type(F, 0) != st.one_type:
            rep.fail(f"vertex {v}: head 1-type disagrees with its state")
        for i in range(nf.m):
            if wc.witness(F, 0, i) is None:
                rep.fail(f"vertex {v}: no witness for conjunct {i} in its family")
        if len(st.ranks) != len(syms) or any(r < 0 or r > bound for r in st.ranks):
            rep.fail(f"vertex {v}: ranks {st.ranks} outside [0, {bound}]")
        decls = [st.obligations] + [cert.states[w].obligations for w in fam.targets]
        msg = lcc_violation(F, decls, nf.t)
        if msg:
            rep.fail(f"vertex {v}: {msg}")
        for slot, w in enumerate(fam.targets, start=1):
            child = cert.states[w]
            for u, s in enumerate(syms):
                if u >= len(st.ranks) or u >= len(child.ranks):
                    continue
                kind = edge_kind(F, s, 0, slot)
                want = 0 if kind == "reset" else st.ranks[u] + (kind == "strict")
                if child.ranks[u] != want:
                    rep.fail(f"vertex {v} -> {w}: rank of {s} is {child.ranks[u]}, stopwatch rule gives {want}")
    root = cert.states[pt.root]
    for tr in seeds:
        if not implied(root.obligations, tr):
            rep.fail(f"root obligations miss seed {tr}")
    if rep.ok and sanity_depth > 0:
        S = unfold(pt, sanity_depth).materialize()
        bad = phi0_violations(S, nf, limit=1)
        if bad:
            rep.fail(f"unfolding to depth {sanity_depth} satisfies phi0 at {bad[0]}")
    return rep
