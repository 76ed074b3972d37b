"""The finite-satisfiability decision procedure.

Exact mode explores the finite graph of rank-free states (1-type, obligations),
solves the game "for every transitive symbol, one-directional edges are
followed infinitely often only if resetting edges are too" and, when some root
state wins, extracts a certificate with explicit rank counters. Bounded mode
only runs the rank-counter fixpoint with a fixed cap.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from ..declarations import DeclarationCapExceeded
from ..syntax.ast import Formula, Signature
from ..syntax.normal_form import DNFBlowup, NormalFormFormula, to_normal_form
from ..treelike import FamilyTemplate, PeriodicTree
from .certificate import Certificate, verify_certificate
from .expand import ExpansionBudget, Expander
from .game import Arena, solve_andor, solve_muller
from .states import SearchState

log = logging.getLogger(__name__)


class Timeout(RuntimeError):
    pass


@dataclass
class DecideConfig:
    mode: str = "exact"  # exact | bounded
    family_budget: int = 500_000
    state_budget: int = 1_000_000
    time_budget: float = 30.0
    rank_cap: int = 3  # bounded mode; exact mode raises the cap as needed
    max_rank_cap: int = 64
    branch_cap: int = 256
    sanity_depth: int = 3
    oracle_max_n: int = 4


@dataclass
class DecideResult:
    status: str  # sat | unsat | unknown
    certificate: Certificate | None = None
    reason: str = ""
    stats: dict = field(default_factory=dict)

    def __str__(self) -> str:
        extra = f" ({self.reason})" if self.reason else ""
        return self.status.upper() + extra


def Sat(cert, **stats) -> DecideResult:
    return DecideResult("sat", cert, stats=stats)


def Unsat(**stats) -> DecideResult:
    return DecideResult("unsat", stats=stats)


def Unknown(reason: str, **stats) -> DecideResult:
    return DecideResult("unknown", reason=reason, stats=stats)


def root_states(nf: NormalFormFormula, expander: Expander | None = None) -> list[SearchState]:
    ex = expander or Expander(nf)
    zeros = (0,) * len(nf.signature.trans_symbols)
    return [SearchState(ty, ex.root_obligations(), zeros) for ty in ex.valid_types()]


def expand_state(state: SearchState, expander: Expander):
    """(family template, child states) pairs; ranks of children follow the stopwatch rule."""
    for mv in expander.moves(state.one_type, state.obligations):
        kids = []
        for (ty, obs), lab in zip(mv.children, mv.labels):
            kids.append(SearchState(ty, obs, _step(state.ranks, lab)))
        yield mv.family, kids


def _step(ranks, labels):
    return tuple(0 if k == "reset" else r + (k == "strict") for r, k in zip(ranks, labels))


class _Search:
    def __init__(self, nf: NormalFormFormula, cfg: DecideConfig):
        self.nf, self.cfg = nf, cfg
        self.ex = Expander(nf, cfg.family_budget, cfg.branch_cap)
        self.deadline = time.monotonic() + cfg.time_budget
        self.moves: dict = {}

    def tick(self):
        if time.monotonic() > self.deadline:
            raise Timeout(f"time budget {self.cfg.time_budget}s exhausted")

    def moves_of(self, core):
        mv = self.moves.get(core)
        if mv is None:
            self.tick()
            mv = self.moves[core] = self.ex.moves(*core)
        return mv

    def explore(self, roots):
        seen = set(roots)
        order = list(roots)
        i = 0
        while i < len(order):
            core = order[i]
            i += 1
            for mv in self.moves_of(core):
                for ch in mv.children:
                    if ch not in seen:
                        seen.add(ch)
                        order.append(ch)
                        if len(seen) > self.cfg.state_budget:
                            raise ExpansionBudget(f"state budget {self.cfg.state_budget} exhausted")
        return order

    def winning(self, cores):
        """Cores from which the prover wins the rank-free game."""
        syms = self.nf.signature.trans_symbols
        ku = len(syms)
        reset = [1 << (2 * u) for u in range(ku)]
        strict = [1 << (2 * u + 1) for u in range(ku)]

        # the losing sink repeats a strict T_1 step with no reset; without
        # transitive symbols it gets a bit of its own
        dead = strict[0] if ku else 1

        def win(C):
            if not ku:
                return not C & dead
            return all(not (C & strict[u]) or (C & reset[u]) for u in range(ku))

        A = Arena()
        WIN = A.add(0)
        A.succ[WIN].append(WIN)
        LOSE = A.add(0, dead)
        A.succ[LOSE].append(LOSE)
        vid = {c: A.add(0) for c in cores}
        edge_v: dict = {}
        move_v: dict = {}
        for c in cores:
            ms = self.moves[c]
            if not ms:
                A.succ[vid[c]].append(LOSE)
            for mi, mv in enumerate(ms):
                m = A.add(1)
                move_v[(c, mi)] = m
                A.succ[vid[c]].append(m)
                if not mv.children:
                    A.succ[m].append(WIN)
                for ch, lab in zip(mv.children, mv.labels):
                    key = (ch, lab)
                    e = edge_v.get(key)
                    if e is None:
                        bits = 0
                        for u, k in enumerate(lab):
                            if k == "reset":
                                bits |= reset[u]
                            elif k == "strict":
                                bits |= strict[u]
                        e = edge_v[key] = A.add(0, bits)
                        A.succ[e].append(vid[ch])
                    if e not in A.succ[m]:
                        A.succ[m].append(e)
        W0, _ = solve_muller(A, win, max(2 * ku, 1))
        good = {c for c in cores if vid[c] in W0}
        allowed = {c: [mi for mi in range(len(self.moves[c])) if move_v[(c, mi)] in W0] for c in good}
        return good, allowed

    def certificate(self, root, allowed, cap: int):
        """Rank-counter fixpoint with ranks <= cap, restricted to the allowed moves."""
        ku = len(self.nf.signature.trans_symbols)

        def moves_of(node):
            core, ranks = node
            out = []
            mis = allowed[core] if allowed is not None else range(len(self.moves_of(core)))
            for mi in mis:
                mv = self.moves[core][mi]
                kids = []
                for ch, lab in zip(mv.children, mv.labels):
                    r = _step(ranks, lab)
                    kids.append((ch, r) if max(r, default=0) <= cap else None)
                    if allowed is not None and ch not in allowed:
                        kids[-1] = None
                out.append(kids)
            self.tick()
            return out

        start = (root, (0,) * ku)
        good, _bad, choice, complete, moves = solve_andor([start], moves_of, self.cfg.state_budget)
        if start not in good:
            return None
        index: dict = {}
        order = []

        def vid(node):
            if node not in index:
                index[node] = len(order)
                order.append(node)
            return index[node]

        vid(start)
        fams = []
        i = 0
        while i < len(order):
            node = order[i]
            i += 1
            core, _ = node
            mi_local = choice[node]
            mis = allowed[core] if allowed is not None else range(len(self.moves[core]))
            mv = self.moves[core][list(mis)[mi_local]]
            kids = moves[node][mi_local]
            fams.append((mv.family, tuple(vid(k) for k in kids)))
        types = tuple(n[0][0] for n in order)
        families = tuple(FamilyTemplate(F, targets) for F, targets in fams)
        pt = PeriodicTree(self.nf.signature, types, families, 0)
        states = tuple(SearchState(c[0], c[1], r) for c, r in order)
        return Certificate(pt, states, cap)


def decide_nf(nf: NormalFormFormula, cfg: DecideConfig | None = None) -> DecideResult:
    cfg = cfg or DecideConfig()
    t0 = time.monotonic()
    try:
        search = _Search(nf, cfg)
        roots = [(s.one_type, s.obligations) for s in root_states(nf, search.ex)]
        if cfg.mode == "bounded":
            cert = _smallest(search.certificate(root, None, cfg.rank_cap) for root in roots)
            if cert is not None:
                return _finish(cert, nf, cfg, t0, search)
            return Unknown(f"no certificate with ranks <= {cfg.rank_cap}", seconds=time.monotonic() - t0)
        cores = search.explore(roots)
        good, allowed = search.winning(cores)
        stats = {"states": len(cores), "winning": len(good), "families": search.ex.families_seen}
        win_roots = [r for r in roots if r in good]
        log.info("explored %d states, %d winning, %d winning roots", len(cores), len(good), len(win_roots))
        if not win_roots:
            return Unsat(seconds=time.monotonic() - t0, **stats)
        cap = 0
        while cap <= cfg.max_rank_cap:
            cert = _smallest(search.certificate(r, allowed, cap) for r in win_roots)
            if cert is not None:
                return _finish(cert, nf, cfg, t0, search, **stats)
            cap = cap + 1 if cap < 4 else cap * 2
        return Unknown(f"winning root but no certificate with ranks <= {cfg.max_rank_cap}", **stats)
    except (ExpansionBudget, Timeout, DeclarationCapExceeded, DNFBlowup) as e:
        return Unknown(str(e), seconds=time.monotonic() - t0)


def _smallest(certs):
    """Fewest vertices among the certificates found (first one on ties)."""
    best = None
    for c in certs:
        if c is not None and (best is None or c.size < best.size):
            best = c
    return best


def _finish(cert, nf, cfg, t0, search, **stats):
    rep = verify_certificate(cert, nf, sanity_depth=cfg.sanity_depth)
    if not rep.ok:
        # a failing certificate is an internal error, never reported as Sat
        return Unknown("certificate failed verification: " + "; ".join(rep.issues[:3]), **stats)
    return Sat(cert, seconds=time.monotonic() - t0, vertices=cert.size, **stats)


def decide_fin_sat(f: Formula | NormalFormFormula, sig: Signature | None = None, cfg: DecideConfig | None = None) -> DecideResult:
    """Finite satisfiability of a validated formula (or of a normal form directly)."""
    if isinstance(f, NormalFormFormula):
        return decide_nf(f, cfg)
    try:
        nf = to_normal_form(f, sig)
    except DNFBlowup as e:
        return Unknown(str(e))
    return decide_nf(nf, cfg)
