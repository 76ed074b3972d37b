"""Game solvers: Zielonka's recursive algorithm for Muller conditions and an AND-OR safety fixpoint."""
from __future__ import annotations

import itertools
import sys
from collections import deque


class Arena:
    """Vertices 0..n-1 with owner 0 (Eloise) / 1 (Adam), successor lists and label bitmasks."""

    def __init__(self):
        self.owner: list[int] = []
        self.succ: list[list[int]] = []
        self.label: list[int] = []

    def add(self, owner: int, label: int = 0) -> int:
        self.owner.append(owner)
        self.succ.append([])
        self.label.append(label)
        return len(self.owner) - 1

    @property
    def n(self) -> int:
        return len(self.owner)

    def preds(self) -> list[list[int]]:
        p: list[list[int]] = [[] for _ in range(self.n)]
        for v, ss in enumerate(self.succ):
            for w in ss:
                p[w].append(v)
        return p


def attractor(arena: Arena, pred, region: set[int], player: int, target: set[int]) -> set[int]:
    """Vertices of `region` from which `player` forces a visit to `target` (within region)."""
    attr = set(target & region)
    count = {}
    q = deque(attr)
    while q:
        w = q.popleft()
        for v in pred[w]:
            if v not in region or v in attr:
                continue
            if arena.owner[v] == player:
                attr.add(v)
                q.append(v)
            else:
                if v not in count:
                    count[v] = sum(1 for x in arena.succ[v] if x in region)
                count[v] -= 1
                if count[v] == 0:
                    attr.add(v)
                    q.append(v)
    return attr


def _maximal_subsets(C: int, bits: list[int], want, win) -> list[int]:
    """Maximal D ⊊ C (as bitmasks) with win(D) == want."""
    members = [b for b in bits if C & b]
    found: list[int] = []
    for r in range(len(members) - 1, -1, -1):
        for drop in itertools.combinations(members, len(members) - r):
            D = C
            for b in drop:
                D &= ~b
            if win(D) == want and not any(D & F == D for F in found):
                found.append(D)
    return found


def solve_muller(arena: Arena, win, nbits: int) -> tuple[set[int], set[int]]:
    """Winning regions (W0, W1) where player 0 wins a play iff win(set of labels seen infinitely often).

    Every vertex must have a successor. win is given on label bitmasks.
    """
    pred = arena.preds()
    bits = [1 << i for i in range(nbits)]
    memo: dict = {}
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10_000))

    def children(C):
        if C not in memo:
            memo[C] = _maximal_subsets(C, bits, not win(C), win)
        return memo[C]

    def solve(V: set[int]):
        if not V:
            return set(), set()
        C = 0
        for v in V:
            C |= arena.label[v]
        sigma = 0 if win(C) else 1
        Ds = children(C)
        if not Ds:
            return (set(V), set()) if sigma == 0 else (set(), set(V))
        W_opp: set[int] = set()
        Vc = set(V)
        while True:
            progressed = False
            for D in Ds:
                target = {v for v in Vc if arena.label[v] & ~D}
                A = attractor(arena, pred, Vc, sigma, target)
                w0, w1 = solve(Vc - A)
                opp = w1 if sigma == 0 else w0
                if opp:
                    B = attractor(arena, pred, Vc, 1 - sigma, opp)
                    W_opp |= B
                    Vc -= B
                    progressed = True
                    break
            if not progressed or not Vc:
                return (Vc, W_opp) if sigma == 0 else (W_opp, Vc)

    try:
        return solve(set(range(arena.n)))
    finally:
        sys.setrecursionlimit(old)


def solve_andor(nodes, moves_of, node_budget: int | None = None):
    """Greatest fixpoint: a node is good iff some move has all its children good.

    nodes: iterable of start nodes; moves_of(node) -> list of child-node lists (a
    child of None is an immediate failure, e.g. a counter overflow).
    Returns (good, bad, choice, complete) where choice maps good nodes to a move
    index whose children are all good; complete is False when node_budget was hit.
    """
    moves: dict = {}
    order: list = []
    q = deque()
    for s in nodes:
        if s not in moves:
            moves[s] = None
            q.append(s)
    complete = True
    while q:
        s = q.popleft()
        order.append(s)
        ms = [list(m) for m in moves_of(s)]
        moves[s] = ms
        for m in ms:
            for c in m:
                if c is not None and c not in moves:
                    if node_budget is not None and len(moves) >= node_budget:
                        complete = False
                        continue
                    moves[c] = None
                    q.append(c)
    # unexplored nodes (budget) count as bad
    users: dict = {}
    alive_moves = {}
    bad_children = {}
    bad = set()
    work = deque()
    for s in order:
        ms = moves[s]
        alive = 0
        for mi, m in enumerate(ms):
            nb = 0
            for c in m:
                if c is None or moves.get(c) is None:
                    nb += 1
                else:
                    users.setdefault(c, []).append((s, mi))
            bad_children[(s, mi)] = nb
            if nb == 0:
                alive += 1
        alive_moves[s] = alive
        if alive == 0:
            bad.add(s)
            work.append(s)
    while work:
        c = work.popleft()
        for s, mi in users.get(c, ()):
            if s in bad:
                continue
            bad_children[(s, mi)] += 1
            if bad_children[(s, mi)] == 1:
                alive_moves[s] -= 1
                if alive_moves[s] == 0:
                    bad.add(s)
                    work.append(s)
    good = [s for s in order if s not in bad]
    choice = {}
    for s in good:
        for mi in range(len(moves[s])):
            if bad_children[(s, mi)] == 0:
                choice[s] = mi
                break
    return set(good), bad, choice, complete, moves
