import random

import pytest
from hypothesis import settings

from unfotr.model import FiniteStructure, transitive_close
from unfotr.syntax import parse_formula, to_normal_form

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")

F_INF_SRC = "sig { unary P; trans T; } (A x. E y. T(x,y)) & (A x. !T(x,x))"
F_CYC_SRC = "sig { unary P; rel R/2; trans T; } (A x. E y. R(x,y)) & (A x. !R(x,x))"
F_TRIV_SRC = "sig { unary P; trans T; } E x. P(x)"

TGD_PART = """
sig { unary P; trans T; }
facts { P(0); }
tgd { P(x) -> E y. T(x,y) & P(y); }
query { E x. T(x,x); }
"""


def load(src):
    sig, f = parse_formula(src)
    return sig, f, to_normal_form(f, sig)


@pytest.fixture(scope="session")
def f_inf():
    return load(F_INF_SRC)


@pytest.fixture(scope="session")
def f_cyc():
    return load(F_CYC_SRC)


@pytest.fixture(scope="session")
def f_triv():
    return load(F_TRIV_SRC)


@pytest.fixture
def sig1():
    return parse_formula(F_TRIV_SRC)[0]


@pytest.fixture
def m_path2(sig1):
    return FiniteStructure(sig1, 2, {"T": {(0, 1)}, "T~": {(1, 0)}, "P": {(1,)}})


def random_structure(rng: random.Random, sig, n: int, density: float = 0.3, close: bool = True):
    rows = {}
    for u in sig.unary:
        rows[u] = {(a,) for a in range(n) if rng.random() < 0.5}
    for name, ar in sig.relations:
        rows[name] = {(a, b) for a in range(n) for b in range(n) if rng.random() < density} if ar == 2 else set()
    for p in sig.trans:
        rows[p.name] = {(a, b) for a in range(n) for b in range(n) if rng.random() < density}
    S = FiniteStructure(sig, n, rows)
    return transitive_close(S) if close else S


def random_tree(rng: random.Random, sig, n_nodes: int, sibling_p: float = 0.2):
    """A random tree-like structure: random parents, random family edges, families closed."""
    from unfotr.treelike import make_tree

    parent = [None] + [rng.randrange(v) for v in range(1, n_nodes)]
    rows: dict[str, set] = {}
    for u in sig.unary:
        rows[u] = {(a,) for a in range(n_nodes) if rng.random() < 0.5}
    kids: dict[int, list[int]] = {}
    for v in range(1, n_nodes):
        kids.setdefault(parent[v], []).append(v)
    for p in sig.trans:
        ts = rows.setdefault(p.name, set())
        for v in range(1, n_nodes):
            kind = rng.randrange(4)  # none, down, up, both
            if kind in (1, 3):
                ts.add((parent[v], v))
            if kind in (2, 3):
                ts.add((v, parent[v]))
        for ch in kids.values():
            for a in ch:
                for b in ch:
                    if a != b and rng.random() < sibling_p:
                        ts.add((a, b))
        for a in range(n_nodes):
            if rng.random() < 0.1:
                ts.add((a, a))
    for name, ar in sig.relations:
        if ar == 2:
            rows[name] = {(parent[v], v) for v in range(1, n_nodes) if rng.random() < 0.4}
    return make_tree(sig, parent, rows)
