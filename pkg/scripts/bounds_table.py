"""Print rank bounds and size estimates for a few small signatures.

    python3 scripts/bounds_table.py --max-k 3 --unary 0 1 2
"""
from __future__ import annotations

import argparse

from unfotr.construct import LogBound, estimate_size
from unfotr.pruning import compute_bounds
from unfotr.syntax.ast import PLAIN, Signature, TransPair


def signature(n_unary: int, k: int) -> Signature:
    unary = tuple(f"P{i}" for i in range(n_unary))
    trans = tuple(TransPair(f"T{j}", PLAIN) for j in range(k))
    return Signature(unary, (), trans)


def fmt(x) -> str:
    if isinstance(x, LogBound):
        return f"2^{x.log2:.3g}"
    return str(x) if x < 10**12 else f"~2^{x.bit_length() - 1}"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-k", type=int, default=2)
    ap.add_argument("--unary", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--formula-size", type=int, default=10, help="n in the size estimate")
    a = ap.parse_args(argv)
    print(f"{'k':>2} {'|P|':>3} {'flavor':>8} {'M_phi':>8} {'Mbar':>12} {'Mhat':>12}  estimate")
    for k in range(1, a.max_k + 1):
        for u in a.unary:
            sig = signature(u, k)
            for flavor in ("light", "general"):
                b = compute_bounds(sig, flavor=flavor)
                est = estimate_size(2**u, a.formula_size, b.M_hat, k)
                print(f"{k:>2} {u:>3} {flavor:>8} {b.M_phi:>8} {fmt(b.Mbar_phi):>12} {fmt(b.M_hat):>12}  {fmt(est)}")


if __name__ == "__main__":
    main()
