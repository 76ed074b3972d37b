"""Decide a seeded random corpus, cross-check every answer against the oracle and
build finite models for the satisfiable ones.

    python3 scripts/run_corpus.py --seed 7 --count 60
"""
from __future__ import annotations

import argparse
import collections
import time
from dataclasses import dataclass

from unfotr.construct import BuildError, build_finite_model, verify_build
from unfotr.corpus import corpus
from unfotr.decide import DecideConfig, decide_fin_sat
from unfotr.oracle import cross_check


@dataclass
class RunConfig:
    seed: int = 7
    count: int = 60
    oracle_max_n: int = 3
    time_budget: float = 20.0
    build: bool = True
    max_elements: int = 20_000


def run(cfg: RunConfig) -> dict:
    tally = collections.Counter()
    t0 = time.monotonic()
    for i, nf in enumerate(corpus(cfg.seed, cfg.count)):
        res = decide_fin_sat(nf, cfg=DecideConfig(time_budget=cfg.time_budget))
        tally[res.status] += 1
        ag = cross_check(nf, None, res, max_n=cfg.oracle_max_n)
        if not ag.agree:
            tally["contradiction"] += 1
            print(f"#{i}: {'; '.join(ag.notes)}")
        if cfg.build and res.status == "sat":
            try:
                S, ctx = build_finite_model(res.certificate.tree, nf, max_elements=cfg.max_elements)
            except BuildError:
                tally["build-capped"] += 1
                continue
            ok = verify_build(S, nf, ctx).ok
            tally["build-ok" if ok else "build-bad"] += 1
            tally["elements"] += S.n
    tally["seconds"] = round(time.monotonic() - t0, 1)
    return dict(tally)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=RunConfig.seed)
    ap.add_argument("--count", type=int, default=RunConfig.count)
    ap.add_argument("--oracle-max-n", type=int, default=RunConfig.oracle_max_n)
    ap.add_argument("--time-budget", type=float, default=RunConfig.time_budget)
    ap.add_argument("--no-build", action="store_true")
    a = ap.parse_args(argv)
    cfg = RunConfig(a.seed, a.count, a.oracle_max_n, a.time_budget, not a.no_build)
    for key, val in sorted(run(cfg).items()):
        print(f"{key:>14}: {val}")


if __name__ == "__main__":
    main()
