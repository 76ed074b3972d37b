"""Command-line entry point: ``unfotr <command> ...``.

Exit codes: 0 sat/pass/entailed, 1 unsat/fail/not-entailed, 2 unknown, 3 or more for errors.
With ``--json`` the last line on stdout is a RunReport object.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .construct import BuildError, build_finite_model, instance_estimate, verify_build
from .decide import Certificate, DecideConfig, decide_fin_sat, verify_certificate
from .model.evaluate import eval_formula
from .model.io import ModelFormatError, format_model, model_from_json, model_to_json, parse_model
from .model.structure import check_constraints
from .oracle import FoundModel, OracleConfig, brute_force_sat, expand_model
from .pruning import compute_bounds, generalized_types, prune, replay_check, verify_rank_bound
from .report import Report
from .syntax import ParseError, parse_formula, render, to_normal_form
from .syntax.render import render_formula, render_signature
from .syntax.validate import apply_sugar
from .tgd import EntailConfig, finite_entails, parse_kb
from .treelike import to_dot, unravel

log = logging.getLogger("unfotr")

EXIT = {"sat": 0, "pass": 0, "entailed": 0, "unsat": 1, "fail": 1, "not-entailed": 1, "unknown": 2, "error": 3}


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: list
    status: str
    timings: dict = field(default_factory=dict)
    paths: dict = field(default_factory=dict)
    version: str = __version__
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=str)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------- helpers


def _read(path) -> str:
    return Path(path).read_text()


def _formula(path):
    sig, f = parse_formula(_read(path))
    return sig, f


def _decide_cfg(a) -> DecideConfig:
    return DecideConfig(
        mode=a.mode,
        rank_cap=a.rank_cap,
        time_budget=a.time_budget,
        state_budget=a.state_budget,
        family_budget=a.family_budget,
    )


def _model(path, sig):
    text = _read(path)
    if str(path).endswith(".json"):
        return model_from_json(json.loads(text), sig)
    return parse_model(text, sig)


def _write(path, text, rr: RunReport, key: str):
    Path(path).write_text(text)
    rr.paths[key] = str(path)


def _model_text(S, path) -> str:
    return json.dumps(model_to_json(S), indent=1) + "\n" if str(path).endswith(".json") else format_model(S)


def _plain_model(S, sig):
    """The reduct of a model to the user's signature (sugar removed)."""
    return S.reduct(sig.without_flags())


# ---------------------------------------------------------------- commands


def cmd_check(a, rr: RunReport, out):
    sig, f = _formula(a.formula)
    nf = to_normal_form(f, sig)
    res = decide_fin_sat(nf, cfg=_decide_cfg(a))
    rr.status = res.status
    rr.details.update(reason=res.reason, **{k: v for k, v in res.stats.items()})
    print(str(res), file=out)
    if res.status == "sat":
        if a.emit_cert:
            _write(a.emit_cert, res.certificate.dumps(), rr, "certificate")
        if a.emit_model:
            S, ctx = build_finite_model(res.certificate.tree, nf, max_elements=a.max_elements)
            rep = verify_build(S, nf, ctx)
            if not rep.ok:
                raise RuntimeError(f"built model failed its checks: {rep}")
            _write(a.emit_model, _model_text(_plain_model(S, sig), a.emit_model), rr, "model")
            rr.details["model_size"] = S.n


def cmd_bruteforce(a, rr, out):
    sig, f = _formula(a.formula)
    nf = to_normal_form(f, sig)
    res = brute_force_sat(nf, max_n=a.max_n, cfg=OracleConfig(backend=a.backend, time_budget=a.time_budget))
    if isinstance(res, FoundModel):
        rr.status = "sat"
        rr.details["size"] = res.size
        print(f"model of size {res.size}", file=out)
        M = _plain_model(res.structure, sig)
        if a.emit:
            _write(a.emit, _model_text(M, a.emit), rr, "model")
        else:
            print(format_model(M), end="", file=out)
    else:
        rr.status = "unknown"
        rr.details["no_model_up_to"] = res.bound
        print(f"no model of size <= {res.bound}", file=out)


def cmd_model_check(a, rr, out):
    sig, f = _formula(a.formula)
    psig, pf = apply_sugar(sig, f)
    S = _model(a.model, psig)
    rep = Report("model-check")
    rep.extend(check_constraints(S))
    if rep.ok and not eval_formula(S, pf):
        rep.fail("the formula is false in the structure")
    rr.status = "pass" if rep.ok else "fail"
    rr.details["issues"] = rep.issues
    print(str(rep), file=out)


def cmd_normalize(a, rr, out):
    sig, f = _formula(a.formula)
    nf = to_normal_form(f, sig)
    print(render(nf, nf.signature), file=out)
    rr.status = "pass"
    rr.details.update(t=nf.t, m=nf.m, introduced=list(nf.introduced))


def _certificate(a, nf, rr):
    if a.cert:
        return Certificate.from_json(json.loads(_read(a.cert)), nf.signature)
    res = decide_fin_sat(nf, cfg=_decide_cfg(a))
    if res.status != "sat":
        rr.status = res.status
        rr.details["reason"] = res.reason
        return None
    return res.certificate


def cmd_build_model(a, rr, out):
    sig, f = _formula(a.formula)
    nf = to_normal_form(f, sig)
    cert = _certificate(a, nf, rr)
    if cert is None:
        print(rr.status, file=out)
        return
    try:
        S, ctx = build_finite_model(cert.tree, nf, max_elements=a.max_elements)
    except BuildError as e:
        rr.status = "unknown"
        rr.details["reason"] = str(e)
        print(f"unknown: {e}", file=out)
        return
    rep = verify_build(S, nf, ctx)
    est = instance_estimate(ctx, nf)
    rr.status = "pass" if rep.ok else "fail"
    rr.details.update(size=S.n, issues=rep.issues, within_estimate=bool(S.n <= est))
    print(f"{rep}\nsize {S.n}", file=out)
    if a.emit and rep.ok:
        _write(a.emit, _model_text(_plain_model(S, sig), a.emit), rr, "model")


def cmd_entails(a, rr, out):
    kb = parse_kb(_read(a.kb))
    cfg = EntailConfig(oracle_max_n=a.max_n)
    cfg.decide.time_budget = a.time_budget
    res = finite_entails(kb, cfg)
    rr.status = res.status
    rr.details["reason"] = res.reason
    print(str(res), file=out)
    if res.counter_model is not None:
        if a.emit:
            _write(a.emit, _model_text(res.counter_model, a.emit), rr, "counter_model")
        else:
            print(format_model(res.counter_model), end="", file=out)


def _nf_model(a):
    sig, f = _formula(a.formula)
    nf = to_normal_form(f, sig)
    psig, _ = apply_sugar(sig, f)
    S = _model(a.model, psig)
    if set(nf.signature.unary) - set(S.signature.unary):
        S = expand_model(S, nf)
        if S is None:
            raise ValueError("the structure is not a model of the formula")
    return nf, S


def cmd_unravel(a, rr, out):
    nf, S = _nf_model(a)
    tl, _ = unravel(S, nf, a.depth, start=a.start)
    rr.status = "pass"
    rr.details["nodes"] = tl.n
    print(f"tree-like structure with {tl.n} nodes, depth {a.depth}", file=out)
    if a.emit:
        _write(a.emit, to_dot(tl), rr, "dot")


def cmd_prune(a, rr, out):
    nf, S = _nf_model(a)
    k = nf.signature.k
    depth = a.depth if a.depth is not None else S.n * (2 * k + 1) + 2
    tl, _ = unravel(S, nf, depth)
    pr, state = prune(tl)
    gts = set(generalized_types(tl))
    bounds = compute_bounds(nf.signature, nf, decl_count=len(gts), flavor="light")
    rep = verify_rank_bound(pr, bounds)
    rep.extend(replay_check(tl, pr, state))
    for msg in state.issues:
        rep.fail(msg)
    rr.status = "pass" if rep.ok else "fail"
    rr.details.update(nodes_before=tl.n, nodes_after=pr.n, M_hat=bounds.M_hat, issues=rep.issues)
    print(f"{rep}\nnodes {tl.n} -> {pr.n}, rank bound {bounds.M_hat}", file=out)
    if a.emit:
        _write(a.emit, to_dot(pr), rr, "dot")


def cmd_verify_cert(a, rr, out):
    sig, f = _formula(a.formula)
    nf = to_normal_form(f, sig)
    cert = Certificate.from_json(json.loads(_read(a.cert)), nf.signature)
    rep = verify_certificate(cert, nf)
    rr.status = "pass" if rep.ok else "fail"
    rr.details["issues"] = rep.issues
    print(str(rep), file=out)


def convert(path, fmt: str) -> str:
    """Text of the file at path converted to fmt (json, out, unfo or dot)."""
    p = str(path)
    text = _read(path)
    if p.endswith(".json"):
        doc = json.loads(text)
        if "vertices" in doc:
            kind = "certificate"
        elif "domain" in doc:
            kind = "model"
        elif "formula" in doc:
            kind = "formula"
        else:
            raise ValueError("unrecognized JSON document")
    elif p.endswith(".out") or p.endswith(".model"):
        kind = "model"
    elif p.endswith(".unfo"):
        kind = "formula"
    else:
        raise ValueError(f"unknown file type: {p}")
    if kind == "model":
        S = model_from_json(doc) if p.endswith(".json") else parse_model(text)
        if fmt == "json":
            return json.dumps(model_to_json(S), indent=1) + "\n"
        if fmt == "out":
            return format_model(S)
    elif kind == "formula":
        if p.endswith(".json"):
            sig, f = parse_formula(f"{doc['signature']} {doc['formula']}", allow_reserved=True)
        else:
            sig, f = parse_formula(text)
        if fmt == "json":
            return json.dumps({"signature": render_signature(sig), "formula": render_formula(f)}, indent=1) + "\n"
        if fmt == "unfo":
            return render(f, sig) + "\n"
    elif kind == "certificate":
        cert = Certificate.from_json(doc)
        if fmt == "dot":
            return to_dot(cert.tree)
        if fmt == "json":
            return cert.dumps() + "\n"
    raise ValueError(f"cannot convert a {kind} to {fmt}")


def cmd_convert(a, rr, out):
    text = convert(a.path, a.to)
    if a.output:
        _write(a.output, text, rr, "output")
    else:
        print(text, end="", file=out)
    rr.status = "pass"


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="unfotr", description="Finite satisfiability for UNFO with transitive relations.")
    ap.add_argument("--json", action="store_true", help="print a RunReport as the last line")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1, help="parallelism hint (recorded; the solvers are sequential)")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def decide_opts(p):
        p.add_argument("--mode", choices=["exact", "bounded"], default="exact")
        p.add_argument("--rank-cap", type=int, default=3)
        p.add_argument("--time-budget", type=float, default=30.0)
        p.add_argument("--state-budget", type=int, default=1_000_000)
        p.add_argument("--family-budget", type=int, default=500_000)

    p = sub.add_parser("check", help="decide finite satisfiability")
    p.add_argument("formula")
    decide_opts(p)
    p.add_argument("--emit-cert")
    p.add_argument("--emit-model")
    p.add_argument("--max-elements", type=int, default=200_000)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("bruteforce", help="search small models")
    p.add_argument("formula")
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--backend", choices=["sat", "enum"], default="sat")
    p.add_argument("--time-budget", type=float, default=60.0)
    p.add_argument("--emit")
    p.set_defaults(fn=cmd_bruteforce)

    p = sub.add_parser("model-check", help="evaluate a formula on a model file")
    p.add_argument("formula")
    p.add_argument("model")
    p.set_defaults(fn=cmd_model_check)

    p = sub.add_parser("normalize", help="print the normal form")
    p.add_argument("formula")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("build-model", help="build a finite model from a certificate (two-variable formulas)")
    p.add_argument("formula")
    p.add_argument("--cert")
    p.add_argument("--emit")
    p.add_argument("--max-elements", type=int, default=200_000)
    decide_opts(p)
    p.set_defaults(fn=cmd_build_model)

    p = sub.add_parser("entails", help="finite entailment for a KB file")
    p.add_argument("kb")
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--time-budget", type=float, default=30.0)
    p.add_argument("--emit")
    p.set_defaults(fn=cmd_entails)

    p = sub.add_parser("unravel", help="truncated unraveling of a model")
    p.add_argument("formula")
    p.add_argument("model")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--emit", help="DOT output path")
    p.set_defaults(fn=cmd_unravel)

    p = sub.add_parser("prune", help="unravel, prune and check the rank bound")
    p.add_argument("formula")
    p.add_argument("model")
    p.add_argument("--depth", type=int)
    p.add_argument("--emit", help="DOT output path")
    p.set_defaults(fn=cmd_prune)

    p = sub.add_parser("verify-cert", help="check a certificate against a formula")
    p.add_argument("formula")
    p.add_argument("cert")
    p.set_defaults(fn=cmd_verify_cert)

    p = sub.add_parser("convert", help="convert between text, JSON and DOT")
    p.add_argument("path")
    p.add_argument("--to", required=True, choices=["json", "out", "unfo", "dot"])
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_convert)
    return ap


def _setup_logging(verbose: int):
    level = os.environ.get("UNFO_LOG")
    if level is None:
        level = ["WARNING", "INFO", "DEBUG"][min(verbose, 2)]
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def run(argv=None, out=None) -> tuple[int, RunReport]:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    rr = RunReport(argv, "error")
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except UsageError as e:
        print(f"unfotr: error: {e}", file=sys.stderr)
        return 3, rr
    if a.command is None:
        ap.print_usage(sys.stderr)
        return 3, rr
    _setup_logging(a.verbose)
    random.seed(a.seed)
    rr.details["jobs"] = a.jobs
    t0 = time.monotonic()
    code = 3
    try:
        a.fn(a, rr, out)
        code = EXIT[rr.status]
    except (ParseError, ModelFormatError, OSError, ValueError) as e:
        rr.status = "error"
        rr.details["error"] = str(e)
        print(f"unfotr: error: {e}", file=sys.stderr)
        code = 3
    except Exception as e:  # internal failure
        rr.status = "error"
        rr.details["error"] = f"{type(e).__name__}: {e}"
        print(f"unfotr: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        code = 4
    rr.timings["total_s"] = round(time.monotonic() - t0, 4)
    if a.json:
        print(rr.to_json(), file=out)
    return code, rr


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
