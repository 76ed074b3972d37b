"""Model file format: "domain N" followed by lines "NAME : (i,j) (k,l) ..."."""
from __future__ import annotations

import json
import re

from ..syntax.ast import Signature, TransPair
from .structure import FiniteStructure

_TUPLE = re.compile(r"\(\s*([0-9]+(?:\s*,\s*[0-9]+)*)\s*\)")


class ModelFormatError(ValueError):
    pass


def parse_model(text: str, sig: Signature | None = None) -> FiniteStructure:
    """Read a model; without a signature one is inferred from the tuples.

    Inferred signatures treat NAME~ lines as inverses of transitive symbols.
    """
    n = None
    rows: dict[str, set] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            m = re.fullmatch(r"domain\s+([0-9]+)", line)
            if not m:
                raise ModelFormatError(f"line {lineno}: expected 'domain N'")
            n = int(m.group(1))
            continue
        if ":" not in line:
            raise ModelFormatError(f"line {lineno}: expected 'NAME : tuples'")
        name, rest = (x.strip() for x in line.split(":", 1))
        tuples = set()
        pos = 0
        rest = rest.strip()
        for m in _TUPLE.finditer(rest):
            if rest[pos:m.start()].strip():
                raise ModelFormatError(f"line {lineno}: junk {rest[pos:m.start()].strip()!r}")
            tuples.add(tuple(int(x) for x in m.group(1).split(",")))
            pos = m.end()
        if rest[pos:].strip():
            raise ModelFormatError(f"line {lineno}: junk {rest[pos:].strip()!r}")
        rows.setdefault(name, set()).update(tuples)
    if n is None:
        raise ModelFormatError("missing 'domain N' line")
    if sig is None:
        sig = _infer_signature(rows)
    try:
        return FiniteStructure(sig, n, rows)
    except ValueError as e:
        raise ModelFormatError(str(e)) from e


def _infer_signature(rows) -> Signature:
    unary, rels, trans = [], [], []
    bases = {name[:-1] for name in rows if name.endswith("~")}
    for name, ts in rows.items():
        if name.endswith("~") or name in bases:
            if name.rstrip("~") not in [p.name for p in trans]:
                trans.append(TransPair(name.rstrip("~")))
            continue
        arity = len(next(iter(ts))) if ts else 1
        if arity == 1:
            unary.append(name)
        else:
            rels.append((name, arity))
    return Signature(tuple(unary), tuple(rels), tuple(trans))


def format_model(S: FiniteStructure) -> str:
    sig = S.signature
    lines = [f"domain {S.n}"]
    names = list(sig.unary) + [r for r, _ in sig.relations] + list(sig.trans_symbols)
    for name in names:
        ts = sorted(S.tuples(name))
        if ts:
            lines.append(f"{name} : " + " ".join("(" + ",".join(map(str, t)) + ")" for t in ts))
    return "\n".join(lines) + "\n"


def model_to_json(S: FiniteStructure) -> dict:
    return {
        "domain": S.n,
        "relations": {k: sorted(list(t) for t in v) for k, v in sorted(S.interp.items())},
    }


def model_from_json(doc: dict, sig: Signature | None = None) -> FiniteStructure:
    rows = {k: {tuple(t) for t in v} for k, v in doc["relations"].items()}
    return FiniteStructure(sig or _infer_signature(rows), doc["domain"], rows)


def dumps_json(S: FiniteStructure) -> str:
    return json.dumps(model_to_json(S), indent=1)
