"""Kernel files, DIMACS CNF and digraph edge lists.

Kernel files are JSON::

    {
      "types": [{"label": "a", "weight": 0.5}, {"label": "b", "weight": 0.5}],
      "entries": [
        {"from": ["a", "+"], "to": ["b", "-"], "value": 2.0}
      ]
    }

``from``/``to`` name a type by label (or by index when no label matches) and
a sign ``"+"`` or ``"-"``. Missing entries are 0. Each entry also sets its
mirror ``(to, from)``; giving both with different values is an error.

Edge lists use DIMACS literals::

    c comment
    p digraph <n> <m>
    <tail> <head>
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .kernel import SIGNS, BlockKernel, InvalidKernelError, TypeSpace, block_index, validate_kernel
from .sampler import Digraph, Formula, from_dimacs, to_dimacs

KERNEL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["types", "entries"],
    "properties": {
        "types": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["label", "weight"],
                "properties": {
                    "label": {"type": ["string", "integer"]},
                    "weight": {"type": "number"},
                },
            },
        },
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["from", "to", "value"],
                "properties": {
                    "from": {"$ref": "#/$defs/block"},
                    "to": {"$ref": "#/$defs/block"},
                    "value": {"type": "number"},
                },
            },
        },
        "comment": {"type": "string"},
    },
    "$defs": {
        "block": {
            "type": "array",
            "prefixItems": [{"type": ["string", "integer"]}, {"enum": list(SIGNS)}],
            "minItems": 2,
            "maxItems": 2,
        }
    },
}


class FormatError(ValueError):
    pass


def kernel_from_dict(doc: dict) -> BlockKernel:
    try:
        jsonschema.validate(doc, KERNEL_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise FormatError(f"kernel file invalid at {where}: {e.message}") from None
    labels = [t["label"] for t in doc["types"]]
    if len(set(labels)) != len(labels):
        raise FormatError(f"duplicate type labels in {labels}")
    space = TypeSpace(labels, [float(t["weight"]) for t in doc["types"]])
    nb = space.n_blocks
    values = np.zeros((nb, nb))
    given = np.zeros((nb, nb), dtype=bool)
    for k, e in enumerate(doc["entries"]):
        try:
            i = block_index(space.index_of(e["from"][0]), e["from"][1])
            j = block_index(space.index_of(e["to"][0]), e["to"][1])
        except KeyError as err:
            raise FormatError(f"entry {k}: {err.args[0]}") from None
        v = float(e["value"])
        for a, b in ((i, j), (j, i)):
            if given[a, b] and values[a, b] != v:
                raise FormatError(
                    f"entry {k}: conflicting values for {space.block_name(a)}-{space.block_name(b)}: "
                    f"{values[a, b]} vs {v}")
            values[a, b] = v
            given[a, b] = True
    W = BlockKernel(space, values)
    problems = validate_kernel(W)
    if problems:
        raise InvalidKernelError(problems)
    return W


def kernel_to_dict(W: BlockKernel) -> dict:
    sp = W.space
    types = [{"label": lab if isinstance(lab, (str, int)) else str(lab), "weight": float(w)}
             for lab, w in zip(sp.labels, sp.weights)]
    entries = []
    for a in range(sp.n_blocks):
        for b in range(a, sp.n_blocks):
            if W.values[a, b] != 0:
                entries.append({
                    "from": [types[a // 2]["label"], SIGNS[a % 2]],
                    "to": [types[b // 2]["label"], SIGNS[b % 2]],
                    "value": float(W.values[a, b]),
                })
    return {"types": types, "entries": entries}


def load_kernel(path) -> BlockKernel:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}: not valid JSON ({e})") from None
    return kernel_from_dict(doc)


def save_kernel(W: BlockKernel, path) -> None:
    Path(path).write_text(json.dumps(kernel_to_dict(W), indent=2) + "\n")


def resolve_kernel(spec: str) -> BlockKernel:
    """A kernel file path, ``const:<c>`` or ``abc:<A>,<B>,<C>`` (one type)."""
    if spec.startswith("const:"):
        return BlockKernel.constant(float(spec[6:]))
    if spec.startswith("abc:"):
        parts = [float(x) for x in spec[4:].split(",")]
        if len(parts) != 3:
            raise FormatError(f"abc: needs three values, got {spec!r}")
        return BlockKernel.from_abc(*parts)
    return load_kernel(spec)


# ---------------------------------------------------------------------------
# DIMACS


def _provenance_line(prov: dict) -> str | None:
    if not prov:
        return None
    trial = prov.get("trial")
    trial = ".".join(str(t) for t in trial) if isinstance(trial, (list, tuple)) else trial
    parts = [f"seed={prov.get('seed')}", f"kernel={prov.get('kernel')}", f"model={prov.get('model')}"]
    if trial not in (None, ""):
        parts.insert(1, f"trial={trial}")
    return "c " + " ".join(parts)


def write_dimacs(f: Formula, fh, comments=()) -> None:
    for c in comments:
        fh.write(f"c {c}\n")
    line = _provenance_line(f.provenance)
    if line:
        fh.write(line + "\n")
    fh.write(f"p cnf {f.n} {len(f)}\n")
    for a, b in sorted(f.clauses):
        fh.write(f"{to_dimacs(a)} {to_dimacs(b)} 0\n")


def _parse_provenance(comments: list[str]) -> dict:
    prov = {}
    for c in comments:
        for tok in c.split():
            if "=" in tok:
                k, v = tok.split("=", 1)
                if k in ("seed", "trial", "kernel", "model"):
                    prov[k] = v
    return prov


def _read_header(lines, kind: str):
    comments, header, body = [], None, []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            comments.append(line[1:].strip())
            continue
        if line.startswith("p"):
            tok = line.split()
            if header is not None or len(tok) != 4 or tok[1] != kind:
                raise FormatError(f"line {lineno}: expected 'p {kind} <n> <m>', got {line!r}")
            try:
                header = (int(tok[2]), int(tok[3]))
            except ValueError:
                raise FormatError(f"line {lineno}: bad header numbers in {line!r}") from None
            continue
        if header is None:
            raise FormatError(f"line {lineno}: data before 'p {kind}' header")
        body.append((lineno, line))
    if header is None:
        raise FormatError(f"missing 'p {kind}' header")
    return comments, header, body


def read_dimacs(fh) -> Formula:
    """Parse a 2-CNF in DIMACS format (every clause has exactly two literals)."""
    comments, (n, m), body = _read_header(fh, "cnf")
    tokens: list[tuple[int, int]] = []
    for lineno, line in body:
        for tok in line.split():
            try:
                tokens.append((lineno, int(tok)))
            except ValueError:
                raise FormatError(f"line {lineno}: not an integer: {tok!r}") from None
    clauses, cur = set(), []
    for lineno, x in tokens:
        if x == 0:
            if len(cur) != 2:
                raise FormatError(f"line {lineno}: clause with {len(cur)} literals; only 2-CNF is supported")
            a, b = cur
            if abs(a) > n or abs(b) > n:
                raise FormatError(f"line {lineno}: variable out of range 1..{n}")
            if abs(a) == abs(b):
                raise FormatError(f"line {lineno}: clause {a} {b} repeats a variable")
            la, lb = from_dimacs(a), from_dimacs(b)
            clauses.add((min(la, lb), max(la, lb)))
            cur = []
        else:
            cur.append(x)
    if cur:
        raise FormatError("last clause not terminated by 0")
    f = Formula(n, frozenset(clauses), _parse_provenance(comments))
    if len(clauses) > m:
        raise FormatError(f"header announces {m} clauses, found {len(clauses)}")
    return f


def write_edge_list(dg: Digraph, fh, comments=()) -> None:
    for c in comments:
        fh.write(f"c {c}\n")
    line = _provenance_line(getattr(dg, "provenance", {}))
    if line:
        fh.write(line + "\n")
    arcs = sorted(dg.arcs) if not callable(dg.arcs) else sorted(dg.arcs())
    fh.write(f"p digraph {dg.n} {len(arcs)}\n")
    for u, v in arcs:
        fh.write(f"{to_dimacs(u)} {to_dimacs(v)}\n")


def read_edge_list(fh) -> Digraph:
    comments, (n, m), body = _read_header(fh, "digraph")
    arcs = set()
    for lineno, line in body:
        tok = line.split()
        if len(tok) != 2:
            raise FormatError(f"line {lineno}: expected '<tail> <head>', got {line!r}")
        try:
            u, v = int(tok[0]), int(tok[1])
        except ValueError:
            raise FormatError(f"line {lineno}: not integers: {line!r}") from None
        if 0 in (u, v) or abs(u) > n or abs(v) > n:
            raise FormatError(f"line {lineno}: literal out of range 1..{n}")
        if abs(u) == abs(v):
            raise FormatError(f"line {lineno}: arc {u} {v} stays on one variable")
        arcs.add((from_dimacs(u), from_dimacs(v)))
    if len(arcs) > m:
        raise FormatError(f"header announces {m} arcs, found {len(arcs)}")
    return Digraph(n, frozenset(arcs), _parse_provenance(comments))


def read_instance(path):
    """Read a DIMACS CNF or an edge list, chosen by the ``p`` header."""
    text = Path(path).read_text().splitlines()
    for line in text:
        s = line.strip()
        if s.startswith("p"):
            kind = s.split()[1] if len(s.split()) > 1 else ""
            if kind == "cnf":
                return read_dimacs(text)
            if kind == "digraph":
                return read_edge_list(text)
            raise FormatError(f"{path}: unknown problem kind {kind!r}")
    raise FormatError(f"{path}: no 'p' header")
