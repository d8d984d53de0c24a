"""JSON operator / family documents and report serialization.

Parsing keeps the source offset of every array and object, so schema errors
carry both a field path and a line/column in the original text.
"""

from __future__ import annotations

import json
import json.decoder
import json.scanner
import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .operators import HomogeneousPolynomial, LinearOperator, MultilinearOperator
from .seqnorms import FunctionalFamily, VectorFamily
from .spaces import NormedSpace

__all__ = [
    "DocumentError",
    "ParsedOperator",
    "parse_operator_document",
    "dump_operator_document",
    "parse_family_document",
    "dump_family_document",
    "render_json",
    "render_csv",
    "write_atomic",
]


class DocumentError(ValueError):
    """A malformed document; ``path`` names the field, line/col locate it."""

    def __init__(self, message: str, path: str = "", line: int | None = None, col: int | None = None):
        self.path, self.line, self.col = path, line, col
        where = f"line {line}, column {col}" if line is not None else ""
        field = f"at {path}" if path else ""
        prefix = ", ".join(x for x in (where, field) if x)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class _List(list):
    pos = 0


class _Dict(dict):
    pos = 0


def _located_decoder(text: str) -> json.JSONDecoder:
    dec = json.JSONDecoder()

    def parse_array(s_and_end, scan_once):
        start = s_and_end[1] - 1
        values, end = json.decoder.JSONArray(s_and_end, scan_once)
        out = _List(values)
        out.pos = start
        return out, end

    def parse_object(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo=None, _w=None):
        start = s_and_end[1] - 1
        pairs, end = json.decoder.JSONObject(s_and_end, strict, scan_once, None, None, memo if memo is not None else {})
        out = _Dict(pairs)
        out.pos = start
        return out, end

    dec.parse_array = parse_array
    dec.parse_object = parse_object
    dec.scan_once = json.scanner.py_make_scanner(dec)
    return dec


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _load(text: str):
    try:
        return _located_decoder(text).decode(text)
    except json.JSONDecodeError as e:
        raise DocumentError(e.msg, line=e.lineno, col=e.colno) from None


class _Ctx:
    def __init__(self, text: str):
        self.text = text

    def fail(self, msg, path, node=None):
        pos = getattr(node, "pos", None)
        if pos is None:
            raise DocumentError(msg, path)
        raise DocumentError(msg, path, *_line_col(self.text, pos))


def _field(ctx, obj, key, path):
    if key not in obj:
        ctx.fail(f"missing field {key!r}", path or "$", obj)
    return obj[key]


def _space(ctx, node, path) -> NormedSpace:
    if not isinstance(node, dict):
        ctx.fail("expected an object {dim, q}", path, node)
    dim = _field(ctx, node, "dim", path)
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        ctx.fail(f"dim must be a positive integer, got {dim!r}", f"{path}.dim", node)
    q = _field(ctx, node, "q", path)
    if isinstance(q, str):
        if q.strip().lower() != "inf":
            ctx.fail(f"q must be a number >= 1 or \"inf\", got {q!r}", f"{path}.q", node)
        q = math.inf
    if isinstance(q, bool) or not isinstance(q, (int, float)) or not q >= 1:
        ctx.fail(f"q must be a number >= 1 or \"inf\", got {q!r}", f"{path}.q", node)
    return NormedSpace(dim, float(q))


def _array(ctx, node, shape, path) -> np.ndarray:
    """Check a nested list against ``shape`` and convert; ragged rows are named."""

    def walk(x, depth, p):
        if depth == len(shape):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                ctx.fail(f"expected a number, got {json.dumps(x)[:40]}", p, x)
            return
        if not isinstance(x, list):
            ctx.fail(f"expected an array of length {shape[depth]}", p, x)
        if len(x) != shape[depth]:
            ctx.fail(f"ragged array: length {len(x)}, expected {shape[depth]}", p, x)
        for i, y in enumerate(x):
            walk(y, depth + 1, f"{p}[{i}]")

    walk(node, 0, path)
    return np.array(node, dtype=float).reshape(shape)


def _depth(node) -> int:
    d = 0
    while isinstance(node, list) and node:
        node, d = node[0], d + 1
    return d


@dataclass
class ParsedOperator:
    operator: MultilinearOperator | HomogeneousPolynomial
    warnings: list[str]


OPERATOR_TYPES = ("linear", "multilinear", "polynomial")


def parse_operator_document(text: str) -> ParsedOperator:
    """Operator from {"type", "domains", "codomain", "coefficients", "degree"?}."""
    ctx = _Ctx(text)
    doc = _load(text)
    if not isinstance(doc, dict):
        ctx.fail("top level must be an object", "$", doc)
    kind = _field(ctx, doc, "type", "$")
    if kind not in OPERATOR_TYPES:
        ctx.fail(f"type must be one of {OPERATOR_TYPES}, got {kind!r}", "type", doc)
    doms = _field(ctx, doc, "domains", "$")
    if not isinstance(doms, list) or not doms:
        ctx.fail("domains must be a non-empty array", "domains", doc)
    domains = [_space(ctx, d, f"domains[{i}]") for i, d in enumerate(doms)]
    codomain = _space(ctx, _field(ctx, doc, "codomain", "$"), "codomain")
    coeffs = _field(ctx, doc, "coefficients", "$")
    warnings: list[str] = []

    if kind == "polynomial":
        if len(domains) != 1:
            ctx.fail("a polynomial has exactly one domain", "domains", doms)
        degree = doc.get("degree")
        if degree is None:
            degree = _depth(coeffs) - 1
        if isinstance(degree, bool) or not isinstance(degree, int) or degree < 0:
            ctx.fail(f"degree must be a non-negative integer, got {degree!r}", "degree", doc)
        shape = (codomain.dim,) + (domains[0].dim,) * degree
        tensor = _array(ctx, coeffs, shape, "coefficients")
        P = HomogeneousPolynomial(tensor, domains[0], codomain)
        if not np.array_equal(P.tensor, tensor):
            warnings.append("polynomial coefficients were not symmetric; replaced by their symmetrization")
        return ParsedOperator(P, warnings)

    if "degree" in doc and doc["degree"] != len(domains):
        ctx.fail(f"degree {doc['degree']!r} does not match {len(domains)} domains", "degree", doc)
    if kind == "linear" and len(domains) != 1:
        ctx.fail("a linear operator has exactly one domain", "domains", doms)
    shape = (codomain.dim,) + tuple(d.dim for d in domains)
    tensor = _array(ctx, coeffs, shape, "coefficients")
    if kind == "linear":
        return ParsedOperator(LinearOperator(tensor, domains[0], codomain), warnings)
    return ParsedOperator(MultilinearOperator(tensor, domains, codomain), warnings)


def _space_doc(E: NormedSpace) -> dict:
    return {"dim": E.dim, "q": "inf" if E.q.is_inf else _num(float(E.q))}


def _num(x: float):
    return int(x) if float(x).is_integer() and abs(x) < 2**53 else float(x)


def dump_operator_document(op) -> str:
    if isinstance(op, HomogeneousPolynomial):
        doc = {
            "type": "polynomial",
            "domains": [_space_doc(op.domain)],
            "codomain": _space_doc(op.codomain),
            "degree": op.degree,
            "coefficients": op.tensor.tolist(),
        }
    else:
        doc = {
            "type": "linear" if op.degree == 1 else "multilinear",
            "domains": [_space_doc(E) for E in op.domains],
            "codomain": _space_doc(op.codomain),
            "coefficients": op.tensor.tolist(),
        }
    return json.dumps(doc, indent=2) + "\n"


def parse_family_document(text: str):
    """{"space": {dim, q}, "members": [[...], ...], "kind"?: "vectors" | "functionals"}."""
    ctx = _Ctx(text)
    doc = _load(text)
    if not isinstance(doc, dict):
        ctx.fail("top level must be an object", "$", doc)
    space = _space(ctx, _field(ctx, doc, "space", "$"), "space")
    members = _field(ctx, doc, "members", "$")
    if not isinstance(members, list) or not members:
        ctx.fail("members must be a non-empty array", "members", doc)
    arr = _array(ctx, members, (len(members), space.dim), "members")
    kind = doc.get("kind", "vectors")
    if kind == "vectors":
        return VectorFamily(arr, space)
    if kind == "functionals":
        return FunctionalFamily(arr, space)
    ctx.fail(f"kind must be 'vectors' or 'functionals', got {kind!r}", "kind", doc)


def dump_family_document(fam) -> str:
    kind = "vectors" if isinstance(fam, VectorFamily) else "functionals"
    arr = fam.members if kind == "vectors" else fam.flat
    doc = {"kind": kind, "space": _space_doc(fam.space), "members": arr.tolist()}
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# reports


def _plain(x):
    """JSON-ready copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def render_json(report: dict) -> str:
    # json writes floats with repr, the shortest round-trip decimal
    return json.dumps(_plain(report), indent=2, allow_nan=False) + "\n"


def _cell(x) -> str:
    x = _plain(x)
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (dict, list)):
        return json.dumps(x, allow_nan=False)
    return str(x)


def render_csv(rows: list[dict]) -> str:
    """One line per result row; columns are the union of keys in first-seen order."""
    import csv
    import io

    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory and rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
