"""Space files.

The primary format is a JSON document::

    {"points": ["a", "b"], "dist": [[0, "3/2"], ["3/2", 0]]}

Distances are integers or ``"p/q"`` strings; floats are refused.  Optional
sections: ``projection`` (with a nested ``base`` document), ``parts``,
``basepoints``, ``base_values`` and ``labels``.  A CSV matrix whose header
row lists the ids is accepted as well.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from .metric import FiniteMetricSpace, MalformedSpaceError, as_dist, format_dist


class SpaceFileError(ValueError):
    pass


@dataclass
class SpaceDocument:
    space: FiniteMetricSpace
    projection: dict[str, str] | None = None
    base: FiniteMetricSpace | None = None
    parts: list[list[str]] | None = None
    basepoints: list[str] | None = None
    base_values: list[Fraction] | None = None
    labels: dict[str, str] | None = None
    extra: dict[str, Any] = field(default_factory=dict)


def _token(v, where: str) -> Fraction:
    if isinstance(v, float):
        raise SpaceFileError(f"{where}: float {v!r} refused; write rationals as \"p/q\"")
    try:
        return as_dist(v)
    except (MalformedSpaceError, TypeError) as exc:
        raise SpaceFileError(f"{where}: {exc}") from None


def space_from_json(doc: Mapping, where: str = "document") -> FiniteMetricSpace:
    if not isinstance(doc, Mapping) or "points" not in doc or "dist" not in doc:
        raise SpaceFileError(f"{where}: needs 'points' and 'dist'")
    pts = [str(p) for p in doc["points"]]
    rows = doc["dist"]
    if not isinstance(rows, list) or len(rows) != len(pts) or any(
            not isinstance(r, list) or len(r) != len(pts) for r in rows):
        raise SpaceFileError(f"{where}: dist must be a {len(pts)}x{len(pts)} matrix")
    mat = [[_token(v, f"{where} dist[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(rows)]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if mat[i][j] != mat[j][i]:
                raise SpaceFileError(f"{where}: asymmetric entry between {pts[i]} and {pts[j]}")
    try:
        return FiniteMetricSpace(pts, mat)
    except MalformedSpaceError as exc:
        raise SpaceFileError(f"{where}: {exc}") from None


def _check_ids(ids, space: FiniteMetricSpace, section: str) -> None:
    for x in ids:
        if x not in space:
            raise SpaceFileError(f"section {section!r} references unknown id {x!r}")


def document_from_json(doc: Mapping) -> SpaceDocument:
    space = space_from_json(doc)
    out = SpaceDocument(space)
    if "projection" in doc:
        proj = {str(k): str(v) for k, v in doc["projection"].items()}
        _check_ids(proj, space, "projection")
        out.projection = proj
        if "base" in doc:
            out.base = space_from_json(doc["base"], "base")
            _check_ids(proj.values(), out.base, "projection")
    if "parts" in doc:
        out.parts = [[str(x) for x in p] for p in doc["parts"]]
        for p in out.parts:
            _check_ids(p, space, "parts")
    if "basepoints" in doc:
        out.basepoints = [str(x) for x in doc["basepoints"]]
        _check_ids(out.basepoints, space, "basepoints")
    if "base_values" in doc:
        out.base_values = [_token(v, "base_values") for v in doc["base_values"]]
    if "labels" in doc:
        out.labels = {str(k): str(v) for k, v in doc["labels"].items()}
        _check_ids(out.labels, space, "labels")
    known = {"points", "dist", "projection", "base", "parts", "basepoints", "base_values", "labels"}
    out.extra = {k: v for k, v in doc.items() if k not in known}
    return out


def parse_csv(text: str) -> FiniteMetricSpace:
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise SpaceFileError("empty CSV")
    header = [c.strip() for c in rows[0]]
    # tolerate a leading blank corner cell
    if header and header[0] == "" and len(rows) > 1 and len(rows[1]) == len(header):
        header = header[1:]
        rows = [rows[0]] + [r[1:] for r in rows[1:]]
    body = rows[1:]
    mat = []
    for i, r in enumerate(body):
        vals = []
        for j, c in enumerate(r):
            c = c.strip()
            if "." in c or "e" in c.lower():
                raise SpaceFileError(f"row {i} col {j}: float {c!r} refused; write \"p/q\"")
            vals.append(_token(c, f"row {i} col {j}"))
        mat.append(vals)
    return space_from_json({"points": header, "dist": mat}, "csv")


def parse_text(text: str, *, csv_format: bool | None = None) -> SpaceDocument:
    stripped = text.lstrip()
    if csv_format is None:
        csv_format = not stripped.startswith("{")
    if csv_format:
        return SpaceDocument(parse_csv(text))
    try:
        doc = json.loads(text, parse_float=lambda s: float(s))
    except json.JSONDecodeError as exc:
        raise SpaceFileError(f"malformed JSON: {exc}") from None
    return document_from_json(doc)


def parse_space(path) -> SpaceDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpaceFileError(f"cannot read {path}: {exc}") from None
    return parse_text(text, csv_format=True if path.suffix.lower() == ".csv" else None)


# ---- writing ---------------------------------------------------------------

def dist_token(v: Fraction):
    return int(v) if v.denominator == 1 else format_dist(v)


def space_to_json(space: FiniteMetricSpace) -> dict:
    num, den = space.scaled
    rows = [[dist_token(Fraction(int(v), den)) for v in row] for row in num.tolist()]
    return {"points": list(space.points), "dist": rows}


def render(doc: Mapping, indent: int = 0) -> str:
    """Deterministic JSON with one matrix row per line."""
    pad = " " * indent
    lines = ["{"]
    items = list(doc.items())
    for n, (k, v) in enumerate(items):
        comma = "," if n < len(items) - 1 else ""
        key = json.dumps(k)
        if k == "dist" and isinstance(v, list):
            if not v:
                lines.append(f'{pad}  {key}: []{comma}')
            else:
                lines.append(f"{pad}  {key}: [")
                for i, row in enumerate(v):
                    sep = "," if i < len(v) - 1 else ""
                    lines.append(f"{pad}    {json.dumps(row)}{sep}")
                lines.append(f"{pad}  ]{comma}")
        elif isinstance(v, Mapping) and "dist" in v:
            lines.append(f"{pad}  {key}: {render(v, indent + 2).strip()}{comma}")
        else:
            lines.append(f"{pad}  {key}: {json.dumps(v)}{comma}")
    lines.append(pad + "}")
    return "\n".join(lines) + ("\n" if indent == 0 else "")


def space_document(space: FiniteMetricSpace, *, projection: Mapping[str, str] | None = None,
                   base: FiniteMetricSpace | None = None, parts: Sequence[Sequence[str]] | None = None,
                   basepoints: Sequence[str] | None = None, base_values: Sequence[Fraction] | None = None,
                   labels: Mapping[str, str] | None = None, **extra) -> dict:
    doc = space_to_json(space)
    if base is not None:
        doc["base"] = space_to_json(base)
    if projection is not None:
        doc["projection"] = {x: projection[x] for x in space.points}
    if parts is not None:
        doc["parts"] = [list(p) for p in parts]
    if basepoints is not None:
        doc["basepoints"] = list(basepoints)
    if base_values is not None:
        doc["base_values"] = [dist_token(Fraction(v)) for v in base_values]
    if labels is not None:
        doc["labels"] = {x: labels[x] for x in space.points}
    doc.update(extra)
    return doc


def dump_space(space: FiniteMetricSpace, **sections) -> str:
    return render(space_document(space, **sections))


def write_space(path, space: FiniteMetricSpace, **sections) -> None:
    Path(path).write_text(dump_space(space, **sections), encoding="utf-8")


def union_from_document(doc: SpaceDocument):
    """Rebuild a CoarseUnion from a document with ``parts`` and ``basepoints``.

    Without ``base_values`` the union is rebuilt by ``coarse_union`` and must
    reproduce the stored total.
    """
    from .splice import CoarseUnion, coarse_union

    if doc.parts is None or doc.basepoints is None:
        raise SpaceFileError("a union document needs 'parts' and 'basepoints'")
    if len(doc.parts) != len(doc.basepoints):
        raise SpaceFileError("one basepoint per part")
    seen = [x for p in doc.parts for x in p]
    if sorted(seen) != sorted(doc.space.points):
        raise SpaceFileError("parts must partition the points")
    parts = tuple(doc.space.subspace(p) for p in doc.parts)
    for p, g in zip(doc.parts, doc.basepoints):
        if g not in p:
            raise SpaceFileError(f"basepoint {g!r} is outside its part")
    if doc.base_values is None:
        rebuilt = coarse_union(parts, doc.basepoints)
        if rebuilt.total.relabel(lambda x: x.split(":", 1)[1]) != doc.space:
            raise SpaceFileError("document lacks base_values and is not a default coarse union")
        values = rebuilt.base_values
    else:
        values = tuple(doc.base_values)
    return CoarseUnion(parts, tuple(values), tuple(doc.basepoints), doc.space,
                       tuple(tuple(p) for p in doc.parts))


def union_document(U) -> dict:
    return space_document(U.total, parts=[list(m) for m in U.members],
                          basepoints=[U.total_id(s, g) for s, g in enumerate(U.basepoints)],
                          base_values=list(U.base_values))
