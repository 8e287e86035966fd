"""Command line front end: ``ultracoarse <subcommand> ...``.

Exit status is 0 on success, 1 when a check fails or an input is rejected,
and 2 on usage errors.  All output goes to stdout and is deterministic.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import io as sio
from .cu import build_pu_prefix, dset_index, embed_into_cu, embed_into_pu
from .fu import EmbeddingError, build_fu, build_fu_literal, embed_into_fu, enumerate_ultrametrics
from .groups import CapacityError, embed_into_group
from .metric import (
    DSet,
    MalformedSpaceError,
    NotIntegralError,
    NotUltrametricError,
    chain_ultrametric,
    format_dist,
    validate_isosceles,
    validate_metric,
    validate_ultrametric,
)
from .resolution import PreconditionError, lego_decompose, to_dot, to_newick
from .splice import SpliceSpec, coarse_union, splice_metric


class _Failure(Exception):
    """Input rejected by a library check; maps to exit status 1."""


def _dset(text: str) -> DSet:
    try:
        return DSet.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


# ---- subcommands ----------------------------------------------------------

def cmd_validate(args) -> int:
    M = sio.parse_space(args.space).space
    reports = [validate_metric(M)]
    if args.ultrametric:
        reports.append(validate_ultrametric(M))
    if args.isosceles:
        reports.append(validate_isosceles(M))
    sys.stdout.write("".join(r.to_text() for r in reports))
    return 0 if all(r.ok for r in reports) else 1


def cmd_chain(args) -> int:
    M = sio.parse_space(args.space).space
    sys.stdout.write(sio.dump_space(chain_ultrametric(M)))
    return 0


def cmd_decompose(args) -> int:
    M = sio.parse_space(args.space).space
    tree = lego_decompose(M)
    sys.stdout.write(to_dot(tree) if args.dot else to_newick(tree) + "\n")
    return 0


def cmd_fu_build(args) -> int:
    fu = (build_fu_literal if args.literal else build_fu)(args.m, args.D)
    sys.stdout.write(sio.dump_space(fu.space, labels=fu.labels))
    return 0


def cmd_fu_embed(args) -> int:
    X = sio.parse_space(args.space).space
    mapping = embed_into_fu(X, args.m, args.D)
    doc = {"m": args.m, "D": list(args.D.values), "embedding": {x: mapping[x] for x in X.points}}
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_cu_embed(args) -> int:
    M = sio.parse_space(args.space).space
    emb = embed_into_cu(M)
    lines = [f"net: {' '.join(emb.net)}",
             f"centre: {emb.centre}",
             f"snap_radius: {format_dist(emb.snap_radius)}",
             f"net_isometric: {str(emb.net_isometric).lower()}"]
    for x in M.points:
        p = emb.points[x]
        coords = ",".join(str(c) for c in p.address.coords)
        lines.append(f"{x}\tlevel={p.level}\tcoords=({coords})\tvia={emb.snap[x]}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_pu_build(args) -> int:
    P = build_pu_prefix(args.N)
    extra = {"blocks": [{"block": i, "m": m, "D": list(dset_index(n).values)}
                        for i, (m, n) in enumerate(P.pairs, start=1)],
             "radii": list(P.radii)}
    sys.stdout.write(sio.render(sio.space_document(P.total, projection=P.projection, **extra)))
    return 0


def cmd_pu_embed(args) -> int:
    U = sio.union_from_document(sio.parse_space(args.union))
    emb = embed_into_pu(U)
    doc = {"blocks": list(emb.blocks),
           "within_part_exact": emb.within_part_exact,
           "embedding": {x: emb.mapping[x] for x in U.total.points}}
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_union(args) -> int:
    parts = [sio.parse_space(p).space for p in args.parts]
    basepoints = args.basepoints.split(",") if args.basepoints else None
    U = coarse_union(parts, basepoints)
    sys.stdout.write(sio.render(sio.union_document(U)))
    return 0


def cmd_splice(args) -> int:
    try:
        with open(args.spec, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise _Failure(f"cannot read {args.spec}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise _Failure(f"malformed JSON: {exc}") from None
    for key in ("base", "fibers", "section"):
        if key not in raw:
            raise _Failure(f"splice document needs {key!r}")
    base = sio.space_from_json(raw["base"], "base")
    fibers = {str(t): sio.space_from_json(f, f"fiber {t}") for t, f in raw["fibers"].items()}
    section = {str(t): str(g) for t, g in raw["section"].items()}
    try:
        spec = SpliceSpec(base, fibers, section)
    except ValueError as exc:
        raise _Failure(str(exc)) from None
    sys.stdout.write(sio.dump_space(splice_metric(spec)))
    return 0


def cmd_group_embed(args) -> int:
    M = sio.parse_space(args.space).space
    emb = embed_into_group(M)
    lines = ["filtration: " + " ".join(f"({a},{d})" for a, d in emb.filtration.pairs())]
    for x in M.points:
        lines.append(f"{x}\t{{{','.join(str(c) for c in emb.mapping[x].support())}}}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_enumerate(args) -> int:
    cat = enumerate_ultrametrics(args.m, args.D)
    head = {"m": cat.m, "D": list(cat.D.values), "count": len(cat.spaces)}
    lines = [json.dumps(head)] + [json.dumps(sio.space_to_json(S)) for S in cat.spaces]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


# ---- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ultracoarse",
                                description="Exact tools for finite ultrametric spaces.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    s = sub.add_parser("validate", help="check the metric axioms")
    s.add_argument("space")
    s.add_argument("--ultrametric", action="store_true", help="also check the strong triangle inequality")
    s.add_argument("--isosceles", action="store_true", help="also check that every triangle is isosceles")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("chain", help="chain ultrametric of a space")
    s.add_argument("space")
    s.set_defaults(func=cmd_chain)

    s = sub.add_parser("decompose", help="lego tree of an ultrametric space")
    s.add_argument("space")
    fmt = s.add_mutually_exclusive_group()
    fmt.add_argument("--newick", action="store_true", help="Newick text (default)")
    fmt.add_argument("--dot", action="store_true", help="Graphviz DOT")
    s.set_defaults(func=cmd_decompose)

    fu = sub.add_parser("fu", help="finite universal spaces FU(m, D)")
    fsub = fu.add_subparsers(dest="fu_command", metavar="ACTION")
    fsub.required = True
    s = fsub.add_parser("build", help="materialise FU(m, D)")
    s.add_argument("m", type=_positive)
    s.add_argument("D", type=_dset, help="comma separated integers; 0 is implied")
    s.add_argument("--literal", action="store_true", help="use the undersized literal recursion")
    s.set_defaults(func=cmd_fu_build)
    s = fsub.add_parser("embed", help="embed a D-ultrametric space into FU(m, D)")
    s.add_argument("space")
    s.add_argument("m", type=_positive)
    s.add_argument("D", type=_dset)
    s.set_defaults(func=cmd_fu_embed)

    s = sub.add_parser("cu-embed", help="coarse embedding into CU")
    s.add_argument("space")
    s.set_defaults(func=cmd_cu_embed)

    pu = sub.add_parser("pu", help="the proper universal space PU")
    psub = pu.add_subparsers(dest="pu_command", metavar="ACTION")
    psub.required = True
    s = psub.add_parser("build", help="first N blocks of PU")
    s.add_argument("N", type=_positive)
    s.set_defaults(func=cmd_pu_build)
    s = psub.add_parser("embed", help="embed a union file into PU")
    s.add_argument("union")
    s.set_defaults(func=cmd_pu_embed)

    s = sub.add_parser("union", help="coarse disjoint union of space files")
    s.add_argument("parts", nargs="+")
    s.add_argument("--basepoints", help="comma separated basepoint per part")
    s.set_defaults(func=cmd_union)

    s = sub.add_parser("splice", help="splice fibres given as one JSON document")
    s.add_argument("spec")
    s.set_defaults(func=cmd_splice)

    s = sub.add_parser("group-embed", help="embed into the Z/2 group with an automatic filtration")
    s.add_argument("space")
    s.set_defaults(func=cmd_group_embed)

    s = sub.add_parser("enumerate", help="D-ultrametric spaces with at most m points, up to isometry")
    s.add_argument("m", type=_positive)
    s.add_argument("D", type=_dset)
    s.set_defaults(func=cmd_enumerate)
    return p


_REJECTED = (_Failure, sio.SpaceFileError, MalformedSpaceError, NotIntegralError, NotUltrametricError,
             PreconditionError, EmbeddingError, CapacityError, ValueError)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _REJECTED as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
