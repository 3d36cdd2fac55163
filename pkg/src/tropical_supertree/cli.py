"""Command-line front end.

Exit status: 0 on success, 1 for bad input or a failed user-requested
check, 2 when an internal invariant breaks (a bug by construction).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Callable, Sequence

from .bigm import BigM, format_decimal, parse_rational
from .fermat_weber import InternalError, fermat_weber, stabilization_threshold
from .phylo import (
    PhyloTree,
    parse_newick_file,
    rooted_triplets,
    tree_to_ultrametric,
)
from .supertree import (
    SupertreeProblem,
    explicit_big_m,
    combined_taxa,
    extend_ultrametric,
    family_threshold,
    pareto_audit,
    topology_stability_probe,
    tropical_consensus,
    tropical_supertree,
)
from .tropical import PointConfig, format_point, parse_config


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _formatter(args) -> Callable[[BigM], str]:
    if getattr(args, "decimal", None) is not None:
        k = args.decimal
        return lambda x: format_decimal(x, k)
    return str


def _parse_nesting(text: str):
    if "<" not in text:
        raise UsageError(f"nesting {text!r} must look like 'a,b<c'")
    left, right = text.split("<", 1)
    X = [t for t in left.split(",") if t]
    Y = [t for t in right.split(",") if t]
    if not X or not Y:
        raise UsageError(f"nesting {text!r} has an empty side")
    return X, Y


def _read_trees(path: str) -> list[PhyloTree]:
    trees = parse_newick_file(_read(path))
    if not trees:
        raise UsageError(f"{path}: no trees found")
    return trees


def _resolve_at(value: str | None, trees) -> Fraction | None:
    if value is None:
        return None
    if value == "explicit":
        return explicit_big_m(trees)
    return parse_rational(value)


# -- subcommands --------------------------------------------------------------

def cmd_supertree(args, out, consensus: bool = False) -> int:
    trees = _read_trees(args.input)
    at = _resolve_at(args.at, trees)
    nestings = [_parse_nesting(s) for s in args.nesting]
    samples = [parse_rational(s) for s in args.probe.split(",") if s] if args.probe else []
    problem = SupertreeProblem(trees, at, args.rescale_heights)
    solve = tropical_consensus if consensus else tropical_supertree
    result = solve(problem, jobs=args.jobs)
    fmt = _formatter(args)

    report = []
    status = 0
    report.append(f"command: {'consensus' if consensus else 'supertree'}")
    report.append(f"trees: {len(trees)}")
    report.append("taxa: " + " ".join(result.taxa))
    report.append(f"mode: {'symbolic' if at is None else f'numeric M={at}'}")
    report.append(f"stabilization_threshold: {result.threshold if result.threshold is not None else 'n/a'}")
    report.append(f"explicit_M: {result.explicit_M if result.explicit_M is not None else 'n/a'}")
    report.append(f"objective: {fmt(result.objective)}")
    if result.fw is not None:
        report.append(f"tropical_vertices: {len(result.fw.vertices)}")
        report.append(f"covector_graph: {result.fw.graph}")
    report.append(
        "median: " + " ".join(f"{a},{b}={fmt(v)}" for (a, b), v in result.median.items())
    )
    report.append("triplets:" + "".join(f" {t}" for t in sorted(result.triplets())))
    if args.audit_pareto or nestings:
        audit = pareto_audit(problem.prepared_trees(), result.supertree, nestings)
        report.append(f"pareto: {'pass' if audit.passed else 'FAIL'} ({len(audit.entries)} checked)")
        report.extend("  " + line for line in audit.lines())
        if not audit.passed:
            status = 2
    if samples:
        probe = topology_stability_probe(SupertreeProblem(trees, None, args.rescale_heights), samples, jobs=args.jobs)
        verdict = "identical" if probe.identical else "MISMATCH"
        report.append(f"probe: {verdict} at M=" + ",".join(str(s) for s in probe.samples))
        report.extend("  " + m for m in probe.mismatches)
        if not probe.identical:
            status = 2
    # nothing reaches stdout until every requested check has run
    out.write(result.supertree.newick(fmt) + "\n")
    text = "".join(line + "\n" for line in report)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif args.audit_pareto or args.probe or args.nesting:
        sys.stderr.write(text)
    if status == 2:
        sys.stderr.write("error: structural check failed; see report\n")
    return status


def cmd_median(args, out) -> int:
    V = parse_config(_read(args.input))
    if args.at is not None:
        V = V.at(parse_rational(args.at))
    result = fermat_weber(V, jobs=args.jobs)
    fmt = _formatter(args)
    out.write("vertices:\n")
    for v in result.vertices:
        out.write("  " + format_point(v, fmt) + "\n")
    out.write("median: " + format_point(result.median, fmt) + "\n")
    out.write(f"objective: {fmt(result.objective)}\n")
    out.write(f"graph: {result.graph}\n")
    return 0


def cmd_threshold(args, out) -> int:
    if args.newick:
        trees = _read_trees(args.input)
        problem = SupertreeProblem(trees, None, args.rescale_heights)
        prepared = problem.prepared_trees()
        taxa = combined_taxa(prepared)
        rows = [extend_ultrametric(t, taxa).vector() for t in prepared]
        bound = family_threshold(PointConfig(rows)) if len(rows[0]) >= 2 else Fraction(0)
        out.write(f"stabilization: {bound if bound is not None else 'n/a'}\n")
        out.write(f"explicit_M: {explicit_big_m(prepared)}\n")
        return 0
    V = parse_config(_read(args.input))
    out.write(f"{stabilization_threshold(V.U, V.W)}\n")
    return 0


def cmd_matrix(args, out) -> int:
    trees = _read_trees(args.input)
    fmt = _formatter(args)
    taxa = combined_taxa(trees)
    dump = []
    for k, t in enumerate(trees, 1):
        D = extend_ultrametric(t, taxa) if args.extend else tree_to_ultrametric(t)
        if args.at is not None:
            D = D.at(parse_rational(args.at))
        dump.append({"tree": k, **D.as_dict(fmt)})
    out.write(json.dumps(dump, indent=2) + "\n")
    return 0


def cmd_triplets(args, out) -> int:
    trees = _read_trees(args.input)
    for k, t in enumerate(trees, 1):
        trip = sorted(rooted_triplets(tree_to_ultrametric(t)))
        out.write(f"tree {k}: " + " ".join(str(x) for x in trip) + "\n")
    return 0


def cmd_check_pareto(args, out) -> int:
    inputs = _read_trees(args.inputs)
    output = _read_trees(args.output)[0]
    nestings = [_parse_nesting(s) for s in args.nesting]
    audit = pareto_audit(inputs, output, nestings)
    for line in audit.lines():
        out.write(line + "\n")
    out.write(f"pareto: {'pass' if audit.passed else 'FAIL'} ({len(audit.entries)} checked)\n")
    return 0 if audit.passed else 1


# -- parser ---------------------------------------------------------------------

def _mode_flags(p, at_help):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--symbolic", action="store_true", help="keep M symbolic (default)")
    g.add_argument("--at", metavar="M0", help=at_help)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="tropical-supertree",
        description="Exact tropical Fermat-Weber medians and tropical supertrees.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, helptext in (
        ("supertree", "tropical supertree of Newick trees (one per line)"),
        ("consensus", "like supertree, but all trees must share one taxa set"),
    ):
        p = sub.add_parser(name, help=helptext, description=helptext)
        p.add_argument("input", help="Newick file, one ';'-terminated tree per line ('-' for stdin)")
        _mode_flags(p, "substitute the rational M0 for M; 'explicit' uses the explicit safe value of M")
        p.add_argument("--rescale-heights", action="store_true",
                       help="scale each tree to the largest input height instead of rejecting mismatches")
        p.add_argument("--audit-pareto", action="store_true",
                       help="check every triplet shared by all inputs appears in the output")
        p.add_argument("--nesting", action="append", default=[], metavar="X<Y",
                       help="extra nesting to audit, e.g. 'a,b<c' (repeatable)")
        p.add_argument("--probe", metavar="M1,M2,...",
                       help="compare symbolic result with numeric runs at these values of M")
        p.add_argument("--report", metavar="PATH", help="write diagnostics to this file")
        p.add_argument("--decimal", type=int, metavar="K", help="print lengths with K decimals")
        p.add_argument("--jobs", type=int, default=1, metavar="J", help="worker processes for edge probes")
        p.set_defaults(func=lambda a, o, c=(name == "consensus"): cmd_supertree(a, o, consensus=c))

    p = sub.add_parser("median", help="tropical median of a point configuration file")
    p.add_argument("input", help="one point per line, BigM literals separated by spaces")
    _mode_flags(p, "substitute the rational M0 for M before solving")
    p.add_argument("--decimal", type=int, metavar="K", help="print values with K decimals")
    p.add_argument("--jobs", type=int, default=1, metavar="J", help="worker processes for edge probes")
    p.set_defaults(func=cmd_median)

    p = sub.add_parser("threshold", help="stabilization bound of an affine family")
    p.add_argument("input", help="point configuration file, or Newick file with --newick")
    p.add_argument("--newick", action="store_true",
                   help="read trees; print the bound for their M-extended family and the explicit safe value of M")
    p.add_argument("--rescale-heights", action="store_true", help="as for supertree")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("matrix", help="dump tree ultrametrics as JSON")
    p.add_argument("input", help="Newick file")
    p.add_argument("--extend", action="store_true", help="extend to the combined taxa with M entries")
    p.add_argument("--at", metavar="M0", help="substitute M0 for M")
    p.add_argument("--decimal", type=int, metavar="K", help="print values with K decimals")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("triplets", help="rooted triplets of each tree")
    p.add_argument("input", help="Newick file")
    p.set_defaults(func=cmd_triplets)

    p = sub.add_parser("check-pareto", help="audit an output tree against input trees")
    p.add_argument("inputs", help="Newick file with the input trees")
    p.add_argument("output", help="Newick file whose first tree is audited")
    p.add_argument("--nesting", action="append", default=[], metavar="X<Y",
                   help="extra nesting to audit, e.g. 'a,b<c' (repeatable)")
    p.set_defaults(func=cmd_check_pareto)
    return parser


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    if getattr(args, "decimal", None) is not None and args.decimal < 0:
        parser.error("--decimal must be nonnegative")
    try:
        return args.func(args, out)
    except InternalError as exc:
        sys.stderr.write(f"internal error: {exc}\n")
        return 2
    except (UsageError, ValueError, KeyError, OSError, UnicodeDecodeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"error: {msg}\n")
        return 1


def main() -> None:
    sys.exit(run())
