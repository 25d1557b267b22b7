"""Command line interface: ``hairygraphs <command> ...``.

Exit codes: 0 success, 1 certified negative or failed invariant, 2 usage or
parse error.  JSON reports are byte-identical for identical flags apart from
the ``wall_time`` field.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import gallery
from .diffcomplex import ComplexContext, UsageError, differential_matrix, hair_constants
from .exactla import ConsistencyError, homology_dim, rank, rank_cross_check
from .graphcore import (
    GraphSum,
    ResourceError,
    SliceParams,
    StructuralError,
    enumerate_basis,
    format_graph,
    graph_from_json,
    parse_graph,
)


class CliError(Exception):
    """Bad flags or unreadable input (exit code 2)."""


# ---------------------------------------------------------------------------
# inputs


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(f"not a rational number: {text!r}") from exc


def _named(name: str, m: int, n: int) -> GraphSum | None:
    if name in gallery.NAMED:
        return GraphSum.of(gallery.NAMED[name](m, n))
    return None


def _parse_lines(text: str, m: int, n: int) -> GraphSum:
    out = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        coeff = Fraction(1)
        if not line.startswith("G"):
            head, _, rest = line.partition(" ")
            if not rest:
                raise CliError(f"not a gallery name, file or graph: {line!r}; names are {sorted(gallery.NAMED)}")
            coeff = _fraction(head.rstrip("*"))
            line = rest.strip()
        g = parse_graph(line)
        out = out if out is not None else GraphSum(g.m, g.n)
        out.add_graph(g, coeff)
    if out is None:
        raise CliError("no graphs in input")
    return out


def load_sum(ref: str, m: int, n: int) -> GraphSum:
    """A graph or graph sum from a file, a gallery name or inline text.

    ``ref`` may carry a rational prefix, as in ``1/3*K4_hair``.
    """
    coeff = Fraction(1)
    head, star, rest = ref.partition("*")
    if star and not Path(ref).exists():
        try:
            coeff = Fraction(head)
            ref = rest
        except (ValueError, ZeroDivisionError):
            pass
    try:
        named = _named(ref, m, n)
        if named is not None:
            return named.scaled(coeff)
        path = Path(ref)
        text = path.read_text() if path.exists() else ref
        text = text.strip()
        if text.startswith("{"):
            data = json.loads(text)
            x = GraphSum.from_json(data) if "terms" in data else GraphSum.of(graph_from_json(data))
        else:
            x = _parse_lines(text, m, n)
    except (StructuralError, ValueError, KeyError) as exc:
        raise CliError(f"cannot read graph input {ref!r}: {exc}") from exc
    return x.scaled(coeff)


# ---------------------------------------------------------------------------
# output


def _emit(args, report: dict, text_lines: list[str]) -> None:
    args.report = report
    args.text_lines = text_lines


def _sum_lines(x: GraphSum) -> list[str]:
    if not x:
        return ["0"]
    return [f"{c} {format_graph(g)}" for g, c in x.items()]


def _base_report(args, command: str) -> dict:
    return {"command": command, "argv": list(args.argv)}


# ---------------------------------------------------------------------------
# commands


def _slice_from_args(args) -> SliceParams:
    if (args.edges is None) == (args.loops is None):
        raise CliError("give exactly one of --edges and --loops")
    edges = args.edges if args.edges is not None else args.loops + args.vertices - 1
    if args.vertices < 0 or edges < 0 or args.hairs < 0:
        raise CliError("slice bounds must be nonnegative")
    return SliceParams(
        args.vertices,
        edges,
        args.hairs,
        connected=not args.disconnected,
        min_valence=args.min_valence,
        acyclic=args.acyclic,
        directed=args.directed or args.acyclic,
        oriented_quotient=args.oriented_quotient,
        mc_shape=args.mc_shape,
        tadpoles=args.tadpoles,
    )


def cmd_basis(args) -> int:
    params = _slice_from_args(args)
    basis = enumerate_basis(params, args.m, args.n)
    report = _base_report(args, "basis")
    report.update(
        {
            "context": {"m": args.m, "n": args.n},
            "slice": {"vertices": params.vertices, "edges": params.edges, "hairs": params.hairs},
            "graphs": [format_graph(g) for g in basis.graphs],
            "count": len(basis.graphs),
        }
    )
    _emit(args, report, [format_graph(g) for g in basis.graphs] + [f"count: {len(basis.graphs)}"])
    return 0


def _mc_for(trunc: int, lam: Fraction):
    from .structures import mc_element_2loop, mc_extend

    mc = mc_element_2loop(lam)
    if trunc == 4 and lam:
        mc, _ = mc_extend(mc, 4)
    return mc


def cmd_bracket(args) -> int:
    from .structures import express_mod_exact, is_exact, shoikhet_bracket, std_bracket

    x = load_sum(args.g1, args.m, args.n)
    y = load_sum(args.g2, args.m, args.n)
    if x.context != y.context:
        raise CliError("the two inputs live in different (m, n) contexts")
    lam = _fraction(args.lam)
    if args.model == "std":
        out = std_bracket(x, y)
    else:
        out = shoikhet_bracket(x, y, _mc_for(args.trunc_loops, lam))
    report = _base_report(args, "bracket")
    report.update(
        {
            "context": {"m": x.m, "n": x.n},
            "model": args.model,
            "trunc_loops": args.trunc_loops,
            "lambda": str(lam),
            "inputs": [x.to_json(), y.to_json()],
            "result": out.to_json(),
        }
    )
    lines = _sum_lines(out)
    code = 0
    if args.mod_exact:
        target = load_sum(args.mod_exact, x.m, x.n)
        policy = args.policy
        cert = is_exact(out - target, policy)
        report["mod_exact"] = {"target": target.to_json(), "certificate": cert.to_json()}
        # the coefficient actually realized, for the record
        if len(target) == 1:
            (g, _), = target.items()
            fit = express_mod_exact(out, [GraphSum.of(g)], policy)
            report["mod_exact"]["best_fit"] = dict(fit.to_json(), graph=format_graph(g))
            if fit.feasible:
                lines.append(f"best fit: {fit.coeffs[0]} {format_graph(g)} modulo exact terms")
        lines.append(f"congruent to target modulo exact terms: {cert.feasible}")
        code = 0 if cert.feasible else 1
    _emit(args, report, lines)
    return code


def _homology_slice(args) -> tuple[SliceParams, ComplexContext]:
    if args.variant == "gcor":
        m, n = 0, args.n if args.n is not None else 2
        ctx = ComplexContext(m, n, 1, "plain_directed_acyclic")
    elif args.variant == "gc":
        m, n = 0, args.n if args.n is not None else 2
        ctx = ComplexContext(m, n, args.min_valence, "plain_undirected")
    else:
        m, n = args.m, args.n if args.n is not None else 3
        ctx = ComplexContext(m, n, args.min_valence, "hairy")
    hairs = args.hairs if ctx.variant == "hairy" else 0
    if args.vertices is not None:
        if args.edges is None:
            raise CliError("--vertices needs --edges")
        v, e = args.vertices, args.edges
    else:
        if args.loops is None or args.degree is None:
            raise CliError("give --vertices/--edges or --loops/--degree")
        # with e = loops + v - 1 the degree is (v - 1) + (1 - n) loops + hair terms
        c, d = hair_constants(m, n) if ctx.variant == "hairy" else (0, 0)
        v = args.degree - (1 - n) * args.loops - c * hairs - d + 1
        e = args.loops + v - 1
    if v < 0 or e < 0:
        raise CliError("the requested slice is empty")
    directed = ctx.variant == "plain_directed_acyclic"
    params = SliceParams(
        v, e, hairs, min_valence=args.min_valence, acyclic=directed, directed=directed, mc_shape=args.mc_shape
    )
    return params, ctx


def _neighbour(params: SliceParams, dv: int) -> SliceParams:
    return SliceParams(
        params.vertices + dv,
        params.edges + dv,
        params.hairs,
        params.connected,
        params.min_valence,
        params.acyclic,
        params.directed,
        params.oriented_quotient,
        params.mc_shape,
        params.tadpoles,
    )


def cmd_homology(args) -> int:
    params, ctx = _homology_slice(args)
    if params.vertices < 1:
        raise CliError("the slice must have at least one vertex")
    here = enumerate_basis(params, ctx.m, ctx.n)
    below = enumerate_basis(_neighbour(params, -1), ctx.m, ctx.n) if params.vertices > 1 else None
    above = enumerate_basis(_neighbour(params, 1), ctx.m, ctx.n)
    d_out = differential_matrix(here, above, "full", ctx)
    if below is not None and below.graphs:
        d_in = differential_matrix(below, here, "full", ctx)
    else:
        from .exactla import SparseMat

        d_in = SparseMat(len(here.graphs), 0, {})
    dim = homology_dim(d_in, d_out)
    checks = {"d_in": rank_cross_check(d_in), "d_out": rank_cross_check(d_out)}
    report = _base_report(args, "homology")
    report.update(
        {
            "context": {"m": ctx.m, "n": ctx.n, "variant": ctx.variant, "valence_policy": ctx.valence_policy},
            "slice": {"vertices": params.vertices, "edges": params.edges, "hairs": params.hairs},
            "dims": {"below": len(below.graphs) if below else 0, "here": len(here.graphs), "above": len(above.graphs)},
            "ranks": {"d_in": rank(d_in), "d_out": rank(d_out)},
            "rank_checks": checks,
            "homology_dim": dim,
        }
    )
    lines = [
        f"slice v={params.vertices} e={params.edges} h={params.hairs} ({ctx.variant}, m={ctx.m}, n={ctx.n})",
        f"dims below/here/above: {report['dims']['below']} {report['dims']['here']} {report['dims']['above']}",
        f"rank d_in={report['ranks']['d_in']} d_out={report['ranks']['d_out']}",
        f"homology dimension: {dim}",
    ]
    _emit(args, report, lines)
    return 0


def cmd_mc(args) -> int:
    from .structures import mc_element_2loop, mc_extend

    lam = _fraction(args.lam)
    report = _base_report(args, "mc")
    if args.action == "check":
        loops = args.loops
        mc = mc_element_2loop(lam)
        if loops > 2:
            mc, _ = mc_extend(mc, loops)
        checks = {}
        ok = True
        for g in range(2, loops + 1):
            res = mc.closure_residual(g)
            ok = ok and not res
            checks[str(g)] = {"residual": res.to_json(), "zero": not res}
        report.update({"lambda": str(lam), "loops": loops, "element": mc.to_json(), "closure": checks, "ok": ok})
        lines = [f"loop {g}: residual {'0' if c['zero'] else 'NONZERO'}" for g, c in checks.items()]
        _emit(args, report, lines)
        return 0 if ok else 1
    mc = mc_element_2loop(lam)
    try:
        ext, cert = mc_extend(mc, args.to_loops)
    except ConsistencyError as exc:
        report.update({"lambda": str(lam), "feasible": False, "reason": str(exc)})
        _emit(args, report, [f"extension infeasible: {exc}"])
        return 1
    residual = ext.closure_residual(args.to_loops)
    report.update(
        {
            "lambda": str(lam),
            "feasible": True,
            "element": ext.to_json(),
            "certificate": {str(k): s.to_json() for k, s in sorted(cert.slices.items())} if cert else {},
            "residual": residual.to_json(),
            "residual_zero": not residual,
        }
    )
    new = ext.terms_by_loop.get(args.to_loops, GraphSum(0, 2))
    lines = [f"loop {args.to_loops} term: {len(new)} graphs", f"closure residual: {'0' if not residual else 'NONZERO'}"]
    _emit(args, report, lines)
    return 0 if not residual else 1


def cmd_cup(args) -> int:
    from .structures import cup_one_hair

    x = load_sum(args.x, args.m, args.n)
    x1 = load_sum(args.x1, args.m, args.n)
    out = cup_one_hair(x, x1, args.max_order)
    report = _base_report(args, "cup")
    report.update({"context": {"m": x.m, "n": x.n}, "max_order": args.max_order, "inputs": [x.to_json(), x1.to_json()], "result": out.to_json()})
    _emit(args, report, _sum_lines(out))
    return 0


def cmd_verify(args) -> int:
    from .verify import run_suite

    results = run_suite(jobs=args.jobs, seed=args.seed, full=args.full, only=args.only)
    ok = all(r["ok"] for r in results)
    # the job count is left out so reports do not depend on it
    report = {"command": "verify", "seed": args.seed, "full": args.full, "only": args.only, "checks": results, "ok": ok}
    lines = [f"{'PASS' if r['ok'] else 'FAIL'} {r['name']}: {r['summary']}" for r in results]
    for r in results:
        if not r["ok"] and r.get("witness") is not None:
            lines.append(f"  witness for {r['name']}: {json.dumps(r['witness'], sort_keys=True)}")
    _emit(args, report, lines)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 2 with a one-line message
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(2)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--m", type=int, default=1)
    common.add_argument("--n", type=int, default=None)

    p = _Parser(prog="hairygraphs", description="Exact computations in hairy graph complexes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("basis", parents=[common], help="list a basis slice")
    b.add_argument("--vertices", type=int, required=True)
    b.add_argument("--edges", type=int)
    b.add_argument("--loops", type=int)
    b.add_argument("--hairs", type=int, default=0)
    b.add_argument("--connected", action="store_true", help="connected graphs only (the default)")
    b.add_argument("--disconnected", action="store_true", help="allow disconnected graphs")
    b.add_argument("--min-valence", type=int, choices=(1, 3), default=1)
    b.add_argument("--acyclic", action="store_true")
    b.add_argument("--directed", action="store_true")
    b.add_argument("--oriented-quotient", action="store_true")
    b.add_argument("--mc-shape", action="store_true")
    b.add_argument("--tadpoles", action="store_true")
    b.set_defaults(func=cmd_basis)

    br = sub.add_parser("bracket", parents=[common], help="bracket of two graph sums")
    br.add_argument("g1")
    br.add_argument("g2")
    br.add_argument("--model", choices=("std", "shoikhet"), default="std")
    br.add_argument("--trunc-loops", type=int, choices=(2, 4), default=2)
    br.add_argument("--lambda", dest="lam", default="1")
    br.add_argument("--mod-exact", metavar="TARGET")
    br.add_argument("--policy", type=int, choices=(1, 3), default=None, help="valence policy for --mod-exact")
    br.set_defaults(func=cmd_bracket)

    h = sub.add_parser("homology", parents=[common], help="homology of one slice")
    h.add_argument("--variant", choices=("hairy", "gcor", "gc"), default="hairy")
    h.add_argument("--vertices", type=int)
    h.add_argument("--edges", type=int)
    h.add_argument("--hairs", type=int, default=0)
    h.add_argument("--loops", type=int)
    h.add_argument("--degree", type=int)
    h.add_argument("--min-valence", type=int, choices=(1, 3), default=1)
    h.add_argument("--mc-shape", action="store_true")
    h.set_defaults(func=cmd_homology)

    mc = sub.add_parser("mc", parents=[common], help="Maurer-Cartan element of the oriented complex")
    mcs = mc.add_subparsers(dest="action", required=True, parser_class=_Parser)
    chk = mcs.add_parser("check", parents=[common])
    chk.add_argument("--loops", type=int, choices=(2, 3, 4), default=2)
    chk.add_argument("--lambda", dest="lam", default="1")
    ext = mcs.add_parser("extend", parents=[common])
    ext.add_argument("--to-loops", type=int, choices=(3, 4), default=4)
    ext.add_argument("--lambda", dest="lam", default="1")
    mc.set_defaults(func=cmd_mc)

    c = sub.add_parser("cup", parents=[common], help="cup product with a one-hair graph")
    c.add_argument("x")
    c.add_argument("x1")
    c.add_argument("--max-order", type=int, default=4)
    c.set_defaults(func=cmd_cup)

    v = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--seed", type=int, default=20240611)
    v.add_argument("--full", action="store_true", help="the full delta squared range (minutes)")
    v.add_argument("--only", action="append", help="run only the named check (repeatable)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    if getattr(args, "n", None) is None and args.command not in ("homology",):
        args.n = 3
    start = time.perf_counter()
    try:
        code = args.func(args)
    except (CliError, UsageError, StructuralError, ResourceError) as exc:
        sys.stderr.write(f"hairygraphs: error: {exc}\n")
        return 2
    wall = round(time.perf_counter() - start, 3)
    if args.format == "json":
        report = dict(args.report, wall_time=wall)
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write("\n".join(args.text_lines) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
