"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 bad input, 3 exhausted bounds or budgets.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from .errors import BudgetExceeded, PfoError, StepBudgetExceeded, TooLarge
from .evaluation import EvalStats, evaluate, parse_structure
from .formula import Formula, flip_polarity, format_formula, nnf, parse_fo, width
from .minimize import minimize, rewrite_equiv
from .normalform import normalize
from .oracles import semantically_equiv
from .regions import format_region_tree, organize, region_hypergraph, regions
from .rules import format_trace
from .treewidth import EXACT_THRESHOLD, read_gr, treewidth, validate, write_gr, write_td

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_BOUNDS = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_formula(path: str) -> Formula:
    """Read a formula file; ``#`` starts a comment and negation is pushed to atoms."""
    lines = [line.split("#", 1)[0] for line in read_text(path).splitlines()]
    return nnf(parse_fo("\n".join(lines)))


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# --- per-file workers (top-level so a process pool can pickle them) ------------------------


def _minimize_one(path, mode, threshold):
    f = load_formula(path)
    g, report = minimize(f, mode, threshold)
    return format_formula(g), report.to_json(), report.normal_form_trace


def _normalize_one(path):
    f = load_formula(path)
    nf = normalize(f)
    return format_formula(nf.formula), nf.trace, nf.reports


def _width_one(path):
    return str(width(load_formula(path)))


def _map(fn, items, jobs):
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, *zip(*items)))
    return [fn(*args) for args in items]


def _emit(paths, outputs):
    if len(paths) == 1:
        sys.stdout.write(outputs[0] + "\n")
    else:
        for p, out in zip(paths, outputs):
            sys.stdout.write(f"{p}: {out}\n")


# --- commands ---------------------------------------------------------------------------------


def cmd_minimize(args):
    mode = "heuristic" if args.heuristic_tw else "exact"
    results = _map(_minimize_one, [(p, mode, args.exact_threshold) for p in args.files], args.jobs)
    _emit(args.files, [r[0] for r in results])
    if args.trace:
        for p, r in zip(args.files, results):
            if len(args.files) > 1:
                sys.stdout.write(f"# trace {p}\n")
            sys.stdout.write(format_trace(r[2]))
    if args.report:
        reports = [dict(r[1], file=p) for p, r in zip(args.files, results)]
        payload = reports[0] if len(reports) == 1 else {"schema": 1, "reports": reports}
        _write(args.report, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_normalize(args):
    results = _map(_normalize_one, [(p,) for p in args.files], args.jobs)
    _emit(args.files, [r[0] for r in results])
    for p, (_, trace, reports) in zip(args.files, results):
        if args.trace:
            if len(args.files) > 1:
                sys.stdout.write(f"# trace {p}\n")
            sys.stdout.write(format_trace(trace))
        if args.potentials:
            if len(args.files) > 1:
                sys.stdout.write(f"# potentials {p}\n")
            sys.stdout.write("step,rule,y_potential,yprime_potential\n")
            for r in reports:
                sys.stdout.write(f"{r.step_index},{r.rule},{r.y_potential},{r.yprime_potential}\n")
    return EXIT_OK


def cmd_width(args):
    _emit(args.files, _map(_width_one, [(p,) for p in args.files], args.jobs))
    return EXIT_OK


def cmd_regions(args):
    f = load_formula(args.file)
    t = organize(f)
    sys.stdout.write(format_region_tree(t))
    if args.gr_dir:
        os.makedirs(args.gr_dir, exist_ok=True)
        for i, r in enumerate(regions(t)):
            h = flip_polarity(r.skeleton) if r.polarity == "forall-or" else r.skeleton
            _write(os.path.join(args.gr_dir, f"region{i}.gr"), write_gr(region_hypergraph(h)))
    return EXIT_OK


def cmd_tw(args):
    h = read_gr(read_text(args.file))
    mode = "heuristic" if args.heuristic else "exact"
    result = treewidth(h, mode, args.exact_threshold)
    assert not validate(h, result.decomposition)
    text = write_td(h, result.decomposition)
    if args.out:
        _write(args.out, text)
        sys.stdout.write(f"{result.width}\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_eval(args):
    f = load_formula(args.formula)
    s = parse_structure(read_text(args.structure))
    rel = evaluate(f, s)
    if args.rows:
        sys.stdout.write(" ".join(rel.schema) + "\n")
        for row in rel.sorted_rows():
            sys.stdout.write(" ".join(map(str, row)) + "\n")
    elif args.count or f.free:
        sys.stdout.write(f"{len(rel.rows)}\n")
    else:
        sys.stdout.write("true\n" if rel.rows else "false\n")
    return EXIT_OK


def cmd_equiv(args):
    f1, f2 = load_formula(args.first), load_formula(args.second)
    if args.semantic:
        same = semantically_equiv(f1, f2, args.max_domain)
    else:
        same = rewrite_equiv(f1, f2)
    sys.stdout.write("equivalent\n" if same else "not equivalent\n")
    return EXIT_OK


def _time_eval(f, s, repeat):
    best, rel = None, None
    for _ in range(repeat):
        start = time.perf_counter()
        rel = evaluate(f, s)
        elapsed = time.perf_counter() - start
        best = elapsed if best is None else min(best, elapsed)
    return best, rel


def bench(f: Formula, s, repeat: int = 3, mode: str = "exact") -> dict:
    """Time evaluation of ``f`` and of its minimized form on ``s``."""
    g, _ = minimize(f, mode)
    t_before, r_before = _time_eval(f, s, repeat)
    t_after, r_after = _time_eval(g, s, repeat)
    stats_before, stats_after = EvalStats(), EvalStats()
    evaluate(f, s, stats_before)
    evaluate(g, s, stats_after)
    return {
        "schema": 1,
        "width_before": width(f),
        "width_after": width(g),
        "time_before_ms": round(t_before * 1000, 3),
        "time_after_ms": round(t_after * 1000, 3),
        "speedup": round(t_before / max(t_after, 1e-9), 2),
        "max_rows_before": stats_before.max_rows,
        "max_rows_after": stats_after.max_rows,
        "results_agree": r_before.rows == r_after.rows,
        "minimized": format_formula(g),
    }


def cmd_bench(args):
    f = load_formula(args.formula)
    s = parse_structure(read_text(args.structure))
    report = bench(f, s, args.repeat, "heuristic" if args.heuristic_tw else "exact")
    _write(args.report, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pfowidth", description="Minimum-width rewriting of positive first-order formulas.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tw_flags(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--exact-tw", action="store_true", help="exact treewidth (default)")
        g.add_argument("--heuristic-tw", action="store_true", help="min-fill heuristic decompositions")
        sp.add_argument("--exact-threshold", type=int, default=EXACT_THRESHOLD, metavar="N")

    sp = sub.add_parser("minimize", help="rewrite into minimum width")
    sp.add_argument("files", nargs="+", help="formula files, '-' for stdin")
    tw_flags(sp)
    sp.add_argument("--trace", action="store_true", help="print the normal-form trace")
    sp.add_argument("--report", metavar="PATH", help="write a JSON report ('-' for stdout)")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(run=cmd_minimize)

    sp = sub.add_parser("normalize", help="normal form under pushdown, splitdown and removal")
    sp.add_argument("files", nargs="+")
    sp.add_argument("--trace", action="store_true")
    sp.add_argument("--potentials", action="store_true", help="CSV of per-step potentials")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(run=cmd_normalize)

    sp = sub.add_parser("width", help="print the width")
    sp.add_argument("files", nargs="+")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(run=cmd_width)

    sp = sub.add_parser("regions", help="dump the region tree")
    sp.add_argument("file")
    sp.add_argument("--gr-dir", metavar="DIR", help="write each region hypergraph as DIR/region<i>.gr")
    sp.set_defaults(run=cmd_regions)

    sp = sub.add_parser("tw", help="tree decomposition of a .gr file")
    sp.add_argument("file")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true")
    g.add_argument("--heuristic", action="store_true")
    sp.add_argument("--exact-threshold", type=int, default=EXACT_THRESHOLD, metavar="N")
    sp.add_argument("--out", metavar="FILE", help="write the .td here and print only the width")
    sp.set_defaults(run=cmd_tw)

    sp = sub.add_parser("eval", help="evaluate on a structure")
    sp.add_argument("formula")
    sp.add_argument("structure")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--count", action="store_true")
    g.add_argument("--rows", action="store_true")
    sp.set_defaults(run=cmd_eval)

    sp = sub.add_parser("equiv", help="decide rewrite equivalence (or bounded semantic equivalence)")
    sp.add_argument("first")
    sp.add_argument("second")
    sp.add_argument("--semantic", action="store_true")
    sp.add_argument("--max-domain", type=int, default=2, metavar="K")
    sp.set_defaults(run=cmd_equiv)

    sp = sub.add_parser("bench", help="time evaluation before and after minimization")
    sp.add_argument("formula")
    sp.add_argument("structure")
    sp.add_argument("--repeat", type=int, default=3)
    sp.add_argument("--report", metavar="PATH", default="-")
    tw_flags(sp)
    sp.set_defaults(run=cmd_bench)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.run(args)
    except (BudgetExceeded, StepBudgetExceeded, TooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUNDS
    except (PfoError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main():
    sys.exit(run())
