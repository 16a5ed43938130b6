"""Command-line front end.

Exit codes: 0 success, 2 bad input or arguments, 3 solver error,
4 architectures disagree.
"""
import argparse
import io
import itertools
import sys

import numpy as np

from limid.compile import compile_limid
from limid.engine import HuginCannotRetractError
from limid.generate import GeneratorError, random_limid
from limid.model import (
    LimidError, LimidSemanticError, LimidSyntaxError, load_limid, serialize_limid,
)
from limid.oracle import DEFAULT_CELL_CAP, brute_optimal
from limid.spu import ARCH_LABELS, ARCHITECTURES, solve
from limid.tables import TableError

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_DISAGREE = 0, 2, 3, 4
CSV_HEADER = "Algorithm,Sums,Mults,Divs,Subs,Total"


class Disagreement(Exception):
    pass


def _fmt(x):
    return f"{x:.12g}"


def _counter_row(label, ctr):
    return ",".join([label] + [str(v) for v in ctr.as_tuple()] + [str(ctr.total)])


def _configs(limid, parents):
    return itertools.product(*[range(limid.card(p)) for p in parents])


def _strategy_lines(limid, strategy):
    lines = []
    for d in limid.decisions:
        pol = strategy[d]
        pa = pol.parents
        head = ", ".join(limid.name(p) for p in pa) or "none"
        lines.append(f"decision {limid.name(d)} (parents: {head})")
        for cfg, act in zip(_configs(limid, pa), pol.actions()):
            key = " ".join(f"{limid.name(p)}={s}" for p, s in zip(pa, cfg)) or "(always)"
            lines.append(f"  {key} -> {int(act)}")
    return lines


def _strategy_csv(limid, strategy):
    rows = ["Decision,Configuration,Action"]
    for d in limid.decisions:
        pol = strategy[d]
        for cfg, act in zip(_configs(limid, pol.parents), pol.actions()):
            key = ";".join(f"{limid.name(p)}={s}" for p, s in zip(pol.parents, cfg))
            rows.append(f"{limid.name(d)},{key},{int(act)}")
    return rows


def render_solve(limid, result, report="text"):
    label = ARCH_LABELS[result.arch]
    if report == "csv":
        rows = _strategy_csv(limid, result.strategy)
        rows += ["", CSV_HEADER, _counter_row(label, result.report_counter),
                 _counter_row("Initialization", result.counters["init"]),
                 _counter_row("Readout", result.counters["readout"]), "", f"EU,{_fmt(result.eu)}"]
        return "\n".join(rows) + "\n"
    lines = _strategy_lines(limid, result.strategy)
    c = result.report_counter
    lines.append(f"EU {_fmt(result.eu)}")
    lines.append(f"architecture {label} iterations {result.iterations} messages {result.messages}")
    for name, ctr in (("ops", c), ("init", result.counters["init"]), ("readout", result.counters["readout"])):
        lines.append(f"{name} sums={ctr.sums} mults={ctr.mults} divs={ctr.divs} subs={ctr.subs} total={ctr.total}")
    return "\n".join(lines) + "\n"


def render_tree(limid, jt):
    out = io.StringIO()
    name = limid.name
    for i, c in enumerate(jt.cliques):
        out.write(f"clique {i}: {' '.join(name(v) for v in c)}\n")
        if jt.chance[i]:
            out.write(f"  cpts: {' '.join(name(v) for v in jt.chance[i])}\n")
        if jt.decisions[i]:
            out.write(f"  decisions: {' '.join(name(v) for v in jt.decisions[i])}\n")
        if jt.values[i]:
            out.write(f"  utilities: {' '.join(limid.values[j].name for j in jt.values[i])}\n")
    for a, b, s in jt.edges:
        out.write(f"edge {a}-{b}: {' '.join(name(v) for v in s) or '(empty)'}\n")
    return out.getvalue()


def compare(limid, general=False):
    """Solve with every applicable architecture; raises :class:`Disagreement` on mismatch."""
    archs = ("ss", "lp") if general else ("ss", "hugin", "lp")
    results = {a: solve(limid, a, general=general) for a in archs}
    ref = results[archs[0]]
    for a in archs[1:]:
        r = results[a]
        scale = max(1.0, abs(ref.eu))
        if abs(r.eu - ref.eu) > 1e-9 * scale:
            raise Disagreement(f"EU differs: {ARCH_LABELS[archs[0]]} {ref.eu!r} vs {ARCH_LABELS[a]} {r.eu!r}")
        for d in limid.decisions:
            if not np.array_equal(r.strategy[d].table.values, ref.strategy[d].table.values):
                raise Disagreement(f"policy for {limid.name(d)} differs between architectures")
    return results


def render_compare(results):
    rows = [CSV_HEADER]
    for a in ("ss", "hugin", "lp"):
        if a in results:
            rows.append(_counter_row(ARCH_LABELS[a], results[a].report_counter))
    shared = "ss" if "ss" in results else "hugin"
    rows.append(_counter_row("Initialization (S-S/HUGIN)", results[shared].counters["init"]))
    rows.append(_counter_row("Initialization (LP)", results["lp"].counters["init"]))
    return "\n".join(rows) + "\n"


def _write(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_compile(args):
    limid = load_limid(args.input)
    work, jt = compile_limid(limid, reduced=not args.no_reduce)
    lines = []
    for d in work.decisions:
        pa = ", ".join(work.name(p) for p in work.parents(d)) or "none"
        lines.append(f"decision {work.name(d)} parents: {pa}")
    text = "\n".join(lines) + "\n"
    text += render_tree(work, jt) if args.dump_jt else f"cliques {len(jt.cliques)}\n"
    _write(text, args.output)
    return EXIT_OK


def cmd_solve(args):
    limid = load_limid(args.input)
    result = solve(limid, args.arch, general=args.general)
    _write(render_solve(limid, result, args.report), args.output)
    return EXIT_OK


def cmd_compare(args):
    limid = load_limid(args.input)
    _write(render_compare(compare(limid, general=args.general)), args.output)
    return EXIT_OK


def cmd_gen(args):
    limid = random_limid(args.seed, n_vars=args.vars, n_decisions=args.decisions,
                         n_values=args.values, soluble=not args.general, max_parents=args.max_parents)
    _write(serialize_limid(limid), args.output)
    return EXIT_OK


def cmd_oracle(args):
    limid = load_limid(args.input)
    strategy, eu = brute_optimal(limid, cap=args.cap)
    lines = _strategy_lines(limid, strategy) + [f"EU {_fmt(eu)}"]
    _write("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="limid", description="Solve limited-memory influence diagrams.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, needs_input=True):
        sp = sub.add_parser(name, help=help_text)
        if needs_input:
            sp.add_argument("input", help="LIMID file (JSON, format limid/1)")
        sp.add_argument("-o", "--output", help="write here instead of stdout")
        sp.set_defaults(func=func)
        return sp

    sp = add("compile", cmd_compile, "reduce and compile to a junction tree")
    sp.add_argument("--dump-jt", action="store_true", help="list cliques, separators and assignments")
    sp.add_argument("--no-reduce", action="store_true", help="keep non-requisite arcs")

    sp = add("solve", cmd_solve, "compute a strategy with single policy updating")
    sp.add_argument("--arch", choices=sorted(ARCHITECTURES), default="lp")
    sp.add_argument("--general", action="store_true", help="iterate until convergence (general LIMIDs)")
    sp.add_argument("--report", choices=("text", "csv"), default="text")

    sp = add("compare", cmd_compare, "operation counts for every architecture (CSV)")
    sp.add_argument("--general", action="store_true")

    sp = add("gen", cmd_gen, "write a random LIMID", needs_input=False)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--vars", type=int, default=6)
    sp.add_argument("--decisions", type=int, default=2)
    sp.add_argument("--values", type=int, default=2)
    sp.add_argument("--max-parents", type=int, default=2)
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--soluble", action="store_true", help="no-forgetting diagram (default)")
    group.add_argument("--general", action="store_true", help="arbitrary limited-memory decisions")

    sp = add("oracle", cmd_oracle, "brute-force optimal strategy (small diagrams only)")
    sp.add_argument("--cap", type=int, default=DEFAULT_CELL_CAP, help="maximum joint state-space size")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LimidSyntaxError, LimidSemanticError, GeneratorError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Disagreement as exc:
        print(f"architecture-disagreement: {exc}", file=sys.stderr)
        return EXIT_DISAGREE
    except (HuginCannotRetractError, LimidError, TableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
