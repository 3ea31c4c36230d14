"""Command-line front end.

Five subcommands, all thin wrappers over the library:

* ``parse``    — check a term's syntax and print its normal rendering.
* ``trace``    — one round of steps from a term (forward steps, plus the
                 reverse steps available immediately afterwards).
* ``explore``  — bounded bidirectional state-space exploration.
* ``check``    — equivalence verdict for two terms.
* ``laws``     — run the algebraic law suite.

Exit codes: 0 success / equivalent / all laws pass; 1 inequivalent or law
failure; 2 usage or input error; 3 verdict truncated by the exploration
bounds.  Output for a fixed invocation is byte-stable: every listing is
sorted before printing.
"""

from __future__ import annotations

import argparse
import json
import sys

from .equiv import Flavor, Strength, check
from .laws import GenConfig, run_law_suite
from .lts import Bounds, explore, export
from .syntax import ParseError, parse, parse_defs, render
from .term import TermError, is_standard, keys, sort

EXIT_OK = 0
EXIT_DIFFER = 1
EXIT_USAGE = 2
EXIT_BOUNDED = 3


def _bounds(args: argparse.Namespace) -> Bounds:
    return Bounds(max_depth=args.depth, max_width=args.width, max_states=args.states)


def _load_defs(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        return parse_defs(fh.read())


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_parse(args: argparse.Namespace) -> int:
    defs = _load_defs(args.defs)
    p = parse(args.term)
    if args.format == "machine":
        doc = {
            "term": render(p),
            "standard": is_standard(p),
            "keys": sorted(keys(p)),
            "sort": sorted(sort(p, defs).labels),
        }
        _emit(json.dumps(doc, indent=2, sort_keys=True))
    else:
        _emit(render(p))
    return EXIT_OK


def _cmd_trace(args: argparse.Namespace) -> int:
    defs = _load_defs(args.defs)
    p = parse(args.term)
    bounds = Bounds(max_depth=1, max_width=args.width, max_states=args.states)
    lts = explore(p, defs, bounds)
    fmt = "machine-readable" if args.format == "machine" else "graph-text"
    _emit(export(lts, fmt))
    return EXIT_BOUNDED if lts.truncated else EXIT_OK


def _cmd_explore(args: argparse.Namespace) -> int:
    defs = _load_defs(args.defs)
    p = parse(args.term)
    lts = explore(p, defs, _bounds(args))
    fmt = "machine-readable" if args.format == "machine" else "graph-text"
    _emit(export(lts, fmt))
    return EXIT_BOUNDED if lts.truncated else EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    defs = _load_defs(args.defs)
    lhs = parse(args.lhs)
    rhs = parse(args.rhs)
    verdict = check(
        lhs,
        rhs,
        defs=defs,
        bounds=_bounds(args),
        flavor=Flavor(args.flavor),
        strength=Strength(args.strength),
    )
    if args.format == "machine":
        doc = {
            "related": verdict.related,
            "bounded": verdict.bounded,
            "flavor": args.flavor,
            "strength": args.strength,
            "lhs": render(lhs),
            "rhs": render(rhs),
            "evidence": list(verdict.evidence),
            "relation_size": len(verdict.witness.pairs) if verdict.witness else 0,
        }
        _emit(json.dumps(doc, indent=2, sort_keys=True))
    else:
        word = "equivalent" if verdict.related else "inequivalent"
        qualifier = " (bounds truncated; verdict within explored region)" if verdict.bounded else ""
        _emit(f"{args.flavor}/{args.strength}: {word}{qualifier}")
        for line in verdict.evidence:
            _emit(f"  {line}")
    if verdict.bounded:
        return EXIT_BOUNDED
    return EXIT_OK if verdict.related else EXIT_DIFFER


def _cmd_laws(args: argparse.Namespace) -> int:
    cfg = GenConfig(seed=args.seed)
    report = run_law_suite(cfg, bounds=_bounds(args), samples=args.samples)
    if args.format == "machine":
        doc = {
            "seed": report.seed,
            "cases": report.as_records(),
            "total_fails": report.total_fails,
            "total_bounded": report.total_bounded,
        }
        _emit(json.dumps(doc, indent=2, sort_keys=True))
    else:
        _emit(report.as_text())
    if report.total_fails:
        return EXIT_DIFFER
    if report.total_bounded:
        return EXIT_BOUNDED
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(sp: argparse.ArgumentParser, *, bounds: bool = True) -> None:
    sp.add_argument("--defs", metavar="FILE", help="file of NAME = TERM definitions")
    sp.add_argument("--format", choices=("text", "machine"), default="text",
                    help="output format (default text)")
    if bounds:
        sp.add_argument("--depth", type=int, default=6, metavar="N",
                        help="max keyed events per run (default 6)")
        sp.add_argument("--width", type=int, default=3, metavar="N",
                        help="max events per step (default 3)")
        sp.add_argument("--states", type=int, default=20000, metavar="N",
                        help="max explored states (default 20000)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rctc",
        description="Reversible concurrent-step process workbench.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="parse a term and print its normal form")
    sp.add_argument("term")
    _add_common(sp, bounds=False)
    sp.set_defaults(fn=_cmd_parse)

    sp = sub.add_parser("trace", help="steps from a term, one round deep")
    sp.add_argument("term")
    _add_common(sp)
    sp.set_defaults(fn=_cmd_trace)

    sp = sub.add_parser("explore", help="bounded bidirectional state space")
    sp.add_argument("term")
    _add_common(sp)
    sp.set_defaults(fn=_cmd_explore)

    sp = sub.add_parser("check", help="decide an equivalence between two terms")
    sp.add_argument("lhs")
    sp.add_argument("rhs")
    sp.add_argument("--flavor", choices=[f.value for f in Flavor], default="step",
                    help="equivalence flavor (default step)")
    sp.add_argument("--strength", choices=[s.value for s in Strength], default="strong",
                    help="strong or weak (default strong)")
    _add_common(sp)
    sp.set_defaults(fn=_cmd_check)

    sp = sub.add_parser("laws", help="run the algebraic law suite")
    sp.add_argument("--seed", type=int, default=0, metavar="N",
                    help="generator seed (default 0)")
    sp.add_argument("--samples", type=int, default=20, metavar="N",
                    help="instances per law case (default 20)")
    _add_common(sp)
    sp.set_defaults(fn=_cmd_laws)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, TermError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
