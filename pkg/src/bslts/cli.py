"""Command-line front end: bslts gen | gen-ref | check | pos | oracle."""
from __future__ import annotations

import argparse
import logging
import os
import re
import sys
from pathlib import Path

from .model import ModelError, Refinement
from .oracle import DEFAULT_DEPTH, check_trace_path_equality
from .parser import parse_component
from .prover import AssumptionError, AssumptionTable, format_witness, ledger_lines, load_assumptions
from .refinement import check_projection_lemma, gen_refinement_pos, generate_projected
from .render import DumpError, RenderOptions, from_structured, to_dot, to_structured
from .secprops import PropertyError, Truth, check_all, load_properties
from .sltsgen import MODES, generate

log = logging.getLogger("bslts")

EXIT_OK, EXIT_FALSE, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3
DEFAULT_BUDGET = 1_000_000
BUDGET_ENV = "BSLTS_BUDGET"


class InputError(Exception):
    pass


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _abstraction_finder(source_path: str, explicit: list):
    """Lookup for REFINES: explicit --abstract files first, then *.mch/*.ref next to the refinement."""
    cache: dict = {}

    def candidates():
        for p in explicit or ():
            yield Path(p)
        here = Path(source_path).resolve().parent
        for pattern in ("*.mch", "*.ref"):
            yield from sorted(here.glob(pattern))

    def find(name):
        if name in cache:
            return cache[name]
        for path in candidates():
            if path.resolve() == Path(source_path).resolve():
                continue
            text = _read(str(path))
            if _declares(text, name):
                comp = parse_component(text, find)
                if isinstance(comp, Refinement):
                    raise InputError(f"{name} is itself a refinement; refine pairwise")
                cache[name] = comp
                return comp
        return None

    return find


def _declares(text: str, name: str) -> bool:
    words = re.sub(r"/\*.*?\*/|//[^\n]*", " ", text, flags=re.S).split()
    return len(words) >= 2 and words[0] == "MACHINE" and words[1] == name


def load_model(path: str, abstract: list | None = None):
    text = _read(path)
    return parse_component(text, _abstraction_finder(path, abstract or []))


def _assumptions(path: str | None) -> AssumptionTable | None:
    if path is None:
        return None
    try:
        return load_assumptions(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _build(model, args):
    assumptions = _assumptions(args.assume)
    if isinstance(model, Refinement):
        return generate_projected(model, args.mode, args.budget, assumptions, args.force)
    return generate(model, args.mode, args.budget, assumptions, args.force)


def _emit(s, args, dump=True) -> None:
    if dump:
        _write(args.output, to_structured(s))
    if args.dot:
        _write(args.dot, to_dot(s, RenderOptions(args.provenance, True, args.style)))
    if not s.minimal:
        log.warning("the SLTS is not minimal: some transitions were kept by default")


# ---------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    model = load_model(args.model, args.abstract)
    _emit(_build(model, args), args)
    return EXIT_OK


def cmd_gen_ref(args) -> int:
    r = load_model(args.model, args.abstract)
    if not isinstance(r, Refinement):
        raise InputError(f"{args.model} is not a refinement")
    s = _build(r, args)
    _emit(s, args, dump=args.output is not None)
    abstract = generate(r.abstraction, args.mode, args.budget, _assumptions(args.assume), args.force)
    report = check_projection_lemma(abstract, s, r)
    pos = gen_refinement_pos(r, args.budget, _assumptions(args.assume))
    out = [f"projected SLTS: {len(s.states)} states, {len(s.transitions)} transitions, "
           f"{'minimal' if s.minimal else 'not minimal'}"]
    for h in s.hierarchy:
        out.append(f"super-state {h.name}: {', '.join(h.substates)} ({h.verdict.outcome})")
    for st in s.unreached:
        out.append(f"unreached: {st.name}")
    out.append("projection lemma:")
    out.extend(f"  {v.po_id} {v.outcome} {format_witness(v.witness)}".rstrip() for v in report.verdicts)
    out.append("refinement obligations:")
    out.extend(f"  {po.id} {v.outcome} {format_witness(v.witness)}".rstrip() for po, v in pos)
    sys.stdout.write("\n".join(out) + "\n")
    verdicts = report.verdicts + [v for _, v in pos]
    if any(v.invalid for v in verdicts):
        return EXIT_FALSE
    if any(v.unknown for v in verdicts):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_check(args) -> int:
    text = _read(args.input)
    model = None
    if text.lstrip().startswith("{"):
        s = from_structured(text)
    else:
        model = load_model(args.input, args.abstract)
        s = _build(model, args) if args.syntactic or not args.semantic else None
    sig = s.signature if s is not None else _signature(model)
    inv = s.invariant if s is not None else _invariant(model)
    formulas = load_properties(args.props, sig, inv)
    runs = []
    if args.semantic:
        if model is None:
            raise InputError("semantic checking needs a model file, not a dump")
        runs.append(check_all(formulas, m=model, semantic=True, budget=args.budget))
    if args.syntactic or not args.semantic:
        runs.append(check_all(formulas, s=s))
    worst = EXIT_OK
    lines = []
    for results in runs:
        for label, res in results.items():
            lines.append(f"{label}: {res.describe()}")
            for j in res.justification:
                lines.append(f"  {j}")
            for w in res.warnings:
                log.warning(f"{label}: {w}")
            if res.truth is Truth.FALSE:
                worst = EXIT_FALSE
            elif res.truth is Truth.INCONCLUSIVE and worst == EXIT_OK:
                worst = EXIT_INCONCLUSIVE
    sys.stdout.write("\n".join(lines) + "\n")
    return worst


def _signature(model):
    if isinstance(model, Refinement):
        from .refinement import concrete_machine
        return concrete_machine(model).signature
    return model.signature


def _invariant(model):
    if isinstance(model, Refinement):
        from .refinement import concrete_invariant
        return concrete_invariant(model)
    return model.invariant


def cmd_pos(args) -> int:
    model = load_model(args.model, args.abstract)
    s = _build(model, args)
    verdicts = list(s.ledger)
    if isinstance(model, Refinement):
        verdicts += [v for _, v in gen_refinement_pos(model, args.budget, _assumptions(args.assume))]
    sys.stdout.write("\n".join(ledger_lines(verdicts)) + "\n")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.depth < 0:
        raise InputError("--depth must be non-negative")
    model = load_model(args.model, args.abstract)
    s = _build(model, args)
    report = check_trace_path_equality(model, s, args.depth, args.witnesses)
    sys.stdout.write("\n".join(report.lines()) + "\n")
    return EXIT_OK if report.equal else EXIT_FALSE


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bslts", description="Symbolic transition systems for finite Event-B models")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model_help="machine (.mch) or refinement (.ref) file"):
        p.add_argument("model", help=model_help)
        p.add_argument("--abstract", action="append", default=[], metavar="FILE",
                       help="file holding the abstraction of a refinement (default: search next to it)")
        p.add_argument("--mode", choices=MODES, default="strict", help="transition classification mode")
        p.add_argument("--budget", type=int, default=None,
                       help=f"valuations per proof obligation (default ${BUDGET_ENV} or {DEFAULT_BUDGET})")
        p.add_argument("--assume", metavar="FILE", help="assumption file: '<po-id> VALID|INVALID' per line")
        p.add_argument("--force", action="store_true", help="generate even if the states do not cover the invariant")

    def outputs(p):
        p.add_argument("-o", "--output", metavar="FILE", help="write the JSON dump here")
        p.add_argument("--dot", metavar="FILE", help="also write a DOT diagram")
        p.add_argument("--style", choices=("compact", "verbose"), default="compact", help="edge label style")
        p.add_argument("--provenance", action="store_true", help="show predicates and provenance on edges")

    p = sub.add_parser("gen", help="generate an SLTS and dump it as JSON")
    common(p)
    outputs(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("gen-ref", help="projected SLTS, projection lemma and refinement obligations")
    common(p, "refinement (.ref) file")
    outputs(p)
    p.set_defaults(func=cmd_gen_ref)

    p = sub.add_parser("check", help="check a property file against an SLTS dump or a model")
    common(p, "SLTS dump (.json) or model file")
    p.add_argument("--props", required=True, metavar="FILE", help="property file")
    p.add_argument("--semantic", action="store_true", help="decide each formula with the prover")
    p.add_argument("--syntactic", action="store_true", help="read each formula off the SLTS (the default)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("pos", help="list proof obligation identifiers with their verdicts")
    common(p)
    p.set_defaults(func=cmd_pos)

    p = sub.add_parser("oracle", help="compare traces with SLTS paths up to a depth")
    common(p)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="events after the initialisation")
    p.add_argument("--witnesses", action="store_true", help="compare (event, valuation) sequences")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="warning: %(message)s", stream=sys.stderr, force=True)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "model", None) is not None and args.command == "check":
        args.input = args.model
    try:
        if args.budget is None:
            args.budget = default_budget()
        if args.budget < 1:
            raise InputError("budget must be at least 1")
        return args.func(args)
    except (InputError, ModelError, PropertyError, AssumptionError, DumpError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
