"""Command-line front end.

Subcommands: ``run`` (query a program in one of four engine modes),
``check`` (static checks), ``validate`` (answer/derivation correspondence),
``oracle`` (bounded least-model enumeration), ``repl``.

Exit codes for ``run``: 0 at least one answer, 1 finite failure, 2 limit
exceeded, 3 usage or parse error, 4 static-check refusal (only with
``--strict``).  ``check`` exits 0 on a clean verdict and 4 on a violation
or loop witness.  ``validate`` exits 0 on agreement at every depth, 1 on a
disagreement, 3 on misuse.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import decirc
from .coengine import CoResult, co_refute, preflight_warnings
from .derivation import Limits, RefuteResult, Status, StepKind, refute
from .productivity import ProductivityStatus, check_productive
from .program import ParseError, Program, check_universal, parse_program, parse_query
from .rational import solved_answer
from .terms import (
    FreshVars,
    Substitution,
    Term,
    Var,
    apply_raw,
    term_to_text,
    variables_in_order,
)
from .validation import ValidationRefused, check_theorem_5_1

TRACE_HEADER = "coresolve-trace v1"

EXIT_ANSWER = 0
EXIT_FAILED = 1
EXIT_LIMIT = 2
EXIT_USAGE = 3
EXIT_CHECK = 4


def _canonical_names(query_vars: Sequence[Var], terms: Sequence[Term]) -> Substitution:
    """Rename every non-query variable in the answer terms to _A, _B, ...
    in order of appearance, so output is byte-stable."""
    taken = {v.display for v in query_vars}
    mapping: dict[Var, Term] = {}
    counter = 0
    for v in variables_in_order(terms):
        if v in query_vars:
            continue
        while True:
            name = "_" + _letters(counter)
            counter += 1
            if name not in taken:
                break
        taken.add(name)
        mapping[v] = Var(-(len(mapping) + 1), name)
    return Substitution(mapping)


def _letters(n: int) -> str:
    out = ""
    while True:
        out = chr(ord("A") + n % 26) + out
        n //= 26
        if n == 0:
            return out


def _print_answer(
    query_vars: Sequence[Var],
    solved: Substitution,
    unfold_depth: int,
    out,
) -> None:
    shown = [v for v in query_vars if solved.get(v) is not None]
    images = [solved.get(v) for v in query_vars if solved.get(v) is not None]
    renaming = _canonical_names(query_vars, images)
    if not shown:
        print("true", file=out)
        return
    for v in shown:
        img = solved.get(v)
        assert img is not None
        print(f"{v.display} = {term_to_text(apply_raw(renaming, img))}", file=out)
        if unfold_depth > 0 and solved.circular:
            unfolded = decirc.unfold(solved, v, unfold_depth)
            print(
                f"{v.display} ~ {term_to_text(apply_raw(renaming, unfolded))}",
                file=out,
            )


def _emit_trace(steps, fmt: str, out) -> None:
    print(TRACE_HEADER, file=out)
    if fmt == "text":
        for n, st in enumerate(steps):
            extra = (
                f" ancestor={term_to_text(st.ancestor)}"
                if st.kind is StepKind.LOOP and st.ancestor is not None
                else ""
            )
            clause = "-" if st.clause_index is None else str(st.clause_index)
            print(
                f"{n} {st.kind.value} clause={clause} atom={st.atom_index} "
                f"subst={st.subst!r}{extra}",
                file=out,
            )
    else:
        for n, st in enumerate(steps):
            rec = {
                "n": n,
                "kind": st.kind.value,
                "clause": st.clause_index,
                "atom": st.atom_index,
                "subst": {
                    v.display: term_to_text(t) for v, t in st.subst.items()
                },
            }
            if st.ancestor is not None:
                rec["ancestor"] = term_to_text(st.ancestor)
            print(json.dumps(rec, sort_keys=True), file=out)


def _status_exit(status: Status) -> int:
    if status is Status.REFUTED:
        return EXIT_ANSWER
    if status is Status.FAILED:
        return EXIT_FAILED
    return EXIT_LIMIT


def _load(path: str, out_err) -> Optional[tuple[Program, FreshVars]]:
    fresh = FreshVars()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=out_err)
        return None
    try:
        prog = parse_program(text, fresh)
    except ParseError as exc:
        print(f"parse error: {exc}", file=out_err)
        return None
    for w in prog.warnings:
        print(f"warning: {w}", file=out_err)
    return prog, fresh


def cmd_run(args, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    loaded = _load(args.file, err)
    if loaded is None:
        return EXIT_USAGE
    prog, fresh = loaded
    try:
        query = parse_query(args.query, fresh)
    except ParseError as exc:
        print(f"parse error: {exc}", file=err)
        return EXIT_USAGE
    limits = Limits(
        max_steps=args.max_steps,
        max_answers=args.max_answers,
        max_rewrite_chain=args.max_rewrite,
        fair=args.fair,
    )
    query_vars = variables_in_order(query)

    if args.mode in ("sld", "s"):
        result = refute(prog, query, args.mode, limits, fresh)
        if args.trace != "off":
            for tr in result.traces:
                _emit_trace(tr.steps, args.trace, out)
        if result.status is Status.REFUTED:
            first = True
            for tr in result.traces:
                if tr.status is not Status.REFUTED:
                    continue
                if not first:
                    print("", file=out)
                first = False
                substs = [
                    st.subst
                    for st in tr.steps
                    if st.kind in (StepKind.SUBST, StepKind.SLD)
                ]
                solved = solved_answer(query_vars, substs, fresh)
                _print_answer(query_vars, solved, args.unfold_depth, out)
        return _status_exit(result.status)

    # co-modes
    if args.mode == "cos":
        warnings = preflight_warnings(prog)
        for w in warnings:
            print(f"warning: {w}", file=err)
        if args.strict and warnings:
            print("refusing to run under --strict", file=err)
            return EXIT_CHECK
        result = co_refute(prog, query, "restricted", limits, fresh, preflight=False)
    else:
        result = co_refute(prog, query, "colp", limits, fresh, preflight=False)
    if args.trace != "off":
        for tr, _ in result.answers:
            _emit_trace(tr.steps, args.trace, out)
    if result.status is Status.REFUTED:
        for k, (_, answer) in enumerate(result.answers):
            if k:
                print("", file=out)
            _print_answer(query_vars, answer.solved, args.unfold_depth, out)
    return _status_exit(result.status)


def cmd_check(args, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    if not (args.universal or args.productive):
        print(
            "check: at least one of --universal / --productive is required",
            file=err,
        )
        return EXIT_USAGE
    loaded = _load(args.file, err)
    if loaded is None:
        return EXIT_USAGE
    prog, fresh = loaded
    code = EXIT_ANSWER
    if args.universal:
        report = check_universal(prog)
        if report.universal:
            print("universal: every body variable occurs in its head", file=out)
        else:
            for i, span, vs in report.violations:
                names = ",".join(v.display for v in vs)
                print(
                    f"not universal: clause {i} at {span} has existential "
                    f"body variables {{{names}}}",
                    file=out,
                )
            code = EXIT_CHECK
    if args.productive:
        verdict = check_productive(prog, bound=args.bound, fresh=fresh)
        if verdict.status is ProductivityStatus.NO_LOOP_FOUND:
            print(
                f"no rewriting loop found up to bound {verdict.bound} "
                "(inconclusive evidence of productivity)",
                file=out,
            )
        else:
            w = verdict.witness
            assert w is not None
            print(f"rewriting loop witness from {term_to_text(w.root)}:", file=out)
            for st in w.steps:
                print(
                    f"  clause {st.clause_index} -> {term_to_text(st.atom)}",
                    file=out,
                )
            code = EXIT_CHECK
    return code


def cmd_validate(args, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    loaded = _load(args.file, err)
    if loaded is None:
        return EXIT_USAGE
    prog, fresh = loaded
    try:
        query = parse_query(args.query, fresh)
    except ParseError as exc:
        print(f"parse error: {exc}", file=err)
        return EXIT_USAGE
    try:
        report = check_theorem_5_1(
            prog, query, d_max=args.depth, rounds=args.rounds, fresh=fresh
        )
    except ValidationRefused as exc:
        print(f"refused: {exc}", file=err)
        return EXIT_USAGE
    for d, lhs, rhs, ok in report.table:
        mark = "ok" if ok else "MISMATCH"
        print(
            f"depth {d}: derivation {term_to_text(lhs)} | "
            f"answer {term_to_text(rhs)} | {mark}",
            file=out,
        )
    if not report.table:
        print("no loop uses; nothing to compare", file=out)
    return EXIT_ANSWER if report.agrees else EXIT_FAILED


def cmd_oracle(args, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    loaded = _load(args.file, err)
    if loaded is None:
        return EXIT_USAGE
    prog, _ = loaded
    from .models import lfp_enumerate

    atoms = lfp_enumerate(prog, args.cap)
    for a in atoms.sorted():
        print(term_to_text(a), file=out)
    return EXIT_ANSWER


def repl(args, out=None, err=None, inp=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    inp = inp if inp is not None else sys.stdin
    loaded = _load(args.file, err)
    if loaded is None:
        return EXIT_USAGE
    prog, fresh = loaded
    config = {
        "mode": "cos",
        "max_steps": 10000,
        "max_answers": 1,
        "unfold_depth": 0,
    }
    print("coresolve repl; :quit to exit", file=out)
    for line in inp:
        line = line.strip()
        if not line:
            continue
        if line in (":quit", ":q"):
            break
        if line.startswith(":set "):
            parts = line.split()
            if len(parts) != 3:
                print("usage: :set KEY VALUE", file=out)
                continue
            key, value = parts[1], parts[2]
            if key == "mode" and value in ("sld", "s", "colp", "cos"):
                config["mode"] = value
            elif key in ("max_steps", "max_answers", "unfold_depth"):
                try:
                    config[key] = int(value)
                except ValueError:
                    print("value must be an integer", file=out)
            else:
                print(f"unknown setting {key}", file=out)
            continue
        if line.startswith(":check"):
            parts = line.split()
            what = parts[1] if len(parts) > 1 else "universal"
            ns = argparse.Namespace(
                file=args.file,
                universal=(what == "universal"),
                productive=(what == "productive"),
                bound=64,
            )
            cmd_check(ns, out, err)
            continue
        if line.startswith(":"):
            print(f"unknown command {line}", file=out)
            continue
        if line.startswith("?-"):
            line = line[2:].strip()
        ns = argparse.Namespace(
            file=args.file,
            query=line,
            mode=config["mode"],
            max_steps=config["max_steps"],
            max_answers=config["max_answers"],
            max_rewrite=64,
            unfold_depth=config["unfold_depth"],
            fair=False,
            trace="off",
            strict=False,
        )
        code = cmd_run(ns, out, err)
        if code == EXIT_FAILED:
            print("no", file=out)
        elif code == EXIT_LIMIT:
            print("limit exceeded", file=out)
    return EXIT_ANSWER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coresolve",
        description="structural-resolution engine with coinductive loop detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a query against a program")
    run.add_argument("file")
    run.add_argument("-q", "--query", required=True)
    run.add_argument(
        "--mode", choices=["sld", "s", "colp", "cos"], default="cos"
    )
    run.add_argument("--max-steps", type=int, default=10000)
    run.add_argument("--max-rewrite", type=int, default=64)
    run.add_argument("--max-answers", type=int, default=1)
    run.add_argument("--unfold-depth", type=int, default=0)
    run.add_argument("--fair", action="store_true")
    run.add_argument(
        "--trace", choices=["off", "text", "structured"], default="off"
    )
    run.add_argument("--strict", action="store_true")
    run.set_defaults(func=cmd_run)

    check = sub.add_parser("check", help="static checks")
    check.add_argument("file")
    check.add_argument("--universal", action="store_true")
    check.add_argument("--productive", action="store_true")
    check.add_argument("--bound", type=int, default=64)
    check.set_defaults(func=cmd_check)

    validate = sub.add_parser(
        "validate", help="answer/derivation correspondence check"
    )
    validate.add_argument("file")
    validate.add_argument("-q", "--query", required=True)
    validate.add_argument("--depth", type=int, default=8)
    validate.add_argument("--rounds", type=int, default=16)
    validate.set_defaults(func=cmd_validate)

    oracle = sub.add_parser("oracle", help="bounded least-model enumeration")
    oracle.add_argument("file")
    oracle.add_argument("--cap", type=int, default=4)
    oracle.set_defaults(func=cmd_oracle)

    rp = sub.add_parser("repl", help="interactive query loop")
    rp.add_argument("file")
    rp.set_defaults(func=repl)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_ANSWER
    for key in ("max_steps", "max_rewrite", "max_answers", "bound", "cap"):
        if getattr(args, key, 1) is not None and getattr(args, key, 1) <= 0:
            print(f"error: --{key.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
