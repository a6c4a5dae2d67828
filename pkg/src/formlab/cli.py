"""Command-line entry point: ``formlab run``, ``formlab corpus run`` and ``formlab char``."""
from __future__ import annotations

import argparse
import sys

from . import characteristics as chars
from . import corpus as corpus_mod
from .dsl import SCHEMA, char_output, parse_script, run_script
from .errors import FormlabError, ScriptError
from .report import dumps, paint, use_color


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error(exc, as_json, out_path):
    payload = {"schema": SCHEMA, "status": "error", "error": type(exc).__name__,
               "message": str(exc)}
    if isinstance(exc, ScriptError):
        payload.update(line=exc.line, column=exc.column)
    if as_json:
        _emit(dumps(payload) + "\n", out_path)
    else:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
    return 2


def cmd_run(args):
    if args.eval is not None:
        text = args.eval
    elif args.script:
        try:
            with open(args.script, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            return _error(exc, args.json, args.out)
    else:
        sys.stderr.write("formlab run: give a script path or --eval TEXT\n")
        return 2
    try:
        script = parse_script(text)
    except FormlabError as exc:
        return _error(exc, args.json, args.out)
    report = run_script(script)
    if args.json:
        _emit(report.to_json_lines(), args.out)
    else:
        _emit(report.to_text(use_color(sys.stdout) and not args.out), args.out)
    return report.exit_code


def cmd_corpus(args):
    try:
        reports = corpus_mod.run_case(args.case)
    except KeyError as exc:
        sys.stderr.write(f"formlab corpus: {exc.args[0]}\n")
        return 2
    except FormlabError as exc:
        return _error(exc, args.json, args.out)
    ok = all(r.passed for r in reports)
    if args.json:
        payload = {"schema": SCHEMA, "status": "ok" if ok else "fail",
                   "cases": [r.to_json() for r in reports]}
        _emit(dumps(payload) + "\n", args.out)
    else:
        color = use_color(sys.stdout) and not args.out
        text = []
        for r in reports:
            lines = r.summary().splitlines()
            status = "pass" if r.passed else "fail"
            lines[0] = lines[0].replace("PASS" if r.passed else "FAIL",
                                        paint("PASS" if r.passed else "FAIL", status, color))
            text.extend(lines)
        _emit("\n".join(text) + "\n", args.out)
    return 0 if ok else 1


def _parse_floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def cmd_char(args):
    try:
        with open(args.pde, encoding="utf-8") as fh:
            script = parse_script(fh.read())
    except OSError as exc:
        return _error(exc, args.json, args.out)
    except FormlabError as exc:
        return _error(exc, args.json, args.out)
    pdes = [d for d in script.declarations if d.kind == "pde"]
    if not pdes:
        sys.stderr.write("formlab char: the file declares no pde\n")
        return 2
    pde = pdes[0].value
    try:
        init = _parse_floats(args.init)
        consts = {}
        for item in args.param or ():
            k, v = item.split("=", 1)
            consts[k.strip()] = float(v)
        system = chars.characteristic_system(pde)
        traj = chars.integrate_characteristics(system, init, args.s_end, args.h, consts)
        rep = chars.verify_along(pde, traj, consts)
        _, result, text, _ = char_output(system, traj, rep, args.csv)
    except (FormlabError, ValueError, OSError) as exc:
        return _error(exc, args.json, args.out)
    if args.json:
        _emit(dumps({"schema": SCHEMA, "status": "ok", **result}) + "\n", args.out)
    else:
        _emit(text + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="formlab", description="Exterior forms, integrability "
                                "checks and characteristics from the command line.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a script")
    r.add_argument("script", nargs="?")
    r.add_argument("--eval", metavar="TEXT", help="run TEXT instead of a file")
    r.add_argument("--json", action="store_true")
    r.add_argument("--out", metavar="PATH")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("corpus", help="worked cases")
    csub = c.add_subparsers(dest="action", required=True)
    cr = csub.add_parser("run")
    cr.add_argument("case", choices=[*corpus_mod.CASES, "all"])
    cr.add_argument("--json", action="store_true")
    cr.add_argument("--out", metavar="PATH")
    cr.set_defaults(func=cmd_corpus)

    ch = sub.add_parser("char", help="integrate characteristics of a first-order PDE")
    ch.add_argument("--pde", required=True, help="file containing a pde declaration")
    ch.add_argument("--init", required=True, help="comma-separated initial state (x, p, u)")
    ch.add_argument("--h", type=float, required=True)
    ch.add_argument("--s-end", type=float, required=True, dest="s_end")
    ch.add_argument("--param", action="append", metavar="NAME=VALUE")
    ch.add_argument("--csv", metavar="PATH", help="write the trajectory as CSV")
    ch.add_argument("--json", action="store_true", default=True,
                    help="JSON output (the default)")
    ch.add_argument("--text", action="store_false", dest="json", help="plain text output")
    ch.add_argument("--out", metavar="PATH")
    ch.set_defaults(func=cmd_char)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
