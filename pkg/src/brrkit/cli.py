"""Terminal driver: interactive REPL, scripted golden runs, and the
JSON protocol server."""

from __future__ import annotations

import argparse
import sys

from .session import ScriptSource, Session, StreamSource, repl


def _apply_config(args):
    def config(session: Session) -> None:
        for path in args.rules or ():
            session.load_rules_file(path)
        session.backchain_limit = args.backchain_limit
        session.step_budget = args.step_budget
        session.lambda_rewrite = not args.no_lambda_rewrite

    return config


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="brrkit",
        description="Conditional term-rewriting engine with break-rewrite "
                    "debugging and rewrite provenance queries.")
    ap.add_argument("--rules", action="append", metavar="FILE",
                    help="rule file to load (repeatable)")
    ap.add_argument("--script", metavar="FILE", help="run commands from FILE and exit")
    ap.add_argument("--expect", metavar="GOLDEN",
                    help="with --script: compare the transcript against GOLDEN")
    ap.add_argument("--serve", metavar="ADDR", help="serve the JSON protocol on HOST:PORT")
    ap.add_argument("--stdio", action="store_true",
                    help="serve the JSON protocol on stdin/stdout")
    ap.add_argument("--json-dump", metavar="FILE",
                    help="write collected brr-data as JSON on exit")
    ap.add_argument("--no-lambda-rewrite", action="store_true",
                    help="disable rewriting of quoted LAMBDA objects")
    ap.add_argument("--backchain-limit", type=int, default=3, metavar="N")
    ap.add_argument("--step-budget", type=int, default=20000, metavar="N")
    args = ap.parse_args(argv)
    config = _apply_config(args)

    if args.stdio:
        from .protocol import serve_stdio

        serve_stdio(config)
        return 0
    if args.serve:
        from .protocol import serve_tcp

        host, _, port = args.serve.rpartition(":")
        serve_tcp(host or "127.0.0.1", int(port), config)
        return 0

    if args.script:
        import io

        with open(args.script, "r", encoding="utf-8") as f:
            text = f.read()
        sink = io.StringIO()
        session = Session(io=ScriptSource(text), out=sink)
        config(session)
        repl(session)
        transcript = sink.getvalue()
        sys.stdout.write(transcript)
        if args.json_dump:
            session.dump_to_file(args.json_dump)
        if args.expect:
            with open(args.expect, "r", encoding="utf-8") as f:
                golden = f.read()
            if transcript != golden:
                sys.stderr.write("transcript differs from golden log\n")
                return 1
        return 0

    session = Session(io=StreamSource(), out=sys.stdout)
    config(session)
    repl(session)
    if args.json_dump:
        session.dump_to_file(args.json_dump)
    return 0


if __name__ == "__main__":
    sys.exit(main())
