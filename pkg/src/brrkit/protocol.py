"""Newline-delimited JSON session protocol.

One session per connection.  Every console event is mirrored as an event
message; break banners, prompts and query results are additionally sent as
structured messages.  Commands arrive as strings in the REPL grammar and
are consumed only at prompt points, so a break prompt blocks the proof
until the next command message arrives.
"""

from __future__ import annotations

import json
import socketserver
import sys
from typing import Optional

from .rewrite import render_gstack, render_term
from .session import Session, repl
from .terms import Reader, SExpr


class ProtocolSink:
    def __init__(self, outfile):
        self.outfile = outfile
        self.seq = 0

    def _send(self, kind: str, payload: dict) -> None:
        self.seq += 1
        line = json.dumps({"seq": self.seq, "kind": kind, "payload": payload})
        self.outfile.write(line + "\n")
        self.outfile.flush()

    def console(self, text: str) -> None:
        self._send("event", {"text": text})

    def break_open(self, depth, rule, target, criteria, near_miss_messages) -> None:
        payload = {
            "depth": depth,
            "rune": str(rule.rune),
            "target": render_term(target),
            "criteria": str(criteria),
        }
        if near_miss_messages:
            payload["near-miss-messages"] = list(near_miss_messages)
        self._send("break-open", payload)

    def break_prompt(self, depth: int) -> None:
        self._send("break-prompt", {"depth": depth})

    def break_close(self, depth: int) -> None:
        self._send("break-close", {"depth": depth})

    def query_result(self, res, data) -> None:
        if res is None:
            self._send("query-result", {"found": False})
            return
        payload = {
            "found": True,
            "rune": str(res.product.pre.lemma.rune),
            "instance": render_term(res.matched_instance),
            "result": render_term(res.final_result),
            "frames": render_gstack(res.stack).split("\n"),
            "product_path": _record_path(data, id(res.product)),
        }
        if res.product_result is not None:
            payload["product_result"] = render_term(res.product_result)
        self._send("query-result", payload)

    def proof_outcome(self, outcome) -> None:
        from .rewrite import clause_to_goal

        self._send("proof-outcome", {
            "proved": outcome.proved,
            "aborted": outcome.aborted,
            "checkpoints": [render_term(clause_to_goal(c)) for c in outcome.checkpoints],
        })

    def error(self, message: str) -> None:
        self._send("error", {"message": message})

    def brr_data_dump(self, records: list) -> None:
        self._send("event", {"type": "brr-data-dump", "records": records})


def _record_path(data, target_id) -> Optional[list]:
    for i, r in enumerate(data):
        if id(r) == target_id:
            return [i]
        sub = _record_path(r.completed, target_id)
        if sub is not None:
            return [i] + sub
    return None


class ProtocolSource:
    """Reads command messages; a disconnect during a break aborts as :a!."""

    def __init__(self, infile, sink: ProtocolSink):
        self.infile = infile
        self.sink = sink
        self.session: Optional[Session] = None

    def read_command(self, prompt: str, depth: Optional[int] = None) -> Optional[SExpr]:
        self.session.emit_prompt(prompt, depth)
        while True:
            line = self.infile.readline()
            if line == "":
                return None
            line = line.strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
            except json.JSONDecodeError as e:
                self.sink.error(f"malformed JSON: {e}")
                continue
            if msg.get("kind") != "command":
                self.sink.error(f"unexpected message kind: {msg.get('kind')}")
                continue
            text = (msg.get("payload") or {}).get("text", "")
            try:
                form = Reader(text).read()
            except Exception as e:
                self.sink.error(f"parse error in command: {e}")
                continue
            if form is None:
                self.sink.error("empty command")
                continue
            return form


class _DevNull:
    def write(self, text: str) -> None:
        pass

    def flush(self) -> None:
        pass


def serve_stdio(session_config=None, infile=None, outfile=None) -> None:
    infile = infile if infile is not None else sys.stdin
    outfile = outfile if outfile is not None else sys.stdout
    sink = ProtocolSink(outfile)
    source = ProtocolSource(infile, sink)
    session = Session(io=source, out=_DevNull())
    session.protocol_sink = sink
    if session_config:
        session_config(session)
    repl(session)


def serve_tcp(host: str, port: int, session_config=None) -> None:
    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            infile = self.rfile
            outfile = self.wfile

            class _Text:
                def __init__(self, raw):
                    self.raw = raw

                def write(self, s):
                    self.raw.write(s.encode("utf-8"))

                def flush(self):
                    self.raw.flush()

                def readline(self):
                    return self.raw.readline().decode("utf-8")

            serve_stdio(session_config, infile=_Text(infile), outfile=_Text(outfile))

    with socketserver.TCPServer((host, port), Handler) as server:
        server.serve_forever()
