"""Session state: the world, the debugger mode, command IO and dispatch.

A session owns one wormhole store, the current world, the collection
strategy and the command source.  The REPL grammar is shared by the
terminal driver and the wire protocol: every command is one s-expression.
"""

from __future__ import annotations

import json
import sys
from contextlib import contextmanager
from dataclasses import replace
from typing import Optional

from . import brkpt, brrdata, query
from .errors import BrrkitError, ProofAbort
from .brkpt import BrrStatus
from .rewrite import (
    ProofOutcome,
    RewriteContext,
    clause_to_goal,
    prove,
    render_term,
)
from .rules import (
    MonitorEntry,
    Rune,
    World,
    monitor_add,
    monitor_find,
    monitor_remove,
    parse_criteria,
    set_enabled,
    world_form,
)
from .terms import (
    ArityTable,
    ParseError,
    Reader,
    SExpr,
    String,
    print_sexpr,
    term_vars,
    to_term,
)
from .wormhole import (
    ENTER,
    SKIP,
    WormholeStore,
    get_persistent_whs,
    set_persistent_whs,
)

OFF = "OFF"
BRR = "BRR"
BRR_DATA = "BRR-DATA"


# ---------------------------------------------------------------------------
# Command sources


class ScriptSource:
    """Commands preloaded from text; prompts and commands are echoed so a
    scripted run reads like an interactive transcript."""

    def __init__(self, text: str, echo: bool = True):
        self.reader = Reader(text)
        self.echo = echo
        self.session: Optional["Session"] = None

    def read_command(self, prompt: str, depth: Optional[int] = None) -> Optional[SExpr]:
        if self.reader.at_eof():
            return None
        self.session.emit_prompt(prompt, depth)
        self.session.write(prompt)
        start = self.reader.pos
        form = self.reader.read()
        raw = self.reader.text[start:self.reader.pos].strip()
        if self.echo:
            self.session.write(raw + "\n")
        return form


class StreamSource:
    """Interactive source reading forms from a file object."""

    def __init__(self, infile=None):
        self.infile = infile if infile is not None else sys.stdin
        self.reader = Reader("")
        self.session: Optional["Session"] = None

    def read_command(self, prompt: str, depth: Optional[int] = None) -> Optional[SExpr]:
        self.session.emit_prompt(prompt, depth)
        self.session.write(prompt)
        while True:
            try:
                if not self.reader.at_eof():
                    return self.reader.read()
            except ParseError as e:
                if not e.incomplete:
                    self.reader = Reader("")
                    raise
            line = self.infile.readline()
            if line == "":
                return None
            self.reader.feed(line)


# ---------------------------------------------------------------------------
# The session


class Session:
    def __init__(self, io=None, out=None):
        self.world = World()
        self.wormholes = WormholeStore()
        self.mode = OFF
        self.strategy = brrdata.DEFAULT_STRATEGY
        self.io = io if io is not None else StreamSource()
        self.io.session = self
        self.out = out if out is not None else sys.stdout
        self.state_globals: dict = {}
        self.arities = ArityTable()
        self.brr_data_cache: Optional[list] = None
        self.cursors: dict = {}
        self.last_goal_vars: Optional[set] = None
        self.backchain_limit = 3
        self.step_budget = 20000
        self.lambda_rewrite = True
        self.inner_breaks_default = True
        self.waterfall_parallelism = False
        self.brr_pushes = 0
        self.brr_pops = 0
        self.handler_depth = 0
        self.instrument_hooks: list = []
        self.flat_hooks: list = []
        self.protocol_sink = None
        set_persistent_whs(self.wormholes, brkpt.BRR,
                           replace(get_persistent_whs(self.wormholes, brkpt.BRR),
                                   entry_code=SKIP, data=BrrStatus(entry_code=SKIP)))

    # -- IO ----------------------------------------------------------------

    def write(self, text: str) -> None:
        self.out.write(text)
        if hasattr(self.out, "flush"):
            self.out.flush()
        if self.protocol_sink is not None:
            self.protocol_sink.console(text)

    def emit_prompt(self, prompt: str, depth: Optional[int]) -> None:
        if self.protocol_sink is not None and depth is not None:
            self.protocol_sink.break_prompt(depth)

    def emit_break_open(self, depth, rule, target, criteria, near_miss_messages) -> None:
        if self.protocol_sink is not None:
            self.protocol_sink.break_open(depth, rule, target, criteria, near_miss_messages)

    def emit_break_close(self, depth) -> None:
        if self.protocol_sink is not None:
            self.protocol_sink.break_close(depth)

    # -- handler plumbing ----------------------------------------------------

    @contextmanager
    def handler_span(self, kind: str, rune_name: str):
        self.handler_depth += 1
        assert self.handler_depth == 1, "breakpoint handlers must not nest"
        for hook in self.instrument_hooks:
            hook(("enter", kind, rune_name))
        try:
            yield
        finally:
            for hook in self.instrument_hooks:
                hook(("exit", kind, rune_name))
            self.handler_depth -= 1

    def brkpt1(self, rule, target, unify_subst, ta, anc, gs, ctx) -> None:
        brkpt.brkpt1(self, rule, target, unify_subst, ta, anc, gs, ctx)

    def near_miss_brkpt1(self, rule, target, ta, anc, gs, ctx) -> None:
        brkpt.near_miss_brkpt1(self, rule, target, ta, anc, gs, ctx)

    def brkpt2(self, rule, wonp, failure_reason, unify_subst, brr_result,
               gs, ctx, ta, anc) -> None:
        brkpt.brkpt2(self, rule, wonp, failure_reason, unify_subst, brr_result,
                     gs, ctx, ta, anc)

    def cleanup_brr_stack(self) -> None:
        status = get_persistent_whs(self.wormholes, brkpt.BRR)
        s = status.data
        popped = 0
        while s is not None and s.brr_gstack is not None:
            s = s.brr_previous_status
            popped += 1
        if popped:
            self.brr_pops += popped
            set_persistent_whs(self.wormholes, brkpt.BRR, replace(status, data=s))

    # -- wormhole status helpers --------------------------------------------

    def _current_brr_status(self):
        view = self.wormholes.open.get(brkpt.BRR)
        return view.status if view is not None else get_persistent_whs(self.wormholes, brkpt.BRR)

    def brr_entry_code(self) -> str:
        return self._current_brr_status().entry_code

    def set_brr_entry_code(self, code: str) -> None:
        cur = self._current_brr_status()
        data = cur.data
        if data is not None:
            data.entry_code = code
        set_persistent_whs(self.wormholes, brkpt.BRR, replace(cur, entry_code=code))

    def _remap_monitors(self, f) -> None:
        cur = self._current_brr_status()

        def rebuild(s):
            if s is None:
                return None
            return BrrStatus(
                entry_code=s.entry_code,
                brr_monitored_runes=f(s.brr_monitored_runes),
                brr_gstack=s.brr_gstack,
                brr_local_alist=s.brr_local_alist,
                brr_previous_status=rebuild(s.brr_previous_status),
            )

        data = rebuild(cur.data if cur.data is not None else BrrStatus(entry_code=cur.entry_code))
        set_persistent_whs(self.wormholes, brkpt.BRR, replace(cur, data=data))

    # -- commands -------------------------------------------------------------

    def brr(self, on: bool) -> None:
        self.mode = BRR if on else OFF
        self.set_brr_entry_code(ENTER if on else SKIP)

    def _resolve_rune(self, name) -> Rune:
        if isinstance(name, tuple) and len(name) == 2 and name[0] == "QUOTE":
            name = name[1]
        if isinstance(name, tuple) and len(name) == 2 and isinstance(name[0], str) \
                and name[0] in (":REWRITE", ":DEFINITION"):
            rule = self.world.find_rule(name[1])
            if rule is None or rule.rune.cls != name[0][1:]:
                raise BrrkitError(f"unknown rune: {print_sexpr(name)}")
            return rule.rune
        if not isinstance(name, str):
            raise BrrkitError(f"bad rune designator: {print_sexpr(name)}")
        rune = self.world.find_rune(name)
        if rune is None:
            raise BrrkitError(f"unknown rune: {name}")
        return rune

    def monitor(self, name, criteria_sexpr, bang: bool = False) -> None:
        rune = self._resolve_rune(name)
        criteria = parse_criteria(criteria_sexpr)
        entry = MonitorEntry(rune, criteria)
        self._remap_monitors(lambda entries: monitor_add(entries, entry))
        if bang:
            self.brr(True)

    def unmonitor(self, name) -> None:
        rune = self._resolve_rune(name)
        self._remap_monitors(lambda entries: monitor_remove(entries, rune))

    def monitored(self, name) -> Optional[MonitorEntry]:
        rune = self._resolve_rune(name)
        return monitor_find(brkpt.base_status(self._current_brr_status().data).brr_monitored_runes,
                            rune)

    def make_ctx(self) -> RewriteContext:
        return RewriteContext(
            world=self.world,
            session=self,
            step_budget=self.step_budget,
            backchain_limit=self.backchain_limit,
            lambda_rewrite=self.lambda_rewrite,
        )

    def thm(self, goal_sexpr: SExpr) -> ProofOutcome:
        goal = to_term(goal_sexpr, None, self.world.aliases, self.arities)
        self.last_goal_vars = term_vars(goal)
        outcome = prove(goal, self.make_ctx())
        if outcome.proved:
            self.write("\nQ.E.D.\n")
        elif outcome.aborted:
            pass  # the abort message was printed at the break
        else:
            self.write("\nThe proof attempt has failed.\n\n*** Key checkpoint:\n\n")
            self.write(render_term(clause_to_goal(outcome.checkpoints[0])) + "\n")
            self.write("\n******** FAILED ********\n")
        if self.protocol_sink is not None:
            self.protocol_sink.proof_outcome(outcome)
        return outcome

    def load_rules_text(self, text: str) -> None:
        from .terms import parse_all

        for form in parse_all(text):
            self.world = world_form(self.world, form, self.arities)

    def load_rules_file(self, path: str) -> None:
        with open(path, "r", encoding="utf-8") as f:
            self.load_rules_text(f.read())

    # -- queries ---------------------------------------------------------------

    def run_query(self, kind: str, arg: SExpr) -> None:
        mode = "subterm" if "SUBTERM" in kind else "term"
        iterative = kind.endswith("*")
        pattern = query.parse_query_pattern(arg, self.last_goal_vars, self.world.aliases)
        data = self.brr_data_cache
        if data is None:
            self.write(query.NO_DATA_MESSAGE + "\n")
            return
        if iterative:
            cursor = self.cursors.get(mode)
            if cursor is None or cursor.pattern != pattern:
                cursor = query.QueryCursor(pattern, mode)
                self.cursors[mode] = cursor
            text, res = query.cursor_next(data, cursor)
        else:
            res = query.run_query(data, pattern, mode)
            text = query.query_text(data, pattern, mode)
        self.write(text + "\n")
        if self.protocol_sink is not None:
            self.protocol_sink.query_result(res, data)

    # -- dumps -------------------------------------------------------------------

    def dump_records(self) -> list:
        data = self.brr_data_cache or []
        return [self._record_json(r) for r in data]

    def _record_json(self, r) -> dict:
        return {
            "rune": str(r.pre.lemma.rune),
            "target": render_term(r.pre.target),
            "result": render_term(r.post.brr_result) if r.post.brr_result is not None else None,
            "failure_reason": r.post.failure_reason.describe() if r.post.failure_reason else None,
            "children": [self._record_json(c) for c in r.completed],
        }

    def _record_sexpr(self, r) -> str:
        parts = [":RUNE " + str(r.pre.lemma.rune),
                 ":TARGET " + render_term(r.pre.target)]
        if r.post.brr_result is not None:
            parts.append(":RESULT " + render_term(r.post.brr_result))
        if r.post.failure_reason is not None:
            parts.append(':FAILURE "' + r.post.failure_reason.describe() + '"')
        kids = " ".join(self._record_sexpr(c) for c in r.completed)
        parts.append(":CHILDREN (" + kids + ")")
        return "(" + " ".join(parts) + ")"

    def dump_to_file(self, path: str, fmt: str = "json") -> None:
        if fmt == "json":
            payload = {"records": self.dump_records()}
            with open(path, "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2)
                f.write("\n")
        else:
            with open(path, "w", encoding="utf-8") as f:
                f.write("(" + "\n ".join(self._record_sexpr(r)
                                         for r in (self.brr_data_cache or [])) + ")\n")

    # -- REPL dispatch -------------------------------------------------------------

    def run_form(self, form: SExpr) -> Optional[str]:
        if form == "QUIT" or form == ":QUIT":
            return "QUIT"
        if not isinstance(form, tuple) or not form or not isinstance(form[0], str):
            raise BrrkitError(f"unknown command: {print_sexpr(form)}")
        head = form[0]
        if head == "QUIT":
            return "QUIT"
        if head == "LOAD":
            if len(form) != 2 or not isinstance(form[1], String):
                raise BrrkitError('load expects a file name string')
            self.load_rules_file(form[1].value)
            self.write("T\n")
            return None
        if head in ("DEFRULE", "ALIAS", "FN-SLOT"):
            self.world = world_form(self.world, form, self.arities)
            self.write("T\n")
            return None
        if head == "THM":
            if len(form) != 2:
                raise BrrkitError("thm expects one goal term")
            self.thm(form[1])
            return None
        if head == "WITH-BRR-DATA":
            if len(form) != 2 or not isinstance(form[1], tuple) or form[1][0] != "THM":
                raise BrrkitError("with-brr-data expects a (thm ...) form")
            body = form[1]
            brrdata.with_brr_data(self, lambda: self.thm(body[1]))
            return None
        if head == "BRR":
            if len(form) != 2 or form[1] not in ("T", "NIL"):
                raise BrrkitError("brr expects t or nil")
            self.brr(form[1] == "T")
            self.write("T\n" if form[1] == "T" else "NIL\n")
            return None
        if head in ("MONITOR", "MONITOR!"):
            if len(form) != 3:
                raise BrrkitError("monitor expects a rune and break criteria")
            self.monitor(form[1], form[2], bang=head.endswith("!"))
            self.write("T\n")
            return None
        if head == "UNMONITOR":
            self.unmonitor(form[1])
            self.write("T\n")
            return None
        if head == "MONITORED":
            entry = self.monitored(form[1])
            if entry is None:
                self.write("NIL\n")
            else:
                self.write(f"({entry.rune} . {entry.criteria})\n")
            return None
        if head in ("ENABLE", "DISABLE"):
            name = form[1]
            if isinstance(name, tuple) and name[0] == "QUOTE":
                name = name[1]
            self.world = set_enabled(self.world, name, head == "ENABLE")
            self.write("T\n")
            return None
        if head in ("CW-GSTACK-FOR-SUBTERM", "CW-GSTACK-FOR-TERM",
                    "CW-GSTACK-FOR-SUBTERM*", "CW-GSTACK-FOR-TERM*"):
            if len(form) != 2:
                raise BrrkitError(f"{head} expects one term or (:free ...) pattern")
            self.run_query(head, form[1])
            return None
        if head == "SET-BRR-DATA-ATTACHMENTS":
            name = form[1]
            if isinstance(name, tuple) and name[0] == "QUOTE":
                name = name[1]
            brrdata.set_brr_data_attachments(self, name)
            self.write("T\n")
            return None
        if head == "CLEAR-BRR-DATA-LST":
            brrdata.clear_brr_data_lst(self)
            self.write("T\n")
            return None
        if head == "DUMP-BRR-DATA":
            if len(form) >= 2 and isinstance(form[1], String):
                fmt = "json"
                if len(form) == 4 and form[2] == ":FORMAT":
                    fmt = "sexpr" if form[3] == ":SEXPR" else "json"
                self.dump_to_file(form[1].value, fmt)
                self.write("T\n")
            else:
                if self.protocol_sink is not None:
                    self.protocol_sink.brr_data_dump(self.dump_records())
                else:
                    self.write(json.dumps({"records": self.dump_records()}) + "\n")
            return None
        raise BrrkitError(f"unknown command: {print_sexpr(form)}")


def repl(session: Session) -> None:
    """Top-level read-eval-print loop, shared by terminal and script modes."""
    while True:
        try:
            form = session.io.read_command("!>")
        except ParseError as e:
            session.write(f"Parse error at {e.line}:{e.col}: {e.message}\n")
            return
        if form is None:
            return
        try:
            if session.run_form(form) == "QUIT":
                return
        except ProofAbort:
            pass
        except BrrkitError as e:
            session.write(f"Error: {e}\n")
            if session.protocol_sink is not None:
                session.protocol_sink.error(str(e))


def run_script(text: str, rules_files=(), out=None, **config) -> str:
    """Run a script and return its transcript (for golden-log testing)."""
    import io as _io

    sink = out if out is not None else _io.StringIO()
    session = Session(io=ScriptSource(text), out=sink)
    for key, value in config.items():
        setattr(session, key, value)
    for path in rules_files:
        session.load_rules_file(path)
    repl(session)
    return sink.getvalue() if hasattr(sink, "getvalue") else ""
