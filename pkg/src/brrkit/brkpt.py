"""Breakpoint handlers, the break-status stack machine, and near misses.

The rewriter invokes three handlers: near_miss_brkpt1 when a rule's lhs
fails to match, brkpt1 when it matches, and brkpt2 when the attempt
completes.  Interaction happens inside the BRR wormhole; the wormhole
status holds the monitored runes and a stack of open-break records, one
per banner depth.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import BrrkitError, ProofAbort
from .rules import BreakCriteria, MonitorEntry, RewriteRule, monitor_find
from .rewrite import (
    GStack,
    NearMiss,
    RewriteContext,
    TypeAlist,
    decode_type_alist,
    render_gstack,
)
from .terms import (
    App,
    Quote,
    SExpr,
    Term,
    Var,
    is_keyword,
    match,
    print_sexpr,
    render_term,
    replace_quoted_lambdas,
    term_to_sexpr,
)
from .wormhole import ENTER, wormhole_enter

BRR = "BRR"

EXIT_MODES = {":EVAL", ":GO", ":OK", ":EVAL!", ":GO!", ":OK!"}


@dataclass
class BrrStatus:
    """One layer of the break-rewrite state machine.  The base layer (no
    open break) has brr_gstack None; each open break pushes a new layer."""

    entry_code: str = ENTER
    brr_monitored_runes: tuple = ()
    brr_gstack: Optional[GStack] = None
    brr_local_alist: dict = field(default_factory=dict)
    brr_previous_status: Optional["BrrStatus"] = None


def status_depth(status: Optional[BrrStatus]) -> int:
    d = 0
    while status is not None:
        if status.brr_gstack is not None:
            d += 1
        status = status.brr_previous_status
    return d


def base_status(status: Optional[BrrStatus]) -> BrrStatus:
    return status if status is not None else BrrStatus()


# ---------------------------------------------------------------------------
# Near misses


@dataclass(frozen=True)
class NearMissItem:
    criterion: str
    pattern: Term
    message: str


@dataclass(frozen=True)
class NearMissReport:
    satisfied: tuple = ()


def near_miss_pattern(criterion: tuple, lhs: Term) -> Term:
    """The generalized pattern for one criterion: lambda replaces each
    quoted-LAMBDA position with a fresh variable; depth k generalizes
    everything below depth k (root is depth 0, variables at the cut are
    kept); abstraction is the user's pattern unchanged."""
    kind = criterion[0]
    if kind == "lambda":
        names: list = []
        return replace_quoted_lambdas(lhs, names)
    if kind == "abstraction":
        return criterion[1]
    if kind == "depth":
        k = criterion[1]
        if not isinstance(k, int) or k < 0:
            raise BrrkitError(":depth expects a natural number")
        counter = itertools.count()

        def fresh() -> Term:
            return Var(f"GENSYM{next(counter)}")

        def gen(t: Term, d: int) -> Term:
            if isinstance(t, App) and d < k:
                return App(t.fn, tuple(gen(a, d + 1) for a in t.args))
            if isinstance(t, Var) and d <= k:
                return t
            if not isinstance(t, App) and d < k:
                return t
            return fresh()

        if not isinstance(lhs, App):
            return lhs
        return App(lhs.fn, tuple(gen(a, 1) for a in lhs.args))
    raise BrrkitError(f"unknown near-miss criterion {kind}")


LAMBDA_MESSAGE = ":LHS matches :TARGET except at one or more quoted LAMBDA constants."


def brr_near_missp(entry: MonitorEntry, lhs: Term, target: Term) -> NearMissReport:
    """Check each near-miss criterion of the entry against a target the lhs
    failed to match; one satisfied item (with its message) per criterion."""
    crit = entry.criteria
    items = []
    if crit.lamb:
        from .terms import match_except_lambdas

        if match_except_lambdas(lhs, target):
            items.append(NearMissItem("lambda", near_miss_pattern(("lambda",), lhs),
                                      LAMBDA_MESSAGE))
    if crit.depth is not None:
        pat = near_miss_pattern(("depth", crit.depth), lhs)
        if match(pat, target) is not None:
            items.append(NearMissItem("depth", pat,
                                      f":LHS matches :TARGET down to depth {crit.depth}."))
    if crit.abstraction is not None:
        pat = near_miss_pattern(("abstraction", crit.abstraction), lhs)
        if match(pat, target) is not None:
            items.append(NearMissItem("abstraction", pat, ":ABSTRACTION matches :TARGET."))
    return NearMissReport(tuple(items))


# ---------------------------------------------------------------------------
# Break-condition evaluation (a tiny interpreter: QUOTE, EQUAL, brr@,
# get-brr-local, and boolean connectives)


class EvalError(BrrkitError):
    pass


_BRR_AT_KEYS = {":TARGET", ":LHS", ":RHS", ":HYPS", ":UNIFY-SUBST", ":TYPE-ALIST",
                ":ANCESTORS", ":DEPTH", ":WONP", ":FAILURE-REASON", ":BRR-RESULT"}


def _value_to_sexpr(v) -> SExpr:
    from .terms import String

    if v is None:
        return "NIL"
    if isinstance(v, bool):
        return "T" if v else "NIL"
    if isinstance(v, (Var, Quote, App)):
        return term_to_sexpr(v)
    if isinstance(v, int):
        return v
    if isinstance(v, (str, String)):
        return v
    if isinstance(v, RewriteRule):
        return (":" + v.rune.cls, v.rune.name)
    if isinstance(v, TypeAlist):
        return tuple((term_to_sexpr(t), "T" if truth else "NIL") for t, truth in v.entries)
    if isinstance(v, dict):
        return tuple((k, _value_to_sexpr(x)) for k, x in v.items())
    if isinstance(v, tuple):
        return tuple(_value_to_sexpr(x) for x in v)
    if hasattr(v, "describe"):
        return String(v.describe())
    return String(repr(v))


def brr_at(key: str, locals_: dict) -> SExpr:
    if key not in _BRR_AT_KEYS:
        raise EvalError(f"unknown brr@ key {key}")
    rule = locals_.get("LEMMA")
    if key == ":LHS":
        return _value_to_sexpr(rule.lhs if rule else None)
    if key == ":RHS":
        return _value_to_sexpr(rule.rhs if rule else None)
    if key == ":HYPS":
        return _value_to_sexpr(rule.hyps if rule else ())
    return _value_to_sexpr(locals_.get(key[1:]))


def eval_condition(t: Term, locals_: dict) -> SExpr:
    if isinstance(t, Quote):
        return t.value
    if isinstance(t, Var):
        raise EvalError(f"unbound variable {t.name} in break condition")
    fn = t.fn
    if fn == "BRR@":
        if len(t.args) != 1 or not isinstance(t.args[0], Quote) or not is_keyword(t.args[0].value):
            raise EvalError("brr@ expects one keyword argument")
        return brr_at(t.args[0].value, locals_)
    if fn == "GET-BRR-LOCAL":
        if len(t.args) != 1 or not isinstance(t.args[0], Quote):
            raise EvalError("get-brr-local expects a quoted name")
        return _value_to_sexpr(locals_.get(t.args[0].value))
    if fn == "EQUAL":
        a, b = (eval_condition(x, locals_) for x in t.args)
        return "T" if a == b else "NIL"
    if fn == "NOT":
        return "T" if eval_condition(t.args[0], locals_) == "NIL" else "NIL"
    if fn == "IF":
        test = eval_condition(t.args[0], locals_)
        return eval_condition(t.args[1] if test != "NIL" else t.args[2], locals_)
    if fn == "AND":
        v: SExpr = "T"
        for a in t.args:
            v = eval_condition(a, locals_)
            if v == "NIL":
                return "NIL"
        return v
    if fn == "OR":
        for a in t.args:
            v = eval_condition(a, locals_)
            if v != "NIL":
                return v
        return "NIL"
    raise EvalError(f"cannot evaluate {fn} in a break condition")


# ---------------------------------------------------------------------------
# Banners and result lines


def open_banner(depth: int, rule: RewriteRule, target: Term) -> str:
    head = f"({depth} Breaking {rule.rune} on "
    flat = render_term(target)
    if "\n" not in flat and len(head) + len(flat) + 1 <= 79:
        return head + flat + ":"
    return head.rstrip() + "\n" + render_term(target, 0, width=78) + ":"


def near_miss_text(report: NearMissReport, criteria: BreakCriteria) -> str:
    noun = "criterion is" if len(report.satisfied) == 1 else "criteria are"
    lines = [
        "The pattern in this rule failed to match the target.  However, this",
        "is considered a NEAR MISS under the break criteria,",
        f"{criteria}, specified when this rule was monitored.",
        f"The following {noun} satisfied.",
        "",
    ]
    for item in report.satisfied:
        lines.append(f"* {item.message}")
    return "\n".join(lines)


def result_line(depth: int, exit_mode: str, rule: RewriteRule, wonp: bool,
                failure_reason, brr_result) -> str:
    if wonp:
        mark = "!" if exit_mode.startswith(":EVAL") else ""
        head = f"{depth}{mark} {rule.rune} produced "
        flat = render_term(brr_result)
        if "\n" not in flat and len(head) + len(flat) + 1 <= 79:
            return head + flat + "."
        return head.rstrip() + "\n" + render_term(brr_result, 0) + "."
    return f"{depth}x {rule.rune} failed because {failure_reason.describe()}."


HELP_TEXT = """Break commands:
  :target :lhs :rhs :hyps :unify-subst :type-alist :ancestors :path
  (get-brr-local 'NAME)   (brr@ :KEY)   and EQUAL/NOT/AND/OR/IF forms
Exit commands:
  :eval :go :ok (bang variants :eval! :go! :ok! allow inner breaks)
  :a! aborts to the top level."""


# ---------------------------------------------------------------------------
# The three handlers


def _inner_breaks_allowed(session, status: BrrStatus) -> bool:
    s = status
    while s is not None:
        if s.brr_gstack is not None:
            return s.brr_local_alist.get("INNER-OK", True)
        s = s.brr_previous_status
    return True


def _push_status(session, view, locals_: dict, gs: GStack) -> BrrStatus:
    old = base_status(view.status.data)
    new = BrrStatus(
        entry_code=old.entry_code,
        brr_monitored_runes=old.brr_monitored_runes,
        brr_gstack=gs,
        brr_local_alist=locals_,
        brr_previous_status=old,
    )
    view.status = replace(view.status, data=new)
    session.brr_pushes += 1
    return new


def _pop_status(session, view) -> None:
    top = view.status.data
    view.status = replace(view.status, data=top.brr_previous_status)
    session.brr_pops += 1


def _record_exit(session, locals_: dict, mode: str) -> None:
    locals_["EXIT-MODE"] = mode
    locals_["INNER-OK"] = mode.endswith("!") or session.inner_breaks_default


def _prompt_loop(session, view, status: BrrStatus, ctx: RewriteContext) -> str:
    """Read break commands until an exit-mode command; returns it."""
    depth = status.brr_local_alist["DEPTH"]
    while True:
        form = session.io.read_command(f"{depth} brr>", depth=depth)
        if form is None:
            session.write("\nAbort to ACL2 top-level.\n")
            raise ProofAbort()
        done = dispatch_break_command(session, status, form)
        if done:
            return done


def dispatch_break_command(session, status: BrrStatus, form: SExpr) -> Optional[str]:
    locals_ = status.brr_local_alist
    rule: Optional[RewriteRule] = locals_.get("LEMMA")
    out = session.write
    if isinstance(form, str) and form in EXIT_MODES:
        _record_exit(session, locals_, form)
        return form
    if form == ":A!":
        out("Abort to ACL2 top-level.\n")
        raise ProofAbort()
    if form == ":TARGET":
        out(render_term(locals_["TARGET"]) + "\n")
        return None
    if form == ":LHS":
        out(render_term(rule.lhs) + "\n")
        return None
    if form == ":RHS":
        out(render_term(rule.rhs) + "\n")
        return None
    if form == ":HYPS":
        out("(" + " ".join(render_term(h) for h in rule.hyps) + ")\n")
        return None
    if form == ":UNIFY-SUBST":
        subst = locals_.get("UNIFY-SUBST") or {}
        if not subst:
            out("empty substitution\n")
        for name in reversed(list(subst)):
            out(f"{name} : " + render_term(subst[name], indent=len(name) + 3) + "\n")
        return None
    if form == ":TYPE-ALIST":
        out("\n" + decode_type_alist(locals_["TYPE-ALIST"]) + "\n")
        return None
    if form == ":ANCESTORS":
        anc = locals_.get("ANCESTORS") or ()
        if not anc:
            out("empty ancestors\n")
        for a in anc:
            out(render_term(a) + "\n")
        return None
    if form == ":PATH":
        out(render_gstack(status.brr_gstack) + "\n")
        return None
    if form == ":HELP":
        out(HELP_TEXT + "\n")
        return None
    if isinstance(form, tuple) and form and form[0] in ("GET-BRR-LOCAL", "BRR@", "EQUAL",
                                                        "NOT", "AND", "OR", "IF", "QUOTE"):
        from .terms import to_term

        try:
            value = eval_condition(to_term(form), locals_)
            out(print_sexpr(value) + "\n")
        except BrrkitError as e:
            out(f"Error: {e}\n")
        return None
    out(HELP_TEXT + "\n")
    return None


def brkpt1(session, rule: RewriteRule, target: Term, unify_subst: dict,
           ta: TypeAlist, anc: tuple, gs: GStack, ctx: RewriteContext) -> None:
    with session.handler_span("BRKPT1", rule.rune.name):
        for hook in session.flat_hooks:
            hook({"kind": "brkpt1", "rune": rule.rune, "depth": len(gs), "gs": gs,
                  "target": target, "unify": dict(unify_subst), "lhs": rule.lhs,
                  "ancestors": anc})
        if session.mode == "OFF":
            return
        if session.mode == "BRR-DATA" and session.strategy.entry1(anc, gs, ctx):
            from . import brrdata

            brrdata.collect_pre(session, brrdata.make_pre(rule, target, unify_subst,
                                                          ta, anc, gs, ctx))

        def first_form(view):
            status = base_status(view.status.data)
            entry = monitor_find(status.brr_monitored_runes, rule.rune)
            if entry is None:
                return
            if not _inner_breaks_allowed(session, status):
                return
            depth = status_depth(status) + 1
            locals_ = {
                "LEMMA": rule,
                "TARGET": target,
                "UNIFY-SUBST": dict(unify_subst),
                "TYPE-ALIST": ta,
                "ANCESTORS": anc,
                "DEPTH": depth,
            }
            try:
                ok = eval_condition(entry.criteria.condition, locals_) != "NIL"
            except BrrkitError as e:
                session.write(f"Warning: break condition error ({e}); breaking anyway.\n")
                ok = True
            if not ok:
                return
            new = _push_status(session, view, locals_, gs)
            session.write("\n" + open_banner(depth, rule, target) + "\n")
            session.emit_break_open(depth, rule, target, entry.criteria, None)
            _prompt_loop(session, view, new, ctx)

        wormhole_enter(session.wormholes, BRR, first_form, session)


def near_miss_brkpt1(session, rule: RewriteRule, target: Term, ta: TypeAlist,
                     anc: tuple, gs: GStack, ctx: RewriteContext) -> None:
    with session.handler_span("NEAR-MISS-BRKPT1", rule.rune.name):
        for hook in session.flat_hooks:
            hook({"kind": "near-miss-brkpt1", "rune": rule.rune, "depth": len(gs),
                  "gs": gs, "target": target, "lhs": rule.lhs, "ancestors": anc})
        if session.mode == "OFF":
            return

        def first_form(view):
            status = base_status(view.status.data)
            entry = monitor_find(status.brr_monitored_runes, rule.rune)
            if entry is None or not entry.criteria.has_near_miss():
                return
            if not _inner_breaks_allowed(session, status):
                return
            report = brr_near_missp(entry, rule.lhs, target)
            if not report.satisfied:
                return
            depth = status_depth(status) + 1
            locals_ = {
                "LEMMA": rule,
                "TARGET": target,
                "UNIFY-SUBST": {},
                "TYPE-ALIST": ta,
                "ANCESTORS": anc,
                "DEPTH": depth,
                "NEAR-MISS": report,
            }
            new = _push_status(session, view, locals_, gs)
            session.write("\n" + open_banner(depth, rule, target) + "\n")
            session.write("\n" + near_miss_text(report, entry.criteria) + "\n\n")
            session.emit_break_open(depth, rule, target, entry.criteria,
                                    [i.message for i in report.satisfied])
            _prompt_loop(session, view, new, ctx)

        wormhole_enter(session.wormholes, BRR, first_form, session)


def brkpt2(session, rule: RewriteRule, wonp: bool, failure_reason,
           unify_subst, brr_result, gs: GStack, ctx: RewriteContext,
           ta: TypeAlist, anc: tuple) -> None:
    with session.handler_span("BRKPT2", rule.rune.name):
        for hook in session.flat_hooks:
            hook({"kind": "brkpt2", "rune": rule.rune, "depth": len(gs), "gs": gs,
                  "result": brr_result, "failure_reason": failure_reason,
                  "ancestors": anc})
        if session.mode == "OFF":
            return
        if (session.mode == "BRR-DATA" and not isinstance(failure_reason, NearMiss)
                and session.strategy.entry2(anc, gs, ctx)):
            from . import brrdata

            brrdata.collect_post(session, brrdata.make_post(failure_reason, unify_subst,
                                                            brr_result, gs, ctx))

        def first_form(view):
            status = view.status.data
            if status is None or status.brr_gstack != gs:
                return
            locals_ = status.brr_local_alist
            depth = locals_["DEPTH"]
            locals_["WONP"] = wonp
            locals_["FAILURE-REASON"] = failure_reason
            locals_["BRR-RESULT"] = brr_result
            if unify_subst is not None:
                locals_["UNIFY-SUBST"] = dict(unify_subst)
            if "NEAR-MISS" in locals_:
                session.write(f"{depth})\n")
                session.emit_break_close(depth)
                _pop_status(session, view)
                return
            mode = locals_.get("EXIT-MODE", ":GO")
            if mode in (":EVAL", ":EVAL!"):
                session.write("\n" + result_line(depth, mode, rule, wonp,
                                                 failure_reason, brr_result) + "\n")
                _prompt_loop(session, view, status, ctx)
            elif mode in (":GO", ":GO!"):
                session.write("\n" + result_line(depth, mode, rule, wonp,
                                                 failure_reason, brr_result) + "\n")
            session.write(f"{depth})\n")
            session.emit_break_close(depth)
            _pop_status(session, view)

        wormhole_enter(session.wormholes, BRR, first_form, session)
