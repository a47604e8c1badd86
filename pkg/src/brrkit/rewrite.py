"""Clause simplifier and inside-out conditional rewriter.

The rewriter threads a display stack (the "path"), a type-alist of
assumptions, and an ancestors stack that is non-empty exactly while
backchaining.  Three breakpoint handlers are invoked through the session at
fixed points: when a rule's left-hand side fails to match (near miss), when
it matches, and when the attempt completes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import ProofAbort
from .rules import RewriteRule, Rune, World
from .terms import (
    App,
    Quote,
    QUOTE_NIL,
    QUOTE_T,
    Term,
    Var,
    match,
    quoted_lambda,
    render_term,
    render_term_block,
    subst_apply,
    term_order_less,
    term_vars,
    to_term,
)

# ---------------------------------------------------------------------------
# Display frames

_ORDINALS = ("first", "second", "third", "fourth", "fifth",
             "sixth", "seventh", "eighth", "ninth", "tenth")


def ordinal(n: int) -> str:
    return _ORDINALS[n - 1] if 1 <= n <= 10 else f"#{n}"


def _subst_block(subst: dict) -> str:
    if not subst:
        return ""
    lines = ["   under the substitution"]
    for name in reversed(list(subst)):
        lines.append("     " + name + " : " + render_term(subst[name], indent=5 + len(name) + 3))
    return "\n" + "\n".join(lines)


@dataclass(frozen=True)
class SimplifyingClause:
    clause: "Clause"

    def render(self) -> str:
        return "Simplifying the clause\n" + render_clause_block(self.clause, 5)


@dataclass(frozen=True)
class RewritingLiteralAtom:
    ordinal: int
    term: Term

    def render(self) -> str:
        return (f"Rewriting (to simplify) the atom of the {ordinal(self.ordinal)} literal,\n"
                + render_term_block(self.term, 5) + ",")


@dataclass(frozen=True)
class RewritingArg:
    ordinal: int
    term: Term
    subst: tuple = ()  # substitution as an items tuple, binding order

    def render(self) -> str:
        return (f"Rewriting (to simplify) the {ordinal(self.ordinal)} argument,\n"
                + render_term_block(self.term, 5) + ","
                + _subst_block(dict(self.subst)))


@dataclass(frozen=True)
class ApplyingRule:
    rune: Rune
    target: Term

    def render(self) -> str:
        return (f"Attempting to apply {self.rune} to\n"
                + render_term_block(self.target, 5))


@dataclass(frozen=True)
class RewritingBody:
    term: Term
    subst: tuple = ()

    def render(self) -> str:
        return ("Rewriting (to simplify) the body,\n"
                + render_term_block(self.term, 5) + ","
                + _subst_block(dict(self.subst)))


@dataclass(frozen=True)
class RewritingRhs:
    term: Term
    subst: tuple = ()

    def render(self) -> str:
        return ("Rewriting (to simplify) the rhs of the conclusion,\n"
                + render_term_block(self.term, 5) + ","
                + _subst_block(dict(self.subst)))


GStackFrame = Union[SimplifyingClause, RewritingLiteralAtom, RewritingArg,
                    ApplyingRule, RewritingBody, RewritingRhs]
GStack = tuple


def render_gstack(gs: GStack) -> str:
    """Numbered cw-gstack display, outermost frame first."""
    return "\n".join(f"{i}. {frame.render()}" for i, frame in enumerate(gs, 1))


# ---------------------------------------------------------------------------
# Clauses


@dataclass(frozen=True)
class Clause:
    literals: tuple


def render_clause_block(cl: Clause, indent: int) -> str:
    flats = [render_term(lit, indent + 1) for lit in cl.literals]
    one = "(" + " ".join(flats) + ")"
    if indent + len(one) <= 79 and "\n" not in one:
        return " " * indent + one
    sep = "\n" + " " * (indent + 1)
    return " " * indent + "(" + sep.join(flats) + ")"


def negate(t: Term) -> Term:
    if isinstance(t, App) and t.fn == "NOT" and len(t.args) == 1:
        return t.args[0]
    return App("NOT", (t,))


def conjuncts(t: Term) -> list:
    """Flatten the translated AND shape (IF a b 'NIL)."""
    if (isinstance(t, App) and t.fn == "IF" and len(t.args) == 3
            and t.args[2] == QUOTE_NIL):
        return [t.args[0]] + conjuncts(t.args[1])
    return [t]


def clausify(goal: Term) -> Clause:
    """((not h1) ... concl) via IMPLIES/AND flattening."""
    lits: list = []
    t = goal
    while isinstance(t, App) and t.fn == "IMPLIES" and len(t.args) == 2:
        for h in conjuncts(t.args[0]):
            lits.append(negate(h))
        t = t.args[1]
    lits.append(t)
    return Clause(tuple(lits))


def clause_to_goal(cl: Clause) -> Term:
    """Display form: rebuild (IMPLIES (AND h1 ...) concl) from a clause."""
    if not cl.literals:
        return QUOTE_NIL
    *hyp_lits, concl = cl.literals
    hyps = [negate(l) for l in hyp_lits]
    if not hyps:
        return concl
    if len(hyps) == 1:
        hyp = hyps[0]
    else:
        hyp = App("AND", tuple(hyps))
    return App("IMPLIES", (hyp, concl))


# ---------------------------------------------------------------------------
# Type-alist


@dataclass(frozen=True)
class TypeAlist:
    entries: tuple = ()  # ((term, truth) ...), most recent first

    def truth(self, t: Term) -> Optional[bool]:
        for term, truth in self.entries:
            if term == t:
                return truth
        return None

    def equality_rhs(self, t: Term) -> Optional[Term]:
        """The b of the first assumed-true (EQUAL a b) whose a equals t,
        applied only when a is not syntactically smaller than b."""
        from .terms import term_size

        for term, truth in self.entries:
            if (truth and isinstance(term, App) and term.fn == "EQUAL"
                    and len(term.args) == 2 and term.args[0] == t
                    and term_size(term.args[0]) >= term_size(term.args[1])):
                return term.args[1]
        return None

    def assume(self, t: Term, truth: bool) -> "TypeAlist":
        known = self.truth(t)
        if known is not None:
            return self
        return TypeAlist(((t, truth),) + self.entries)

    def true_terms(self) -> list:
        return [term for term, truth in self.entries if truth]


def decode_type_alist(ta: TypeAlist) -> str:
    """Grouped display: equalities as *TS-T*, (CONSP x) as x with *TS-CONS*,
    other true terms as non-NIL, false terms as *TS-NIL*."""
    groups: list = []  # (type string, [term lines]) in first-seen order

    def bucket(ty: str, term: Term) -> None:
        for t, items in groups:
            if t == ty:
                items.append(term)
                return
        groups.append((ty, [term]))

    for term, truth in ta.entries:
        if not truth:
            bucket("*TS-NIL*", term)
        elif isinstance(term, App) and term.fn == "EQUAL":
            bucket("*TS-T*", term)
        elif isinstance(term, App) and term.fn == "CONSP" and len(term.args) == 1:
            bucket("*TS-CONS*", term.args[0])
        else:
            bucket("(TS-COMPLEMENT *TS-NIL*)", term)

    lines = ["Decoded type-alist:"]
    for ty, items in groups:
        lines.append("-----")
        lines.append(f"Terms with type {ty}:")
        for t in items:
            lines.append(render_term(t, 0))
    lines.append("")
    lines.append("==========")
    lines.append("Use (GET-BRR-LOCAL 'TYPE-ALIST) to see actual type-alist.")
    return "\n".join(lines)


Ancestors = tuple  # stack of hypothesis instances being relieved


# ---------------------------------------------------------------------------
# Failure reasons


@dataclass(frozen=True)
class HypFailed:
    index: int
    rewrote_to: Term

    def describe(self) -> str:
        return f":HYP {self.index} rewrote to {render_term(self.rewrote_to)}"


@dataclass(frozen=True)
class FreeVarsNotFound:
    index: int

    def describe(self) -> str:
        return f":HYP {self.index} contains free variables that were not bound"


@dataclass(frozen=True)
class BackchainLimit:
    def describe(self) -> str:
        return "the backchain limit was exceeded"


@dataclass(frozen=True)
class LoopStopper:
    def describe(self) -> str:
        return "the replacement was rejected by the permutative loop stopper"


@dataclass(frozen=True)
class NearMiss:
    def describe(self) -> str:
        return "the left-hand side did not match the target"


@dataclass(frozen=True)
class ConditionFalse:
    def describe(self) -> str:
        return "the rule's condition evaluated to false"


FailureReason = Union[HypFailed, FreeVarsNotFound, BackchainLimit,
                      LoopStopper, NearMiss, ConditionFalse]


# ---------------------------------------------------------------------------
# Context and outcome


class _NullSession:
    """Handler sink used when rewriting outside an interactive session."""

    def brkpt1(self, *a, **kw):
        return None

    def brkpt2(self, *a, **kw):
        return None

    def near_miss_brkpt1(self, *a, **kw):
        return None


@dataclass
class RewriteContext:
    world: World
    session: object = field(default_factory=_NullSession)
    step_budget: int = 20000
    backchain_limit: int = 3
    depth_limit: int = 100
    lambda_rewrite: bool = True
    steps_used: int = 0
    depth: int = 0
    ttree: set = field(default_factory=set)
    events: list = field(default_factory=list)
    pot_list: tuple = ()  # always empty; kept for record shape

    def step(self) -> bool:
        """Consume one step; False when the budget is exhausted."""
        self.steps_used += 1
        if self.steps_used > self.step_budget:
            if "step budget exhausted" not in self.events:
                self.events.append("step budget exhausted")
            return False
        return True


@dataclass(frozen=True)
class ProofOutcome:
    proved: bool
    checkpoints: tuple
    log: tuple
    aborted: bool = False


# ---------------------------------------------------------------------------
# The rewriter


def rewrite(t: Term, s: dict, ta: TypeAlist, anc: Ancestors,
            gs: GStack, ctx: RewriteContext) -> Term:
    if not ctx.step():
        return subst_apply(s, t)
    if ctx.depth >= ctx.depth_limit:
        if "rewrite depth limit reached" not in ctx.events:
            ctx.events.append("rewrite depth limit reached")
        return subst_apply(s, t)
    ctx.depth += 1
    try:
        return _rewrite1(t, s, ta, anc, gs, ctx)
    finally:
        ctx.depth -= 1


def _rewrite1(t: Term, s: dict, ta: TypeAlist, anc: Ancestors,
              gs: GStack, ctx: RewriteContext) -> Term:
    if isinstance(t, Var):
        return s.get(t.name, t)
    if isinstance(t, Quote):
        return t
    if t.fn == "IF" and len(t.args) == 3:
        return _rewrite_if(t, s, ta, anc, gs, ctx)

    args = []
    for i, arg in enumerate(t.args, 1):
        frame = RewritingArg(i, arg, tuple(s.items()))
        new = rewrite(arg, s, ta, anc, gs + (frame,), ctx)
        if ctx.lambda_rewrite and (t.fn, i) in ctx.world.fn_slots:
            new = rewrite_lambda_object(new, ctx, gs + (frame,))
        args.append(new)
    t2 = App(t.fn, tuple(args))

    if t2.fn == "EQUAL" and len(t2.args) == 2:
        a, b = t2.args
        if a == b:
            return QUOTE_T
        if isinstance(a, Quote) and isinstance(b, Quote):
            return QUOTE_NIL

    truth = ta.truth(t2)
    if truth is not None:
        return QUOTE_T if truth else QUOTE_NIL
    rhs = ta.equality_rhs(t2)
    if rhs is not None:
        return rhs
    return try_rules(t2, ta, anc, gs, ctx)


def _rewrite_if(t: App, s: dict, ta: TypeAlist, anc: Ancestors,
                gs: GStack, ctx: RewriteContext) -> Term:
    test_frame = RewritingArg(1, t.args[0], tuple(s.items()))
    test = rewrite(t.args[0], s, ta, anc, gs + (test_frame,), ctx)

    def branch(i: int, extended: TypeAlist) -> Term:
        frame = RewritingArg(i + 1, t.args[i], tuple(s.items()))
        return rewrite(t.args[i], s, extended, anc, gs + (frame,), ctx)

    if isinstance(test, Quote):
        return branch(2, ta) if test.value == "NIL" else branch(1, ta)
    known = ta.truth(test)
    if known is not None:
        return branch(1, ta) if known else branch(2, ta)
    then = branch(1, ta.assume(test, True))
    other = branch(2, ta.assume(test, False))
    if then == other:
        return then
    return App("IF", (test, then, other))


def rewrite_lambda_object(t: Term, ctx: RewriteContext, gs: GStack = ()) -> Term:
    """Rewrite the body of a quoted LAMBDA sitting in a registered slot.
    The body is rewritten under an empty type-alist and empty ancestors,
    but on the caller's display stack so subsidiarity is preserved."""
    ql = quoted_lambda(t)
    if ql is None or not ctx.lambda_rewrite:
        return t
    body = to_term(ql.body, vars=set(ql.formals))
    new_body = rewrite(body, {}, TypeAlist(), (), gs, ctx)
    if new_body == body:
        return t
    from .terms import term_to_sexpr

    formals = ql.formals if ql.formals else "NIL"
    return Quote(("LAMBDA", formals, term_to_sexpr(new_body)))


def try_rules(target: App, ta: TypeAlist, anc: Ancestors,
              gs: GStack, ctx: RewriteContext) -> Term:
    session = ctx.session
    for rule in ctx.world.rules_for(target.fn):
        if not rule.enabled:
            continue
        if not ctx.step():
            return target
        gs2 = gs + (ApplyingRule(rule.rune, target),)
        u = match(rule.lhs, target)
        if u is None:
            session.near_miss_brkpt1(rule, target, ta, anc, gs2, ctx)
            session.brkpt2(rule, False, NearMiss(), None, None, gs2, ctx, ta, anc)
            continue
        session.brkpt1(rule, target, u, ta, anc, gs2, ctx)
        relieved = relieve_hyps(rule, u, ta, anc, gs2, ctx)
        if not isinstance(relieved, dict):
            session.brkpt2(rule, False, relieved, u, None, gs2, ctx, ta, anc)
            continue
        u2 = relieved
        if rule.permutative and not term_order_less(subst_apply(u2, rule.rhs), target):
            session.brkpt2(rule, False, LoopStopper(), u2, None, gs2, ctx, ta, anc)
            continue
        if rule.rune.cls == "DEFINITION":
            frame: GStackFrame = RewritingBody(rule.rhs, tuple(u2.items()))
        else:
            frame = RewritingRhs(rule.rhs, tuple(u2.items()))
        result = rewrite(rule.rhs, u2, ta, anc, gs2 + (frame,), ctx)
        ctx.ttree.add(rule.rune)
        session.brkpt2(rule, True, None, u2, result, gs2, ctx, ta, anc)
        return result
    return target


def relieve_hyps(rule: RewriteRule, u: dict, ta: TypeAlist, anc: Ancestors,
                 gs: GStack, ctx: RewriteContext):
    """Relieve hypotheses in order; returns the extended substitution or the
    first failure.  Bound hypotheses are rewritten with the instance pushed
    onto ancestors (backchaining); free-variable hypotheses take the first
    matching assumed-true term."""
    u = dict(u)
    for i, hyp in enumerate(rule.hyps, 1):
        free = term_vars(hyp) - set(u)
        if free:
            found = None
            for candidate in ta.true_terms():
                m = match(hyp, candidate, init=u)
                if m is not None:
                    found = m
                    break
            if found is None:
                return FreeVarsNotFound(i)
            u = found
            continue
        if len(anc) >= ctx.backchain_limit:
            return BackchainLimit()
        instance = subst_apply(u, hyp)
        res = rewrite(hyp, u, ta, anc + (instance,), gs, ctx)
        if res != QUOTE_T:
            return HypFailed(i, res)
    return u


# ---------------------------------------------------------------------------
# Clause simplification and the prover driver


def _literal_parts(lit: Term):
    if isinstance(lit, App) and lit.fn == "NOT" and len(lit.args) == 1:
        return True, lit.args[0]
    return False, lit


def _assume_others(cl: Clause, skip: int) -> TypeAlist:
    ta = TypeAlist()
    for j, lit in enumerate(cl.literals):
        if j == skip or isinstance(lit, Quote):
            continue
        negated, atom = _literal_parts(lit)
        ta = ta.assume(atom, negated)
    return ta


def simplify_clause(cl: Clause, ctx: RewriteContext):
    """One pass: rewrite each literal's atom under the assumption that every
    other literal of the input clause is false.  Returns (clause, proved)."""
    gs: GStack = (SimplifyingClause(cl),)
    new_lits: list = []
    for i, lit in enumerate(cl.literals):
        negated, atom = _literal_parts(lit)
        if isinstance(atom, Quote):
            res = atom
        else:
            ta = _assume_others(cl, i)
            frame = RewritingLiteralAtom(i + 1, atom)
            res = rewrite(atom, {}, ta, (), gs + (frame,), ctx)
        if isinstance(res, Quote):
            truthy = res.value != "NIL"
            lit_true = (not truthy) if negated else truthy
            if lit_true:
                return cl, True
            continue  # false literal: drop it
        new_lits.append(negate(res) if negated else res)
    return Clause(tuple(new_lits)), False


def prove(goal: Term, ctx: RewriteContext) -> ProofOutcome:
    """Flatten the goal into a clause and simplify to a fixpoint.  Proved
    when a literal rewrites to true; otherwise the final clause is the
    checkpoint."""
    cl = clausify(goal)
    session = ctx.session
    try:
        while True:
            cl2, proved = simplify_clause(cl, ctx)
            if proved:
                return ProofOutcome(True, (), tuple(ctx.events))
            if cl2 == cl or ctx.steps_used > ctx.step_budget:
                return ProofOutcome(False, (cl2,), tuple(ctx.events))
            cl = cl2
    except ProofAbort:
        ctx.events.append("proof aborted")
        return ProofOutcome(False, (cl,), tuple(ctx.events), aborted=True)
    finally:
        cleanup = getattr(session, "cleanup_brr_stack", None)
        if cleanup is not None:
            cleanup()
