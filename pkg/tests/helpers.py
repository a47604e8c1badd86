"""Shared test utilities: world builders, scripted sessions, and the
brute-force oracles the property suites compare against."""

from __future__ import annotations

import io
import itertools
import random

from brrkit.brrdata import BrrData, BrrData1, BrrData2
from brrkit.rewrite import TypeAlist
from brrkit.rules import World, make_rule, world_form
from brrkit.session import ScriptSource, Session, repl
from brrkit.terms import (
    App,
    Quote,
    Term,
    Var,
    parse,
    parse_all,
    subst_apply,
    subterms,
    term_vars,
    to_term,
)


def mk(text: str, vars=None) -> Term:
    return to_term(parse(text), vars)


def build_world(text: str) -> World:
    w = World()
    for form in parse_all(text):
        w = world_form(w, form)
    return w


def run_session(script: str, rules: str = "", setup=None):
    """Run a scripted session; returns (session, transcript).  Every
    handler invocation is recorded flat on session._flat_events."""
    sink = io.StringIO()
    session = Session(io=ScriptSource(script), out=sink)
    session._flat_events = []
    session.flat_hooks.append(session._flat_events.append)
    if rules:
        session.load_rules_text(rules)
    if setup:
        setup(session)
    repl(session)
    return session, sink.getvalue()


PQR_RULES = """
(defrule p-rule :class :rewrite :hyps ((q x)) :lhs (p (f x y)) :rhs 't)
(defrule q-rule1 :class :rewrite :hyps ((r x)) :lhs (q x) :rhs 't)
"""

PQR_RULES_WITH_Q2 = PQR_RULES + """
(defrule q-rule2 :class :rewrite :hyps ((s x)) :lhs (q x) :rhs 't)
"""

REV_RULES = """
(alias append binary-append :arity 2 :assoc :right)
(defrule revappend-removal :class :rewrite :lhs (revappend x y) :rhs (append (rev x) y))
"""

REVERSE_RULES = REV_RULES + """
(defrule append-atom-under-list-equiv :class :rewrite :lhs (append x 'nil) :rhs x)
(defrule reverse :class :definition :lhs (reverse x)
  :rhs (if (stringp x)
           (coerce (revappend (coerce x 'list) 'nil) 'string)
           (revappend x 'nil)))
"""

CHAIN_RULES = """
(defrule r1 :class :rewrite :lhs (f1 x) :rhs (f2 x))
(defrule r2 :class :rewrite :lhs (f2 x) :rhs (f3 x))
"""

LOOP_RULES = """
(fn-slot always$ 1)
(defrule atom :class :definition :lhs (atom x) :rhs (if (consp x) 'nil 't))
(defrule lemma-a :class :rewrite
  :lhs (always$ '(lambda (loop$-ivar) (atom loop$-ivar)) (nats n)) :rhs 't)
"""


# ---------------------------------------------------------------------------
# Brute-force oracles


def all_positions(t: Term):
    """Every subterm occurrence, by explicit position enumeration."""
    out = [t]
    if isinstance(t, App):
        for a in t.args:
            out.extend(all_positions(a))
    return out


def brute_force_match(pattern: Term, target: Term):
    """Enumerate substitutions drawn from target subterms."""
    vs = sorted(term_vars(pattern))
    if not vs:
        return {} if pattern == target else None
    candidates = list({s for s in subterms(target)})
    for combo in itertools.product(candidates, repeat=len(vs)):
        s = dict(zip(vs, combo))
        if subst_apply(s, pattern) == target:
            return s
    return None


def random_term(rng: random.Random, depth: int = 3, fns=("F", "G", "H"),
                vars_=("X", "Y", "Z"), max_arity: int = 2,
                quotes=("T", "NIL", 0, 1)) -> Term:
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.7:
            return Var(rng.choice(vars_))
        return Quote(rng.choice(quotes))
    fn = rng.choice(fns)
    n = rng.randint(1, max_arity)
    return App(fn, tuple(random_term(rng, depth - 1, fns, vars_, max_arity, quotes)
                         for _ in range(n)))


# ---------------------------------------------------------------------------
# Direct record-forest construction for query oracles


_DUMMY_RULE = make_rule("REWRITE", "DUMMY", (), mk("(DUMMY-F X)", {"X"}), mk("X", {"X"}))


def make_record(target: Term, result: Term, gstack: tuple = ("frame0",),
                children: tuple = (), rule=None, failure=None) -> BrrData:
    pre = BrrData1(lemma=rule or _DUMMY_RULE, target=target, unify_subst=(),
                   type_alist=TypeAlist(), pot_list=(), ancestors=(),
                   rcnst=(), initial_ttree=frozenset(), gstack=gstack)
    post = BrrData2(failure_reason=failure, unify_subst=(), brr_result=result,
                    rcnst=(), final_ttree=frozenset(), gstack=gstack)
    return BrrData(pre=pre, post=post, completed=tuple(children))


def random_forest(rng: random.Random, n_top: int = 4, max_children: int = 3,
                  depth: int = 2, gstack=("root",)) -> list:
    out = []
    for i in range(n_top):
        gs = gstack + (f"app{rng.randrange(10**9)}",)
        kids = ()
        if depth > 0 and rng.random() < 0.6:
            kids = tuple(random_forest(rng, rng.randint(1, max_children),
                                       max_children, depth - 1, gs))
        out.append(make_record(random_term(rng, 2), random_term(rng, 2),
                               gstack=gs, children=kids))
    return out
