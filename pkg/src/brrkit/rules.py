"""Rewrite/definition rules, enable status, monitor entries and the world.

The world is an immutable value: every update returns a new world.  Rules
for a head symbol are kept most-recent-first, so the rule added last is
tried first.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import BrrkitError
from .terms import (
    App,
    ArityTable,
    QUOTE_T,
    SExpr,
    Term,
    Var,
    is_keyword,
    match,
    print_sexpr,
    print_term,
    term_vars,
    to_term,
)


@dataclass(frozen=True)
class Rune:
    cls: str  # "REWRITE" or "DEFINITION"
    name: str

    def __str__(self) -> str:
        return f"(:{self.cls} {self.name})"


def _is_permutative(lhs: Term, rhs: Term) -> bool:
    """lhs and rhs are variable permutations of each other."""
    s = match(lhs, rhs)
    if s is None:
        return False
    if not all(isinstance(v, Var) for v in s.values()):
        return False
    images = [v.name for v in s.values()]
    return sorted(images) == sorted(s.keys())


@dataclass(frozen=True)
class RewriteRule:
    rune: Rune
    hyps: tuple
    lhs: Term
    rhs: Term
    enabled: bool = True
    permutative: bool = False

    @property
    def free_vars(self) -> frozenset:
        """Hypothesis variables that do not occur in the left-hand side."""
        lhs_vars = term_vars(self.lhs)
        out = set()
        for h in self.hyps:
            out |= term_vars(h) - lhs_vars
        return frozenset(out)


def make_rule(cls: str, name: str, hyps, lhs: Term, rhs: Term) -> RewriteRule:
    if not isinstance(lhs, App):
        raise BrrkitError(f"rule {name}: left-hand side must be a function application")
    lhs_vars = term_vars(lhs)
    bad = term_vars(rhs) - lhs_vars
    if bad:
        raise BrrkitError(f"rule {name}: right-hand side uses variables not in lhs: {sorted(bad)}")
    if cls == "DEFINITION":
        if hyps:
            raise BrrkitError(f"definition {name}: hypotheses are not allowed")
        if not all(isinstance(a, Var) for a in lhs.args):
            raise BrrkitError(f"definition {name}: lhs arguments must be distinct variables")
        if len({a.name for a in lhs.args}) != len(lhs.args):
            raise BrrkitError(f"definition {name}: lhs variables must be distinct")
    return RewriteRule(
        rune=Rune(cls, name),
        hyps=tuple(hyps),
        lhs=lhs,
        rhs=rhs,
        permutative=_is_permutative(lhs, rhs),
    )


# ---------------------------------------------------------------------------
# Break criteria and monitors


@dataclass(frozen=True)
class BreakCriteria:
    condition: Term = QUOTE_T
    lamb: bool = False
    depth: Optional[int] = None
    abstraction: Optional[Term] = None

    def has_near_miss(self) -> bool:
        return self.lamb or self.depth is not None or self.abstraction is not None

    def __str__(self) -> str:
        parts = [":CONDITION " + print_term(self.condition)]
        if self.lamb:
            parts.append(":LAMBDA T")
        if self.depth is not None:
            parts.append(f":DEPTH {self.depth}")
        if self.abstraction is not None:
            parts.append(":ABSTRACTION " + print_term(self.abstraction))
        return "(" + " ".join(parts) + ")"


def parse_criteria(sexpr: SExpr) -> BreakCriteria:
    """Accept t, a (:condition/:lambda/:depth/:abstraction ...) keyword list,
    or a bare condition expression such as (equal (brr@ :target) 'tm)."""
    if isinstance(sexpr, tuple) and len(sexpr) == 2 and sexpr[0] == "QUOTE":
        sexpr = sexpr[1]
    if sexpr == "T":
        return BreakCriteria()
    if not isinstance(sexpr, tuple):
        raise BrrkitError(f"malformed break criteria: {print_sexpr(sexpr)}")
    known = {":CONDITION", ":LAMBDA", ":DEPTH", ":ABSTRACTION"}
    if sexpr[0] not in known:
        return BreakCriteria(condition=to_term(sexpr))
    if len(sexpr) % 2 != 0:
        raise BrrkitError(f"malformed break criteria: {print_sexpr(sexpr)}")
    kw = dict(zip(sexpr[0::2], sexpr[1::2]))
    unknown = set(kw) - known
    if unknown:
        raise BrrkitError(f"unknown break criteria keys: {sorted(unknown)}")
    crit = BreakCriteria()
    if ":CONDITION" in kw:
        crit = replace(crit, condition=to_term(kw[":CONDITION"]))
    if ":LAMBDA" in kw:
        crit = replace(crit, lamb=kw[":LAMBDA"] != "NIL")
    if ":DEPTH" in kw:
        d = kw[":DEPTH"]
        if not isinstance(d, int) or d < 0:
            raise BrrkitError(":depth expects a natural number")
        crit = replace(crit, depth=d)
    if ":ABSTRACTION" in kw:
        crit = replace(crit, abstraction=to_term(kw[":ABSTRACTION"]))
    return crit


@dataclass(frozen=True)
class MonitorEntry:
    rune: Rune
    criteria: BreakCriteria


def monitor_add(entries: tuple, entry: MonitorEntry) -> tuple:
    """Install or replace the entry for entry.rune; at most one per rune."""
    kept = tuple(e for e in entries if e.rune != entry.rune)
    return kept + (entry,)


def monitor_remove(entries: tuple, rune: Rune) -> tuple:
    return tuple(e for e in entries if e.rune != rune)


def monitor_find(entries: tuple, rune: Rune) -> Optional[MonitorEntry]:
    for e in entries:
        if e.rune == rune:
            return e
    return None


# ---------------------------------------------------------------------------
# The world


@dataclass(frozen=True)
class World:
    rules: dict = field(default_factory=dict)      # head symbol -> tuple, newest first
    aliases: dict = field(default_factory=dict)    # sugar name -> (target, assoc)
    fn_slots: frozenset = frozenset()              # (fn, 1-based arg position) pairs

    def rules_for(self, fn: str) -> tuple:
        return self.rules.get(fn, ())

    def all_rules(self):
        for group in self.rules.values():
            yield from group

    def find_rule(self, name: str) -> Optional[RewriteRule]:
        for r in self.all_rules():
            if r.rune.name == name:
                return r
        return None

    def find_rune(self, name: str) -> Optional[Rune]:
        r = self.find_rule(name)
        return r.rune if r else None


def add_rule(w: World, r: RewriteRule) -> World:
    if w.find_rule(r.rune.name) is not None:
        raise BrrkitError(f"duplicate rule name: {r.rune.name}")
    rules = dict(w.rules)
    head = r.lhs.fn
    rules[head] = (r,) + rules.get(head, ())
    return replace(w, rules=rules)


def set_enabled(w: World, name: str, flag: bool) -> World:
    rule = w.find_rule(name)
    if rule is None:
        raise BrrkitError(f"unknown rule: {name}")
    head = rule.lhs.fn
    group = tuple(replace(r, enabled=flag) if r.rune.name == name else r
                  for r in w.rules[head])
    rules = dict(w.rules)
    rules[head] = group
    return replace(w, rules=rules)


def add_alias(w: World, name: str, target: str, assoc: str = "RIGHT") -> World:
    aliases = dict(w.aliases)
    aliases[name] = (target, assoc)
    return replace(w, aliases=aliases)


def add_fn_slot(w: World, fn: str, pos: int) -> World:
    return replace(w, fn_slots=w.fn_slots | {(fn, pos)})


# ---------------------------------------------------------------------------
# Rule file format
#
#   (defrule NAME :class :rewrite|:definition :hyps (h1 ...) :lhs L :rhs R)
#   (alias APPEND BINARY-APPEND :arity 2 :assoc right)
#   (fn-slot ALWAYS$ 1)


def _plist(items: tuple) -> dict:
    if len(items) % 2 != 0:
        raise BrrkitError("keyword list has an odd number of elements")
    out = {}
    for k, v in zip(items[0::2], items[1::2]):
        if not is_keyword(k):
            raise BrrkitError(f"expected a keyword, got {print_sexpr(k)}")
        out[k] = v
    return out


def world_form(w: World, form: SExpr, arities: Optional[ArityTable] = None) -> World:
    if not isinstance(form, tuple) or not form:
        raise BrrkitError(f"bad rule-file form: {print_sexpr(form)}")
    head = form[0]
    if head == "DEFRULE":
        if len(form) < 2 or not isinstance(form[1], str):
            raise BrrkitError("defrule needs a name")
        name = form[1]
        kw = _plist(form[2:])
        cls_kw = kw.get(":CLASS", ":REWRITE")
        if cls_kw not in (":REWRITE", ":DEFINITION"):
            raise BrrkitError(f"defrule {name}: :class must be :rewrite or :definition")
        cls = cls_kw[1:]
        if ":LHS" not in kw or ":RHS" not in kw:
            raise BrrkitError(f"defrule {name}: :lhs and :rhs are required")
        hyps_sexpr = kw.get(":HYPS", "NIL")
        hyps_list: tuple = () if hyps_sexpr == "NIL" else hyps_sexpr
        if not isinstance(hyps_list, tuple):
            raise BrrkitError(f"defrule {name}: :hyps expects a list")
        hyps = tuple(to_term(h, None, w.aliases, arities) for h in hyps_list)
        lhs = to_term(kw[":LHS"], None, w.aliases, arities)
        rhs = to_term(kw[":RHS"], None, w.aliases, arities)
        return add_rule(w, make_rule(cls, name, hyps, lhs, rhs))
    if head == "ALIAS":
        if len(form) < 3:
            raise BrrkitError("alias needs a name and a target")
        kw = _plist(form[3:])
        assoc = kw.get(":ASSOC", "RIGHT")
        if isinstance(assoc, str) and assoc.startswith(":"):
            assoc = assoc[1:]
        return add_alias(w, form[1], form[2], assoc)
    if head == "FN-SLOT":
        if len(form) != 3 or not isinstance(form[2], int):
            raise BrrkitError("fn-slot needs a function symbol and an argument position")
        return add_fn_slot(w, form[1], form[2])
    raise BrrkitError(f"unknown rule-file form: {print_sexpr(form)}")
