"""Origin queries over collected rule-application records.

A query names a term (or a :free pattern).  The search walks the records in
application order, depth first, and returns the product: the first
application whose result, but not its target, contains the term.  The
displayed stack then extends past the product while the latest subsidiary
application still carries the term in its result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .brrdata import BrrData
from .errors import BrrkitError
from .rewrite import render_gstack
from .terms import (
    SExpr,
    Term,
    Var,
    match,
    occurs_subterm,
    render_term,
    render_term_block,
    subst_apply,
    subterms,
    term_vars,
    to_term,
)


@dataclass(frozen=True)
class QueryPattern:
    term: Term
    free_vars: frozenset = frozenset()


def parse_query_pattern(sexpr: SExpr, goal_vars: Optional[set] = None,
                        aliases: Optional[dict] = None) -> QueryPattern:
    """Parse tm or (:free (v...) tm).  Non-free symbols are taken literally
    (the goal's variables stay variables); the :free list declares the
    instantiable ones."""
    free: set = set()
    if isinstance(sexpr, tuple) and sexpr and sexpr[0] == ":FREE":
        if len(sexpr) != 3:
            raise BrrkitError("(:free (v1 ...) tm) expects a variable list and a term")
        vs = sexpr[1]
        if vs == "NIL":
            vs = ()
        if not isinstance(vs, tuple) or not all(isinstance(v, str) for v in vs):
            raise BrrkitError(":free expects a list of variables")
        free = set(vs)
        sexpr = sexpr[2]
    vars_for_parse = None if goal_vars is None else (set(goal_vars) | free)
    term = to_term(sexpr, vars_for_parse, aliases)
    return QueryPattern(term, frozenset(free & term_vars(term)))


@dataclass(frozen=True)
class QueryResult:
    product: BrrData
    stack: tuple
    final_result: Term
    product_result: Optional[Term]
    matched_instance: Term


@dataclass
class QueryCursor:
    pattern: QueryPattern
    mode: str  # "subterm" | "term"
    excluded: set = field(default_factory=set)


def _walk(data, excluded: set) -> Iterator[BrrData]:
    """Depth-first, application order, skipping excluded subtrees whole."""
    for r in data:
        if id(r) in excluded:
            continue
        yield r
        yield from _walk(r.completed, excluded)


def _instances(p: QueryPattern, candidate: Term, mode: str) -> Iterator[Term]:
    """Instances of the pattern found in candidate: the result term itself
    for mode=term, otherwise every matching subterm, innermost first."""
    if not p.free_vars:
        if mode == "term":
            if candidate == p.term:
                yield p.term
        elif occurs_subterm(p.term, candidate):
            yield p.term
        return
    pinned = {v: Var(v) for v in term_vars(p.term) - p.free_vars}
    scan = [candidate] if mode == "term" else subterms(candidate)
    for sub in scan:
        s = match(p.term, sub, init=pinned)
        if s is not None:
            yield subst_apply(s, p.term)


def _contains(instance: Term, result: Optional[Term], mode: str) -> bool:
    if result is None:
        return False
    if mode == "term":
        return result == instance
    return occurs_subterm(instance, result)


def find_product(data, p: QueryPattern, mode: str = "subterm",
                 excluded: Optional[set] = None):
    """First record (with its pattern instance) whose result, but not its
    target, carries the instance; None when there is none."""
    excluded = excluded or set()
    for r in _walk(data, excluded):
        if r.post.brr_result is None:
            continue
        for instance in _instances(p, r.post.brr_result, mode):
            if mode == "term":
                if r.pre.target != instance:
                    return r, instance
            elif not occurs_subterm(instance, r.pre.target):
                return r, instance
    return None


def extend_stack(product: BrrData, instance: Term, mode: str = "subterm"):
    """Descend into the last suitable child while one exists; a child is
    suitable when its result still contains the instance."""
    node = product
    descended = False
    while True:
        nxt = None
        for child in node.completed:
            if _contains(instance, child.post.brr_result, mode):
                nxt = child
        if nxt is None:
            break
        node = nxt
        descended = True
    product_result = product.post.brr_result if descended else None
    return node.pre.gstack, node.post.brr_result, product_result


def subtree_ids(r: BrrData) -> set:
    out = {id(r)}
    for c in r.completed:
        out |= subtree_ids(c)
    return out


def render_query_result(res: QueryResult) -> str:
    lines = [render_gstack(res.stack)]
    lines.append("The resulting (translated) term is")
    lines.append(render_term_block(res.final_result, 2) + ".")
    if res.product_result is not None:
        frame_no = len(res.product.pre.gstack)
        lines.append("Note: The first lemma application above that provides a suitable result")
        lines.append(f"is at frame {frame_no}, and that result is")
        lines.append(render_term_block(res.product_result, 2) + ".")
    return "\n".join(lines)


NO_DATA_MESSAGE = "No brr-data is available; run (with-brr-data ...) first."


def run_query(data, p: QueryPattern, mode: str, excluded: Optional[set] = None
              ) -> Optional[QueryResult]:
    found = find_product(data, p, mode, excluded)
    if found is None:
        return None
    product, instance = found
    stack, final_result, product_result = extend_stack(product, instance, mode)
    return QueryResult(product, stack, final_result, product_result, instance)


def query_text(data, p: QueryPattern, mode: str) -> str:
    res = run_query(data, p, mode)
    if res is None:
        what = "introduces" if mode == "subterm" else "produces"
        return f"No rule application found that {what} {render_term(p.term)}."
    return render_query_result(res)


def cursor_next(data, cursor: QueryCursor) -> tuple:
    """(text, result or None) for the next result of an iterative query;
    each product and its whole subtree joins the excluded set."""
    res = run_query(data, cursor.pattern, cursor.mode, cursor.excluded)
    if res is None:
        return "No further rule applications found.", None
    cursor.excluded |= subtree_ids(res.product)
    return render_query_result(res), res
