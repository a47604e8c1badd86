"""Provenance collection piggybacked on the breakpoint handlers.

Each collected rule application is a record with a pre snapshot (taken when
the lhs matched), a post snapshot (taken when the attempt completed), and a
completed list of records for the applications that happened in between.
The store lives in the BRR-DATA wormhole status and is threaded purely
through swappable update functions, so the rewriter stays value-pure and
the strategy (which applications to keep) can be exchanged wholesale.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

from .errors import BrrkitError
from .rewrite import FailureReason, GStack, RewriteContext, TypeAlist
from .rules import RewriteRule
from .terms import Term
from .wormhole import WormholeStatus, get_persistent_whs, wormhole_eval

BRR_DATA = "BRR-DATA"


@dataclass(frozen=True)
class BrrData1:
    lemma: RewriteRule
    target: Term
    unify_subst: tuple          # substitution items, binding order
    type_alist: TypeAlist
    pot_list: tuple             # always empty, kept for record shape
    ancestors: tuple
    rcnst: tuple                # opaque context snapshot
    initial_ttree: frozenset
    gstack: GStack


@dataclass(frozen=True)
class BrrData2:
    failure_reason: Optional[FailureReason]
    unify_subst: tuple
    brr_result: Optional[Term]
    rcnst: tuple
    final_ttree: frozenset
    gstack: GStack


@dataclass(frozen=True)
class BrrData:
    pre: BrrData1
    post: BrrData2
    completed: tuple = ()


def make_pre(rule, target, unify_subst, ta, anc, gs, ctx: RewriteContext) -> BrrData1:
    return BrrData1(
        lemma=rule,
        target=target,
        unify_subst=tuple(unify_subst.items()),
        type_alist=ta,
        pot_list=ctx.pot_list,
        ancestors=tuple(anc),
        rcnst=(ctx.backchain_limit, ctx.step_budget),
        initial_ttree=frozenset(ctx.ttree),
        gstack=gs,
    )


def make_post(failure_reason, unify_subst, brr_result, gs, ctx: RewriteContext) -> BrrData2:
    return BrrData2(
        failure_reason=failure_reason,
        unify_subst=tuple(unify_subst.items()) if unify_subst else (),
        brr_result=brr_result,
        rcnst=(ctx.backchain_limit, ctx.step_budget),
        final_ttree=frozenset(ctx.ttree),
        gstack=gs,
    )


# ---------------------------------------------------------------------------
# The store: a stack of open records plus finished records in reverse order


@dataclass(frozen=True)
class _Open:
    pre: BrrData1
    completed_rev: tuple = ()


@dataclass(frozen=True)
class BrrDataStore:
    open: tuple = ()          # stack of _Open, innermost last
    finished_rev: tuple = ()  # reverse application order


EMPTY_STORE = BrrDataStore()


def _tree_update1(store: BrrDataStore, d1: BrrData1) -> BrrDataStore:
    return replace(store, open=store.open + (_Open(d1),))


def _tree_update2(store: BrrDataStore, d2: BrrData2) -> BrrDataStore:
    assert store.open, "post snapshot without a matching open record"
    top = store.open[-1]
    node = BrrData(pre=top.pre, post=d2, completed=top.completed_rev)
    rest = store.open[:-1]
    if rest:
        parent = rest[-1]
        parent = replace(parent, completed_rev=(node,) + parent.completed_rev)
        return BrrDataStore(open=rest[:-1] + (parent,), finished_rev=store.finished_rev)
    return BrrDataStore(open=rest, finished_rev=(node,) + store.finished_rev)


def _flat_update2_failures(store: BrrDataStore, d2: BrrData2) -> BrrDataStore:
    assert store.open, "post snapshot without a matching open record"
    top = store.open[-1]
    rest = store.open[:-1]
    if d2.failure_reason is not None:
        node = BrrData(pre=top.pre, post=d2, completed=())
        return BrrDataStore(open=rest, finished_rev=(node,) + store.finished_rev)
    return BrrDataStore(open=rest, finished_rev=store.finished_rev)


# ---------------------------------------------------------------------------
# Strategies


@dataclass(frozen=True)
class Strategy:
    name: str
    entry1: Callable
    entry2: Callable
    update1: Callable
    update2: Callable


def _top_level(anc, gs, ctx) -> bool:
    return not anc


def _backchaining(anc, gs, ctx) -> bool:
    return bool(anc)


def _always(anc, gs, ctx) -> bool:
    return True


DEFAULT_STRATEGY = Strategy("DEFAULT", _top_level, _top_level, _tree_update1, _tree_update2)

STRATEGIES = {
    "DEFAULT": DEFAULT_STRATEGY,
    "FAILURES": Strategy("FAILURES", _backchaining, _backchaining,
                         _tree_update1, _flat_update2_failures),
    "ALL": Strategy("ALL", _always, _always, _tree_update1, _tree_update2),
}


def register_strategy(strategy: Strategy) -> None:
    STRATEGIES[strategy.name] = strategy


def set_brr_data_attachments(session, suffix: str) -> None:
    """Swap the four collection functions atomically, by bundle name."""
    name = suffix.upper()
    if name not in STRATEGIES:
        raise BrrkitError(f"unknown brr-data attachment bundle: {suffix}")
    session.strategy = STRATEGIES[name]


# ---------------------------------------------------------------------------
# Collection entry points (called from the breakpoint handlers)


def _store_of(status: WormholeStatus) -> BrrDataStore:
    return status.data if status.data is not None else EMPTY_STORE


def collect_pre(session, d1: BrrData1) -> None:
    wormhole_eval(session.wormholes, BRR_DATA,
                  lambda st: replace(st, data=session.strategy.update1(_store_of(st), d1)))


def collect_post(session, d2: BrrData2) -> None:
    wormhole_eval(session.wormholes, BRR_DATA,
                  lambda st: replace(st, data=session.strategy.update2(_store_of(st), d2)))


def clear_brr_data_lst(session) -> None:
    wormhole_eval(session.wormholes, BRR_DATA, lambda st: replace(st, data=EMPTY_STORE))
    session.brr_data_cache = None


def _normalize(records_rev: tuple) -> tuple:
    out = []
    for r in reversed(records_rev):
        out.append(replace(r, completed=_normalize(r.completed)))
    return tuple(out)


def brr_data_lst(session) -> list:
    """Read the persistent store and put everything into application order;
    the result is cached in the session for the query utilities."""
    status = get_persistent_whs(session.wormholes, BRR_DATA)
    store = _store_of(status)
    if store.open:
        raise BrrkitError("brr-data collection has open records (aborted mid-application?)")
    data = list(_normalize(store.finished_rev))
    session.brr_data_cache = data
    return data


def with_brr_data(session, thunk):
    """Clear the store, run the proof thunk in brr-data mode (monitored
    rules still break), then load the collected records; the prior mode is
    restored even on abort, and an aborted run's partial data is discarded."""
    if getattr(session, "waterfall_parallelism", False):
        raise BrrkitError("with-brr-data is disallowed when waterfall-parallelism is enabled")
    clear_brr_data_lst(session)
    prior_mode = session.mode
    prior_entry = session.brr_entry_code()
    session.mode = "BRR-DATA"
    session.set_brr_entry_code("ENTER")
    try:
        outcome = thunk()
    finally:
        session.mode = prior_mode
        session.set_brr_entry_code(prior_entry)
    if getattr(outcome, "aborted", False):
        clear_brr_data_lst(session)
        session.brr_data_cache = []
        return outcome
    brr_data_lst(session)
    return outcome


def count_records(data) -> int:
    return sum(1 + count_records(r.completed) for r in data)
