"""Named side-channel state cells.

Each cell has a persistent status that survives across prover calls.  The
interactive entry path copies the persistent status into an ephemeral view,
runs a first form that may start a command loop, then writes the ephemeral
status back, undoing every other session-state change made inside.  The
non-interactive path (wormhole_eval) transforms the persistent status in
place and always returns None.
"""

from __future__ import annotations

import copy
import threading
from dataclasses import dataclass
from typing import Any, Callable

from .errors import BrrkitError

ENTER = "ENTER"
SKIP = "SKIP"


@dataclass(frozen=True)
class WormholeStatus:
    entry_code: str = ENTER
    data: Any = None


@dataclass
class EphemeralView:
    name: str
    status: WormholeStatus
    dirty: bool = False


class WormholeStore:
    """Persistent statuses keyed by wormhole name, with serialized access."""

    def __init__(self):
        self.cells: dict = {}
        self.open: dict = {}
        self._lock = threading.RLock()

    def get(self, name: str) -> WormholeStatus:
        with self._lock:
            return self.cells.get(name, WormholeStatus())

    def set(self, name: str, status: WormholeStatus) -> None:
        with self._lock:
            self.cells[name] = status


def get_persistent_whs(store: WormholeStore, name: str) -> WormholeStatus:
    return store.get(name)


def set_persistent_whs(store: WormholeStore, name: str, status: WormholeStatus) -> None:
    """Coherent setter: while a wormhole is open the ephemeral view is the
    live copy, so route the update there and let write-back preserve it."""
    view = store.open.get(name)
    if view is not None:
        view.status = status
        view.dirty = True
    else:
        store.set(name, status)


def wormhole_eval(store: WormholeStore, name: str,
                  f: Callable[[WormholeStatus], WormholeStatus]) -> None:
    """Fast path: bind the persistent status, store back f(status)."""
    if name in store.open:
        raise BrrkitError(f"reentrant wormhole-eval on open wormhole {name}")
    store.set(name, f(store.get(name)))
    return None


def wormhole_enter(store: WormholeStore, name: str,
                   first_form: Callable[[EphemeralView], None],
                   state_globals_host: Any = None) -> None:
    """Interactive path.  first_form receives the ephemeral view; it may
    replace view.status, print, and prompt.  On any exit (including aborts)
    the ephemeral status is written back and, when a host object with a
    state_globals dict is supplied, all its other changes are undone."""
    persistent = store.get(name)
    if persistent.entry_code == SKIP:
        return
    if name in store.open:
        raise BrrkitError(f"wormhole {name} is already open")
    view = EphemeralView(name=name, status=copy.deepcopy(persistent))
    store.open[name] = view
    snapshot = copy.deepcopy(state_globals_host.state_globals) if state_globals_host is not None else None
    try:
        first_form(view)
    finally:
        if state_globals_host is not None:
            state_globals_host.state_globals = snapshot
        del store.open[name]
        store.set(name, view.status)
    return None
