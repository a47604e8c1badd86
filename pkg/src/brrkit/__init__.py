"""brrkit: a conditional term-rewriting engine with an interactive
break-rewrite debugger and rewrite provenance queries."""

from .terms import (
    App,
    ArityTable,
    ParseError,
    Quote,
    String,
    Term,
    Var,
    match,
    occurs_subterm,
    parse,
    parse_all,
    print_term,
    subst_apply,
    to_term,
)
from .rules import (
    BreakCriteria,
    MonitorEntry,
    RewriteRule,
    Rune,
    World,
    add_rule,
    make_rule,
    set_enabled,
    world_form,
)
from .rewrite import (
    Clause,
    ProofOutcome,
    RewriteContext,
    TypeAlist,
    clausify,
    prove,
    rewrite,
    simplify_clause,
)
from .brkpt import brr_near_missp, near_miss_pattern
from .brrdata import (
    BrrData,
    BrrData1,
    BrrData2,
    brr_data_lst,
    clear_brr_data_lst,
    set_brr_data_attachments,
    with_brr_data,
)
from .query import QueryPattern, extend_stack, find_product, run_query
from .session import Session, ScriptSource, StreamSource, repl, run_script
from .wormhole import (
    WormholeStatus,
    WormholeStore,
    get_persistent_whs,
    set_persistent_whs,
    wormhole_enter,
    wormhole_eval,
)

__version__ = "0.1.0"
