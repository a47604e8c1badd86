"""S-expression terms: parsing, printing, substitution, and one-way matching.

Terms come in three shapes: variables, quoted constants (whose values are
plain s-expressions, opaque to rewriting), and function applications.  All
symbols are upper-cased on read.  Matching is one-way: pattern variables
bind to target subterms, and quoted constants match only by identity.
"""

from __future__ import annotations

import string as _string
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import BrrkitError

# ---------------------------------------------------------------------------
# S-expressions
#
# Symbols are upper-cased Python strings, integers are ints, strings are
# String atoms and lists are tuples.  () reads as the symbol NIL.


@dataclass(frozen=True)
class String:
    value: str

    def __str__(self) -> str:
        return '"%s"' % self.value.replace("\\", "\\\\").replace('"', '\\"')


SExpr = Union[str, int, String, tuple]


class ParseError(BrrkitError):
    def __init__(self, message: str, line: int, col: int, incomplete: bool = False):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col
        self.incomplete = incomplete


_DELIMS = set("()'\";") | set(_string.whitespace)


class Reader:
    """Incremental s-expression reader with line/column error reporting."""

    def __init__(self, text: str = ""):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def feed(self, more: str) -> None:
        self.text += more

    def _peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _advance(self) -> str:
        c = self.text[self.pos]
        self.pos += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return c

    def _skip_ws(self) -> None:
        while self.pos < len(self.text):
            c = self._peek()
            if c == ";":
                while self.pos < len(self.text) and self._peek() != "\n":
                    self._advance()
            elif c in _string.whitespace:
                self._advance()
            else:
                return

    def at_eof(self) -> bool:
        self._skip_ws()
        return self.pos >= len(self.text)

    def read(self) -> Optional[SExpr]:
        """Read one form; None at end of input."""
        self._skip_ws()
        if self.pos >= len(self.text):
            return None
        return self._read_form()

    def _read_form(self) -> SExpr:
        self._skip_ws()
        if self.pos >= len(self.text):
            raise ParseError("unexpected end of input", self.line, self.col, incomplete=True)
        c = self._peek()
        if c == "'":
            self._advance()
            return ("QUOTE", self._read_form())
        if c == "(":
            self._advance()
            items = []
            while True:
                self._skip_ws()
                if self.pos >= len(self.text):
                    raise ParseError("unclosed (", self.line, self.col, incomplete=True)
                if self._peek() == ")":
                    self._advance()
                    break
                items.append(self._read_form())
            if not items:
                return "NIL"
            return tuple(items)
        if c == ")":
            raise ParseError("unexpected )", self.line, self.col)
        if c == '"':
            return self._read_string()
        return self._read_atom()

    def _read_string(self) -> String:
        line, col = self.line, self.col
        self._advance()
        out = []
        while True:
            if self.pos >= len(self.text):
                raise ParseError("unterminated string", line, col, incomplete=True)
            c = self._advance()
            if c == "\\":
                if self.pos >= len(self.text):
                    raise ParseError("unterminated string", line, col, incomplete=True)
                out.append(self._advance())
            elif c == '"':
                return String("".join(out))
            else:
                out.append(c)

    def _read_atom(self) -> SExpr:
        start = self.pos
        line, col = self.line, self.col
        while self.pos < len(self.text) and self._peek() not in _DELIMS:
            self._advance()
        tok = self.text[start:self.pos]
        if not tok:
            raise ParseError("empty atom", line, col)
        try:
            return int(tok)
        except ValueError:
            pass
        return tok.upper()


def parse(text: str) -> SExpr:
    """Parse exactly one s-expression from text ('x sugar for (QUOTE x))."""
    r = Reader(text)
    form = r.read()
    if form is None:
        raise ParseError("no form in input", 1, 1, incomplete=True)
    if not r.at_eof():
        raise ParseError("trailing input after form", r.line, r.col)
    return form


def parse_all(text: str) -> list:
    r = Reader(text)
    forms = []
    while True:
        form = r.read()
        if form is None:
            return forms
        forms.append(form)


def print_sexpr(s: SExpr) -> str:
    if isinstance(s, tuple):
        if len(s) == 2 and s[0] == "QUOTE":
            return "'" + print_sexpr(s[1])
        return "(" + " ".join(print_sexpr(e) for e in s) + ")"
    if isinstance(s, (String, int)):
        return str(s)
    return s


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Quote:
    value: SExpr


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple

    def __post_init__(self):
        assert isinstance(self.args, tuple)


Term = Union[Var, Quote, App]

QUOTE_T = Quote("T")
QUOTE_NIL = Quote("NIL")


def is_keyword(sym: str) -> bool:
    return isinstance(sym, str) and sym.startswith(":")


@dataclass(frozen=True)
class QuotedLambda:
    formals: tuple
    body: SExpr


def quoted_lambda(t: Term) -> Optional[QuotedLambda]:
    """Recognize a quoted constant of shape (LAMBDA (v...) body)."""
    if not isinstance(t, Quote):
        return None
    v = t.value
    if (
        isinstance(v, tuple)
        and len(v) == 3
        and v[0] == "LAMBDA"
        and (v[1] == "NIL" or (isinstance(v[1], tuple) and all(isinstance(f, str) for f in v[1])))
    ):
        formals = () if v[1] == "NIL" else v[1]
        return QuotedLambda(formals, v[2])
    return None


class ArityTable:
    """Per-session record of each function symbol's argument count."""

    def __init__(self):
        self.seen: dict = {}

    def check(self, fn: str, n: int) -> None:
        k = self.seen.setdefault(fn, n)
        if k != n:
            raise BrrkitError(f"arity mismatch: {fn} previously used with {k} argument(s), now {n}")


def to_term(s: SExpr, vars: Optional[set] = None, aliases: Optional[dict] = None,
            arities: Optional[ArityTable] = None) -> Term:
    """Translate an s-expression into a term.

    With vars=None every non-constant symbol is a variable; with an explicit
    set, only its members are variables and other symbols become quoted
    constants.  T, NIL, keywords, integers and strings are always constants.
    AND/OR expand into IF nests so that input arrives in translated form.
    """
    if isinstance(s, (int, String)):
        return Quote(s)
    if isinstance(s, str):
        if s in ("T", "NIL") or is_keyword(s):
            return Quote(s)
        if vars is None or s in vars:
            return Var(s)
        return Quote(s)
    if not isinstance(s, tuple) or not s:
        raise BrrkitError(f"cannot translate {print_sexpr(s)}")
    head = s[0]
    if not isinstance(head, str):
        raise BrrkitError(f"non-symbol in function position: {print_sexpr(s)}")
    if head == "QUOTE":
        if len(s) != 2:
            raise BrrkitError(f"QUOTE takes one argument: {print_sexpr(s)}")
        return Quote(s[1])
    if head == "AND":
        rest = s[1:]
        if not rest:
            return QUOTE_T
        if len(rest) == 1:
            return to_term(rest[0], vars, aliases, arities)
        return App("IF", (to_term(rest[0], vars, aliases, arities),
                          to_term(("AND",) + rest[1:], vars, aliases, arities),
                          QUOTE_NIL))
    if head == "OR":
        rest = s[1:]
        if not rest:
            return QUOTE_NIL
        if len(rest) == 1:
            return to_term(rest[0], vars, aliases, arities)
        first = to_term(rest[0], vars, aliases, arities)
        return App("IF", (first, first, to_term(("OR",) + rest[1:], vars, aliases, arities)))
    if aliases and head in aliases:
        target, assoc = aliases[head]
        rest = s[1:]
        if len(rest) == 1:
            return to_term(rest[0], vars, aliases, arities)
        if len(rest) >= 2:
            if assoc == "RIGHT":
                folded = rest[-1]
                for e in reversed(rest[:-1]):
                    folded = (target, e, folded)
            else:
                folded = rest[0]
                for e in rest[1:]:
                    folded = (target, folded, e)
            return to_term(folded, vars, aliases, arities)
        raise BrrkitError(f"alias {head} needs at least one argument")
    args = tuple(to_term(e, vars, aliases, arities) for e in s[1:])
    if arities is not None:
        arities.check(head, len(args))
    return App(head, args)


def term_to_sexpr(t: Term) -> SExpr:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Quote):
        return ("QUOTE", t.value)
    return (t.fn,) + tuple(term_to_sexpr(a) for a in t.args)


# ---------------------------------------------------------------------------
# Printing

WIDTH = 79


def _flat_quote(v: SExpr) -> str:
    if isinstance(v, (int, String)):
        return str(v)
    if isinstance(v, str):
        return v if is_keyword(v) else "'" + v
    return "'" + print_sexpr(v)


def _flat(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Quote):
        return _flat_quote(t.value)
    if not t.args:
        return "(" + t.fn + ")"
    return "(" + t.fn + " " + " ".join(_flat(a) for a in t.args) + ")"


def _render_sexpr(s: SExpr, indent: int, width: int) -> str:
    flat = print_sexpr(s)
    if indent + len(flat) <= width or not isinstance(s, tuple):
        return flat
    if len(s) == 2 and s[0] == "QUOTE":
        return "'" + _render_sexpr(s[1], indent + 1, width)
    if isinstance(s[0], str):
        head = "(" + s[0] + " "
        col = indent + len(head)
        parts = [_render_sexpr(e, col, width) for e in s[1:]]
        return head + ("\n" + " " * col).join(parts) + ")"
    col = indent + 1
    parts = [_render_sexpr(e, col, width) for e in s]
    return "(" + ("\n" + " " * col).join(parts) + ")"


def render_term(t: Term, indent: int = 0, width: int = WIDTH) -> str:
    """Pretty-print with wrapping; continuation lines are padded to align
    under the first argument (the caller supplies the first-line prefix)."""
    flat = _flat(t)
    if indent + len(flat) <= width:
        return flat
    if isinstance(t, Quote):
        if isinstance(t.value, tuple):
            return "'" + _render_sexpr(t.value, indent + 1, width)
        return flat
    if isinstance(t, App) and t.args:
        head = "(" + t.fn + " "
        col = indent + len(head)
        parts = [render_term(a, col, width) for a in t.args]
        return head + ("\n" + " " * col).join(parts) + ")"
    return flat


def print_term(t: Term) -> str:
    """Single-source printer; parse(print_term(t)) reproduces t."""
    return render_term(t, 0)


def render_term_block(t: Term, indent: int, width: int = WIDTH) -> str:
    """Render with every line (including the first) padded to indent."""
    return " " * indent + render_term(t, indent, width)


# ---------------------------------------------------------------------------
# Substitution, occurrence, matching

Substitution = dict  # SymbolName -> Term, insertion-ordered


def subst_apply(s: Substitution, t: Term) -> Term:
    if isinstance(t, Var):
        return s.get(t.name, t)
    if isinstance(t, Quote):
        return t
    return App(t.fn, tuple(subst_apply(s, a) for a in t.args))


def term_vars(t: Term, acc: Optional[set] = None) -> set:
    if acc is None:
        acc = set()
    if isinstance(t, Var):
        acc.add(t.name)
    elif isinstance(t, App):
        for a in t.args:
            term_vars(a, acc)
    return acc


def occurs_subterm(small: Term, big: Term) -> bool:
    """True iff small is big or occurs in an argument of big.  Quoted
    constants are atomic: there is no descent into their values."""
    if small == big:
        return True
    if isinstance(big, App):
        return any(occurs_subterm(small, a) for a in big.args)
    return False


def subterms(t: Term) -> Iterator[Term]:
    """All subterm occurrences, innermost first, left to right."""
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)
    yield t


def term_size(t: Term) -> int:
    if isinstance(t, App):
        return 1 + sum(term_size(a) for a in t.args)
    return 1


def term_order_less(a: Term, b: Term) -> bool:
    """Total syntactic order: size first, then the printed form."""
    ka = (term_size(a), _flat(a))
    kb = (term_size(b), _flat(b))
    return ka < kb


MATCH_FAIL = None


def match(pattern: Term, target: Term, init: Optional[Substitution] = None):
    """One-way match: extend init so that subst_apply(result, pattern) equals
    target, or return None.  Quotes match only an equal Quote."""
    s = dict(init) if init else {}

    def go(p: Term, t: Term) -> bool:
        if isinstance(p, Var):
            bound = s.get(p.name)
            if bound is None:
                s[p.name] = t
                return True
            return bound == t
        if isinstance(p, Quote):
            return p == t
        if not isinstance(t, App) or t.fn != p.fn or len(t.args) != len(p.args):
            return False
        return all(go(pa, ta) for pa, ta in zip(p.args, t.args))

    return s if go(pattern, target) else MATCH_FAIL


def replace_quoted_lambdas(t: Term, fresh_names: list) -> Term:
    """Replace every quoted-LAMBDA position with a fresh variable, recording
    the names used (in left-to-right order) in fresh_names."""
    if quoted_lambda(t) is not None:
        name = f"GENSYM{len(fresh_names)}"
        fresh_names.append(name)
        return Var(name)
    if isinstance(t, App):
        return App(t.fn, tuple(replace_quoted_lambdas(a, fresh_names) for a in t.args))
    return t


def match_except_lambdas(pattern: Term, target: Term) -> bool:
    """True iff generalizing every quoted-LAMBDA position of pattern to a
    fresh variable yields a match, plain matching fails, and at least one
    generalized position lines up with a quoted LAMBDA in the target."""
    if match(pattern, target) is not MATCH_FAIL:
        return False
    names: list = []
    general = replace_quoted_lambdas(pattern, names)
    if not names:
        return False
    s = match(general, target)
    if s is MATCH_FAIL:
        return False
    return any(quoted_lambda(s[n]) is not None for n in names if n in s)
