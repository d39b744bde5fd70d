"""Terms of the finite piI-calculus with outcome literals and derived forms.

Core constructors are :class:`Lit`, :class:`Prefix`, :class:`Place`,
:class:`Par` (composition with interaction), :class:`ParNI` (composition
without interaction) and :class:`Nu`.  The derived forms :class:`Sum`,
:class:`Scalar` and :class:`LinPrefix` are kept as first-class nodes and only
turned into core terms by :func:`elaborate`.

Concrete syntax (loosest to tightest: ``(+)``, ``||``, ``|``, prefixes)::

    term    := term "(+)" term | term "||" term | term "|" term | factor
    factor  := lit | lit "*" factor | act "." factor | "lin" act "." factor
             | "new" name+ "." factor | "@" factor | "(" term ")"
    act     := name pol "(" name ")" | name | "~" name     pol := "+" | "-"
    lit     := [0-9]+ | "w"

Fresh names start with ``#`` and cannot be written in source text; they
are accepted back only by ``parse_term(..., internal=True)``.
"""

from __future__ import annotations

import contextlib
import re
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Iterator, Union

Position = tuple[int, ...]

POS = "+"
NEG = "-"


def negate(pol: str) -> str:
    return NEG if pol == POS else POS


# ---------------------------------------------------------------------------
# Fresh names


class NameSupply:
    """Counter handing out ``#1``, ``#2``, ...; one per evaluation session."""

    def __init__(self, start: int = 1) -> None:
        self._next = start

    def fresh(self) -> str:
        name = f"#{self._next}"
        self._next += 1
        return name

    def reserve(self, names) -> None:
        for n in names:
            if n.startswith("#") and n[1:].isdigit():
                self._next = max(self._next, int(n[1:]) + 1)


_supply: ContextVar[NameSupply] = ContextVar("quantpi_name_supply", default=NameSupply())


def fresh_name() -> str:
    return _supply.get().fresh()


@contextlib.contextmanager
def fresh_session(start: int = 1) -> Iterator[NameSupply]:
    """Run a block with its own fresh-name counter (restarting at ``#start``)."""
    supply = NameSupply(start)
    token = _supply.set(supply)
    try:
        yield supply
    finally:
        _supply.reset(token)


def is_fresh(name: str) -> bool:
    return name.startswith("#")


# ---------------------------------------------------------------------------
# Abstract syntax


@dataclass(frozen=True, slots=True)
class Action:
    subject: str
    pol: str
    bound: str

    def __post_init__(self) -> None:
        if self.pol not in (POS, NEG):
            raise ValueError(f"bad polarity {self.pol!r}")


@dataclass(frozen=True, slots=True)
class Lit:
    value: str


@dataclass(frozen=True, slots=True)
class Prefix:
    action: Action
    body: "Term"


@dataclass(frozen=True, slots=True)
class Place:
    body: "Term"


@dataclass(frozen=True, slots=True)
class Par:
    left: "Term"
    right: "Term"


@dataclass(frozen=True, slots=True)
class ParNI:
    left: "Term"
    right: "Term"


@dataclass(frozen=True, slots=True)
class Nu:
    name: str
    body: "Term"


@dataclass(frozen=True, slots=True)
class Sum:
    left: "Term"
    right: "Term"


@dataclass(frozen=True, slots=True)
class Scalar:
    literal: str
    body: "Term"


@dataclass(frozen=True, slots=True)
class LinPrefix:
    action: Action
    body: "Term"


Term = Union[Lit, Prefix, Place, Par, ParNI, Nu, Sum, Scalar, LinPrefix]

ZERO = Lit("0")
ONE = Lit("1")
DERIVED = (Sum, Scalar, LinPrefix)


def nu_all(names, body: Term) -> Term:
    for n in reversed(list(names)):
        body = Nu(n, body)
    return body


def par_all(terms, op=None) -> Term:
    """Left-nested composition of ``terms``; ``1`` when empty."""
    op = op or Par
    terms = list(terms)
    if not terms:
        return ONE
    result = terms[0]
    for t in terms[1:]:
        result = op(result, t)
    return result


def is_core(t: Term) -> bool:
    match t:
        case Lit():
            return True
        case Prefix(_, b) | Place(b) | Nu(_, b):
            return is_core(b)
        case Par(l, r) | ParNI(l, r):
            return is_core(l) and is_core(r)
        case _:
            return False


def literals(t: Term) -> set[str]:
    match t:
        case Lit(v):
            return {v}
        case Prefix(_, b) | Place(b) | Nu(_, b) | LinPrefix(_, b):
            return literals(b)
        case Scalar(k, b):
            return {k} | literals(b)
        case Par(l, r) | ParNI(l, r) | Sum(l, r):
            return literals(l) | literals(r)
    raise TypeError(f"not a term: {t!r}")


def count_prefixes(t: Term) -> int:
    match t:
        case Lit():
            return 0
        case Prefix(_, b) | LinPrefix(_, b):
            return 1 + count_prefixes(b)
        case Place(b) | Nu(_, b) | Scalar(_, b):
            return count_prefixes(b)
        case Par(l, r) | ParNI(l, r) | Sum(l, r):
            return count_prefixes(l) + count_prefixes(r)
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Names


def free_names(t: Term) -> frozenset[str]:
    match t:
        case Lit():
            return frozenset()
        case Prefix(a, b) | LinPrefix(a, b):
            return frozenset({a.subject}) | (free_names(b) - {a.bound})
        case Nu(x, b):
            return free_names(b) - {x}
        case Place(b) | Scalar(_, b):
            return free_names(b)
        case Par(l, r) | ParNI(l, r) | Sum(l, r):
            return free_names(l) | free_names(r)
    raise TypeError(f"not a term: {t!r}")


def bound_names(t: Term) -> list[str]:
    """All binder occurrences, in traversal order (duplicates kept)."""
    out: list[str] = []

    def go(t: Term) -> None:
        match t:
            case Prefix(a, b) | LinPrefix(a, b):
                out.append(a.bound)
                go(b)
            case Nu(x, b):
                out.append(x)
                go(b)
            case Place(b) | Scalar(_, b):
                go(b)
            case Par(l, r) | ParNI(l, r) | Sum(l, r):
                go(l)
                go(r)

    go(t)
    return out


def all_names(t: Term) -> set[str]:
    return set(free_names(t)) | set(bound_names(t))


def is_hygienic(t: Term) -> bool:
    """No bound name is bound twice or also occurs free."""
    bnd = bound_names(t)
    return len(bnd) == len(set(bnd)) and not (set(bnd) & free_names(t))


def _rename(t: Term, ren: dict[str, str]) -> Term:
    """Rename free occurrences according to ``ren``; assumes no capture."""
    if not ren:
        return t
    match t:
        case Lit():
            return t
        case Prefix(a, b):
            inner = _drop(ren, a.bound)
            return Prefix(Action(ren.get(a.subject, a.subject), a.pol, a.bound), _rename(b, inner))
        case LinPrefix(a, b):
            inner = _drop(ren, a.bound)
            return LinPrefix(Action(ren.get(a.subject, a.subject), a.pol, a.bound), _rename(b, inner))
        case Nu(x, b):
            return Nu(x, _rename(b, _drop(ren, x)))
        case Place(b):
            return Place(_rename(b, ren))
        case Scalar(k, b):
            return Scalar(k, _rename(b, ren))
        case Par(l, r):
            return Par(_rename(l, ren), _rename(r, ren))
        case ParNI(l, r):
            return ParNI(_rename(l, ren), _rename(r, ren))
        case Sum(l, r):
            return Sum(_rename(l, ren), _rename(r, ren))
    raise TypeError(f"not a term: {t!r}")


def _rename_all(t: Term, ren: dict[str, str]) -> Term:
    """Rename binders and occurrences alike (a global, hygienic renaming)."""

    def n(x: str) -> str:
        return ren.get(x, x)

    def go(t: Term) -> Term:
        match t:
            case Lit():
                return t
            case Prefix(a, b) | LinPrefix(a, b):
                return type(t)(Action(n(a.subject), a.pol, n(a.bound)), go(b))
            case Nu(x, b):
                return Nu(n(x), go(b))
            case Place(b):
                return Place(go(b))
            case Scalar(k, b):
                return Scalar(k, go(b))
            case Par(l, r) | ParNI(l, r) | Sum(l, r):
                return type(t)(go(l), go(r))
        raise TypeError(f"not a term: {t!r}")

    return go(t)


def _drop(ren: dict[str, str], name: str) -> dict[str, str]:
    if name in ren:
        ren = dict(ren)
        del ren[name]
    return ren


def rename_apart(t: Term, avoid=()) -> Term:
    """Re-establish hygiene: every binder gets a name used nowhere else.

    Binders that already satisfy the convention keep their names; clashing
    ones are replaced with fresh names.  Names in ``avoid`` are treated as
    taken.
    """
    used = set(free_names(t)) | set(avoid)

    def binder(name: str, ren: dict[str, str]) -> tuple[str, dict[str, str]]:
        new = name if name not in used else fresh_name()
        used.add(new)
        if new != name or name in ren:
            ren = dict(ren)
            ren[name] = new
        return new, ren

    def go(t: Term, ren: dict[str, str]) -> Term:
        match t:
            case Lit():
                return t
            case Prefix(a, b) | LinPrefix(a, b):
                subj = ren.get(a.subject, a.subject)
                new, inner = binder(a.bound, ren)
                return type(t)(Action(subj, a.pol, new), go(b, inner))
            case Nu(x, b):
                new, inner = binder(x, ren)
                return Nu(new, go(b, inner))
            case Place(b):
                return Place(go(b, ren))
            case Scalar(k, b):
                return Scalar(k, go(b, ren))
            case Par(l, r) | ParNI(l, r) | Sum(l, r):
                return type(t)(go(l, ren), go(r, ren))
        raise TypeError(f"not a term: {t!r}")

    return go(t, {})


def substitute(t: Term, x: str, y: str) -> Term:
    """``t[x/y]``: replace free occurrences of ``y`` by ``x``, avoiding capture."""
    if x == y:
        return t
    if x in bound_names(t):
        # a binder named x could capture the incoming name; rename binders apart first
        t = rename_apart(t, avoid={x})
    return rename_apart(_rename(t, {y: x}))


# ---------------------------------------------------------------------------
# Alpha-equivalence (modulo commutation of adjacent restrictions)


def alpha_key(t: Term):
    """A hashable key equal for alpha-equivalent terms.

    Adjacent restrictions are treated as a set, so ``new x y. P`` and
    ``new y x. P`` share a key.  Bound names are numbered by first use.
    """
    counter = [0]

    def new_id() -> int:
        counter[0] += 1
        return counter[0]

    def ref(name: str, env: dict):
        slot = env.get(name)
        if slot is None:
            return ("f", name)
        if slot[0] is None:
            slot[0] = new_id()
        return ("b", slot[0])

    def go(t: Term, env: dict):
        match t:
            case Lit(v):
                return ("lit", v)
            case Prefix(a, b) | LinPrefix(a, b):
                s = ref(a.subject, env)
                slot = [new_id()]
                tag = "act" if isinstance(t, Prefix) else "lin"
                return (tag, s, a.pol, slot[0], go(b, {**env, a.bound: slot}))
            case Nu():
                names = []
                while isinstance(t, Nu):
                    names.append(t.name)
                    t = t.body
                slots = [[None] for _ in names]
                inner = dict(env)
                inner.update(zip(names, slots))
                body = go(t, inner)
                used = tuple(sorted(s[0] for s in slots if s[0] is not None))
                return ("nu", used, len(names) - len(used), body)
            case Place(b):
                return ("place", go(b, env))
            case Scalar(k, b):
                return ("scalar", k, go(b, env))
            case Par(l, r):
                return ("par", go(l, env), go(r, env))
            case ParNI(l, r):
                return ("parni", go(l, env), go(r, env))
            case Sum(l, r):
                return ("sum", go(l, env), go(r, env))
        raise TypeError(f"not a term: {t!r}")

    return go(t, {})


def alpha_equal(t: Term, u: Term) -> bool:
    return alpha_key(t) == alpha_key(u)


# ---------------------------------------------------------------------------
# Parsing


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<sum>\(\+\))
  | (?P<parni>\|\|)
  | (?P<par>\|)
  | (?P<num>[0-9]+)
  | (?P<name>[a-z][a-zA-Z0-9_]*)
  | (?P<fresh>\#[0-9]+)
  | (?P<punct>[().*@~+\-])
    """,
    re.VERBOSE,
)

KEYWORDS = {"new", "lin"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, internal: bool) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "fresh" and not internal:
            raise ParseError(f"reserved name {s!r}", line, col)
        if kind == "fresh":
            kind = "name"
        if kind != "ws":
            toks.append(_Tok(kind if kind != "punct" else s, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, internal: bool) -> None:
        self.toks = _tokenize(text, internal)
        self.i = 0

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        found = tok.text or "end of input"
        return ParseError(f"{message} (found {found!r})", tok.line, tok.col)

    def expect(self, kind: str) -> _Tok:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"expected {kind!r}")
        return self.next()

    def name(self) -> str:
        tok = self.peek()
        if tok.kind != "name" or tok.text in KEYWORDS:
            raise self.error("expected a name")
        return self.next().text

    def term(self) -> Term:
        return self._binary(0)

    _LEVELS = (("sum", Sum), ("parni", ParNI), ("par", Par))

    def _binary(self, level: int) -> Term:
        if level == len(self._LEVELS):
            return self.factor()
        kind, ctor = self._LEVELS[level]
        left = self._binary(level + 1)
        while self.peek().kind == kind:
            self.next()
            left = ctor(left, self._binary(level + 1))
        return left

    def _is_action_start(self) -> bool:
        # name followed by "." or by a polarity and "(" starts an action
        nxt = self.peek(1)
        return nxt.kind == "." or (nxt.kind in ("+", "-") and self.peek(2).kind == "(")

    def act(self) -> Action:
        if self.peek().kind == "~":
            self.next()
            return Action(self.name(), NEG, fresh_name())
        subject = self.name()
        if self.peek().kind in ("+", "-"):
            pol = self.next().kind
            self.expect("(")
            bound = self.name()
            self.expect(")")
            return Action(subject, pol, bound)
        return Action(subject, POS, fresh_name())

    def factor(self) -> Term:
        tok = self.peek()
        if tok.kind == "num" or (tok.kind == "name" and tok.text == "w" and not self._is_action_start()):
            self.next()
            if self.peek().kind == "*":
                self.next()
                return Scalar(tok.text, self.factor())
            return Lit(tok.text)
        if tok.kind == "(":
            self.next()
            t = self.term()
            self.expect(")")
            return t
        if tok.kind == "@":
            self.next()
            return Place(self.factor())
        if tok.kind == "name" and tok.text == "new":
            self.next()
            names = [self.name()]
            while self.peek().kind == "name" and self.peek().text not in KEYWORDS:
                names.append(self.name())
            self.expect(".")
            return nu_all(names, self.factor())
        if tok.kind == "name" and tok.text == "lin":
            self.next()
            a = self.act()
            self.expect(".")
            return LinPrefix(a, self.factor())
        if tok.kind == "~" or tok.kind == "name":
            a = self.act()
            self.expect(".")
            return Prefix(a, self.factor())
        raise self.error("expected a term")


def parse_term(text: str, internal: bool = False) -> Term:
    """Parse concrete syntax into a hygienic term.

    Duplicate bound names are renamed apart rather than rejected.
    """
    p = _Parser(text, internal)
    if internal:
        _supply.get().reserve(tok.text for tok in p.toks if tok.kind == "name")
    t = p.term()
    if p.peek().kind != "eof":
        raise p.error("unexpected trailing input")
    return rename_apart(t)


# ---------------------------------------------------------------------------
# Printing

_PREC = {Sum: 0, ParNI: 1, Par: 2}
_OPS = {Sum: "(+)", ParNI: "||", Par: "|"}
_FACTOR = 3


def _act_text(a: Action, body: Term) -> str:
    if a.bound in free_names(body):
        return f"{a.subject}{a.pol}({a.bound})"
    return a.subject if a.pol == POS else f"~{a.subject}"


def _display_names(t: Term) -> dict[str, str]:
    """Readable replacements for internal binder names, so output reparses."""
    taken = {n for n in all_names(t) if not is_fresh(n)}
    visible = _subjects_and_restrictions(t)
    out: dict[str, str] = {}
    i = 0
    for name in bound_names(t):
        if is_fresh(name) and name in visible and name not in out:
            i += 1
            while f"x{i}" in taken:
                i += 1
            out[name] = f"x{i}"
    return out


def _subjects_and_restrictions(t: Term) -> set[str]:
    out: set[str] = set()

    def go(t: Term) -> None:
        match t:
            case Prefix(a, b) | LinPrefix(a, b):
                out.add(a.subject)
                go(b)
            case Nu(x, b):
                out.add(x)
                go(b)
            case Place(b) | Scalar(_, b):
                go(b)
            case Par(l, r) | ParNI(l, r) | Sum(l, r):
                go(l)
                go(r)

    go(t)
    return out


def print_term(t: Term) -> str:
    """Concrete syntax; internal binder names are shown as fresh ``x<n>``."""
    shown = _display_names(t)
    if shown:
        t = _rename_all(t, shown)

    def go(t: Term, level: int) -> str:
        match t:
            case Lit(v):
                return v
            case Sum(l, r) | ParNI(l, r) | Par(l, r):
                p = _PREC[type(t)]
                s = f"{go(l, p)} {_OPS[type(t)]} {go(r, p + 1)}"
                return f"({s})" if level > p else s
            case Prefix(a, b):
                return f"{_act_text(a, b)}.{go(b, _FACTOR)}"
            case LinPrefix(a, b):
                return f"lin {_act_text(a, b)}.{go(b, _FACTOR)}"
            case Place(b):
                return f"@{go(b, _FACTOR)}"
            case Scalar(k, b):
                return f"{k} * {go(b, _FACTOR)}"
            case Nu():
                names = []
                while isinstance(t, Nu):
                    names.append(t.name)
                    t = t.body
                return f"new {' '.join(names)}. {go(t, _FACTOR)}"
        raise TypeError(f"not a term: {t!r}")

    return go(t, 0)


# ---------------------------------------------------------------------------
# Elaboration of derived forms


@dataclass(frozen=True)
class LinSite:
    """Where the encoding of one linear action landed in the core term."""

    action: Position  # the prefix alpha
    witness: Position  # w.1 under alpha
    kill: Position  # the competing w.0
    trigger: Position  # ~w.1


@dataclass(frozen=True)
class Provenance:
    lin_sites: tuple[LinSite, ...] = ()
    inactions: tuple[Position, ...] = field(default=())


def elaborate_with_provenance(t: Term) -> tuple[Term, Provenance]:
    """Expand derived forms, recording where linear actions and inactions went.

    ``P (+) Q``  becomes ``new u. ((u.P | u.Q) | ~u.1)``,
    ``k * P``    becomes ``k | P``,
    ``lin a.P``  becomes ``new w. (a.(P | w.1) | (w.0 | ~w.1))``,
    with ``u``, ``w`` and the unused bound names fresh.  Inactions are the
    prefixes of the source whose body is the literal ``0``.
    """
    sites: list[LinSite] = []
    inactions: list[Position] = []

    def go(t: Term, pos: Position) -> Term:
        match t:
            case Lit():
                return t
            case Prefix(a, b):
                if b == ZERO:
                    inactions.append(pos)
                return Prefix(a, go(b, pos + (1,)))
            case Place(b):
                return Place(go(b, pos + (1,)))
            case Par(l, r):
                return Par(go(l, pos + (1,)), go(r, pos + (2,)))
            case ParNI(l, r):
                return ParNI(go(l, pos + (1,)), go(r, pos + (2,)))
            case Nu(x, b):
                return Nu(x, go(b, pos))
            case Sum(l, r):
                u = fresh_name()
                left = Prefix(Action(u, POS, fresh_name()), go(l, pos + (1, 1, 1)))
                right = Prefix(Action(u, POS, fresh_name()), go(r, pos + (1, 2, 1)))
                trigger = Prefix(Action(u, NEG, fresh_name()), ONE)
                return Nu(u, Par(Par(left, right), trigger))
            case Scalar(k, b):
                return Par(Lit(k), go(b, pos + (2,)))
            case LinPrefix(a, b):
                w = fresh_name()
                sites.append(LinSite(pos + (1,), pos + (1, 1, 2), pos + (2, 1), pos + (2, 2)))
                witness = Prefix(Action(w, POS, fresh_name()), ONE)
                body = Par(go(b, pos + (1, 1, 1)), witness)
                kill = Prefix(Action(w, POS, fresh_name()), ZERO)
                trigger = Prefix(Action(w, NEG, fresh_name()), ONE)
                return Nu(w, Par(Prefix(a, body), Par(kill, trigger)))
        raise TypeError(f"not a term: {t!r}")

    core = go(t, ())
    return core, Provenance(tuple(sites), tuple(inactions))


def elaborate(t: Term) -> Term:
    if is_core(t):
        return t
    return elaborate_with_provenance(t)[0]


def compose(p: Term, q: Term, op=None) -> Term:
    """``p | q`` (or ``p || q``) with binders renamed so that no bound name of
    one side captures or collides with a name of the other."""
    return rename_apart((op or Par)(p, q))
