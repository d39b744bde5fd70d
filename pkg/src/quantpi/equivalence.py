"""Observational equivalence: normal forms, context batteries, may/must.

Equal trace normal forms prove equivalence.  Otherwise a finite battery of
simple contexts is searched for one that separates the two terms; when none
does the verdict is ``UNKNOWN``, since unequal normal forms alone prove
nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .algebra import is_simple
from .runs import check_literals, evaluate_polynomial, outcome_polynomial
from .semiring import OMEGA, Semiring, SemiringValue, get_semiring
from .syntax import (
    NEG,
    POS,
    ZERO,
    Action,
    LinPrefix,
    Lit,
    Par,
    Prefix,
    Term,
    alpha_key,
    compose,
    free_names,
    print_term,
)
from .traces import LinearCombination, decompose, dual, implement_trace

EQUIVALENT = "EQUIVALENT"
DISTINGUISHED = "DISTINGUISHED"
UNKNOWN = "UNKNOWN"

DEFAULT_DEPTH = 2


@dataclass
class Verdict:
    status: str
    semiring: str
    context: Term | None = None
    outcomes: tuple[SemiringValue, SemiringValue] | None = None
    nf_left: LinearCombination | None = field(default=None, repr=False)
    nf_right: LinearCombination | None = field(default=None, repr=False)
    battery_size: int = 0
    contexts_tried: int = 0

    @property
    def exit_code(self) -> int:
        return {EQUIVALENT: 0, DISTINGUISHED: 1, UNKNOWN: 2}[self.status]

    def to_json(self) -> dict:
        out: dict = {
            "status": self.status,
            "semiring": self.semiring,
            "battery_size": self.battery_size,
            "contexts_tried": self.contexts_tried,
        }
        if self.context is not None:
            out["context"] = print_term(self.context)
            out["outcomes"] = list(self.outcomes or ())
        if self.nf_left is not None:
            out["normal_forms"] = [self.nf_left.to_json(), self.nf_right.to_json()]
        return out

    def report(self) -> str:
        lines = [self.status]
        if self.status == DISTINGUISHED:
            left, right = self.outcomes
            lines.append(f"context: {print_term(self.context)}")
            lines.append(f"outcomes: {left} vs {right}")
        elif self.status == EQUIVALENT:
            lines.append("trace normal forms are equal")
        else:
            lines.append("normal forms differ but no context in the battery separates the terms")
        lines.append(f"contexts tried: {self.contexts_tried} of {self.battery_size}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Context battery


def context_literals(sid: str | Semiring) -> tuple[str, ...]:
    """Literals worth placing in contexts: ``1``, plus ``w`` where it exists."""
    sr = get_semiring(sid)
    return ("1", OMEGA) if sr.contains(OMEGA) else ("1",)


def enumerate_contexts(names: Iterable[str], depth: int, literals: Sequence[str] = ("1",)) -> list[Term]:
    """Simple terms over ``names`` with at most ``depth`` prefixes.

    Size 0 holds the literals.  A term of size n is an inaction ``a.0``
    (n = 1), a linear action ``lin a.B`` with ``B`` of size n - 1 over the
    names plus the newly bound one, or a composition ``S | T`` of two terms
    of positive size.  Both polarities of every name appear, so duals are
    included.  The list is deterministic and free of alpha-duplicates.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    base = sorted(set(names))
    taken = set(base)
    counter = [0]

    def bound() -> str:
        while True:
            counter[0] += 1
            x = f"x{counter[0]}"
            if x not in taken:
                taken.add(x)
                return x

    memo: dict[tuple[tuple[str, ...], int], list[Term]] = {}

    def of_size(ns: tuple[str, ...], n: int) -> list[Term]:
        key = (ns, n)
        if key in memo:
            return memo[key]
        out: list[Term] = []
        if n == 0:
            out = [Lit(k) for k in literals]
        else:
            for name in ns:
                for pol in (POS, NEG):
                    if n == 1:
                        out.append(Prefix(Action(name, pol, bound()), ZERO))
                    x = bound()
                    for body in of_size(ns + (x,), n - 1):
                        out.append(LinPrefix(Action(name, pol, x), body))
            for i in range(1, n // 2 + 1):
                left, right = of_size(ns, i), of_size(ns, n - i)
                for a, s in enumerate(left):
                    for b, t in enumerate(right):
                        if i == n - i and b < a:
                            continue
                        out.append(Par(s, t))
        memo[key] = out
        return out

    seen = set()
    battery: list[Term] = []
    for n in range(depth + 1):
        for t in of_size(tuple(base), n):
            k = alpha_key(t)
            if k not in seen:
                seen.add(k)
                battery.append(t)
    return battery


def _battery(p: Term, q: Term, sr: Semiring, depth: int, names, nfs) -> list[Term]:
    if names is None:
        names = free_names(p) | free_names(q)
    contexts = enumerate_contexts(names, depth, context_literals(sr))
    seen = {alpha_key(c) for c in contexts}
    for nf in nfs:
        for tr in sorted(nf, key=lambda t: (len(t), t.key)):
            c = implement_trace(dual(tr))
            k = alpha_key(c)
            if k not in seen:
                seen.add(k)
                contexts.append(c)
    return contexts


def context_battery(
    p: Term, q: Term, sid: str | Semiring = "nat", depth: int = DEFAULT_DEPTH, names: Iterable[str] | None = None
) -> list[Term]:
    """The contexts a check of ``p`` against ``q`` searches, in order."""
    sr = get_semiring(sid)
    return _battery(p, q, sr, depth, names, (decompose(p, sr), decompose(q, sr)))


# ---------------------------------------------------------------------------
# Checking


def observe(p: Term, r: Term, sid: str | Semiring) -> SemiringValue:
    """``outcome(p | r)`` with binders kept apart."""
    return evaluate_polynomial(outcome_polynomial(compose(p, r)), sid)


def _check(
    p: Term,
    q: Term,
    sid: str | Semiring,
    depth: int,
    names,
    same: Callable[[SemiringValue, SemiringValue], bool],
) -> Verdict:
    sr = get_semiring(sid)
    check_literals(p, sr)
    check_literals(q, sr)
    nf_p, nf_q = decompose(p, sr), decompose(q, sr)
    battery = _battery(p, q, sr, depth, names, (nf_p, nf_q))
    if nf_p == nf_q:
        return Verdict(EQUIVALENT, sr.name, nf_left=nf_p, nf_right=nf_q, battery_size=len(battery))
    for i, r in enumerate(battery):
        a, b = observe(p, r, sr), observe(q, r, sr)
        if not same(a, b):
            return Verdict(DISTINGUISHED, sr.name, r, (a, b), nf_p, nf_q, len(battery), i + 1)
    return Verdict(UNKNOWN, sr.name, nf_left=nf_p, nf_right=nf_q, battery_size=len(battery), contexts_tried=len(battery))


def check_equiv(
    p: Term, q: Term, sid: str | Semiring = "nat", depth: int = DEFAULT_DEPTH, names: Iterable[str] | None = None
) -> Verdict:
    """Three-valued equivalence check over the chosen carrier."""
    return _check(p, q, sid, depth, names, lambda a, b: a == b)


def _same_success(a: SemiringValue, b: SemiringValue) -> bool:
    return (a == OMEGA) == (b == OMEGA)


def may_equiv(p: Term, q: Term, depth: int = DEFAULT_DEPTH, names: Iterable[str] | None = None) -> Verdict:
    """May-testing equivalence: same contexts can reach success."""
    return _check(p, q, "may", depth, names, _same_success)


def must_equiv(p: Term, q: Term, depth: int = DEFAULT_DEPTH, names: Iterable[str] | None = None) -> Verdict:
    """Must-testing equivalence: same contexts always reach success."""
    return _check(p, q, "must", depth, names, _same_success)


def battery_is_simple(contexts: Iterable[Term]) -> bool:
    return all(is_simple(c) for c in contexts)
