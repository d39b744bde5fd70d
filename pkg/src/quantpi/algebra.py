"""Simple terms, affine expansion and exhaustive pre-traces.

Coefficients are kept symbolic until a semiring is chosen: a coefficient is a
:class:`Poly`, a formal sum of monomials over outcome literals with natural
multiplicities.  One expansion then serves every carrier.
"""

from __future__ import annotations

from collections import Counter
from typing import Mapping

from . import lts
from .lts import ContractError
from .runs import PreTrace, _explore, evaluate_polynomial, structural_order
from .semiring import Semiring, SemiringValue, get_semiring
from .syntax import (
    ONE,
    ZERO,
    LinPrefix,
    Lit,
    Nu,
    Par,
    ParNI,
    Place,
    Position,
    Prefix,
    Provenance,
    Scalar,
    Sum,
    Term,
    alpha_key,
    elaborate_with_provenance,
    negate,
)

Poly = Counter  # monomial (sorted tuple of literal tokens other than "1") -> multiplicity


def poly_of_literal(k: str) -> Poly:
    if k == "0":
        return Poly()
    return Poly({() if k == "1" else (k,): 1})


def poly_mul(p: Mapping, q: Mapping) -> Poly:
    out = Poly()
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            out[tuple(sorted(m1 + m2))] += c1 * c2
    return out


def poly_add_into(acc: Poly, p: Mapping, scale: Mapping | None = None) -> None:
    if scale is not None:
        p = poly_mul(p, scale)
    for m, c in p.items():
        acc[m] += c


def is_simple(t: Term) -> bool:
    """Membership in the grammar ``1 | a.0 | lin a.S | S|S | S||S | new x. S``."""
    match t:
        case Lit(v):
            return v == "1"
        case Prefix(_, b):
            return b == ZERO
        case LinPrefix(_, b):
            return is_simple(b)
        case Par(l, r) | ParNI(l, r):
            return is_simple(l) and is_simple(r)
        case Nu(_, b):
            return is_simple(b)
    return False


# ---------------------------------------------------------------------------
# Affine expansion


def _expand(t: Term) -> dict[Term, Poly]:
    match t:
        case Lit(k):
            p = poly_of_literal(k)
            return {ONE: p} if p else {}
        case Prefix(a, b):
            if b == ZERO:
                return {t: poly_of_literal("1")}
            out = {LinPrefix(a, s): c for s, c in _expand(b).items()}
            inaction = Prefix(a, ZERO)
            out[inaction] = out.get(inaction, Poly()) + poly_of_literal("1")
            return out
        case LinPrefix(a, b):
            return {LinPrefix(a, s): c for s, c in _expand(b).items()}
        case Place(b):
            return _expand(b)
        case Nu(x, b):
            return {Nu(x, s): c for s, c in _expand(b).items()}
        case Par(l, r) | ParNI(l, r):
            op = type(t)
            right = _expand(r)
            out: dict[Term, Poly] = {}
            for s1, c1 in _expand(l).items():
                for s2, c2 in right.items():
                    key = op(s1, s2)
                    poly_add_into(out.setdefault(key, Poly()), poly_mul(c1, c2))
            return out
        case Sum(l, r):
            out = {s: Poly(c) for s, c in _expand(l).items()}
            for s, c in _expand(r).items():
                poly_add_into(out.setdefault(s, Poly()), c)
            return out
        case Scalar(k, b):
            scale = poly_of_literal(k)
            return {s: poly_mul(c, scale) for s, c in _expand(b).items()}
    raise TypeError(f"not a term: {t!r}")


def affine_expand_symbolic(t: Term) -> dict[Term, Poly]:
    """``t`` as a combination of simple terms with symbolic coefficients."""
    merged: dict = {}
    for s, c in _expand(t).items():
        key = alpha_key(s)
        if key in merged:
            poly_add_into(merged[key][1], c)
        else:
            merged[key] = (s, Poly(c))
    out = {}
    for s, c in merged.values():
        c = Poly({m: n for m, n in c.items() if n})
        if c:
            out[s] = c
    return out


def affine_expand(t: Term, sid: str | Semiring | None = "nat") -> dict[Term, SemiringValue]:
    """``t`` as a combination of simple terms, coefficients in the carrier.

    Every general prefix ``a.P`` becomes ``lin a.P (+) a.0`` and sums and
    scalars are pulled out of every operator; zero coefficients are dropped.
    """
    sr = get_semiring(sid)
    out = {}
    for s, c in affine_expand_symbolic(t).items():
        v = evaluate_polynomial(c, sr)
        if v != sr.zero:
            out[s] = v
    return out


# ---------------------------------------------------------------------------
# Exhaustive pre-traces


def _consumed_positions(labels) -> set[Position]:
    out: set[Position] = set()
    for lab in labels:
        out.update(lab.positions)
    return out


def active_inactions(end: Term, inactions) -> dict[Position, tuple[str, str]]:
    """Unfired inactions of the source in active position: position -> (subject, pol)."""
    wanted = set(inactions)
    out: dict[Position, tuple[str, str]] = {}

    def go(t: Term, pos: Position) -> None:
        match t:
            case Prefix(a, _):
                if pos in wanted:
                    out[pos] = (a.subject, a.pol)
            case Place(b):
                go(b, pos + (1,))
            case Nu(_, b):
                go(b, pos)
            case Par(l, r) | ParNI(l, r):
                go(l, pos + (1,))
                go(r, pos + (2,))

    go(end, ())
    return out


def facing_inactions(end: Term, inactions) -> bool:
    """Whether some ``|`` of ``end`` has dual active inactions on its two sides."""
    act = active_inactions(end, inactions)
    if not act:
        return False

    def go(t: Term, pos: Position) -> set[tuple[str, str]]:
        match t:
            case Prefix(a, _):
                return {(a.subject, a.pol)} if pos in act else set()
            case Place(b):
                return go(b, pos + (1,))
            case Nu(_, b):
                return go(b, pos)
            case Par(l, r) | ParNI(l, r):
                left, right = go(l, pos + (1,)), go(r, pos + (2,))
                if type(t) is Par and any((s, negate(p)) in right for s, p in left):
                    raise _Facing
                return left | right
        return set()

    try:
        go(end, ())
    except _Facing:
        return True
    return False


class _Facing(Exception):
    pass


def is_exhaustive(labels, end: Term, prov: Provenance) -> bool:
    used = _consumed_positions(labels)
    if any(site.witness not in used for site in prov.lin_sites):
        return False
    if any(p in used for p in prov.inactions):
        return False
    return not facing_inactions(end, prov.inactions)


def exhaustive_pretraces(s: Term) -> list[PreTrace]:
    """Pre-traces of a simple term that trigger every linear action, fire no
    inaction and leave no dual inactions facing across a ``|``."""
    if not is_simple(s):
        raise ContractError("exhaustive pre-traces are defined for simple terms only")
    core, prov = elaborate_with_provenance(s)
    found = _explore(core, "exhaustive")
    out = [
        PreTrace(cfg, structural_order(cfg), core, end, prov)
        for cfg, end in found.items()
        if is_exhaustive(cfg, end, prov)
    ]
    return sorted(out, key=lambda r: sorted(map(lts.label_sort_key, r.labels)))


def exhaustive_pretraces_by_enumeration(s: Term) -> list[frozenset]:
    """Reference: filter every pre-trace of the full walk by the definition."""
    if not is_simple(s):
        raise ContractError("exhaustive pre-traces are defined for simple terms only")
    core, prov = elaborate_with_provenance(s)
    found = _explore(core, "pretraces")
    return sorted(
        (cfg for cfg, end in found.items() if is_exhaustive(cfg, end, prov)),
        key=lambda c: sorted(map(lts.label_sort_key, c)),
    )


__all__ = [
    "Poly",
    "affine_expand",
    "affine_expand_symbolic",
    "exhaustive_pretraces",
    "exhaustive_pretraces_by_enumeration",
    "facing_inactions",
    "is_exhaustive",
    "is_simple",
]
