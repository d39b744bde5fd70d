"""Reference implementations used only by the tests.

These are written against the plain definitions, without the engine's
shortcuts: a standard transition system on terms with positions erased,
a may/must tester over it, brute-force trace isomorphism, and run counting
through explicit interleavings grouped by adjacent swaps.
"""

from __future__ import annotations

from collections import deque
from itertools import permutations

from quantpi import lts
from quantpi.semiring import OMEGA
from quantpi.syntax import Lit, Nu, Par, ParNI, Place, Prefix, Term, _rename, alpha_key, compose, elaborate, fresh_name

TAU = ("tau",)


# ---------------------------------------------------------------------------
# Standard transition system (no positions)


def _actions(t: Term, restricted: frozenset):
    """Active prefixes as (subject, pol, rebuild) where rebuild(fresh) gives
    the term with that prefix consumed and its bound name renamed."""
    match t:
        case Prefix(a, b):
            def rebuild(fresh, a=a, b=b):
                return Place(b if fresh is None else _rename(b, {a.bound: fresh}))

            return [(a.subject, a.pol, a.subject in restricted, rebuild)]
        case Place(b):
            return [(s, p, r, (lambda f, k=k: Place(k(f)))) for s, p, r, k in _actions(b, restricted)]
        case Nu(x, b):
            return [(s, p, r, (lambda f, k=k, x=x: Nu(x, k(f)))) for s, p, r, k in _actions(b, restricted | {x})]
        case Par(l, r) | ParNI(l, r):
            op = type(t)
            out = [(s, p, rr, (lambda f, k=k: op(k(f), r))) for s, p, rr, k in _actions(l, restricted)]
            out += [(s, p, rr, (lambda f, k=k: op(l, k(f)))) for s, p, rr, k in _actions(r, restricted)]
            return out
    return []


def std_transitions(t: Term) -> list[tuple[tuple, Term]]:
    """Every transition of ``t`` with labels ``(subject, pol)`` or ``tau``."""
    out = [((s, p), k(None)) for s, p, blocked, k in _actions(t, frozenset()) if not blocked]
    out += [(TAU, u) for u in _syncs(t)]
    return out


def _syncs(t: Term) -> list[Term]:
    match t:
        case Place(b):
            return [Place(u) for u in _syncs(b)]
        case Nu(x, b):
            return [Nu(x, u) for u in _syncs(b)]
        case Par(l, r) | ParNI(l, r):
            op = type(t)
            out = [op(u, r) for u in _syncs(l)] + [op(l, u) for u in _syncs(r)]
            if op is Par:
                for s1, p1, _, k1 in _actions(l, frozenset()):
                    for s2, p2, _, k2 in _actions(r, frozenset()):
                        if s1 == s2 and p1 != p2:
                            x = fresh_name()
                            out.append(Nu(x, Par(k1(x), k2(x))))
            return out
    return []


def literal_product(t: Term) -> object:
    """Product of active literals over {0, 1, w, naturals}: 0 absorbs, w beats numbers."""
    lits = []

    def go(t: Term) -> None:
        match t:
            case Lit(v):
                lits.append(v)
            case Place(b) | Nu(_, b):
                go(b)
            case Par(l, r) | ParNI(l, r):
                go(l)
                go(r)

    go(t)
    if "0" in lits:
        return 0
    if OMEGA in lits:
        return OMEGA
    value = 1
    for v in lits:
        value *= int(v)
    return value


def final_states(t: Term) -> set:
    """Values of the states ending maximal internal paths."""
    memo: dict = {}

    def go(t: Term) -> frozenset:
        key = alpha_key(t)
        if key in memo:
            return memo[key]
        # active literals stay active, so an active 0 decides every completion
        if literal_product(t) == 0:
            memo[key] = frozenset({0})
            return memo[key]
        succ = [u for lab, u in std_transitions(t) if lab == TAU]
        if not succ:
            res = frozenset({literal_product(t)})
        else:
            res = frozenset().union(*(go(u) for u in succ))
        memo[key] = res
        return res

    return set(go(t))


def may_pass(t: Term) -> bool:
    """Some maximal computation ends in success."""
    return OMEGA in final_states(t)


def must_pass(t: Term) -> bool:
    """No maximal computation ends in plain failure ``1`` and one succeeds.

    Computations ending in ``0`` are discarded, as ``0`` is neutral for the
    sum of outcomes.
    """
    s = final_states(t)
    return OMEGA in s and 1 not in s


def separating_index(p: Term, q: Term, contexts, mode: str) -> int | None:
    """Index of the first context where the standard tester tells p and q apart."""
    passes = may_pass if mode == "may" else must_pass
    for i, r in enumerate(contexts):
        if passes(elaborate(compose(p, r))) != passes(elaborate(compose(q, r))):
            return i
    return None


# ---------------------------------------------------------------------------
# Runs as homotopy classes of explicit paths


def maximal_paths(t: Term) -> list[tuple[tuple, Term]]:
    out = []

    def go(t: Term, path: tuple) -> None:
        internal = [lab for lab in lts.enabled(t) if isinstance(lab, lts.Internal)]
        if not internal:
            out.append((path, t))
            return
        for lab in internal:
            go(lts.fire(t, lab), path + (lab,))

    go(t, ())
    return out


def _independent(a, b) -> bool:
    return all(lts.independent_positions(p, q) for p in a.positions for q in b.positions)


def homotopy_classes(paths: list[tuple]) -> list[list[int]]:
    """Group paths (indices) reachable from one another by adjacent swaps of
    independent labels."""
    index = {p: i for i, p in enumerate(paths)}
    seen: set[int] = set()
    classes = []
    for i, p in enumerate(paths):
        if i in seen:
            continue
        cls, queue = [], deque([p])
        visited = {p}
        while queue:
            cur = queue.popleft()
            if cur in index:
                cls.append(index[cur])
            for j in range(len(cur) - 1):
                if _independent(cur[j], cur[j + 1]):
                    nxt = cur[:j] + (cur[j + 1], cur[j]) + cur[j + 2 :]
                    if nxt not in visited:
                        visited.add(nxt)
                        queue.append(nxt)
        seen.update(cls)
        classes.append(sorted(cls))
    return classes


def outcome_by_paths(t: Term, semiring) -> object:
    """Outcome from explicit maximal paths grouped into homotopy classes."""
    paths = maximal_paths(t)
    seqs = [p for p, _ in paths]
    total = semiring.zero
    for cls in homotopy_classes(seqs):
        end = paths[cls[0]][1]
        lits = []

        def go(u: Term) -> None:
            match u:
                case Lit(v):
                    lits.append(v)
                case Place(b) | Nu(_, b):
                    go(b)
                case Par(l, r) | ParNI(l, r):
                    go(l)
                    go(r)

        go(end)
        total = semiring.add(total, semiring.product(semiring.literal(k) for k in lits))
    return total


# ---------------------------------------------------------------------------
# Traces


def traces_isomorphic(t, u) -> bool:
    """Search all event bijections for one carrying ``t`` onto ``u``."""
    if len(t.events) != len(u.events) or len(t.ready) != len(u.ready):
        return False
    for image in permutations(u.events):
        m = dict(zip(t.events, image))

        def ref(r):
            return m[r] if isinstance(r, int) else r

        if any(u.pol[m[e]] != t.pol[e] or u.subj[m[e]] != ref(t.subj[e]) for e in t.events):
            continue
        if {(m[a], m[b]) for a, b in t.order} != set(u.order):
            continue
        if {(p, ref(r)) for p, r in t.ready} != set(u.ready):
            continue
        return True
    return False


def count_linear_extensions(t) -> int:
    return sum(
        1
        for perm in permutations(t.events)
        if all(perm.index(a) < perm.index(b) for a, b in t.order)
    )
