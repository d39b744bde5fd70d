"""Homotopy classes of interactions, causal order, states and outcomes.

A pre-trace is identified with the set of its labels (two interactions of a
term that are permutations of each other are homotopic), so enumeration
walks the lattice of label sets instead of the tree of interleavings.

Two engines share that walk:

* the *full* walk visits every reachable label set and backs :func:`runs`
  and :func:`pretraces`;
* the *reduced* walk backs :func:`outcome` and exhaustive pre-trace search.
  It never fires an action whose continuation exposes the literal ``0``
  (such runs contribute nothing), and when an enabled label has no possible
  competitor it fires that label alone, because every surviving maximal
  extension contains it.
"""

from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import lts
from .lts import Label, Visible, fire, scan
from .semiring import Semiring, SemiringValue, get_semiring
from .syntax import Lit, Nu, Par, ParNI, Place, Prefix, Provenance, Term, elaborate, is_core, literals


@dataclass(frozen=True)
class PreTrace:
    """A homotopy class, stored as its label set with the causal order.

    ``order`` holds the strict pairs ``(a, b)`` with ``a`` before ``b``.
    """

    labels: frozenset
    order: frozenset
    origin: Term = field(compare=False, repr=False)
    end: Term = field(compare=False, repr=False)
    provenance: Provenance | None = field(default=None, compare=False, repr=False)

    def sorted_labels(self) -> list[Label]:
        return sorted(self.labels, key=lts.label_sort_key)

    def hasse(self) -> list[tuple[Label, Label]]:
        return hasse_edges(self.order)

    def linearization(self) -> list[Label]:
        return topological_order(self.labels, self.order)


Run = PreTrace


def independent(a: Label, b: Label) -> bool:
    return all(lts.independent_positions(p, q) for p in a.positions for q in b.positions)


# ---------------------------------------------------------------------------
# Orders


def _closure(pairs: set) -> set:
    succ: dict = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    closed = set()
    for a in list(succ):
        stack, seen = list(succ[a]), set()
        while stack:
            b = stack.pop()
            if b in seen:
                continue
            seen.add(b)
            stack.extend(succ.get(b, ()))
        closed.update((a, b) for b in seen)
    return closed


def structural_order(labels: Iterable[Label]) -> frozenset:
    """Causal order from position nesting: ``a < b`` when an action of ``b``
    sits under an action of ``a``, closed transitively."""
    labels = list(labels)
    direct = set()
    for a in labels:
        for b in labels:
            if a is not b and any(
                lts.is_prefix(p, q) and p != q for p in a.positions for q in b.positions
            ):
                direct.add((a, b))
    return frozenset(_closure(direct))


def hasse_edges(order: Iterable[tuple]) -> list[tuple]:
    order = set(order)
    succ: dict = {}
    for a, b in order:
        succ.setdefault(a, set()).add(b)
    edges = [
        (a, b)
        for a, b in order
        if not any((c, b) in order for c in succ.get(a, ()) if c != b)
    ]
    return sorted(edges, key=lambda e: (lts.label_sort_key(e[0]), lts.label_sort_key(e[1])))


def topological_order(labels: Iterable[Label], order: Iterable[tuple]) -> list[Label]:
    labels = sorted(labels, key=lts.label_sort_key)
    preds = {lab: set() for lab in labels}
    for a, b in order:
        preds[b].add(a)
    out: list[Label] = []
    placed: set = set()
    while len(out) < len(labels):
        for lab in labels:
            if lab not in placed and preds[lab] <= placed:
                out.append(lab)
                placed.add(lab)
                break
        else:
            raise ValueError("order is cyclic")
    return out


# ---------------------------------------------------------------------------
# Exploration of the label-set lattice


def _explore(t: Term, mode: str, rng: random.Random | None = None) -> dict[frozenset, Term]:
    """Walk label sets reachable from ``t``.

    ``mode`` is ``"runs"`` (internal labels, maximal sets), ``"pretraces"``
    (all labels, all sets), ``"outcome"`` (reduced, internal, maximal sets
    with non-zero state) or ``"exhaustive"`` (reduced, all labels except
    those exposing ``0``, maximal sets).  ``rng`` shuffles the order in
    which successors are explored; the result does not depend on it.
    """
    if mode == "outcome" and scan(t).zero:
        return {}
    start: frozenset = frozenset()
    seen = {start}
    todo = [(start, t)]
    found: dict[frozenset, Term] = {}
    while todo:
        cfg, term = todo.pop()
        sc = scan(term)
        if mode == "runs":
            cands: list[Label] = [i.label for i in sc.internals]
        elif mode == "pretraces":
            found[cfg] = term
            cands = [i.label for i in sc.internals] + lts.visible_labels(sc)
        elif mode == "outcome":
            if not sc.internals:
                found[cfg] = term
                continue
            # only dead synchronisations left: every completion has state 0
            cands = _reduced_candidates(sc, visible=False)
        else:
            cands = _reduced_candidates(sc, visible=True)
        if not cands:
            if mode != "pretraces":
                found[cfg] = term
            continue
        if rng is not None:
            rng.shuffle(cands)
        for lab in cands:
            new = cfg | {lab}
            if new in seen:
                continue
            seen.add(new)
            todo.append((new, fire(term, lab)))
    if mode == "outcome":
        return {cfg: end for cfg, end in found.items() if not scan(end).internals}
    return found


def _reduced_candidates(sc: lts.Scan, visible: bool) -> list[Label]:
    """Live labels to explore, or a single forced one.

    A synchronisation is forced when neither action has another live
    partner anywhere in the term and (when visible labels count) its
    subject is restricted.  A visible label is forced when its action has
    no live partner at all.
    """
    census = sc.census
    live = [i for i in sc.internals if not i.dead]
    for i in live:
        if visible and not i.blocked:
            continue
        if census.get((i.subject, i.pol), 0) == 1 and census.get((i.subject, lts.negate(i.pol)), 0) == 1:
            return [i.label]
    cands: list[Label] = [i.label for i in live]
    if visible:
        for a in sc.actions:
            if a.blocked or a.dead:
                continue
            lab = Visible(a.action.subject, a.action.pol, a.action.bound, a.at)
            if census.get((a.action.subject, lts.negate(a.action.pol)), 0) == 0:
                return [lab]
            cands.append(lab)
    return cands


# ---------------------------------------------------------------------------
# Public enumeration


def _core(t: Term) -> Term:
    return t if is_core(t) else elaborate(t)


def runs(t: Term, rng: random.Random | None = None) -> list[Run]:
    """All runs of ``t`` (homotopy classes of maximal paths), sorted."""
    t = _core(t)
    found = _explore(t, "runs", rng)
    out = [PreTrace(cfg, structural_order(cfg), t, end) for cfg, end in found.items()]
    return sorted(out, key=lambda r: sorted(map(lts.label_sort_key, r.labels)))


def pretraces(t: Term) -> list[PreTrace]:
    """All pre-traces of ``t`` (homotopy classes of interactions), sorted."""
    t = _core(t)
    found = _explore(t, "pretraces")
    out = [PreTrace(cfg, structural_order(cfg), t, end) for cfg, end in found.items()]
    return sorted(out, key=lambda r: (len(r.labels), sorted(map(lts.label_sort_key, r.labels))))


def causal_order(t: Term, rho: PreTrace | Iterable[Label]) -> frozenset:
    """Strict causal order of a pre-trace of ``t``."""
    labels = rho.labels if isinstance(rho, PreTrace) else frozenset(rho)
    return structural_order(labels)


def linearizations(t: Term, labels: Iterable[Label]) -> list[tuple[Label, ...]]:
    """Every ordering of ``labels`` that is a valid interaction of ``t``."""
    t = _core(t)
    labels = frozenset(labels)
    out: list[tuple[Label, ...]] = []

    def go(term: Term, done: tuple[Label, ...]) -> None:
        if len(done) == len(labels):
            out.append(done)
            return
        for lab in lts.enabled(term):
            if lab in labels and lab not in done:
                go(fire(term, lab), done + (lab,))

    go(t, ())
    return out


def causal_order_by_linearizations(t: Term, labels: Iterable[Label]) -> frozenset:
    """Reference causal order: precedence common to all valid linearizations."""
    labels = frozenset(labels)
    lins = linearizations(t, labels)
    if not lins:
        raise ValueError("labels do not form a pre-trace of the term")
    common = None
    for lin in lins:
        index = {lab: i for i, lab in enumerate(lin)}
        before = {(a, b) for a in labels for b in labels if index[a] < index[b]}
        common = before if common is None else common & before
    return frozenset(common)


def homotopic(p: Sequence[Label], q: Sequence[Label], t: Term) -> bool:
    """Whether two valid interactions of ``t`` are homotopic (same label set)."""
    t = _core(t)
    lts.reduct(t, p)
    lts.reduct(t, q)
    return len(p) == len(q) and set(p) == set(q)


def homotopic_by_swaps(p: Sequence[Label], q: Sequence[Label]) -> bool:
    """Reference check: is ``q`` reachable from ``p`` by swapping adjacent
    independent labels?"""
    p, q = tuple(p), tuple(q)
    if sorted(map(lts.label_sort_key, p)) != sorted(map(lts.label_sort_key, q)):
        return False
    seen = {p}
    queue = deque([p])
    while queue:
        cur = queue.popleft()
        if cur == q:
            return True
        for i in range(len(cur) - 1):
            if independent(cur[i], cur[i + 1]):
                nxt = cur[:i] + (cur[i + 1], cur[i]) + cur[i + 2 :]
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return False


# ---------------------------------------------------------------------------
# States and outcomes


def active_literals(t: Term) -> list[str]:
    match t:
        case Lit(v):
            return [v]
        case Prefix():
            return []
        case Place(b) | Nu(_, b):
            return active_literals(b)
        case Par(l, r) | ParNI(l, r):
            return active_literals(l) + active_literals(r)
    raise lts.ContractError(f"state is defined on core terms, got {type(t).__name__}")


def state(t: Term, sid: str | Semiring = "nat") -> SemiringValue:
    """Product of the outcomes in active position."""
    sr = get_semiring(sid)
    return sr.product(sr.literal(k) for k in active_literals(t))


def _monomial(t: Term) -> tuple[str, ...] | None:
    lits = active_literals(t)
    if "0" in lits:
        return None
    return tuple(sorted(k for k in lits if k != "1"))


def outcome_polynomial(t: Term, rng: random.Random | None = None) -> Counter:
    """Outcome as a formal sum: monomial of literals -> number of runs."""
    t = _core(t)
    poly: Counter = Counter()
    for end in _explore(t, "outcome", rng).values():
        mono = _monomial(end)
        if mono is not None:
            poly[mono] += 1
    return poly


def evaluate_polynomial(poly: Counter | dict, sid: str | Semiring) -> SemiringValue:
    sr = get_semiring(sid)
    total = sr.zero
    for mono, count in sorted(poly.items()):
        value = sr.product(sr.literal(k) for k in mono)
        total = sr.add(total, sr.times(count, value))
    return total


def check_literals(t: Term, sid: str | Semiring) -> None:
    sr = get_semiring(sid)
    for k in literals(t):
        sr.literal(k)


def outcome(t: Term, sid: str | Semiring = "nat") -> SemiringValue:
    """Sum over the runs of ``t`` of the state reached."""
    check_literals(t, sid)
    return evaluate_polynomial(outcome_polynomial(t), sid)


def outcome_by_runs(t: Term, sid: str | Semiring = "nat", rng: random.Random | None = None) -> SemiringValue:
    """Reference outcome from the full run enumeration (no reduction)."""
    check_literals(t, sid)
    sr = get_semiring(sid)
    return sr.sum(state(r.end, sr) for r in runs(t, rng))

