"""Partial-order traces with readiness.

A trace has events with a polarity and a subject (a public name, or the
earlier event whose bound name it uses), a strict partial order, and a ready
set of inactions ``(pol, name-or-event)``.  Traces are compared up to
renaming of events through a canonical key.
"""

from __future__ import annotations

import json
import re
from itertools import permutations
from typing import Iterable, Iterator, Mapping, Union

from . import lts
from .algebra import Poly, affine_expand_symbolic, exhaustive_pretraces, is_exhaustive, is_simple, active_inactions, poly_add_into
from .lts import ContractError, Visible
from .runs import PreTrace, _closure, check_literals, evaluate_polynomial, outcome
from .semiring import Semiring, SemiringValue, get_semiring
from .syntax import (
    NEG,
    ONE,
    POS,
    ZERO,
    Action,
    LinPrefix,
    Nu,
    Par,
    ParNI,
    Place,
    Position,
    Prefix,
    Scalar,
    Sum,
    Term,
    compose,
    fresh_name,
    free_names,
    negate,
    nu_all,
    par_all,
)

Ref = Union[str, int]  # a public name (str) or an event id (int)

_NAME_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")


def _is_event_id(x: object) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


class Trace:
    """An immutable trace; equality and hashing are up to isomorphism."""

    __slots__ = ("events", "pol", "subj", "order", "ready", "_canon")

    def __init__(
        self,
        events: Iterable[int],
        pol: Mapping[int, str],
        subj: Mapping[int, Ref],
        order: Iterable[tuple[int, int]] = (),
        ready: Iterable[tuple[str, Ref]] = (),
    ) -> None:
        events = tuple(sorted(set(events)))
        for e in events:
            if not _is_event_id(e):
                raise ValueError(f"event ids must be integers, got {e!r}")
        evset = set(events)
        pol = {e: pol[e] for e in events}
        subj = {e: subj[e] for e in events}
        for e in events:
            if pol[e] not in (POS, NEG):
                raise ValueError(f"bad polarity {pol[e]!r} for event {e}")
            self._check_ref(subj[e], evset)
        order = set(order)
        for a, b in order:
            if a not in evset or b not in evset:
                raise ValueError(f"order pair ({a}, {b}) mentions an unknown event")
        order = _closure(order)
        if any(a == b for a, b in order):
            raise ValueError("order is not antisymmetric")
        for e in events:
            s = subj[e]
            if _is_event_id(s) and (s, e) not in order:
                raise ValueError(f"event {e} uses the name bound by {s} but is not after it")
        ready = frozenset(ready)
        for p, r in ready:
            if p not in (POS, NEG):
                raise ValueError(f"bad polarity {p!r} in ready set")
            self._check_ref(r, evset)
        self.events = events
        self.pol = pol
        self.subj = subj
        self.order = frozenset(order)
        self.ready = ready
        self._canon = None

    @staticmethod
    def _check_ref(r: object, evset: set) -> None:
        if _is_event_id(r):
            if r not in evset:
                raise ValueError(f"reference to unknown event {r}")
        elif not (isinstance(r, str) and _NAME_RE.match(r)):
            raise ValueError(f"bad name {r!r}")

    # -- structure ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.events)

    def before(self, a: int, b: int) -> bool:
        return (a, b) in self.order

    def preds(self, e: int) -> list[int]:
        return sorted(a for a, b in self.order if b == e)

    def succs(self, e: int) -> list[int]:
        return sorted(b for a, b in self.order if a == e)

    def hasse(self) -> list[tuple[int, int]]:
        return sorted(
            (a, b)
            for a, b in self.order
            if not any((a, c) in self.order and (c, b) in self.order for c in self.events)
        )

    def public_names(self) -> set[str]:
        names = {s for s in self.subj.values() if isinstance(s, str)}
        names.update(r for _, r in self.ready if isinstance(r, str))
        return names

    def relabel(self, mapping: Mapping[int, int]) -> "Trace":
        def ref(r: Ref) -> Ref:
            return mapping[r] if _is_event_id(r) else r

        return Trace(
            [mapping[e] for e in self.events],
            {mapping[e]: self.pol[e] for e in self.events},
            {mapping[e]: ref(self.subj[e]) for e in self.events},
            [(mapping[a], mapping[b]) for a, b in self.order],
            [(p, ref(r)) for p, r in self.ready],
        )

    # -- canonical form ----------------------------------------------------

    def _canonical(self):
        if self._canon is None:
            self._canon = _canonical(self)
        return self._canon

    @property
    def key(self):
        return self._canonical()[0]

    def canonical(self) -> "Trace":
        """The isomorphic trace with events ``1..n`` in canonical order."""
        key, ordering = self._canonical()
        mapping = {e: i + 1 for i, e in enumerate(ordering)}
        if all(mapping[e] == e for e in self.events):
            return self
        out = self.relabel(mapping)
        out._canon = (key, list(range(1, len(ordering) + 1)))
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __lt__(self, other: "Trace") -> bool:
        return (len(self), self.key) < (len(other), other.key)

    def __repr__(self) -> str:
        return f"Trace({to_json_text(self)})"


def _ref_code(pol: str, r: Ref, index: Mapping[int, int]) -> tuple:
    return (pol, 1, index[r]) if _is_event_id(r) else (pol, 0, r)


def _canonical(t: Trace) -> tuple[tuple, list[int]]:
    """Least encoding over all linear extensions of the order.

    Events are listed one at a time, each encoded by its polarity, subject
    (a name, or the index of an already listed event) and the indices of its
    strict predecessors; the ready set is encoded last.  Only choices that
    keep the code sequence minimal are branched on.
    """
    n = len(t.events)
    preds = {e: frozenset(t.preds(e)) for e in t.events}
    best: list = [None, None]

    def go(seq: list[int], index: dict[int, int], codes: list[tuple]) -> None:
        if best[0] is not None and tuple(codes) > best[0][0][: len(codes)]:
            return
        if len(seq) == n:
            ready = tuple(sorted(_ref_code(p, r, index) for p, r in t.ready))
            key = (tuple(codes), ready)
            if best[0] is None or key < best[0]:
                best[0], best[1] = key, list(seq)
            return
        placed = set(seq)
        cands = {}
        for e in t.events:
            if e not in placed and preds[e] <= placed:
                cands[e] = _ref_code(t.pol[e], t.subj[e], index) + (tuple(sorted(index[p] for p in preds[e])),)
        low = min(cands.values())
        for e, code in cands.items():
            if code == low:
                index[e] = len(seq) + 1
                seq.append(e)
                codes.append(code)
                go(seq, index, codes)
                codes.pop()
                seq.pop()
                del index[e]

    go([], {}, [])
    return best[0], best[1]


def isomorphic_by_search(t: Trace, u: Trace) -> bool:
    """Reference isomorphism test over all bijections of events."""
    if len(t) != len(u) or len(t.ready) != len(u.ready):
        return False
    for image in permutations(u.events):
        m = dict(zip(t.events, image))
        if t.relabel(m)._plain() == u._plain():
            return True
    return False


def _plain(self: Trace):
    return (self.events, tuple(sorted(self.pol.items())), tuple(sorted(self.subj.items(), key=repr)), self.order, self.ready)


Trace._plain = _plain  # type: ignore[attr-defined]


# ---------------------------------------------------------------------------
# Construction helpers and JSON


EMPTY = Trace((), {}, {})


def make_trace(events: Mapping[int, tuple[str, Ref]], order=(), ready=()) -> Trace:
    """Build a trace from ``{id: (pol, subject)}``."""
    return Trace(events, {e: ps[0] for e, ps in events.items()}, {e: ps[1] for e, ps in events.items()}, order, ready)


def _ref_json(r: Ref) -> dict:
    return {"event": r} if _is_event_id(r) else {"name": r}


def to_json(t: Trace) -> dict:
    """JSON-ready dictionary of the canonical form; ``order`` is the Hasse relation."""
    c = t.canonical()
    return {
        "events": [{"id": e, "pol": c.pol[e], "subj": _ref_json(c.subj[e])} for e in c.events],
        "order": [list(p) for p in c.hasse()],
        "ready": [
            {"pol": p, "subj": _ref_json(r)}
            for p, r in sorted(c.ready, key=lambda pr: _ref_code(pr[0], pr[1], {e: e for e in c.events}))
        ],
    }


def to_json_text(t: Trace) -> str:
    return json.dumps(to_json(t), separators=(",", ":"))


def _ref_from_json(obj) -> Ref:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError(f"subject must be {{\"name\": ...}} or {{\"event\": ...}}, got {obj!r}")
    if "name" in obj:
        if not isinstance(obj["name"], str):
            raise ValueError(f"name must be a string, got {obj['name']!r}")
        return obj["name"]
    if "event" in obj:
        if not _is_event_id(obj["event"]):
            raise ValueError(f"event reference must be an integer, got {obj['event']!r}")
        return obj["event"]
    raise ValueError(f"subject must be {{\"name\": ...}} or {{\"event\": ...}}, got {obj!r}")


def from_json(obj) -> Trace:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise ValueError("a trace is a JSON object")
    unknown = set(obj) - {"events", "order", "ready"}
    if unknown:
        raise ValueError(f"unknown trace fields: {', '.join(sorted(unknown))}")
    pol, subj, ids = {}, {}, []
    for ev in obj.get("events", []):
        if not isinstance(ev, dict) or set(ev) != {"id", "pol", "subj"}:
            raise ValueError(f"an event needs exactly id, pol and subj: {ev!r}")
        e = ev["id"]
        if not _is_event_id(e) or e in pol:
            raise ValueError(f"bad or duplicate event id {e!r}")
        ids.append(e)
        pol[e] = ev["pol"]
        subj[e] = _ref_from_json(ev["subj"])
    order = []
    for pair in obj.get("order", []):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ValueError(f"order entries are [before, after] pairs, got {pair!r}")
        order.append(tuple(pair))
    ready = []
    for r in obj.get("ready", []):
        if not isinstance(r, dict) or set(r) != {"pol", "subj"}:
            raise ValueError(f"a ready entry needs exactly pol and subj: {r!r}")
        ready.append((r["pol"], _ref_from_json(r["subj"])))
    return Trace(ids, pol, subj, order, ready)


# ---------------------------------------------------------------------------
# Linear combinations


class LinearCombination(dict):
    """Finite map from canonical traces to non-zero semiring values."""

    def __init__(self, semiring: str | Semiring, items=()) -> None:
        super().__init__()
        self.semiring = get_semiring(semiring)
        for t, v in dict(items).items():
            self.add(t, v)

    def add(self, t: Trace, v: SemiringValue) -> None:
        sr = self.semiring
        t = t.canonical()
        total = sr.add(self.get(t, sr.zero), v)
        if total == sr.zero:
            self.pop(t, None)
        else:
            self[t] = total

    def sorted_items(self) -> list[tuple[Trace, SemiringValue]]:
        return sorted(self.items(), key=lambda tv: (len(tv[0]), tv[0].key))

    def to_json(self) -> dict:
        return {
            "semiring": self.semiring.name,
            "terms": [{"coefficient": v, "trace": to_json(t)} for t, v in self.sorted_items()],
        }

    @classmethod
    def from_json(cls, obj) -> "LinearCombination":
        if isinstance(obj, str):
            obj = json.loads(obj)
        sr = get_semiring(obj["semiring"])
        out = cls(sr)
        for item in obj["terms"]:
            out.add(from_json(item["trace"]), sr.check(item["coefficient"]))
        return out


# ---------------------------------------------------------------------------
# Extraction


def _binders(core: Term) -> tuple[dict[str, Position], set[str], dict[Position, Action]]:
    """Action binders by name, restricted names, and actions by position."""
    by_action: dict[str, Position] = {}
    restricted: set[str] = set()
    actions: dict[Position, Action] = {}

    def go(t: Term, pos: Position) -> None:
        match t:
            case Prefix(a, b):
                actions[pos] = a
                by_action[a.bound] = pos
                go(b, pos + (1,))
            case Place(b):
                go(b, pos + (1,))
            case Nu(x, b):
                restricted.add(x)
                go(b, pos)
            case Par(l, r) | ParNI(l, r):
                go(l, pos + (1,))
                go(r, pos + (2,))

    go(core, ())
    return by_action, restricted, actions


def extract_trace(s: Term | None, rho: PreTrace) -> Trace:
    """The observable content of an exhaustive pre-trace of a simple term.

    Events are the visible labels, numbered by position.  Inactions whose
    subject is restricted or was bound by an internal synchronisation cannot
    be observed and are left out of the ready set.
    """
    if s is not None and not is_simple(s):
        raise ContractError("traces are extracted from simple terms only")
    prov = rho.provenance
    if prov is None or not is_exhaustive(rho.labels, rho.end, prov):
        raise ContractError("traces are extracted from exhaustive pre-traces only")
    core = rho.origin
    by_action, restricted, actions = _binders(core)
    free = free_names(core)
    visible = sorted((lab for lab in rho.labels if isinstance(lab, Visible)), key=lts.label_sort_key)
    event_at = {lab.at: i + 1 for i, lab in enumerate(visible)}

    def resolve(name: str) -> Ref | None:
        if name in by_action:
            return event_at.get(by_action[name])
        if name in free and name not in restricted:
            return name
        return None

    pol, subj = {}, {}
    for lab in visible:
        e = event_at[lab.at]
        pol[e] = lab.pol
        r = resolve(actions[lab.at].subject)
        if r is None:
            raise ContractError(f"visible label {lts.render_label(lab)} on a private name")
        subj[e] = r
    order = [
        (event_at[a.at], event_at[b.at])
        for a, b in rho.order
        if isinstance(a, Visible) and isinstance(b, Visible)
    ]
    ready = []
    for pos in active_inactions(rho.end, prov.inactions):
        a = actions[pos]
        r = resolve(a.subject)
        if r is not None:
            ready.append((a.pol, r))
    return Trace(event_at.values(), pol, subj, order, ready)


# ---------------------------------------------------------------------------
# Implementation terms


def implement_trace(t: Trace) -> Term:
    """A simple term whose unique exhaustive pre-trace induces ``t``.

    Each event becomes a linear action guarded by one signal ``x_b_a`` per
    predecessor ``b``; firing it releases ``y_a_c`` for every successor, and
    forwarders ``lin y_a_c.lin ~x_a_c.1`` relay the signal.  Events on a name
    bound by an earlier event sit in that event's continuation.
    """
    t = t.canonical()
    public = t.public_names()

    def fresh_public(base: str) -> str:
        while base in public:
            base += "_"
        return base

    def x(a: int, b: int) -> str:
        return fresh_public(f"x_{a}_{b}")

    def y(a: int, b: int) -> str:
        return fresh_public(f"y_{a}_{b}")

    def z(a: int) -> str:
        return fresh_public(f"z_{a}")

    def block(a: int) -> Term:
        parts: list[Term] = [LinPrefix(Action(y(a, c), NEG, fresh_name()), ONE) for c in t.succs(a)]
        parts += [block(c) for c in t.events if t.subj[c] == a]
        parts += [Prefix(Action(z(a), p, fresh_name()), ZERO) for p in sorted(p for p, r in t.ready if r == a)]
        s = t.subj[a]
        subject = z(s) if _is_event_id(s) else s
        term: Term = LinPrefix(Action(subject, t.pol[a], z(a)), par_all(parts, ParNI))
        for b in reversed(t.preds(a)):
            term = LinPrefix(Action(x(b, a), POS, fresh_name()), term)
        return term

    pairs = sorted(t.order)
    tops = [block(a) for a in t.events if isinstance(t.subj[a], str)]
    forwarders = [
        LinPrefix(Action(y(a, b), POS, fresh_name()), LinPrefix(Action(x(a, b), NEG, fresh_name()), ONE))
        for a, b in pairs
    ]
    body: Term | None = par_all(tops, ParNI) if tops else None
    if forwarders:
        body = Par(body, par_all(forwarders, ParNI))
    if body is not None:
        body = nu_all([n for a, b in pairs for n in (x(a, b), y(a, b))], body)
    inactions = [
        Prefix(Action(r, p, fresh_name()), ZERO)
        for r, p in sorted((r, p) for p, r in t.ready if isinstance(r, str))
    ]
    if inactions:
        rest = par_all(inactions, ParNI)
        return rest if body is None else ParNI(body, rest)
    return ONE if body is None else body


# ---------------------------------------------------------------------------
# Synchronisations


def _acyclic(nodes: Iterable[int], edges: set[tuple[int, int]]) -> bool:
    indeg = {n: 0 for n in nodes}
    succ: dict[int, list[int]] = {n: [] for n in indeg}
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    todo = [n for n, d in indeg.items() if d == 0]
    seen = 0
    while todo:
        n = todo.pop()
        seen += 1
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                todo.append(m)
    return seen == len(indeg)


def synchronisations(t: Trace, u: Trace) -> Iterator[dict[int, int]]:
    """Every bijection from events of ``t`` to events of ``u`` that flips
    polarities, respects subjects, keeps the joint order acyclic and makes
    no ready entries clash."""
    if len(t) != len(u):
        return
    for image in permutations(u.events):
        sigma = dict(zip(t.events, image))

        def map_ref(r: Ref) -> Ref:
            return sigma[r] if _is_event_id(r) else r

        if any(u.pol[sigma[a]] != negate(t.pol[a]) for a in t.events):
            continue
        if any(u.subj[sigma[a]] != map_ref(t.subj[a]) for a in t.events):
            continue
        inverse = {v: k for k, v in sigma.items()}
        edges = set(t.order) | {(inverse[a], inverse[b]) for a, b in u.order}
        if not _acyclic(t.events, edges):
            continue
        if any((negate(p), map_ref(r)) in u.ready for p, r in t.ready):
            continue
        yield sigma


def sync_count(t: Trace, u: Trace) -> int:
    """Number of synchronisations of two traces, by brute force."""
    return sum(1 for _ in synchronisations(t, u))


def sync_count_by_outcome(t: Trace, u: Trace) -> int:
    """The same count read off the run enumeration of the implementations."""
    return outcome(compose(implement_trace(t), implement_trace(u)), "nat")


# ---------------------------------------------------------------------------
# Orders, duals and composition


def linear_extensions(t: Trace) -> list[list[int]]:
    preds = {e: set(t.preds(e)) for e in t.events}
    out: list[list[int]] = []

    def go(seq: list[int], placed: set[int]) -> None:
        if len(seq) == len(t.events):
            out.append(list(seq))
            return
        for e in t.events:
            if e not in placed and preds[e] <= placed:
                seq.append(e)
                placed.add(e)
                go(seq, placed)
                placed.discard(e)
                seq.pop()

    go([], set())
    return out


def total_orderings(t: Trace) -> list[Trace]:
    """One trace per linear extension of the order, everything else unchanged.

    Distinct extensions may give isomorphic traces; each is listed.
    """
    out = []
    for ext in linear_extensions(t):
        order = [(ext[i], ext[j]) for i in range(len(ext)) for j in range(i + 1, len(ext))]
        out.append(Trace(t.events, t.pol, t.subj, order, t.ready))
    return out


def dual(t: Trace) -> Trace:
    """Flip every polarity, of events and of ready entries."""
    return Trace(
        t.events,
        {e: negate(p) for e, p in t.pol.items()},
        t.subj,
        t.order,
        [(negate(p), r) for p, r in t.ready],
    )


# ---------------------------------------------------------------------------
# Decomposition


def decompose_symbolic(t: Term) -> dict[Trace, Poly]:
    out: dict[Trace, Poly] = {}
    for s, coeff in affine_expand_symbolic(t).items():
        for rho in exhaustive_pretraces(s):
            tr = extract_trace(s, rho).canonical()
            poly_add_into(out.setdefault(tr, Poly()), coeff)
    return out


def decompose(t: Term, sid: str | Semiring = "nat") -> LinearCombination:
    """``t`` as a linear combination of traces over the chosen carrier."""
    check_literals(t, sid)
    sr = get_semiring(sid)
    out = LinearCombination(sr)
    for tr, poly in decompose_symbolic(t).items():
        out.add(tr, evaluate_polynomial(poly, sr))
    return out


def trace_par_compose(t: Trace, u: Trace) -> LinearCombination:
    """Parallel composition of two traces, through their implementations."""
    return decompose(compose(implement_trace(t), implement_trace(u)), "nat")


def combination_term(lc: Mapping[Trace, SemiringValue]) -> Term:
    """A term denoting the combination: ``k1 * impl(T1) (+) ...``; ``0`` when empty."""
    parts = []
    for tr, v in sorted(lc.items(), key=lambda tv: (len(tv[0]), tv[0].key)):
        impl = implement_trace(tr)
        parts.append(impl if v == 1 else Scalar(str(v), impl))
    if not parts:
        return ZERO
    term = parts[0]
    for p in parts[1:]:
        term = Sum(term, p)
    return term


def canonicalize(t: Trace) -> Trace:
    return t.canonical()
