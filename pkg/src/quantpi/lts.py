"""Position-decorated labelled transitions.

Positions address action occurrences in the syntax tree: prefixes and
place-holders send their child to digit ``1``, both compositions send their
operands to ``1`` and ``2``, and restrictions add no digit.  A visible label
``a+(x):112`` fires the action at position 112; an internal label ``(11,2)``
synchronises the actions at 11 and 2 across the ``|`` at their common prefix.

Labels compare by position only: within one term a position names a unique
action occurrence, while the subject may carry a name revealed along the way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

from .syntax import (
    DERIVED,
    Action,
    Lit,
    Nu,
    Par,
    ParNI,
    Place,
    Position,
    Prefix,
    Term,
    _rename,
    fresh_name,
    negate,
)


class ContractError(RuntimeError):
    """A precondition of the engine was violated by the caller."""


class InvalidInteraction(ValueError):
    def __init__(self, label: "Label", index: int, message: str = "") -> None:
        super().__init__(f"label #{index} {render_label(label)} is not enabled" + (f": {message}" if message else ""))
        self.label = label
        self.index = index


def independent_positions(p: Position, q: Position) -> bool:
    n = min(len(p), len(q))
    return p[:n] != q[:n]


def is_prefix(p: Position, q: Position) -> bool:
    return len(p) <= len(q) and q[: len(p)] == p


def render_position(p: Position) -> str:
    return "".join(map(str, p)) if p else "·"


@dataclass(frozen=True, slots=True)
class Visible:
    subject: str = field(compare=False)
    pol: str = field(compare=False)
    bound: str = field(compare=False)
    at: Position = ()

    @property
    def positions(self) -> tuple[Position, ...]:
        return (self.at,)


@dataclass(frozen=True, slots=True)
class Internal:
    left: Position
    right: Position

    def __post_init__(self) -> None:
        if not independent_positions(self.left, self.right):
            raise ValueError(f"positions {self.left} and {self.right} are not independent")

    @property
    def positions(self) -> tuple[Position, ...]:
        return (self.left, self.right)


Label = Union[Visible, Internal]


def render_label(label: Label) -> str:
    if isinstance(label, Visible):
        return f"{label.subject}{label.pol}({label.bound}):{render_position(label.at)}"
    return f"({render_position(label.left)},{render_position(label.right)})"


def label_sort_key(label: Label):
    return label.positions


# ---------------------------------------------------------------------------
# Scanning a term for enabled transitions


class ActiveAction(NamedTuple):
    at: Position
    action: Action
    blocked: bool  # subject restricted somewhere above
    dead: bool  # firing exposes the literal 0


class InternalInfo(NamedTuple):
    label: Internal
    subject: str
    pol: str  # polarity of the left action
    blocked: bool  # subject restricted above the synchronising "|"
    dead: bool


class Scan(NamedTuple):
    actions: list[ActiveAction]  # active actions, visible or not
    internals: list[InternalInfo]
    census: dict  # (subject, pol) -> number of live actions anywhere in the term
    zero: bool  # the literal 0 is in active position


def scan(t: Term) -> Scan:
    """Collect active actions, enabled synchronisations and a name census."""
    internals: list[InternalInfo] = []
    census: dict[tuple[str, str], int] = {}
    restricted: dict[str, int] = {}

    def walk(t: Term, pos: Position, active: bool) -> tuple[bool, list[ActiveAction]]:
        cls = type(t)
        if cls is Lit:
            return t.value == "0", []
        if cls is Prefix:
            zero, _ = walk(t.body, pos + (1,), False)
            a = t.action
            if not zero:
                key = (a.subject, a.pol)
                census[key] = census.get(key, 0) + 1
            if active:
                return False, [ActiveAction(pos, a, a.subject in restricted, zero)]
            return False, []
        if cls is Place:
            return walk(t.body, pos + (1,), active)
        if cls is Nu:
            restricted[t.name] = restricted.get(t.name, 0) + 1
            try:
                return walk(t.body, pos, active)
            finally:
                restricted[t.name] -= 1
                if not restricted[t.name]:
                    del restricted[t.name]
        if cls is Par or cls is ParNI:
            lz, la = walk(t.left, pos + (1,), active)
            rz, ra = walk(t.right, pos + (2,), active)
            if active and cls is Par and la and ra:
                by_key: dict[tuple[str, str], list[ActiveAction]] = {}
                for r in ra:
                    by_key.setdefault((r.action.subject, r.action.pol), []).append(r)
                for lft in la:
                    for r in by_key.get((lft.action.subject, negate(lft.action.pol)), ()):
                        internals.append(
                            InternalInfo(
                                Internal(lft.at, r.at),
                                lft.action.subject,
                                lft.action.pol,
                                lft.action.subject in restricted,
                                lft.dead or r.dead,
                            )
                        )
            return lz or rz, la + ra
        if cls in DERIVED:
            raise ContractError("derived form reached the transition system; elaborate the term first")
        raise TypeError(f"not a term: {t!r}")

    zero, actions = walk(t, (), True)
    return Scan(actions, internals, census, zero)


def visible_labels(sc: Scan) -> list[Visible]:
    return [Visible(a.action.subject, a.action.pol, a.action.bound, a.at) for a in sc.actions if not a.blocked]


def enabled(t: Term) -> list[Label]:
    sc = scan(t)
    labels: list[Label] = [i.label for i in sc.internals]
    labels.extend(visible_labels(sc))
    return labels


# ---------------------------------------------------------------------------
# Firing


def _consume(t: Term, rest: Position, fresh: str | None) -> tuple[Term, Action]:
    """Replace the prefix at relative position ``rest`` by a place-holder."""
    cls = type(t)
    if cls is Nu:
        body, a = _consume(t.body, rest, fresh)
        return Nu(t.name, body), a
    if not rest:
        if cls is not Prefix:
            raise KeyError("no action at position")
        a = t.action
        body = t.body if fresh is None else _rename(t.body, {a.bound: fresh})
        return Place(body), a
    d, rest = rest[0], rest[1:]
    if cls is Place and d == 1:
        body, a = _consume(t.body, rest, fresh)
        return Place(body), a
    if cls is Par or cls is ParNI:
        if d == 1:
            left, a = _consume(t.left, rest, fresh)
            return cls(left, t.right), a
        if d == 2:
            right, a = _consume(t.right, rest, fresh)
            return cls(t.left, right), a
    raise KeyError("no action at position")


def _synchronise(t: Term, left: Position, right: Position, fresh: str) -> Term:
    cls = type(t)
    if cls is Nu:
        return Nu(t.name, _synchronise(t.body, left, right, fresh))
    if left[0] == right[0]:
        d = left[0]
        if cls is Place and d == 1:
            return Place(_synchronise(t.body, left[1:], right[1:], fresh))
        if (cls is Par or cls is ParNI) and d in (1, 2):
            if d == 1:
                return cls(_synchronise(t.left, left[1:], right[1:], fresh), t.right)
            return cls(t.left, _synchronise(t.right, left[1:], right[1:], fresh))
        raise KeyError("no interaction at position")
    if cls is not Par or left[0] != 1 or right[0] != 2:
        raise KeyError("no interaction at position")
    l, _ = _consume(t.left, left[1:], fresh)
    r, _ = _consume(t.right, right[1:], fresh)
    return Nu(fresh, Par(l, r))


def fire(t: Term, label: Label) -> Term:
    """Fire an enabled label without re-checking that it is enabled."""
    if isinstance(label, Visible):
        return _consume(t, label.at, None)[0]
    return _synchronise(t, label.left, label.right, fresh_name())


def transitions(t: Term) -> list[tuple[Label, Term]]:
    """Every one-step transition of a core term, with fully named labels."""
    return [(lab, fire(t, lab)) for lab in enabled(t)]


def step(t: Term, label: Label, index: int = 0) -> Term:
    for lab in enabled(t):
        if lab == label and type(lab) is type(label):
            return fire(t, lab)
    raise InvalidInteraction(label, index)


def reduct(t: Term, interaction: Sequence[Label]) -> Term:
    """The unique end term ``t/p`` of a valid interaction ``p``."""
    seen: set = set()
    for i, lab in enumerate(interaction):
        if lab in seen:
            raise InvalidInteraction(lab, i, "label repeated")
        seen.add(lab)
        t = step(t, lab, i)
    return t


def erase(label: Label) -> tuple:
    """Forget positions: internal labels become tau."""
    if isinstance(label, Internal):
        return ("tau",)
    return (label.subject, label.pol)
