"""Commutative semirings of test outcomes.

Four carriers are wired in:

* ``nat``    -- unbounded non-negative integers, ordinary ``+`` and ``*``;
* ``bool01`` -- ``{0, 1}`` with ``1 + 1 = 1``;
* ``may``    -- ``{0, 1, w}`` where ``w`` is success, success absorbs under ``+``;
* ``must``   -- ``{0, 1, w}`` where ``1`` (a failing run) absorbs ``w`` under ``+``.

``may`` and ``must`` share the multiplication table.  Values are plain Python
objects: ``int`` for numbers and the string ``"w"`` for success.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Union

SemiringId = Literal["nat", "bool01", "may", "must"]
SemiringValue = Union[int, str]

OMEGA = "w"
SEMIRING_IDS: tuple[str, ...] = ("nat", "bool01", "may", "must")


class CarrierError(ValueError):
    """A value or literal does not belong to the selected carrier."""


@dataclass(frozen=True)
class Semiring:
    name: str
    elements: tuple[SemiringValue, ...] | None  # None for infinite carriers
    _add: Callable[[SemiringValue, SemiringValue], SemiringValue]
    _mul: Callable[[SemiringValue, SemiringValue], SemiringValue]
    idempotent: bool

    zero: SemiringValue = 0
    one: SemiringValue = 1

    def __repr__(self) -> str:
        return f"Semiring({self.name})"

    def contains(self, value: object) -> bool:
        if self.elements is None:
            return isinstance(value, int) and not isinstance(value, bool) and value >= 0
        return any(value == e and type(value) is type(e) for e in self.elements)

    def check(self, value: object) -> SemiringValue:
        if not self.contains(value):
            raise CarrierError(f"{value!r} is not an element of the {self.name} semiring")
        return value  # type: ignore[return-value]

    def add(self, a: SemiringValue, b: SemiringValue) -> SemiringValue:
        return self._add(self.check(a), self.check(b))

    def mul(self, a: SemiringValue, b: SemiringValue) -> SemiringValue:
        return self._mul(self.check(a), self.check(b))

    def sum(self, values) -> SemiringValue:
        total = self.zero
        for v in values:
            total = self.add(total, v)
        return total

    def product(self, values) -> SemiringValue:
        total = self.one
        for v in values:
            total = self.mul(total, v)
        return total

    def times(self, n: int, value: SemiringValue) -> SemiringValue:
        """The n-fold sum ``value + ... + value`` (``0`` when n is 0)."""
        if n < 0:
            raise ValueError("repetition count must be non-negative")
        self.check(value)
        if self.name == "nat":
            return n * value  # type: ignore[operator]
        if self.idempotent:
            return value if n > 0 else self.zero
        result, base = self.zero, value
        while n:
            if n & 1:
                result = self._add(result, base)
            base = self._add(base, base)
            n >>= 1
        return result

    def literal(self, token: str) -> SemiringValue:
        """Interpret an outcome literal token (``"0"``, ``"12"``, ``"w"``)."""
        if token == OMEGA:
            value: SemiringValue = OMEGA
        elif token.isdigit():
            value = int(token)
        else:
            raise CarrierError(f"malformed outcome literal {token!r}")
        if not self.contains(value):
            raise CarrierError(f"literal {token!r} is not an element of the {self.name} semiring")
        return value


def _nat_add(a, b):
    return a + b


def _nat_mul(a, b):
    return a * b


def _bool_add(a, b):
    return 1 if (a or b) else 0


def _bool_mul(a, b):
    return a * b


def _mm_mul(a, b):
    if a == 0 or b == 0:
        return 0
    if a == OMEGA or b == OMEGA:
        return OMEGA
    return 1


def _may_add(a, b):
    if a == OMEGA or b == OMEGA:
        return OMEGA
    if a == 1 or b == 1:
        return 1
    return 0


def _must_add(a, b):
    if a == 0:
        return b
    if b == 0:
        return a
    if a == 1 or b == 1:
        return 1
    return OMEGA


NAT = Semiring("nat", None, _nat_add, _nat_mul, idempotent=False)
BOOL01 = Semiring("bool01", (0, 1), _bool_add, _bool_mul, idempotent=True)
MAY = Semiring("may", (0, 1, OMEGA), _may_add, _mm_mul, idempotent=True)
MUST = Semiring("must", (0, 1, OMEGA), _must_add, _mm_mul, idempotent=True)

_REGISTRY = {s.name: s for s in (NAT, BOOL01, MAY, MUST)}


def get_semiring(sid: str | Semiring) -> Semiring:
    if isinstance(sid, Semiring):
        return sid
    try:
        return _REGISTRY[sid]
    except KeyError:
        raise CarrierError(f"unknown semiring {sid!r}; expected one of {', '.join(SEMIRING_IDS)}") from None


def sr_zero(sid: str) -> SemiringValue:
    return get_semiring(sid).zero


def sr_one(sid: str) -> SemiringValue:
    return get_semiring(sid).one


def sr_add(sid: str, a: SemiringValue, b: SemiringValue) -> SemiringValue:
    return get_semiring(sid).add(a, b)


def sr_mul(sid: str, a: SemiringValue, b: SemiringValue) -> SemiringValue:
    return get_semiring(sid).mul(a, b)


def format_value(value: SemiringValue) -> str:
    return str(value)
