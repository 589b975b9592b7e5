"""Value domain for property graphs and query results.

A property value is null (Python ``None``), a scalar (bool, 64-bit int,
float, str) or a finite :class:`Bag` of non-null scalars.  Query results may
additionally contain element references (:class:`VertexRef`, :class:`EdgeRef`)
and :class:`Path` values.

The module also defines the canonical total order used for deterministic
sorting and printing, and the three-valued predicate/arithmetic helpers used
by selections.  In the total order: booleans < numbers < strings < element
references < bags < paths, and null sorts after every value (ascending).
"""

from __future__ import annotations

import math

from .errors import EvaluationError, TypeMismatchError

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class VertexRef(int):
    """Internal dense vertex id. Prints via the owning graph's external id."""

    __slots__ = ()

    def __repr__(self):
        return f"v#{int(self)}"


class EdgeRef(int):
    """Internal dense edge id, namespace disjoint from vertex refs."""

    __slots__ = ()

    def __repr__(self):
        return f"e#{int(self)}"


class Bag:
    """Immutable finite multiset of non-null scalars.

    Equality is multiset equality: order-free, multiplicity-sensitive.
    """

    __slots__ = ("_counts", "_hash")

    def __init__(self, items=()):
        counts = {}
        for item in items:
            check_scalar(item, "bag element")
            counts[item] = counts.get(item, 0) + 1
        self._counts = counts
        self._hash = None

    @classmethod
    def from_counts(cls, counts):
        # no domain check: collect() builds bags over arbitrary result values
        # (element refs included); the scalar restriction applies to stored
        # property bags, which go through __init__
        bag = cls.__new__(cls)
        bag._counts = {v: c for v, c in counts.items() if c}
        bag._hash = None
        return bag

    def counts(self):
        return dict(self._counts)

    def __iter__(self):
        """Elements in canonical order, repeated per multiplicity."""
        for value in sorted(self._counts, key=canonical_key):
            yield from [value] * self._counts[value]

    def __len__(self):
        return sum(self._counts.values())

    def __eq__(self, other):
        if not isinstance(other, Bag):
            return NotImplemented
        return self._counts == other._counts

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._counts.items()))
        return self._hash

    def contains_all(self, other: "Bag") -> bool:
        """Multiset containment: other ⊆ self."""
        return all(self._counts.get(v, 0) >= c for v, c in other._counts.items())

    def __repr__(self):
        return f"Bag({list(self)!r})"


class Path:
    """An ordered sequence of edge refs; the position realizes the path index."""

    __slots__ = ("edges", "_hash")

    def __init__(self, edges=()):
        self.edges = tuple(edges)
        self._hash = None

    def __eq__(self, other):
        if not isinstance(other, Path):
            return NotImplemented
        return self.edges == other.edges

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("path", self.edges))
        return self._hash

    def __len__(self):
        return len(self.edges)

    def __repr__(self):
        return f"Path({[int(e) for e in self.edges]})"


def check_scalar(value, what="value"):
    """Reject anything outside the scalar domain (bool/int64/float/str)."""
    if value is None:
        raise TypeMismatchError(f"{what} must not be null")
    t = type(value)
    if t is bool or t is float or t is str:
        return value
    if t is int:
        if not (INT64_MIN <= value <= INT64_MAX):
            raise TypeMismatchError(f"{what} exceeds 64-bit integer range: {value}")
        return value
    raise TypeMismatchError(f"{what} outside value domain: {value!r}")


def check_property_value(value, what="property value"):
    """A stored property is a scalar or a bag of scalars, never null."""
    if isinstance(value, Bag):
        return value
    return check_scalar(value, what)


# --- canonical total order ---------------------------------------------------

_RANK_BOOL = 0
_RANK_NUMBER = 1
_RANK_STRING = 2
_RANK_VERTEX = 3
_RANK_EDGE = 4
_RANK_BAG = 5
_RANK_PATH = 6
_RANK_NULL = 7


def canonical_key(value):
    """Total-order sort key. Within a rank, payloads are mutually comparable."""
    if value is None:
        return (_RANK_NULL,)
    t = type(value)
    if t is bool:
        return (_RANK_BOOL, value)
    if t is int or t is float:
        return (_RANK_NUMBER, value)
    if t is str:
        return (_RANK_STRING, value)
    if t is VertexRef:
        return (_RANK_VERTEX, int(value))
    if t is EdgeRef:
        return (_RANK_EDGE, int(value))
    if t is Bag:
        return (_RANK_BAG, tuple(canonical_key(v) for v in value))
    if t is Path:
        return (_RANK_PATH, tuple(int(e) for e in value.edges))
    raise TypeError(f"unorderable value: {value!r}")


def row_key(row):
    return tuple(canonical_key(v) for v in row)


class descending:
    """Wrapper inverting comparison, for DESC sort keys inside key tuples."""

    __slots__ = ("key",)

    def __init__(self, key):
        self.key = key

    def __lt__(self, other):
        return other.key < self.key

    def __eq__(self, other):
        return self.key == other.key


# --- three-valued predicate logic --------------------------------------------

def _family(value):
    t = type(value)
    if t is bool:
        return "bool"
    if t is int or t is float:
        return "number"
    if t is str:
        return "string"
    if t is VertexRef:
        return "vertex"
    if t is EdgeRef:
        return "edge"
    if t is Bag:
        return "bag"
    if t is Path:
        return "path"
    return "?"


def eq_values(a, b):
    """3VL equality: null operands yield unknown; cross-family compares false."""
    if a is None or b is None:
        return None
    fa, fb = _family(a), _family(b)
    if fa != fb:
        return False
    return a == b


def lt_values(a, b):
    """3VL less-than: unknown on null or on families without an order."""
    if a is None or b is None:
        return None
    fa, fb = _family(a), _family(b)
    if fa != fb or fa not in ("bool", "number", "string"):
        return None
    return a < b


def not3(a):
    return None if a is None else (not a)


def and3(a, b):
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def or3(a, b):
    if a is True or b is True:
        return True
    if a is None or b is None:
        return None
    return False


def _check_number(value, op):
    if type(value) not in (int, float):
        raise EvaluationError(f"type mismatch: {op} on {value!r}")
    return value


def arith_values(op, a, b):
    """Numeric arithmetic; null propagates, non-numbers raise EvaluationError."""
    if a is None or b is None:
        return None
    _check_number(a, op)
    _check_number(b, op)
    if op == "+":
        result = a + b
    elif op == "-":
        result = a - b
    elif op == "*":
        result = a * b
    elif op == "/":
        if b == 0:
            raise EvaluationError("division by zero")
        if type(a) is int and type(b) is int:
            q = a // b
            if q < 0 and q * b != a:
                q += 1  # truncate toward zero
            return q
        result = a / b
    else:
        raise EvaluationError(f"unknown operator {op!r}")
    if type(result) is float and math.isnan(result):
        raise EvaluationError(f"undefined numeric result for {a!r} {op} {b!r}")
    return result


def neg_value(a):
    if a is None:
        return None
    _check_number(a, "unary -")
    return -a
