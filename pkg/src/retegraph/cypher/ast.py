"""Abstract syntax for the supported query subset.

Positions (line, col) ride along for diagnostics but are excluded from
equality so structural comparison (e.g. the pretty-print round trip) ignores
layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

AGGREGATE_FUNCS = ("count", "sum", "avg", "min", "max", "collect")


def pos_field():
    return field(default=(0, 0), compare=False, repr=False)


# --- expressions ---------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    value: object
    pos: tuple = pos_field()


@dataclass(frozen=True)
class Var:
    name: str
    pos: tuple = pos_field()


@dataclass(frozen=True)
class PropAccess:
    var: str
    key: str
    pos: tuple = pos_field()


@dataclass(frozen=True)
class LabelPredicate:
    var: str
    labels: tuple
    pos: tuple = pos_field()


@dataclass(frozen=True)
class PatternPredicate:
    pattern: "Pattern"
    negated: bool = False
    pos: tuple = pos_field()


@dataclass(frozen=True)
class Comparison:
    op: str  # = <> < <= > >=
    left: object
    right: object
    pos: tuple = pos_field()


@dataclass(frozen=True)
class BoolOp:
    op: str  # and | or
    left: object
    right: object
    pos: tuple = pos_field()


@dataclass(frozen=True)
class Not:
    operand: object
    pos: tuple = pos_field()


@dataclass(frozen=True)
class Arithmetic:
    op: str  # + - * /
    left: object
    right: object
    pos: tuple = pos_field()


@dataclass(frozen=True)
class Negate:
    operand: object
    pos: tuple = pos_field()


@dataclass(frozen=True)
class AggregateCall:
    func: str
    argument: object
    pos: tuple = pos_field()


# --- patterns -------------------------------------------------------------------

@dataclass(frozen=True)
class NodePattern:
    var: str  # always named; parser invents names for anonymous nodes
    labels: tuple = ()
    anonymous: bool = False
    pos: tuple = pos_field()


@dataclass(frozen=True)
class RelPattern:
    var: str
    types: tuple = ()
    direction: str = "out"  # out | in | both
    range: tuple | None = None  # (low, up) with up None for unbounded
    anonymous: bool = False
    pos: tuple = pos_field()


@dataclass(frozen=True)
class Pattern:
    """A chain: node, then (relationship, node) pairs."""

    head: NodePattern
    hops: tuple = ()  # of (RelPattern, NodePattern)
    pos: tuple = pos_field()

    def nodes(self):
        yield self.head
        for _rel, node in self.hops:
            yield node

    def rels(self):
        for rel, _node in self.hops:
            yield rel


# --- clauses ----------------------------------------------------------------------

@dataclass(frozen=True)
class ReturnItem:
    expression: object
    alias: str | None = None
    pos: tuple = pos_field()


@dataclass(frozen=True)
class Match:
    patterns: tuple
    optional: bool = False
    where: object | None = None
    pos: tuple = pos_field()


@dataclass(frozen=True)
class With:
    items: tuple
    distinct: bool = False
    where: object | None = None
    pos: tuple = pos_field()


@dataclass(frozen=True)
class Unwind:
    expression: object
    alias: str
    pos: tuple = pos_field()


@dataclass(frozen=True)
class Return:
    items: tuple
    distinct: bool = False
    pos: tuple = pos_field()


@dataclass(frozen=True)
class SortKey:
    expression: object
    ascending: bool = True
    pos: tuple = pos_field()


@dataclass(frozen=True)
class OrderSkipLimit:
    keys: tuple = ()
    skip: int = 0
    limit: int | None = None
    pos: tuple = pos_field()


@dataclass(frozen=True)
class Query:
    clauses: tuple  # Match/With/Unwind* then Return, then optional OrderSkipLimit
    pos: tuple = pos_field()
