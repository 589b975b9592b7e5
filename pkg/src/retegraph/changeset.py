"""Change sets: the update currency between the store and the engine.

A change set pairs two tuple bags over one schema: positive rows (insertions)
and negative rows (deletions).  Bags are ``dict[row, count]`` with positive
counts on both sides; ``normalized()`` cancels rows appearing on both.
"""

from __future__ import annotations


class ChangeSet:
    __slots__ = ("schema", "positive", "negative")

    def __init__(self, schema=None, positive=None, negative=None):
        self.schema = schema
        self.positive = dict(positive) if positive else {}
        self.negative = dict(negative) if negative else {}

    @classmethod
    def from_signed(cls, schema, items):
        """Build from (row, signed_count) pairs, cancelling opposite signs."""
        net = {}
        for row, count in items:
            net[row] = net.get(row, 0) + count
        cs = cls(schema)
        for row, count in net.items():
            if count > 0:
                cs.positive[row] = count
            elif count < 0:
                cs.negative[row] = -count
        return cs

    def signed_items(self):
        """All rows as (row, signed_count), negatives first."""
        items = [(row, -count) for row, count in self.negative.items()]
        items.extend(self.positive.items())
        return items

    def normalized(self) -> "ChangeSet":
        return ChangeSet.from_signed(self.schema, self.signed_items())

    def is_empty(self) -> bool:
        return not self.positive and not self.negative

    def __bool__(self):
        return not self.is_empty()

    def __eq__(self, other):
        if not isinstance(other, ChangeSet):
            return NotImplemented
        return self.positive == other.positive and self.negative == other.negative

    def __repr__(self):
        return f"ChangeSet(+{dict(self.positive)}, -{dict(self.negative)})"
