"""Pure-Python implementation of the hot propagation kernels.

These functions are the inner loops of change-set propagation: multiset
cache updates, join-index maintenance and probes, and column slicing.
``_impl_c.pyx`` is a compiled twin with the same signatures; callers import
whichever backend :mod:`retegraph.engine.kernels` selected.

Conventions: a *bag* is ``dict[row, count]`` with strictly positive counts;
*items* is ``list[(row, signed_count)]``; an *index* is
``dict[key, dict[row, count]]``.  Retracting below zero raises ``ValueError``
(callers translate to the engine's error type).
"""

BACKEND = "python"


def apply_items(bag, items):
    """Fold signed items into a bag, dropping zero entries."""
    for row, count in items:
        new = bag.get(row, 0) + count
        if new < 0:
            raise ValueError(f"retraction below zero for {row!r}")
        if new:
            bag[row] = new
        else:
            bag.pop(row, None)


def apply_items_transitions(bag, items):
    """Like apply_items, but report (row, before, after) per distinct row.

    ``before`` is the multiplicity before the first touch of the row within
    this call, ``after`` the final one; rows are reported in first-touch
    order.
    """
    before = {}
    order = []
    for row, count in items:
        old = bag.get(row, 0)
        if row not in before:
            before[row] = old
            order.append(row)
        new = old + count
        if new < 0:
            raise ValueError(f"retraction below zero for {row!r}")
        if new:
            bag[row] = new
        else:
            bag.pop(row, None)
    return [(row, before[row], bag.get(row, 0)) for row in order]


def update_index(index, key_idx, items):
    """Fold signed items into a join index keyed by the given columns."""
    for row, count in items:
        key = tuple(row[i] for i in key_idx)
        sub = index.get(key)
        if sub is None:
            sub = index[key] = {}
        new = sub.get(row, 0) + count
        if new < 0:
            raise ValueError(f"retraction below zero for {row!r}")
        if new:
            sub[row] = new
        else:
            sub.pop(row, None)
            if not sub:
                index.pop(key, None)


def key_totals_update(totals, key_idx, items):
    """Fold signed items into per-key totals; report (key, before, after)."""
    before = {}
    order = []
    for row, count in items:
        key = tuple(row[i] for i in key_idx)
        old = totals.get(key, 0)
        if key not in before:
            before[key] = old
            order.append(key)
        new = old + count
        if new < 0:
            raise ValueError(f"key total below zero for {key!r}")
        if new:
            totals[key] = new
        else:
            totals.pop(key, None)
    return [(key, before[key], totals.get(key, 0)) for key in order]


def join_probe(items, key_idx, other_index, other_emit_idx, delta_is_left):
    """Join delta items against the cached other side.

    Output rows follow the combined schema ``left ++ right-extras``: for a
    left-side delta the item row is the left row and ``other_emit_idx``
    selects the right side's non-shared columns; for a right-side delta the
    roles are swapped.  Keys containing null never match (openCypher join
    semantics).
    """
    out = []
    for row, count in items:
        key = tuple(row[i] for i in key_idx)
        if any(v is None for v in key):
            continue
        sub = other_index.get(key)
        if not sub:
            continue
        if delta_is_left:
            for other, ocount in sub.items():
                out.append((row + tuple(other[i] for i in other_emit_idx), count * ocount))
        else:
            extra = tuple(row[i] for i in other_emit_idx)
            for other, ocount in sub.items():
                out.append((other + extra, count * ocount))
    return out


def slice_rows(items, idx):
    """Project each item row onto the given column indices."""
    return [(tuple(row[i] for i in idx), count) for row, count in items]
