# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled implementation of the propagation kernels.

Same contract as ``_impl_py``; see that module for the conventions.  The
speedup comes from C-level loops and typed counters over the same dict and
tuple structures.
"""

BACKEND = "cython"


def apply_items(dict bag, list items):
    cdef Py_ssize_t count, new
    cdef object row
    for row, count in items:
        new = bag.get(row, 0) + count
        if new < 0:
            raise ValueError(f"retraction below zero for {row!r}")
        if new:
            bag[row] = new
        else:
            bag.pop(row, None)


def apply_items_transitions(dict bag, list items):
    cdef dict before = {}
    cdef list order = []
    cdef Py_ssize_t count, old, new
    cdef object row
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


cdef inline tuple _key_of(tuple row, tuple key_idx):
    cdef Py_ssize_t i, n = len(key_idx)
    cdef list parts = [None] * n
    for i in range(n):
        parts[i] = row[<Py_ssize_t> key_idx[i]]
    return tuple(parts)


def update_index(dict index, tuple key_idx, list items):
    cdef Py_ssize_t count, new
    cdef object row, key
    cdef dict sub
    for row, count in items:
        key = _key_of(<tuple> row, key_idx)
        sub = <dict> index.get(key)
        if sub is None:
            sub = {}
            index[key] = sub
        new = sub.get(row, 0) + count
        if new < 0:
            raise ValueError(f"retraction below zero for {row!r}")
        if new:
            sub[row] = new
        else:
            sub.pop(row, None)
            if not sub:
                index.pop(key, None)


def key_totals_update(dict totals, tuple key_idx, list items):
    cdef dict before = {}
    cdef list order = []
    cdef Py_ssize_t count, old, new
    cdef object row, key
    for row, count in items:
        key = _key_of(<tuple> row, key_idx)
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


def join_probe(list items, tuple key_idx, dict other_index, tuple other_emit_idx,
               bint delta_is_left):
    cdef list out = []
    cdef Py_ssize_t count, ocount, i, n_emit = len(other_emit_idx)
    cdef object row, other, key, value
    cdef dict sub
    cdef bint has_null
    cdef list parts
    for row, count in items:
        key = _key_of(<tuple> row, key_idx)
        has_null = False
        for value in <tuple> key:
            if value is None:
                has_null = True
                break
        if has_null:
            continue
        sub = <dict> other_index.get(key)
        if sub is None or not sub:
            continue
        if delta_is_left:
            for other, ocount in sub.items():
                parts = [None] * n_emit
                for i in range(n_emit):
                    parts[i] = (<tuple> other)[<Py_ssize_t> other_emit_idx[i]]
                out.append(((<tuple> row) + tuple(parts), count * ocount))
        else:
            parts = [None] * n_emit
            for i in range(n_emit):
                parts[i] = (<tuple> row)[<Py_ssize_t> other_emit_idx[i]]
            extra = tuple(parts)
            for other, ocount in sub.items():
                out.append(((<tuple> other) + extra, count * ocount))
    return out


def slice_rows(list items, tuple idx):
    cdef list out = []
    cdef Py_ssize_t count, i, n = len(idx)
    cdef object row
    cdef list parts
    for row, count in items:
        parts = [None] * n
        for i in range(n):
            parts[i] = (<tuple> row)[<Py_ssize_t> idx[i]]
        out.append((tuple(parts), count))
    return out
