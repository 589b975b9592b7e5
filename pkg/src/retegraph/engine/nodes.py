"""Rete node classes: one per plan operator, each with isolated caches.

Every node consumes change sets on a named input side, updates its caches,
and returns its output change set.  Caches are plain dicts so the kernel
backend (compiled or pure Python) does the inner-loop work.  The invariant
maintained everywhere: after each apply, a node's ``output`` bag equals the
from-scratch evaluation of its subtree.
"""

from __future__ import annotations

from ..changeset import ChangeSet
from ..errors import (
    EvaluationError,
    InconsistentRetractionError,
    InferenceError,
    PathBudgetExceededError,
)
from ..values import Bag, Path, canonical_key, descending, row_key
from . import kernels


class ReteNode:
    """Base: output cache plus parent wiring."""

    def __init__(self, schema):
        self.schema = schema
        self.output = {}
        self.parent = None
        self.parent_side = None
        self.name = type(self).__name__

    def attach(self, parent, side):
        self.parent = parent
        self.parent_side = side

    def apply(self, side, changeset) -> ChangeSet:
        out = self._process(side, changeset)
        try:
            kernels.apply_items(self.output, out.signed_items())
        except ValueError as exc:
            raise InconsistentRetractionError(f"{self.name}: {exc}") from exc
        return out

    def _process(self, side, changeset) -> ChangeSet:
        raise NotImplementedError

    def snapshot(self):
        return dict(self.output)


class SourceNode(ReteNode):
    """Proxy for one store subscription; forwards its change sets."""

    def __init__(self, schema, descriptor):
        super().__init__(schema)
        self.descriptor = descriptor

    def _process(self, side, changeset):
        return ChangeSet.from_signed(self.schema, changeset.signed_items())


class UnitSource(ReteNode):
    """The unit relation {()}: one empty tuple, delivered at initialization."""

    def __init__(self):
        super().__init__(())

    def initial_changeset(self):
        return ChangeSet(self.schema, positive={(): 1})

    def _process(self, side, changeset):
        return ChangeSet.from_signed(self.schema, changeset.signed_items())


class FilterNode(ReteNode):
    def __init__(self, schema, predicate):
        super().__init__(schema)
        self.predicate = predicate

    def _process(self, side, changeset):
        predicate = self.predicate
        items = [(row, c) for row, c in changeset.signed_items()
                 if predicate(row) is True]
        return ChangeSet.from_signed(self.schema, items)


class MapNode(ReteNode):
    """Projection: evaluates item expressions, copies carried property columns."""

    def __init__(self, schema, builders):
        super().__init__(schema)
        self.builders = builders

    def _process(self, side, changeset):
        builders = self.builders
        items = [(tuple(fn(row) for fn in builders), c)
                 for row, c in changeset.signed_items()]
        return ChangeSet.from_signed(self.schema, items)


class UnwindNode(ReteNode):
    def __init__(self, schema, expression_fn):
        super().__init__(schema)
        self.expression_fn = expression_fn

    def _process(self, side, changeset):
        items = []
        for row, c in changeset.signed_items():
            value = self.expression_fn(row)
            if value is None:
                continue
            if isinstance(value, Bag):
                for element, count in value.counts().items():
                    items.append((row + (element,), c * count))
            else:
                items.append((row + (value,), c))
        return ChangeSet.from_signed(self.schema, items)


class DistinctNode(ReteNode):
    """Support-counted duplicate elimination."""

    def __init__(self, schema):
        super().__init__(schema)
        self.support = {}

    def _process(self, side, changeset):
        try:
            transitions = kernels.apply_items_transitions(
                self.support, changeset.signed_items())
        except ValueError as exc:
            raise InconsistentRetractionError(f"{self.name}: {exc}") from exc
        items = []
        for row, before, after in transitions:
            if before == 0 and after > 0:
                items.append((row, 1))
            elif before > 0 and after == 0:
                items.append((row, -1))
        return ChangeSet.from_signed(self.schema, items)


def _shared_layout(left_schema, right_schema):
    shared = [a for a in right_schema if a in left_schema]
    left_key = tuple(left_schema.index(a) for a in shared)
    right_key = tuple(right_schema.index(a) for a in shared)
    right_extra = tuple(i for i, a in enumerate(right_schema) if a not in set(shared))
    return left_key, right_key, right_extra


class JoinNode(ReteNode):
    def __init__(self, schema, left_schema, right_schema):
        super().__init__(schema)
        self.left_key, self.right_key, self.right_extra = _shared_layout(
            left_schema, right_schema)
        self.left_index = {}
        self.right_index = {}

    def _process(self, side, changeset):
        items = changeset.signed_items()
        try:
            if side == "left":
                out = kernels.join_probe(items, self.left_key, self.right_index,
                                         self.right_extra, True)
                kernels.update_index(self.left_index, self.left_key, items)
            else:
                out = kernels.join_probe(items, self.right_key, self.left_index,
                                         self.right_extra, False)
                kernels.update_index(self.right_index, self.right_key, items)
        except ValueError as exc:
            raise InconsistentRetractionError(f"{self.name}: {exc}") from exc
        return ChangeSet.from_signed(self.schema, out)


class OuterJoinNode(ReteNode):
    """Left outer join; pads unmatched left rows with nulls on the right."""

    def __init__(self, schema, left_schema, right_schema):
        super().__init__(schema)
        self.left_key, self.right_key, self.right_extra = _shared_layout(
            left_schema, right_schema)
        self.pad = (None,) * len(self.right_extra)
        self.left_index = {}
        self.right_index = {}
        self.right_totals = {}

    def _process(self, side, changeset):
        items = changeset.signed_items()
        out = []
        try:
            if side == "left":
                for row, c in items:
                    key = tuple(row[i] for i in self.left_key)
                    if any(v is None for v in key) or not self.right_totals.get(key):
                        out.append((row + self.pad, c))
                    else:
                        for other, oc in self.right_index[key].items():
                            extra = tuple(other[i] for i in self.right_extra)
                            out.append((row + extra, c * oc))
                kernels.update_index(self.left_index, self.left_key, items)
            else:
                out = kernels.join_probe(items, self.right_key, self.left_index,
                                         self.right_extra, False)
                transitions = kernels.key_totals_update(self.right_totals,
                                                        self.right_key, items)
                for key, before, after in transitions:
                    if any(v is None for v in key) or (before > 0) == (after > 0):
                        continue
                    sign = -1 if before == 0 else 1  # gained matches: retract pads
                    for lrow, lc in self.left_index.get(key, {}).items():
                        out.append((lrow + self.pad, sign * lc))
                kernels.update_index(self.right_index, self.right_key, items)
        except ValueError as exc:
            raise InconsistentRetractionError(f"{self.name}: {exc}") from exc
        return ChangeSet.from_signed(self.schema, out)


class SemiNode(ReteNode):
    """Semijoin / antijoin: left rows filtered by right-match support."""

    def __init__(self, schema, left_schema, right_schema, negated):
        super().__init__(schema)
        self.left_key, self.right_key, _ = _shared_layout(left_schema, right_schema)
        self.negated = negated
        self.left_index = {}
        self.right_totals = {}

    def _emit(self, row, c, matched):
        if matched != self.negated:
            return [(row, c)]
        return []

    def _process(self, side, changeset):
        items = changeset.signed_items()
        out = []
        try:
            if side == "left":
                for row, c in items:
                    key = tuple(row[i] for i in self.left_key)
                    matched = not any(v is None for v in key) \
                        and self.right_totals.get(key, 0) > 0
                    out.extend(self._emit(row, c, matched))
                kernels.update_index(self.left_index, self.left_key, items)
            else:
                transitions = kernels.key_totals_update(self.right_totals,
                                                        self.right_key, items)
                for key, before, after in transitions:
                    if any(v is None for v in key) or (before > 0) == (after > 0):
                        continue
                    now = after > 0
                    sign = 1 if (now != self.negated) else -1
                    for lrow, lc in self.left_index.get(key, {}).items():
                        out.append((lrow, sign * lc))
        except ValueError as exc:
            raise InconsistentRetractionError(f"{self.name}: {exc}") from exc
        return ChangeSet.from_signed(self.schema, out)


class UnionNode(ReteNode):
    def _process(self, side, changeset):
        return ChangeSet.from_signed(self.schema, changeset.signed_items())


class _Aggregate:
    """Per-group incremental state for one aggregate item."""

    __slots__ = ("func", "count", "total", "values")

    def __init__(self, func):
        self.func = func
        self.count = 0  # non-null argument count
        self.total = 0  # running sum (sum/avg)
        self.values = {} if func in ("min", "max", "collect") else None

    def update(self, value, count):
        if value is None:
            return
        self.count += count
        if self.func in ("sum", "avg"):
            if type(value) not in (int, float):
                raise EvaluationError(f"{self.func}() over non-numeric {value!r}")
            self.total += value * count
        elif self.values is not None:
            new = self.values.get(value, 0) + count
            if new < 0:
                raise ValueError(f"aggregate multiset below zero for {value!r}")
            if new:
                self.values[value] = new
            else:
                del self.values[value]

    def result(self):
        func = self.func
        if func == "count":
            return self.count
        if func == "sum":
            return self.total
        if func == "avg":
            return self.total / self.count if self.count else None
        if func == "collect":
            return Bag.from_counts(self.values)
        if not self.values:
            return None
        # min/max re-derive the extremum from the value multiset, which is
        # what makes deletions of the current extremum exact
        chooser = min if func == "min" else max
        return chooser(self.values, key=canonical_key)


class _Group:
    __slots__ = ("total", "row", "aggregates", "extras")

    def __init__(self, agg_funcs):
        self.total = 0
        self.row = None
        self.aggregates = [_Aggregate(f) for f in agg_funcs]
        self.extras = {}


class GroupNode(ReteNode):
    """Grouping with aggregation.

    ``items`` come in output order: ("crit", fn) evaluates a grouping
    criterion, ("agg", func, fn) an aggregate argument.  ``extra_idx`` are
    child columns carried through for ancestors (functionally dependent on
    the criteria).  An empty group retracts its row entirely.
    """

    def __init__(self, schema, items, extra_idx):
        super().__init__(schema)
        self.items = items
        self.extra_idx = tuple(extra_idx)
        self.crit_fns = [spec[1] for spec in items if spec[0] == "crit"]
        self.agg_funcs = [spec[1] for spec in items if spec[0] == "agg"]
        self.groups = {}

    def _group_row(self, key, group):
        out = []
        crit_i = 0
        agg_i = 0
        for spec in self.items:
            if spec[0] == "crit":
                out.append(key[crit_i])
                crit_i += 1
            else:
                out.append(group.aggregates[agg_i].result())
                agg_i += 1
        if self.extra_idx:
            live = [extra for extra, count in group.extras.items() if count > 0]
            if len(live) != 1:
                raise InferenceError(
                    "carried property columns are not functionally dependent "
                    "on the grouping criteria")
            out.extend(live[0])
        return tuple(out)

    def _process(self, side, changeset):
        buckets = {}
        order = []
        for row, c in changeset.signed_items():
            key = tuple(fn(row) for fn in self.crit_fns)
            if key not in buckets:
                buckets[key] = []
                order.append(key)
            buckets[key].append((row, c))
        out = []
        try:
            for key in order:
                group = self.groups.get(key)
                old_row = group.row if group is not None else None
                if group is None:
                    group = self.groups[key] = _Group([s[1] for s in self.items
                                                       if s[0] == "agg"])
                for row, c in buckets[key]:
                    group.total += c
                    if group.total < 0:
                        raise ValueError(f"group {key!r} below zero")
                    agg_i = 0
                    for spec in self.items:
                        if spec[0] == "agg":
                            group.aggregates[agg_i].update(spec[2](row), c)
                            agg_i += 1
                    if self.extra_idx:
                        extra = tuple(row[i] for i in self.extra_idx)
                        new = group.extras.get(extra, 0) + c
                        if new < 0:
                            raise ValueError("carried columns below zero")
                        if new:
                            group.extras[extra] = new
                        else:
                            del group.extras[extra]
                new_row = self._group_row(key, group) if group.total else None
                if group.total == 0:
                    del self.groups[key]
                else:
                    group.row = new_row
                if old_row != new_row:
                    if old_row is not None:
                        out.append((old_row, -1))
                    if new_row is not None:
                        out.append((new_row, 1))
        except ValueError as exc:
            raise InconsistentRetractionError(f"{self.name}: {exc}") from exc
        return ChangeSet.from_signed(self.schema, out)


class SortNode(ReteNode):
    """Sort-and-top: an ordered cache of the child bag; the output is the
    [skip, skip+limit) window, maintained as a window difference."""

    def __init__(self, schema, key_fns, skip, limit):
        super().__init__(schema)
        self.key_fns = key_fns  # [(fn, ascending)]
        self.skip = skip
        self.limit = limit
        self.input = {}
        self.window = []

    def _sort_key(self, row):
        keys = []
        for fn, ascending in self.key_fns:
            key = canonical_key(fn(row))
            keys.append(key if ascending else descending(key))
        keys.append(row_key(row))
        return tuple(keys)

    def _compute_window(self):
        rows = []
        for row, count in self.input.items():
            rows.extend([row] * count)
        rows.sort(key=self._sort_key)
        end = None if self.limit is None else self.skip + self.limit
        return rows[self.skip:end]

    def _process(self, side, changeset):
        try:
            kernels.apply_items(self.input, changeset.signed_items())
        except ValueError as exc:
            raise InconsistentRetractionError(f"{self.name}: {exc}") from exc
        new_window = self._compute_window()
        items = [(row, -1) for row in self.window]
        items.extend((row, 1) for row in new_window)
        self.window = new_window
        return ChangeSet.from_signed(self.schema, items)


class TransitiveNode(ReteNode):
    """Maintains edge-distinct typed paths between bounds, extensionally.

    Input sides: "edges" (⟨src, e, trg⟩ rows plus endpoint property columns)
    and, when the lower bound is zero, "vertices" (zero-length rows for every
    vertex).  Insertion of an edge emits exactly the new paths threading it;
    deletion retracts exactly the cached paths containing it.
    """

    def __init__(self, schema, low, up, direction, reverse_path, endpoint_slots,
                 prop_count, budget):
        super().__init__(schema)
        self.low = low
        self.up = up
        self.direction = direction
        self.reverse_path = reverse_path
        # which subscription slots carry endpoint properties: positions in the
        # edge row after (v, e, w), grouped per endpoint ("src"/"trg")
        self.endpoint_slots = endpoint_slots
        self.prop_count = prop_count
        self.budget = budget
        self.edges = {}  # eref -> (src, trg)
        self.fwd = {}  # vref -> set[(eref, dest)]
        self.bwd = {}  # vref -> set[(eref, origin)]
        self.vertex_props = {}  # vref -> [props tuple, refcount]
        self.zero_rows = {}  # vref -> emitted row
        self.paths = {}  # (v, edge tuple, w) -> emitted row
        self.by_edge = {}  # eref -> set[path key]

    # --- adjacency ------------------------------------------------------------

    def _arcs_of(self, eref, src, trg):
        if self.direction == "out":
            return [(src, trg)]
        if self.direction == "in":
            return [(trg, src)]
        arcs = [(src, trg)]
        if src != trg:
            arcs.append((trg, src))
        return arcs

    def _ref_props(self, vref, props, add):
        if self.prop_count == 0:
            return
        if add:
            entry = self.vertex_props.get(vref)
            if entry is None:
                self.vertex_props[vref] = [props, 1]
            else:
                entry[0] = props
                entry[1] += 1
        else:
            entry = self.vertex_props[vref]
            entry[1] -= 1
            if entry[1] == 0:
                del self.vertex_props[vref]

    def _edge_props(self, row, add):
        for endpoint, positions in self.endpoint_slots.items():
            vref = row[0] if endpoint == "src" else row[2]
            props = tuple(row[3 + i] for i in positions)
            self._ref_props(vref, props, add)

    def _w_props(self, vref):
        if self.prop_count == 0:
            return ()
        entry = self.vertex_props.get(vref)
        if entry is None:
            return (None,) * self.prop_count
        return entry[0]

    # --- path enumeration --------------------------------------------------------

    def _walks(self, adjacency, start, used, limit):
        """Edge-distinct walks from `start`; yields (edge tuple, end vertex).

        Edge tuples come in step order from `start`; callers walking the
        backward adjacency reverse them into traversal order themselves.
        """
        yield ((), start)
        if limit is not None and limit <= 0:
            return
        next_limit = None if limit is None else limit - 1
        for eref, dest in sorted(adjacency.get(start, ())):
            if eref in used:
                continue
            used.add(eref)
            for edges, end in self._walks(adjacency, dest, used, next_limit):
                yield ((eref,) + edges, end)
            used.discard(eref)

    def _paths_through(self, eref, a_src, a_trg):
        """All in-bound edge-distinct paths using the arc a_src→a_trg via eref."""
        if self.up is not None and self.up < 1:
            return []
        results = []
        room = None if self.up is None else self.up - 1
        low = max(self.low, 1)
        prefix_limit = room
        used = {eref}
        for pre_edges, v0 in self._walks(self.bwd, a_src, used, prefix_limit):
            pre = tuple(reversed(pre_edges))
            suffix_limit = None if room is None else room - len(pre)
            used_fwd = set(pre) | {eref}
            for suf, w0 in self._walks(self.fwd, a_trg, used_fwd, suffix_limit):
                length = len(pre) + 1 + len(suf)
                if length < low:
                    continue
                results.append((v0, pre + (eref,) + suf, w0))
        return results

    def _emit_path(self, key):
        v0, edges, w0 = key
        shown = tuple(reversed(edges)) if self.reverse_path else edges
        return (v0, Path(shown), w0) + self._w_props(w0)

    def _add_path(self, key, out):
        row = self._emit_path(key)
        self.paths[key] = row
        for eref in key[1]:
            self.by_edge.setdefault(eref, set()).add(key)
        out.append((row, 1))

    def _remove_paths_with(self, eref, out):
        for key in sorted(self.by_edge.pop(eref, ()), key=lambda k: (k[1], k[0], k[2])):
            row = self.paths.pop(key)
            for other in key[1]:
                if other != eref:
                    bucket = self.by_edge.get(other)
                    if bucket is not None:
                        bucket.discard(key)
                        if not bucket:
                            del self.by_edge[other]
            out.append((row, -1))

    # --- change application ----------------------------------------------------------

    def _process(self, side, changeset):
        out = []
        by_row = lambda item: row_key(item[0])  # noqa: E731 - deterministic order
        if side == "vertices":
            for row, count in sorted(changeset.negative.items(), key=by_row):
                vref = row[0]
                emitted = self.zero_rows.pop(vref, None)
                if emitted is None:
                    raise InconsistentRetractionError(
                        f"{self.name}: unknown zero-length row for {vref!r}")
                out.append((emitted, -count))
            for row, count in sorted(changeset.positive.items(), key=by_row):
                vref = row[0]
                emitted = (vref, Path(()), vref) + tuple(row[1:])
                self.zero_rows[vref] = emitted
                out.append((emitted, count))
            return ChangeSet.from_signed(self.schema, out)

        for row, _count in sorted(changeset.negative.items(), key=by_row):
            src, eref, trg = row[0], row[1], row[2]
            if eref not in self.edges:
                raise InconsistentRetractionError(
                    f"{self.name}: removing unknown edge {eref!r}")
            self._remove_paths_with(eref, out)
            for a, b in self._arcs_of(eref, src, trg):
                self.fwd[a].discard((eref, b))
                if not self.fwd[a]:
                    del self.fwd[a]
                self.bwd[b].discard((eref, a))
                if not self.bwd[b]:
                    del self.bwd[b]
            del self.edges[eref]
            self._edge_props(row, add=False)
        for row, _count in sorted(changeset.positive.items(), key=by_row):
            src, eref, trg = row[0], row[1], row[2]
            self.edges[eref] = (src, trg)
            self._edge_props(row, add=True)
            for a, b in self._arcs_of(eref, src, trg):
                self.fwd.setdefault(a, set()).add((eref, b))
                self.bwd.setdefault(b, set()).add((eref, a))
            seen = set()
            for a, b in self._arcs_of(eref, src, trg):
                for key in self._paths_through(eref, a, b):
                    if key in seen or key in self.paths:
                        continue
                    seen.add(key)
                    self._add_path(key, out)
            if len(self.paths) > self.budget:
                raise PathBudgetExceededError(
                    f"transitive path cache exceeded {self.budget} paths")
        return ChangeSet.from_signed(self.schema, out)
