"""Propagation network construction and the reference scheduler.

The network mirrors the flat plan's topology: one node per operator, leaf
operators realized as store subscriptions (a transitive scan owns an edge
subscription plus, for a zero lower bound, a vertex subscription).  The
scheduler is single-threaded and deterministic: messages are processed from
a FIFO queue, each node consuming a change set and forwarding its output to
its parent, until quiescence; results are only read at quiescence.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import algebra as alg
from ..changeset import ChangeSet
from ..cypher import ast
from ..errors import InferenceError
from ..graph import NullaryDescriptor
from . import nodes as rn
from .exprs import compile_expr

DEFAULT_PATH_BUDGET = 1_000_000


@dataclass(frozen=True)
class EngineOptions:
    path_budget: int = DEFAULT_PATH_BUDGET


def _prop_extras(plan):
    """The flat property columns a leaf carries beyond its element columns."""
    base = len(plan.nested_schema)
    return [(attr.var, attr.key) for attr in plan.flat_schema[base:]]


def _child_column(child_flat, attr):
    for i, candidate in enumerate(child_flat):
        if candidate == attr:
            return i
    raise InferenceError(f"column {alg.attr_name(attr)} missing from child schema")


class Network:
    def __init__(self, plan, options=EngineOptions()):
        self.options = options
        self.sources = []  # (node, side, descriptor | None)
        self.nodes = []
        self.sink = self._build(plan)
        self.handles = []  # (subscription, node, side)
        self._by_sub = {}

    # --- construction ----------------------------------------------------------

    def _register(self, node):
        self.nodes.append(node)
        return node

    def _build(self, plan):
        flat = plan.flat_schema
        if isinstance(plan, alg.GetVertices):
            desc = NullaryDescriptor(
                kind="vertices", labels=plan.labels,
                prop_columns=tuple(("v", key) for _var, key in _prop_extras(plan)))
            node = self._register(rn.SourceNode(flat, desc))
            self.sources.append((node, "in", desc))
            return node
        if isinstance(plan, alg.GetEdges):
            slots = {plan.v: "v", plan.e: "e", plan.w: "w"}
            desc = NullaryDescriptor(
                kind="edges", types=plan.types, v_labels=plan.v_labels,
                w_labels=plan.w_labels, direction=plan.direction,
                prop_columns=tuple((slots[var], key)
                                   for var, key in _prop_extras(plan)))
            node = self._register(rn.SourceNode(flat, desc))
            self.sources.append((node, "in", desc))
            return node
        if isinstance(plan, alg.TransitiveGetEdges):
            return self._build_transitive(plan)
        if isinstance(plan, alg.SingletonUnit):
            node = self._register(rn.UnitSource())
            self.sources.append((node, "in", None))
            return node

        if isinstance(plan, alg.Selection):
            child = self._build(plan.child)
            node = self._register(rn.FilterNode(
                flat, compile_expr(plan.condition, plan.child.flat_schema)))
            child.attach(node, "in")
            return node
        if isinstance(plan, alg.Projection):
            child = self._build(plan.child)
            child_flat = plan.child.flat_schema
            builders = [compile_expr(expr, child_flat) for expr, _attr in plan.items]
            for attr in flat[len(plan.items):]:
                idx = _child_column(child_flat, attr)
                builders.append(lambda row, i=idx: row[i])
            node = self._register(rn.MapNode(flat, builders))
            child.attach(node, "in")
            return node
        if isinstance(plan, alg.Grouping):
            child = self._build(plan.child)
            child_flat = plan.child.flat_schema
            items = []
            for expr, _attr in plan.items:
                if isinstance(expr, ast.AggregateCall):
                    items.append(("agg", expr.func,
                                  compile_expr(expr.argument, child_flat)))
                else:
                    items.append(("crit", compile_expr(expr, child_flat)))
            extra_idx = [_child_column(child_flat, attr)
                         for attr in flat[len(plan.items):]]
            node = self._register(rn.GroupNode(flat, items, extra_idx))
            child.attach(node, "in")
            return node
        if isinstance(plan, alg.DedupAll):
            child = self._build(plan.child)
            node = self._register(rn.DistinctNode(flat))
            child.attach(node, "in")
            return node
        if isinstance(plan, alg.Unwind):
            child = self._build(plan.child)
            node = self._register(rn.UnwindNode(
                flat, compile_expr(plan.expression, plan.child.flat_schema)))
            child.attach(node, "in")
            return node
        if isinstance(plan, alg.SortAndTop):
            child = self._build(plan.child)
            child_flat = plan.child.flat_schema
            key_fns = [(compile_expr(expr, child_flat), ascending)
                       for expr, ascending in plan.keys]
            node = self._register(rn.SortNode(flat, key_fns, plan.skip, plan.limit))
            child.attach(node, "in")
            return node

        if isinstance(plan, (alg.NaturalJoin, alg.LeftOuterJoin,
                             alg.Semijoin, alg.Antijoin, alg.Union)):
            left = self._build(plan.left)
            right = self._build(plan.right)
            lf, rf = plan.left.flat_schema, plan.right.flat_schema
            if isinstance(plan, alg.NaturalJoin):
                node = rn.JoinNode(flat, lf, rf)
            elif isinstance(plan, alg.LeftOuterJoin):
                node = rn.OuterJoinNode(flat, lf, rf)
            elif isinstance(plan, alg.Union):
                node = rn.UnionNode(flat)
            else:
                node = rn.SemiNode(flat, lf, rf, isinstance(plan, alg.Antijoin))
            self._register(node)
            left.attach(node, "left")
            right.attach(node, "right")
            return node
        raise InferenceError(f"no runtime node for {plan.kind}")

    def _build_transitive(self, plan):
        extras = _prop_extras(plan)
        for var, _key in extras:
            if var != plan.w:
                raise InferenceError(
                    f"transitive scan can only carry properties of {plan.w!r}")
        keys = [key for _var, key in extras]
        n = len(keys)
        if plan.direction == "out":
            prop_columns = tuple(("w", key) for key in keys)
            endpoint_slots = {"trg": list(range(n))} if n else {}
        elif plan.direction == "in":
            prop_columns = tuple(("v", key) for key in keys)
            endpoint_slots = {"src": list(range(n))} if n else {}
        else:
            prop_columns = tuple(("v", key) for key in keys) \
                + tuple(("w", key) for key in keys)
            endpoint_slots = {"src": list(range(n)),
                              "trg": list(range(n, 2 * n))} if n else {}
        node = self._register(rn.TransitiveNode(
            plan.flat_schema, plan.low, plan.up, plan.direction,
            plan.reverse_path, endpoint_slots, n, self.options.path_budget))
        edge_desc = NullaryDescriptor(kind="edges", types=plan.types,
                                      direction="out", prop_columns=prop_columns)
        self.sources.append((node, "edges", edge_desc))
        if plan.low == 0:
            vertex_desc = NullaryDescriptor(
                kind="vertices", prop_columns=tuple(("v", key) for key in keys))
            self.sources.append((node, "vertices", vertex_desc))
        return node

    # --- lifecycle ----------------------------------------------------------------

    def initialize(self, store):
        """Subscribe all leaves and run their initial scans to quiescence."""
        messages = []
        for node, side, desc in self.sources:
            if desc is None:
                messages.append((node, side, node.initial_changeset()))
            else:
                handle = store.subscribe(desc)
                self.handles.append((handle, node, side))
                self._by_sub[handle.sub_id] = (node, side)
                messages.append((node, side, store.initial_changeset(handle)))
        self.propagate(messages)
        return self.snapshot()

    def detach(self, store):
        for handle, _node, _side in self.handles:
            store.unsubscribe(handle)
        self.handles = []
        self._by_sub = {}

    def route(self, notifications):
        """Map store notifications to (node, side, changeset) messages."""
        messages = []
        for sub, changeset in notifications:
            target = self._by_sub.get(sub.sub_id)
            if target is not None:
                messages.append((target[0], target[1], changeset))
        return messages

    def propagate(self, messages) -> ChangeSet:
        """Deliver messages FIFO to quiescence; returns the sink's net delta."""
        from collections import deque

        queue = deque(messages)
        sink_items = []
        while queue:
            node, side, changeset = queue.popleft()
            if changeset.is_empty():
                continue
            out = node.apply(side, changeset)
            if out.is_empty():
                continue
            if node is self.sink:
                sink_items.extend(out.signed_items())
            else:
                queue.append((node.parent, node.parent_side, out))
        return ChangeSet.from_signed(self.sink.schema, sink_items)

    # --- reading --------------------------------------------------------------------

    @property
    def ordered(self):
        return isinstance(self.sink, rn.SortNode)

    def snapshot(self):
        """Current sink contents: an ordered row list under a sort-and-top
        root, otherwise a bag of rows."""
        if self.ordered:
            return list(self.sink.window)
        return dict(self.sink.output)
