"""Session: a graph plus registered continuous queries.

Registering a query runs the whole pipeline (parse, validate, compile,
lower, build network, initialize) and keeps every compilation stage around
for explain.  Applying a delta mutates the graph, routes the resulting
change sets into each query's network, and reports each query's result
delta over its declared output columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import algebra as alg
from .changeset import ChangeSet
from .cypher import parse_query, validate
from .compiler import compile_query
from .engine.network import EngineOptions, Network
from .errors import UnknownQueryError
from .graph import PropertyGraph, load_graph
from .lowering import LoweringOptions, lower, lower_to_nra
from .values import Bag, EdgeRef, Path, VertexRef, row_key


@dataclass(frozen=True)
class SessionOptions:
    lowering: LoweringOptions = field(default_factory=LoweringOptions)
    engine: EngineOptions = field(default_factory=EngineOptions)


class RegisteredQuery:
    def __init__(self, name, text, validated, gra, fra, output_attrs):
        self.name = name
        self.text = text
        self.validated = validated
        self.gra = gra
        self.fra = fra
        self.output_attrs = output_attrs
        self.output_idx = tuple(fra.flat_schema.index(a) for a in output_attrs)
        self.network = None

    def attach(self, store, options):
        self.network = Network(self.fra, options.engine)
        self.network.initialize(store)

    def slice_changeset(self, changeset) -> ChangeSet:
        idx = self.output_idx
        items = [(tuple(row[i] for i in idx), c)
                 for row, c in changeset.signed_items()]
        return ChangeSet.from_signed(self.output_attrs, items)

    def results(self):
        """(ordered flag, list of output rows). Ordered when the plan root is
        a sort-and-top; otherwise rows come back in no particular order."""
        snapshot = self.network.snapshot()
        idx = self.output_idx
        if isinstance(snapshot, list):
            return True, [tuple(row[i] for i in idx) for row in snapshot]
        rows = []
        for row, count in snapshot.items():
            rows.extend([tuple(row[i] for i in idx)] * count)
        return False, rows


def _declared_outputs(plan):
    """The projection/grouping output attrs, skipping sort/dedup wrappers."""
    node = plan
    while isinstance(node, (alg.SortAndTop, alg.DedupAll)):
        node = node.child
    return tuple(attr for _expr, attr in node.items)


class Session:
    def __init__(self, options=SessionOptions()):
        self.options = options
        self.store = PropertyGraph()
        self.queries = {}

    # --- commands ------------------------------------------------------------

    def load(self, doc):
        """Replace the graph; re-initialize every registered query."""
        for query in self.queries.values():
            if query.network is not None:
                query.network.detach(self.store)
        self.store = load_graph(doc)
        for query in self.queries.values():
            query.attach(self.store, self.options)
        return len(self.store.vertices), len(self.store.edges)

    def register(self, name, text) -> RegisteredQuery:
        validated = validate(parse_query(text))
        gra = compile_query(validated)
        fra = lower(gra, self.options.lowering)
        query = RegisteredQuery(name, text, validated, gra, fra,
                                _declared_outputs(fra))
        old = self.queries.pop(name, None)
        if old is not None and old.network is not None:
            old.network.detach(self.store)
        query.attach(self.store, self.options)
        self.queries[name] = query
        return query

    def get(self, name) -> RegisteredQuery:
        query = self.queries.get(name)
        if query is None:
            raise UnknownQueryError(f"unknown query {name!r}")
        return query

    def apply_delta(self, delta):
        """Apply one graph delta; returns {query name: sliced sink delta}."""
        notifications = self.store.apply_delta(delta)
        report = {}
        for name, query in self.queries.items():
            messages = query.network.route(notifications)
            sink = query.network.propagate(messages)
            report[name] = query.slice_changeset(sink)
        return report

    def apply_batch(self, deltas):
        """Apply deltas storewise first, then one propagation per query."""
        per_query = {name: [] for name in self.queries}
        for delta in deltas:
            notifications = self.store.apply_delta(delta)
            for name, query in self.queries.items():
                per_query[name].extend(query.network.route(notifications))
        report = {}
        for name, query in self.queries.items():
            sink = query.network.propagate(per_query[name])
            report[name] = query.slice_changeset(sink)
        return report

    def results(self, name):
        query = self.get(name)
        header = [alg.attr_name(a) for a in query.output_attrs]
        ordered, rows = query.results()
        if not ordered:
            rows.sort(key=row_key)
        return header, rows

    def explain(self, name, stage) -> str:
        query = self.get(name)
        if stage == "gra":
            return alg.serialize_plan(query.gra)
        if stage == "nra":
            return alg.serialize_plan(lower_to_nra(query.gra, self.options.lowering))
        if stage == "fra":
            return alg.serialize_plan(query.fra, annotated=True)
        raise UnknownQueryError(f"unknown stage {stage!r} (use gra|nra|fra)")

    # --- printing ----------------------------------------------------------------

    def format_value(self, value) -> str:
        if value is None:
            return "null"
        if value is True:
            return "true"
        if value is False:
            return "false"
        if isinstance(value, (VertexRef, EdgeRef)):
            return self.store.external_id(value)
        if isinstance(value, Bag):
            return "{" + ", ".join(self.format_value(v) for v in value) + "}"
        if isinstance(value, Path):
            return "[" + ", ".join(self.store.external_id(e) for e in value.edges) + "]"
        return str(value)

    def format_row(self, row) -> str:
        return "\t".join(self.format_value(v) for v in row)
