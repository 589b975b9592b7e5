"""In-memory property graph store.

Holds vertex/edge records with labels, types and properties, keeps
label/type/adjacency indexes exactly consistent with the records, answers
the nullary scans (get-vertices / get-edges), and turns mutations into
per-subscription change sets that drive incremental maintenance.

External element ids are strings and live in one shared namespace (a vertex
and an edge may not reuse an id).  Internally elements get dense integer
refs; the external↔internal mapping is persistent, so removing and re-adding
an id yields the same ref.
"""

from __future__ import annotations

from dataclasses import dataclass

from .changeset import ChangeSet
from .errors import (
    DanglingEdgeError,
    DuplicateIdError,
    GraphParseError,
    TypeMismatchError,
    UnknownIdError,
    VertexHasEdgesError,
)
from .values import Bag, EdgeRef, VertexRef, check_property_value

# Pseudo property key: subscriptions use it to request an element's label set
# (delivered as a Bag of label strings), letting label predicates evaluate on
# local data only.
LABELS_KEY = "%labels"


@dataclass
class VertexRecord:
    ref: VertexRef
    external_id: str
    labels: frozenset
    properties: dict


@dataclass
class EdgeRecord:
    ref: EdgeRef
    external_id: str
    src: VertexRef
    trg: VertexRef
    type: str
    properties: dict


@dataclass(frozen=True)
class GraphDelta:
    """One atomic graph update; applies fully or fails with no change."""

    op: str
    id: str = ""
    labels: tuple = ()
    properties: tuple = ()  # sorted (key, value) pairs
    src: str = ""
    trg: str = ""
    type: str = ""
    key: str = ""
    value: object = None
    detach: bool = False

    @classmethod
    def add_vertex(cls, id, labels=(), properties=None):
        return cls(op="add-vertex", id=str(id), labels=tuple(labels),
                   properties=tuple(sorted((properties or {}).items())))

    @classmethod
    def remove_vertex(cls, id, detach=False):
        return cls(op="remove-vertex", id=str(id), detach=detach)

    @classmethod
    def add_edge(cls, id, src, trg, type, properties=None):
        return cls(op="add-edge", id=str(id), src=str(src), trg=str(trg), type=type,
                   properties=tuple(sorted((properties or {}).items())))

    @classmethod
    def remove_edge(cls, id):
        return cls(op="remove-edge", id=str(id))

    @classmethod
    def set_property(cls, id, key, value):
        return cls(op="set-property", id=str(id), key=key, value=value)

    @classmethod
    def remove_property(cls, id, key):
        return cls(op="remove-property", id=str(id), key=key)


@dataclass(frozen=True)
class NullaryDescriptor:
    """What a subscription watches, plus the flat property columns it carries.

    ``prop_columns`` is an ordered tuple of (slot, key) pairs, slot ∈
    {"v", "e", "w"} ("v" is the only slot for vertex scans).  A key of
    LABELS_KEY delivers the slot element's label set as a Bag.
    """

    kind: str  # "vertices" | "edges"
    labels: frozenset = frozenset()
    types: frozenset = frozenset()
    v_labels: frozenset = frozenset()
    w_labels: frozenset = frozenset()
    direction: str = "out"  # "out" | "in" | "both"
    prop_columns: tuple = ()


class Subscription:
    """Handle identifying one registered nullary scan."""

    __slots__ = ("sub_id", "descriptor")

    def __init__(self, sub_id, descriptor):
        self.sub_id = sub_id
        self.descriptor = descriptor

    def __repr__(self):
        return f"Subscription({self.sub_id}, {self.descriptor.kind})"


class PropertyGraph:
    def __init__(self):
        self.vertices = {}  # VertexRef -> VertexRecord
        self.edges = {}  # EdgeRef -> EdgeRecord
        self._vertex_refs = {}  # external id -> VertexRef (persistent)
        self._edge_refs = {}  # external id -> EdgeRef (persistent)
        self._vertex_names = {}  # VertexRef -> external id (persistent)
        self._edge_names = {}  # EdgeRef -> external id (persistent)
        self._by_label = {}  # label -> set[VertexRef]
        self._by_type = {}  # type -> set[EdgeRef]
        self._out = {}  # VertexRef -> set[EdgeRef]
        self._in = {}  # VertexRef -> set[EdgeRef]
        self._subs = {}  # sub_id -> Subscription
        self._next_sub = 0

    # --- id resolution -------------------------------------------------------

    def vertex_by_id(self, external_id):
        ref = self._vertex_refs.get(str(external_id))
        if ref is not None and ref in self.vertices:
            return self.vertices[ref]
        return None

    def edge_by_id(self, external_id):
        ref = self._edge_refs.get(str(external_id))
        if ref is not None and ref in self.edges:
            return self.edges[ref]
        return None

    def external_id(self, ref):
        # persistent mapping: still answers for already-removed elements,
        # whose refs legitimately appear in retraction rows
        if isinstance(ref, VertexRef):
            return self._vertex_names[ref]
        return self._edge_names[ref]

    def _id_in_use(self, external_id):
        return self.vertex_by_id(external_id) is not None or self.edge_by_id(external_id) is not None

    # --- low-level mutation (indexes kept exactly in sync) --------------------

    def _insert_vertex(self, external_id, labels, properties):
        ref = self._vertex_refs.get(external_id)
        if ref is None:
            ref = VertexRef(len(self._vertex_refs))
            self._vertex_refs[external_id] = ref
            self._vertex_names[ref] = external_id
        record = VertexRecord(ref, external_id, frozenset(labels), dict(properties))
        self.vertices[ref] = record
        for label in record.labels:
            self._by_label.setdefault(label, set()).add(ref)
        self._out.setdefault(ref, set())
        self._in.setdefault(ref, set())
        return record

    def _delete_vertex(self, record):
        del self.vertices[record.ref]
        for label in record.labels:
            bucket = self._by_label[label]
            bucket.discard(record.ref)
            if not bucket:
                del self._by_label[label]
        del self._out[record.ref]
        del self._in[record.ref]

    def _insert_edge(self, external_id, src_ref, trg_ref, type_, properties):
        ref = self._edge_refs.get(external_id)
        if ref is None:
            ref = EdgeRef(len(self._edge_refs))
            self._edge_refs[external_id] = ref
            self._edge_names[ref] = external_id
        record = EdgeRecord(ref, external_id, src_ref, trg_ref, type_, dict(properties))
        self.edges[ref] = record
        self._by_type.setdefault(type_, set()).add(ref)
        self._out[src_ref].add(ref)
        self._in[trg_ref].add(ref)
        return record

    def _delete_edge(self, record):
        del self.edges[record.ref]
        bucket = self._by_type[record.type]
        bucket.discard(record.ref)
        if not bucket:
            del self._by_type[record.type]
        self._out[record.src].discard(record.ref)
        self._in[record.trg].discard(record.ref)

    def incident_edges(self, vertex_ref):
        return self._out[vertex_ref] | self._in[vertex_ref]

    # --- scans ----------------------------------------------------------------

    def _vertices_with_labels(self, labels):
        if not labels:
            return list(self.vertices.values())
        buckets = [self._by_label.get(label, set()) for label in labels]
        if not all(buckets):
            return []
        refs = set.intersection(*buckets)
        return [self.vertices[r] for r in refs]

    def scan_vertices(self, labels=frozenset()):
        """One ⟨v⟩ tuple per vertex whose label set is a superset of `labels`."""
        return [(record.ref,) for record in self._vertices_with_labels(labels)]

    def _edge_candidates(self, types):
        if not types:
            return list(self.edges.values())
        refs = set()
        for type_ in types:
            refs |= self._by_type.get(type_, set())
        return [self.edges[r] for r in refs]

    def _edge_orientations(self, record, v_labels, w_labels, direction):
        """⟨v, e, w⟩ orientations of one edge matching the label constraints."""
        out = []
        src, trg = record.src, record.trg
        if direction in ("out", "both"):
            if v_labels <= self.vertices[src].labels and w_labels <= self.vertices[trg].labels:
                out.append((src, record.ref, trg))
        if direction in ("in", "both"):
            if v_labels <= self.vertices[trg].labels and w_labels <= self.vertices[src].labels:
                out.append((trg, record.ref, src))
        return out

    def scan_edges(self, types=frozenset(), v_labels=frozenset(), w_labels=frozenset(),
                   direction="out"):
        """⟨v, e, w⟩ tuples for edges matching type and endpoint-label constraints.

        direction "out" enumerates each edge as ⟨src, e, trg⟩; "both" adds the
        swapped orientation (an undirected self-loop therefore appears twice).
        """
        rows = []
        for record in self._edge_candidates(types):
            rows.extend(self._edge_orientations(record, v_labels, w_labels, direction))
        return rows

    # --- subscriptions ---------------------------------------------------------

    def subscribe(self, descriptor) -> Subscription:
        sub = Subscription(self._next_sub, descriptor)
        self._next_sub += 1
        self._subs[sub.sub_id] = sub
        return sub

    def unsubscribe(self, sub):
        self._subs.pop(sub.sub_id, None)

    def _prop_value(self, record, key):
        if key == LABELS_KEY:
            if isinstance(record, EdgeRecord):
                return Bag([record.type])
            return Bag(sorted(record.labels))
        return record.properties.get(key)

    def _vertex_row(self, desc, record):
        props = tuple(self._prop_value(record, key) for _slot, key in desc.prop_columns)
        return (record.ref,) + props

    def _edge_row(self, desc, record, v_ref, w_ref):
        slot_records = {"v": self.vertices[v_ref], "e": record, "w": self.vertices[w_ref]}
        props = tuple(self._prop_value(slot_records[slot], key) for slot, key in desc.prop_columns)
        return (v_ref, record.ref, w_ref) + props

    def _rows_for_vertex_sub(self, desc, record):
        if desc.labels <= record.labels:
            return [self._vertex_row(desc, record)]
        return []

    def _rows_for_edge_sub(self, desc, record):
        if desc.types and record.type not in desc.types:
            return []
        return [self._edge_row(desc, record, v, w)
                for v, _e, w in self._edge_orientations(record, desc.v_labels, desc.w_labels,
                                                        desc.direction)]

    def _rows_for_sub(self, sub):
        desc = sub.descriptor
        if desc.kind == "vertices":
            rows = []
            for record in self._vertices_with_labels(desc.labels):
                rows.extend(self._rows_for_vertex_sub(desc, record))
            return rows
        rows = []
        for record in self._edge_candidates(desc.types):
            rows.extend(self._rows_for_edge_sub(desc, record))
        return rows

    def _rows_touching(self, sub, record):
        """Current rows of `sub` that involve the given element."""
        desc = sub.descriptor
        if isinstance(record, VertexRecord):
            if desc.kind == "vertices":
                return self._rows_for_vertex_sub(desc, record)
            rows = []
            for eref in sorted(self.incident_edges(record.ref)):
                rows.extend(self._rows_for_edge_sub(desc, self.edges[eref]))
            return rows
        if desc.kind == "vertices":
            return []
        return self._rows_for_edge_sub(desc, record)

    def initial_changeset(self, sub) -> ChangeSet:
        """The subscription's current scan result as a positive change set."""
        return ChangeSet.from_signed(None, [(row, 1) for row in self._rows_for_sub(sub)])

    # --- deltas -----------------------------------------------------------------

    def inverse_deltas(self, delta):
        """The delta sequence undoing `delta`, computed against the current state."""
        op = delta.op
        if op == "add-vertex":
            return [GraphDelta.remove_vertex(delta.id)]
        if op == "add-edge":
            return [GraphDelta.remove_edge(delta.id)]
        if op == "remove-vertex":
            record = self._require_vertex(delta.id)
            inverse = [GraphDelta.add_vertex(delta.id, sorted(record.labels),
                                             dict(record.properties))]
            for eref in sorted(self.incident_edges(record.ref)):
                edge = self.edges[eref]
                inverse.append(GraphDelta.add_edge(
                    edge.external_id, self.vertices[edge.src].external_id,
                    self.vertices[edge.trg].external_id, edge.type, dict(edge.properties)))
            return inverse
        if op == "remove-edge":
            edge = self._require_edge(delta.id)
            return [GraphDelta.add_edge(edge.external_id, self.vertices[edge.src].external_id,
                                        self.vertices[edge.trg].external_id, edge.type,
                                        dict(edge.properties))]
        if op in ("set-property", "remove-property"):
            record = self._require_element(delta.id)
            if delta.key in record.properties:
                return [GraphDelta.set_property(delta.id, delta.key,
                                                record.properties[delta.key])]
            if op == "set-property":
                return [GraphDelta.remove_property(delta.id, delta.key)]
            return []
        raise GraphParseError(f"unknown delta op {op!r}")

    def _require_vertex(self, external_id):
        record = self.vertex_by_id(external_id)
        if record is None:
            raise UnknownIdError(f"unknown vertex id {external_id!r}")
        return record

    def _require_edge(self, external_id):
        record = self.edge_by_id(external_id)
        if record is None:
            raise UnknownIdError(f"unknown edge id {external_id!r}")
        return record

    def _require_element(self, external_id):
        record = self.vertex_by_id(external_id)
        if record is None:
            record = self.edge_by_id(external_id)
        if record is None:
            raise UnknownIdError(f"unknown element id {external_id!r}")
        return record

    def apply_delta(self, delta):
        """Apply one delta atomically; return [(subscription, change set)] for
        every subscription whose result changed."""
        acc = {}  # sub_id -> list of signed rows

        def emit(sub, rows, sign):
            if rows:
                acc.setdefault(sub.sub_id, []).extend((row, sign) for row in rows)

        op = delta.op
        if op == "add-vertex":
            if self._id_in_use(delta.id):
                raise DuplicateIdError(f"id {delta.id!r} already in use")
            properties = _checked_properties(dict(delta.properties))
            record = self._insert_vertex(delta.id, delta.labels, properties)
            for sub in self._subs.values():
                emit(sub, self._rows_touching(sub, record), 1)
        elif op == "remove-vertex":
            record = self._require_vertex(delta.id)
            incident = sorted(self.incident_edges(record.ref))
            if incident and not delta.detach:
                raise VertexHasEdgesError(
                    f"vertex {delta.id!r} has {len(incident)} incident edge(s)")
            for eref in incident:
                edge = self.edges[eref]
                for sub in self._subs.values():
                    emit(sub, self._rows_for_edge_sub(sub.descriptor, edge)
                         if sub.descriptor.kind == "edges" else [], -1)
                self._delete_edge(edge)
            for sub in self._subs.values():
                emit(sub, self._rows_touching(sub, record), -1)
            self._delete_vertex(record)
        elif op == "add-edge":
            if self._id_in_use(delta.id):
                raise DuplicateIdError(f"id {delta.id!r} already in use")
            src = self._require_vertex(delta.src)
            trg = self._require_vertex(delta.trg)
            if not delta.type:
                raise GraphParseError("add-edge requires a type")
            properties = _checked_properties(dict(delta.properties))
            record = self._insert_edge(delta.id, src.ref, trg.ref, delta.type, properties)
            for sub in self._subs.values():
                emit(sub, self._rows_touching(sub, record), 1)
        elif op == "remove-edge":
            record = self._require_edge(delta.id)
            for sub in self._subs.values():
                emit(sub, self._rows_touching(sub, record), -1)
            self._delete_edge(record)
        elif op in ("set-property", "remove-property"):
            record = self._require_element(delta.id)
            if op == "set-property":
                check_property_value(delta.value)
            before = {sub.sub_id: self._rows_touching(sub, record)
                      for sub in self._subs.values()}
            if op == "set-property":
                record.properties[delta.key] = delta.value
            else:
                record.properties.pop(delta.key, None)
            for sub in self._subs.values():
                emit(sub, before[sub.sub_id], -1)
                emit(sub, self._rows_touching(sub, record), 1)
        else:
            raise GraphParseError(f"unknown delta op {delta.op!r}")

        out = []
        for sub_id, items in acc.items():
            cs = ChangeSet.from_signed(None, items)
            if cs:
                out.append((self._subs[sub_id], cs))
        return out


def _checked_properties(properties):
    for key, value in properties.items():
        if not isinstance(key, str):
            raise TypeMismatchError(f"property key must be a string: {key!r}")
        check_property_value(value, f"property {key!r}")
    return properties


# --- document / delta-script parsing ------------------------------------------

def json_to_value(raw):
    """Decode a JSON property value: scalar, or {"bag": [scalars]}."""
    if isinstance(raw, dict):
        if set(raw.keys()) == {"bag"} and isinstance(raw["bag"], list):
            return Bag(raw["bag"])
        raise TypeMismatchError(f"unsupported property value object: {raw!r}")
    if isinstance(raw, list):
        raise TypeMismatchError('lists are not property values; use {"bag": [...]}')
    return raw


def value_to_json(value):
    if isinstance(value, Bag):
        return {"bag": list(value)}
    return value


def _parse_properties(raw, where):
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise GraphParseError(f"{where}: properties must be an object")
    out = {}
    for key, raw_value in raw.items():
        try:
            value = json_to_value(raw_value)
            if value is None:
                raise TypeMismatchError("explicit null (omit the key instead)")
            check_property_value(value)
        except TypeMismatchError as exc:
            raise GraphParseError(f"{where}: property {key!r}: {exc}") from exc
        out[key] = value
    return out


def _parse_id(obj, field_name, where):
    raw = obj.get(field_name)
    if raw is None or isinstance(raw, (dict, list, bool, float)):
        raise GraphParseError(f"{where}: {field_name!r} must be a string id")
    return str(raw)


def load_graph(doc) -> PropertyGraph:
    """Materialize a graph document (see README for the format)."""
    if not isinstance(doc, dict) or not isinstance(doc.get("vertices"), list) \
            or not isinstance(doc.get("edges"), list):
        raise GraphParseError('document must be {"vertices": [...], "edges": [...]}')
    graph = PropertyGraph()
    for i, obj in enumerate(doc["vertices"]):
        where = f"vertices[{i}]"
        if not isinstance(obj, dict):
            raise GraphParseError(f"{where}: must be an object")
        vid = _parse_id(obj, "id", where)
        labels = obj.get("labels", [])
        if not isinstance(labels, list) or not all(isinstance(l, str) for l in labels):
            raise GraphParseError(f"{where}: labels must be an array of strings")
        if graph._id_in_use(vid):
            raise DuplicateIdError(f"{where}: duplicate id {vid!r}")
        graph._insert_vertex(vid, labels, _parse_properties(obj.get("properties"), where))
    for i, obj in enumerate(doc["edges"]):
        where = f"edges[{i}]"
        if not isinstance(obj, dict):
            raise GraphParseError(f"{where}: must be an object")
        eid = _parse_id(obj, "id", where)
        if graph._id_in_use(eid):
            raise DuplicateIdError(f"{where}: duplicate id {eid!r}")
        src_id = _parse_id(obj, "src", where)
        trg_id = _parse_id(obj, "trg", where)
        src = graph.vertex_by_id(src_id)
        trg = graph.vertex_by_id(trg_id)
        if src is None:
            raise DanglingEdgeError(f"{where}: unknown src vertex {src_id!r}")
        if trg is None:
            raise DanglingEdgeError(f"{where}: unknown trg vertex {trg_id!r}")
        type_ = obj.get("type")
        if not isinstance(type_, str) or not type_:
            raise GraphParseError(f"{where}: type must be a non-empty string")
        graph._insert_edge(eid, src.ref, trg.ref, type_,
                           _parse_properties(obj.get("properties"), where))
    return graph


_DELTA_FIELDS = {
    "add-vertex": {"id"},
    "remove-vertex": {"id"},
    "add-edge": {"id", "src", "trg", "type"},
    "remove-edge": {"id"},
    "set-property": {"id", "key", "value"},
    "remove-property": {"id", "key"},
}


def delta_from_json(obj) -> GraphDelta:
    """Decode one delta-script record (one JSON object per line)."""
    if not isinstance(obj, dict):
        raise GraphParseError("delta record must be an object")
    op = obj.get("op")
    if op not in _DELTA_FIELDS:
        raise GraphParseError(f"unknown delta op {op!r}")
    missing = _DELTA_FIELDS[op] - set(obj.keys())
    if missing:
        raise GraphParseError(f"{op}: missing field(s) {sorted(missing)}")
    if op == "add-vertex":
        labels = obj.get("labels", [])
        if not isinstance(labels, list):
            raise GraphParseError("add-vertex: labels must be an array")
        return GraphDelta.add_vertex(_parse_id(obj, "id", op), labels,
                                     _parse_properties(obj.get("properties"), op))
    if op == "remove-vertex":
        return GraphDelta.remove_vertex(_parse_id(obj, "id", op),
                                        detach=bool(obj.get("detach", False)))
    if op == "add-edge":
        if not isinstance(obj.get("type"), str):
            raise GraphParseError("add-edge: type must be a string")
        return GraphDelta.add_edge(_parse_id(obj, "id", op), _parse_id(obj, "src", op),
                                   _parse_id(obj, "trg", op), obj["type"],
                                   _parse_properties(obj.get("properties"), op))
    if op == "remove-edge":
        return GraphDelta.remove_edge(_parse_id(obj, "id", op))
    if op == "set-property":
        if not isinstance(obj.get("key"), str):
            raise GraphParseError("set-property: key must be a string")
        return GraphDelta.set_property(_parse_id(obj, "id", op), obj["key"],
                                       json_to_value(obj["value"]))
    if not isinstance(obj.get("key"), str):
        raise GraphParseError("remove-property: key must be a string")
    return GraphDelta.remove_property(_parse_id(obj, "id", op), obj["key"])


def delta_to_json(delta) -> dict:
    obj = {"op": delta.op, "id": delta.id}
    if delta.op == "add-vertex":
        obj["labels"] = list(delta.labels)
        obj["properties"] = {k: value_to_json(v) for k, v in delta.properties}
    elif delta.op == "remove-vertex":
        if delta.detach:
            obj["detach"] = True
    elif delta.op == "add-edge":
        obj.update(src=delta.src, trg=delta.trg, type=delta.type,
                   properties={k: value_to_json(v) for k, v in delta.properties})
    elif delta.op == "set-property":
        obj.update(key=delta.key, value=value_to_json(delta.value))
    elif delta.op == "remove-property":
        obj["key"] = delta.key
    return obj
