"""Operator trees for the three plan stages.

The same node classes serve all stages: the graph stage uses navigation
operators (Expand / TransitiveExpand), lowering replaces them with joins on
edge scans (GetEdges / TransitiveGetEdges), and the flat stage adds
required-property annotations and flat schemas computed by schema inference.

Every node carries a nested schema (ordered attributes) derived bottom-up at
construction.  ``required_props`` and ``flat_schema`` stay None until
inference runs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cypher.pretty import expr_text
from .graph import LABELS_KEY

UNBOUNDED = None  # upper bound of a transitive range


# --- schema attributes ----------------------------------------------------------

@dataclass(frozen=True)
class ElementAttr:
    name: str


@dataclass(frozen=True)
class PathAttr:
    name: str


@dataclass(frozen=True)
class ValueAttr:
    name: str


@dataclass(frozen=True)
class PropAttr:
    var: str
    key: str


def attr_name(attr) -> str:
    if isinstance(attr, PropAttr):
        if attr.key == LABELS_KEY:
            return f"labels({attr.var})"
        return f"{attr.var}.{attr.key}"
    return attr.name


def schema_text(schema) -> str:
    return "⟨" + ", ".join(attr_name(a) for a in schema) + "⟩"


def prop_sort_key(prop):
    return prop  # (var, key) tuples order lexicographically


# --- plan nodes -------------------------------------------------------------------

class PlanNode:
    kind = "?"

    def __init__(self, children, nested_schema):
        self.children = tuple(children)
        self.nested_schema = tuple(nested_schema)
        self.required_props = None  # frozenset[(var, key)] once recorded
        self.flat_schema = None

    def args_text(self):
        return ""

    def schema_names(self):
        return [attr_name(a) for a in self.nested_schema]

    def binds(self, var: str) -> bool:
        return any(not isinstance(a, PropAttr) and a.name == var for a in self.nested_schema)

    def __repr__(self):
        return f"{self.kind}[{self.args_text()}]"


def _labels_text(labels):
    return "{" + ", ".join(sorted(labels)) + "}"


def _range_text(low, up):
    return f"{low}..{'∞' if up is UNBOUNDED else up}"


class GetVertices(PlanNode):
    kind = "GetVertices"

    def __init__(self, var, labels=frozenset()):
        super().__init__((), (ElementAttr(var),))
        self.var = var
        self.labels = frozenset(labels)

    def args_text(self):
        text = self.var
        if self.labels:
            text += f", labels={_labels_text(self.labels)}"
        return text


class SingletonUnit(PlanNode):
    kind = "SingletonUnit"

    def __init__(self):
        super().__init__((), ())


class GetEdges(PlanNode):
    kind = "GetEdges"

    def __init__(self, v, e, w, types=frozenset(), v_labels=frozenset(),
                 w_labels=frozenset(), direction="out"):
        super().__init__((), (ElementAttr(v), ElementAttr(e), ElementAttr(w)))
        self.v, self.e, self.w = v, e, w
        self.types = frozenset(types)
        self.v_labels = frozenset(v_labels)
        self.w_labels = frozenset(w_labels)
        self.direction = direction

    def args_text(self):
        parts = [self.v, self.e, self.w]
        if self.types:
            parts.append(f"types={_labels_text(self.types)}")
        if self.v_labels:
            parts.append(f"src={_labels_text(self.v_labels)}")
        if self.w_labels:
            parts.append(f"trg={_labels_text(self.w_labels)}")
        parts.append(self.direction)
        return ", ".join(parts)


class TransitiveGetEdges(PlanNode):
    kind = "TransitiveGetEdges"

    def __init__(self, v, path_var, w, types, low, up, direction="out",
                 reverse_path=False):
        super().__init__((), (ElementAttr(v), PathAttr(path_var), ElementAttr(w)))
        self.v, self.path_var, self.w = v, path_var, w
        self.types = frozenset(types)
        self.low, self.up = low, up
        self.direction = direction
        self.reverse_path = reverse_path

    def args_text(self):
        parts = [self.v, self.path_var, self.w]
        if self.types:
            parts.append(f"types={_labels_text(self.types)}")
        parts.append(_range_text(self.low, self.up))
        parts.append(self.direction)
        if self.reverse_path:
            parts.append("reversed")
        return ", ".join(parts)


class Expand(PlanNode):
    kind = "Expand"

    def __init__(self, direction, src, edge, dst, types, dst_labels, child):
        schema = child.nested_schema + (ElementAttr(edge), ElementAttr(dst))
        super().__init__((child,), schema)
        self.direction = direction
        self.src, self.edge, self.dst = src, edge, dst
        self.types = frozenset(types)
        self.dst_labels = frozenset(dst_labels)

    @property
    def child(self):
        return self.children[0]

    def args_text(self):
        parts = [self.direction, self.src, self.edge, self.dst]
        if self.types:
            parts.append(f"types={_labels_text(self.types)}")
        if self.dst_labels:
            parts.append(f"trg={_labels_text(self.dst_labels)}")
        return ", ".join(parts)


class TransitiveExpand(PlanNode):
    kind = "TransitiveExpand"

    def __init__(self, direction, src, path_var, dst, types, low, up,
                 src_labels, dst_labels, reverse_path, child):
        schema = child.nested_schema + (PathAttr(path_var), ElementAttr(dst))
        super().__init__((child,), schema)
        self.direction = direction
        self.src, self.path_var, self.dst = src, path_var, dst
        self.types = frozenset(types)
        self.low, self.up = low, up
        self.src_labels = frozenset(src_labels)
        self.dst_labels = frozenset(dst_labels)
        self.reverse_path = reverse_path

    @property
    def child(self):
        return self.children[0]

    def args_text(self):
        parts = [self.direction, self.src, self.path_var, self.dst]
        if self.types:
            parts.append(f"types={_labels_text(self.types)}")
        parts.append(_range_text(self.low, self.up))
        if self.dst_labels:
            parts.append(f"trg={_labels_text(self.dst_labels)}")
        if self.reverse_path:
            parts.append("reversed")
        return ", ".join(parts)


class Selection(PlanNode):
    kind = "Selection"

    def __init__(self, condition, child):
        super().__init__((child,), child.nested_schema)
        self.condition = condition

    @property
    def child(self):
        return self.children[0]

    def args_text(self):
        return expr_text(self.condition)


def _items_text(items):
    parts = []
    for expr, attr in items:
        text = expr_text(expr)
        name = attr_name(attr)
        parts.append(text if text == name else f"{text} AS {name}")
    return ", ".join(parts)


class Projection(PlanNode):
    kind = "Projection"

    def __init__(self, items, child):
        super().__init__((child,), tuple(attr for _expr, attr in items))
        self.items = tuple(items)

    @property
    def child(self):
        return self.children[0]

    def args_text(self):
        return _items_text(self.items)


class Grouping(PlanNode):
    kind = "Grouping"

    def __init__(self, items, child):
        super().__init__((child,), tuple(attr for _expr, attr in items))
        self.items = tuple(items)

    @property
    def child(self):
        return self.children[0]

    def args_text(self):
        return _items_text(self.items)


class DedupAll(PlanNode):
    kind = "DedupAll"

    def __init__(self, child):
        super().__init__((child,), child.nested_schema)

    @property
    def child(self):
        return self.children[0]


class Unwind(PlanNode):
    kind = "Unwind"

    def __init__(self, expression, attr, child):
        super().__init__((child,), child.nested_schema + (attr,))
        self.expression = expression
        self.attr = attr

    @property
    def child(self):
        return self.children[0]

    def args_text(self):
        return f"{expr_text(self.expression)} => {attr_name(self.attr)}"


class SortAndTop(PlanNode):
    kind = "SortAndTop"

    def __init__(self, keys, skip, limit, child):
        super().__init__((child,), child.nested_schema)
        self.keys = tuple(keys)  # (expression, ascending)
        self.skip = skip
        self.limit = limit

    @property
    def child(self):
        return self.children[0]

    def args_text(self):
        parts = [expr_text(e) + ("" if asc else " DESC") for e, asc in self.keys]
        parts.append(f"skip={self.skip}")
        parts.append(f"limit={'∞' if self.limit is None else self.limit}")
        return ", ".join(parts)


class _BinaryNode(PlanNode):
    def __init__(self, left, right, schema):
        super().__init__((left, right), schema)

    @property
    def left(self):
        return self.children[0]

    @property
    def right(self):
        return self.children[1]


def _join_schema(left, right):
    shared = set(left.nested_schema)
    return left.nested_schema + tuple(a for a in right.nested_schema if a not in shared)


class NaturalJoin(_BinaryNode):
    kind = "NaturalJoin"

    def __init__(self, left, right):
        super().__init__(left, right, _join_schema(left, right))


class LeftOuterJoin(_BinaryNode):
    kind = "LeftOuterJoin"

    def __init__(self, left, right):
        super().__init__(left, right, _join_schema(left, right))


class Semijoin(_BinaryNode):
    kind = "Semijoin"

    def __init__(self, left, right):
        super().__init__(left, right, left.nested_schema)


class Antijoin(_BinaryNode):
    kind = "Antijoin"

    def __init__(self, left, right):
        super().__init__(left, right, left.nested_schema)


class Union(_BinaryNode):
    kind = "Union"

    def __init__(self, left, right):
        super().__init__(left, right, left.nested_schema)


def rebuild(node, children):
    """Construct a copy of `node` with new children (same operator arguments)."""
    cls = type(node)
    if cls is GetVertices:
        return GetVertices(node.var, node.labels)
    if cls is SingletonUnit:
        return SingletonUnit()
    if cls is GetEdges:
        return GetEdges(node.v, node.e, node.w, node.types, node.v_labels,
                        node.w_labels, node.direction)
    if cls is TransitiveGetEdges:
        return TransitiveGetEdges(node.v, node.path_var, node.w, node.types,
                                  node.low, node.up, node.direction, node.reverse_path)
    if cls is Expand:
        return Expand(node.direction, node.src, node.edge, node.dst, node.types,
                      node.dst_labels, children[0])
    if cls is TransitiveExpand:
        return TransitiveExpand(node.direction, node.src, node.path_var, node.dst,
                                node.types, node.low, node.up, node.src_labels,
                                node.dst_labels, node.reverse_path, children[0])
    if cls is Selection:
        return Selection(node.condition, children[0])
    if cls is Projection:
        return Projection(node.items, children[0])
    if cls is Grouping:
        return Grouping(node.items, children[0])
    if cls is DedupAll:
        return DedupAll(children[0])
    if cls is Unwind:
        return Unwind(node.expression, node.attr, children[0])
    if cls is SortAndTop:
        return SortAndTop(node.keys, node.skip, node.limit, children[0])
    if cls in (NaturalJoin, LeftOuterJoin, Semijoin, Antijoin, Union):
        return cls(children[0], children[1])
    raise TypeError(f"cannot rebuild {cls.__name__}")


# --- serialization ------------------------------------------------------------------

def _req_text(props):
    parts = []
    for var, key in sorted(props, key=prop_sort_key):
        parts.append(f"labels({var})" if key == LABELS_KEY else f"{var}.{key}")
    return "{" + ", ".join(parts) + "}"


def serialize_plan(root, annotated=False) -> str:
    """Indented-tree text form, one operator per line."""
    lines = []

    def walk(node, depth):
        line = "  " * depth + f"{node.kind}[{node.args_text()}] :: {schema_text(node.nested_schema)}"
        if annotated:
            if node.required_props is not None:
                line += f" | req: {_req_text(node.required_props)}"
            if node.flat_schema is not None:
                line += f" | flat: {schema_text(node.flat_schema)}"
        lines.append(line)
        for child in node.children:
            walk(child, depth + 1)

    walk(root, 0)
    return "\n".join(lines)


def iter_nodes(root):
    yield root
    for child in root.children:
        yield from iter_nodes(child)
