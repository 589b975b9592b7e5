"""Plan lowering: navigation elimination, property inference, flat schemas.

Three steps run in sequence:

1. ``lower_to_nra`` rewrites Expand into a join on a GetEdges scan (merging
   the scan with a direct GetVertices child into a single compound GetEdges,
   which is what lets property columns land on the edge scan), and rewrites
   TransitiveExpand into a join on TransitiveGetEdges plus, unless the
   label-preservation option elides it, a label-enforcing join on
   GetVertices.
2. ``infer_required_properties`` walks the tree pre-order pushing an
   accumulator of (variable, key) pairs toward the leaves; nullary operators
   and projections/groupings record their set.  At a binary operator the set
   splits by which child binds each variable (left side wins ties).
3. ``compute_flat_schemas`` assigns each operator its flat schema: nullary
   operators and projections/groupings concatenate their schema with the
   recorded properties (ordered lexicographically); other operators follow
   standard schema composition.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import algebra as alg
from .cypher import ast
from .errors import InferenceError, SchemaMismatchError
from .graph import LABELS_KEY


@dataclass(frozen=True)
class LoweringOptions:
    # Drop the label-enforcing join after a transitive traversal when the
    # pattern's endpoint label sets are identical.  Off by default: it is
    # only sound when every traversed edge stays within those labels.
    label_preservation: bool = False


# --- step 1: eliminate navigation operators -----------------------------------------

def lower_to_nra(node, options=LoweringOptions()):
    if isinstance(node, alg.Expand):
        child = lower_to_nra(node.child, options)
        if isinstance(child, alg.GetVertices) and child.var == node.src:
            return alg.GetEdges(node.src, node.edge, node.dst, node.types,
                                child.labels, node.dst_labels, node.direction)
        scan = alg.GetEdges(node.src, node.edge, node.dst, node.types,
                            frozenset(), node.dst_labels, node.direction)
        return alg.NaturalJoin(child, scan)
    if isinstance(node, alg.TransitiveExpand):
        child = lower_to_nra(node.child, options)
        scan = alg.TransitiveGetEdges(node.src, node.path_var, node.dst, node.types,
                                      node.low, node.up, node.direction,
                                      node.reverse_path)
        tree = alg.NaturalJoin(child, scan)
        if node.dst_labels and not (options.label_preservation
                                    and node.src_labels == node.dst_labels):
            tree = alg.NaturalJoin(tree, alg.GetVertices(node.dst, node.dst_labels))
        return tree
    if not node.children:
        return alg.rebuild(node, ())
    return alg.rebuild(node, tuple(lower_to_nra(c, options) for c in node.children))


# --- step 2: required-property inference ----------------------------------------------

def _props_in_expr(expr, out):
    if isinstance(expr, ast.PropAccess):
        out.add((expr.var, expr.key))
    elif isinstance(expr, ast.LabelPredicate):
        out.add((expr.var, LABELS_KEY))
    elif isinstance(expr, (ast.Comparison, ast.BoolOp, ast.Arithmetic)):
        _props_in_expr(expr.left, out)
        _props_in_expr(expr.right, out)
    elif isinstance(expr, (ast.Not, ast.Negate)):
        _props_in_expr(expr.operand, out)
    elif isinstance(expr, ast.AggregateCall):
        _props_in_expr(expr.argument, out)
    return out


def extract_properties(node) -> frozenset:
    """Properties an operator's own expressions consult."""
    out = set()
    if isinstance(node, (alg.Projection, alg.Grouping)):
        for expr, _attr in node.items:
            _props_in_expr(expr, out)
    elif isinstance(node, alg.Selection):
        _props_in_expr(node.condition, out)
    elif isinstance(node, alg.SortAndTop):
        for expr, _asc in node.keys:
            _props_in_expr(expr, out)
    elif isinstance(node, alg.Unwind):
        _props_in_expr(node.expression, out)
    return frozenset(out)


def infer_required_properties(node, props=frozenset()):
    """Pre-order accumulator walk (annotates the tree in place)."""
    props = props | extract_properties(node)
    if not node.children:
        node.required_props = props
        return node
    if len(node.children) == 1:
        if isinstance(node, (alg.Projection, alg.Grouping)):
            node.required_props = props
        infer_required_properties(node.children[0], props)
        return node
    if isinstance(node, alg.Union):
        # both operands must produce identical flat rows
        for child in node.children:
            infer_required_properties(child, props)
        return node
    left, right = node.children
    left_names = set(left.schema_names())
    right_names = set(right.schema_names())
    left_props, right_props = set(), set()
    for prop in props:
        var = prop[0]
        if var in left_names:
            left_props.add(prop)
        elif var in right_names:
            right_props.add(prop)
        else:
            raise InferenceError(
                f"variable {var!r} of required property {prop} is bound by "
                f"neither join operand")
    infer_required_properties(left, frozenset(left_props))
    infer_required_properties(right, frozenset(right_props))
    return node


# --- step 3: flat schemas ---------------------------------------------------------------

def _prop_attrs(node, props):
    """Recorded properties as flat columns, restricted to variables the node binds."""
    return tuple(alg.PropAttr(var, key)
                 for var, key in sorted(props, key=alg.prop_sort_key)
                 if node.binds(var))


def compute_flat_schemas(node):
    for child in node.children:
        compute_flat_schemas(child)
    if not node.children:
        node.flat_schema = node.nested_schema + _prop_attrs(node, node.required_props)
        return node
    if isinstance(node, (alg.Projection, alg.Grouping)):
        extra = tuple(a for a in _prop_attrs(node, node.required_props)
                      if a not in node.nested_schema)
        node.flat_schema = node.nested_schema + extra
    elif isinstance(node, (alg.Selection, alg.DedupAll, alg.SortAndTop)):
        node.flat_schema = node.children[0].flat_schema
    elif isinstance(node, alg.Unwind):
        node.flat_schema = node.children[0].flat_schema + (node.attr,)
    elif isinstance(node, (alg.NaturalJoin, alg.LeftOuterJoin)):
        left, right = (c.flat_schema for c in node.children)
        shared = set(left)
        node.flat_schema = left + tuple(a for a in right if a not in shared)
    elif isinstance(node, (alg.Semijoin, alg.Antijoin)):
        node.flat_schema = node.children[0].flat_schema
    elif isinstance(node, alg.Union):
        left, right = (c.flat_schema for c in node.children)
        if left != right:
            raise SchemaMismatchError(
                f"union operands disagree: {alg.schema_text(left)} vs "
                f"{alg.schema_text(right)}")
        node.flat_schema = left
    else:
        raise InferenceError(f"no flat-schema rule for {node.kind}")
    return node


def lower(gra_root, options=LoweringOptions()):
    """Full pipeline: returns the annotated flat-stage tree."""
    nra = lower_to_nra(gra_root, options)
    infer_required_properties(nra)
    compute_flat_schemas(nra)
    return nra
