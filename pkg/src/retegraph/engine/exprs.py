"""Compiles plan expressions into row functions over a flat schema.

Operators evaluate strictly on local columns (ids, property columns, the
label pseudo-column); nothing here touches the graph store.
"""

from __future__ import annotations

from ..algebra import PropAttr, attr_name
from ..cypher import ast
from ..cypher.pretty import expr_text
from ..errors import InferenceError
from ..graph import LABELS_KEY
from ..values import (
    Bag,
    and3,
    arith_values,
    eq_values,
    lt_values,
    neg_value,
    not3,
    or3,
)


def column_index(schema, attr_match) -> int | None:
    for i, attr in enumerate(schema):
        if attr_match(attr):
            return i
    return None


def var_column(schema, name):
    return column_index(
        schema, lambda a: not isinstance(a, PropAttr) and a.name == name)


def prop_column(schema, var, key):
    return column_index(
        schema, lambda a: isinstance(a, PropAttr) and a.var == var and a.key == key)


def compile_expr(expr, schema):
    """Return fn(row) -> value. Missing columns indicate an inference bug or
    a property access the inference pass could not route (e.g. through an
    element-renaming projection); both surface as InferenceError."""
    if isinstance(expr, ast.Literal):
        value = expr.value
        return lambda row: value
    if isinstance(expr, ast.Var):
        idx = var_column(schema, expr.name)
        if idx is None:
            raise InferenceError(f"no column for variable {expr.name!r}")
        return lambda row: row[idx]
    if isinstance(expr, ast.PropAccess):
        idx = prop_column(schema, expr.var, expr.key)
        if idx is None:
            raise InferenceError(
                f"property {expr.var}.{expr.key} is not available in "
                f"{[attr_name(a) for a in schema]}")
        return lambda row: row[idx]
    if isinstance(expr, ast.LabelPredicate):
        idx = prop_column(schema, expr.var, LABELS_KEY)
        if idx is None:
            raise InferenceError(f"labels({expr.var}) not available")
        wanted = Bag(expr.labels)
        return lambda row: None if row[idx] is None else row[idx].contains_all(wanted)
    if isinstance(expr, ast.Comparison):
        left = compile_expr(expr.left, schema)
        right = compile_expr(expr.right, schema)
        op = expr.op
        if op == "=":
            return lambda row: eq_values(left(row), right(row))
        if op == "<>":
            return lambda row: not3(eq_values(left(row), right(row)))
        if op == "<":
            return lambda row: lt_values(left(row), right(row))
        if op == ">":
            return lambda row: lt_values(right(row), left(row))
        if op == "<=":
            return lambda row: or3(lt_values(left(row), right(row)),
                                   eq_values(left(row), right(row)))
        return lambda row: or3(lt_values(right(row), left(row)),
                               eq_values(left(row), right(row)))
    if isinstance(expr, ast.BoolOp):
        left = compile_expr(expr.left, schema)
        right = compile_expr(expr.right, schema)
        combine = and3 if expr.op == "and" else or3
        return lambda row: combine(left(row), right(row))
    if isinstance(expr, ast.Not):
        operand = compile_expr(expr.operand, schema)
        return lambda row: not3(operand(row))
    if isinstance(expr, ast.Arithmetic):
        left = compile_expr(expr.left, schema)
        right = compile_expr(expr.right, schema)
        op = expr.op
        return lambda row: arith_values(op, left(row), right(row))
    if isinstance(expr, ast.Negate):
        operand = compile_expr(expr.operand, schema)
        return lambda row: neg_value(operand(row))
    if isinstance(expr, ast.AggregateCall):
        # only legal as a column reference, e.g. a sort key repeating an
        # aggregated item; the grouping node itself never compiles these
        text = expr_text(expr)
        idx = column_index(schema, lambda a: attr_name(a) == text)
        if idx is None:
            raise InferenceError(f"no column for aggregate {text!r}")
        return lambda row: row[idx]
    raise InferenceError(f"cannot compile expression {expr!r}")
