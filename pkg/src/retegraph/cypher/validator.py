"""Semantic validation: scoping, variable kinds, aggregate placement.

Produces a :class:`ValidatedQuery` the compiler consumes: the AST plus a
variable→kind map (node / edge / path / value).  WITH and RETURN re-scope
the rest of the query; pattern-predicate variables are existential and stay
local to the predicate.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import (
    DuplicateVariableError,
    MisplacedAggregateError,
    UnboundVariableError,
    UnsupportedFeatureError,
    ValidationError,
)
from . import ast
from .pretty import expr_text


@dataclass(frozen=True)
class ValidatedQuery:
    query: ast.Query
    var_kinds: dict

    @property
    def clauses(self):
        return self.query.clauses


def item_name(item: ast.ReturnItem) -> str:
    """The output attribute name of a projection item."""
    if item.alias:
        return item.alias
    expr = item.expression
    if isinstance(expr, ast.Var):
        return expr.name
    return expr_text(expr)


def split_conjuncts(condition):
    """Split a WHERE condition into (pattern predicates, residual scalar expr).

    Pattern predicates are legal only as top-level conjuncts, possibly under
    a single NOT; the residual conjuncts are re-joined with AND.
    """
    pattern_preds = []
    scalars = []

    def walk(expr):
        if isinstance(expr, ast.BoolOp) and expr.op == "and":
            walk(expr.left)
            walk(expr.right)
            return
        if isinstance(expr, ast.PatternPredicate):
            pattern_preds.append((expr.pattern, expr.negated, expr.pos))
            return
        if isinstance(expr, ast.Not) and isinstance(expr.operand, ast.PatternPredicate):
            inner = expr.operand
            pattern_preds.append((inner.pattern, not inner.negated, inner.pos))
            return
        if _contains_pattern(expr):
            raise UnsupportedFeatureError(
                "pattern predicates may only appear as top-level WHERE conjuncts",
                *getattr(expr, "pos", (0, 0)))
        scalars.append(expr)

    walk(condition)
    residual = None
    for expr in scalars:
        residual = expr if residual is None else ast.BoolOp("and", residual, expr)
    return pattern_preds, residual


def _contains_pattern(expr) -> bool:
    if isinstance(expr, ast.PatternPredicate):
        return True
    for child in _children(expr):
        if _contains_pattern(child):
            return True
    return False


def _children(expr):
    if isinstance(expr, (ast.Comparison, ast.BoolOp, ast.Arithmetic)):
        return (expr.left, expr.right)
    if isinstance(expr, (ast.Not, ast.Negate)):
        return (expr.operand,)
    if isinstance(expr, ast.AggregateCall):
        return (expr.argument,)
    return ()


def _contains_aggregate(expr) -> bool:
    if isinstance(expr, ast.AggregateCall):
        return True
    return any(_contains_aggregate(child) for child in _children(expr))


class _Validator:
    def __init__(self, query):
        self.query = query
        self.var_kinds = {}

    def bind(self, name, kind, pos):
        known = self.var_kinds.get(name)
        if known is not None and known != kind:
            raise DuplicateVariableError(
                f"variable {name!r} rebound as {kind} (was {known})", *pos)
        self.var_kinds[name] = kind

    # --- patterns ------------------------------------------------------------

    def check_pattern(self, pattern, scope):
        for node in pattern.nodes():
            self.bind(node.var, "node", node.pos)
            scope[node.var] = "node"
        for rel in pattern.rels():
            kind = "path" if rel.range is not None else "edge"
            if kind == "path" and rel.var in scope and not rel.anonymous:
                raise DuplicateVariableError(
                    f"path variable {rel.var!r} cannot be rebound", *rel.pos)
            self.bind(rel.var, kind, rel.pos)
            scope[rel.var] = kind

    # --- expressions ------------------------------------------------------------

    def check_expr(self, expr, scope, allow_aggregates=False):
        if isinstance(expr, ast.Literal):
            return
        if isinstance(expr, ast.Var):
            if expr.name not in scope:
                raise UnboundVariableError(f"unbound variable {expr.name!r}", *expr.pos)
            return
        if isinstance(expr, ast.PropAccess):
            if expr.var not in scope:
                raise UnboundVariableError(f"unbound variable {expr.var!r}", *expr.pos)
            return
        if isinstance(expr, ast.LabelPredicate):
            if expr.var not in scope:
                raise UnboundVariableError(f"unbound variable {expr.var!r}", *expr.pos)
            if scope[expr.var] != "node":
                raise ValidationError(
                    f"label predicate on non-vertex variable {expr.var!r}", *expr.pos)
            return
        if isinstance(expr, ast.PatternPredicate):
            local = dict(scope)
            self.check_pattern(expr.pattern, local)
            return
        if isinstance(expr, ast.AggregateCall):
            if not allow_aggregates:
                raise MisplacedAggregateError(
                    "aggregates are only allowed as RETURN/WITH items", *expr.pos)
            if _contains_aggregate(expr.argument):
                raise MisplacedAggregateError("nested aggregate call", *expr.pos)
            self.check_expr(expr.argument, scope, allow_aggregates=False)
            return
        for child in _children(expr):
            self.check_expr(child, scope, allow_aggregates=False)

    def check_where(self, condition, scope):
        pattern_preds, residual = split_conjuncts(condition)
        for pattern, _negated, _pos in pattern_preds:
            local = dict(scope)
            self.check_pattern(pattern, local)
        if residual is not None:
            self.check_expr(residual, scope)

    # --- projections ------------------------------------------------------------

    def projection_scope(self, items, scope, pos):
        out = {}
        for item in items:
            if isinstance(item.expression, ast.AggregateCall):
                self.check_expr(item.expression, scope, allow_aggregates=True)
            else:
                if _contains_aggregate(item.expression):
                    raise MisplacedAggregateError(
                        "aggregates must be entire RETURN/WITH items", *item.pos)
                self.check_expr(item.expression, scope)
            name = item_name(item)
            if name in out:
                raise DuplicateVariableError(f"duplicate output name {name!r}", *item.pos)
            kind = self.output_kind(item.expression, scope)
            self.bind(name, kind, item.pos)
            out[name] = kind
        return out

    def output_kind(self, expr, scope):
        if isinstance(expr, ast.Var):
            return scope[expr.name]
        return "value"

    # --- clauses -----------------------------------------------------------------

    def run(self) -> ValidatedQuery:
        scope = {}
        return_seen = False
        for clause in self.query.clauses:
            if isinstance(clause, ast.Match):
                for pattern in clause.patterns:
                    self.check_pattern(pattern, scope)
                if clause.where is not None:
                    self.check_where(clause.where, scope)
            elif isinstance(clause, ast.With):
                scope = self.projection_scope(clause.items, scope, clause.pos)
                if clause.where is not None:
                    self.check_where(clause.where, scope)
            elif isinstance(clause, ast.Unwind):
                self.check_expr(clause.expression, scope)
                if clause.alias in scope:
                    raise DuplicateVariableError(
                        f"variable {clause.alias!r} already in scope", *clause.pos)
                self.bind(clause.alias, "value", clause.pos)
                scope[clause.alias] = "value"
            elif isinstance(clause, ast.Return):
                scope = self.projection_scope(clause.items, scope, clause.pos)
                self.return_items = clause.items
                return_seen = True
            elif isinstance(clause, ast.OrderSkipLimit):
                for key in clause.keys:
                    self.check_sort_key(key, scope)
            else:
                raise ValidationError(f"unexpected clause {clause!r}")
        if not return_seen:
            raise ValidationError("query must end in RETURN")
        return ValidatedQuery(self.query, self.var_kinds)

    def check_sort_key(self, key, scope):
        # A key may also repeat a RETURN item expression verbatim (common
        # openCypher idiom: RETURN p.name ORDER BY p.name).
        if any(key.expression == item.expression for item in self.return_items):
            return
        if _contains_aggregate(key.expression):
            raise MisplacedAggregateError(
                "aggregates in ORDER BY must repeat a RETURN item", *key.pos)
        self.check_expr(key.expression, scope)


def validate(query: ast.Query) -> ValidatedQuery:
    return _Validator(query).run()
