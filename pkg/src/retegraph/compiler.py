"""Translates a validated query into the graph-stage operator tree.

The construct mapping: pattern chains become GetVertices plus a run of
Expand / TransitiveExpand operators; comma-separated and consecutive MATCH
patterns combine by natural join; leading OPTIONAL MATCH left-outer-joins
against the unit relation; WHERE becomes a selection (pattern predicates
become semijoins / antijoins); RETURN and WITH become projection or grouping
with optional duplicate elimination; UNWIND and ORDER BY / SKIP / LIMIT map
to their operators directly.

Two local planning choices: a transitive pattern anchors at whichever
endpoint is already bound, or failing that carries a WHERE equality on one
of its properties (ties anchor left), and each selection is pushed to the
deepest subtree that binds all its variables.
"""

from __future__ import annotations

from . import algebra as alg
from .cypher import ast
from .cypher.validator import item_name, split_conjuncts


def _expr_vars(expr, out):
    if isinstance(expr, ast.Var):
        out.add(expr.name)
    elif isinstance(expr, (ast.PropAccess, ast.LabelPredicate)):
        out.add(expr.var)
    elif isinstance(expr, (ast.Comparison, ast.BoolOp, ast.Arithmetic)):
        _expr_vars(expr.left, out)
        _expr_vars(expr.right, out)
    elif isinstance(expr, (ast.Not, ast.Negate)):
        _expr_vars(expr.operand, out)
    elif isinstance(expr, ast.AggregateCall):
        _expr_vars(expr.argument, out)
    return out


def expr_vars(expr):
    return _expr_vars(expr, set())


def _selective_vars(condition):
    """Variables with a top-level `var.key = literal` equality conjunct."""
    if condition is None:
        return set()
    out = set()
    _pattern_free, residual = split_conjuncts(condition)
    stack = [residual] if residual is not None else []
    while stack:
        expr = stack.pop()
        if isinstance(expr, ast.BoolOp) and expr.op == "and":
            stack.extend((expr.left, expr.right))
        elif isinstance(expr, ast.Comparison) and expr.op == "=":
            for a, b in ((expr.left, expr.right), (expr.right, expr.left)):
                if isinstance(a, ast.PropAccess) and isinstance(b, ast.Literal):
                    out.add(a.var)
    return out


class _Compiler:
    def __init__(self, validated):
        self.validated = validated
        self.kinds = validated.var_kinds

    # Property access on non-element variables (aliases of scalars, paths)
    # has no key to read; it evaluates to null.
    def rewrite(self, expr):
        if isinstance(expr, ast.PropAccess):
            if self.kinds.get(expr.var) not in ("node", "edge"):
                return ast.Literal(None)
            return expr
        if isinstance(expr, (ast.Comparison, ast.BoolOp, ast.Arithmetic)):
            return type(expr)(expr.op, self.rewrite(expr.left), self.rewrite(expr.right))
        if isinstance(expr, (ast.Not, ast.Negate)):
            return type(expr)(self.rewrite(expr.operand))
        if isinstance(expr, ast.AggregateCall):
            return ast.AggregateCall(expr.func, self.rewrite(expr.argument))
        return expr

    def output_attr(self, item):
        name = item_name(item)
        if item.alias is None and isinstance(item.expression, ast.PropAccess) \
                and self.kinds.get(item.expression.var) in ("node", "edge"):
            return alg.PropAttr(item.expression.var, item.expression.key)
        kind = self.kinds.get(name, "value")
        if kind in ("node", "edge"):
            return alg.ElementAttr(name)
        if kind == "path":
            return alg.PathAttr(name)
        return alg.ValueAttr(name)

    # --- patterns ---------------------------------------------------------------

    def compile_pattern(self, pattern, bound, selective=frozenset()):
        """Standalone tree for one pattern chain; None when it binds nothing new."""
        if not pattern.hops:
            head = pattern.head
            if head.var in bound and not head.labels:
                return None
            return alg.GetVertices(head.var, head.labels)

        def endpoint_score(node):
            if node.var in bound:
                return 2
            if node.var in selective:
                return 1
            return 0

        nodes = list(pattern.nodes())
        rels = list(pattern.rels())
        reverse = endpoint_score(nodes[-1]) > endpoint_score(nodes[0])
        if reverse:
            nodes.reverse()
            rels.reverse()

        flip = {"out": "in", "in": "out", "both": "both"}
        tree = alg.GetVertices(nodes[0].var, nodes[0].labels)
        prev = nodes[0]
        for rel, node in zip(rels, nodes[1:]):
            direction = flip[rel.direction] if reverse else rel.direction
            if rel.range is not None:
                low, up = rel.range
                tree = alg.TransitiveExpand(direction, prev.var, rel.var, node.var,
                                            rel.types, low, up, prev.labels,
                                            node.labels, reverse, tree)
            else:
                tree = alg.Expand(direction, prev.var, rel.var, node.var, rel.types,
                                  node.labels, tree)
            prev = node
        return tree

    def join_patterns(self, patterns, bound, selective):
        tree = None
        for pattern in patterns:
            sub = self.compile_pattern(pattern, bound, selective)
            if sub is None:
                continue
            tree = sub if tree is None else alg.NaturalJoin(tree, sub)
        return tree

    # --- selection placement -------------------------------------------------------

    def place_selection(self, condition, tree):
        """Push a selection to the deepest child binding all its variables."""
        vars_needed = expr_vars(condition)

        def binds_all(node):
            names = set(node.schema_names())
            return vars_needed <= names

        def descend(node):
            if isinstance(node, alg.Selection):
                if binds_all(node.child):
                    return alg.rebuild(node, (descend(node.child),))
            elif isinstance(node, (alg.Expand, alg.TransitiveExpand)):
                if binds_all(node.child):
                    return alg.rebuild(node, (descend(node.child),))
            elif isinstance(node, alg.NaturalJoin):
                if binds_all(node.left):
                    return alg.rebuild(node, (descend(node.left), node.right))
                if binds_all(node.right):
                    return alg.rebuild(node, (node.left, descend(node.right)))
            elif isinstance(node, (alg.Semijoin, alg.Antijoin, alg.LeftOuterJoin)):
                if binds_all(node.left):
                    return alg.rebuild(node, (descend(node.left), node.right))
            return alg.Selection(condition, node)

        return descend(tree)

    def apply_where(self, condition, tree, bound):
        pattern_preds, residual = split_conjuncts(condition)
        for pattern, negated, _pos in pattern_preds:
            sub = self.compile_pattern(pattern, bound)
            if sub is None:
                continue
            tree = alg.Antijoin(tree, sub) if negated else alg.Semijoin(tree, sub)
        if residual is not None:
            tree = self.place_selection(self.rewrite(residual), tree)
        return tree

    # --- projections -----------------------------------------------------------------

    def build_projection(self, items, distinct, tree):
        plan_items = []
        has_aggregate = False
        for item in items:
            expr = self.rewrite(item.expression)
            if isinstance(expr, ast.AggregateCall):
                has_aggregate = True
            plan_items.append((expr, self.output_attr(item)))
        if tree is None:
            tree = alg.SingletonUnit()
        node_cls = alg.Grouping if has_aggregate else alg.Projection
        tree = node_cls(tuple(plan_items), tree)
        if distinct:
            tree = alg.DedupAll(tree)
        return tree

    # --- whole query -------------------------------------------------------------------

    def sort_key_expr(self, key_expr, return_items):
        # a key repeating an aliased RETURN item reads that output column;
        # without the rewrite the projected alias would hide the property
        for item in return_items:
            if key_expr == item.expression and item.alias:
                return ast.Var(item.alias)
        return self.rewrite(key_expr)

    def run(self):
        tree = None
        return_items = ()
        for clause in self.validated.clauses:
            bound = set(tree.schema_names()) if tree is not None else set()
            if isinstance(clause, ast.Match):
                selective = _selective_vars(clause.where)
                if clause.optional:
                    right = self.join_patterns(clause.patterns, bound, selective)
                    if right is None:
                        continue
                    if clause.where is not None:
                        right_bound = bound | set(right.schema_names())
                        right = self.apply_where(clause.where, right, right_bound)
                    left = tree if tree is not None else alg.SingletonUnit()
                    tree = alg.LeftOuterJoin(left, right)
                else:
                    sub = self.join_patterns(clause.patterns, bound, selective)
                    if sub is not None:
                        tree = sub if tree is None else alg.NaturalJoin(tree, sub)
                    if clause.where is not None:
                        tree = self.apply_where(clause.where, tree,
                                                set(tree.schema_names()))
            elif isinstance(clause, ast.With):
                tree = self.build_projection(clause.items, clause.distinct, tree)
                if clause.where is not None:
                    tree = self.apply_where(clause.where, tree,
                                            set(tree.schema_names()))
            elif isinstance(clause, ast.Unwind):
                if tree is None:
                    tree = alg.SingletonUnit()
                tree = alg.Unwind(self.rewrite(clause.expression),
                                  alg.ValueAttr(clause.alias), tree)
            elif isinstance(clause, ast.Return):
                tree = self.build_projection(clause.items, clause.distinct, tree)
                return_items = clause.items
            elif isinstance(clause, ast.OrderSkipLimit):
                keys = tuple((self.sort_key_expr(k.expression, return_items),
                              k.ascending) for k in clause.keys)
                tree = alg.SortAndTop(keys, clause.skip, clause.limit, tree)
        return tree


def compile_query(validated) -> alg.PlanNode:
    return _Compiler(validated).run()


def compile_pattern(validated, pattern, bound=frozenset()) -> alg.PlanNode | None:
    """Compile a single pattern chain against an existing set of bound variables."""
    return _Compiler(validated).compile_pattern(pattern, set(bound))
