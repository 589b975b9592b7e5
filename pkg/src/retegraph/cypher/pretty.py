"""Canonical text rendering of ASTs: expressions, patterns, whole queries.

Re-parsing the rendered text of a valid query yields a structurally
identical AST (positions aside); plan serialization reuses the expression
renderer.
"""

from __future__ import annotations

from . import ast

_PRECEDENCE = {
    "or": 1,
    "and": 2,
    "not": 3,
    "cmp": 4,
    "add": 5,
    "mul": 6,
    "neg": 7,
    "atom": 8,
}


def _prec(expr) -> int:
    if isinstance(expr, ast.BoolOp):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, ast.Not):
        return _PRECEDENCE["not"]
    if isinstance(expr, ast.Comparison):
        return _PRECEDENCE["cmp"]
    if isinstance(expr, ast.Arithmetic):
        return _PRECEDENCE["add" if expr.op in "+-" else "mul"]
    if isinstance(expr, ast.Negate):
        return _PRECEDENCE["neg"]
    return _PRECEDENCE["atom"]


def _wrap(expr, parent_prec):
    text = expr_text(expr)
    if _prec(expr) < parent_prec:
        return f"({text})"
    return text


def literal_text(value) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace("'", "\\'")
        return f"'{escaped}'"
    return str(value)


def expr_text(expr) -> str:
    if isinstance(expr, ast.Literal):
        return literal_text(expr.value)
    if isinstance(expr, ast.Var):
        return expr.name
    if isinstance(expr, ast.PropAccess):
        return f"{expr.var}.{expr.key}"
    if isinstance(expr, ast.LabelPredicate):
        return expr.var + "".join(f":{label}" for label in expr.labels)
    if isinstance(expr, ast.PatternPredicate):
        text = pattern_text(expr.pattern)
        return f"NOT {text}" if expr.negated else text
    if isinstance(expr, ast.Comparison):
        prec = _PRECEDENCE["cmp"]
        return f"{_wrap(expr.left, prec + 1)} {expr.op} {_wrap(expr.right, prec + 1)}"
    if isinstance(expr, ast.BoolOp):
        prec = _PRECEDENCE[expr.op]
        return f"{_wrap(expr.left, prec)} {expr.op.upper()} {_wrap(expr.right, prec + 1)}"
    if isinstance(expr, ast.Not):
        return f"NOT {_wrap(expr.operand, _PRECEDENCE['not'])}"
    if isinstance(expr, ast.Arithmetic):
        prec = _PRECEDENCE["add" if expr.op in "+-" else "mul"]
        return f"{_wrap(expr.left, prec)} {expr.op} {_wrap(expr.right, prec + 1)}"
    if isinstance(expr, ast.Negate):
        return f"-{_wrap(expr.operand, _PRECEDENCE['neg'])}"
    if isinstance(expr, ast.AggregateCall):
        return f"{expr.func}({expr_text(expr.argument)})"
    raise TypeError(f"cannot render {expr!r}")


def node_text(node: ast.NodePattern) -> str:
    var = "" if node.anonymous else node.var
    return "(" + var + "".join(f":{label}" for label in node.labels) + ")"


def rel_text(rel: ast.RelPattern) -> str:
    inner = "" if rel.anonymous else rel.var
    if rel.types:
        inner += ":" + "|".join(rel.types)
    if rel.range is not None:
        low, up = rel.range
        if (low, up) == (1, None):
            inner += "*"
        elif up is None:
            inner += f"*{low}.."
        elif low == up:
            inner += f"*{low}"
        else:
            inner += f"*{low}..{up}"
    body = f"[{inner}]" if inner else ""
    if rel.direction == "out":
        return f"-{body}->"
    if rel.direction == "in":
        return f"<-{body}-"
    return f"-{body}-"


def pattern_text(pattern: ast.Pattern) -> str:
    parts = [node_text(pattern.head)]
    for rel, node in pattern.hops:
        parts.append(rel_text(rel))
        parts.append(node_text(node))
    return "".join(parts)


def item_text(item: ast.ReturnItem) -> str:
    text = expr_text(item.expression)
    if item.alias:
        text += f" AS {item.alias}"
    return text


def query_text(query: ast.Query) -> str:
    parts = []
    for clause in query.clauses:
        if isinstance(clause, ast.Match):
            head = "OPTIONAL MATCH" if clause.optional else "MATCH"
            parts.append(head + " " + ", ".join(pattern_text(p) for p in clause.patterns))
            if clause.where is not None:
                parts.append("WHERE " + expr_text(clause.where))
        elif isinstance(clause, ast.With):
            head = "WITH DISTINCT" if clause.distinct else "WITH"
            parts.append(head + " " + ", ".join(item_text(i) for i in clause.items))
            if clause.where is not None:
                parts.append("WHERE " + expr_text(clause.where))
        elif isinstance(clause, ast.Unwind):
            parts.append(f"UNWIND {expr_text(clause.expression)} AS {clause.alias}")
        elif isinstance(clause, ast.Return):
            head = "RETURN DISTINCT" if clause.distinct else "RETURN"
            parts.append(head + " " + ", ".join(item_text(i) for i in clause.items))
        elif isinstance(clause, ast.OrderSkipLimit):
            if clause.keys:
                keys = ", ".join(
                    expr_text(k.expression) + ("" if k.ascending else " DESC")
                    for k in clause.keys)
                parts.append("ORDER BY " + keys)
            if clause.skip:
                parts.append(f"SKIP {clause.skip}")
            if clause.limit is not None:
                parts.append(f"LIMIT {clause.limit}")
        else:
            raise TypeError(f"cannot render clause {clause!r}")
    return " ".join(parts)
