"""Plan-shape tests: the four worked example queries compile to the plan
shapes the construct mapping dictates, and compiled trees are schema-sound."""

import pytest

from corpus import CORPUS, PAPER_QUERIES
from retegraph import algebra as alg
from retegraph.compiler import compile_query, expr_vars
from retegraph.cypher import parse_query, validate


def compile_text(text):
    return compile_query(validate(parse_query(text)))


def kinds_down(plan):
    """Kind names along the unary spine plus joins, preorder."""
    out = []

    def walk(node):
        out.append(node.kind)
        for child in node.children:
            walk(child)

    walk(plan)
    return out


class TestWorkedQueries:
    def test_persons_over_25(self):
        plan = compile_text(PAPER_QUERIES["persons_over_25"])
        assert kinds_down(plan) == ["Projection", "Selection", "GetVertices"]
        assert plan.child.child.labels == {"Person"}

    def test_interests(self):
        plan = compile_text(PAPER_QUERIES["interests"])
        assert kinds_down(plan) == ["Projection", "Expand", "GetVertices"]
        expand = plan.child
        assert expand.direction == "out"
        assert expand.types == {"INTEREST"}
        assert expand.dst_labels == {"Tag"}

    def test_transitive_anchors_at_filtered_endpoint(self):
        plan = compile_text(PAPER_QUERIES["subclasses_of_art"])
        assert kinds_down(plan) == ["Projection", "TransitiveExpand",
                                    "Selection", "GetVertices"]
        trans = plan.child
        assert trans.src == "a" and trans.dst == "c"
        assert trans.direction == "in"
        assert trans.reverse_path
        assert (trans.low, trans.up) == (1, None)
        assert plan.child.child.child.var == "a"

    def test_optional_interests(self):
        plan = compile_text(PAPER_QUERIES["optional_interests"])
        assert plan.kind == "Projection"
        outer = plan.child
        assert outer.kind == "LeftOuterJoin"
        assert outer.left.kind == "GetVertices"
        assert outer.left.labels == {"Person"}
        assert kinds_down(outer.right) == ["Expand", "GetVertices"]

    def test_top_language(self):
        plan = compile_text(PAPER_QUERIES["top_language"])
        assert kinds_down(plan) == ["SortAndTop", "Grouping", "Unwind",
                                    "Projection", "GetVertices"]
        group = plan.child
        crits = [a for e, a in group.items
                 if not hasattr(e, "func")]
        assert [alg.attr_name(a) for a in crits] == ["lang"]


class TestMapping:
    def test_leading_optional_uses_unit(self):
        plan = compile_text("OPTIONAL MATCH (p:Person) RETURN p")
        outer = plan.child
        assert outer.kind == "LeftOuterJoin"
        assert outer.left.kind == "SingletonUnit"

    def test_return_distinct_adds_dedup(self):
        plan = compile_text("MATCH (p:Person) RETURN DISTINCT p.name")
        assert kinds_down(plan)[:2] == ["DedupAll", "Projection"]

    def test_distinct_over_aggregation(self):
        plan = compile_text("MATCH (p) RETURN DISTINCT p, count(p) AS c")
        assert kinds_down(plan)[:2] == ["DedupAll", "Grouping"]

    def test_where_pattern_semijoin(self):
        plan = compile_text(CORPUS["where_pattern"])
        assert plan.child.kind == "Semijoin"

    def test_where_not_pattern_antijoin(self):
        plan = compile_text(CORPUS["where_not_pattern"])
        assert plan.child.kind == "Antijoin"

    def test_where_label_predicate_is_selection(self):
        plan = compile_text(CORPUS["where_label"])
        selections = [n for n in alg.iter_nodes(plan) if n.kind == "Selection"]
        assert len(selections) == 1

    def test_multiple_patterns_natural_join(self):
        plan = compile_text(CORPUS["multi_pattern"])
        assert any(n.kind == "NaturalJoin" for n in alg.iter_nodes(plan))

    def test_disjoint_patterns_become_product(self):
        plan = compile_text("MATCH (a:Person), (b:Tag) RETURN a, b")
        join = plan.child
        assert join.kind == "NaturalJoin"
        shared = set(join.left.nested_schema) & set(join.right.nested_schema)
        assert shared == set()

    def test_single_bound_node_pattern_is_identity(self):
        plan = compile_text("MATCH (p:Person) MATCH (p) RETURN p")
        assert kinds_down(plan) == ["Projection", "GetVertices"]

    def test_bound_pattern_joins_on_shared_variable(self):
        plan = compile_text(
            "MATCH (p:Person) MATCH (p)-[i:INTEREST]->(t) RETURN t")
        join = plan.child
        assert join.kind == "NaturalJoin"
        assert alg.ElementAttr("p") in join.right.nested_schema

    def test_alias_projection(self):
        plan = compile_text("MATCH (p:Person) RETURN p.name AS n")
        assert [alg.attr_name(a) for a in plan.nested_schema] == ["n"]

    def test_sort_and_top_is_single_root(self):
        plan = compile_text(CORPUS["order_skip_limit"])
        assert plan.kind == "SortAndTop"
        assert plan.skip == 1 and plan.limit == 2


class TestSelectionPushdown:
    def test_pushed_below_expand(self):
        plan = compile_text(
            "MATCH (p:Person)-[i:INTEREST]->(t:Tag) WHERE p.age > 25 "
            "RETURN t")
        assert kinds_down(plan) == ["Projection", "Expand", "Selection",
                                    "GetVertices"]

    def test_stays_above_when_spanning(self):
        plan = compile_text(
            "MATCH (p:Person)-[i:INTEREST]->(t:Tag) WHERE p.age > i.level "
            "RETURN t")
        assert kinds_down(plan) == ["Projection", "Selection", "Expand",
                                    "GetVertices"]

    def test_never_pushed_into_optional_side(self):
        plan = compile_text(
            "MATCH (p:Person) OPTIONAL MATCH (p)-[i:INTEREST]->(t:Tag) "
            "WITH p, t WHERE t.topic = 'Art' RETURN p")
        # the selection lives above the outer join, not inside its right input
        outer = [n for n in alg.iter_nodes(plan) if n.kind == "LeftOuterJoin"][0]
        assert all(n.kind != "Selection" for n in alg.iter_nodes(outer.right))


class TestSchemaSoundness:
    @pytest.mark.parametrize("name", sorted(CORPUS))
    def test_operator_expressions_see_their_child_schema(self, name):
        plan = compile_text(CORPUS[name])

        def exprs_of(node):
            if isinstance(node, alg.Selection):
                return [node.condition]
            if isinstance(node, (alg.Projection, alg.Grouping)):
                return [e for e, _a in node.items]
            if isinstance(node, alg.Unwind):
                return [node.expression]
            if isinstance(node, alg.SortAndTop):
                return [e for e, _asc in node.keys]
            return []

        from retegraph.cypher import ast
        from retegraph.cypher.pretty import expr_text

        def unresolved(expr, names, displays):
            # a property access may also resolve as a whole to a projected
            # column of the same name (ORDER BY p.name after RETURN p.name)
            if isinstance(expr, (ast.PropAccess, ast.AggregateCall)) \
                    and expr_text(expr) in displays:
                return set()
            return expr_vars(expr) - names

        for node in alg.iter_nodes(plan):
            if not node.children:
                continue
            child_names = set()
            child_displays = set()
            for child in node.children:
                child_names |= set(child.schema_names())
                child_displays |= {alg.attr_name(a) for a in child.nested_schema}
            for expr in exprs_of(node):
                missing = unresolved(expr, child_names, child_displays)
                assert not missing, (node.kind, missing)

    def test_expand_sources_are_bound_below(self):
        for text in CORPUS.values():
            plan = compile_text(text)
            for node in alg.iter_nodes(plan):
                if isinstance(node, (alg.Expand, alg.TransitiveExpand)):
                    assert node.src in node.child.schema_names()

    def test_sort_and_top_only_at_root(self):
        for text in CORPUS.values():
            plan = compile_text(text)
            for node in alg.iter_nodes(plan):
                if isinstance(node, alg.SortAndTop):
                    assert node is plan
