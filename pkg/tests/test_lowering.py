"""Lowering tests: navigation elimination, property inference, flat schemas."""

import pytest

from corpus import CORPUS, PAPER_QUERIES
from retegraph import algebra as alg
from retegraph.compiler import compile_query
from retegraph.cypher import parse_query, validate
from retegraph.errors import InferenceError, SchemaMismatchError
from retegraph.graph import LABELS_KEY
from retegraph.lowering import (
    LoweringOptions,
    compute_flat_schemas,
    extract_properties,
    infer_required_properties,
    lower,
    lower_to_nra,
)


def gra_of(text):
    return compile_query(validate(parse_query(text)))


def names(schema):
    return [alg.attr_name(a) for a in schema]


class TestExpandElimination:
    def test_expand_over_get_vertices_merges_into_get_edges(self):
        nra = lower_to_nra(gra_of(PAPER_QUERIES["interests"]))
        scan = nra.child
        assert scan.kind == "GetEdges"
        assert scan.v_labels == {"Person"}
        assert scan.w_labels == {"Tag"}

    def test_second_hop_becomes_left_deep_join(self):
        nra = lower_to_nra(gra_of(
            "MATCH (a:Person)-[e:KNOWS]->(b)-[f:INTEREST]->(c) RETURN c"))
        join = nra.child
        assert join.kind == "NaturalJoin"
        assert join.left.kind == "GetEdges"
        assert join.right.kind == "GetEdges"
        assert join.right.v_labels == frozenset()  # source constraint already below

    def test_transitive_keeps_label_enforcing_join_by_default(self):
        nra = lower_to_nra(gra_of(PAPER_QUERIES["subclasses_of_art"]))
        outer = nra.child
        assert outer.kind == "NaturalJoin"
        assert outer.right.kind == "GetVertices"
        assert outer.right.labels == {"Class"}
        inner = outer.left
        assert inner.kind == "NaturalJoin"
        assert inner.right.kind == "TransitiveGetEdges"

    def test_label_preservation_elides_the_join(self):
        options = LoweringOptions(label_preservation=True)
        nra = lower_to_nra(gra_of(PAPER_QUERIES["subclasses_of_art"]), options)
        join = nra.child
        assert join.kind == "NaturalJoin"
        assert join.right.kind == "TransitiveGetEdges"
        assert join.left.kind == "Selection"

    def test_label_preservation_needs_identical_endpoint_labels(self):
        options = LoweringOptions(label_preservation=True)
        nra = lower_to_nra(gra_of(
            "MATCH (c:Class)-[es:SUBCLASS_OF*1..2]->(a:Tag) RETURN c"), options)
        trailing = [n for n in alg.iter_nodes(nra) if n.kind == "GetVertices"
                    and n.labels == {"Tag"}]
        assert trailing

    def test_no_navigation_operators_remain(self):
        for text in CORPUS.values():
            nra = lower_to_nra(gra_of(text))
            for node in alg.iter_nodes(nra):
                assert node.kind not in ("Expand", "TransitiveExpand")

    def test_idempotent(self):
        for text in CORPUS.values():
            once = lower_to_nra(gra_of(text))
            twice = lower_to_nra(once)
            assert alg.serialize_plan(twice) == alg.serialize_plan(once)


class TestExtractProperties:
    def test_selection_condition(self):
        plan = gra_of(PAPER_QUERIES["persons_over_25"])
        selection = plan.child
        assert extract_properties(selection) == {("p", "age")}

    def test_projection_list(self):
        plan = gra_of(PAPER_QUERIES["interests"])
        assert extract_properties(plan) == {("p", "name"), ("i", "level"),
                                            ("t", "topic")}

    def test_join_has_none(self):
        plan = gra_of(CORPUS["multi_pattern"])
        join = plan.child
        assert join.kind == "NaturalJoin"
        assert extract_properties(join) == set()

    def test_label_predicate_requires_label_column(self):
        plan = gra_of(CORPUS["where_label"])
        selection = [n for n in alg.iter_nodes(plan) if n.kind == "Selection"][0]
        assert extract_properties(selection) == {("q", LABELS_KEY)}

    def test_sort_keys_and_unwind(self):
        plan = gra_of("MATCH (p:Person) UNWIND p.speaks AS lang "
                      "RETURN lang, p.age ORDER BY p.age")
        unwinds = [n for n in alg.iter_nodes(plan) if n.kind == "Unwind"]
        assert extract_properties(unwinds[0]) == {("p", "speaks")}
        assert extract_properties(plan) == {("p", "age")}


class TestInference:
    def test_interests_scan_receives_projection_properties(self):
        nra = infer_required_properties(lower_to_nra(gra_of(
            "MATCH (p:Person)-[i:INTEREST]->(t:Tag) RETURN p.name")))
        scan = nra.child
        assert scan.kind == "GetEdges"
        assert scan.required_props >= {("p", "name")}

    def test_plan_without_properties_is_全_empty(self):
        nra = infer_required_properties(lower_to_nra(gra_of(
            "MATCH (a)-[e:KNOWS]->(b) RETURN a, b")))
        for node in alg.iter_nodes(nra):
            if node.required_props is not None:
                assert node.required_props == frozenset()

    def test_selection_props_reach_the_scan(self):
        nra = infer_required_properties(lower_to_nra(gra_of(
            PAPER_QUERIES["persons_over_25"])))
        scan = [n for n in alg.iter_nodes(nra) if n.kind == "GetVertices"][0]
        assert scan.required_props == {("p", "age"), ("p", "name")}

    def test_binary_split_left_preference(self):
        nra = infer_required_properties(lower_to_nra(gra_of(
            "MATCH (a:Person)-[e:KNOWS]->(b)-[f:KNOWS]->(c) "
            "RETURN a.name, b.name, c.name")))
        join = nra.child
        left_scan, right_scan = join.left, join.right
        # b is bound by both sides; its property lands left
        assert ("b", "name") in left_scan.required_props
        assert ("b", "name") not in right_scan.required_props
        assert right_scan.required_props == {("c", "name")}

    def test_accumulator_grows_toward_leaves(self):
        # along each unary chain, recorded sets only grow from root to leaf
        for text in CORPUS.values():
            nra = infer_required_properties(lower_to_nra(gra_of(text)))

            def walk(node, above):
                if node.required_props is not None:
                    if above is not None:
                        assert node.required_props >= above
                    above = node.required_props
                else:
                    above = None if above is None \
                        else above | extract_properties(node)
                if len(node.children) == 2:
                    for child in node.children:
                        walk(child, None)  # chain broken at binary split
                elif node.children:
                    walk(node.children[0], above)

            walk(nra, frozenset())


class TestFlatSchemas:
    def test_get_edges_flat_schema_matches_quadruple(self):
        fra = lower(gra_of("MATCH (p:Person)-[i:INTEREST]->(t:Tag) "
                           "RETURN p.name"))
        scan = fra.child
        assert names(scan.flat_schema) == ["p", "i", "t", "p.name"]

    def test_get_vertices_without_props(self):
        fra = lower(gra_of("MATCH (v) RETURN v"))
        assert names(fra.child.flat_schema) == ["v"]

    def test_property_columns_sorted_lexicographically(self):
        fra = lower(gra_of("MATCH (p:Person)-[i:INTEREST]->(t:Tag) "
                           "RETURN t.topic, p.name, i.level"))
        scan = fra.child
        assert names(scan.flat_schema) == ["p", "i", "t", "i.level", "p.name",
                                           "t.topic"]

    def test_join_schema_concatenates_minus_shared(self):
        fra = lower(gra_of(
            "MATCH (a:Person)-[e:KNOWS]->(b)-[f:KNOWS]->(c) RETURN a.name, c"))
        join = fra.child
        assert names(join.flat_schema) == ["a", "e", "b", "a.name", "f", "c"]

    def test_projection_carries_required_props_for_ancestors(self):
        # the inference pass records the full accumulated set at a projection
        # (its own extracted properties included), so the aliased p.age also
        # reappears as a carried column
        fra = lower(gra_of("MATCH (p:Person) RETURN p, p.age AS a "
                           "ORDER BY p.name"))
        projection = fra.child
        assert projection.kind == "Projection"
        assert names(projection.flat_schema) == ["p", "a", "p.age", "p.name"]

    def test_unwind_appends_alias(self):
        fra = lower(gra_of(CORPUS["unwind_bag"]))
        unwind = [n for n in alg.iter_nodes(fra) if n.kind == "Unwind"][0]
        assert names(unwind.flat_schema)[-1] == "lang"

    def test_union_schema_mismatch_detected(self):
        left = alg.GetVertices("v", frozenset({"Person"}))
        right = alg.GetEdges("v", "e", "w")
        union = alg.Union(left, right)
        infer_required_properties(union)
        with pytest.raises(SchemaMismatchError):
            compute_flat_schemas(union)

    def test_union_agreeing_children(self):
        union = alg.Union(alg.GetVertices("v"), alg.GetVertices("v"))
        infer_required_properties(union)
        compute_flat_schemas(union)
        assert names(union.flat_schema) == ["v"]

    def test_every_expression_column_is_locally_available(self):
        # after inference no operator needs the store: all property accesses
        # resolve against the child's flat schema (network build checks this)
        from retegraph.engine.network import Network
        for text in CORPUS.values():
            Network(lower(gra_of(text)))

    def test_renaming_projection_defeats_inference(self):
        # the accumulator pushes (q, name) through the projection unchanged;
        # nothing below binds q, so building the runtime surfaces the gap
        from retegraph.engine.network import Network
        fra = lower(gra_of("MATCH (p:Person) WITH p AS q RETURN q.name"))
        with pytest.raises(InferenceError):
            Network(fra)

    def test_nra_serialization_has_annotations_only_after_inference(self):
        plan = lower_to_nra(gra_of(PAPER_QUERIES["interests"]))
        text = alg.serialize_plan(plan, annotated=True)
        assert "req:" not in text
        lower(gra_of(PAPER_QUERIES["interests"]))
        fra_text = alg.serialize_plan(
            lower(gra_of(PAPER_QUERIES["interests"])), annotated=True)
        assert "req:" in fra_text and "flat:" in fra_text
