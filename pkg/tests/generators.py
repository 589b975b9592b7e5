"""Seeded random graphs, queries, and delta sequences for oracle trials.

Float property values are dyadic rationals (multiples of 0.25) so running
sums in the incremental aggregates stay bit-exact against batch recompute.
Transitive query templates keep bounds small, and unbounded ranges are only
generated for sparse graphs, keeping edge-distinct path counts tame.
"""

import random

from retegraph.graph import GraphDelta
from retegraph.values import Bag

LABELS = ("Person", "Tag", "Class")
TYPES = ("KNOWS", "INTEREST", "SUBCLASS_OF")
NAMES = ("Alice", "Bob", "Carol", "Dan", "Eve", "Frank")
LANGS = ("en", "fr", "de", "hu")


def random_property(rng, key):
    if key == "name":
        return rng.choice(NAMES)
    if key == "age":
        return rng.randint(15, 70)
    if key == "score":
        return rng.randrange(-4000, 4000) / 4.0
    if key == "speaks":
        return Bag(rng.choice(LANGS) for _ in range(rng.randint(0, 3)))
    if key == "flag":
        return rng.random() < 0.5
    if key == "level":
        return rng.randint(0, 9)
    raise KeyError(key)


VERTEX_KEYS = ("name", "age", "score", "speaks", "flag")


def random_vertex_props(rng):
    return {key: random_property(rng, key)
            for key in VERTEX_KEYS if rng.random() < 0.6}


def random_graph_doc(rng, max_vertices=20, max_edges=40):
    n_vertices = rng.randint(2, max_vertices)
    vertices = []
    for i in range(n_vertices):
        labels = rng.sample(LABELS, k=rng.choice((0, 1, 1, 1, 2)))
        vertices.append({"id": f"v{i}", "labels": labels,
                         "properties": {k: _to_json(v) for k, v in
                                        random_vertex_props(rng).items()}})
    n_edges = rng.randint(0, max_edges)
    edges = []
    for i in range(n_edges):
        src = f"v{rng.randrange(n_vertices)}"
        trg = f"v{rng.randrange(n_vertices)}"
        props = {}
        if rng.random() < 0.5:
            props["level"] = random_property(rng, "level")
        edges.append({"id": f"e{i}", "src": src, "trg": trg,
                      "type": rng.choice(TYPES), "properties": props})
    return {"vertices": vertices, "edges": edges}


def _to_json(value):
    if isinstance(value, Bag):
        return {"bag": list(value)}
    return value


# --- query templates -----------------------------------------------------------

def _t_filter(rng):
    label = rng.choice(LABELS)
    threshold = rng.randint(20, 50)
    return (f"MATCH (p:{label}) WHERE p.age > {threshold} RETURN p, p.name",
            {"filter"})


def _t_arith(rng):
    return ("MATCH (p:Person) WHERE p.age * 2 >= 60 RETURN p.name, p.age - 1 AS adj",
            {"filter", "arith"})


def _t_hop(rng):
    t = rng.choice(TYPES)
    l1, l2 = rng.choice(LABELS), rng.choice(LABELS)
    return (f"MATCH (p:{l1})-[e:{t}]->(q:{l2}) RETURN p.name, e, q", {"join"})


def _t_two_hop(rng):
    t1, t2 = rng.choice(TYPES), rng.choice(TYPES)
    return (f"MATCH (p)-[e1:{t1}]->(q), (q)-[e2:{t2}]->(r) RETURN p, q, r",
            {"join"})


def _t_in_dir(rng):
    t = rng.choice(TYPES)
    return (f"MATCH (p)<-[e:{t}]-(q) RETURN p, q", {"in_dir", "join"})


def _t_undirected(rng):
    t = rng.choice(TYPES)
    return (f"MATCH (p)-[e:{t}]-(q) RETURN p, e, q", {"undirected", "join"})


def _t_multi_type(rng):
    t1, t2 = rng.sample(TYPES, 2)
    return (f"MATCH (p)-[e:{t1}|{t2}]->(q) RETURN p, e, q", {"join"})


def _t_optional(rng):
    label = rng.choice(LABELS)
    t = rng.choice(TYPES)
    return (f"MATCH (p:{label}) OPTIONAL MATCH (p)-[e:{t}]->(q) RETURN p, q",
            {"outer"})


def _t_optional_leading(rng):
    label = rng.choice(LABELS)
    return (f"OPTIONAL MATCH (p:{label}) RETURN p", {"outer"})


def _t_semi(rng):
    label = rng.choice(LABELS)
    t = rng.choice(TYPES)
    return (f"MATCH (p:{label}) WHERE (p)-[:{t}]->() RETURN p", {"semi"})


def _t_anti(rng):
    label = rng.choice(LABELS)
    t = rng.choice(TYPES)
    return (f"MATCH (p:{label}) WHERE NOT (p)-[:{t}]->() RETURN p", {"anti"})


def _t_distinct(rng):
    t = rng.choice(TYPES)
    return (f"MATCH (p)-[e:{t}]->(q) RETURN DISTINCT q", {"distinct"})


def _t_unwind(rng):
    return ("MATCH (p:Person) UNWIND p.speaks AS lang RETURN p, lang", {"unwind"})


def _t_group_count(rng):
    t = rng.choice(TYPES)
    return (f"MATCH (p)-[e:{t}]->(q) RETURN q, count(e) AS c", {"group"})


def _t_group_agg(rng):
    func = rng.choice(("min", "max", "sum", "avg", "collect"))
    key = rng.choice(("age", "score"))
    label = rng.choice(LABELS)
    return (f"MATCH (p:{label}) RETURN {func}(p.{key}) AS m", {"group"})


def _t_group_by_label(rng):
    t = rng.choice(TYPES)
    func = rng.choice(("min", "max", "collect"))
    return (f"MATCH (p)-[e:{t}]->(q) RETURN p, {func}(q.age) AS m", {"group"})


def _t_unwind_group(rng):
    return ("MATCH (p:Person) UNWIND p.speaks AS lang "
            "RETURN lang, count(p) AS sks ORDER BY sks DESC, lang LIMIT 2",
            {"unwind", "group", "sort"})


def _t_sort(rng):
    skip = rng.randint(0, 2)
    limit = rng.randint(0, 4)
    return (f"MATCH (p:Person) RETURN p.name, p.age ORDER BY p.age DESC, p.name "
            f"SKIP {skip} LIMIT {limit}", {"sort"})


def _t_label_pred(rng):
    t = rng.choice(TYPES)
    label = rng.choice(LABELS)
    return (f"MATCH (p)-[e:{t}]->(q) WHERE q:{label} RETURN p, q",
            {"label_pred"})


def _t_with(rng):
    threshold = rng.randint(20, 50)
    return (f"MATCH (p:Person) WITH p WHERE p.age > {threshold} RETURN p.name",
            {"with", "filter"})


def _t_with_group(rng):
    t = rng.choice(TYPES)
    return (f"MATCH (p)-[e:{t}]->(q) WITH q, count(p) AS n WHERE n > 1 "
            f"RETURN q, n", {"with", "group", "filter"})


def _t_transitive(rng, sparse):
    t = rng.choice(TYPES)
    low = rng.choice((0, 1, 1, 2))
    if sparse and rng.random() < 0.4:
        spec = f"*{low}.."
    else:
        up = low + rng.randint(0, 3 - min(low, 3)) if low <= 3 else low
        up = max(up, low)
        spec = f"*{low}..{up}"
    arrow = rng.choice(("-[es:{t}{spec}]->", "<-[es:{t}{spec}]-", "-[es:{t}{spec}]-"))
    hop = arrow.format(t=t, spec=spec)
    return (f"MATCH (p){hop}(q) RETURN p, q, es", {"transitive"})


def _t_transitive_filtered(rng, sparse):
    t = rng.choice(TYPES)
    label = rng.choice(LABELS)
    name = rng.choice(NAMES)
    return (f"MATCH (c:{label})-[es:{t}*1..3]->(a:{label}) "
            f"WHERE a.name = '{name}' RETURN c, es", {"transitive", "filter"})


TEMPLATES = (
    _t_filter, _t_arith, _t_hop, _t_two_hop, _t_in_dir, _t_undirected,
    _t_multi_type, _t_optional, _t_optional_leading, _t_semi, _t_anti,
    _t_distinct, _t_unwind, _t_group_count, _t_group_agg, _t_group_by_label,
    _t_unwind_group, _t_sort, _t_label_pred, _t_with, _t_with_group,
)

ALL_TAGS = frozenset({
    "filter", "arith", "join", "in_dir", "undirected", "outer", "semi", "anti",
    "distinct", "unwind", "group", "sort", "label_pred", "with", "transitive",
})


def random_query(rng, sparse=False):
    """One query text plus its operator-kind tags."""
    if rng.random() < 0.25:
        template = rng.choice((_t_transitive, _t_transitive_filtered))
        return template(rng, sparse)
    return rng.choice(TEMPLATES)(rng)


# --- deltas ----------------------------------------------------------------------

def random_delta(rng, store):
    """A valid delta against the store's current state."""
    live_vertices = sorted(r.external_id for r in store.vertices.values())
    live_edges = sorted(r.external_id for r in store.edges.values())
    choices = ["add_vertex"]
    if len(live_vertices) >= 1:
        choices += ["add_edge"] * 4 + ["set_vprop"] * 3 + ["remove_vprop"]
        choices += ["remove_vertex"]
    if live_edges:
        choices += ["remove_edge"] * 3 + ["set_eprop"]
    op = rng.choice(choices)

    if op == "add_vertex":
        vid = f"x{len(store._vertex_refs)}"
        labels = rng.sample(LABELS, k=rng.choice((0, 1, 1, 2)))
        return GraphDelta.add_vertex(vid, labels, random_vertex_props(rng))
    if op == "add_edge":
        eid = f"y{len(store._edge_refs)}"
        src = rng.choice(live_vertices)
        trg = rng.choice(live_vertices)
        props = {"level": random_property(rng, "level")} if rng.random() < 0.5 else {}
        return GraphDelta.add_edge(eid, src, trg, rng.choice(TYPES), props)
    if op == "remove_edge":
        return GraphDelta.remove_edge(rng.choice(live_edges))
    if op == "remove_vertex":
        vid = rng.choice(live_vertices)
        return GraphDelta.remove_vertex(vid, detach=True)
    if op == "set_vprop":
        vid = rng.choice(live_vertices)
        key = rng.choice(VERTEX_KEYS)
        return GraphDelta.set_property(vid, key, random_property(rng, key))
    if op == "remove_vprop":
        vid = rng.choice(live_vertices)
        return GraphDelta.remove_property(vid, rng.choice(VERTEX_KEYS))
    eid = rng.choice(live_edges)
    return GraphDelta.set_property(eid, "level", random_property(rng, "level"))


def make_rng(seed):
    return random.Random(seed)
