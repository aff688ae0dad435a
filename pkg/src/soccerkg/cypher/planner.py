"""Semantic checks and greedy join ordering.

A plan is a sequence of steps over the pattern's variables:

* ``Scan`` binds a fresh node variable from an index probe;
* ``Expand`` walks one relationship pattern from an already bound end.

The starting point is the most selective node pattern: an inline property
map probed through the property index beats a label scan, which beats a
scan of every node. Disconnected patterns produce a cross product and a
warning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable

from ..graph import EDGE_TYPES, NODE_LABELS, Graph
from ..textdist import closest
from .ast import (
    AGGREGATES,
    Expr,
    FuncCall,
    Prop,
    Query,
    Var,
    contains_aggregate,
    walk,
)
from .printer import expr_text

#: Property keys the builder may emit; accepted even when absent from a graph.
DOMAIN_KEYS = frozenset(
    """name league season game_id home_team away_team score score_home score_away date
    venue referee round home_coach away_coach half clock game_time visibility kind type
    time subject_player detail shirt_number lineup_role side coach""".split()
)


class SemanticError(ValueError):
    def __init__(self, message: str, suggestions: list[str] | None = None):
        self.suggestions = suggestions or []
        hint = f" (did you mean {', '.join(self.suggestions)}?)" if self.suggestions else ""
        super().__init__(message + hint)


@dataclass(frozen=True)
class NodeSlot:
    key: Hashable
    constraints: tuple[tuple[str | None, tuple], ...]  # (label, props) per occurrence


@dataclass(frozen=True)
class RelSlot:
    key: Hashable
    etype: str
    direction: str
    props: tuple
    left: Hashable
    right: Hashable


@dataclass(frozen=True)
class Scan:
    var: Hashable
    probe: tuple  # ("prop", label, key, value) | ("label", label) | ("all",)


@dataclass(frozen=True)
class Expand:
    rel: int
    src: Hashable
    dst: Hashable
    dst_bound: bool


@dataclass
class Plan:
    query: Query
    nodes: dict[Hashable, NodeSlot]
    rels: list[RelSlot]
    steps: list
    var_kinds: dict[str, str]  # named variable -> "node" | "rel"
    columns: list[str]
    order: list[tuple]  # ("col", index, desc) | ("expr", Expr, desc)
    cross_product: bool = False
    warnings: list[str] = field(default_factory=list)

    def describe(self) -> str:
        lines = []
        for s in self.steps:
            if isinstance(s, Scan):
                lines.append(f"Scan {_show(s.var)} via {s.probe[0]} {s.probe[1:]}")
            else:
                r = self.rels[s.rel]
                lines.append(f"Expand {_show(s.src)} -[:{r.etype}]- {_show(s.dst)}{' (bound)' if s.dst_bound else ''}")
        return "\n".join(lines)


def _show(key: Hashable) -> str:
    return key if isinstance(key, str) else f"_anon{key[1]}"


@dataclass
class GraphSchema:
    """Vocabulary and cardinalities the planner needs from a graph."""

    graph: Graph
    labels: frozenset[str]
    etypes: frozenset[str]
    keys: frozenset[str]

    @classmethod
    def of(cls, g: Graph) -> "GraphSchema":
        return cls(
            graph=g,
            labels=frozenset(g.labels()) | frozenset(NODE_LABELS),
            etypes=frozenset(g.edge_types()) | frozenset(EDGE_TYPES),
            keys=frozenset(g.property_keys()) | DOMAIN_KEYS,
        )

    def estimate(self, slot: NodeSlot) -> int:
        g = self.graph
        best = g.num_nodes()
        for label, props in slot.constraints:
            if label is None:
                continue
            best = min(best, g.label_count(label))
            for k, lit in props:
                best = min(best, g.prop_count(label, k, lit.value))
        return best

    def probe(self, slot: NodeSlot) -> tuple:
        g = self.graph
        best: tuple = ("all",)
        best_n = g.num_nodes() + 1
        for label, props in slot.constraints:
            if label is None:
                continue
            for k, lit in props:
                n = g.prop_count(label, k, lit.value)
                if n < best_n or best[0] != "prop":
                    best, best_n = ("prop", label, k, lit.value), n
            if best[0] != "prop" and g.label_count(label) < best_n:
                best, best_n = ("label", label), g.label_count(label)
        return best


def _check_name(kind: str, name: str, known: frozenset[str]) -> None:
    if name not in known:
        raise SemanticError(f"unknown {kind} {name!r}", closest(name, sorted(known), 2)[:3])


def plan(q: Query, schema: GraphSchema | Graph, strategy: str = "greedy") -> Plan:
    """Validate ``q`` against ``schema`` and order its pattern.

    ``strategy="worst"`` picks the least selective choice at every step;
    it exists so tests can check that plan choice never changes results.
    """
    if isinstance(schema, Graph):
        schema = GraphSchema.of(schema)
    var_kinds: dict[str, str] = {}
    occurrences: dict[Hashable, list] = {}
    order_seen: list[Hashable] = []
    rels: list[RelSlot] = []
    anon = 0

    def node_key(var: str | None) -> Hashable:
        nonlocal anon
        if var is None:
            anon += 1
            return ("anon", anon)
        if var_kinds.setdefault(var, "node") != "node":
            raise SemanticError(f"variable {var!r} is used as both node and relationship")
        return var

    for path in q.patterns:
        keys = []
        for n in path.nodes:
            if n.label is not None:
                _check_name("label", n.label, schema.labels)
            for k, _ in n.props:
                _check_name("property key", k, schema.keys)
            key = node_key(n.var)
            if key not in occurrences:
                occurrences[key] = []
                order_seen.append(key)
            occurrences[key].append((n.label, n.props))
            keys.append(key)
        for i, r in enumerate(path.rels):
            _check_name("relationship type", r.etype, schema.etypes)
            for k, _ in r.props:
                _check_name("property key", k, schema.keys)
            if r.var is None:
                anon += 1
                rkey: Hashable = ("anon", anon)
            else:
                if var_kinds.get(r.var) == "node":
                    raise SemanticError(f"variable {r.var!r} is used as both node and relationship")
                if r.var in var_kinds:
                    raise SemanticError(f"relationship variable {r.var!r} is bound more than once")
                var_kinds[r.var] = "rel"
                rkey = r.var
            rels.append(RelSlot(rkey, r.etype, r.direction, r.props, keys[i], keys[i + 1]))

    nodes = {k: NodeSlot(k, tuple(occurrences[k])) for k in order_seen}
    columns = _check_expressions(q, var_kinds, schema)
    order = _resolve_order(q, columns)
    order_scope = set(var_kinds) | {i.alias for i in q.items if i.alias is not None}
    for kind, e, _ in order:
        if kind == "expr":
            for x in walk(e):
                name = x.name if isinstance(x, Var) else x.var if isinstance(x, Prop) else None
                if name is not None and name not in order_scope:
                    raise SemanticError(f"variable {name!r} is not defined (ORDER BY)", closest(name, sorted(order_scope), 2))
                if isinstance(x, Prop):
                    _check_name("property key", x.key, schema.keys)
    steps, cross = _order_steps(nodes, order_seen, rels, schema, worst=(strategy == "worst"))
    warnings = ["pattern is disconnected; evaluating a cross product"] if cross else []
    return Plan(q, nodes, rels, steps, var_kinds, columns, order, cross, warnings)


def _check_expressions(q: Query, var_kinds: dict[str, str], schema: GraphSchema) -> list[str]:
    def check(e: Expr, scope: set[str], where: str, allow_agg: bool) -> None:
        for x in walk(e):
            if isinstance(x, Var) and x.name not in scope:
                raise SemanticError(f"variable {x.name!r} is not defined ({where})", closest(x.name, sorted(scope), 2))
            if isinstance(x, Prop):
                if x.var not in scope:
                    raise SemanticError(f"variable {x.var!r} is not defined ({where})", closest(x.var, sorted(scope), 2))
                _check_name("property key", x.key, schema.keys)
            if isinstance(x, FuncCall):
                if x.name not in AGGREGATES:
                    raise SemanticError(f"unknown function {x.name!r}", closest(x.name, sorted(AGGREGATES), 2))
                if not x.star and len(x.args) != 1:
                    raise SemanticError(f"{x.name}() takes exactly one argument")
                if not allow_agg:
                    raise SemanticError(f"aggregate {x.name}() is not allowed in {where}")
                if any(contains_aggregate(a) for a in x.args):
                    raise SemanticError("aggregates cannot be nested")

    scope = set(var_kinds)
    if q.where is not None:
        check(q.where, scope, "WHERE", allow_agg=False)
    columns = []
    for item in q.items:
        e = item.expr
        agg_top = isinstance(e, FuncCall) and e.is_aggregate
        check(e, scope, "RETURN", allow_agg=agg_top)
        if agg_top:
            for a in e.args:
                check(a, scope, "RETURN", allow_agg=False)
        columns.append(item.alias if item.alias is not None else expr_text(e))
    dupes = sorted({c for c in columns if columns.count(c) > 1})
    if dupes:
        raise SemanticError(f"duplicate result column name(s): {', '.join(dupes)}")
    return columns


def _resolve_order(q: Query, columns: list[str]) -> list[tuple]:
    aggregating = q.has_aggregates
    aliases = {item.alias: i for i, item in enumerate(q.items) if item.alias is not None}
    out = []
    for s in q.order_by:
        e = s.expr
        if isinstance(e, Var) and e.name in aliases:
            out.append(("col", aliases[e.name], s.descending))
            continue
        match = next((i for i, item in enumerate(q.items) if item.expr == e), None)
        if match is not None:
            out.append(("col", match, s.descending))
            continue
        if aggregating or q.distinct:
            raise SemanticError(
                f"ORDER BY {expr_text(e)} must name a returned column when RETURN aggregates or uses DISTINCT"
            )
        if contains_aggregate(e):
            raise SemanticError("aggregates are not allowed in ORDER BY")
        out.append(("expr", e, s.descending))
    return out


def _order_steps(nodes, order_seen, rels, schema: GraphSchema, worst: bool):
    est = {k: schema.estimate(slot) for k, slot in nodes.items()}
    rank = {k: i for i, k in enumerate(order_seen)}

    def pick(keys):
        if worst:
            return max(keys, key=lambda k: (est[k], -rank[k]))
        return min(keys, key=lambda k: (est[k], rank[k]))

    bound: set = set()
    remaining = list(range(len(rels)))
    steps: list = []
    cross = False
    while len(bound) < len(nodes) or remaining:
        touching = [i for i in remaining if rels[i].left in bound or rels[i].right in bound]
        if touching:
            closed = [i for i in touching if rels[i].left in bound and rels[i].right in bound]
            if closed and not worst:
                i = closed[0]
            else:
                def other(i):
                    r = rels[i]
                    return r.right if r.left in bound else r.left

                if worst:
                    i = max(touching, key=lambda i: (est[other(i)] if other(i) not in bound else -1, -i))
                else:
                    i = min(touching, key=lambda i: (est[other(i)], i))
            r = rels[i]
            src = r.left if r.left in bound else r.right
            dst = r.right if src == r.left else r.left
            steps.append(Expand(i, src, dst, dst in bound))
            bound.add(dst)
            remaining.remove(i)
            continue
        if steps:
            cross = True
        start = pick([k for k in order_seen if k not in bound])
        probe = ("all",) if worst else schema.probe(nodes[start])
        steps.append(Scan(start, probe))
        bound.add(start)
    return steps, cross

