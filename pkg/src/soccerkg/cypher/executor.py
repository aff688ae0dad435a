"""Plan-driven backtracking matcher and result projection.

Matching follows relationship-uniqueness semantics: within one MATCH no
edge is bound twice, while nodes may repeat. Comparisons use three-valued
logic (see docs/grammar.md); WHERE keeps a row only when its predicate is
exactly true.
"""

from __future__ import annotations

import math
import time
from typing import Any, Iterator

from ..graph import Graph
from .ast import (
    And,
    Case,
    Compare,
    Expr,
    FuncCall,
    IsNull,
    ListLit,
    Literal,
    Not,
    Or,
    Prop,
    Query,
    Var,
)
from .planner import Expand, GraphSchema, Plan, Scan, plan as make_plan
from .result import ResultTable, edge_value, hash_key, node_value, sort_key


def _is_num(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def equal(a: Any, b: Any) -> bool | None:
    """Equality with null propagation; values of different types give null."""
    if a is None or b is None:
        return None
    if _is_num(a) and _is_num(b):
        return a == b
    if type(a) is not type(b) and not (isinstance(a, (list, tuple)) and isinstance(b, (list, tuple))):
        return None
    if isinstance(a, (list, tuple)):
        if len(a) != len(b):
            return False
        result: bool | None = True
        for x, y in zip(a, b):
            r = equal(x, y)
            if r is False:
                return False
            if r is None:
                result = None
        return result
    if hasattr(a, "id") and hasattr(b, "id"):
        return a.id == b.id
    return a == b


def compare(op: str, a: Any, b: Any) -> bool | None:
    if op == "IN":
        if not isinstance(b, (list, tuple)):
            return None
        if not b:
            return False
        if a is None:
            return None
        seen_null = False
        for x in b:
            r = equal(a, x)
            if r is True:
                return True
            if r is None:
                seen_null = True
        return None if seen_null else False
    if a is None or b is None:
        return None
    if op == "=":
        return equal(a, b)
    if op == "<>":
        r = equal(a, b)
        return None if r is None else not r
    if op in ("CONTAINS", "STARTS_WITH", "ENDS_WITH"):
        if not (isinstance(a, str) and isinstance(b, str)):
            return None
        if op == "CONTAINS":
            return b in a
        return a.startswith(b) if op == "STARTS_WITH" else a.endswith(b)
    comparable = (_is_num(a) and _is_num(b)) or (
        type(a) is type(b) and isinstance(a, (str, bool))
    )
    if not comparable:
        return None
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(f"unknown operator {op}")


def _truth(v: Any) -> bool | None:
    return v if isinstance(v, bool) else None


class Evaluator:
    def __init__(self, g: Graph, var_kinds: dict[str, str]):
        self.g = g
        self.kinds = var_kinds

    def value(self, name: str, env: dict) -> Any:
        ident = env[name]
        return node_value(self.g, ident) if self.kinds[name] == "node" else edge_value(self.g, ident)

    def eval(self, e: Expr, env: dict, aliases: dict | None = None) -> Any:
        if isinstance(e, Literal):
            return e.value
        if isinstance(e, Prop):
            if aliases and e.var in aliases:
                base = aliases[e.var]
                return base.get(e.key) if hasattr(base, "get") and not isinstance(base, dict) else None
            ident = env[e.var]
            obj = self.g.node(ident) if self.kinds[e.var] == "node" else self.g.edge(ident)
            return obj.props.get(e.key)
        if isinstance(e, Var):
            if aliases and e.name in aliases:
                return aliases[e.name]
            return self.value(e.name, env)
        if isinstance(e, Compare):
            return compare(e.op, self.eval(e.left, env, aliases), self.eval(e.right, env, aliases))
        if isinstance(e, And):
            result: bool | None = True
            for x in e.items:
                t = _truth(self.eval(x, env, aliases))
                if t is False:
                    return False
                if t is None:
                    result = None
            return result
        if isinstance(e, Or):
            result = False
            for x in e.items:
                t = _truth(self.eval(x, env, aliases))
                if t is True:
                    return True
                if t is None:
                    result = None
            return result
        if isinstance(e, Not):
            t = _truth(self.eval(e.expr, env, aliases))
            return None if t is None else not t
        if isinstance(e, IsNull):
            isnull = self.eval(e.expr, env, aliases) is None
            return not isnull if e.negated else isnull
        if isinstance(e, ListLit):
            return [self.eval(x, env, aliases) for x in e.items]
        if isinstance(e, Case):
            for cond, val in e.whens:
                if self.eval(cond, env, aliases) is True:
                    return self.eval(val, env, aliases)
            return None if e.default is None else self.eval(e.default, env, aliases)
        if isinstance(e, FuncCall):
            raise ValueError(f"aggregate {e.name}() evaluated outside RETURN")
        raise TypeError(f"unknown expression {e!r}")


# -- matching -----------------------------------------------------------------


def _props_match(props: dict, wanted: tuple) -> bool:
    return all(equal(props.get(k), lit.value) is True for k, lit in wanted)


def _node_ok(g: Graph, slot, nid: int) -> bool:
    n = g.node(nid)
    for label, props in slot.constraints:
        if label is not None and n.label != label:
            return False
        if not _props_match(n.props, props):
            return False
    return True


def _scan_candidates(g: Graph, probe: tuple):
    if probe[0] == "prop":
        return sorted(g.nodes_by_label_prop(probe[1], probe[2], probe[3]))
    if probe[0] == "label":
        return sorted(g.nodes_by_label_prop(probe[1]))
    return range(g.num_nodes())


def _expand_candidates(g: Graph, nid: int, direction: str) -> Iterator[tuple[int, int]]:
    if direction in ("out", "both"):
        for eid in g.out_edges(nid):
            yield eid, g.edge(eid).dst
    if direction in ("in", "both"):
        for eid in g.in_edges(nid):
            e = g.edge(eid)
            if direction == "both" and e.src == e.dst:
                continue  # self-loop already produced by the out-list
            yield eid, e.src


_FLIP = {"out": "in", "in": "out", "both": "both"}


def match(g: Graph, p: Plan) -> Iterator[dict]:
    """Yield one binding dict (variable -> node/edge id) per pattern match."""
    steps = p.steps
    env: dict = {}
    used: set[int] = set()

    def run(i: int) -> Iterator[dict]:
        if i == len(steps):
            yield dict(env)
            return
        step = steps[i]
        if isinstance(step, Scan):
            slot = p.nodes[step.var]
            for nid in _scan_candidates(g, step.probe):
                if _node_ok(g, slot, nid):
                    env[step.var] = nid
                    yield from run(i + 1)
            env.pop(step.var, None)
            return
        assert isinstance(step, Expand)
        rel = p.rels[step.rel]
        direction = rel.direction if step.src == rel.left else _FLIP[rel.direction]
        dst_slot = p.nodes[step.dst]
        for eid, other in _expand_candidates(g, env[step.src], direction):
            if eid in used:
                continue
            e = g.edge(eid)
            if e.etype != rel.etype or not _props_match(e.props, rel.props):
                continue
            if step.dst_bound:
                if env[step.dst] != other:
                    continue
            elif not _node_ok(g, dst_slot, other):
                continue
            used.add(eid)
            env[rel.key] = eid
            if not step.dst_bound:
                env[step.dst] = other
            yield from run(i + 1)
            used.discard(eid)
            env.pop(rel.key, None)
            if not step.dst_bound:
                env.pop(step.dst, None)

    yield from run(0)


# -- projection ---------------------------------------------------------------


class _Agg:
    def __init__(self, call: FuncCall):
        self.call = call
        self.values: list = []
        self.seen: set = set()
        self.rows = 0

    def add(self, v: Any) -> None:
        self.rows += 1
        if self.call.star or v is None:
            return
        if self.call.distinct:
            k = hash_key(v)
            if k in self.seen:
                return
            self.seen.add(k)
        self.values.append(v)

    def result(self) -> Any:
        name = self.call.name
        if name == "count":
            return self.rows if self.call.star else len(self.values)
        if name == "collect":
            return list(self.values)
        if name == "sum":
            nums = [v for v in self.values if _is_num(v)]
            if any(isinstance(v, float) for v in nums):
                return math.fsum(nums)
            return sum(nums)
        if name in ("min", "max"):
            if not self.values:
                return None
            pick = min if name == "min" else max
            return pick(self.values, key=sort_key)
        raise ValueError(f"unknown aggregate {name}")


def project(g: Graph, p: Plan, bindings) -> tuple[list[tuple], int]:
    q = p.query
    ev = Evaluator(g, p.var_kinds)
    aggregating = q.has_aggregates
    rows: list[tuple] = []
    envs: list[dict | None] = []
    matched = 0

    if not aggregating:
        for env in bindings:
            if q.where is not None and ev.eval(q.where, env) is not True:
                continue
            matched += 1
            rows.append(tuple(ev.eval(it.expr, env) for it in q.items))
            envs.append(env)
    else:
        key_idx = [i for i, it in enumerate(q.items) if not isinstance(it.expr, FuncCall)]
        groups: dict[tuple, tuple[list, list[_Agg]]] = {}
        for env in bindings:
            if q.where is not None and ev.eval(q.where, env) is not True:
                continue
            matched += 1
            keyvals = [ev.eval(q.items[i].expr, env) for i in key_idx]
            gk = tuple(hash_key(v) for v in keyvals)
            if gk not in groups:
                aggs = [_Agg(it.expr) for it in q.items if isinstance(it.expr, FuncCall)]
                groups[gk] = (keyvals, aggs)
            _, aggs = groups[gk]
            for agg in aggs:
                agg.add(None if agg.call.star else ev.eval(agg.call.args[0], env))
        if not groups and not key_idx:
            groups[()] = ([], [_Agg(it.expr) for it in q.items])
        for keyvals, aggs in groups.values():
            kv, av = iter(keyvals), iter(aggs)
            rows.append(tuple(next(kv) if i in key_idx else next(av).result() for i in range(len(q.items))))
            envs.append(None)

    if q.distinct:
        seen: set = set()
        kept_rows, kept_envs = [], []
        for r, env in zip(rows, envs):
            k = tuple(hash_key(v) for v in r)
            if k not in seen:
                seen.add(k)
                kept_rows.append(r)
                kept_envs.append(env)
        rows, envs = kept_rows, kept_envs

    if p.order:
        keyed = []
        for r, env in zip(rows, envs):
            aliases = {c: v for c, v in zip(p.columns, r)}
            sk = []
            for kind, ref, _ in p.order:
                v = r[ref] if kind == "col" else ev.eval(ref, env, aliases)
                sk.append(sort_key(v))
            keyed.append((sk, r))
        for pos in range(len(p.order) - 1, -1, -1):
            keyed.sort(key=lambda t: t[0][pos], reverse=p.order[pos][2])
        rows = [r for _, r in keyed]
    if q.limit is not None:
        rows = rows[: q.limit]
    return rows, matched


def execute(g: Graph, p: Plan) -> ResultTable:
    t0 = time.perf_counter_ns()
    rows, matched = project(g, p, match(g, p))
    elapsed = (time.perf_counter_ns() - t0) / 1e6
    return ResultTable(list(p.columns), rows, matched=matched, duration_ms=elapsed, warnings=list(p.warnings))


def run_query(g: Graph, text_or_query: str | Query, strategy: str = "greedy") -> ResultTable:
    """Parse (if needed), plan and execute in one call."""
    from .parser import parse

    q = parse(text_or_query) if isinstance(text_or_query, str) else text_or_query
    return execute(g, make_plan(q, GraphSchema.of(g), strategy=strategy))
