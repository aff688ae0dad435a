"""Naive reference evaluator used as a test oracle.

It shares nothing with the executor apart from the AST and the result value
classes: no indices, no planner, its own expression semantics. Every
relationship pattern is tried against the full edge list in nested loops,
so it is only usable on small graphs.
"""

from __future__ import annotations

import math
from typing import Any

from ..graph import Graph
from .ast import (
    And,
    Case,
    Compare,
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
from .result import edge_value, node_value

MAX_NODES = 200

NULL = None


class SizeGuardError(RuntimeError):
    pass


# -- values -------------------------------------------------------------------


def _kind(v: Any) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, (int, float)):
        return "num"
    if isinstance(v, str):
        return "str"
    if isinstance(v, (list, tuple)):
        return "list"
    return type(v).__name__  # NodeValue / EdgeValue


def _eq(a: Any, b: Any) -> Any:
    ka, kb = _kind(a), _kind(b)
    if "null" in (ka, kb):
        return NULL
    if ka != kb:
        return NULL
    if ka == "list":
        if len(a) != len(b):
            return False
        parts = [_eq(x, y) for x, y in zip(a, b)]
        if False in parts:
            return False
        return NULL if NULL in parts else True
    if ka in ("NodeValue", "EdgeValue"):
        return a.id == b.id
    return a == b


def _not(t: Any) -> Any:
    return NULL if t is NULL else (not t)


def _cmp(op: str, a: Any, b: Any) -> Any:
    if op == "IN":
        if _kind(b) != "list":
            return NULL
        out: Any = False
        for x in b:
            r = _eq(a, x)
            if r is True:
                return True
            if r is NULL:
                out = NULL
        return out
    ka, kb = _kind(a), _kind(b)
    if "null" in (ka, kb):
        return NULL
    if op == "=":
        return _eq(a, b)
    if op == "<>":
        return _not(_eq(a, b))
    if op in ("CONTAINS", "STARTS_WITH", "ENDS_WITH"):
        if ka != "str" or kb != "str":
            return NULL
        return {"CONTAINS": b in a, "STARTS_WITH": a[: len(b)] == b, "ENDS_WITH": len(b) == 0 or a[-len(b):] == b}[op]
    if ka != kb or ka not in ("num", "str", "bool"):
        return NULL
    return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def _order_rank(v: Any) -> tuple:
    k = _kind(v)
    if k == "NodeValue":
        return (0, v.id)
    if k == "EdgeValue":
        return (1, v.id)
    if k == "list":
        return (2, tuple(_order_rank(x) for x in v))
    if k == "str":
        return (3, v)
    if k == "bool":
        return (4, v)
    if k == "num":
        return (5, v)
    return (6,)


def _group_key(v: Any) -> Any:
    k = _kind(v)
    if k == "list":
        return ("list", tuple(_group_key(x) for x in v))
    if k in ("NodeValue", "EdgeValue"):
        return (k, v.id)
    return (k, v)  # 1 and 1.0 hash alike, True is kept apart by the tag


# -- expression evaluation ----------------------------------------------------


class _Env:
    def __init__(self, g: Graph, nodes: dict, edges: dict, aliases: dict | None = None):
        self.g, self.nodes, self.edges, self.aliases = g, nodes, edges, aliases or {}

    def lookup(self, name: str) -> Any:
        if name in self.aliases:
            return self.aliases[name]
        if name in self.nodes:
            return node_value(self.g, self.nodes[name])
        return edge_value(self.g, self.edges[name])


def _eval(e: Any, env: _Env) -> Any:
    if isinstance(e, Literal):
        return e.value
    if isinstance(e, ListLit):
        return [_eval(x, env) for x in e.items]
    if isinstance(e, Var):
        return env.lookup(e.name)
    if isinstance(e, Prop):
        base = env.lookup(e.var)
        if _kind(base) not in ("NodeValue", "EdgeValue"):
            return NULL
        return dict(base.props).get(e.key)
    if isinstance(e, Compare):
        return _cmp(e.op, _eval(e.left, env), _eval(e.right, env))
    if isinstance(e, Not):
        v = _eval(e.expr, env)
        return _not(v if isinstance(v, bool) else NULL)
    if isinstance(e, (And, Or)):
        vals = []
        for x in e.items:
            v = _eval(x, env)
            vals.append(v if isinstance(v, bool) else NULL)
        dominant = isinstance(e, Or)  # True dominates OR, False dominates AND
        if dominant in vals:
            return dominant
        return NULL if NULL in vals else (not dominant)
    if isinstance(e, IsNull):
        r = _eval(e.expr, env) is NULL
        return (not r) if e.negated else r
    if isinstance(e, Case):
        for cond, val in e.whens:
            if _eval(cond, env) is True:
                return _eval(val, env)
        return NULL if e.default is None else _eval(e.default, env)
    raise TypeError(f"cannot evaluate {e!r}")


# -- enumeration --------------------------------------------------------------


def _matches(props: dict, wanted) -> bool:
    return all(_eq(props.get(k), lit.value) is True for k, lit in wanted)


def _enumerate(g: Graph, q: Query):
    node_occ: list[tuple[Any, Any]] = []  # (key, NodePattern)
    rel_occ: list[tuple[Any, Any, Any]] = []  # (RelPattern, left key, right key)
    for pi, path in enumerate(q.patterns):
        keys = []
        for ni, n in enumerate(path.nodes):
            key = n.var if n.var is not None else ("_", pi, ni)
            keys.append(key)
            node_occ.append((key, n))
        for ri, r in enumerate(path.rels):
            rel_occ.append((r, keys[ri], keys[ri + 1]))
    all_keys = list(dict.fromkeys(k for k, _ in node_occ))
    edges = [g.edge(i) for i in range(g.num_edges())]

    def fits(key, nid: int) -> bool:
        return all(_node_fits(g.node(nid), n) for k, n in node_occ if k == key)

    def rel_loop(i: int, nodes: dict, bound_edges: list):
        if i == len(rel_occ):
            yield from node_loop(nodes, bound_edges)
            return
        r, lk, rk = rel_occ[i]
        for e in edges:
            if e.id in bound_edges or e.etype != r.etype or not _matches(e.props, r.props):
                continue
            orientations = []
            if r.direction in ("out", "both"):
                orientations.append((e.src, e.dst))
            if r.direction in ("in", "both") and not (r.direction == "both" and e.src == e.dst):
                orientations.append((e.dst, e.src))
            for left, right in orientations:
                trial = dict(nodes)
                ok = True
                for k, v in ((lk, left), (rk, right)):
                    if trial.setdefault(k, v) != v or not fits(k, v):
                        ok = False
                if ok:
                    yield from rel_loop(i + 1, trial, bound_edges + [e.id])

    def node_loop(nodes: dict, bound_edges: list):
        free = [k for k in all_keys if k not in nodes]
        if not free:
            yield nodes, bound_edges
            return
        for nid in range(g.num_nodes()):
            if fits(free[0], nid):
                yield from node_loop({**nodes, free[0]: nid}, bound_edges)

    yield from rel_loop(0, {}, [])


def _node_fits(node, pat) -> bool:
    if pat.label is not None and node.label != pat.label:
        return False
    return _matches(node.props, pat.props)


# -- projection ---------------------------------------------------------------


def _aggregate(call: FuncCall, values: list) -> Any:
    if call.star:
        return len(values)
    vals = [v for v in values if v is not NULL]
    if call.distinct:
        seen, uniq = set(), []
        for v in vals:
            k = _group_key(v)
            if k not in seen:
                seen.add(k)
                uniq.append(v)
        vals = uniq
    if call.name == "count":
        return len(vals)
    if call.name == "collect":
        return vals
    if call.name == "sum":
        nums = [v for v in vals if _kind(v) == "num"]
        return math.fsum(nums) if any(isinstance(v, float) for v in nums) else sum(nums)
    if call.name in ("min", "max"):
        if not vals:
            return NULL
        ranked = sorted(vals, key=_order_rank)
        return ranked[0] if call.name == "min" else ranked[-1]
    raise ValueError(call.name)


def reference_execute(g: Graph, q: Query) -> tuple[list[str], list[tuple]]:
    """Evaluate ``q`` the slow way; returns ``(columns, rows)``."""
    if g.num_nodes() > MAX_NODES:
        raise SizeGuardError(f"reference evaluator is limited to {MAX_NODES} nodes (got {g.num_nodes()})")
    from .printer import expr_text

    columns = [it.alias if it.alias is not None else expr_text(it.expr) for it in q.items]
    rel_keys = [r for path in q.patterns for r in path.rels]

    envs = []
    for nodes, bound in _enumerate(g, q):
        named_nodes = {k: v for k, v in nodes.items() if isinstance(k, str)}
        named_edges = {r.var: eid for r, eid in zip(rel_keys, bound) if r.var is not None}
        env = _Env(g, named_nodes, named_edges)
        if q.where is None or _eval(q.where, env) is True:
            envs.append(env)

    is_agg = [isinstance(it.expr, FuncCall) for it in q.items]
    rows: list[tuple] = []
    row_envs: list = []
    if any(is_agg):
        groups: dict = {}
        order: list = []
        for env in envs:
            keyvals = tuple(_eval(it.expr, env) if not a else None for it, a in zip(q.items, is_agg))
            gk = tuple(_group_key(v) for v, a in zip(keyvals, is_agg) if not a)
            if gk not in groups:
                groups[gk] = (keyvals, [[] for _ in q.items])
                order.append(gk)
            for i, (it, a) in enumerate(zip(q.items, is_agg)):
                if a:
                    groups[gk][1][i].append(1 if it.expr.star else _eval(it.expr.args[0], env))
        if not order and all(is_agg):
            groups[()] = ((None,) * len(q.items), [[] for _ in q.items])
            order.append(())
        for gk in order:
            keyvals, buckets = groups[gk]
            rows.append(tuple(_aggregate(it.expr, buckets[i]) if a else keyvals[i] for i, (it, a) in enumerate(zip(q.items, is_agg))))
            row_envs.append(None)
    else:
        for env in envs:
            rows.append(tuple(_eval(it.expr, env) for it in q.items))
            row_envs.append(env)

    if q.distinct:
        seen = set()
        pairs = []
        for r, env in zip(rows, row_envs):
            k = tuple(_group_key(v) for v in r)
            if k not in seen:
                seen.add(k)
                pairs.append((r, env))
        rows, row_envs = [p[0] for p in pairs], [p[1] for p in pairs]

    if q.order_by:
        aliases = {it.alias: i for i, it in enumerate(q.items) if it.alias is not None}

        def sort_value(r, env, s):
            if isinstance(s.expr, Var) and s.expr.name in aliases:
                return r[aliases[s.expr.name]]
            for i, it in enumerate(q.items):
                if it.expr == s.expr:
                    return r[i]
            scoped = _Env(g, env.nodes, env.edges, dict(zip(columns, r)))
            return _eval(s.expr, scoped)

        decorated = [(r, [sort_value(r, env, s) for s in q.order_by]) for r, env in zip(rows, row_envs)]
        for pos in reversed(range(len(q.order_by))):
            decorated.sort(key=lambda t: _order_rank(t[1][pos]), reverse=q.order_by[pos].descending)
        rows = [r for r, _ in decorated]
    if q.limit is not None:
        rows = rows[: q.limit]
    return columns, rows
