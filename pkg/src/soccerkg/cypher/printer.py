"""Canonical text form of a :class:`~soccerkg.cypher.ast.Query`.

``parse(to_text(q)) == q`` holds for every tree the parser can produce.
"""

from __future__ import annotations

import math
import re

from .ast import (
    And,
    Case,
    Compare,
    Expr,
    FuncCall,
    IsNull,
    ListLit,
    Literal,
    NodePattern,
    Not,
    Or,
    PathPattern,
    Prop,
    Query,
    RelPattern,
    Var,
)
from .lexer import KEYWORDS

_PLAIN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_STR_ESCAPES = {"\\": "\\\\", "'": "\\'", "\n": "\\n", "\t": "\\t", "\r": "\\r", "\b": "\\b", "\f": "\\f"}


def quote_name(name: str) -> str:
    if _PLAIN.match(name) and name.upper() not in KEYWORDS:
        return name
    return "`" + name.replace("`", "``") + "`"


def quote_string(s: str) -> str:
    return "'" + "".join(_STR_ESCAPES.get(c, c) for c in s) + "'"


def literal_text(value: object) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"{value} has no literal form")
        return repr(value)
    if isinstance(value, str):
        return quote_string(value)
    raise TypeError(f"no literal form for {value!r}")


def _props(props) -> str:
    if not props:
        return ""
    inner = ", ".join(f"{quote_name(k)}: {literal_text(v.value)}" for k, v in props)
    return " {" + inner + "}"


def node_text(n: NodePattern) -> str:
    s = quote_name(n.var) if n.var else ""
    if n.label:
        s += ":" + quote_name(n.label)
    return "(" + (s + _props(n.props)).strip() + ")"


def rel_text(r: RelPattern) -> str:
    body = (quote_name(r.var) if r.var else "") + ":" + quote_name(r.etype) + _props(r.props)
    if r.direction == "out":
        return f"-[{body}]->"
    if r.direction == "in":
        return f"<-[{body}]-"
    return f"-[{body}]-"


def path_text(p: PathPattern) -> str:
    parts = [node_text(p.nodes[0])]
    for r, n in zip(p.rels, p.nodes[1:]):
        parts += [rel_text(r), node_text(n)]
    return "".join(parts)


def _operand(e: Expr) -> str:
    # comparison operands bind tighter than NOT/AND/OR and other comparisons
    if isinstance(e, (And, Or, Not, Compare, IsNull)):
        return f"({expr_text(e)})"
    return expr_text(e)


def expr_text(e: Expr) -> str:
    if isinstance(e, Literal):
        return literal_text(e.value)
    if isinstance(e, ListLit):
        return "[" + ", ".join(expr_text(x) for x in e.items) + "]"
    if isinstance(e, Var):
        return quote_name(e.name)
    if isinstance(e, Prop):
        return f"{quote_name(e.var)}.{quote_name(e.key)}"
    if isinstance(e, Compare):
        op = e.op.replace("_", " ")
        return f"{_operand(e.left)} {op} {_operand(e.right)}"
    if isinstance(e, IsNull):
        return f"{_operand(e.expr)} IS {'NOT ' if e.negated else ''}NULL"
    if isinstance(e, And):
        return " AND ".join(f"({expr_text(x)})" if isinstance(x, (And, Or)) else expr_text(x) for x in e.items)
    if isinstance(e, Or):
        return " OR ".join(f"({expr_text(x)})" if isinstance(x, (And, Or)) else expr_text(x) for x in e.items)
    if isinstance(e, Not):
        inner = e.expr
        if isinstance(inner, (And, Or)):
            return f"NOT ({expr_text(inner)})"
        return f"NOT {expr_text(inner)}"
    if isinstance(e, FuncCall):
        if e.star:
            return f"{e.name}(*)"
        args = ", ".join(expr_text(a) for a in e.args)
        return f"{e.name}({'DISTINCT ' if e.distinct else ''}{args})"
    if isinstance(e, Case):
        parts = ["CASE"]
        for cond, val in e.whens:
            parts += ["WHEN", expr_text(cond), "THEN", expr_text(val)]
        if e.default is not None:
            parts += ["ELSE", expr_text(e.default)]
        parts.append("END")
        return " ".join(parts)
    raise TypeError(f"unknown expression node {e!r}")


def to_text(q: Query) -> str:
    out = ["MATCH " + ", ".join(path_text(p) for p in q.patterns)]
    if q.where is not None:
        out.append("WHERE " + expr_text(q.where))
    items = []
    for it in q.items:
        s = expr_text(it.expr)
        if it.alias is not None:
            s += " AS " + quote_name(it.alias)
        items.append(s)
    out.append("RETURN " + ("DISTINCT " if q.distinct else "") + ", ".join(items))
    if q.order_by:
        out.append("ORDER BY " + ", ".join(expr_text(s.expr) + (" DESC" if s.descending else "") for s in q.order_by))
    if q.limit is not None:
        out.append(f"LIMIT {q.limit}")
    return "\n".join(out)
