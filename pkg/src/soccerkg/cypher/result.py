"""Result values and the tabular result of a query."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class NodeValue:
    id: int
    label: str
    props: tuple[tuple[str, Any], ...]

    def get(self, key: str) -> Any:
        return dict(self.props).get(key)


@dataclass(frozen=True)
class EdgeValue:
    id: int
    etype: str
    src: int
    dst: int
    props: tuple[tuple[str, Any], ...]

    def get(self, key: str) -> Any:
        return dict(self.props).get(key)


def node_value(g, nid: int) -> NodeValue:
    n = g.node(nid)
    return NodeValue(n.id, n.label, tuple(n.props.items()))


def edge_value(g, eid: int) -> EdgeValue:
    e = g.edge(eid)
    return EdgeValue(e.id, e.etype, e.src, e.dst, tuple(e.props.items()))


def hash_key(v: Any) -> tuple:
    """Equality key used for DISTINCT and grouping.

    Numbers compare across int/float; booleans never equal numbers.
    """
    if v is None:
        return ("null",)
    if isinstance(v, bool):
        return ("b", v)
    if isinstance(v, (int, float)):
        return ("n", v)
    if isinstance(v, str):
        return ("s", v)
    if isinstance(v, (list, tuple)):
        return ("l", tuple(hash_key(x) for x in v))
    if isinstance(v, NodeValue):
        return ("node", v.id)
    if isinstance(v, EdgeValue):
        return ("edge", v.id)
    raise TypeError(f"unhashable result value {v!r}")


_RANK = {"node": 0, "edge": 1, "l": 2, "s": 3, "b": 4, "n": 5, "null": 6}


def sort_key(v: Any) -> tuple:
    """Total order for ORDER BY: nodes < edges < lists < strings < booleans < numbers < null."""
    k = hash_key(v)
    return (_RANK[k[0]], _sortable(k))


def _sortable(k: tuple) -> Any:
    if k[0] == "l":
        return tuple((_RANK[x[0]], _sortable(x)) for x in k[1])
    return k[1:] if k[0] != "null" else ()


def to_json_value(v: Any) -> Any:
    if isinstance(v, NodeValue):
        return {"_id": v.id, "_label": v.label, **{k: x for k, x in v.props}}
    if isinstance(v, EdgeValue):
        return {"_id": v.id, "_type": v.etype, "_src": v.src, "_dst": v.dst, **{k: x for k, x in v.props}}
    if isinstance(v, (list, tuple)):
        return [to_json_value(x) for x in v]
    return v


def display(v: Any) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, NodeValue):
        inner = ", ".join(f"{k}: {display(x)}" for k, x in v.props)
        return f"({v.label} {{{inner}}})"
    if isinstance(v, EdgeValue):
        return f"[{v.etype} {v.src}->{v.dst}]"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(display(x) for x in v) + "]"
    return str(v)


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]
    matched: int = 0
    duration_ms: float = 0.0
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row arity {len(r)} != {len(self.columns)} columns")

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def scalar(self) -> Any:
        if len(self.rows) != 1 or len(self.columns) != 1:
            raise ValueError("result is not a single value")
        return self.rows[0][0]

    def to_dict(self) -> dict:
        return {
            "columns": list(self.columns),
            "rows": [[to_json_value(v) for v in r] for r in self.rows],
            "stats": {"matched": self.matched, "duration_ms": self.duration_ms},
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    def render_text(self) -> str:
        cells = [[display(v) for v in r] for r in self.rows]
        widths = [len(c) for c in self.columns]
        for r in cells:
            widths = [max(w, len(c)) for w, c in zip(widths, r)]
        line = " | ".join(c.ljust(w) for c, w in zip(self.columns, widths))
        sep = "-+-".join("-" * w for w in widths)
        body = [" | ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
        footer = f"({len(self.rows)} row{'s' if len(self.rows) != 1 else ''})"
        return "\n".join([line, sep, *body, footer]) + "\n"
