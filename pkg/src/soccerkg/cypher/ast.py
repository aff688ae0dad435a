"""Immutable syntax tree for the supported query subset."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

AGGREGATES = frozenset({"count", "sum", "collect", "min", "max"})


@dataclass(frozen=True)
class Literal:
    kind: str  # "str" | "int" | "float" | "bool" | "null"
    value: object

    @classmethod
    def of(cls, value: object) -> "Literal":
        if value is None:
            return cls("null", None)
        if isinstance(value, bool):
            return cls("bool", value)
        if isinstance(value, int):
            return cls("int", value)
        if isinstance(value, float):
            return cls("float", value)
        if isinstance(value, str):
            return cls("str", value)
        raise TypeError(f"no literal form for {value!r}")


@dataclass(frozen=True)
class ListLit:
    items: tuple["Expr", ...]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Prop:
    var: str
    key: str


@dataclass(frozen=True)
class Compare:
    op: str  # = <> < <= > >= CONTAINS STARTS_WITH ENDS_WITH IN
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class IsNull:
    expr: "Expr"
    negated: bool = False


@dataclass(frozen=True)
class And:
    items: tuple["Expr", ...]


@dataclass(frozen=True)
class Or:
    items: tuple["Expr", ...]


@dataclass(frozen=True)
class Not:
    expr: "Expr"


@dataclass(frozen=True)
class FuncCall:
    name: str  # lower-cased
    args: tuple["Expr", ...]
    distinct: bool = False
    star: bool = False

    @property
    def is_aggregate(self) -> bool:
        return self.name in AGGREGATES


@dataclass(frozen=True)
class Case:
    whens: tuple[tuple["Expr", "Expr"], ...]
    default: "Expr | None" = None


Expr = Union[Literal, ListLit, Var, Prop, Compare, IsNull, And, Or, Not, FuncCall, Case]


@dataclass(frozen=True)
class NodePattern:
    var: str | None = None
    label: str | None = None
    props: tuple[tuple[str, Literal], ...] = ()


@dataclass(frozen=True)
class RelPattern:
    etype: str
    var: str | None = None
    direction: str = "out"  # "out" (-[]->), "in" (<-[]-), "both" (-[]-)
    props: tuple[tuple[str, Literal], ...] = ()


@dataclass(frozen=True)
class PathPattern:
    nodes: tuple[NodePattern, ...]
    rels: tuple[RelPattern, ...] = ()


@dataclass(frozen=True)
class ReturnItem:
    expr: Expr
    alias: str | None = None


@dataclass(frozen=True)
class SortItem:
    expr: Expr
    descending: bool = False


@dataclass(frozen=True)
class Query:
    patterns: tuple[PathPattern, ...]
    items: tuple[ReturnItem, ...]
    where: Expr | None = None
    distinct: bool = False
    order_by: tuple[SortItem, ...] = ()
    limit: int | None = None

    @property
    def has_aggregates(self) -> bool:
        return any(contains_aggregate(i.expr) for i in self.items)


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, ListLit):
        return e.items
    if isinstance(e, Compare):
        return (e.left, e.right)
    if isinstance(e, (IsNull, Not)):
        return (e.expr,)
    if isinstance(e, (And, Or)):
        return e.items
    if isinstance(e, FuncCall):
        return e.args
    if isinstance(e, Case):
        out: list[Expr] = [x for pair in e.whens for x in pair]
        if e.default is not None:
            out.append(e.default)
        return tuple(out)
    return ()


def walk(e: Expr):
    yield e
    for c in children(e):
        yield from walk(c)


def contains_aggregate(e: Expr) -> bool:
    return any(isinstance(x, FuncCall) and x.is_aggregate for x in walk(e))
