"""Embedded directed labeled property graph.

Nodes and edges live in append-only arenas and are addressed by dense
integer ids. A label index and a (label, key, value) property index are
maintained on insert. After :meth:`Graph.freeze` the graph is read-only
and may be shared between threads.
"""

from __future__ import annotations

import enum
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

PropertyValue = Union[str, int, float, bool]

#: Edge types the builder emits. The last four carry non-card facts.
EDGE_TYPES = (
    "PARTICIPATED_IN",
    "HOME_TEAM",
    "AWAY_TEAM",
    "WINNER",
    "LOSER",
    "ASSOCIATED_TO",
    "IS_PART_OF",
    "PLAYED_IN",
    "PLAYS_FOR",
    "RECEIVED",
    "SCORED",
    "COMMITTED",
    "ASSISTED_BY",
    "SUBSTITUTED_WITH",
)
NODE_LABELS = ("Game", "Team", "Event", "Player", "Fact")

_INT64 = (-(2**63), 2**63 - 1)


class GraphError(Exception):
    pass


class FrozenGraphError(GraphError):
    pass


class UnknownNodeError(GraphError, KeyError):
    pass


class DegenerateGraphError(GraphError, ValueError):
    pass


class Direction(str, enum.Enum):
    OUT = "out"
    IN = "in"
    BOTH = "both"


@dataclass(frozen=True)
class Node:
    id: int
    label: str
    props: Mapping[str, PropertyValue]


@dataclass(frozen=True)
class Edge:
    id: int
    src: int
    dst: int
    etype: str
    props: Mapping[str, PropertyValue]


def value_key(value: PropertyValue) -> tuple:
    """Hashable key that keeps bools apart from numbers (``True == 1`` in Python)."""
    if isinstance(value, bool):
        return ("b", value)
    if isinstance(value, (int, float)):
        return ("n", value)
    return ("s", value)


def check_value(value: object) -> PropertyValue:
    if isinstance(value, bool) or isinstance(value, (str, float)):
        return value
    if isinstance(value, int):
        if not _INT64[0] <= value <= _INT64[1]:
            raise GraphError(f"integer property {value} does not fit in 64 bits")
        return value
    raise GraphError(f"unsupported property value {value!r} ({type(value).__name__})")


class Graph:
    def __init__(self, name: str = ""):
        self.name = name
        self._nodes: list[Node] = []
        self._edges: list[Edge] = []
        self._out: list[list[int]] = []
        self._in: list[list[int]] = []
        self._label_index: dict[str, set[int]] = defaultdict(set)
        self._prop_index: dict[tuple[str, str, tuple], set[int]] = defaultdict(set)
        self._key_index: dict[tuple[str, str], set[int]] = defaultdict(set)
        self._frozen = False

    def __repr__(self) -> str:
        return f"<Graph {self.name!r} |V|={len(self._nodes)} |E|={len(self._edges)}>"

    # -- build ---------------------------------------------------------------

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> None:
        self._frozen = True

    def add_node(self, label: str, props: Mapping[str, object] | None = None) -> int:
        if self._frozen:
            raise FrozenGraphError("graph is frozen")
        if not label:
            raise GraphError("node label must be nonempty")
        clean = {k: check_value(v) for k, v in (props or {}).items() if v is not None}
        nid = len(self._nodes)
        self._nodes.append(Node(nid, label, clean))
        self._out.append([])
        self._in.append([])
        self._label_index[label].add(nid)
        for k, v in clean.items():
            self._prop_index[(label, k, value_key(v))].add(nid)
            self._key_index[(label, k)].add(nid)
        return nid

    def add_edge(self, src: int, dst: int, etype: str, props: Mapping[str, object] | None = None) -> int:
        if self._frozen:
            raise FrozenGraphError("graph is frozen")
        for n in (src, dst):
            if not self.has_node(n):
                raise UnknownNodeError(n)
        if not etype:
            raise GraphError("edge type must be nonempty")
        clean = {k: check_value(v) for k, v in (props or {}).items() if v is not None}
        eid = len(self._edges)
        self._edges.append(Edge(eid, src, dst, etype, clean))
        self._out[src].append(eid)
        self._in[dst].append(eid)
        return eid

    # -- read ----------------------------------------------------------------

    def has_node(self, nid: int) -> bool:
        return isinstance(nid, int) and 0 <= nid < len(self._nodes)

    def node(self, nid: int) -> Node:
        if not self.has_node(nid):
            raise UnknownNodeError(nid)
        return self._nodes[nid]

    def edge(self, eid: int) -> Edge:
        return self._edges[eid]

    @property
    def nodes(self) -> list[Node]:
        return self._nodes

    @property
    def edges(self) -> list[Edge]:
        return self._edges

    def num_nodes(self) -> int:
        return len(self._nodes)

    def num_edges(self) -> int:
        return len(self._edges)

    def labels(self) -> list[str]:
        return sorted(k for k, v in self._label_index.items() if v)

    def label_count(self, label: str) -> int:
        return len(self._label_index.get(label, ()))

    def prop_count(self, label: str, key: str, value: PropertyValue) -> int:
        return len(self._prop_index.get((label, key, value_key(value)), ()))

    def nodes_by_label_prop(
        self,
        label: str,
        key: str | None = None,
        value: PropertyValue | None = None,
    ) -> set[int]:
        """Nodes with ``label`` and, when given, ``key`` (equal to ``value`` if given)."""
        if key is None:
            return set(self._label_index.get(label, ()))
        if value is None:
            return set(self._key_index.get((label, key), ()))
        return set(self._prop_index.get((label, key, value_key(value)), ()))

    def out_edges(self, nid: int) -> list[int]:
        return self._out[nid]

    def in_edges(self, nid: int) -> list[int]:
        return self._in[nid]

    def neighbors(
        self,
        nid: int,
        etype: str | None = None,
        direction: Direction | str = Direction.BOTH,
    ) -> list[tuple[int, int]]:
        """``(edge_id, other_node)`` pairs sorted by edge id.

        With ``Direction.BOTH`` a self-loop is reported once.
        """
        if not self.has_node(nid):
            raise UnknownNodeError(nid)
        direction = Direction(direction)
        found: dict[int, int] = {}
        if direction in (Direction.OUT, Direction.BOTH):
            for eid in self._out[nid]:
                e = self._edges[eid]
                if etype is None or e.etype == etype:
                    found[eid] = e.dst
        if direction in (Direction.IN, Direction.BOTH):
            for eid in self._in[nid]:
                e = self._edges[eid]
                if etype is None or e.etype == etype:
                    found[eid] = e.src
        return sorted(found.items())

    def property_keys(self) -> set[str]:
        keys = {k for (_, k) in self._key_index}
        for e in self._edges:
            keys.update(e.props)
        return keys

    def edge_types(self) -> list[str]:
        return sorted({e.etype for e in self._edges})


def density(g: Graph) -> float:
    """|E| / (|V| * (|V| - 1)); parallel edges are counted."""
    v = g.num_nodes()
    if v < 2:
        raise DegenerateGraphError(f"density needs at least 2 nodes, graph has {v}")
    return g.num_edges() / (v * (v - 1))


@dataclass(frozen=True)
class AuditFinding:
    kind: str
    message: str


def audit(g: Graph) -> list[AuditFinding]:
    """Recompute every index from the arenas and report disagreements."""
    findings: list[AuditFinding] = []

    def add(kind: str, msg: str) -> None:
        findings.append(AuditFinding(kind, msg))

    labels: dict[str, set[int]] = defaultdict(set)
    props: dict[tuple, set[int]] = defaultdict(set)
    keys: dict[tuple, set[int]] = defaultdict(set)
    for i, n in enumerate(g._nodes):
        if n.id != i:
            add("node_id", f"node at slot {i} has id {n.id}")
        if not n.label:
            add("node_label", f"node {i} has an empty label")
        labels[n.label].add(n.id)
        for k, v in n.props.items():
            props[(n.label, k, value_key(v))].add(n.id)
            keys[(n.label, k)].add(n.id)

    def compare(name: str, expected: dict, actual: dict) -> None:
        for k in set(expected) | set(actual):
            if expected.get(k, set()) != actual.get(k, set()):
                add(name, f"{name} entry {k!r} disagrees with node contents")

    compare("label_index", labels, g._label_index)
    compare("prop_index", props, g._prop_index)
    compare("key_index", keys, g._key_index)

    out_expected: list[list[int]] = [[] for _ in g._nodes]
    in_expected: list[list[int]] = [[] for _ in g._nodes]
    for i, e in enumerate(g._edges):
        if e.id != i:
            add("edge_id", f"edge at slot {i} has id {e.id}")
        if not (g.has_node(e.src) and g.has_node(e.dst)):
            add("dangling_edge", f"edge {i} references a missing node")
            continue
        out_expected[e.src].append(i)
        in_expected[e.dst].append(i)
    if len(g._out) != len(g._nodes) or len(g._in) != len(g._nodes):
        add("adjacency", "adjacency lists are not sized to the node arena")
    else:
        for nid in range(len(g._nodes)):
            if sorted(g._out[nid]) != out_expected[nid]:
                add("out_adj", f"out-adjacency of node {nid} is inconsistent")
            if sorted(g._in[nid]) != in_expected[nid]:
                add("in_adj", f"in-adjacency of node {nid} is inconsistent")
    if sum(map(len, g._out)) != len(g._edges) or sum(map(len, g._in)) != len(g._edges):
        add("adjacency", "adjacency entry totals differ from the edge count")
    if g.num_nodes() >= 2 and density(g) > 1.0:
        add("density", f"density {density(g):.6g} exceeds 1 (parallel edges)")
    return findings


def graph_stats(g: Graph) -> dict:
    """Node counts per label, edge counts per type, and density (or ``"n/a"``)."""
    try:
        d: float | str = density(g)
    except DegenerateGraphError:
        d = "n/a"
    return {
        "nodes": g.num_nodes(),
        "edges": g.num_edges(),
        "nodes_by_label": dict(sorted(Counter(n.label for n in g.nodes).items())),
        "edges_by_type": dict(sorted(Counter(e.etype for e in g.edges).items())),
        "density": d,
    }


def render_stats_text(stats: Mapping[str, dict]) -> str:
    lines = []
    for name, s in stats.items():
        d = s["density"]
        dtext = d if isinstance(d, str) else f"{d:.3g}"
        lines.append(f"{name}: {s['nodes']} nodes, {s['edges']} edges, density {dtext}")
        width = max([len(k) for k in [*s["nodes_by_label"], *s["edges_by_type"]]] or [0])
        for k, v in s["nodes_by_label"].items():
            lines.append(f"  node  {k:<{width}}  {v:>8}")
        for k, v in s["edges_by_type"].items():
            lines.append(f"  edge  {k:<{width}}  {v:>8}")
    return "\n".join(lines) + "\n"


def iter_edges_of_type(g: Graph, etype: str) -> Iterable[Edge]:
    return (e for e in g.edges if e.etype == etype)
