"""A compact description of the live graphs, used to ground LLM prompts."""

from __future__ import annotations

from dataclasses import dataclass

from ..graph import Graph

SAMPLES_PER_LABEL = 5


@dataclass(frozen=True)
class SchemaCard:
    labels: dict[str, list[str]]  # label -> property keys
    edges: dict[str, list[tuple[str, str]]]  # type -> (source label, target label)
    samples: dict[str, list[str]]  # label -> example names
    graphs: dict[str, list[str]]  # graph name -> labels present

    @classmethod
    def from_graphs(cls, graphs: dict[str, Graph]) -> "SchemaCard":
        keys: dict[str, set[str]] = {}
        ends: dict[str, set[tuple[str, str]]] = {}
        names: dict[str, set[str]] = {}
        present: dict[str, list[str]] = {}
        for gname, g in graphs.items():
            present[gname] = g.labels()
            for n in g.nodes:
                keys.setdefault(n.label, set()).update(n.props)
                if isinstance(n.props.get("name"), str):
                    names.setdefault(n.label, set()).add(n.props["name"])
            for e in g.edges:
                ends.setdefault(e.etype, set()).add((g.node(e.src).label, g.node(e.dst).label))
        return cls(
            labels={k: sorted(v) for k, v in sorted(keys.items())},
            edges={k: sorted(v) for k, v in sorted(ends.items())},
            samples={k: sorted(v)[:SAMPLES_PER_LABEL] for k, v in sorted(names.items())},
            graphs=present,
        )

    def render_text(self) -> str:
        lines = ["Node labels and properties:"]
        for label, keys in self.labels.items():
            lines.append(f"  (:{label}) {', '.join(keys)}")
        lines.append("Relationships:")
        for etype, pairs in self.edges.items():
            for src, dst in pairs:
                lines.append(f"  (:{src})-[:{etype}]->(:{dst})")
        lines.append("Example names:")
        for label, names in self.samples.items():
            lines.append(f"  {label}: {'; '.join(names)}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "labels": self.labels,
            "edges": {k: [list(p) for p in v] for k, v in self.edges.items()},
            "samples": self.samples,
            "graphs": self.graphs,
        }
