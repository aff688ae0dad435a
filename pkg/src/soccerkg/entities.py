"""Registry of canonical entity names shared by both knowledge graphs."""

from __future__ import annotations

import json
from collections import defaultdict
from typing import Iterator

from .ingest import normalize_name

KINDS = ("team", "player", "league", "referee", "venue", "coach")

#: Conversational league names -> SoccerNet league directory ids.
LEAGUE_ALIASES = {
    "england_epl": ["EPL", "Premier League", "English Premier League"],
    "spain_laliga": ["La Liga", "LaLiga", "Spanish La Liga"],
    "germany_bundesliga": ["Bundesliga", "German Bundesliga"],
    "italy_serie-a": ["Serie A", "Italian Serie A"],
    "france_ligue-1": ["Ligue 1", "French Ligue 1"],
    "europe_uefa-champions-league": ["UCL", "Champions League", "UEFA Champions League"],
}


class EntityDictionary:
    """Canonical names per kind, mapped to node ids in each graph.

    The first casing registered for a name wins: later spellings that only
    differ in case or whitespace resolve to it.
    """

    def __init__(self) -> None:
        self._canonical: dict[str, dict[str, str]] = {k: {} for k in KINDS}
        self._nodes: dict[str, dict[str, dict[str, list[int]]]] = {
            k: defaultdict(lambda: defaultdict(list)) for k in KINDS
        }
        self._aliases: dict[str, dict[str, str]] = {k: {} for k in KINDS}

    def canonical(self, kind: str, raw: str) -> str:
        """Register ``raw`` if new and return its canonical spelling."""
        name = normalize_name(raw)
        return self._canonical[kind].setdefault(name.casefold(), name)

    def lookup(self, kind: str, raw: str) -> str | None:
        """Canonical name for an exact (case-insensitive) name or alias."""
        key = normalize_name(raw).casefold()
        return self._canonical[kind].get(key) or self._aliases[kind].get(key)

    def register(self, kind: str, raw: str, graph: str, node_id: int) -> str:
        name = self.canonical(kind, raw)
        ids = self._nodes[kind][name][graph]
        if node_id not in ids:
            ids.append(node_id)
        return name

    def add_alias(self, kind: str, alias: str, canonical: str) -> None:
        key = normalize_name(alias).casefold()
        if key not in self._canonical[kind]:
            self._aliases[kind].setdefault(key, canonical)

    def finalize_aliases(self) -> None:
        """Add unambiguous surname aliases for players and known league aliases."""
        by_surname: dict[str, set[str]] = defaultdict(set)
        for name in self._canonical["player"].values():
            parts = name.split(" ")
            if len(parts) > 1:
                by_surname[parts[-1].casefold()].add(name)
        taken = {n.casefold() for k in KINDS for n in self._canonical[k].values()}
        for surname, names in by_surname.items():
            if len(names) == 1 and len(surname) >= 4 and surname not in taken:
                self.add_alias("player", surname, next(iter(names)))
        for league, aliases in LEAGUE_ALIASES.items():
            canon = self.lookup("league", league)
            if canon:
                for alias in aliases:
                    self.add_alias("league", alias, canon)

    def names(self, kind: str) -> list[str]:
        return sorted(self._canonical[kind].values())

    def aliases(self, kind: str) -> dict[str, str]:
        return dict(self._aliases[kind])

    def surface_forms(self) -> Iterator[tuple[str, str, str]]:
        """(surface text, canonical name, kind) for every name and alias."""
        for kind in KINDS:
            for name in self._canonical[kind].values():
                yield name, name, kind
            for alias_key, canon in self._aliases[kind].items():
                yield alias_key, canon, kind

    def node_ids(self, kind: str, name: str) -> dict[str, list[int]]:
        return {g: list(ids) for g, ids in self._nodes[kind].get(name, {}).items()}

    def kind_of(self, name: str) -> str | None:
        key = normalize_name(name).casefold()
        for kind in KINDS:
            if key in self._canonical[kind]:
                return kind
        return None

    def __len__(self) -> int:
        return sum(len(v) for v in self._canonical.values())

    def to_dict(self) -> dict:
        out: dict = {}
        for kind in KINDS:
            entries = {}
            for name in sorted(self._canonical[kind].values()):
                entries[name] = {g: ids for g, ids in sorted(self._nodes[kind][name].items())}
            out[kind] = {"names": entries, "aliases": dict(sorted(self._aliases[kind].items()))}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, ensure_ascii=False, sort_keys=False) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "EntityDictionary":
        d = cls()
        for kind in KINDS:
            block = doc.get(kind, {})
            for name, graphs in block.get("names", {}).items():
                d.canonical(kind, name)
                for g, ids in graphs.items():
                    for nid in ids:
                        d.register(kind, name, g, nid)
            for alias, canon in block.get("aliases", {}).items():
                d._aliases[kind][alias] = canon
        return d
