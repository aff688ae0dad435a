"""Knowledge-graph construction from canonical records.

Two independent graphs are produced per dataset:

* the Labels KG: Game, Team and Event nodes;
* the Captions KG: Game, Team, Player and Fact nodes.

Game/Team wiring is identical in both: every team PARTICIPATED_IN the
game, HOME_TEAM/AWAY_TEAM mark the hosting side, and WINNER/LOSER are
added only when the game is not a draw.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from . import snapshot
from .entities import EntityDictionary
from .graph import Graph, graph_stats
from .ingest import (
    Dataset,
    EventAnnotation,
    FactEntry,
    FactType,
    GameRecord,
    PlayerEntry,
    TeamSide,
)

LABELS = "labels"
CAPTIONS = "captions"

#: Edge from the player node to a Fact node, by fact type.
PLAYER_EDGE = {
    FactType.YELLOW_CARD: "RECEIVED",
    FactType.RED_CARD: "RECEIVED",
    FactType.GOAL: "SCORED",
    FactType.OWN_GOAL: "SCORED",
    FactType.ASSIST: "ASSISTED_BY",
    FactType.SUBSTITUTION_OUT: "SUBSTITUTED_WITH",
    FactType.SUBSTITUTION_IN: "SUBSTITUTED_WITH",
}


@dataclass
class BuildOutput:
    labels_kg: Graph
    captions_kg: Graph
    entity_dict: EntityDictionary
    build_stats: dict

    def graph(self, name: str) -> Graph:
        return {LABELS: self.labels_kg, CAPTIONS: self.captions_kg}[name]


class GraphBuilder:
    """Per-graph state: team and player node caches."""

    def __init__(self, name: str, entities: EntityDictionary):
        self.g = Graph(name)
        self.name = name
        self.entities = entities
        self.teams: dict[tuple[str, str, str], int] = {}
        self.players: dict[str, int] = {}
        self.plays_for: set[tuple[int, int]] = set()

    def team_node(self, raw_name: str, league: str, season: str) -> int:
        name = self.entities.canonical("team", raw_name)
        key = (name, league, season)
        if key not in self.teams:
            nid = self.g.add_node("Team", {"name": name, "league": league, "season": season})
            self.teams[key] = nid
            self.entities.register("team", name, self.name, nid)
        return self.teams[key]

    def player_node(self, raw_name: str) -> int:
        name = self.entities.canonical("player", raw_name)
        if name not in self.players:
            nid = self.g.add_node("Player", {"name": name})
            self.players[name] = nid
            self.entities.register("player", name, self.name, nid)
        return self.players[name]


def build_game_and_teams(b: GraphBuilder, rec: GameRecord) -> tuple[int, int, int]:
    g = b.g
    ents = b.entities
    league = ents.canonical("league", rec.league)
    home = b.team_node(rec.home_team, league, rec.season)
    away = b.team_node(rec.away_team, league, rec.season)
    home_name = g.node(home).props["name"]
    away_name = g.node(away).props["name"]
    game = g.add_node(
        "Game",
        {
            "game_id": rec.game_id,
            "home_team": home_name,
            "away_team": away_name,
            "score": f"{rec.score_home} - {rec.score_away}",
            "score_home": rec.score_home,
            "score_away": rec.score_away,
            "date": rec.date,
            "season": rec.season,
            "league": league,
            "round": rec.round,
            "venue": rec.venue and ents.canonical("venue", rec.venue),
            "referee": rec.referee and ents.canonical("referee", rec.referee),
            "home_coach": rec.home_coach and ents.canonical("coach", rec.home_coach),
            "away_coach": rec.away_coach and ents.canonical("coach", rec.away_coach),
        },
    )
    props = g.node(game).props
    ents.register("league", league, b.name, game)
    for kind, key in (("venue", "venue"), ("referee", "referee"), ("coach", "home_coach"), ("coach", "away_coach")):
        if key in props:
            ents.register(kind, props[key], b.name, game)

    g.add_edge(home, game, "PARTICIPATED_IN", {"side": "home", "coach": props.get("home_coach")})
    g.add_edge(away, game, "PARTICIPATED_IN", {"side": "away", "coach": props.get("away_coach")})
    g.add_edge(home, game, "HOME_TEAM")
    g.add_edge(away, game, "AWAY_TEAM")
    if rec.score_home != rec.score_away:
        winner, loser = (home, away) if rec.score_home > rec.score_away else (away, home)
        g.add_edge(winner, game, "WINNER")
        g.add_edge(loser, game, "LOSER")
    return game, home, away


def build_event(b: GraphBuilder, ev: EventAnnotation, game: int, home: int, away: int) -> int:
    g = b.g
    nid = g.add_node(
        "Event",
        {
            "name": ev.label,
            "half": ev.half,
            "clock": ev.clock,
            "game_time": ev.game_time,
            "visibility": ev.visibility,
        },
    )
    g.add_edge(nid, game, "IS_PART_OF")
    if ev.team_side is TeamSide.HOME:
        g.add_edge(nid, home, "ASSOCIATED_TO")
    elif ev.team_side is TeamSide.AWAY:
        g.add_edge(nid, away, "ASSOCIATED_TO")
    return nid


def build_player(b: GraphBuilder, p: PlayerEntry, game: int, team: int) -> int:
    nid = b.player_node(p.name)
    b.g.add_edge(nid, game, "PLAYED_IN", {"shirt_number": p.shirt_number, "lineup_role": p.lineup_role})
    if (nid, team) not in b.plays_for:
        b.plays_for.add((nid, team))
        b.g.add_edge(nid, team, "PLAYS_FOR")
    return nid


def build_fact(b: GraphBuilder, f: FactEntry, game: int, team: int, player: int) -> int:
    g = b.g
    nid = g.add_node(
        "Fact",
        {
            "kind": f.fact_type.kind,
            "type": int(f.fact_type),
            "time": f.time,
            "subject_player": f.subject_player,
            "detail": f.detail,
        },
    )
    g.add_edge(nid, game, "IS_PART_OF")
    g.add_edge(nid, team, "ASSOCIATED_TO")
    g.add_edge(player, nid, PLAYER_EDGE[f.fact_type])
    return nid


def _group(records: Iterable, attr: str = "game_id") -> dict[str, list]:
    out: dict[str, list] = defaultdict(list)
    for r in records:
        out[getattr(r, attr)].append(r)
    return out


def build_all(dataset: Dataset, entities: EntityDictionary | None = None) -> BuildOutput:
    """Build and freeze both graphs. Output is a pure function of ``dataset``."""
    entities = entities or EntityDictionary()
    events = _group(dataset.events)
    players = _group(dataset.players)

    lb = GraphBuilder(LABELS, entities)
    cb = GraphBuilder(CAPTIONS, entities)
    for rec in dataset.games:
        game, home, away = build_game_and_teams(lb, rec)
        for ev in events.get(rec.game_id, ()):
            build_event(lb, ev, game, home, away)

        game, home, away = build_game_and_teams(cb, rec)
        for p in players.get(rec.game_id, ()):
            team = home if p.team_side is TeamSide.HOME else away
            pid = build_player(cb, p, game, team)
            for f in p.facts:
                build_fact(cb, f, game, team, pid)

    entities.finalize_aliases()
    lb.g.freeze()
    cb.g.freeze()
    stats = {LABELS: graph_stats(lb.g), CAPTIONS: graph_stats(cb.g)}
    return BuildOutput(labels_kg=lb.g, captions_kg=cb.g, entity_dict=entities, build_stats=stats)


SNAPSHOT_FILES = {LABELS: "labels.kgf", CAPTIONS: "captions.kgf"}
ENTITIES_FILE = "entities.json"
STATS_FILE = "stats.json"


def write_build(out: BuildOutput, directory: str | Path) -> list[Path]:
    """Write both snapshots, the entity dictionary and the stats; returns the paths."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, fname in SNAPSHOT_FILES.items():
        p = d / fname
        p.write_bytes(snapshot.dumps(out.graph(name)))
        paths.append(p)
    p = d / ENTITIES_FILE
    p.write_text(out.entity_dict.to_json(), "utf-8")
    paths.append(p)
    p = d / STATS_FILE
    p.write_text(json.dumps(out.build_stats, indent=1, ensure_ascii=False) + "\n", "utf-8")
    paths.append(p)
    return paths


def read_build(directory: str | Path) -> BuildOutput:
    """Load what :func:`write_build` wrote. Missing files raise ``FileNotFoundError``."""
    d = Path(directory)
    graphs = {}
    for name, fname in SNAPSHOT_FILES.items():
        g = snapshot.loads((d / fname).read_bytes())
        g.name = name
        graphs[name] = g
    entities = EntityDictionary.from_dict(json.loads((d / ENTITIES_FILE).read_text("utf-8")))
    stats = {name: graph_stats(g) for name, g in graphs.items()}
    return BuildOutput(graphs[LABELS], graphs[CAPTIONS], entities, stats)
