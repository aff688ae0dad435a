"""Parsing and validation of per-game SoccerNet-style source files.

A dataset directory is laid out as ``<league>/<season>/<game>/`` with two
files per game: ``Labels-v2.json`` (timestamped match events) and
``Labels-caption.json`` (game metadata plus both lineups with per-player
facts). See ``docs/input_schema.md`` for the accepted JSON shapes.
"""

from __future__ import annotations

import enum
import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

LABELS_FILE = "Labels-v2.json"
CAPTIONS_FILE = "Labels-caption.json"

_GAME_TIME = re.compile(r"^\s*([12])\s*-\s*(\d{1,3}):([0-5]\d)\s*$")
_SCORE = re.compile(r"^\s*(\d+)\s*-\s*(\d+)\s*$")
_SEASON_FULL = re.compile(r"^(\d{4})-(\d{4})$")
_SEASON_SHORT = re.compile(r"^(\d{4})[-/](\d{2})$")
_DATE = re.compile(r"^(\d{4}-\d{2}-\d{2})")
_WS = re.compile(r"\s+")


class SchemaError(ValueError):
    """Source JSON is missing a required field or has the wrong shape."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class TeamSide(str, enum.Enum):
    HOME = "Home"
    AWAY = "Away"
    NOT_APPLICABLE = "NotApplicable"


class FactType(enum.IntEnum):
    YELLOW_CARD = 1
    RED_CARD = 2
    GOAL = 3
    OWN_GOAL = 4
    SUBSTITUTION_OUT = 6
    SUBSTITUTION_IN = 7
    ASSIST = 8

    @property
    def kind(self) -> str:
        """Textual name stored on Fact nodes, e.g. ``YellowCard``."""
        return _FACT_KIND[self]


_FACT_KIND = {
    FactType.YELLOW_CARD: "YellowCard",
    FactType.RED_CARD: "RedCard",
    FactType.GOAL: "Goal",
    FactType.OWN_GOAL: "OwnGoal",
    FactType.SUBSTITUTION_OUT: "SubstitutionOut",
    FactType.SUBSTITUTION_IN: "SubstitutionIn",
    FactType.ASSIST: "Assist",
}


@dataclass(frozen=True)
class GameRecord:
    game_id: str
    home_team: str
    away_team: str
    score_home: int
    score_away: int
    date: str
    venue: str | None
    referee: str | None
    season: str
    league: str
    round: str | None = None
    home_coach: str | None = None
    away_coach: str | None = None


@dataclass(frozen=True)
class EventAnnotation:
    game_id: str
    label: str
    half: int
    clock: int
    team_side: TeamSide
    visibility: str | None = None

    @property
    def game_time(self) -> str:
        return format_game_time(self.half, self.clock)


@dataclass(frozen=True)
class FactEntry:
    fact_type: FactType
    time: str
    subject_player: str
    detail: str


@dataclass(frozen=True)
class PlayerEntry:
    game_id: str
    name: str
    team_side: TeamSide
    shirt_number: int | None = None
    lineup_role: str | None = None
    facts: tuple[FactEntry, ...] = ()


@dataclass
class Dataset:
    games: list[GameRecord] = field(default_factory=list)
    events: list[EventAnnotation] = field(default_factory=list)
    players: list[PlayerEntry] = field(default_factory=list)


def normalize_name(raw: str) -> str:
    """Trim, collapse internal whitespace and NFC-normalize a name.

    Casing is left alone; choosing a canonical casing is the entity
    dictionary's job.
    """
    return _WS.sub(" ", unicodedata.normalize("NFC", raw)).strip()


def canonical_season(raw: str) -> str | None:
    """Return ``YYYY-YYYY`` for ``2014-2015``/``2014-15``/``2014/15``, else None."""
    raw = raw.strip()
    m = _SEASON_FULL.match(raw)
    if m:
        first, second = int(m.group(1)), int(m.group(2))
        return raw if second == first + 1 else None
    m = _SEASON_SHORT.match(raw)
    if m:
        first = int(m.group(1))
        if (first + 1) % 100 == int(m.group(2)):
            return f"{first}-{first + 1}"
    return None


def is_canonical_season(season: str) -> bool:
    return canonical_season(season) == season


def parse_game_time(text: str) -> tuple[int, int]:
    """``"1 - 07:32"`` -> ``(1, 452)``."""
    m = _GAME_TIME.match(text)
    if not m:
        raise ValueError(f"unparsable game time {text!r}")
    return int(m.group(1)), int(m.group(2)) * 60 + int(m.group(3))


def format_game_time(half: int, clock: int) -> str:
    return f"{half} - {clock // 60:02d}:{clock % 60:02d}"


def parse_team_side(raw: str, path: str, allow_na: bool = True) -> TeamSide:
    value = normalize_name(raw).lower()
    if value == "home":
        return TeamSide.HOME
    if value == "away":
        return TeamSide.AWAY
    if allow_na and value.replace("_", " ") == "not applicable":
        return TeamSide.NOT_APPLICABLE
    raise SchemaError(path, f"unknown team value {raw!r}")


def _load_json(data: bytes, what: str) -> Any:
    try:
        return json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise SchemaError("$", f"{what} is not UTF-8: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"{what} is not valid JSON: {exc}") from None


def _require(obj: Any, key: str, path: str, kind: type | tuple[type, ...] = str) -> Any:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj or obj[key] is None:
        raise SchemaError(f"{path}.{key}", "missing required field")
    value = obj[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise SchemaError(f"{path}.{key}", f"expected {_kind_name(kind)}")
    return value


def _optional(obj: dict, key: str, path: str, kind: type | tuple[type, ...] = str) -> Any:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(f"{path}.{key}", f"expected {_kind_name(kind)}")
    return value


def _kind_name(kind: type | tuple[type, ...]) -> str:
    if isinstance(kind, tuple):
        return " or ".join(k.__name__ for k in kind)
    return kind.__name__


def parse_labels_file(data: bytes, game_id: str) -> list[EventAnnotation]:
    doc = _load_json(data, LABELS_FILE)
    annotations = _require(doc, "annotations", "$", list)
    events = []
    for i, entry in enumerate(annotations):
        path = f"$.annotations[{i}]"
        label = normalize_name(_require(entry, "label", path))
        if not label:
            raise SchemaError(f"{path}.label", "empty label")
        half, clock = parse_game_time(_require(entry, "gameTime", path))
        side = parse_team_side(_require(entry, "team", path), f"{path}.team")
        events.append(
            EventAnnotation(
                game_id=game_id,
                label=label,
                half=half,
                clock=clock,
                team_side=side,
                visibility=_optional(entry, "visibility", path),
            )
        )
    return events


def _parse_fact(obj: Any, path: str) -> FactEntry:
    raw_type = _require(obj, "type", path, (int, str))
    try:
        code = int(raw_type)
    except ValueError:
        raise ValueError(f"{path}.type: fact type {raw_type!r} is not an integer") from None
    try:
        fact_type = FactType(code)
    except ValueError:
        raise ValueError(f"{path}.type: unknown fact type code {code}") from None
    triple = _require(obj, "time", path, list)
    if len(triple) != 3 or not all(isinstance(x, str) for x in triple):
        raise SchemaError(f"{path}.time", "expected [time, player, detail]")
    clock, subject, detail = (normalize_name(x) for x in triple)
    if fact_type in (FactType.YELLOW_CARD, FactType.RED_CARD) and not (clock and subject and detail):
        raise SchemaError(f"{path}.time", "card facts need time, player and reason")
    return FactEntry(fact_type=fact_type, time=clock, subject_player=subject, detail=detail)


def _parse_side(doc: dict, side: TeamSide, game_id: str) -> tuple[str | None, list[PlayerEntry]]:
    key = side.value.lower()
    path = f"$.lineup.{key}"
    block = _require(_require(doc, "lineup", "$", dict), key, "$.lineup", dict)
    coach = _optional(block, "coach", path)
    players = []
    for i, p in enumerate(_require(block, "players", path, list)):
        ppath = f"{path}.players[{i}]"
        name = normalize_name(_require(p, "name", ppath))
        if not name:
            raise SchemaError(f"{ppath}.name", "empty player name")
        facts = tuple(_parse_fact(f, f"{ppath}.facts[{j}]") for j, f in enumerate(p.get("facts") or []))
        players.append(
            PlayerEntry(
                game_id=game_id,
                name=name,
                team_side=side,
                shirt_number=_optional(p, "shirt_number", ppath, int),
                lineup_role=_optional(p, "lineup_role", ppath),
                facts=facts,
            )
        )
    return (normalize_name(coach) if coach else None), players


def parse_captions_file(
    data: bytes,
    game_id: str,
    league: str | None = None,
    season: str | None = None,
) -> tuple[GameRecord, list[PlayerEntry]]:
    """Parse a captions file; ``league``/``season`` fill in absent body fields."""
    doc = _load_json(data, CAPTIONS_FILE)
    score = _require(doc, "gameScore", "$")
    m = _SCORE.match(score)
    if not m:
        raise ValueError(f"$.gameScore: score {score!r} is not 'int - int'")
    date = _require(doc, "gameDate", "$")
    dm = _DATE.match(date.strip())
    if not dm:
        raise ValueError(f"$.gameDate: {date!r} is not an ISO-8601 date")

    raw_season = doc.get("season") or season
    if raw_season is None:
        raise SchemaError("$.season", "missing required field")
    raw_league = doc.get("league") or league
    if raw_league is None:
        raise SchemaError("$.league", "missing required field")
    rnd = doc.get("round")

    home_coach, home_players = _parse_side(doc, TeamSide.HOME, game_id)
    away_coach, away_players = _parse_side(doc, TeamSide.AWAY, game_id)
    venue = _optional(doc, "venue", "$")
    referee = _optional(doc, "referee", "$")
    record = GameRecord(
        game_id=game_id,
        home_team=normalize_name(_require(doc, "gameHomeTeam", "$")),
        away_team=normalize_name(_require(doc, "gameAwayTeam", "$")),
        score_home=int(m.group(1)),
        score_away=int(m.group(2)),
        date=dm.group(1),
        venue=normalize_name(venue) if venue else None,
        referee=normalize_name(referee) if referee else None,
        # non-canonical seasons are kept verbatim so validation can report them
        season=canonical_season(str(raw_season)) or str(raw_season),
        league=normalize_name(str(raw_league)),
        round=str(rnd) if rnd is not None else None,
        home_coach=home_coach,
        away_coach=away_coach,
    )
    return record, home_players + away_players


def dump_labels_file(events: Iterable[EventAnnotation]) -> bytes:
    """Inverse of :func:`parse_labels_file` (fields it reads)."""
    side = {TeamSide.HOME: "home", TeamSide.AWAY: "away", TeamSide.NOT_APPLICABLE: "not applicable"}
    annotations = []
    for ev in events:
        entry = {"gameTime": ev.game_time, "label": ev.label, "team": side[ev.team_side]}
        if ev.visibility is not None:
            entry["visibility"] = ev.visibility
        annotations.append(entry)
    return json.dumps({"annotations": annotations}, ensure_ascii=False, indent=1).encode("utf-8")


def dump_captions_file(game: GameRecord, players: Iterable[PlayerEntry]) -> bytes:
    """Inverse of :func:`parse_captions_file`."""
    doc: dict[str, Any] = {
        "gameHomeTeam": game.home_team,
        "gameAwayTeam": game.away_team,
        "gameScore": f"{game.score_home} - {game.score_away}",
        "gameDate": game.date,
        "league": game.league,
        "season": game.season,
    }
    for key in ("venue", "referee", "round"):
        if getattr(game, key) is not None:
            doc[key] = getattr(game, key)
    lineup: dict[str, dict] = {}
    for side, coach in ((TeamSide.HOME, game.home_coach), (TeamSide.AWAY, game.away_coach)):
        block: dict[str, Any] = {"players": []}
        if coach is not None:
            block["coach"] = coach
        lineup[side.value.lower()] = block
    for p in players:
        obj: dict[str, Any] = {"name": p.name}
        if p.shirt_number is not None:
            obj["shirt_number"] = p.shirt_number
        if p.lineup_role is not None:
            obj["lineup_role"] = p.lineup_role
        obj["facts"] = [
            {"type": int(f.fact_type), "time": [f.time, f.subject_player, f.detail]} for f in p.facts
        ]
        lineup[p.team_side.value.lower()]["players"].append(obj)
    doc["lineup"] = lineup
    return json.dumps(doc, ensure_ascii=False, indent=1).encode("utf-8")


# -- dataset level -----------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    kind: str  # dangling_reference | duplicate_game | season_format | same_teams
    message: str
    game_id: str | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message, "game_id": self.game_id}


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def render_text(self) -> str:
        if self.ok:
            return "validation: ok\n"
        lines = [f"validation: {len(self.findings)} error(s)"]
        lines += [f"  [{f.kind}] {f.message}" for f in self.findings]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"ok": self.ok, "findings": [f.to_dict() for f in self.findings]}


def validate_dataset(
    games: list[GameRecord],
    events: list[EventAnnotation],
    players: list[PlayerEntry],
) -> ValidationReport:
    report = ValidationReport()
    seen: set[str] = set()
    for g in games:
        if g.game_id in seen:
            report.findings.append(Finding("duplicate_game", f"game_id {g.game_id!r} appears more than once", g.game_id))
        seen.add(g.game_id)
        if not is_canonical_season(g.season):
            report.findings.append(Finding("season_format", f"season {g.season!r} is not YYYY-YYYY", g.game_id))
        if g.home_team == g.away_team:
            report.findings.append(Finding("same_teams", f"home and away team are both {g.home_team!r}", g.game_id))
    dangling = sorted({r.game_id for r in [*events, *players]} - seen)
    for gid in dangling:
        report.findings.append(Finding("dangling_reference", f"records reference unknown game_id {gid!r}", gid))
    return report


def iter_game_dirs(data_dir: Path) -> list[Path]:
    """Game directories under ``league/season/game``, in sorted order."""
    found = []
    for labels in sorted(Path(data_dir).glob(f"*/*/*/{LABELS_FILE}")):
        if (labels.parent / CAPTIONS_FILE).exists():
            found.append(labels.parent)
    return found


def load_dataset(data_dir: str | Path) -> Dataset:
    data_dir = Path(data_dir)
    ds = Dataset()
    for gdir in iter_game_dirs(data_dir):
        season_dir, league_dir = gdir.parent, gdir.parent.parent
        game_id = gdir.relative_to(data_dir).as_posix()
        game, players = parse_captions_file(
            (gdir / CAPTIONS_FILE).read_bytes(),
            game_id,
            league=league_dir.name,
            season=season_dir.name,
        )
        ds.games.append(game)
        ds.players.extend(players)
        ds.events.extend(parse_labels_file((gdir / LABELS_FILE).read_bytes(), game_id))
    return ds
