"""Rule backend: question categories, slot filling and query skeletons.

Rules are tried in order and the first one whose trigger and slots match
wins, so narrower categories (a player's goals in one game) come before
broader ones (a player's goals in a season).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

from ..builder import CAPTIONS, LABELS
from ..cypher.printer import quote_string as q
from .repair import Slots, SurfaceIndex, extract_slots


class NoTemplateError(ValueError):
    def __init__(self, question: str, hint: str | None):
        self.question = question
        self.hint = hint
        msg = "no question template matches"
        if hint:
            msg += f" (closest category: {hint})"
        super().__init__(msg)


@dataclass(frozen=True)
class Category:
    id: str
    title: str
    kg: str  # labels | captions | auto
    keywords: frozenset[str]


def _cat(cid: str, title: str, kg: str, words: str) -> Category:
    return Category(cid, title, kg, frozenset(words.split()))


CATEGORIES = {
    c.id: c
    for c in [
        _cat("Q1", "team or player existence", "auto", "exist exists database dataset"),
        _cat("Q2", "home events of a team in a season", LABELS, "total home goals corners events season"),
        _cat("Q3", "home advantage of a team in a season", LABELS, "home advantage calculate"),
        _cat("Q4", "goals scored by a player", CAPTIONS, "goals score scored player"),
        _cat("Q5", "cards received by a player", CAPTIONS, "yellow red cards get received"),
        _cat("Q6", "opponents of a team", "auto", "teams played against game"),
        _cat("Q7", "teams in a league and season", "auto", "teams league season"),
        _cat("Q8", "games with an event in one half", LABELS, "games first second half events"),
        _cat("Q9", "teams and leagues of a player", CAPTIONS, "teams leagues played player"),
        _cat("Q10", "goals by a player in one game", CAPTIONS, "goals score game between"),
        _cat("Q11", "assists for a scorer", CAPTIONS, "assisted assist goals"),
        _cat("Q12", "reasons for a player's cards", CAPTIONS, "why yellow red cards reason"),
        _cat("Q13", "cards given in a league or season", CAPTIONS, "yellow red cards given anyone"),
        _cat("Q14", "events in one game", LABELS, "events happened game between"),
        _cat("Q15", "when an event happened in a league season", LABELS, "when happened corners dates"),
        _cat("Q16", "information about a player", CAPTIONS, "information about player"),
        _cat("Q17", "games of a referee", "auto", "referee games refereed"),
        _cat("Q18", "coaches of a team", "auto", "coaches coach manager names"),
        _cat("Q19", "games at a venue", "auto", "games played venue stadium"),
        _cat("Q20", "information about one game", "auto", "information game match between"),
        _cat("Q21", "which of several teams won more games", "auto", "team won more games"),
        _cat("Q22", "number of games a team won", "auto", "games win won"),
        _cat("Q23", "leagues of several teams", "auto", "league leagues"),
    ]
}

#: Question words -> Labels KG event names, longest phrases first.
EVENT_WORDS = [
    ("yellow->red card", "Yellow->red card"),
    ("shots on target", "Shots on target"),
    ("shots off target", "Shots off target"),
    ("shot on target", "Shots on target"),
    ("shot off target", "Shots off target"),
    ("ball out of play", "Ball out of play"),
    ("direct free kick", "Direct free-kick"),
    ("indirect free kick", "Indirect free-kick"),
    ("yellow card", "Yellow card"),
    ("red card", "Red card"),
    ("substitution", "Substitution"),
    ("clearance", "Clearance"),
    ("throw-in", "Throw-in"),
    ("kick-off", "Kick-off"),
    ("penalt", "Penalty"),
    ("offside", "Offside"),
    ("corner", "Corner"),
    ("foul", "Foul"),
    ("goal", "Goal"),
]

EVENT_PLURALS = {"Penalty": "penalties", "Ball out of play": "balls out of play"}


def event_phrase(label: str) -> str:
    """Lower-case plural used in answers: ``Yellow card`` -> ``yellow cards``."""
    return EVENT_PLURALS.get(label, label.lower() + "s")


def find_event(text: str) -> str | None:
    low = text.lower().replace("kickoff", "kick-off").replace("throw in", "throw-in")
    for phrase, label in EVENT_WORDS:
        if phrase in low:
            return label
    return None


def card_kind(text: str) -> str | None:
    low = text.lower()
    if "yellow" in low:
        return "YellowCard"
    if "red card" in low or "red-card" in low:
        return "RedCard"
    return None


@dataclass
class Translation:
    query_text: str
    category: str
    kg: str
    slots: dict = field(default_factory=dict)
    backend: str = "rule"
    retry_count: int = 0


@dataclass
class _Ctx:
    question: str
    low: str
    slots: Slots

    def has(self, pattern: str) -> bool:
        return re.search(pattern, self.low) is not None


def _props(**kv) -> str:
    items = [f"{k}: {q(v) if isinstance(v, str) else v}" for k, v in kv.items() if v is not None]
    return " {" + ", ".join(items) + "}" if items else ""


def _between(a: str, b: str, var: str = "g") -> str:
    return (
        f"({var}.home_team = {q(a)} AND {var}.away_team = {q(b)}) OR "
        f"({var}.home_team = {q(b)} AND {var}.away_team = {q(a)})"
    )


def _game(s: Slots, league: bool = True) -> str:
    return _props(season=s.season, league=s.first("league") if league else None)


Rule = Callable[[_Ctx], "tuple[str, dict] | None"]
RULES: list[tuple[str, Rule]] = []


def rule(cid: str):
    def register(fn: Rule) -> Rule:
        RULES.append((cid, fn))
        return fn

    return register


@rule("Q21")
def _won_more(c: _Ctx):
    teams = c.slots.all("team")
    if len(teams) < 2 or not c.has(r"\b(won|win|wins)\b.*\bmore\b|\bmore\b.*\b(wins|won)\b"):
        return None
    names = "[" + ", ".join(q(t) for t in teams) + "]"
    won = (
        "(g.home_team = t.name AND g.score_home > g.score_away) OR "
        "(g.away_team = t.name AND g.score_away > g.score_home)"
    )
    text = (
        f"MATCH (t:Team)-[:PARTICIPATED_IN]->(g:Game{_game(c.slots)}) WHERE t.name IN {names} "
        f"RETURN t.name AS team, sum(CASE WHEN {won} THEN 1 ELSE 0 END) AS wins ORDER BY wins DESC, team"
    )
    return text, {"teams": teams, "season": c.slots.season}


@rule("Q22")
def _wins(c: _Ctx):
    team = c.slots.first("team")
    if team is None or not c.has(r"\bhow many\b") or not c.has(r"\b(win|won)\b"):
        return None
    text = f"MATCH (t:Team {{name: {q(team)}}})-[:WINNER]->(g:Game{_game(c.slots)}) RETURN count(g) AS wins"
    return text, {"team": team, "season": c.slots.season}


@rule("Q3")
def _home_advantage(c: _Ctx):
    team = c.slots.first("team")
    if team is None or not c.has(r"\bhome (team )?advantage\b"):
        return None
    text = (
        f"MATCH (t:Team {{name: {q(team)}}})-[:WINNER]->(g:Game{_game(c.slots)}) "
        f"RETURN sum(CASE WHEN g.home_team = {q(team)} THEN 1 ELSE -1 END) AS home_advantage, "
        f"sum(CASE WHEN g.home_team = {q(team)} THEN 1 ELSE 0 END) AS home_wins, "
        f"sum(CASE WHEN g.away_team = {q(team)} THEN 1 ELSE 0 END) AS away_wins"
    )
    return text, {"team": team, "season": c.slots.season}


@rule("Q2")
def _home_events(c: _Ctx):
    team = c.slots.first("team")
    side = "home" if c.has(r"\bhome\b") else "away" if c.has(r"\baway\b") else None
    if team is None or side is None or not c.has(r"\b(total|how many|number of|count)\b"):
        return None
    event = find_event(c.question) or "Goal"
    game = _props(season=c.slots.season, league=c.slots.first("league"), **{f"{side}_team": team})
    text = (
        f"MATCH (t:Team {{name: {q(team)}}})<-[:ASSOCIATED_TO]-(e:Event {{name: {q(event)}}})"
        f"-[:IS_PART_OF]->(g:Game{game}) RETURN count(e) AS total"
    )
    return text, {"team": team, "side": side, "event": event, "season": c.slots.season}


def _player_goals(c: _Ctx, player: str, where: str = "") -> str:
    return (
        f"MATCH (p:Player {{name: {q(player)}}})-[:SCORED]->(f:Fact {{kind: 'Goal'}})"
        f"-[:IS_PART_OF]->(g:Game{_game(c.slots)}){where} RETURN count(f) AS goals"
    )


@rule("Q10")
def _goals_in_game(c: _Ctx):
    player, teams = c.slots.first("player"), c.slots.all("team")
    if player is None or len(teams) < 2 or not c.has(r"\bgoals?\b") or not c.has(r"\b(game|match)\b"):
        return None
    text = _player_goals(c, player, f" WHERE {_between(teams[0], teams[1])}")
    return text, {"player": player, "teams": teams[:2], "season": c.slots.season}


@rule("Q4")
def _goals(c: _Ctx):
    player = c.slots.first("player")
    if player is None or not c.has(r"\bgoals?\b") or not c.has(r"\b(how many|number of|total)\b"):
        return None
    return _player_goals(c, player), {"player": player, "season": c.slots.season, "league": c.slots.first("league")}


@rule("Q11")
def _assists(c: _Ctx):
    player = c.slots.first("player")
    if player is None or not c.has(r"\bassist"):
        return None
    text = (
        f"MATCH (a:Player)-[:ASSISTED_BY]->(f:Fact {{kind: 'Assist', detail: {q(player)}}})"
        f"-[:IS_PART_OF]->(g:Game{_game(c.slots)}) "
        "RETURN a.name AS assisted_by, count(f) AS assists ORDER BY assists DESC, assisted_by"
    )
    return text, {"player": player, "season": c.slots.season}


def _card_filter(kind: str | None) -> tuple[str, str]:
    if kind is None:
        return "", " WHERE f.kind IN ['YellowCard', 'RedCard']"
    return f" {{kind: {q(kind)}}}", ""


@rule("Q12")
def _card_reasons(c: _Ctx):
    player = c.slots.first("player")
    if player is None or not c.has(r"\b(why|reason)") or not c.has(r"\bcards?\b"):
        return None
    fprops, where = _card_filter(card_kind(c.question))
    text = (
        f"MATCH (p:Player {{name: {q(player)}}})-[:RECEIVED]->(f:Fact{fprops})-[:IS_PART_OF]->(g:Game{_game(c.slots)})"
        f"{where} RETURN f.kind AS card, f.detail AS reason, f.time AS minute, g.home_team AS home_team, "
        "g.away_team AS away_team ORDER BY g.date, minute"
    )
    return text, {"player": player, "season": c.slots.season}


@rule("Q13")
def _cards_given(c: _Ctx):
    if c.slots.first("player") is not None or not c.has(r"\bcards?\b") or not c.has(r"\b(how many|number of)\b"):
        return None
    text = (
        f"MATCH (f:Fact)-[:IS_PART_OF]->(g:Game{_game(c.slots)}) WHERE f.kind IN ['YellowCard', 'RedCard'] "
        "RETURN sum(CASE WHEN f.kind = 'YellowCard' THEN 1 ELSE 0 END) AS yellow_cards, "
        "sum(CASE WHEN f.kind = 'RedCard' THEN 1 ELSE 0 END) AS red_cards, "
        "collect(CASE WHEN f.kind = 'RedCard' THEN f.subject_player END) AS red_card_players"
    )
    return text, {"season": c.slots.season, "league": c.slots.first("league")}


@rule("Q5")
def _player_cards(c: _Ctx):
    player = c.slots.first("player")
    if player is None or not c.has(r"\bcards?\b") or not c.has(r"\b(how many|number of)\b"):
        return None
    kind = card_kind(c.question)
    fprops, where = _card_filter(kind)
    text = (
        f"MATCH (p:Player {{name: {q(player)}}})-[:RECEIVED]->(f:Fact{fprops})-[:IS_PART_OF]->(g:Game{_game(c.slots)})"
        f"{where} RETURN count(f) AS cards"
    )
    return text, {"player": player, "card": kind, "season": c.slots.season}


@rule("Q14")
def _game_events(c: _Ctx):
    teams = c.slots.all("team")
    if len(teams) < 2 or not c.has(r"\bevents?\b"):
        return None
    text = (
        f"MATCH (e:Event)-[:IS_PART_OF]->(g:Game{_game(c.slots)}) WHERE {_between(teams[0], teams[1])} "
        "RETURN g.date AS date, e.game_time AS time, e.name AS event ORDER BY date, e.half, e.clock"
    )
    return text, {"teams": teams[:2], "season": c.slots.season}


@rule("Q15")
def _event_dates(c: _Ctx):
    event = find_event(c.question)
    if event is None or not c.has(r"\bwhen\b|\bdates?\b"):
        return None
    text = (
        f"MATCH (e:Event {{name: {q(event)}}})-[:IS_PART_OF]->(g:Game{_game(c.slots)}) "
        "RETURN g.date AS date, e.game_time AS time, g.home_team AS home_team, g.away_team AS away_team "
        "ORDER BY date, e.half, e.clock"
    )
    return text, {"event": event, "season": c.slots.season, "league": c.slots.first("league")}


@rule("Q8")
def _half_events(c: _Ctx):
    event = find_event(c.question)
    half = 1 if c.has(r"\bfirst half\b") else 2 if c.has(r"\bsecond half\b") else None
    if event is None or half is None:
        return None
    text = (
        f"MATCH (e:Event {{name: {q(event)}, half: {half}}})-[:IS_PART_OF]->(g:Game{_game(c.slots)}) "
        "RETURN DISTINCT g.date AS date, g.home_team AS home_team, g.away_team AS away_team ORDER BY date"
    )
    return text, {"event": event, "half": half, "season": c.slots.season, "league": c.slots.first("league")}


@rule("Q6")
def _opponents(c: _Ctx):
    team = c.slots.first("team")
    if team is None or not c.has(r"\bagainst\b"):
        return None
    text = (
        f"MATCH (t:Team {{name: {q(team)}}})-[:PARTICIPATED_IN]->(g:Game{_game(c.slots)})<-[:PARTICIPATED_IN]-(o:Team) "
        "RETURN DISTINCT o.name AS opponent ORDER BY opponent"
    )
    return text, {"team": team, "season": c.slots.season, "league": c.slots.first("league")}


@rule("Q9")
def _player_teams(c: _Ctx):
    player = c.slots.first("player")
    if player is None or not c.has(r"\b(teams?|clubs?|leagues?)\b"):
        return None
    text = (
        f"MATCH (p:Player {{name: {q(player)}}})-[:PLAYS_FOR]->(t:Team) "
        "RETURN DISTINCT t.name AS team, t.league AS league, t.season AS season ORDER BY team, league, season"
    )
    return text, {"player": player}


@rule("Q7")
def _league_teams(c: _Ctx):
    league = c.slots.first("league")
    if league is None or not c.has(r"\bteams\b"):
        return None
    text = (
        f"MATCH (t:Team{_props(league=league, season=c.slots.season)}) "
        "RETURN DISTINCT t.name AS team ORDER BY team"
    )
    return text, {"league": league, "season": c.slots.season}


@rule("Q23")
def _team_leagues(c: _Ctx):
    teams = c.slots.all("team")
    if not teams or not c.has(r"\bleagues?\b"):
        return None
    names = "[" + ", ".join(q(t) for t in teams) + "]"
    text = (
        f"MATCH (t:Team) WHERE t.name IN {names} "
        "RETURN DISTINCT t.name AS team, t.league AS league ORDER BY team, league"
    )
    return text, {"teams": teams}


@rule("Q17")
def _referee(c: _Ctx):
    ref = c.slots.first("referee")
    if ref is None:
        return None
    text = (
        f"MATCH (g:Game {{referee: {q(ref)}}}) RETURN g.date AS date, g.home_team AS home_team, "
        "g.away_team AS away_team, g.score AS score, g.league AS league ORDER BY date"
    )
    return text, {"referee": ref}


@rule("Q18")
def _coaches(c: _Ctx):
    team = c.slots.first("team")
    if team is None or not c.has(r"\b(coach|coaches|manager|managers)\b"):
        return None
    text = (
        f"MATCH (t:Team {{name: {q(team)}}})-[r:PARTICIPATED_IN]->(g:Game{_game(c.slots)}) "
        "RETURN DISTINCT r.coach AS coach ORDER BY coach"
    )
    return text, {"team": team, "season": c.slots.season}


@rule("Q19")
def _venue(c: _Ctx):
    venue = c.slots.first("venue")
    if venue is None:
        return None
    text = (
        f"MATCH (g:Game {{venue: {q(venue)}}}) RETURN g.date AS date, g.home_team AS home_team, "
        "g.away_team AS away_team, g.score AS score ORDER BY date"
    )
    return text, {"venue": venue}


@rule("Q20")
def _game_info(c: _Ctx):
    teams = c.slots.all("team")
    if len(teams) < 2 or not c.has(r"\b(game|match)\b"):
        return None
    fields = "date home_team away_team score league season round venue referee home_coach away_coach".split()
    cols = ", ".join(f"g.{f} AS {f}" for f in fields)
    text = f"MATCH (g:Game{_game(c.slots)}) WHERE {_between(teams[0], teams[1])} RETURN {cols} ORDER BY date"
    return text, {"teams": teams[:2], "season": c.slots.season}


@rule("Q16")
def _player_info(c: _Ctx):
    player = c.slots.first("player")
    if player is None:
        return None
    text = (
        f"MATCH (p:Player {{name: {q(player)}}})-[r:PLAYED_IN]->(g:Game) RETURN g.date AS date, "
        "g.home_team AS home_team, g.away_team AS away_team, g.score AS score, "
        "r.shirt_number AS shirt_number, r.lineup_role AS role ORDER BY date"
    )
    return text, {"player": player}


@rule("Q1")
def _exists(c: _Ctx):
    if not (c.has(r"^\s*(is|are|does|do)\b") and c.has(r"\b(database|dataset|data set)\b")) and not c.has(r"\bexists?\b"):
        return None
    player = c.slots.first("player")
    team = c.slots.first("team")
    if player is not None and (team is None or c.question.find(player) < c.question.find(team)):
        label, name = "Player", player
    elif team is not None:
        label, name = "Team", team
    elif c.slots.unresolved:
        label, name = "Team", c.slots.unresolved[0]
    else:
        return None
    text = f"MATCH (n:{label} {{name: {q(name)}}}) RETURN count(n) AS matches"
    return text, {"name": name, "label": label}


#: Evaluation order, narrowest first.
ORDER = "Q21 Q22 Q3 Q2 Q10 Q4 Q11 Q12 Q13 Q5 Q14 Q15 Q8 Q6 Q9 Q7 Q23 Q17 Q18 Q19 Q20 Q1 Q16".split()
RULES.sort(key=lambda r: ORDER.index(r[0]))


def nearest_category(question: str) -> str | None:
    words = set(re.findall(r"[a-z]+", question.lower()))
    best, best_score = None, 0.0
    for cid, cat in CATEGORIES.items():
        score = len(words & cat.keywords) / len(cat.keywords)
        if score > best_score:
            best, best_score = cid, score
    return best


class RuleBackend:
    """Deterministic template translator."""

    name = "rule"
    deterministic = True

    def __init__(self, index: SurfaceIndex):
        self.index = index

    def describe(self) -> dict:
        return {"name": self.name, "deterministic": self.deterministic}

    def translate_full(self, question: str) -> Translation:
        ctx = _Ctx(question, question.lower(), extract_slots(question, self.index))
        for cid, fn in RULES:
            hit = fn(ctx)
            if hit is not None:
                text, slots = hit
                return Translation(text, cid, CATEGORIES[cid].kg, slots)
        hint = nearest_category(question)
        raise NoTemplateError(question, f"{hint} ({CATEGORIES[hint].title})" if hint else None)

    def translate(self, question: str, schema_card=None, few_shots=None) -> str:
        return self.translate_full(question).query_text


def translate_rule(question: str, index: SurfaceIndex, schema_card=None) -> str:
    return RuleBackend(index).translate(question, schema_card)
