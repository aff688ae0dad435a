"""Deterministic answer sentences built only from the retrieved table."""

from __future__ import annotations

import re

from ..cypher.result import ResultTable, display
from .repair import find_seasons
from .templates import event_phrase

NO_DATA = "There is no matching data for this question."


def plural(n, word: str, many: str | None = None) -> str:
    return f"{display(n)} {word if n == 1 else (many or word + 's')}"


def enumerate_items(items: list[str]) -> str:
    """``a, b and c``; every item is kept."""
    if not items:
        return ""
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + " and " + items[-1]


def _scope(slots: dict) -> str:
    parts = []
    if slots.get("league"):
        parts.append(f" in {slots['league']}")
    if slots.get("season"):
        parts.append(f" in the {slots['season']} season")
    return "".join(parts)


def _row_item(columns: list[str], row: tuple) -> str:
    head = display(row[0])
    rest = [f"{c}: {display(v)}" for c, v in zip(columns[1:], row[1:]) if v is not None]
    return f"{head} ({', '.join(rest)})" if rest else head


def _row_lines(t: ResultTable) -> str:
    lines = []
    for r in t.rows:
        cells = [f"{c}: {display(v)}" for c, v in zip(t.columns, r) if v is not None]
        lines.append("- " + ", ".join(cells))
    return "\n".join(lines)


def _empty(t: ResultTable) -> bool:
    return not t.rows


_LIST_LEADS = {
    "Q6": lambda s: f"Teams that played against {s.get('team')}{_scope(s)}",
    "Q7": lambda s: f"Teams in {s.get('league')}{_scope({'season': s.get('season')})}",
    "Q9": lambda s: f"{s.get('player')} has played for",
    "Q11": lambda s: f"Goals by {s.get('player')}{_scope(s)} were assisted by",
    "Q18": lambda s: f"Coaches of {s.get('team')}{_scope(s)}",
    "Q23": lambda s: "Leagues of the requested teams",
}

_TABLE_LEADS = {
    "Q8": lambda s: f"Games with {event_phrase(s['event'])} in the {'first' if s.get('half') == 1 else 'second'} half{_scope(s)}",
    "Q12": lambda s: f"Cards received by {s.get('player')}{_scope(s)}",
    "Q14": lambda s: f"Events in the game between {' and '.join(s.get('teams', []))}{_scope(s)}",
    "Q15": lambda s: f"Times when {event_phrase(s['event'])} happened{_scope(s)}",
    "Q16": lambda s: f"Games played by {s.get('player')}",
    "Q17": lambda s: f"Games refereed by {s.get('referee')}",
    "Q19": lambda s: f"Games played at {s.get('venue')}",
    "Q20": lambda s: f"Game between {' and '.join(s.get('teams', []))}{_scope(s)}",
}


def synthesize_answer(question: str, context: ResultTable, category: str | None = None, slots: dict | None = None) -> str:
    """Render ``context`` as an answer; empty tables never yield invented values."""
    s = slots or {}
    t = context
    if _empty(t):
        if category == "Q1":
            return f"No, {s.get('name')} is not in the database."
        return NO_DATA
    first = t.rows[0]
    if category == "Q1":
        n = first[0]
        if isinstance(n, int) and n > 0:
            return f"Yes, {s.get('name')} is in the database ({plural(n, 'matching ' + s.get('label', 'node').lower() + ' node')})."
        return f"No, {s.get('name')} is not in the database."
    if category == "Q2":
        what = f"{s.get('side', 'home')} {event_phrase(s.get('event', 'Goal'))}"
        return f"The total number of {what} for {s.get('team')}{_scope(s)} is {display(first[0])}."
    if category == "Q3":
        adv, home, away = first
        return (
            f"The home advantage for {s.get('team')}{_scope(s)} is {display(adv)}: "
            f"{plural(home, 'home win')} against {plural(away, 'away win')}."
        )
    if category == "Q4":
        return f"{s.get('player')} scored {plural(first[0], 'goal')}{_scope(s)}."
    if category == "Q10":
        teams = " and ".join(s.get("teams", []))
        return f"{s.get('player')} scored {plural(first[0], 'goal')} in the game between {teams}{_scope(s)}."
    if category == "Q5":
        card = {"YellowCard": "yellow card", "RedCard": "red card"}.get(s.get("card"), "card")
        return f"{s.get('player')} received {plural(first[0], card)}{_scope(s)}."
    if category == "Q13":
        yellow, red, players = first
        text = f"{plural(yellow, 'yellow card')} and {plural(red, 'red card')} were given{_scope(s)}."
        if players:
            return text + f" Red cards were received by {enumerate_items([display(p) for p in players])}."
        return text + " Nobody received a red card."
    if category == "Q22":
        return f"{s.get('team')} won {plural(first[0], 'game')}{_scope(s)}."
    if category == "Q21":
        tally = [f"{display(r[0])} {display(r[1])}" for r in t.rows]
        text = f"Games won{_scope(s)}: {enumerate_items(tally)}."
        if len(t.rows) > 1 and t.rows[0][1] == t.rows[1][1]:
            tied = [display(r[0]) for r in t.rows if r[1] == t.rows[0][1]]
            return text + f" {enumerate_items(tied)} are tied."
        return text + f" {display(first[0])} won more games."
    if category in _LIST_LEADS:
        items = [_row_item(t.columns, r) for r in t.rows]
        return f"{_LIST_LEADS[category](s)}: {enumerate_items(items)}."
    if category in _TABLE_LEADS:
        return f"{_TABLE_LEADS[category](s)} ({plural(len(t.rows), 'result')}):\n{_row_lines(t)}"
    if len(t.rows) == 1 and len(t.columns) == 1:
        return f"The answer is {display(first[0])}."
    return f"Results ({plural(len(t.rows), 'row')}):\n{_row_lines(t)}"


_NUMBER = re.compile(r"\d+")


def fabricated_numbers(answer: str, question: str, context: ResultTable) -> set[str]:
    """Numbers in ``answer`` that appear neither in the context nor in the question.

    The row count, column names and canonical spellings of seasons in the
    question are allowed as well.
    """
    allowed = set(_NUMBER.findall(question)) | {str(len(context.rows))}
    for c in context.columns:
        allowed.update(_NUMBER.findall(c))
    for season in find_seasons(question):
        allowed.update(_NUMBER.findall(season))
    for r in context.rows:
        for v in r:
            allowed.update(_NUMBER.findall(display(v)))
    return set(_NUMBER.findall(answer)) - allowed
