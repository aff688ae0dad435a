"""Entity mentions in free text and typo repair against the dictionary.

Detection is deliberately simple: exact (case-insensitive) hits on any
dictionary surface form first, then runs of capitalized words that did not
hit anything are fuzzy-matched by edit distance.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from ..entities import KINDS, EntityDictionary
from ..ingest import canonical_season
from ..textdist import levenshtein

MAX_NGRAM = 4
MIN_FUZZY_LEN = 4

#: Capitalized words that start questions or sit in them without naming anything.
STOPWORDS = frozenset(
    """a an and are calculate can count did do does find for from give has have how i in is
    list make me name of or show tell the was were what when where which who whom why with
    yes no please season seasons game games team teams league leagues player players
    first second half""".split()
)

_WORD = re.compile(r"[^\W\d_][\w'’\-]*\.?")
_SEASON = re.compile(r"(?<![\d])(\d{4}|\d{2})\s*[-/–]\s*(\d{4}|\d{2})(?![\d])")


@dataclass(frozen=True)
class Mention:
    start: int
    end: int
    text: str
    names: tuple[tuple[str, str], ...]  # (kind, canonical) in KINDS order

    def name(self, kind: str) -> str | None:
        for k, n in self.names:
            if k == kind:
                return n
        return None

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.names)


@dataclass(frozen=True)
class Repair:
    start: int
    end: int
    original: str
    replacement: str | None  # None: nothing in the dictionary is close enough
    distance: int | None
    status: str  # repaired | ambiguous | unresolved
    candidates: tuple[str, ...] = ()

    @property
    def applied(self) -> bool:
        return self.replacement is not None

    def to_dict(self) -> dict:
        return {
            "span": [self.start, self.end],
            "original": self.original,
            "replacement": self.replacement,
            "distance": self.distance,
            "status": self.status,
            "candidates": list(self.candidates),
        }


def threshold(span: str) -> int:
    return max(1, math.ceil(len(span) / 8))


class SurfaceIndex:
    """Every surface form of a dictionary, ready for exact and fuzzy lookup."""

    def __init__(self, entities: EntityDictionary):
        forms: dict[str, dict[str, str]] = {}
        # casefold() can change length ("ß" -> "ss"), so the patterns also
        # carry every original spelling
        spellings: dict[str, set[str]] = {}
        for surface, canonical, kind in entities.surface_forms():
            key = surface.casefold()
            forms.setdefault(key, {}).setdefault(kind, canonical)
            spellings.setdefault(key, {key}).add(surface)
        self.forms = forms
        self._ordered = sorted(forms, key=lambda s: (-len(s), s))
        self._patterns = {}
        for s in self._ordered:
            alts = "|".join(re.escape(x) for x in sorted(spellings[s], key=lambda x: (-len(x), x)))
            self._patterns[s] = re.compile(r"(?<!\w)(?:" + alts + r")(?!\w)", re.IGNORECASE)

    def __len__(self) -> int:
        return len(self.forms)

    def names_for(self, surface: str) -> tuple[tuple[str, str], ...]:
        by_kind = self.forms[surface.casefold()]
        return tuple((k, by_kind[k]) for k in KINDS if k in by_kind)

    def exact(self, text: str) -> list[Mention]:
        taken = [False] * len(text)
        found = []
        for s in self._ordered:
            for m in self._patterns[s].finditer(text):
                if any(taken[m.start() : m.end()]):
                    continue
                for i in range(m.start(), m.end()):
                    taken[i] = True
                found.append(Mention(m.start(), m.end(), m.group(0), self.names_for(s)))
        return sorted(found, key=lambda m: m.start)

    def nearest(self, span: str) -> tuple[int, list[str]] | None:
        """Minimal distance within threshold and the canonical names at it."""
        limit = threshold(span)
        key = span.casefold()
        best: int | None = None
        names: set[str] = set()
        for s, by_kind in self.forms.items():
            if len(s) < MIN_FUZZY_LEN:
                continue
            d = levenshtein(key, s, limit)
            if d > limit:
                continue
            if best is None or d < best:
                best, names = d, set()
            if d == best:
                names.update(by_kind.values())
        if best is None:
            return None
        return best, sorted(names)


def _capitalized_runs(text: str, mentions: list[Mention]) -> list[list[tuple[int, int]]]:
    """Maximal runs of capitalized, non-stopword words outside ``mentions``."""
    covered = [False] * len(text)
    for m in mentions:
        for i in range(m.start, m.end):
            covered[i] = True
    runs: list[list[tuple[int, int]]] = []
    current: list[tuple[int, int]] = []
    prev_end = None
    for m in _WORD.finditer(text):
        start, end = m.start(), m.end()
        word = m.group(0)
        if word.endswith(".") and len(word) > 3:
            end -= 1  # sentence period, not an initial
            word = word[:-1]
        ok = word[0].isupper() and word.casefold().rstrip(".") not in STOPWORDS and not any(covered[start:end])
        joined = prev_end is not None and text[prev_end:start].strip() == ""
        if ok and current and joined:
            current.append((start, end))
        elif ok:
            if current:
                runs.append(current)
            current = [(start, end)]
        else:
            if current:
                runs.append(current)
            current = []
        prev_end = end
    if current:
        runs.append(current)
    return runs


def _resolve_run(text: str, run: list[tuple[int, int]], index: SurfaceIndex) -> list[Repair]:
    for n in range(min(MAX_NGRAM, len(run)), 0, -1):
        for i in range(len(run) - n + 1):
            start, end = run[i][0], run[i + n - 1][1]
            span = text[start:end]
            if len(span) < MIN_FUZZY_LEN:
                continue
            hit = index.nearest(span)
            if hit is None:
                continue
            dist, names = hit
            status = "ambiguous" if len(names) > 1 else "repaired"
            here = Repair(start, end, span, names[0], dist, status, tuple(names))
            return _resolve_run(text, run[:i], index) + [here] + _resolve_run(text, run[i + n :], index)
    if not run:
        return []
    start, end = run[0][0], run[-1][1]
    if len(text[start:end].rstrip(".")) < 3:
        return []  # initials such as "E."
    return [Repair(start, end, text[start:end], None, None, "unresolved")]


def _join_alias(text: str, run: list[tuple[int, int]], mentions: list[Mention], index: SurfaceIndex):
    """A misspelled first name right before an exact surname alias ("Edjen Hazard").

    The alias hit would otherwise hide the full name from fuzzy matching.
    Returns the words left over and the repair, if any.
    """
    end = run[-1][1]
    nxt = next((m for m in mentions if m.start >= end), None)
    if nxt is None or text[end : nxt.start].strip():
        return run, []
    if any(n.casefold() == nxt.text.casefold() for _, n in nxt.names):
        return run, []  # a full name in its own right, not an alias
    for k in range(min(MAX_NGRAM - 1, len(run)), 0, -1):
        start = run[-k][0]
        hit = index.nearest(text[start : nxt.end])
        if hit is None or hit[0] == 0:
            continue
        dist, names = hit
        status = "ambiguous" if len(names) > 1 else "repaired"
        return run[:-k], [Repair(start, nxt.end, text[start : nxt.end], names[0], dist, status, tuple(names))]
    return run, []


def scan(text: str, index: SurfaceIndex) -> tuple[list[Mention], list[Repair]]:
    mentions = index.exact(text)
    repairs: list[Repair] = []
    for run in _capitalized_runs(text, mentions):
        run, joined = _join_alias(text, run, mentions, index)
        repairs.extend(_resolve_run(text, run, index))
        repairs.extend(joined)
    return mentions, sorted(repairs, key=lambda r: r.start)


def repair_entities(question: str, entities: EntityDictionary | SurfaceIndex) -> tuple[str, list[Repair]]:
    """Replace misspelled entity names with their closest dictionary entry.

    The returned list holds applied repairs and unresolved spans; spans that
    already match a dictionary name exactly produce no entry.
    """
    index = entities if isinstance(entities, SurfaceIndex) else SurfaceIndex(entities)
    if not len(index):
        raise ValueError("entity dictionary is empty")
    _, repairs = scan(question, index)
    out = question
    for r in sorted((r for r in repairs if r.applied), key=lambda r: r.start, reverse=True):
        out = out[: r.start] + r.replacement + out[r.end :]
    return out, repairs


def find_seasons(text: str) -> list[str]:
    """Canonical ``YYYY-YYYY`` seasons mentioned in ``text``.

    Accepts ``2014-15``, ``2014/15``, ``2014-2015`` and ``15-2016``.
    """
    out = []
    for m in _SEASON.finditer(text):
        a, b = m.group(1), m.group(2)
        if len(a) == 2 and len(b) == 4:
            a = b[:2] + a
        season = canonical_season(f"{a}-{b}")
        if season and season not in out:
            out.append(season)
    return out


@dataclass
class Slots:
    """Typed values found in a question."""

    mentions: list[Mention] = field(default_factory=list)
    unresolved: list[str] = field(default_factory=list)
    seasons: list[str] = field(default_factory=list)

    def all(self, kind: str) -> list[str]:
        out = []
        for m in self.mentions:
            n = m.name(kind)
            if n is not None and n not in out:
                out.append(n)
        return out

    def first(self, kind: str) -> str | None:
        names = self.all(kind)
        return names[0] if names else None

    @property
    def season(self) -> str | None:
        return self.seasons[0] if self.seasons else None


def extract_slots(question: str, index: SurfaceIndex) -> Slots:
    mentions, repairs = scan(question, index)
    return Slots(
        mentions=mentions,
        unresolved=[r.original for r in repairs if not r.applied],
        seasons=find_seasons(question),
    )
