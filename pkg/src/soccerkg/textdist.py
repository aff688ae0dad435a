from __future__ import annotations


def levenshtein(a: str, b: str, cap: int | None = None) -> int:
    """Edit distance with unit insert/delete/substitute costs.

    With ``cap`` set, returns ``cap + 1`` as soon as the distance is known
    to exceed it.
    """
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if cap is not None and len(a) - len(b) > cap:
        return cap + 1
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        if cap is not None and min(cur) > cap:
            return cap + 1
        prev = cur
    if cap is not None and prev[-1] > cap:
        return cap + 1
    return prev[-1]


def closest(word: str, candidates, max_distance: int = 2) -> list[str]:
    """Candidates within ``max_distance`` (case-insensitive), nearest first."""
    scored = []
    for c in candidates:
        d = levenshtein(word.lower(), c.lower(), max_distance)
        if d <= max_distance:
            scored.append((d, c))
    return [c for _, c in sorted(scored)]
