"""d-separation on DAGs, by explicit path enumeration.

Desk-scale graphs (n <= 6) make the brute-force definition practical: a
pair is connected given C iff some simple path is active, where a
collider is active iff it or one of its descendants lies in C and a
non-collider is active iff it is outside C.
"""

from __future__ import annotations

from .pdag import DIRECTED, Pdag


def _descendant_closure(d: Pdag, targets: frozenset[int]) -> set[int]:
    """Vertices with a directed path into the target set (inclusive)."""
    n = d.n
    out = set(targets)
    changed = True
    while changed:
        changed = False
        for u in range(n):
            if u in out:
                continue
            base = u * n
            if any(d.codes[base + v] == DIRECTED and v in out for v in range(n)):
                out.add(u)
                changed = True
    return out


def d_separated(d: Pdag, a: int, b: int, cond: frozenset[int]) -> bool:
    """True iff a and b are d-separated by cond in the DAG d."""
    n = d.n
    anc_of_cond = _descendant_closure(d, frozenset(cond))

    def active_through(prev: int, mid: int, nxt: int) -> bool:
        into_mid = d.mark(prev, mid) == DIRECTED
        out_of_mid = d.mark(mid, nxt) == DIRECTED
        if into_mid and not out_of_mid:  # collider prev -> mid <- nxt
            return mid in anc_of_cond
        return mid not in cond

    # DFS over simple paths, checking activeness incrementally
    def dfs(cur: int, prev: int | None, seen: frozenset[int]) -> bool:
        for nxt in range(n):
            if nxt in seen or not d.has_edge(cur, nxt):
                continue
            if prev is not None and not active_through(prev, cur, nxt):
                continue
            if nxt == b:
                return True
            if dfs(nxt, cur, seen | {nxt}):
                return True
        return False

    return not dfs(a, None, frozenset((a,)))
