"""Distance computations over the class posets.

Exact model-oriented distance via A* on the Hasse diagram, down-up and
up-down restricted searches with early exit at the inflection point, the
skeleton + collider-alignment lower bound for CPDAGs, the pseudo-rank
path distance for MPDAGs, structural Hamming distances, closed forms,
and a catalog-backed brute-force oracle. All values are exact integers.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import (
    BudgetExceededError,
    GraphdistError,
    InvalidGraphError,
    UnsupportedClassError,
)
from .pdag import (
    ABSENT,
    DIRECTED,
    UNDIRECTED,
    Pdag,
    check_same_n,
    pair_index,
    v_structures,
    vertex_pairs,
)
from .poset import (
    NeighborCache,
    _cache_for,
    pseudo_rank,
    rank_of_valid,
)
from .validity import GraphClassSpec, explain_invalid

_GRADED = {("ug", False), ("ug", True), ("dag", False), ("dag", True),
           ("cpdag", False), ("cpdag", True), ("mpdag", True)}


def _is_graded(spec: GraphClassSpec) -> bool:
    return (spec.kind, spec.polytree) in _GRADED


@dataclass
class DistanceReport:
    value: int
    method: str  # astar | downup | updown | pseudo | closed_form | bruteforce
    path: Optional[list[Pdag]] = None
    expansions: int = 0
    lower_bound: Optional[int] = None
    upper_bound: Optional[int] = None
    expanded: Optional[list[Pdag]] = None  # populated when track_expanded


# -- structural Hamming distances ------------------------------------------------


def shd1(g1: Pdag, g2: Pdag) -> int:
    """Count of unordered pairs whose adjacency-matrix entries differ in
    either direction."""
    check_same_n(g1, g2)
    n = g1.n
    x = g1.amask ^ g2.amask
    total = 0
    for i, j in vertex_pairs(n):
        if x >> (i * n + j) & 1 or x >> (j * n + i) & 1:
            total += 1
    return total


def shd2(g1: Pdag, g2: Pdag) -> int:
    """Count of ordered adjacency-matrix entries that differ."""
    check_same_n(g1, g2)
    return (g1.amask ^ g2.amask).bit_count()


# -- CPDAG lower bound -------------------------------------------------------------


@dataclass
class VDiscrepancy:
    """Colliders present in exactly one graph whose edges lie in both
    skeletons and whose endpoints are adjacent in neither, partitioned
    into vertex-disjoint groups."""

    triples: frozenset[tuple[int, int, int]]
    groups: list[frozenset[tuple[int, int, int]]] = field(default_factory=list)


def v_discrepancy(g1: Pdag, g2: Pdag) -> VDiscrepancy:
    check_same_n(g1, g2)
    n = g1.n
    common = g1.skel_mask & g2.skel_mask
    union = g1.skel_mask | g2.skel_mask

    def pairbit(a: int, b: int) -> int:
        return 1 << pair_index(a, b, n)

    triples = []
    for t in v_structures(g1) ^ v_structures(g2):
        a, b, c = t
        if (
            common & pairbit(a, b)
            and common & pairbit(b, c)
            and not union & pairbit(a, c)
        ):
            triples.append(t)
    # group triples sharing any vertex
    parent = list(range(len(triples)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in itertools.combinations(range(len(triples)), 2):
        if set(triples[i]) & set(triples[j]):
            parent[find(i)] = find(j)
    by_root: dict[int, list] = {}
    for i, t in enumerate(triples):
        by_root.setdefault(find(i), []).append(t)
    groups = [frozenset(v) for v in by_root.values()]
    groups.sort(key=lambda s: sorted(s))
    return VDiscrepancy(frozenset(triples), groups)


def _op_cover_edge(state, i, j):
    """Shield colliders with endpoints {i, j} by a covering edge."""
    return frozenset(t for t in state if {t[0], t[2]} != {i, j})


def _op_edge_removal(state, i, j):
    """Drop colliders using {i, j} as one of their two edges."""
    e = {i, j}
    return frozenset(t for t in state if {t[0], t[1]} != e and {t[1], t[2]} != e)


def min_alignment_ops(group: frozenset) -> int:
    """Fewest cover-edge / edge-removal operations emptying the group,
    by breadth-first search over reachable triple subsets."""
    if not group:
        return 0
    start = frozenset(group)
    seen = {start}
    frontier = [start]
    steps = 0
    while frontier:
        steps += 1
        nxt = []
        for state in frontier:
            pairs = set()
            for a, b, c in state:
                pairs.add((a, b) if a < b else (b, a))
                pairs.add((b, c) if b < c else (c, b))
                pairs.add((a, c) if a < c else (c, a))
            for i, j in sorted(pairs):
                for op in (_op_cover_edge, _op_edge_removal):
                    new = op(state, i, j)
                    if new == state or new in seen:
                        continue
                    if not new:
                        return steps
                    seen.add(new)
                    nxt.append(new)
        frontier = nxt
    raise GraphdistError("alignment search exhausted without emptying the set")


def cpdag_lower_bound(g1: Pdag, g2: Pdag, cache: Optional[NeighborCache] = None) -> int:
    """Skeleton symmetric difference plus twice the minimal collider
    alignment count; a lower bound on the model-oriented distance."""
    check_same_n(g1, g2)
    if cache is not None and cache.spec.kind == "cpdag":
        cache.require_valid(g1)
        cache.require_valid(g2)
    else:
        for g in (g1, g2):
            reason = explain_invalid(g, GraphClassSpec("cpdag"))
            if reason is not None:
                raise InvalidGraphError(f"not a valid CPDAG: {reason}")
    disc = v_discrepancy(g1, g2)
    skel_diff = (g1.skel_mask ^ g2.skel_mask).bit_count()
    return skel_diff + 2 * sum(min_alignment_ops(s) for s in disc.groups)


# -- A* engine ----------------------------------------------------------------------


def _astar(
    start: Pdag,
    h_fn: Callable[[Pdag], int],
    expand_fn: Callable[[Pdag], list[Pdag]],
    goal_fn: Callable[[Pdag], bool],
    tail_fn: Callable[[Pdag], int],
    want_path: bool,
    track_expanded: bool,
):
    """Best-first search with lazy reopening and deterministic (f, key)
    tie-breaking. Admissible heuristics only; no closed set, so stale
    queue entries are skipped by g-score comparison at pop time."""
    start_key = start.key()
    gscore = {start_key: 0}
    graphs = {start_key: start}
    parent: dict[bytes, Optional[bytes]] = {start_key: None}
    heap = [(h_fn(start), start_key, 0)]
    expansions = 0
    expanded = [] if track_expanded else None
    while heap:
        _, key, gv = heapq.heappop(heap)
        if gv != gscore[key]:
            continue
        cur = graphs[key]
        expansions += 1
        if expanded is not None:
            expanded.append(cur)
        if goal_fn(cur):
            path = None
            if want_path:
                path = []
                k: Optional[bytes] = key
                while k is not None:
                    path.append(graphs[k])
                    k = parent[k]
                path.reverse()
            return gv + tail_fn(cur), cur, expansions, path, expanded
        for nb in expand_fn(cur):
            nk = nb.key()
            tentative = gv + 1
            old = gscore.get(nk)
            if old is None or tentative < old:
                gscore[nk] = tentative
                graphs[nk] = nb
                parent[nk] = key
                heapq.heappush(heap, (tentative + h_fn(nb), nk, tentative))
    raise GraphdistError("search space exhausted without reaching the target")


def _default_heuristic(spec: GraphClassSpec, target: Pdag) -> Callable[[Pdag], int]:
    if spec.kind == "ug":
        return lambda g: shd1(g, target)
    if spec.kind == "dag":
        return lambda g: shd2(g, target)
    if spec.kind == "cpdag":
        tm = target.skel_mask
        return lambda g: (g.skel_mask ^ tm).bit_count()
    return lambda g: shd2(g, target)  # polytree MPDAG


_HEURISTICS = ("default", "none", "skeleton", "shd1", "shd2")


def _named_heuristic(name: str, spec: GraphClassSpec, target: Pdag):
    if name == "default":
        return _default_heuristic(spec, target)
    if name == "none":
        return lambda g: 0
    if name == "skeleton":
        tm = target.skel_mask
        return lambda g: (g.skel_mask ^ tm).bit_count()
    if name == "shd1":
        return lambda g: shd1(g, target)
    if name == "shd2":
        return lambda g: shd2(g, target)
    raise ValueError(f"unknown heuristic {name!r}; pick one of {_HEURISTICS}")


def model_distance(
    g1: Pdag,
    g2: Pdag,
    spec: GraphClassSpec,
    heuristic: str = "default",
    cache: Optional[NeighborCache] = None,
    include_path: bool = False,
    track_expanded: bool = False,
) -> DistanceReport:
    """Exact shortest Hasse-path length between g1 and g2 plus a witness.

    Rejects general MPDAGs, whose covering structure has no graphical
    characterization; route those to pseudo_distance or
    brute_force_distance.
    """
    if spec.kind == "mpdag" and not spec.polytree:
        raise UnsupportedClassError(
            "exact model distance over general MPDAGs is only available "
            "through brute_force_distance; pseudo_distance gives an upper bound"
        )
    check_same_n(g1, g2)
    cache = _cache_for(spec, cache)
    cache.require_valid(g1)
    cache.require_valid(g2)
    h = _named_heuristic(heuristic, spec, g2)
    target_key = g2.key()
    value, _, expansions, path, expanded = _astar(
        g1,
        h_fn=h,
        expand_fn=lambda g: cache.down(g) + cache.up(g),
        goal_fn=lambda g: g.key() == target_key,
        tail_fn=lambda g: 0,
        want_path=include_path,
        track_expanded=track_expanded,
    )
    return DistanceReport(
        value=value, method="astar", path=path, expansions=expansions,
        expanded=expanded,
    )


# -- down-up / up-down ---------------------------------------------------------------


def _meet_rank_cap(g1: Pdag, g2: Pdag, spec: GraphClassSpec) -> int:
    """Upper bound on the rank of any common lower bound of g1 and g2."""
    if spec.kind == "ug":
        return (g1.skel_mask & g2.skel_mask).bit_count()
    if spec.kind == "dag":
        return (g1.dir_mask & g2.dir_mask).bit_count()
    if spec.kind == "cpdag":
        return (g1.skel_mask & g2.skel_mask).bit_count()
    return 2 * (g1.skel_mask & g2.skel_mask).bit_count()  # pseudo-rank cap


def down_up_distance(
    g1: Pdag,
    g2: Pdag,
    spec: GraphClassSpec,
    cache: Optional[NeighborCache] = None,
    include_path: bool = False,
) -> DistanceReport:
    """Shortest path that first descends from g1 and then ascends to g2.

    Downward-only A*; the search stops at the first expanded graph x with
    rank(x) <= cap and x <= g2, returning g(x) plus the rank gap to g2,
    the exact length of the ascending half in a graded poset.
    """
    if not _is_graded(spec):
        raise UnsupportedClassError(f"{spec.label()} has no rank function")
    check_same_n(g1, g2)
    cache = _cache_for(spec, cache)
    cache.require_valid(g1)
    cache.require_valid(g2)
    cap = _meet_rank_cap(g1, g2, spec)
    rank2 = rank_of_valid(g2, spec)

    if spec.kind == "mpdag":
        def h(g: Pdag) -> int:
            est = pseudo_rank(g, validate=False) + rank2 - 2 * _meet_rank_cap(g, g2, spec)
            return max(est, 0)
    else:
        def h(g: Pdag) -> int:
            return rank_of_valid(g, spec) + rank2 - 2 * _meet_rank_cap(g, g2, spec)

    def goal(g: Pdag) -> bool:
        return rank_of_valid(g, spec) <= cap and cache.leq(g, g2)

    expand = cache.pseudo_down if spec.kind == "mpdag" else cache.down
    value, inflection, expansions, path, _ = _astar(
        g1,
        h_fn=h,
        expand_fn=expand,
        goal_fn=goal,
        tail_fn=lambda g: rank2 - rank_of_valid(g, spec),
        want_path=include_path,
        track_expanded=False,
    )
    if include_path and path is not None:
        path = path + _ascending_chain(inflection, g2, spec, cache)[1:]
    return DistanceReport(value=value, method="downup", path=path, expansions=expansions)


def up_down_distance(
    g1: Pdag,
    g2: Pdag,
    spec: GraphClassSpec,
    cache: Optional[NeighborCache] = None,
    include_path: bool = False,
) -> DistanceReport:
    """Dual of down_up_distance: ascend from g1 until a graph above g2 is
    expanded, then account the descending half by the rank gap.

    Only classes with a greatest element support this (UGs and CPDAGs;
    DAGs and the polytree restrictions have none).
    """
    if (spec.kind, spec.polytree) not in (("ug", False), ("cpdag", False)):
        raise UnsupportedClassError(
            f"up-down distance needs a greatest element and a rank function; "
            f"{spec.label()} lacks one of them"
        )
    check_same_n(g1, g2)
    cache = _cache_for(spec, cache)
    cache.require_valid(g1)
    cache.require_valid(g2)
    rank2 = rank_of_valid(g2, spec)
    sk2 = g2.skel_mask

    def h(g: Pdag) -> int:
        return 2 * (sk2 | g.skel_mask).bit_count() - rank2 - rank_of_valid(g, spec)

    def goal(g: Pdag) -> bool:
        return sk2 & ~g.skel_mask == 0 and cache.leq(g2, g)

    value, inflection, expansions, path, _ = _astar(
        g1,
        h_fn=h,
        expand_fn=cache.up,
        goal_fn=goal,
        tail_fn=lambda g: rank_of_valid(g, spec) - rank2,
        want_path=include_path,
        track_expanded=False,
    )
    if include_path and path is not None:
        path = path + _descending_chain(inflection, g2, spec, cache)[1:]
    return DistanceReport(value=value, method="updown", path=path, expansions=expansions)


def _ascending_chain(lo: Pdag, hi: Pdag, spec, cache: NeighborCache) -> list[Pdag]:
    """A saturated chain lo = x0 < x1 < ... < hi through covers below hi."""
    chain = [lo]
    cur = lo
    guard = 0
    while cur.key() != hi.key():
        ups = cache.pseudo_up(cur) if spec.kind == "mpdag" and not spec.polytree else cache.up(cur)
        step = next(nb for nb in ups if cache.leq(nb, hi))
        chain.append(step)
        cur = step
        guard += 1
        if guard > 4 * hi.n * hi.n:
            raise GraphdistError("chain construction failed to terminate")
    return chain


def _descending_chain(hi: Pdag, lo: Pdag, spec, cache: NeighborCache) -> list[Pdag]:
    chain = [hi]
    cur = hi
    guard = 0
    while cur.key() != lo.key():
        step = next(nb for nb in cache.down(cur) if cache.leq(lo, nb))
        chain.append(step)
        cur = step
        guard += 1
        if guard > 4 * hi.n * hi.n:
            raise GraphdistError("chain construction failed to terminate")
    return chain


# -- closed forms ------------------------------------------------------------------


def closed_form_distance(
    g1: Pdag,
    g2: Pdag,
    spec: GraphClassSpec,
    cache: Optional[NeighborCache] = None,
    include_path: bool = False,
) -> DistanceReport:
    """Edge symmetric difference for UGs/DAGs; rank gap for comparable
    pairs in any graded class. Other combinations are rejected."""
    check_same_n(g1, g2)
    cache = _cache_for(spec, cache)
    cache.require_valid(g1)
    cache.require_valid(g2)
    if spec.kind in ("ug", "dag") and not spec.polytree:
        value = shd1(g1, g2) if spec.kind == "ug" else shd2(g1, g2)
        path = _symmetric_difference_path(g1, g2, spec) if include_path else None
        return DistanceReport(value=value, method="closed_form", path=path)
    if not _is_graded(spec):
        raise UnsupportedClassError(f"no closed form for {spec.label()}")
    if cache.leq(g1, g2):
        lo, hi, forward = g1, g2, True
    elif cache.leq(g2, g1):
        lo, hi, forward = g2, g1, False
    else:
        raise UnsupportedClassError(
            "closed form for this class requires a comparable pair"
        )
    value = rank_of_valid(hi, spec) - rank_of_valid(lo, spec)
    path = None
    if include_path:
        path = _ascending_chain(lo, hi, spec, cache)
        if not forward:
            path = path[::-1]
    return DistanceReport(value=value, method="closed_form", path=path)


def _symmetric_difference_path(g1: Pdag, g2: Pdag, spec: GraphClassSpec) -> list[Pdag]:
    """Remove g1-only edges, then add g2-only edges, in pair order."""
    path = [g1]
    cur = g1
    if spec.kind == "ug":
        mine = set(cur.undirected_edges())
        theirs = set(g2.undirected_edges())
        for a, b in sorted(mine - theirs):
            cur = cur.with_mark(a, b, ABSENT)
            path.append(cur)
        for a, b in sorted(theirs - mine):
            cur = cur.with_mark(a, b, UNDIRECTED)
            path.append(cur)
    else:
        mine = set(cur.directed_edges())
        theirs = set(g2.directed_edges())
        for a, b in sorted(mine - theirs):
            cur = cur.with_mark(a, b, ABSENT)
            path.append(cur)
        for a, b in sorted(theirs - mine):
            cur = cur.with_mark(a, b, DIRECTED)
            path.append(cur)
    return path


# -- pseudo distance ------------------------------------------------------------------


def pseudo_distance(
    g1: Pdag,
    g2: Pdag,
    polytree: bool = False,
    cache: Optional[NeighborCache] = None,
    include_path: bool = False,
    track_expanded: bool = False,
) -> DistanceReport:
    """Shortest path restricted to pseudo-rank +-1 covering steps.

    Exact for polytree MPDAGs (that subposet is graded by pseudo-rank);
    an upper bound on the model-oriented distance in general.
    """
    spec = GraphClassSpec("mpdag", polytree=polytree)
    check_same_n(g1, g2)
    cache = _cache_for(spec, cache)
    cache.require_valid(g1)
    cache.require_valid(g2)
    target_key = g2.key()
    value, _, expansions, path, expanded = _astar(
        g1,
        h_fn=lambda g: shd2(g, g2),
        expand_fn=lambda g: cache.pseudo_down(g) + cache.pseudo_up(g),
        goal_fn=lambda g: g.key() == target_key,
        tail_fn=lambda g: 0,
        want_path=include_path,
        track_expanded=track_expanded,
    )
    return DistanceReport(
        value=value, method="pseudo", path=path, expansions=expansions,
        expanded=expanded,
    )


# -- brute force oracle ----------------------------------------------------------------


_BF_BUDGET = {"ug": 4, "dag": 4, "cpdag": 4, "mpdag": 3}
_BF_BUDGET_POLY = {"ug": 4, "dag": 4, "cpdag": 4, "mpdag": 4}
_BF_STATE: dict = {}


def _brute_force_structure(spec: GraphClassSpec, n: int):
    key = (spec, n)
    if key not in _BF_STATE:
        from .catalog import (
            all_pairs_hasse_distance,
            cover_matrix,
            enumerate_class,
            leq_matrix,
        )

        catalog = enumerate_class(spec, n)
        cover = cover_matrix(leq_matrix(catalog))
        dist = all_pairs_hasse_distance(cover)
        _BF_STATE[key] = (catalog, cover, dist)
    return _BF_STATE[key]


def brute_force_distance(g1: Pdag, g2: Pdag, spec: GraphClassSpec) -> DistanceReport:
    """Ground truth: enumerate the class, build covers from the
    definitional test (leq with no strict intermediate), BFS."""
    check_same_n(g1, g2)
    budget = (_BF_BUDGET_POLY if spec.polytree else _BF_BUDGET).get(spec.kind, 0)
    if g1.n > budget:
        raise BudgetExceededError(
            f"brute force over {spec.label()} is limited to n <= {budget}"
        )
    catalog, cover, dist = _brute_force_structure(spec, g1.n)
    try:
        i, j = catalog.index_of(g1), catalog.index_of(g2)
    except KeyError as exc:
        raise InvalidGraphError(
            f"input is not a member of the {spec.label()} catalog"
        ) from exc
    value = int(dist[i, j])
    if value < 0:
        raise GraphdistError("graphs lie in different poset components")
    return DistanceReport(value=value, method="bruteforce")


# -- method resolution ------------------------------------------------------------------


def auto_distance(
    g1: Pdag,
    g2: Pdag,
    spec: GraphClassSpec,
    cache: Optional[NeighborCache] = None,
    include_path: bool = False,
) -> DistanceReport:
    """Cheapest exact route: closed form, then matching bounds, then A*.

    For general MPDAGs only the small-n brute force is exact.
    """
    cache = _cache_for(spec, cache)
    if spec.kind in ("ug", "dag") and not spec.polytree:
        return closed_form_distance(g1, g2, spec, cache, include_path)
    if spec.kind == "mpdag":
        if spec.polytree:
            return pseudo_distance(g1, g2, polytree=True, cache=cache,
                                   include_path=include_path)
        budget = _BF_BUDGET["mpdag"]
        if g1.n <= budget:
            return brute_force_distance(g1, g2, spec)
        raise BudgetExceededError(
            "exact distance for general MPDAGs needs brute force (n <= "
            f"{budget}); use --method pseudo for the upper bound"
        )
    # cpdag / polytree cpdag / polytree ug|dag
    cache.require_valid(g1)
    cache.require_valid(g2)
    if cache.leq(g1, g2) or cache.leq(g2, g1):
        return closed_form_distance(g1, g2, spec, cache, include_path)
    if spec.kind != "cpdag":
        return model_distance(g1, g2, spec, cache=cache, include_path=include_path)
    lower = cpdag_lower_bound(g1, g2, cache if not spec.polytree else None)
    du = down_up_distance(g1, g2, spec, cache, include_path=False)
    reports = {"downup": du}
    upper = du.value
    if not spec.polytree:
        ud = up_down_distance(g1, g2, spec, cache, include_path=False)
        reports["updown"] = ud
        upper = min(upper, ud.value)
    if spec.polytree:
        # restricted to polytrees the down-up distance is exact
        du.lower_bound, du.upper_bound = lower, du.value
        if include_path:
            return down_up_distance(g1, g2, spec, cache, include_path=True)
        return du
    if lower == upper:
        method = "downup" if reports["downup"].value == upper else "updown"
        rep = reports[method]
        if include_path:
            fn = down_up_distance if method == "downup" else up_down_distance
            rep = fn(g1, g2, spec, cache, include_path=True)
        rep.lower_bound, rep.upper_bound = lower, upper
        return rep
    rep = model_distance(g1, g2, spec, cache=cache, include_path=include_path)
    rep.lower_bound, rep.upper_bound = lower, upper
    return rep
