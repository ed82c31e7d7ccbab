"""The model-inclusion partial order and its covering/neighbor structure.

Order criteria, one per class:
  UG     subgraph containment (edge sets)
  DAG    subgraph containment (directed edge sets)
  CPDAG  every d-separation of the larger holds in the smaller; a
         represented-DAG subgraph pair certifies this cheaply but its
         absence proves nothing (that relation is not transitive)
  MPDAG  every represented DAG of the smaller is a subgraph of some
         represented DAG of the larger
Polytree restrictions inherit the parent class's order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import InvalidGraphError, NotGradedError, UnsupportedClassError
from .pdag import (
    ABSENT,
    DIRECTED,
    UNDIRECTED,
    Pdag,
    check_same_n,
    has_directed_cycle,
    skeleton_is_forest,
    vertex_pairs,
)
from .validity import (
    GraphClassSpec,
    consistent_extensions,
    dag_to_cpdag,
    explain_invalid,
)


@dataclass
class NeighborSet:
    """Covers of the input (up) and elements it covers (down), each list
    deduplicated and sorted by canonical key."""

    up: list[Pdag] = field(default_factory=list)
    down: list[Pdag] = field(default_factory=list)


class NeighborCache:
    """Shared memo for one graph class: validity, member DAGs, order
    queries, and generated neighbor sets, all keyed by canonical key."""

    def __init__(self, spec: GraphClassSpec):
        self.spec = spec
        self._valid: dict[bytes, Optional[str]] = {}
        self._members: dict[bytes, tuple[Pdag, ...]] = {}
        self._member_masks: dict[bytes, tuple[int, ...]] = {}
        self._leq: dict[tuple[bytes, bytes], bool] = {}
        self._up: dict[bytes, list[Pdag]] = {}
        self._down: dict[bytes, list[Pdag]] = {}

    def invalid_reason(self, g: Pdag) -> Optional[str]:
        k = g.key()
        if k not in self._valid:
            self._valid[k] = explain_invalid(g, self.spec)
        return self._valid[k]

    def require_valid(self, g: Pdag) -> None:
        reason = self.invalid_reason(g)
        if reason is not None:
            raise InvalidGraphError(
                f"not a valid {self.spec.label()} member: {reason}"
            )

    def members(self, g: Pdag) -> tuple[Pdag, ...]:
        k = g.key()
        if k not in self._members:
            self._members[k] = consistent_extensions(g)
        return self._members[k]

    def member_masks(self, g: Pdag) -> tuple[int, ...]:
        k = g.key()
        if k not in self._member_masks:
            self._member_masks[k] = tuple(d.dir_mask for d in self.members(g))
        return self._member_masks[k]

    def leq(self, g1: Pdag, g2: Pdag) -> bool:
        key = (g1.key(), g2.key())
        hit = self._leq.get(key)
        if hit is None:
            hit = _leq_core(g1, g2, self.spec, self)
            self._leq[key] = hit
        return hit

    def up(self, g: Pdag) -> list[Pdag]:
        k = g.key()
        if k not in self._up:
            self._generate(g)
        return self._up[k]

    def down(self, g: Pdag) -> list[Pdag]:
        k = g.key()
        if k not in self._down:
            self._generate(g)
        return self._down[k]

    def _generate(self, g: Pdag) -> None:
        ns = neighbors(g, self.spec, cache=self)
        self._up[g.key()] = ns.up
        self._down[g.key()] = ns.down

    def pseudo_up(self, g: Pdag) -> list[Pdag]:
        """Pseudo-rank +1 covers; identical to up() for polytree MPDAGs."""
        k = g.key()
        if k not in self._up:
            self._generate_pseudo(g)
        return self._up[k]

    def pseudo_down(self, g: Pdag) -> list[Pdag]:
        k = g.key()
        if k not in self._down:
            self._generate_pseudo(g)
        return self._down[k]

    def _generate_pseudo(self, g: Pdag) -> None:
        if self.spec.kind != "mpdag":
            raise UnsupportedClassError("pseudo neighbors are an MPDAG notion")
        ns = pseudo_neighbors(g, polytree=self.spec.polytree, cache=self)
        self._up[g.key()] = ns.up
        self._down[g.key()] = ns.down

    def preload(self, g: Pdag, up: list[Pdag], down: list[Pdag]) -> None:
        """Install precomputed neighbor lists (catalog-backed adjacency)."""
        k = g.key()
        self._up[k] = up
        self._down[k] = down
        self._valid.setdefault(k, None)


def _cache_for(spec: GraphClassSpec, cache: Optional[NeighborCache]) -> NeighborCache:
    if cache is None:
        return NeighborCache(spec)
    if cache.spec != spec:
        raise ValueError(
            f"cache is bound to {cache.spec.label()}, not {spec.label()}"
        )
    return cache


# -- order relation ---------------------------------------------------------


def leq(g1: Pdag, g2: Pdag, spec: GraphClassSpec, cache: Optional[NeighborCache] = None) -> bool:
    """Model containment g1 <= g2 via the class's graphical criterion."""
    check_same_n(g1, g2)
    cache = _cache_for(spec, cache)
    cache.require_valid(g1)
    cache.require_valid(g2)
    return cache.leq(g1, g2)


def _leq_core(g1: Pdag, g2: Pdag, spec: GraphClassSpec, cache: NeighborCache) -> bool:
    if g1.codes == g2.codes:
        return True
    kind = spec.kind
    if kind == "ug":
        return g1.skel_mask & ~g2.skel_mask == 0
    if kind == "dag":
        return g1.dir_mask & ~g2.dir_mask == 0
    if g1.skel_mask & ~g2.skel_mask:
        return False  # skeleton containment is necessary for both orders
    m1 = cache.member_masks(g1)
    m2 = cache.member_masks(g2)
    if kind == "mpdag":
        return all(any(a & ~b == 0 for b in m2) for a in m1)
    if kind != "cpdag":
        raise UnsupportedClassError(f"no order criterion for {kind}")
    # A represented-DAG subgraph pair certifies containment but its absence
    # does not refute it (the relation it induces is not transitive), so
    # fall back to the defining test: every d-separation of g2 holds in g1.
    if any(any(a & ~b == 0 for b in m2) for a in m1):
        return True
    return _dsep_containment(cache.members(g1)[0], cache.members(g2)[0])


def _dsep_containment(d1: Pdag, d2: Pdag) -> bool:
    """True iff every d-separation entailed by d2 is entailed by d1.

    Separation statements decompose into singleton pairs, so scanning
    all (a, b | C) with C over the remaining vertices is exhaustive.
    """
    from itertools import combinations

    from .dsep import d_separated

    n = d1.n
    rest = set(range(n))
    for a, b in vertex_pairs(n):
        others = sorted(rest - {a, b})
        for r in range(len(others) + 1):
            for cond in combinations(others, r):
                cset = frozenset(cond)
                if d_separated(d2, a, b, cset) and not d_separated(d1, a, b, cset):
                    return False
    return True


# -- rank functions -----------------------------------------------------------


def pseudo_rank(g: Pdag, *, validate: bool = True) -> int:
    """Directed-edge count plus twice the undirected-edge count."""
    if validate:
        reason = explain_invalid(g, GraphClassSpec("mpdag"))
        if reason is not None:
            raise InvalidGraphError(f"not a valid MPDAG: {reason}")
    return g.num_directed() + 2 * g.num_undirected()


def rank(g: Pdag, spec: GraphClassSpec, cache: Optional[NeighborCache] = None) -> int:
    """Rank in the class poset: edge count, or pseudo-rank for polytree
    MPDAGs. General MPDAGs have no rank function."""
    if spec.kind == "mpdag" and not spec.polytree:
        raise NotGradedError("the MPDAG poset is not graded; use pseudo_rank")
    cache = _cache_for(spec, cache)
    cache.require_valid(g)
    if spec.kind == "mpdag":
        return pseudo_rank(g, validate=False)
    return g.edge_count()


def rank_of_valid(g: Pdag, spec: GraphClassSpec) -> int:
    """rank() without revalidating; for inner loops on vetted graphs."""
    if spec.kind == "mpdag":
        return pseudo_rank(g, validate=False)
    return g.edge_count()


# -- neighbor generation -------------------------------------------------------


def neighbors(g: Pdag, spec: GraphClassSpec, cache: Optional[NeighborCache] = None) -> NeighborSet:
    """Exactly the covers / covered-by elements of g in the class poset.

    General (non-polytree) MPDAGs are rejected: no covering
    characterization exists, so callers must use pseudo_neighbors or a
    brute-force oracle.
    """
    if spec.kind == "mpdag" and not spec.polytree:
        raise UnsupportedClassError(
            "no covering characterization for general MPDAGs; "
            "use pseudo_neighbors or the brute-force oracle"
        )
    cache = _cache_for(spec, cache)
    cache.require_valid(g)
    if spec.kind == "ug":
        ns = _ug_neighbors(g, spec)
    elif spec.kind == "dag":
        ns = _dag_neighbors(g, spec)
    elif spec.kind == "cpdag":
        ns = _cpdag_neighbors(g, spec, cache)
    else:  # polytree mpdag
        ns = pseudo_neighbors(g, polytree=True, cache=cache)
    _sort_dedupe(ns)
    return ns


def _sort_dedupe(ns: NeighborSet) -> None:
    for attr in ("up", "down"):
        seen: dict[bytes, Pdag] = {}
        for h in getattr(ns, attr):
            seen.setdefault(h.key(), h)
        setattr(ns, attr, [seen[k] for k in sorted(seen)])


def _ug_neighbors(g: Pdag, spec: GraphClassSpec) -> NeighborSet:
    ns = NeighborSet()
    for a, b in vertex_pairs(g.n):
        if g.has_edge(a, b):
            ns.down.append(g.with_mark(a, b, ABSENT))
        else:
            cand = g.with_mark(a, b, UNDIRECTED)
            if not spec.polytree or skeleton_is_forest(cand):
                ns.up.append(cand)
    return ns


def _dag_neighbors(g: Pdag, spec: GraphClassSpec) -> NeighborSet:
    ns = NeighborSet()
    for a, b in g.directed_edges():
        ns.down.append(g.with_mark(a, b, ABSENT))
    for a, b in vertex_pairs(g.n):
        if g.has_edge(a, b):
            continue
        for tail, head in ((a, b), (b, a)):
            cand = g.with_mark(tail, head, DIRECTED)
            if has_directed_cycle(cand):
                continue
            if spec.polytree and not skeleton_is_forest(cand):
                continue
            ns.up.append(cand)
    return ns


def _cpdag_neighbors(g: Pdag, spec: GraphClassSpec, cache: NeighborCache) -> NeighborSet:
    """Covers via one-edge insertions/deletions on the represented DAGs,
    recompleted and deduplicated."""
    ns = NeighborSet()
    r = g.edge_count()
    up_seen: set[bytes] = set()
    down_seen: set[bytes] = set()
    for d in cache.members(g):
        for a, b in d.directed_edges():
            c = dag_to_cpdag(d.with_mark(a, b, ABSENT))
            if c.key() not in down_seen:
                down_seen.add(c.key())
                assert c.edge_count() == r - 1
                ns.down.append(c)
        for a, b in vertex_pairs(g.n):
            if d.has_edge(a, b):
                continue
            for tail, head in ((a, b), (b, a)):
                cand = d.with_mark(tail, head, DIRECTED)
                if has_directed_cycle(cand):
                    continue
                c = dag_to_cpdag(cand)
                if spec.polytree and not skeleton_is_forest(c):
                    continue
                if c.key() not in up_seen:
                    up_seen.add(c.key())
                    assert c.edge_count() == r + 1
                    ns.up.append(c)
    return ns


def pseudo_neighbors(
    g: Pdag, polytree: bool = False, cache: Optional[NeighborCache] = None
) -> NeighborSet:
    """Valid MPDAGs one pseudo-rank step away and comparable to g.

    Moves are single-mark changes: absent <-> directed and directed <->
    undirected. Each surviving pair is a covering pair of the MPDAG
    poset (and of its polytree subposet when restricted).
    """
    spec = GraphClassSpec("mpdag", polytree=polytree)
    cache = _cache_for(spec, cache)
    cache.require_valid(g)
    ns = NeighborSet()

    def admit(cand: Pdag, upward: bool) -> None:
        if cache.invalid_reason(cand) is not None:
            return
        lo, hi = (g, cand) if upward else (cand, g)
        if cache.leq(lo, hi):
            (ns.up if upward else ns.down).append(cand)

    for a, b in vertex_pairs(g.n):
        m = g.mark(a, b)
        m_rev = g.mark(b, a)
        if m == ABSENT and m_rev == ABSENT:
            admit(g.with_mark(a, b, DIRECTED), upward=True)
            admit(g.with_mark(b, a, DIRECTED), upward=True)
        elif m == UNDIRECTED:
            admit(g.with_mark(a, b, DIRECTED), upward=False)
            admit(g.with_mark(b, a, DIRECTED), upward=False)
        elif m == DIRECTED:
            admit(g.with_mark(a, b, UNDIRECTED), upward=True)
            admit(g.with_mark(a, b, ABSENT), upward=False)
        else:  # directed b -> a
            admit(g.with_mark(b, a, UNDIRECTED), upward=True)
            admit(g.with_mark(b, a, ABSENT), upward=False)
    _sort_dedupe(ns)
    return ns
