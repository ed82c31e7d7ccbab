"""Class membership, orientation-rule closure, and DAG/CPDAG conversion.

Condition codes reported by explain_invalid:
  CPDAG: B.1(i) partially directed cycle; B.1(ii) non-chordal undirected
  component; B.1(iii) induced a->b-c with a,c nonadjacent; B.1(iv) a
  directed edge outside every protecting configuration.
  MPDAG: B.2(pdag) directed cycle; B.2(i) non-chordal component skeleton;
  B.2(ii) a forbidden induced structure (an orientation-rule premise whose
  conclusion is still undirected).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

from .errors import InconsistentBackgroundError, InvalidGraphError
from .pdag import (
    ABSENT,
    DIRECTED,
    UNDIRECTED,
    Pdag,
    _chordal_vertexset,
    has_directed_cycle,
    has_partially_directed_cycle,
    skeleton_is_forest,
    v_structures,
    vertex_pairs,
)

KINDS = ("ug", "dag", "cpdag", "mpdag")


@dataclass(frozen=True)
class GraphClassSpec:
    """Graph class selector: kind in {ug, dag, cpdag, mpdag} plus an
    optional polytree (acyclic skeleton) restriction."""

    kind: str
    polytree: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown graph class {self.kind!r}")

    def label(self) -> str:
        return self.kind + ("-polytree" if self.polytree else "")


UG = GraphClassSpec("ug")
DAG = GraphClassSpec("dag")
CPDAG = GraphClassSpec("cpdag")
MPDAG = GraphClassSpec("mpdag")


# -- validity -------------------------------------------------------------


def _undirected_components(g: Pdag) -> list[list[int]]:
    """Connected components of the undirected part (singletons dropped)."""
    n = g.n
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in g.siblings(v):
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        if len(comp) > 1:
            comps.append(sorted(comp))
    return comps


def _strongly_protected(g: Pdag, a: int, b: int) -> bool:
    """Directed edge a->b sits inside one of the four protecting induced
    configurations."""
    n = g.n
    for c in range(n):
        if c == a or c == b:
            continue
        if g.mark(c, a) == DIRECTED and not g.has_edge(c, b):
            return True  # c -> a -> b, c,b nonadjacent
        if g.mark(c, b) == DIRECTED and not g.has_edge(a, c):
            return True  # a -> b <- c, a,c nonadjacent
        if g.mark(a, c) == DIRECTED and g.mark(c, b) == DIRECTED:
            return True  # directed triangle a -> c -> b with a -> b
    sibs = [c for c in g.siblings(a) if c != b and g.mark(c, b) == DIRECTED]
    for c1, c2 in itertools.combinations(sibs, 2):
        if not g.has_edge(c1, c2):
            return True  # c1 - a - c2 with c1 -> b <- c2, c1,c2 nonadjacent
    return False


def _first_forbidden_structure(g: Pdag) -> Optional[tuple]:
    """Smallest witness of the four forbidden induced structures, if any."""
    n = g.n
    for x in range(n):
        for y in range(n):
            if g.mark(x, y) != DIRECTED:
                continue
            for z in range(n):
                if z == x or z == y:
                    continue
                if g.mark(y, z) == UNDIRECTED and not g.has_edge(x, z):
                    return ("F1", x, y, z)
                if g.mark(y, z) == DIRECTED and g.mark(x, z) == UNDIRECTED:
                    return ("F2", x, y, z)
    for a in range(n):
        sibs = g.siblings(a)
        for d in sibs:
            into_d = [b for b in sibs if b != d and g.mark(b, d) == DIRECTED]
            for b, c in itertools.combinations(into_d, 2):
                if not g.has_edge(b, c):
                    return ("F3", a, b, c, d)
            for b in into_d:
                for c in sibs:
                    if c in (b, d):
                        continue
                    if g.mark(d, c) == DIRECTED and not g.has_edge(b, c):
                        return ("F4", a, b, c, d)
    return None


def explain_invalid(g: Pdag, spec: GraphClassSpec) -> Optional[str]:
    """None when valid, else the first violated condition's code."""
    if spec.kind == "ug":
        if g.dir_mask:
            return "ug: contains a directed edge"
    elif spec.kind == "dag":
        if g.edge_count() != g.num_directed():
            return "dag: contains an undirected edge"
        if has_directed_cycle(g):
            return "dag: contains a directed cycle"
    elif spec.kind == "cpdag":
        if has_partially_directed_cycle(g):
            return "B.1(i): contains a partially directed cycle"
        und_only = _undirected_restriction(g)
        for comp in _undirected_components(g):
            if not _chordal_vertexset(und_only, comp):
                return "B.1(ii): a chain component is not chordal"
        bad = _first_forbidden_f1(g)
        if bad is not None:
            x, y, z = bad
            return (
                f"B.1(iii): induced {x + 1}->{y + 1}--{z + 1} "
                f"with {x + 1},{z + 1} nonadjacent"
            )
        for a, b in g.directed_edges():
            if not _strongly_protected(g, a, b):
                return f"B.1(iv): directed edge {a + 1}->{b + 1} is not protected"
    elif spec.kind == "mpdag":
        if has_directed_cycle(g):
            return "B.2(pdag): contains a directed cycle"
        for comp in _undirected_components(g):
            if not _chordal_skeleton_vertexset(g, comp):
                return "B.2(i): a chain component's induced skeleton is not chordal"
        bad = _first_forbidden_structure(g)
        if bad is not None:
            return f"B.2(ii): forbidden induced structure {bad[0]}"
    if spec.polytree and not skeleton_is_forest(g):
        return "polytree: skeleton contains a cycle"
    return None


def is_valid(g: Pdag, spec: GraphClassSpec) -> bool:
    return explain_invalid(g, spec) is None


def _first_forbidden_f1(g: Pdag) -> Optional[tuple[int, int, int]]:
    n = g.n
    for x in range(n):
        for y in range(n):
            if g.mark(x, y) != DIRECTED:
                continue
            for z in range(n):
                if z != x and z != y and g.mark(y, z) == UNDIRECTED:
                    if not g.has_edge(x, z):
                        return (x, y, z)
    return None


def _undirected_restriction(g: Pdag) -> Pdag:
    """Copy keeping only the undirected edges."""
    n = g.n
    codes = bytearray(n * n)
    for i, j in vertex_pairs(n):
        if g.mark(i, j) == UNDIRECTED:
            codes[i * n + j] = UNDIRECTED
            codes[j * n + i] = UNDIRECTED
    return Pdag(n, bytes(codes))


def _chordal_skeleton_vertexset(g: Pdag, comp: list[int]) -> bool:
    """Chordality of the full induced subgraph's skeleton on comp."""
    from .pdag import induced_subgraph

    sub = induced_subgraph(g, comp)
    und = _skeletonize(sub)
    return _chordal_vertexset(und, range(und.n))


def _skeletonize(g: Pdag) -> Pdag:
    n = g.n
    codes = bytearray(n * n)
    for i, j in vertex_pairs(n):
        if g.has_edge(i, j):
            codes[i * n + j] = UNDIRECTED
            codes[j * n + i] = UNDIRECTED
    return Pdag(n, bytes(codes))


# -- orientation-rule closure ----------------------------------------------


def _closure_codes(g: Pdag) -> Optional[bytearray]:
    """Fixpoint of the four orientation rules on a code-table copy.

    Each pass batches every forced orientation, so a pass that forces both
    directions of one edge is detected as an inconsistency (returns None).
    """
    n = g.n
    codes = bytearray(g.codes)

    def mark(a, b):
        return codes[a * n + b]

    while True:
        forced: dict[tuple[int, int], bool] = {}
        for x in range(n):
            for y in range(n):
                if mark(x, y) != UNDIRECTED or x > y:
                    continue
                for tail, head in ((x, y), (y, x)):
                    if _rule_fires(codes, n, tail, head):
                        forced[(tail, head)] = True
        if not forced:
            break
        for (a, b) in forced:
            if (b, a) in forced:
                return None
        for (a, b) in forced:
            codes[a * n + b] = DIRECTED
            codes[b * n + a] = ABSENT
    return codes


def _rule_fires(codes: bytearray, n: int, x: int, y: int) -> bool:
    """Would some rule orient the undirected edge x-y as x->y?"""

    def mark(a, b):
        return codes[a * n + b]

    def adjacent(a, b):
        return codes[a * n + b] != ABSENT or codes[b * n + a] != ABSENT

    for z in range(n):
        if z == x or z == y:
            continue
        # R1: z -> x - y with z,y nonadjacent
        if mark(z, x) == DIRECTED and not adjacent(z, y):
            return True
        # R2: x -> z -> y with x - y
        if mark(x, z) == DIRECTED and mark(z, y) == DIRECTED:
            return True
    # R3: x - z, x - w, z -> y, w -> y, z,w nonadjacent
    sibs = [z for z in range(n) if mark(x, z) == UNDIRECTED and z != y]
    into_y = [z for z in sibs if mark(z, y) == DIRECTED]
    for z, w in itertools.combinations(into_y, 2):
        if not adjacent(z, w):
            return True
    # R4: x adjacent z, z -> w, w -> y, z,y nonadjacent
    for z in range(n):
        if z in (x, y) or not adjacent(x, z) or adjacent(z, y):
            continue
        for w in range(n):
            if w in (x, y, z):
                continue
            if mark(z, w) == DIRECTED and mark(w, y) == DIRECTED:
                return True
    return False


def meek_closure(g: Pdag) -> Pdag:
    """Apply the orientation rules until fixpoint.

    The output directs a superset of g's directed edges on the same
    skeleton. Raises when the directed part is cyclic or when a pass
    forces both orientations of one edge.
    """
    if has_directed_cycle(g):
        raise InvalidGraphError("closure requires an acyclic directed part")
    codes = _closure_codes(g)
    if codes is None:
        raise InconsistentBackgroundError(
            "orientation rules force both directions of an edge"
        )
    return Pdag(g.n, bytes(codes))


# -- DAG <-> CPDAG ----------------------------------------------------------


@lru_cache(maxsize=200_000)
def dag_to_cpdag(d: Pdag) -> Pdag:
    """Completion of a DAG's Markov equivalence class.

    Keeps the skeleton, orients exactly the collider edges, then closes
    under the orientation rules.
    """
    if d.edge_count() != d.num_directed() or has_directed_cycle(d):
        raise InvalidGraphError("input is not a DAG")
    n = d.n
    keep = set()
    for a, b, c in v_structures(d):
        keep.add((a, b))
        keep.add((c, b))
    codes = bytearray(n * n)
    for a, b in d.directed_edges():
        if (a, b) in keep:
            codes[a * n + b] = DIRECTED
        else:
            codes[a * n + b] = UNDIRECTED
            codes[b * n + a] = UNDIRECTED
    return meek_closure(Pdag(n, bytes(codes)))


@lru_cache(maxsize=100_000)
def consistent_extensions(g: Pdag) -> tuple[Pdag, ...]:
    """All DAGs obtained by orienting g's undirected edges without new
    colliders or directed cycles, sorted by canonical key.

    Backtracks over the first undirected edge, closing under the
    orientation rules after each choice and pruning inconsistent branches.
    """
    base = v_structures(g)
    results: list[Pdag] = []

    def first_undirected(h: Pdag):
        for i, j in vertex_pairs(h.n):
            if h.mark(i, j) == UNDIRECTED:
                return i, j
        return None

    def rec(h: Pdag):
        e = first_undirected(h)
        if e is None:
            if not has_directed_cycle(h) and v_structures(h) == base:
                results.append(h)
            return
        a, b = e
        for tail, head in ((a, b), (b, a)):
            h2 = h.with_mark(tail, head, DIRECTED)
            codes = _closure_codes(h2)
            if codes is None:
                continue
            h3 = Pdag(h.n, bytes(codes))
            if has_directed_cycle(h3):
                continue
            if not v_structures(h3) <= base:
                continue
            rec(h3)

    rec(g)
    results.sort(key=lambda d: d.key())
    return tuple(results)


def member_dags(g: Pdag, spec: GraphClassSpec) -> list[Pdag]:
    """The DAGs represented by a CPDAG or MPDAG (a DAG represents itself)."""
    if spec.kind == "dag":
        if not is_valid(g, spec):
            raise InvalidGraphError("input is not a DAG")
        return [g]
    if spec.kind not in ("cpdag", "mpdag"):
        raise InvalidGraphError(f"member DAGs undefined for class {spec.kind}")
    reason = explain_invalid(g, spec)
    if reason is not None:
        raise InvalidGraphError(reason)
    return list(consistent_extensions(g))


# -- background knowledge ----------------------------------------------------


def mpdag_from_background(
    c: Pdag, background: Iterable[tuple[int, int]]
) -> Pdag:
    """Orient background edges in a CPDAG and close under the rules.

    Background pairs are 0-based (tail, head) and must lie in c's
    skeleton without contradicting its directed edges. Raises
    InconsistentBackgroundError when no consistent extension respects the
    requested orientations.
    """
    reason = explain_invalid(c, CPDAG)
    if reason is not None:
        raise InvalidGraphError(f"base graph is not a valid CPDAG: {reason}")
    g = c
    for a, b in background:
        if not c.has_edge(a, b):
            raise InconsistentBackgroundError(
                f"background edge ({a + 1},{b + 1}) is not in the skeleton"
            )
        m = g.mark(a, b)
        if m == DIRECTED:
            continue
        if g.mark(b, a) == DIRECTED:
            raise InconsistentBackgroundError(
                f"background edge ({a + 1},{b + 1}) contradicts {b + 1}->{a + 1}"
            )
        g = g.with_mark(a, b, DIRECTED)
    if has_directed_cycle(g):
        raise InconsistentBackgroundError("background orientations form a cycle")
    out = meek_closure(g)
    if has_directed_cycle(out):
        raise InconsistentBackgroundError("closure created a directed cycle")
    if v_structures(out) != v_structures(c):
        raise InconsistentBackgroundError("closure created a new collider")
    reason = explain_invalid(out, MPDAG)
    if reason is not None:
        raise InconsistentBackgroundError(f"closure is not a valid MPDAG: {reason}")
    if not consistent_extensions(out):
        raise InconsistentBackgroundError("no consistent extension exists")
    return out
