"""Mixed-graph core: the Pdag value type and its structural predicates.

A Pdag is an immutable simple mixed graph over vertices 0..n-1. The mark
between an ordered pair (i, j) is one of absent, directed i->j, or
undirected. Marks live in a flat n*n code table; undirected marks are
stored symmetrically. Vertices are 0-based in code and 1-based in the
text/CSV file formats.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from .errors import DimensionMismatchError, InvalidGraphError, ParseError

ABSENT = 0
DIRECTED = 1  # tail -> head for the ordered slot (i, j)
UNDIRECTED = 2

_PAIR_TABLE: dict[int, list[tuple[int, int]]] = {}


def vertex_pairs(n: int) -> list[tuple[int, int]]:
    """All unordered vertex pairs (i, j) with i < j, cached per n."""
    pairs = _PAIR_TABLE.get(n)
    if pairs is None:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        _PAIR_TABLE[n] = pairs
    return pairs


def pair_index(i: int, j: int, n: int) -> int:
    """Position of unordered pair {i, j} (i < j) in vertex_pairs(n) order."""
    if i > j:
        i, j = j, i
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


class Pdag:
    """Immutable partially directed graph on n labeled vertices.

    Derived bitmasks are precomputed for the hot paths:
      amask     bit i*n+j set iff i-j or i->j  (adjacency-matrix encoding)
      dir_mask  bit i*n+j set iff i->j
      skel_mask bit per unordered pair, set iff adjacent
    """

    __slots__ = ("n", "codes", "amask", "dir_mask", "skel_mask", "_hash")

    def __init__(self, n: int, codes: bytes):
        if len(codes) != n * n:
            raise ValueError("code table has wrong size")
        self.n = n
        self.codes = codes
        amask = 0
        dmask = 0
        smask = 0
        for idx in range(n * n):
            c = codes[idx]
            if c == ABSENT:
                continue
            i, j = divmod(idx, n)
            amask |= 1 << idx
            if c == DIRECTED:
                dmask |= 1 << idx
            if i < j:
                smask |= 1 << pair_index(i, j, n)
            elif codes[j * n + i] == ABSENT:  # directed j<-i with i>j
                smask |= 1 << pair_index(j, i, n)
        self.amask = amask
        self.dir_mask = dmask
        self.skel_mask = smask
        self._hash = hash((n, codes))

    # -- construction -------------------------------------------------

    @staticmethod
    def empty(n: int) -> "Pdag":
        return Pdag(n, bytes(n * n))

    @staticmethod
    def from_edges(
        n: int,
        directed: Iterable[tuple[int, int]] = (),
        undirected: Iterable[tuple[int, int]] = (),
    ) -> "Pdag":
        """Build a graph from 0-based edge lists; rejects conflicts."""
        codes = bytearray(n * n)
        for a, b in directed:
            _check_pair(a, b, n)
            if codes[a * n + b] or codes[b * n + a]:
                raise InvalidGraphError(f"conflicting edge on pair ({a},{b})")
            codes[a * n + b] = DIRECTED
        for a, b in undirected:
            _check_pair(a, b, n)
            if codes[a * n + b] or codes[b * n + a]:
                raise InvalidGraphError(f"conflicting edge on pair ({a},{b})")
            codes[a * n + b] = UNDIRECTED
            codes[b * n + a] = UNDIRECTED
        return Pdag(n, bytes(codes))

    @staticmethod
    def from_amat(rows: Sequence[Sequence[int]]) -> "Pdag":
        """Decode the 0/1 adjacency-matrix encoding (a_ij=1 iff i-j or i->j)."""
        n = len(rows)
        codes = bytearray(n * n)
        for i in range(n):
            if len(rows[i]) != n:
                raise ParseError("adjacency matrix is not square")
            for j in range(n):
                v = rows[i][j]
                if v not in (0, 1):
                    raise ParseError(f"adjacency entries must be 0/1, got {v!r}")
                if i == j and v:
                    raise ParseError("self-loops are not allowed")
        for i in range(n):
            for j in range(i + 1, n):
                a, b = rows[i][j], rows[j][i]
                if a and b:
                    codes[i * n + j] = UNDIRECTED
                    codes[j * n + i] = UNDIRECTED
                elif a:
                    codes[i * n + j] = DIRECTED
                elif b:
                    codes[j * n + i] = DIRECTED
        return Pdag(n, bytes(codes))

    # -- identity ------------------------------------------------------

    def key(self) -> bytes:
        """Canonical byte encoding: injective over labeled graphs, stable."""
        return bytes((self.n,)) + self.codes

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Pdag)
            and self.n == other.n
            and self.codes == other.codes
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        parts = [f"{a + 1}->{b + 1}" for a, b in self.directed_edges()]
        parts += [f"{a + 1}--{b + 1}" for a, b in self.undirected_edges()]
        inner = ", ".join(parts) if parts else "no edges"
        return f"Pdag(n={self.n}: {inner})"

    # -- accessors -----------------------------------------------------

    def mark(self, a: int, b: int) -> int:
        return self.codes[a * self.n + b]

    def has_edge(self, a: int, b: int) -> bool:
        """Adjacent in any direction."""
        n = self.n
        return bool(self.codes[a * n + b] or self.codes[b * n + a])

    def directed_edges(self) -> list[tuple[int, int]]:
        n = self.n
        return [
            (i, j)
            for i in range(n)
            for j in range(n)
            if self.codes[i * n + j] == DIRECTED
        ]

    def undirected_edges(self) -> list[tuple[int, int]]:
        n = self.n
        return [
            (i, j) for i, j in vertex_pairs(n) if self.codes[i * n + j] == UNDIRECTED
        ]

    def edge_count(self) -> int:
        return self.skel_mask.bit_count()

    def num_directed(self) -> int:
        return self.dir_mask.bit_count()

    def num_undirected(self) -> int:
        return self.edge_count() - self.num_directed()

    def parents(self, v: int) -> list[int]:
        n = self.n
        return [u for u in range(n) if self.codes[u * n + v] == DIRECTED]

    def siblings(self, v: int) -> list[int]:
        n = self.n
        return [u for u in range(n) if self.codes[u * n + v] == UNDIRECTED]

    # -- functional updates ---------------------------------------------

    def with_mark(self, a: int, b: int, mark: int) -> "Pdag":
        """Copy with the pair {a,b} set to absent / a->b / undirected."""
        n = self.n
        codes = bytearray(self.codes)
        codes[a * n + b] = 0
        codes[b * n + a] = 0
        if mark == DIRECTED:
            codes[a * n + b] = DIRECTED
        elif mark == UNDIRECTED:
            codes[a * n + b] = UNDIRECTED
            codes[b * n + a] = UNDIRECTED
        elif mark != ABSENT:
            raise ValueError(f"unknown mark {mark}")
        return Pdag(n, bytes(codes))


def _check_pair(a: int, b: int, n: int) -> None:
    if not (0 <= a < n and 0 <= b < n):
        raise InvalidGraphError(f"vertex out of range in pair ({a},{b})")
    if a == b:
        raise InvalidGraphError("self-loops are not allowed")


# -- structural predicates ----------------------------------------------


def skeleton(g: Pdag) -> frozenset[tuple[int, int]]:
    """Unordered adjacent pairs (i, j) with i < j."""
    return frozenset(
        (i, j) for i, j in vertex_pairs(g.n) if g.skel_mask >> pair_index(i, j, g.n) & 1
    )


def v_structures(g: Pdag) -> frozenset[tuple[int, int, int]]:
    """Unshielded colliders a->b<-c as canonical triples (a, b, c), a < c."""
    n = g.n
    out = []
    for b in range(n):
        pa = g.parents(b)
        for a, c in itertools.combinations(sorted(pa), 2):
            if not g.has_edge(a, c):
                out.append((a, b, c))
    return frozenset(out)


def has_directed_cycle(g: Pdag) -> bool:
    """Cycle using only directed edges, all pointing forward."""
    n = g.n
    color = [0] * n  # 0 unseen, 1 on stack, 2 done

    def visit(u: int) -> bool:
        color[u] = 1
        base = u * n
        for v in range(n):
            if g.codes[base + v] == DIRECTED:
                if color[v] == 1:
                    return True
                if color[v] == 0 and visit(v):
                    return True
        color[u] = 2
        return False

    return any(color[u] == 0 and visit(u) for u in range(n))


def has_partially_directed_cycle(g: Pdag) -> bool:
    """Cycle with >= 1 directed edge, all directed edges pointing one way.

    Equivalent reachability form: some directed edge u->v admits a path
    from v back to u along undirected edges or forward directed edges.
    """
    n = g.n
    for u in range(n):
        base = u * n
        for v in range(n):
            if g.codes[base + v] != DIRECTED:
                continue
            # BFS from v over semi-directed steps
            seen = [False] * n
            seen[v] = True
            stack = [v]
            while stack:
                x = stack.pop()
                if x == u:
                    return True
                xb = x * n
                for y in range(n):
                    if not seen[y] and g.codes[xb + y] != ABSENT:
                        seen[y] = True
                        stack.append(y)
    return False


def is_chordal(g: Pdag) -> bool:
    """Chordality of an undirected graph via a maximum-cardinality-search
    perfect elimination ordering.

    Rejects input with directed marks.
    """
    if g.dir_mask:
        raise InvalidGraphError("chordality is defined on undirected graphs")
    return _chordal_vertexset(g, range(g.n))


def _chordal_vertexset(g: Pdag, vs: Iterable[int]) -> bool:
    """MCS + PEO check on the skeleton restricted to the vertex set vs."""
    vs = list(vs)
    adj = {v: set() for v in vs}
    inset = set(vs)
    for v in vs:
        for u in vs:
            if u != v and g.has_edge(u, v):
                adj[v].add(u)
    weight = {v: 0 for v in vs}
    order = []
    numbered: set[int] = set()
    for _ in vs:
        v = max((x for x in vs if x not in numbered), key=lambda x: (weight[x], -x))
        order.append(v)
        numbered.add(v)
        for u in adj[v]:
            if u not in numbered:
                weight[u] += 1
    # reverse MCS order is a candidate PEO; verify simpliciality
    order.reverse()
    pos = {v: i for i, v in enumerate(order)}
    for i, v in enumerate(order):
        later = [u for u in adj[v] if pos[u] > i and u in inset]
        for a, b in itertools.combinations(later, 2):
            if b not in adj[a]:
                return False
    return True


def induced_subgraph(g: Pdag, vs: Sequence[int]) -> Pdag:
    """Restriction to vs, relabeled 0..len(vs)-1 preserving input order."""
    vs = list(vs)
    if len(set(vs)) != len(vs):
        raise InvalidGraphError("vertex set contains duplicates")
    for v in vs:
        if not 0 <= v < g.n:
            raise InvalidGraphError(f"vertex {v} out of range")
    m = len(vs)
    codes = bytearray(m * m)
    for a in range(m):
        for b in range(m):
            codes[a * m + b] = g.codes[vs[a] * g.n + vs[b]]
    return Pdag(m, bytes(codes))


def skeleton_is_forest(g: Pdag) -> bool:
    """True iff the skeleton has no cycle (polytree restriction)."""
    n = g.n
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in vertex_pairs(n):
        if g.skel_mask >> pair_index(i, j, n) & 1:
            ri, rj = find(i), find(j)
            if ri == rj:
                return False
            parent[ri] = rj
    return True


def canonical_key(g: Pdag) -> bytes:
    return g.key()


def check_same_n(g1: Pdag, g2: Pdag) -> None:
    if g1.n != g2.n:
        raise DimensionMismatchError(f"vertex counts differ: {g1.n} vs {g2.n}")


# -- text format ----------------------------------------------------------
#
# Grammar: first non-comment line `n=<int>`, then one edge per line,
# `<a> -> <b>` or `<a> -- <b>` with 1-based vertex ids. `#` starts a
# comment. Duplicate or conflicting edges are a parse error.


def parse_graph(text: str) -> Pdag:
    n = None
    codes: bytearray | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            if not line.startswith("n=") or not line[2:].strip().isdigit():
                raise ParseError(f"line {lineno}: expected 'n=<int>', got {line!r}")
            n = int(line[2:].strip())
            if n < 1:
                raise ParseError(f"line {lineno}: n must be positive")
            codes = bytearray(n * n)
            continue
        assert codes is not None
        if "->" in line:
            kind, sep = DIRECTED, "->"
        elif "--" in line:
            kind, sep = UNDIRECTED, "--"
        else:
            raise ParseError(f"line {lineno}: expected '<a> -> <b>' or '<a> -- <b>'")
        left, _, right = line.partition(sep)
        try:
            a = int(left.strip()) - 1
            b = int(right.strip()) - 1
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad vertex id") from exc
        if not (0 <= a < n and 0 <= b < n):
            raise ParseError(f"line {lineno}: vertex id out of range 1..{n}")
        if a == b:
            raise ParseError(f"line {lineno}: self-loop")
        if codes[a * n + b] or codes[b * n + a]:
            raise ParseError(f"line {lineno}: duplicate or conflicting edge")
        if kind == DIRECTED:
            codes[a * n + b] = DIRECTED
        else:
            codes[a * n + b] = UNDIRECTED
            codes[b * n + a] = UNDIRECTED
    if n is None:
        raise ParseError("missing 'n=<int>' header line")
    assert codes is not None
    return Pdag(n, bytes(codes))


def to_text(g: Pdag) -> str:
    """Serialize in the text format; round-trips bit-exactly."""
    lines = [f"n={g.n}"]
    for i, j in vertex_pairs(g.n):
        c = g.codes[i * g.n + j]
        if c == UNDIRECTED:
            lines.append(f"{i + 1} -- {j + 1}")
        elif c == DIRECTED:
            lines.append(f"{i + 1} -> {j + 1}")
        elif g.codes[j * g.n + i] == DIRECTED:
            lines.append(f"{j + 1} -> {i + 1}")
    return "\n".join(lines) + "\n"


def parse_amat_csv(text: str) -> Pdag:
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([int(tok.strip()) for tok in line.split(",")])
        except ValueError as exc:
            raise ParseError("adjacency CSV entries must be integers") from exc
    if not rows:
        raise ParseError("empty adjacency CSV")
    if len(rows) != len(rows[0]):
        raise ParseError("adjacency matrix is not square")
    return Pdag.from_amat(rows)


def to_amat_csv(g: Pdag) -> str:
    n = g.n
    lines = []
    for i in range(n):
        lines.append(
            ",".join("1" if g.codes[i * n + j] != ABSENT else "0" for j in range(n))
        )
    return "\n".join(lines) + "\n"
