"""Exhaustive per-class catalogs plus matrix-form poset oracles.

Catalogs are deterministic (members sorted by canonical key) and can be
persisted under GRAPHDIST_CACHE_DIR keyed by (class, n, format version).
The oracle helpers (leq matrix, definitional covering, all-pairs BFS)
exist so tests can cross-check the generative neighbor machinery against
the covering relation computed straight from its definition.
"""

from __future__ import annotations

import itertools
import os
import pickle
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import BudgetExceededError, InconsistentBackgroundError
from .pdag import DIRECTED, UNDIRECTED, Pdag, skeleton_is_forest, vertex_pairs
from .poset import NeighborCache, neighbors, pseudo_neighbors
from .validity import GraphClassSpec, dag_to_cpdag, mpdag_from_background

FORMAT_VERSION = 1

# per-class vertex budgets for exhaustive enumeration
BUDGETS = {"ug": 6, "dag": 5, "cpdag": 5, "mpdag": 4}
POLY_BUDGETS = {"ug": 6, "dag": 5, "cpdag": 5, "mpdag": 5}


@dataclass
class ClassCatalog:
    spec: GraphClassSpec
    n: int
    members: list[Pdag]
    key_index: dict[bytes, int]

    def __len__(self) -> int:
        return len(self.members)

    def index_of(self, g: Pdag) -> int:
        return self.key_index[g.key()]


def _budget(spec: GraphClassSpec) -> int:
    table = POLY_BUDGETS if spec.polytree else BUDGETS
    return table[spec.kind]


def cache_dir() -> Optional[str]:
    return os.environ.get("GRAPHDIST_CACHE_DIR") or None


def _cache_path(stem: str) -> Optional[str]:
    d = cache_dir()
    if not d:
        return None
    os.makedirs(d, exist_ok=True)
    return os.path.join(d, f"{stem}-v{FORMAT_VERSION}.pkl")


def _cache_load(stem: str):
    path = _cache_path(stem)
    if path and os.path.exists(path):
        with open(path, "rb") as fh:
            return pickle.load(fh)
    return None


def _cache_store(stem: str, payload) -> None:
    path = _cache_path(stem)
    if path:
        tmp = path + f".tmp{os.getpid()}"
        with open(tmp, "wb") as fh:
            pickle.dump(payload, fh, protocol=pickle.HIGHEST_PROTOCOL)
        os.replace(tmp, path)


def enumerate_class(spec: GraphClassSpec, n: int) -> ClassCatalog:
    """Every member of the class over n labeled vertices, canonically
    ordered. Raises BudgetExceededError above the documented budget."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > _budget(spec):
        raise BudgetExceededError(
            f"enumeration budget for {spec.label()} is n <= {_budget(spec)}"
        )
    stem = f"catalog-{spec.label()}-n{n}"
    cached = _cache_load(stem)
    if cached is not None:
        members = [Pdag(n, codes) for codes in cached]
    else:
        members = sorted(_generate(spec, n), key=lambda g: g.key())
        _cache_store(stem, [g.codes for g in members])
    return ClassCatalog(
        spec=spec,
        n=n,
        members=members,
        key_index={g.key(): i for i, g in enumerate(members)},
    )


def catalog_counts(spec: GraphClassSpec, n: int) -> int:
    return len(enumerate_class(spec, n))


def _generate(spec: GraphClassSpec, n: int) -> Iterable[Pdag]:
    kind = spec.kind
    if kind == "ug":
        out = _all_ugs(n)
    elif kind == "dag":
        out = _all_dags(n)
    elif kind == "cpdag":
        out = _all_cpdags(n)
    else:
        out = _all_mpdags(n, polytree=spec.polytree)
    if spec.polytree:
        out = (g for g in out if skeleton_is_forest(g))
    return out


def _all_ugs(n: int) -> Iterable[Pdag]:
    pairs = vertex_pairs(n)
    for bits in range(1 << len(pairs)):
        codes = bytearray(n * n)
        for idx, (a, b) in enumerate(pairs):
            if bits >> idx & 1:
                codes[a * n + b] = UNDIRECTED
                codes[b * n + a] = UNDIRECTED
        yield Pdag(n, bytes(codes))


def _all_dags(n: int) -> Iterable[Pdag]:
    """Recursive orientation over the pair list with reachability pruning."""
    pairs = vertex_pairs(n)
    reach = [[False] * n for _ in range(n)]  # transitive closure so far
    codes = bytearray(n * n)

    def add_arc(a: int, b: int) -> list[tuple[int, int]]:
        added = []
        srcs = [a] + [x for x in range(n) if reach[x][a]]
        dsts = [b] + [y for y in range(n) if reach[b][y]]
        for x in srcs:
            for y in dsts:
                if not reach[x][y]:
                    reach[x][y] = True
                    added.append((x, y))
        return added

    def rec(i: int):
        if i == len(pairs):
            yield Pdag(n, bytes(codes))
            return
        a, b = pairs[i]
        yield from rec(i + 1)
        for tail, head in ((a, b), (b, a)):
            if reach[head][tail]:
                continue
            codes[tail * n + head] = DIRECTED
            undo = add_arc(tail, head)
            yield from rec(i + 1)
            codes[tail * n + head] = 0
            for x, y in undo:
                reach[x][y] = False

    yield from rec(0)


def _all_cpdags(n: int) -> Iterable[Pdag]:
    seen: set[bytes] = set()
    for d in _all_dags(n):
        c = dag_to_cpdag(d)
        if c.key() not in seen:
            seen.add(c.key())
            yield c


def _all_mpdags(n: int, polytree: bool) -> Iterable[Pdag]:
    """All closures of CPDAG + background-orientation subsets, deduplicated.

    Complete because every MPDAG arises from its CPDAG by orienting a
    subset of undirected edges and closing.
    """
    base_spec = GraphClassSpec("cpdag", polytree=polytree)
    seen: set[bytes] = set()
    for c in enumerate_class(base_spec, n).members:
        und = c.undirected_edges()
        for choice in itertools.product((0, 1, 2), repeat=len(und)):
            bk = []
            for (a, b), pick in zip(und, choice):
                if pick == 1:
                    bk.append((a, b))
                elif pick == 2:
                    bk.append((b, a))
            try:
                g = mpdag_from_background(c, bk)
            except InconsistentBackgroundError:
                continue
            if g.key() not in seen:
                seen.add(g.key())
                yield g


# -- covering structure over a catalog ------------------------------------------


def hasse_adjacency(
    catalog: ClassCatalog, threads: int | None = None
) -> tuple[list[list[int]], list[list[int]]]:
    """Up/down cover lists (catalog indices) from the generative neighbor
    machinery; disk-cached. For general MPDAGs the pseudo-covering edges
    are produced instead."""
    stem = f"hasse-{catalog.spec.label()}-n{catalog.n}"
    cached = _cache_load(stem)
    if cached is not None:
        return cached

    def row(i: int) -> tuple[list[int], list[int]]:
        g = catalog.members[i]
        cache = NeighborCache(catalog.spec)
        if catalog.spec.kind == "mpdag" and not catalog.spec.polytree:
            ns = pseudo_neighbors(g, cache=cache)
        else:
            ns = neighbors(g, catalog.spec, cache=cache)
        up = sorted(catalog.index_of(h) for h in ns.up)
        down = sorted(catalog.index_of(h) for h in ns.down)
        return up, down

    rows = _parallel_rows(row, len(catalog.members), threads)
    up_idx = [r[0] for r in rows]
    down_idx = [r[1] for r in rows]
    _cache_store(stem, (up_idx, down_idx))
    return up_idx, down_idx


_ROW_FN = None


def _row_worker(i):
    return _ROW_FN(i)


def _parallel_rows(fn, count: int, threads: int | None):
    if not threads or threads <= 1 or count < 64:
        return [fn(i) for i in range(count)]
    import multiprocessing as mp

    global _ROW_FN
    _ROW_FN = fn
    try:
        ctx = mp.get_context("fork")
        with ctx.Pool(threads) as pool:
            return pool.map(_row_worker, range(count), chunksize=64)
    finally:
        _ROW_FN = None


def leq_matrix(catalog: ClassCatalog, threads: int | None = None) -> np.ndarray:
    """Boolean matrix M[i, j] = (member i <= member j).

    UG/DAG: subgraph masks. MPDAG: the every-member-embeds criterion.
    CPDAG: the represented-DAG subgraph-pair relation is sound and links
    every covering pair, so its transitive closure equals the model
    containment order.
    """
    stem = f"leq-{catalog.spec.label()}-n{catalog.n}"
    cached = _cache_load(stem)
    if cached is not None:
        return cached
    members = catalog.members
    m = len(members)
    kind = catalog.spec.kind
    if kind in ("ug", "dag"):
        masks = np.array(
            [g.skel_mask if kind == "ug" else g.dir_mask for g in members],
            dtype=np.uint64,
        )
        out = (masks[:, None] & ~masks[None, :]) == 0
    elif kind == "cpdag" and catalog.spec.polytree:
        # restriction of the full CPDAG order: chains through non-polytree
        # intermediates still count, so decide pairs pointwise
        cache = NeighborCache(catalog.spec)
        skel = np.array([g.skel_mask for g in members], dtype=np.uint64)
        candidate = (skel[:, None] & ~skel[None, :]) == 0

        def row(i: int) -> np.ndarray:
            out_row = np.zeros(m, dtype=bool)
            for j in np.nonzero(candidate[i])[0]:
                out_row[j] = cache.leq(members[i], members[j])
            return out_row

        rows = _parallel_rows(row, m, threads)
        out = np.array(rows, dtype=bool)
    else:
        skel = np.array([g.skel_mask for g in members], dtype=np.uint64)
        candidate = (skel[:, None] & ~skel[None, :]) == 0
        cache = NeighborCache(catalog.spec)
        mask_lists = [
            np.array(cache.member_masks(g), dtype=np.uint64) for g in members
        ]

        def row(i: int) -> np.ndarray:
            out_row = np.zeros(m, dtype=bool)
            mi = mask_lists[i]
            for j in np.nonzero(candidate[i])[0]:
                notmj = ~mask_lists[j]
                if kind == "cpdag":
                    ok = any(np.any((a & notmj) == 0) for a in mi)
                else:
                    ok = all(np.any((a & notmj) == 0) for a in mi)
                out_row[j] = ok
            return out_row

        rows = _parallel_rows(row, m, threads)
        out = np.array(rows, dtype=bool)
        if kind == "cpdag":
            out = _transitive_closure(out)
    _cache_store(stem, out)
    return out


def _transitive_closure(mat: np.ndarray) -> np.ndarray:
    out = mat.copy()
    while True:
        f = out.astype(np.float32)
        step = (f @ f) > 0.5
        new = out | step
        if (new == out).all():
            return out
        out = new


def cover_matrix(leq: np.ndarray) -> np.ndarray:
    """Definitional covering: x < y with no z strictly between."""
    strict = leq & ~np.eye(leq.shape[0], dtype=bool)
    f = strict.astype(np.float32)
    two_step = (f @ f) > 0.5
    return strict & ~two_step


def all_pairs_hasse_distance(cover: np.ndarray) -> np.ndarray:
    """All-pairs shortest-path lengths over the undirected Hasse graph.

    Returns an int matrix with -1 for unreachable pairs.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path

    sym = cover | cover.T
    dist = shortest_path(csr_matrix(sym), method="D", unweighted=True, directed=False)
    out = np.where(np.isinf(dist), -1, dist).astype(np.int32)
    return out
