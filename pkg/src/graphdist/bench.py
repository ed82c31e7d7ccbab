"""Deterministic benchmark experiments over the class catalogs.

Four experiments:
  cpdag-allpairs-4          all 17020 CPDAG pairs on 4 vertices
  cpdag-allpairs-5          fixed-seed pair subsample on 5 vertices
                            (the full 38.5M-pair sweep is opt-in)
  mpdag-polytree-allpairs-5 all polytree-MPDAG pairs on 5 vertices
  poset-structure-table     structural attributes of each class poset,
                            decided exhaustively at small n

Pairs are unordered (the distance is symmetric). Wall-clock numbers are
reported, never asserted.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import distances as dist
from .catalog import (
    ClassCatalog,
    cover_matrix,
    enumerate_class,
    hasse_adjacency,
    leq_matrix,
)
from .errors import GraphdistError
from .poset import NeighborCache
from .validity import CPDAG, GraphClassSpec

DEFAULT_SEED = 20250809
DEFAULT_SAMPLE = 100_000

EXPERIMENTS = (
    "cpdag-allpairs-4",
    "cpdag-allpairs-5",
    "mpdag-polytree-allpairs-5",
    "poset-structure-table",
)

SHAPE_CODES = {0: "chain", 1: "downup", 2: "updown", 3: "zigzag", -1: ""}


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    columns: dict[str, np.ndarray] = field(default_factory=dict)
    aggregates: dict = field(default_factory=dict)
    table: list[dict] = field(default_factory=list)
    wall_clock_s: float = 0.0

    def pair_count(self) -> int:
        if not self.columns:
            return 0
        return len(next(iter(self.columns.values())))


def run_experiment(
    experiment: str,
    threads: Optional[int] = None,
    sample: Optional[int] = None,
    seed: int = DEFAULT_SEED,
    full: bool = False,
) -> ExperimentReport:
    t0 = time.perf_counter()
    if experiment == "cpdag-allpairs-4":
        rep = _cpdag_sweep(4, threads, sample=None, seed=seed, full=True)
    elif experiment == "cpdag-allpairs-5":
        rep = _cpdag_sweep(
            5, threads, sample=None if full else (sample or DEFAULT_SAMPLE),
            seed=seed, full=full,
        )
    elif experiment == "mpdag-polytree-allpairs-5":
        rep = _polytree_mpdag_sweep(threads, seed=seed)
    elif experiment == "poset-structure-table":
        rep = _poset_structure_table(threads)
    else:
        raise ValueError(f"unknown experiment {experiment!r}; pick from {EXPERIMENTS}")
    rep.wall_clock_s = time.perf_counter() - t0
    return rep


# -- CPDAG sweeps -----------------------------------------------------------------

_STATE: dict = {}


def _preloaded_cache(catalog: ClassCatalog, threads) -> NeighborCache:
    up, down = hasse_adjacency(catalog, threads=threads)
    cache = NeighborCache(catalog.spec)
    mem = catalog.members
    for i, g in enumerate(mem):
        cache.preload(g, [mem[j] for j in up[i]], [mem[j] for j in down[i]])
    return cache


def _pair_row(task: tuple[int, int]) -> tuple:
    i, j = task
    cat: ClassCatalog = _STATE["catalog"]
    cache: NeighborCache = _STATE["cache"]
    g1, g2 = cat.members[i], cat.members[j]
    s1 = dist.shd1(g1, g2)
    s2 = dist.shd2(g1, g2)
    lo = dist.cpdag_lower_bound(g1, g2, cache)
    du = dist.down_up_distance(g1, g2, CPDAG, cache).value
    ud = dist.up_down_distance(g1, g2, CPDAG, cache).value
    ub = min(du, ud)
    if lo == ub:
        exact, astar = lo, 0
    else:
        exact, astar = dist.model_distance(g1, g2, CPDAG, cache=cache).value, 1
    dr = abs(g1.edge_count() - g2.edge_count())
    if exact == dr:
        shape = 0
    elif exact == du:
        shape = 1
    elif exact == ud:
        shape = 2
    else:
        shape = 3
    return (i, j, s1, s2, lo, du, ud, exact, shape, astar)


def _cpdag_sweep(n: int, threads, sample, seed, full) -> ExperimentReport:
    catalog = enumerate_class(CPDAG, n)
    cache = _preloaded_cache(catalog, threads)
    m = len(catalog.members)
    total_pairs = m * (m - 1) // 2
    if sample is None:
        tasks = list(itertools.combinations(range(m), 2))
        mode = "all-pairs"
    else:
        rng = random.Random(seed)
        chosen: set[tuple[int, int]] = set()
        while len(chosen) < min(sample, total_pairs):
            i = rng.randrange(m)
            j = rng.randrange(m)
            if i != j:
                chosen.add((min(i, j), max(i, j)))
        tasks = sorted(chosen)
        mode = "subsample"
    _STATE["catalog"] = catalog
    _STATE["cache"] = cache
    rows = _parallel_pairs(_pair_row, tasks, threads)
    cols = _tuples_to_columns(
        rows, ("i", "j", "shd1", "shd2", "lower_bound", "down_up", "up_down",
               "exact", "path_shape", "astar_used"),
    )
    rep = ExperimentReport(
        experiment=f"cpdag-allpairs-{n}",
        params={
            "n": n,
            "catalog_size": m,
            "pair_mode": mode,
            "pairs": len(tasks),
            "total_pairs": total_pairs,
            "seed": seed if mode == "subsample" else None,
            "pair_convention": "unordered",
        },
        columns=cols,
    )
    rep.aggregates = _cpdag_aggregates(cols)
    return rep


def _cpdag_aggregates(cols: dict[str, np.ndarray]) -> dict:
    npairs = len(cols["exact"])
    lo, du, ud = cols["lower_bound"], cols["down_up"], cols["up_down"]
    exact, s1, s2 = cols["exact"], cols["shd1"], cols["shd2"]
    ub = np.minimum(du, ud)
    match = int((lo == ub).sum())
    gaps = ub - lo
    hist = {int(k): int(v) for k, v in zip(*np.unique(gaps[gaps > 0], return_counts=True))}
    violations = int(((exact < lo) | (exact > ub)).sum())
    zigzag = int((exact < ub).sum())
    differ = int(((exact != s1) & (exact != s2)).sum())
    smaller = int(((exact < s1) & (exact < s2)).sum())
    return {
        "pairs": npairs,
        "bound_match": match,
        "bound_match_fraction": match / npairs,
        "residual_gap_histogram": hist,
        "max_gap": int(gaps.max()) if npairs else 0,
        "bound_violations": violations,
        "zigzag": zigzag,
        "zigzag_fraction": zigzag / npairs,
        "shd_differ_fraction": differ / npairs,
        "shd_strictly_smaller_fraction": smaller / npairs,
        "astar_runs": int(cols["astar_used"].sum()),
    }


def _tuples_to_columns(rows, names) -> dict[str, np.ndarray]:
    arr = np.array(rows, dtype=np.int32)
    if arr.size == 0:
        arr = arr.reshape(0, len(names))
    return {name: arr[:, k] for k, name in enumerate(names)}


_PAIR_FN = None


def _pair_worker(chunk):
    return [_PAIR_FN(t) for t in chunk]


def _parallel_pairs(fn, tasks, threads):
    if not threads or threads <= 1 or len(tasks) < 512:
        return [fn(t) for t in tasks]
    import multiprocessing as mp

    global _PAIR_FN
    _PAIR_FN = fn
    try:
        chunk = max(256, len(tasks) // (threads * 16))
        chunks = [tasks[k: k + chunk] for k in range(0, len(tasks), chunk)]
        ctx = mp.get_context("fork")
        with ctx.Pool(threads) as pool:
            out = []
            for part in pool.map(_pair_worker, chunks):
                out.extend(part)
            return out
    finally:
        _PAIR_FN = None


# -- polytree MPDAG sweep -----------------------------------------------------------


def _polytree_mpdag_sweep(threads, seed) -> ExperimentReport:
    spec = GraphClassSpec("mpdag", polytree=True)
    catalog = enumerate_class(spec, 5)
    m = len(catalog.members)
    up, _ = hasse_adjacency(catalog, threads=threads)
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path

    rows, cols_ = [], []
    for i, ups in enumerate(up):
        rows.extend([i] * len(ups))
        cols_.extend(ups)
    adj = csr_matrix(
        (np.ones(len(rows), dtype=bool), (rows, cols_)), shape=(m, m)
    )
    dist_mat = shortest_path(adj, method="D", unweighted=True, directed=False)
    if np.isinf(dist_mat).any():
        raise GraphdistError("pseudo Hasse diagram is disconnected")
    dist_mat = dist_mat.astype(np.int16)

    amasks = np.array([g.amask for g in catalog.members], dtype=np.uint64)
    nbits = catalog.n * catalog.n
    bits = ((amasks[:, None] >> np.arange(nbits, dtype=np.uint64)[None, :]) & 1)
    x = bits.astype(np.float32)
    ones = x.sum(axis=1)
    shd2_mat = (ones[:, None] + ones[None, :] - 2 * (x @ x.T)).astype(np.int16)

    iu = np.triu_indices(m, 1)
    exact = dist_mat[iu].astype(np.int16)
    shd2v = shd2_mat[iu]
    diff = exact - shd2v
    vals, counts = np.unique(diff, return_counts=True)
    hist = {int(k): int(v) for k, v in zip(vals, counts)}
    six_pairs = [
        (int(i), int(j))
        for i, j in np.argwhere(dist_mat - shd2_mat == 6)
        if i < j
    ]

    # spot-check the per-pair search against the matrix on a seeded sample
    cache = _preloaded_cache(catalog, threads)
    rng = random.Random(seed)
    agree = 0
    spot = 200
    for _ in range(spot):
        i = rng.randrange(m)
        j = rng.randrange(m)
        if i == j:
            continue
        rep = dist.pseudo_distance(
            catalog.members[i], catalog.members[j], polytree=True, cache=cache
        )
        if rep.value == int(dist_mat[i, j]):
            agree += 1
        else:
            raise GraphdistError(
                f"pseudo_distance mismatch vs all-pairs matrix at pair {(i, j)}"
            )

    npairs = exact.size
    rep = ExperimentReport(
        experiment="mpdag-polytree-allpairs-5",
        params={
            "n": 5,
            "catalog_size": m,
            "pair_mode": "all-pairs",
            "pairs": int(npairs),
            "pair_convention": "unordered",
            "spot_checks": spot,
        },
        columns={
            "i": iu[0].astype(np.int32),
            "j": iu[1].astype(np.int32),
            "shd2": shd2v.astype(np.int32),
            "exact": exact.astype(np.int32),
            "diff": diff.astype(np.int32),
        },
    )
    rep.aggregates = {
        "pairs": int(npairs),
        "match_shd2": int((diff == 0).sum()),
        "match_shd2_fraction": float((diff == 0).sum() / npairs),
        "diff_histogram": hist,
        "diff_values": sorted(int(v) for v in vals),
        "diff6_count": len(six_pairs),
        "diff6_pairs": six_pairs,
        "spot_check_agreement": agree,
    }
    return rep


# -- poset structure table ------------------------------------------------------------


def _poset_structure_table(threads) -> ExperimentReport:
    """Check each structural attribute that is decidable by exhaustive
    search at small n against its expected value."""
    # None marks cells with no committed expectation at this n; they are
    # reported but not asserted.
    expected = [
        # (label, n, least, greatest, graded, meet, join, lower_semimod, upper_semimod)
        ("ug", 3, True, True, True, True, True, True, True),
        ("dag", 3, True, False, True, True, False, True, False),
        ("cpdag", 3, True, True, True, False, False, None, None),
        ("cpdag", 4, True, True, True, False, False, False, False),
        ("cpdag-polytree", 4, True, False, True, False, False, True, None),
        ("mpdag", 3, True, True, None, False, False, None, False),
        ("mpdag", 4, True, True, False, None, None, None, None),
        ("mpdag-polytree", 4, True, False, True, None, False, None, None),
    ]
    table = []
    mismatches = 0
    for row in expected:
        label, n = row[0], row[1]
        kind, _, poly = label.partition("-")
        spec = GraphClassSpec(kind, polytree=bool(poly))
        catalog = enumerate_class(spec, n)
        leq = leq_matrix(catalog, threads=threads)
        cover = cover_matrix(leq)
        actual = _poset_attributes(catalog, leq, cover, spec)
        keys = ("least", "greatest", "graded", "meet", "join",
                "lower_semimodular", "upper_semimodular")
        entry = {"class": label, "n": n}
        for key, exp, act in zip(keys, row[2:], actual):
            entry[key] = act
            entry[f"{key}_expected"] = exp
            if exp is not None and act != exp:
                mismatches += 1
        table.append(entry)
    rep = ExperimentReport(
        experiment="poset-structure-table",
        params={"rows": len(table)},
        table=table,
    )
    rep.aggregates = {"rows": len(table), "mismatches": mismatches}
    return rep


def _poset_attributes(catalog, leq, cover, spec):
    m = leq.shape[0]
    least = bool((leq.sum(axis=1) == m).any())
    greatest = bool((leq.sum(axis=0) == m).any())
    # graded: some integer labelling increases by exactly 1 across covers;
    # with a least element this is equivalent to all cover-paths between
    # two elements having equal length, which BFS layering decides.
    graded = _is_graded_poset(cover)
    meet = _is_semilattice(leq, lower=True)
    join = _is_semilattice(leq, lower=False)
    lower_semi = _is_semimodular(cover, lower=True)
    upper_semi = _is_semimodular(cover, lower=False)
    return least, greatest, graded, meet, join, lower_semi, upper_semi


def _is_graded_poset(cover: np.ndarray) -> bool:
    m = cover.shape[0]
    minimal = np.nonzero(cover.sum(axis=0) == 0)[0]
    level = np.full(m, -1, dtype=np.int64)
    order = []
    indeg = cover.sum(axis=0).copy()
    queue = [int(i) for i in minimal]
    for i in queue:
        level[i] = 0
    while queue:
        i = queue.pop()
        order.append(i)
        for j in np.nonzero(cover[i])[0]:
            want = level[i] + 1
            if level[j] == -1:
                level[j] = want
            elif level[j] != want:
                return False
            indeg[j] -= 1
            if indeg[j] == 0:
                queue.append(int(j))
    # a consistent level assignment exists iff every cover raises it by one
    for i in range(m):
        for j in np.nonzero(cover[i])[0]:
            if level[j] != level[i] + 1:
                return False
    return True


def _is_semilattice(leq: np.ndarray, lower: bool) -> bool:
    m = leq.shape[0]
    for i in range(m):
        for j in range(i + 1, m):
            if lower:
                bounds = np.nonzero(leq[:, i] & leq[:, j])[0]
                has_extreme = any(leq[bounds, b].all() for b in bounds)
            else:
                bounds = np.nonzero(leq[i, :] & leq[j, :])[0]
                has_extreme = any(leq[b, bounds].all() for b in bounds)
            if len(bounds) == 0 or not has_extreme:
                return False
    return True


def _is_semimodular(cover: np.ndarray, lower: bool) -> bool:
    m = cover.shape[0]
    for g in range(m):
        if lower:
            kids = np.nonzero(cover[:, g])[0]  # elements g covers... see below
        else:
            kids = np.nonzero(cover[g, :])[0]
        # lower semimodularity: whenever g covers x and y (x != y), some z
        # is covered by both x and y; upper is the dual.
        for a_i in range(len(kids)):
            for b_i in range(a_i + 1, len(kids)):
                x, y = kids[a_i], kids[b_i]
                if lower:
                    ok = (cover[:, x] & cover[:, y]).any()
                else:
                    ok = (cover[x, :] & cover[y, :]).any()
                if not ok:
                    return False
    return True


# -- output --------------------------------------------------------------------------


def summarize(report: ExperimentReport, deterministic: bool = False) -> str:
    lines = [f"experiment: {report.experiment}"]
    for k, v in report.params.items():
        lines.append(f"  param {k} = {v}")
    if report.table:
        keys = [k for k in report.table[0] if not k.endswith("_expected")]
        lines.append("  " + " | ".join(f"{k:>18}" for k in keys))
        for row in report.table:
            lines.append("  " + " | ".join(f"{str(row[k]):>18}" for k in keys))
    for k, v in sorted(report.aggregates.items()):
        if k == "diff6_pairs":
            v = v[:8]
        lines.append(f"  {k} = {v}")
    if not deterministic:
        lines.append(f"  wall_clock_s = {report.wall_clock_s:.3f}")
    return "\n".join(lines) + "\n"


def report_to_csv(report: ExperimentReport, path: str) -> None:
    """Header + one row per pair, then a footer block of aggregates."""
    names = list(report.columns)
    with open(path, "w") as fh:
        fh.write(f"# experiment: {report.experiment}\n")
        for k, v in report.params.items():
            fh.write(f"# param {k}={v}\n")
        if names:
            fh.write(",".join(names) + "\n")
            arrays = [report.columns[k] for k in names]
            shape_idx = names.index("path_shape") if "path_shape" in names else -1
            for row in zip(*arrays):
                vals = [str(int(v)) for v in row]
                if shape_idx >= 0:
                    vals[shape_idx] = SHAPE_CODES[int(row[shape_idx])]
                fh.write(",".join(vals) + "\n")
        if report.table:
            keys = list(report.table[0])
            fh.write(",".join(keys) + "\n")
            for rowd in report.table:
                fh.write(",".join(str(rowd[k]) for k in keys) + "\n")
        for k, v in sorted(report.aggregates.items()):
            fh.write(f"#agg {k}={v!r}\n")


def parse_report_csv(path: str) -> tuple[dict[str, np.ndarray], dict]:
    """Inverse of report_to_csv for the per-pair block; returns columns
    and the parsed aggregate footer."""
    import ast

    names: list[str] = []
    rows: list[list[int]] = []
    aggs: dict = {}
    inv_shape = {v: k for k, v in SHAPE_CODES.items()}
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#agg "):
                k, _, v = line[5:].partition("=")
                aggs[k] = ast.literal_eval(v)
            elif line.startswith("#") or not line:
                continue
            elif not names:
                names = line.split(",")
            else:
                vals = line.split(",")
                rows.append(
                    [inv_shape[v] if v in inv_shape and not v.lstrip("-").isdigit()
                     else int(v) for v in vals]
                )
    cols = {
        name: np.array([r[k] for r in rows], dtype=np.int32)
        for k, name in enumerate(names)
    }
    return cols, aggs
