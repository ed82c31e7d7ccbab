import itertools
import random

import pytest

from graphdist import (
    CPDAG,
    DAG,
    MPDAG,
    UG,
    GraphClassSpec,
    InconsistentBackgroundError,
    InvalidGraphError,
    dag_to_cpdag,
    explain_invalid,
    is_valid,
    meek_closure,
    member_dags,
    mpdag_from_background,
    skeleton,
    v_structures,
)
from graphdist.catalog import enumerate_class
from graphdist.pdag import DIRECTED

from conftest import make
from oracles import all_mixed_graphs, maximal_orientation


class TestIsValid:
    def test_cpdag_directed_into_undirected(self):
        g = make(3, directed=[(1, 2)], undirected=[(2, 3)])
        assert not is_valid(g, CPDAG)
        assert explain_invalid(g, CPDAG).startswith("B.1(iii)")

    def test_cpdag_chain(self):
        assert is_valid(make(3, undirected=[(1, 2), (2, 3)]), CPDAG)

    def test_mpdag_collider_half_undirected(self):
        g = make(3, directed=[(3, 2)], undirected=[(1, 2)])
        assert not is_valid(g, MPDAG)
        assert explain_invalid(g, MPDAG).startswith("B.2(ii)")

    def test_cpdag_partially_directed_cycle(self):
        g = make(3, directed=[(1, 2)], undirected=[(2, 3), (3, 1)])
        assert explain_invalid(g, CPDAG).startswith("B.1(i)")

    def test_cpdag_nonchordal_component(self):
        g = make(4, undirected=[(1, 2), (2, 3), (3, 4), (4, 1)])
        assert explain_invalid(g, CPDAG).startswith("B.1(ii)")

    def test_cpdag_unprotected_edge(self):
        assert explain_invalid(make(2, directed=[(1, 2)]), CPDAG).startswith("B.1(iv)")

    def test_mpdag_allows_partially_directed_cycle(self):
        g = make(3, directed=[(1, 2)], undirected=[(2, 3), (3, 1)])
        assert is_valid(g, MPDAG)

    def test_mpdag_rejects_directed_cycle(self):
        g = make(3, directed=[(1, 2), (2, 3), (3, 1)])
        assert explain_invalid(g, MPDAG).startswith("B.2(pdag)")

    def test_ug_and_dag(self):
        assert is_valid(make(3, undirected=[(1, 2)]), UG)
        assert not is_valid(make(3, directed=[(1, 2)]), UG)
        assert is_valid(make(3, directed=[(1, 2)]), DAG)
        assert not is_valid(make(3, undirected=[(1, 2)]), DAG)
        assert not is_valid(make(3, directed=[(1, 2), (2, 3), (3, 1)]), DAG)

    def test_polytree_flag(self):
        tri = make(3, undirected=[(1, 2), (2, 3), (3, 1)])
        assert is_valid(tri, UG)
        assert not is_valid(tri, GraphClassSpec("ug", polytree=True))

    def test_every_cpdag_is_a_valid_mpdag(self):
        for g in enumerate_class(CPDAG, 4).members:
            assert is_valid(g, MPDAG)


class TestMeekClosure:
    def test_orients_away_from_new_collider(self):
        g = make(3, directed=[(1, 2)], undirected=[(2, 3)])
        assert meek_closure(g) == make(3, directed=[(1, 2), (2, 3)])

    def test_cpdag_is_fixpoint(self):
        for g in enumerate_class(CPDAG, 4).members[:60]:
            assert meek_closure(g) == g

    def test_chain_unchanged(self):
        g = make(3, undirected=[(1, 2), (2, 3)])
        assert meek_closure(g) == g

    def test_acyclic_chain_rule(self):
        # 1 -> 2 -> 3 with 1 - 3 must orient 1 -> 3
        g = make(3, directed=[(1, 2), (2, 3)], undirected=[(1, 3)])
        assert meek_closure(g) == make(3, directed=[(1, 2), (2, 3), (1, 3)])

    def test_double_collider_rule(self):
        # 1-2, 1-3, 1-4 with 2 -> 4 <- 3 and 2,3 nonadjacent forces 1 -> 4
        g = make(
            4, directed=[(2, 4), (3, 4)], undirected=[(1, 2), (1, 3), (1, 4)]
        )
        out = meek_closure(g)
        assert out.mark(0, 3) == DIRECTED

    def test_chained_collider_rule(self):
        # 1-2, 1-3, 1-4 with 2 -> 4 -> 3 and 2,3 nonadjacent forces 1 -> 3
        g = make(
            4, directed=[(2, 4), (4, 3)], undirected=[(1, 2), (1, 3), (1, 4)]
        )
        out = meek_closure(g)
        assert out.mark(0, 2) == DIRECTED

    def test_matches_maximal_orientation_oracle_n3(self):
        self._closure_vs_oracle(3, limit=None)

    def test_matches_maximal_orientation_oracle_n4(self):
        self._closure_vs_oracle(4, limit=40)

    @staticmethod
    def _closure_vs_oracle(n, limit):
        cpdags = enumerate_class(CPDAG, n).members
        rng = random.Random(11)
        if limit is not None:
            cpdags = rng.sample(cpdags, limit)
        for c in cpdags:
            und = c.undirected_edges()
            for r in range(0, min(len(und), 3) + 1):
                for chosen in itertools.combinations(und, r):
                    for flips in itertools.product((0, 1), repeat=r):
                        bk = [
                            (a, b) if f == 0 else (b, a)
                            for (a, b), f in zip(chosen, flips)
                        ]
                        want = maximal_orientation(c, bk)
                        if want is None:
                            with pytest.raises(InconsistentBackgroundError):
                                mpdag_from_background(c, bk)
                        else:
                            assert mpdag_from_background(c, bk) == want


class TestDagToCpdag:
    def test_chain(self):
        d = make(3, directed=[(1, 2), (2, 3)])
        assert dag_to_cpdag(d) == make(3, undirected=[(1, 2), (2, 3)])

    def test_collider_fixed(self):
        d = make(3, directed=[(1, 2), (3, 2)])
        assert dag_to_cpdag(d) == d

    def test_single_edge(self):
        assert dag_to_cpdag(make(2, directed=[(1, 2)])) == make(2, undirected=[(1, 2)])

    def test_rejects_non_dag(self):
        with pytest.raises(InvalidGraphError):
            dag_to_cpdag(make(3, undirected=[(1, 2)]))
        with pytest.raises(InvalidGraphError):
            dag_to_cpdag(make(3, directed=[(1, 2), (2, 3), (3, 1)]))

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_fibers_match_equivalence_classes(self, n):
        dags = enumerate_class(DAG, n).members
        by_class = {}
        for d in dags:
            by_class.setdefault((skeleton(d), v_structures(d)), []).append(d)
        seen_cpdags = {}
        for sig, fiber in by_class.items():
            images = {dag_to_cpdag(d) for d in fiber}
            assert len(images) == 1
            c = images.pop()
            assert is_valid(c, CPDAG)
            assert skeleton(c) == sig[0] and v_structures(c) == sig[1]
            assert sorted(member_dags(c, CPDAG), key=lambda x: x.key()) == sorted(
                fiber, key=lambda x: x.key()
            )
            assert c not in seen_cpdags
            seen_cpdags[c] = True


class TestMemberDags:
    def test_chain_has_three(self):
        members = member_dags(make(3, undirected=[(1, 2), (2, 3)]), CPDAG)
        assert len(members) == 3

    def test_background_narrows_to_two(self):
        members = member_dags(make(3, directed=[(2, 3)], undirected=[(1, 2)]), MPDAG)
        assert len(members) == 2

    def test_dag_represents_itself(self):
        d = make(3, directed=[(1, 2), (3, 2)])
        assert member_dags(d, DAG) == [d]

    def test_rejects_invalid(self):
        with pytest.raises(InvalidGraphError):
            member_dags(make(3, directed=[(1, 2)], undirected=[(2, 3)]), CPDAG)


class TestBackground:
    def test_one_orientation(self):
        c = make(3, undirected=[(1, 2), (2, 3)])
        out = mpdag_from_background(c, [(0, 1)])
        assert out == make(3, directed=[(1, 2), (2, 3)])

    def test_paper_chain_example(self):
        c = make(3, undirected=[(1, 2), (2, 3)])
        assert mpdag_from_background(c, [(1, 2)]) == make(
            3, directed=[(2, 3)], undirected=[(1, 2)]
        )

    def test_empty_background_is_identity(self):
        for c in enumerate_class(CPDAG, 3).members:
            assert mpdag_from_background(c, []) == c

    def test_fork_background_closes_to_dag(self):
        c = make(3, undirected=[(1, 2), (2, 3)])
        out = mpdag_from_background(c, [(1, 0), (1, 2)])
        assert out == make(3, directed=[(2, 1), (2, 3)])
        assert len(member_dags(out, MPDAG)) == 1

    def test_inconsistent_background(self):
        c = make(3, undirected=[(1, 2), (2, 3)])
        with pytest.raises(InconsistentBackgroundError):
            mpdag_from_background(c, [(0, 1), (2, 1)])

    def test_background_outside_skeleton(self):
        c = make(3, undirected=[(1, 2)])
        with pytest.raises(InconsistentBackgroundError):
            mpdag_from_background(c, [(0, 2)])

    def test_background_against_directed_edge(self):
        c = make(3, directed=[(1, 2), (3, 2)])
        with pytest.raises(InconsistentBackgroundError):
            mpdag_from_background(c, [(1, 0)])

    def test_outputs_are_valid_mpdags(self):
        rng = random.Random(12)
        cpdags = enumerate_class(CPDAG, 4).members
        for c in rng.sample(cpdags, 40):
            und = c.undirected_edges()
            for a, b in und:
                try:
                    out = mpdag_from_background(c, [(a, b)])
                except InconsistentBackgroundError:
                    continue
                assert is_valid(out, MPDAG)
                assert v_structures(out) == v_structures(c)


class TestMpdagFilterCrossCheck:
    def test_constructive_equals_validity_filter_n3(self):
        filtered = {
            g.key() for g in all_mixed_graphs(3) if is_valid(g, MPDAG)
        }
        constructive = set(enumerate_class(MPDAG, 3).key_index)
        assert filtered == constructive
