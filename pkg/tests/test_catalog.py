import pytest

from graphdist import (
    BudgetExceededError,
    CPDAG,
    DAG,
    MPDAG,
    UG,
    GraphClassSpec,
    catalog_counts,
    dag_to_cpdag,
    enumerate_class,
    is_valid,
    skeleton_is_forest,
)


GOLDEN_COUNTS = [
    (UG, 3, 8),
    (UG, 4, 64),
    (DAG, 2, 3),
    (DAG, 3, 25),
    (DAG, 4, 543),
    (CPDAG, 2, 2),
    (CPDAG, 3, 11),
    (CPDAG, 4, 185),
]


@pytest.mark.parametrize("spec,n,count", GOLDEN_COUNTS)
def test_golden_counts(spec, n, count):
    assert catalog_counts(spec, n) == count


def test_cpdag_count_matches_equivalence_classes():
    from graphdist import skeleton, v_structures

    dags = enumerate_class(DAG, 3).members
    classes = {(skeleton(d), v_structures(d)) for d in dags}
    assert len(classes) == 11 == catalog_counts(CPDAG, 3)


def test_members_are_valid_and_sorted():
    for spec in (UG, DAG, CPDAG, MPDAG, GraphClassSpec("mpdag", polytree=True)):
        catalog = enumerate_class(spec, 3)
        keys = [g.key() for g in catalog.members]
        assert keys == sorted(keys)
        assert len(set(keys)) == len(keys)
        for g in catalog.members:
            assert is_valid(g, spec)
        assert catalog.key_index[catalog.members[0].key()] == 0


def test_dag_to_cpdag_is_surjective_onto_catalog():
    cpdags = set(enumerate_class(CPDAG, 4).key_index)
    images = {dag_to_cpdag(d).key() for d in enumerate_class(DAG, 4).members}
    assert images == cpdags


def test_cpdags_are_mpdag_members():
    mp = set(enumerate_class(MPDAG, 4).key_index)
    for g in enumerate_class(CPDAG, 4).members:
        assert g.key() in mp


def test_polytree_filter():
    spec = GraphClassSpec("cpdag", polytree=True)
    for g in enumerate_class(spec, 4).members:
        assert skeleton_is_forest(g)
    full = enumerate_class(CPDAG, 4).members
    assert len(enumerate_class(spec, 4)) == sum(
        1 for g in full if skeleton_is_forest(g)
    )


def test_deterministic_without_cache(monkeypatch, tmp_path):
    monkeypatch.setenv("GRAPHDIST_CACHE_DIR", "")
    a = enumerate_class(CPDAG, 3)
    b = enumerate_class(CPDAG, 3)
    assert [g.key() for g in a.members] == [g.key() for g in b.members]


def test_cache_roundtrip(monkeypatch, tmp_path):
    monkeypatch.setenv("GRAPHDIST_CACHE_DIR", str(tmp_path))
    a = enumerate_class(CPDAG, 3)
    assert list(tmp_path.iterdir())
    b = enumerate_class(CPDAG, 3)
    assert [g.key() for g in a.members] == [g.key() for g in b.members]


def test_budget_errors():
    with pytest.raises(BudgetExceededError):
        enumerate_class(UG, 7)
    with pytest.raises(BudgetExceededError):
        enumerate_class(MPDAG, 5)
    with pytest.raises(BudgetExceededError):
        enumerate_class(CPDAG, 6)
