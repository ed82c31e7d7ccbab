"""Model-oriented distances between statistical graphs.

Organizes UGs, causal DAGs, CPDAGs, and MPDAGs into model-inclusion
posets and measures distance as shortest-path length through covering
neighbors in the Hasse diagram, with closed forms, bounds, A* search,
exhaustive enumeration, and a benchmark harness.
"""

from .errors import (
    BudgetExceededError,
    DimensionMismatchError,
    GraphdistError,
    InconsistentBackgroundError,
    InvalidGraphError,
    NotGradedError,
    ParseError,
    UnsupportedClassError,
)
from .pdag import (
    ABSENT,
    DIRECTED,
    UNDIRECTED,
    Pdag,
    canonical_key,
    has_directed_cycle,
    has_partially_directed_cycle,
    induced_subgraph,
    is_chordal,
    parse_amat_csv,
    parse_graph,
    skeleton,
    skeleton_is_forest,
    to_amat_csv,
    to_text,
    v_structures,
)
from .validity import (
    CPDAG,
    DAG,
    MPDAG,
    UG,
    GraphClassSpec,
    consistent_extensions,
    dag_to_cpdag,
    explain_invalid,
    is_valid,
    meek_closure,
    member_dags,
    mpdag_from_background,
)
from .poset import (
    NeighborCache,
    NeighborSet,
    leq,
    neighbors,
    pseudo_neighbors,
    pseudo_rank,
    rank,
)
from .distances import (
    DistanceReport,
    VDiscrepancy,
    auto_distance,
    brute_force_distance,
    closed_form_distance,
    cpdag_lower_bound,
    down_up_distance,
    min_alignment_ops,
    model_distance,
    pseudo_distance,
    shd1,
    shd2,
    up_down_distance,
    v_discrepancy,
)
# catalog (and transitively numpy) loads on first use so that plain
# parse/validate/distance runs stay light
_CATALOG_EXPORTS = (
    "ClassCatalog",
    "all_pairs_hasse_distance",
    "catalog_counts",
    "cover_matrix",
    "enumerate_class",
    "hasse_adjacency",
    "leq_matrix",
)


def __getattr__(name):
    if name in _CATALOG_EXPORTS:
        from . import catalog

        value = getattr(catalog, name)
        globals()[name] = value
        return value
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__version__ = "0.1.0"
