"""Score-based causal discovery for multivariate time series.

Permutation search over the contemporaneous block of a lag-unrolled
window, grow-shrink trees for score caching, an optional backward
deletion phase over the window equivalence class, plus the synthetic
generator and evaluation protocol for benchmarking.
"""

__version__ = "0.1.0"

from ._backend import NUMBA_ENABLED, backend_name
from .cpdag import (
    mec_brute_force,
    meek_closure,
    pdag_to_stationary_dag,
    ts_dag_to_ts_cpdag,
)
from .data import (
    TimeSeriesDataset,
    WindowDataset,
    iid_windows,
    load_csv,
    unroll,
)
from .errors import (
    FormatError,
    GenerationFailureError,
    InsufficientDataError,
    InternalConsistencyError,
    InvalidInputError,
    InvalidModelError,
    ParseError,
    RunFailureError,
    SizeCapError,
    TsbossError,
)
from .graphs import (
    Edge,
    NodeId,
    SeparationQuery,
    WindowGraph,
    d_separated,
    dsep_oracle,
    expand_from_slice,
    is_stationary,
    is_window_subgraph_minimal,
    satisfies_window_markov,
)
from .gst import GrowShrinkTree
from .harness import ExperimentSpec, aggregate, run_experiment
from .metrics import (
    ConfusionCounts,
    adjacency_metrics,
    evaluate,
    orientation_metrics,
)
from .scoring import (
    BicScorer,
    LocalScore,
    SufficientStats,
    compute_stats,
    graph_score,
    local_bic,
)
from .search import (
    AdmissiblePermutation,
    SearchConfig,
    TsBossResult,
    best_ts_move,
    build_trees,
    initial_permutation,
    is_local_optimum,
    permutation_score,
    project,
    run_ts_boss,
    ts_bes,
    ts_boss_phase1,
)
from .simulate import (
    GenConfig,
    LinearTsScm,
    sample_model,
    simulate,
    spectral_radius,
    stationarity_check,
    true_graph,
)
