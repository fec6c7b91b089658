"""Belief-network structure recovery under hidden variables.

The library learns a DAG over the visible variables of a causally
insufficient model from conditional-independence queries whose
conditioning sets are capped at cardinality k, then extends the partially
oriented result into a full network, reading bidirected edges as hidden
common causes.  Three interchangeable query backends (graph oracle, exact
distribution, sample-based likelihood-ratio test), a brute-force
reference projection, and a structural property suite round it out.
"""

from .algorithm import (
    RunConfig,
    RunResult,
    SepsetTable,
    TraceEvent,
    legally_removable,
    run,
    step_ab_skeleton,
    step_c_colliders,
    step_d_closure,
    step_e,
    step_f_extend,
)
from .dsep import (
    active_trail_into,
    d_separated,
    find_separator,
    rk_including_path_graph,
    separator_subsets,
)
from .graphs import Dag, Mark, MixedGraph, TrueDag, Variable
from .harness import (
    Metrics,
    ParamDag,
    PropertyReport,
    as_marked_graph,
    compare,
    format_metrics_table,
    forward_sample,
    marginalize,
    random_cpts,
    random_dag,
    sweep_instances,
    verify_properties,
)
from .indep import (
    DiscreteDataset,
    ExactDistribution,
    chi2_sf,
    exact_backend,
    gsq_backend,
    oracle_backend,
)

__version__ = "0.1.0"

__all__ = [
    "Dag",
    "DiscreteDataset",
    "ExactDistribution",
    "Mark",
    "Metrics",
    "MixedGraph",
    "ParamDag",
    "PropertyReport",
    "RunConfig",
    "RunResult",
    "SepsetTable",
    "TraceEvent",
    "TrueDag",
    "Variable",
    "active_trail_into",
    "as_marked_graph",
    "chi2_sf",
    "compare",
    "d_separated",
    "exact_backend",
    "find_separator",
    "format_metrics_table",
    "forward_sample",
    "gsq_backend",
    "legally_removable",
    "marginalize",
    "oracle_backend",
    "random_cpts",
    "random_dag",
    "rk_including_path_graph",
    "run",
    "separator_subsets",
    "step_ab_skeleton",
    "step_c_colliders",
    "step_d_closure",
    "step_e",
    "step_f_extend",
    "sweep_instances",
    "verify_properties",
    "__version__",
]
