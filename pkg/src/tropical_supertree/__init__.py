"""Exact parametric tropical Fermat-Weber problems and tropical supertrees."""

from .bigm import BigM, INF, M, parse_bigm
from .fermat_weber import (
    FermatWeberResult,
    InternalError,
    central_covector_graph,
    fermat_weber,
    fw_objective,
    stabilization_threshold,
)
from .phylo import (
    PhyloTree,
    Ultrametric,
    displays_nesting,
    is_ultrametric,
    parse_newick,
    rooted_triplets,
    tree_to_ultrametric,
    ultrametric_to_tree,
)
from .supertree import (
    SupertreeProblem,
    explicit_big_m,
    extend_ultrametric,
    pareto_audit,
    topology_stability_probe,
    tropical_consensus,
    tropical_supertree,
)
from .tropical import PointConfig, TorusPoint, asym_distance

__version__ = "0.1.0"

__all__ = [
    "BigM",
    "FermatWeberResult",
    "INF",
    "InternalError",
    "M",
    "PhyloTree",
    "PointConfig",
    "SupertreeProblem",
    "TorusPoint",
    "Ultrametric",
    "asym_distance",
    "central_covector_graph",
    "displays_nesting",
    "explicit_big_m",
    "extend_ultrametric",
    "fermat_weber",
    "fw_objective",
    "is_ultrametric",
    "pareto_audit",
    "parse_bigm",
    "parse_newick",
    "rooted_triplets",
    "stabilization_threshold",
    "topology_stability_probe",
    "tree_to_ultrametric",
    "tropical_consensus",
    "tropical_supertree",
    "ultrametric_to_tree",
]
