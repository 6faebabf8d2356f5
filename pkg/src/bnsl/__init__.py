"""Exact Bayesian network structure learning by branch and bound over vertex
orders, bounded by greedy duals of the cluster LP."""

from .acyclicity import AcyclicityFailure, OrderWitness, acyc_checker, gac_probe, gac_propagate
from .clusters import LowerBound, lower_bound_rc, minimise_cluster, rc_restricted_domains
from .dual import Cluster, ClusterPool, DualState, dual_improve, dual_init, dual_solve, evict
from .instance import (
    DomainState,
    DomainWipeout,
    Incumbent,
    Infeasible,
    Instance,
    ScoredValue,
    ScoreFileError,
    load_scores,
    parse_scores,
    restrict,
    serialize,
)
from .oracle import brute_force_optimum, enumerate_violated_clusters
from .search import SolveResult, SolverConfig, solve

__version__ = "0.1.0"
