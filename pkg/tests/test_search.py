import random

import pytest

from bnsl.acyclicity import AcyclicityFailure
from bnsl.generators import random_instance
from bnsl.instance import DomainState, Instance, is_acyclic
from bnsl.oracle import brute_force_optimum
from bnsl.search import SearchNode, Solver, SolverConfig, least_regret_children, solve


def test_toy_closes_at_root(toy):
    result = solve(toy)
    assert result.optimal and result.cost == 10
    assert result.stats["nodes"] == 1
    assert result.stats["root_bound"] == 10
    assert result.network == brute_force_optimum(toy).network


def test_single_variable():
    inst = Instance.from_domains(["a"], [[(0, 2.5)]])
    result = solve(inst)
    assert result.optimal and result.cost == 2.5 and result.network == (0,)


def test_infeasible_instance():
    inst = Instance.from_domains(["a", "b"], [[(0b10, 0.0)], [(0b01, 0.0)]])
    result = solve(inst)
    assert result.status == "infeasible" and result.incumbent is None


def test_least_regret_children(toy_root):
    # at the root only variables with a live empty set can go first
    kids = least_regret_children(toy_root, 0)
    assert [(r, v) for r, v, _ in kids] == [(3, 4), (5, 3), (6, 1), (10, 2)]


CONFIGS = [
    SolverConfig(),
    SolverConfig(gac=False),
    SolverConfig(cluster_order="chrono"),
    SolverConfig(minimise=False),
    SolverConfig(lb_every_k=3),
    SolverConfig(pool_max=2),
]


@pytest.mark.parametrize("config", CONFIGS, ids=["default", "no-gac", "chrono", "no-minimise", "k3", "pool2"])
def test_matches_brute_force(config):
    rng = random.Random(5)
    for _ in range(80):
        inst = random_instance(rng, rng.randint(2, 6), max_d=6, costly_empty=rng.random() < 0.5)
        want = brute_force_optimum(inst)
        result = solve(inst, config)
        assert result.optimal
        assert abs(result.cost - want.cost) <= inst.eps
        assert is_acyclic(result.network)
        assert inst.network_cost(result.network) == result.cost


def test_node_hook_sees_every_bounded_node(toy):
    seen = []
    result = solve(toy, SolverConfig(node_hook=seen.append))
    assert len(seen) == result.stats["bounded_nodes"] == 1
    assert seen[0].bound == 10


def test_gac_failure_has_no_children(toy):
    solver = Solver(toy)
    # force x1 <- {2, 4} and x2 <- {1, 3}: a two-cycle
    domains = DomainState.full(toy).assign(1, 0).assign(2, 0)
    node = SearchNode((), 0, 0.0, domains, (None,) * 5)
    with pytest.raises(AcyclicityFailure):
        solver.expand(node, 0)


def test_cache_prunes_repeated_subsets():
    rng = random.Random(1)
    hits = 0
    for _ in range(20):
        inst = random_instance(rng, 8, max_d=8, costly_empty=True)
        result = solve(inst, SolverConfig(lb_every_k=2))
        assert result.optimal
        hits += result.stats["cache_hits"]
    assert hits > 0


def test_timeout_keeps_incumbent():
    rng = random.Random(0)
    inst = random_instance(rng, 14, max_d=20, costly_empty=True)
    result = solve(inst, SolverConfig(time_limit=0.0))
    assert result.status == "timeout"
    assert result.incumbent is not None and is_acyclic(result.network)


def test_stats_keys(toy):
    stats = solve(toy).stats
    for key in ("nodes", "root_bound", "clusters_generated", "clusters_evicted",
                "gac_prunings", "support_pair_hit_rate", "domain_visit_fraction", "wall_time"):
        assert key in stats


def test_deterministic():
    rng = random.Random(3)
    inst = random_instance(rng, 9, max_d=8, costly_empty=True)
    a = solve(inst)
    b = solve(inst)
    assert a.network == b.network
    assert a.stats["nodes"] == b.stats["nodes"]
