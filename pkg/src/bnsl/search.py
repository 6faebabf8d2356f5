"""Depth-first branch and bound over vertex orders.

A node fixes an ordered prefix of variables. Each placed variable holds the
cheapest live parent set inside the variables placed before it; given a
full order, no other choice can do better. At every node the acyclicity
constraint is propagated, the cluster bound is computed, and the witness
behind that bound is tried as a new incumbent.

Completion costs depend only on the set of unplaced variables, so proven
lower bounds (and, once a subtree is closed, exact completions) are cached
by that set.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .acyclicity import (
    AcyclicityFailure,
    OrderWitness,
    acyc_checker,
    checker_consistent,
    gac_propagate,
)
from .bitset import bits, full_mask
from .clusters import LowerBound, lower_bound_rc
from .dual import ClusterPool, DualStats, evict
from .instance import DomainState, Incumbent, Instance, is_acyclic

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    time_limit: float | None = None
    gac: bool = True
    cluster_order: str = "heuristic"
    minimise: bool = True
    lb_every_k: int = 1
    pool_max: int | None = None
    cache_max: int = 1_000_000
    evict_every: int = 1000
    # called once per bounded node; used by tests to audit every node
    node_hook: Callable[["NodeReport"], None] | None = None


@dataclass(frozen=True)
class SearchNode:
    prefix: tuple[int, ...]
    placed: int
    committed: float
    domains: DomainState
    network: tuple[int | None, ...]


@dataclass(frozen=True)
class NodeReport:
    node: SearchNode
    domains: DomainState
    bound: float
    lower_bound: LowerBound | None


@dataclass
class SolveResult:
    status: str  # "optimal", "timeout", "infeasible"
    incumbent: Incumbent | None
    stats: dict = field(default_factory=dict)
    pool: ClusterPool | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    @property
    def cost(self) -> float:
        return self.incumbent.cost if self.incumbent else math.inf

    @property
    def network(self) -> tuple[int, ...] | None:
        return self.incumbent.network if self.incumbent else None


class _Result(NamedTuple):
    lb: float
    exact: bool
    solution: dict | None


class _CacheEntry(NamedTuple):
    lb: float
    exact: bool
    solution: dict | None


class _Timeout(Exception):
    pass


def least_regret_children(domains: DomainState, placed: int) -> list[tuple[float, int, int]]:
    """``(regret, v, index)`` for every unplaced ``v`` with a live value
    inside ``placed``, best first."""
    inst = domains.instance
    out = []
    for v in bits(full_mask(inst.n) & ~placed):
        ms = inst.masks[v]
        for i in domains.live[v]:
            if not ms[i] & ~placed:
                out.append((inst.scores[v][i] - domains.min_score(v), v, i))
                break
    out.sort()
    return out


class Solver:
    def __init__(self, instance: Instance, config: SolverConfig | None = None):
        self.instance = instance
        self.config = config or SolverConfig()
        if self.config.lb_every_k < 1:
            raise ValueError("lb_every_k must be >= 1")
        self.pool = ClusterPool(self.config.cluster_order, self.config.pool_max)
        self.dual_stats = DualStats()
        self.cache: dict[int, _CacheEntry] = {}
        self.best: Incumbent | None = None
        self.nodes = 0
        self.bounded = 0
        self.gac_prunings = 0
        self.cache_hits = 0
        self.root_bound: float | None = None
        self._deadline = None

    @property
    def best_cost(self) -> float:
        return self.best.cost if self.best else math.inf

    def offer(self, network) -> bool:
        network = tuple(network)
        cost = self.instance.network_cost(network)
        if cost < self.best_cost:
            assert is_acyclic(network)
            self.best = Incumbent(network, cost)
            log.debug("incumbent %s after %d nodes", cost, self.nodes)
            return True
        return False

    def solve(self) -> SolveResult:
        start = time.perf_counter()
        if self.config.time_limit is not None:
            self._deadline = start + self.config.time_limit
        inst = self.instance
        root = DomainState.full(inst)
        status = "optimal"
        if not acyc_checker(root).complete:
            status = "infeasible"
        else:
            self.dive(root)
            node = SearchNode((), 0, 0.0, root, (None,) * inst.n)
            try:
                self._search(node, 0)
            except _Timeout:
                status = "timeout"
        stats = {
            "status": status,
            "nodes": self.nodes,
            "bounded_nodes": self.bounded,
            "root_bound": self.root_bound,
            "best_cost": self.best.cost if self.best else None,
            "clusters_generated": self.pool.generated,
            "clusters_kept": len(self.pool),
            "clusters_evicted": self.pool.evicted,
            "gac_prunings": self.gac_prunings,
            "cache_hits": self.cache_hits,
            "cache_entries": len(self.cache),
            **self.dual_stats.as_dict(),
            "wall_time": time.perf_counter() - start,
        }
        return SolveResult(status, self.best, stats, self.pool)

    def dive(self, domains: DomainState) -> None:
        """Greedy initial incumbent: repeatedly place the least-regret variable."""
        inst = self.instance
        placed = 0
        network = [0] * inst.n
        while placed != full_mask(inst.n):
            children = least_regret_children(domains, placed)
            if not children:
                return
            _, v, i = children[0]
            network[v] = inst.masks[v][i]
            placed |= 1 << v
        self.offer(network)

    def _offer_witness(self, domains: DomainState, witness: OrderWitness) -> None:
        inst = self.instance
        network = [0] * inst.n
        before = 0
        for v in witness.order:
            ms = inst.masks[v]
            for i in domains.live[v]:
                if not ms[i] & ~before:
                    network[v] = ms[i]
                    break
            before |= 1 << v
        self.offer(network)

    def _store(self, unplaced: int, res: _Result) -> None:
        old = self.cache.get(unplaced)
        if old is None:
            if len(self.cache) >= self.config.cache_max:
                return
            self.cache[unplaced] = _CacheEntry(*res)
        elif res.exact:
            self.cache[unplaced] = _CacheEntry(*res)
        elif not old.exact and res.lb > old.lb:
            self.cache[unplaced] = _CacheEntry(res.lb, False, None)

    def expand(self, node: SearchNode, depth: int):
        """Propagate and bound ``node``.

        Returns ``(domains, completion_lb, children)``; ``children`` is
        ``None`` when the node is pruned by its bound. Raises
        :class:`AcyclicityFailure` when propagation fails.
        """
        inst = self.instance
        eps = inst.eps
        if self.config.gac:
            domains = gac_propagate(node.domains)
            self.gac_prunings += node.domains.size() - domains.size()
        else:
            domains = checker_consistent(node.domains)

        lb = None
        if depth % self.config.lb_every_k == 0:
            lb = lower_bound_rc(domains, self.pool, self.config.minimise, self.dual_stats)
            bound = lb.bound
            self._offer_witness(domains, lb.witness)
        else:
            bound = sum(domains.min_score(v) for v in range(inst.n))
        self.bounded += 1
        if self.root_bound is None:
            self.root_bound = bound
        if self.bounded == 1 or self.bounded % self.config.evict_every == 0:
            evict(self.pool)
        if self.config.node_hook is not None:
            self.config.node_hook(NodeReport(node, domains, bound, lb))

        completion_lb = bound - node.committed
        if bound >= self.best_cost - eps:
            return domains, completion_lb, None

        children = []
        for _, v, i in least_regret_children(domains, node.placed):
            network = list(node.network)
            network[v] = inst.masks[v][i]
            children.append(
                SearchNode(
                    node.prefix + (v,),
                    node.placed | 1 << v,
                    node.committed + inst.scores[v][i],
                    domains.assign(v, i),
                    tuple(network),
                )
            )
        return domains, completion_lb, children

    def _search(self, node: SearchNode, depth: int) -> _Result:
        self.nodes += 1
        if self._deadline is not None and time.perf_counter() > self._deadline:
            raise _Timeout
        inst = self.instance
        eps = inst.eps
        unplaced = full_mask(inst.n) & ~node.placed
        if not unplaced:
            self.offer(node.network)
            return _Result(0.0, True, {})

        hit = self.cache.get(unplaced)
        if hit is not None:
            if hit.exact and hit.solution is not None:
                if node.committed + hit.lb < self.best_cost - eps:
                    network = list(node.network)
                    for v, m in hit.solution.items():
                        network[v] = m
                    self.offer(network)
            if node.committed + hit.lb >= self.best_cost - eps:
                self.cache_hits += 1
                return _Result(*hit)

        try:
            domains, completion_lb, children = self.expand(node, depth)
        except AcyclicityFailure:
            res = _Result(math.inf, True, None)
            self._store(unplaced, res)
            return res
        if children is None:
            res = _Result(completion_lb, False, None)
            self._store(unplaced, res)
            return res

        best_val = math.inf
        best_sol = None
        exact = True
        for child in children:
            v = child.prefix[-1]
            r = self._search(child, depth + 1)
            exact = exact and r.exact
            val = inst.scores[v][child.domains.live[v][0]] + r.lb
            if val < best_val:
                best_val = val
                if r.exact and r.solution is not None:
                    best_sol = {v: child.network[v], **r.solution}
                else:
                    best_sol = None
        if exact:
            res = _Result(best_val, True, best_sol if best_val < math.inf else None)
        else:
            res = _Result(max(best_val, completion_lb), False, None)
        self._store(unplaced, res)
        return res


def solve(instance: Instance, config: SolverConfig | None = None) -> SolveResult:
    """Minimum-cost acyclic network of ``instance``.

    ``status`` is ``"optimal"`` when the search finished, ``"timeout"`` when
    the time limit stopped it (the incumbent is then the best found), and
    ``"infeasible"`` when no acyclic assignment exists.
    """
    return Solver(instance, config).solve()
