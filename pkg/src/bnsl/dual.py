"""Greedy dual solutions of the cluster LP.

The dual vector is never stored. Each value ``(v, i)`` instead carries the
cost ``delta[v][i]`` already moved into the bound, so its reduced cost is
``score - delta``. Pooled clusters are kept sorted by size and then by the
largest cheapest original cost of their inequality, or in creation order.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterator

from .bitset import bits, popcount
from .instance import DomainState, Infeasible, Instance

EVICT_MIN_SIZE = 10
EVICT_RATIO = 1 / 1000
EVICT_MIN_TRIALS = 100


@dataclass(frozen=True)
class Cluster:
    """A set of variables; its inequality asks one member to have a parent
    set disjoint from the cluster."""

    mask: int

    def __post_init__(self):
        if self.mask <= 0:
            raise ValueError("a cluster needs at least one member")

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(bits(self.mask))

    def __len__(self) -> int:
        return popcount(self.mask)

    def ineq_values(self, instance: Instance) -> list[tuple[int, int]]:
        """All ``(v, index)`` pairs appearing in the cluster inequality."""
        return [
            (v, i)
            for v in bits(self.mask)
            for i, m in enumerate(instance.masks[v])
            if not m & self.mask
        ]


def min_original_cost(cluster: Cluster, instance: Instance) -> float:
    costs = [instance.scores[v][i] for v, i in cluster.ineq_values(instance)]
    return min(costs, default=math.inf)


@dataclass(eq=False)
class PooledCluster:
    cluster: Cluster
    seq: int = 0
    min_cost: float = math.inf
    support: tuple[int, int] | None = None
    productive: int = 0
    unproductive: int = 0

    @property
    def mask(self) -> int:
        return self.cluster.mask

    @property
    def trials(self) -> int:
        return self.productive + self.unproductive

    def heuristic_key(self):
        return (len(self.cluster), -self.min_cost, self.seq)


class ClusterPool:
    """Cluster store deduplicated by member set.

    ``order="heuristic"`` iterates by (size ascending, min original cost
    descending, creation); ``order="chrono"`` iterates in creation order.
    """

    def __init__(self, order: str = "heuristic", max_size: int | None = None):
        if order not in ("heuristic", "chrono"):
            raise ValueError(f"unknown cluster order {order!r}")
        self.order = order
        self.max_size = max_size
        self.entries: list[PooledCluster] = []
        self._by_mask: dict[int, PooledCluster] = {}
        self._seq = 0
        self.generated = 0
        self.evicted = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[PooledCluster]:
        return iter(self.entries)

    def __contains__(self, cluster: Cluster) -> bool:
        return cluster.mask in self._by_mask

    def add(self, cluster: Cluster, instance: Instance) -> PooledCluster:
        """Insert ``cluster`` and return its entry.

        A duplicate returns the existing entry. Once ``max_size`` is
        reached the entry is returned without being stored.
        """
        found = self._by_mask.get(cluster.mask)
        if found is not None:
            return found
        self.generated += 1
        entry = PooledCluster(cluster, self._seq, min_original_cost(cluster, instance))
        self._seq += 1
        if self.max_size is not None and len(self.entries) >= self.max_size:
            return entry
        self._by_mask[cluster.mask] = entry
        if self.order == "heuristic":
            bisect.insort(self.entries, entry, key=PooledCluster.heuristic_key)
        else:
            self.entries.append(entry)
        return entry

    def reordered(self, order: str) -> "ClusterPool":
        """Copy holding the same clusters, iterated under ``order``."""
        other = ClusterPool(order, self.max_size)
        for entry in sorted(self.entries, key=lambda e: e.seq):
            copy = PooledCluster(entry.cluster, entry.seq, entry.min_cost)
            other._by_mask[copy.mask] = copy
            other.entries.append(copy)
        if order == "heuristic":
            other.entries.sort(key=PooledCluster.heuristic_key)
        other._seq = self._seq
        other.generated = self.generated
        return other


def evict(pool: ClusterPool, min_trials: int = EVICT_MIN_TRIALS) -> list[PooledCluster]:
    """Drop large clusters that almost never raise the bound."""
    gone = []
    kept = []
    for e in pool.entries:
        if (
            len(e.cluster) > EVICT_MIN_SIZE
            and e.trials >= min_trials
            and e.productive < EVICT_RATIO * e.trials
        ):
            gone.append(e)
            del pool._by_mask[e.mask]
        else:
            kept.append(e)
    pool.entries = kept
    pool.evicted += len(gone)
    return gone


@dataclass
class DualStats:
    scans: int = 0
    productive: int = 0
    unproductive: int = 0
    support_hits: int = 0
    values_visited: int = 0
    values_live: int = 0

    def as_dict(self) -> dict:
        return {
            "cluster_scans": self.scans,
            "productive_scans": self.productive,
            "unproductive_scans": self.unproductive,
            "support_pair_hits": self.support_hits,
            "support_pair_hit_rate": self.support_hits / self.unproductive if self.unproductive else 0.0,
            "domain_visit_fraction": self.values_visited / self.values_live if self.values_live else 0.0,
        }


@dataclass
class DualState:
    """Reduced-cost view of a feasible dual solution.

    ``bound`` is ``base`` plus every entry of ``increments`` added in order.
    """

    delta: list[list[float]]
    delta_max: list[float]
    base: float
    bound: float
    increments: list[float] = field(default_factory=list)

    def rc(self, instance: Instance, v: int, i: int) -> float:
        return instance.scores[v][i] - self.delta[v][i]


def dual_init(domains: DomainState) -> DualState:
    inst = domains.instance
    delta = []
    delta_max = []
    base = 0.0
    for v in range(inst.n):
        m = domains.min_score(v)
        delta.append([m] * len(inst.domains[v]))
        delta_max.append(m)
        base += m
    return DualState(delta, delta_max, base, base)


def min_reduced_cost(
    entry: PooledCluster,
    domains: DomainState,
    dual: DualState,
    stats: DualStats | None = None,
) -> tuple[float, tuple[int, int] | None]:
    """Minimum reduced cost over the live values of the cluster inequality.

    Returns ``(0.0, support)`` straight away when the cached support pair is
    live with zero reduced cost. A full scan stops early once it sees a
    value at or below the tolerance, since the cluster is then skipped
    anyway. Raises :class:`Infeasible` if no live value satisfies the
    inequality.
    """
    inst = domains.instance
    eps = inst.eps
    C = entry.mask
    sup = entry.support
    if sup is not None:
        v, i = sup
        if i in domains.live_sets[v] and dual.rc(inst, v, i) <= eps:
            if stats is not None:
                stats.support_hits += 1
            return 0.0, sup

    best = math.inf
    arg = None
    visited = 0
    total = 0
    live = domains.live
    for v in bits(C):
        sc = inst.scores[v]
        ms = inst.masks[v]
        dv = dual.delta[v]
        dmax = dual.delta_max[v]
        total += len(live[v])
        for i in live[v]:
            s = sc[i]
            if s - dmax >= best:
                break
            visited += 1
            if ms[i] & C:
                continue
            r = s - dv[i]
            if r < best:
                best, arg = r, (v, i)
        if best <= eps:
            break
    if stats is not None:
        stats.values_visited += visited
        stats.values_live += total
    if arg is None:
        raise Infeasible(f"cluster {list(bits(C))} has no live value outside itself")
    entry.support = arg
    return best, arg


def _raise(dual: DualState, domains: DomainState, C: int, amount: float) -> None:
    inst = domains.instance
    for v in bits(C):
        ms = inst.masks[v]
        dv = dual.delta[v]
        top = dual.delta_max[v]
        for i in domains.live[v]:
            if not ms[i] & C:
                dv[i] += amount
                if dv[i] > top:
                    top = dv[i]
        dual.delta_max[v] = top
    dual.bound += amount
    dual.increments.append(amount)


def dual_solve(
    domains: DomainState, pool: ClusterPool, stats: DualStats | None = None
) -> DualState:
    """Start from the per-variable minima and raise each pooled cluster in
    pool order by its minimum reduced cost."""
    dual = dual_init(domains)
    eps = domains.instance.eps
    for entry in pool:
        if stats is not None:
            stats.scans += 1
        val, _ = min_reduced_cost(entry, domains, dual, stats)
        if val > eps:
            _raise(dual, domains, entry.mask, val)
            entry.productive += 1
            if stats is not None:
                stats.productive += 1
        else:
            entry.unproductive += 1
            if stats is not None:
                stats.unproductive += 1
    return dual


def dual_improve(
    dual: DualState,
    domains: DomainState,
    cluster: Cluster | PooledCluster,
    stats: DualStats | None = None,
) -> DualState:
    """Add one RC-cluster to ``dual`` in place and return it."""
    entry = cluster if isinstance(cluster, PooledCluster) else PooledCluster(cluster)
    entry.support = None
    val, _ = min_reduced_cost(entry, domains, dual)
    assert val > domains.instance.eps, "dual_improve needs an RC-cluster"
    _raise(dual, domains, entry.mask, val)
    entry.productive += 1
    return dual
