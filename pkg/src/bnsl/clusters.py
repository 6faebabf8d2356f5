"""Lower bounds from reduced-cost clusters.

Values with zero reduced cost form restricted domains. If those admit no
acyclic assignment, the variables the checker cannot place form a cluster
whose whole inequality has positive reduced cost, so adding it raises the
dual bound by the smallest of those costs. The loop repeats until the
restricted domains become acyclic-satisfiable.

Different cluster discovery orders can give different bounds; every choice
here is deterministic so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .acyclicity import OrderWitness, acyc_checker, closure, mask_lists
from .bitset import bits
from .dual import (
    Cluster,
    ClusterPool,
    DualState,
    DualStats,
    dual_improve,
    dual_solve,
)
from .instance import DomainState


@dataclass
class LowerBound:
    bound: float
    pool: ClusterPool
    restricted: DomainState
    dual: DualState
    witness: OrderWitness
    clusters: list[Cluster] = field(default_factory=list)
    increments: list[float] = field(default_factory=list)


def rc_restricted_domains(domains: DomainState, dual: DualState) -> DomainState:
    """Keep only live values whose reduced cost is within tolerance of zero.

    Live sets may come back empty; that is legal here.
    """
    inst = domains.instance
    eps = inst.eps
    live = []
    for v, ix in enumerate(domains.live):
        sc = inst.scores[v]
        dv = dual.delta[v]
        live.append(tuple(i for i in ix if sc[i] - dv[i] <= eps))
    return DomainState(inst, tuple(live), domains.assigned)


def minimise_cluster(scope_hint: int, restricted: DomainState) -> Cluster:
    """Deletion-based reduction of an unsatisfiable variable set.

    Returns a subset that the checker still cannot order but whose every
    proper subset it can. The member tested next is always the highest
    remaining index.
    """
    lm = mask_lists(restricted)

    def unplaced(scope: int) -> int:
        return scope & ~closure(lm, list(bits(scope)), 0, scope)

    assert unplaced(scope_hint), "scope_hint admits an acyclic assignment"
    necessary = 0
    rest = scope_hint
    while rest:
        c = rest.bit_length() - 1
        rest &= ~(1 << c)
        left = unplaced(necessary | rest)
        if not left:
            necessary |= 1 << c
        else:
            rest = left & ~necessary
    return Cluster(necessary)


def lower_bound_rc(
    domains: DomainState,
    pool: ClusterPool,
    minimise: bool = True,
    stats: DualStats | None = None,
) -> LowerBound:
    """Dual bound of the cluster LP over ``domains``, extended with new
    RC-clusters until the zero-reduced-cost domains are acyclic-satisfiable.

    New clusters are added to ``pool``. ``minimise=False`` keeps the raw
    unplaced set instead of shrinking it.
    """
    inst = domains.instance
    dual = dual_solve(domains, pool, stats)
    new: list[Cluster] = []
    incs: list[float] = []
    while True:
        restricted = rc_restricted_domains(domains, dual)
        witness = acyc_checker(restricted)
        if witness.complete:
            return LowerBound(dual.bound, pool, restricted, dual, witness, new, incs)
        cluster = Cluster(witness.violated)
        if minimise:
            cluster = minimise_cluster(witness.violated, restricted)
        entry = pool.add(cluster, inst)
        dual_improve(dual, domains, entry, stats)
        new.append(cluster)
        incs.append(dual.increments[-1])
