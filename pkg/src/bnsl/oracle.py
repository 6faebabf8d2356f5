"""Exhaustive reference computations for small instances.

Nothing here is clever on purpose: these functions check the solver.
"""

from __future__ import annotations

import math
from itertools import combinations, permutations

from .bitset import mask_of
from .instance import DomainState, Incumbent, Instance

MAX_ORDER_VARS = 10
MAX_SUBSET_VARS = 20


def _as_domains(problem: Instance | DomainState) -> DomainState:
    if isinstance(problem, Instance):
        return DomainState.full(problem)
    return problem


def brute_force_optimum(problem: Instance | DomainState) -> Incumbent | None:
    """Best network over all vertex orders, or ``None`` if none exists.

    For a fixed order each variable independently takes its cheapest live
    parent set among its predecessors, which is optimal because the score
    decomposes per variable.
    """
    domains = _as_domains(problem)
    inst = domains.instance
    n = inst.n
    if n > MAX_ORDER_VARS:
        raise ValueError(f"brute force refuses n={n} > {MAX_ORDER_VARS}")
    best = None
    for order in permutations(range(n)):
        before = 0
        network = [0] * n
        terms = []
        for v in order:
            for i in domains.live[v]:
                m = inst.masks[v][i]
                if not m & ~before:
                    network[v] = m
                    terms.append(inst.scores[v][i])
                    break
            else:
                break
            before |= 1 << v
        else:
            cost = math.fsum(terms)
            if best is None or cost < best.cost:
                best = Incumbent(tuple(network), cost)
    return best


def enumerate_violated_clusters(domains: DomainState) -> set[int]:
    """Every non-empty variable set in which each member's every live
    parent set meets the set (member bitmasks)."""
    inst = domains.instance
    n = inst.n
    if n > MAX_SUBSET_VARS:
        raise ValueError(f"subset enumeration refuses n={n} > {MAX_SUBSET_VARS}")
    found = set()
    for size in range(1, n + 1):
        for combo in combinations(range(n), size):
            C = mask_of(combo)
            if all(
                inst.masks[v][i] & C for v in combo for i in domains.live[v]
            ):
                found.add(C)
    return found
