"""Seeded random instances, domain states and datasets for tests and the
``generate`` command."""

from __future__ import annotations

import random

import numpy as np

from .instance import DomainState, Instance


def random_instance(
    rng: random.Random,
    n: int,
    max_d: int = 8,
    max_score: int = 20,
    max_parents: int = 3,
    empty_rate: float = 1.0,
    min_d: int = 1,
    costly_empty: bool = False,
) -> Instance:
    """Random integer-cost instance.

    Each variable gets between ``min_d`` and ``max_d`` distinct parent sets
    of at most ``max_parents`` members. The empty set is included with
    probability ``empty_rate``. With ``costly_empty`` the empty set costs
    more than every other parent set of its variable, as BIC and BDeu
    scores of dependent data usually do.
    """
    names = [f"x{v}" for v in range(n)]
    domains = []
    cap = min(max_parents, n - 1)
    for v in range(n):
        others = [u for u in range(n) if u != v]
        d = rng.randint(min_d, max_d)
        with_empty = rng.random() < empty_rate
        masks = {0} if with_empty else set()
        tries = 0
        while len(masks) < d and tries < 50 * d and cap > 0:
            tries += 1
            m = 0
            for u in rng.sample(others, rng.randint(1, cap)):
                m |= 1 << u
            masks.add(m)
        if not masks:
            masks.add(0)
        split = (3 * max_score) // 4
        dom = []
        for m in sorted(masks):
            if costly_empty:
                lo, hi = (split + 1, max_score) if m == 0 else (0, split)
            else:
                lo, hi = 0, max_score
            dom.append((m, float(rng.randint(lo, hi))))
        domains.append(dom)
    return Instance.from_domains(names, domains)


def random_domain_state(rng: random.Random, instance: Instance, keep: float = 0.6) -> DomainState:
    """Random non-empty live subset of every domain."""
    live = []
    for dom in instance.domains:
        ix = [i for i in range(len(dom)) if rng.random() < keep]
        if not ix:
            ix = [rng.randrange(len(dom))]
        live.append(tuple(ix))
    return DomainState(instance, tuple(live))


def random_dag(rng: random.Random, n: int, edges: int) -> list[int]:
    """Parent bitmasks of a random DAG with exactly ``edges`` arcs."""
    order = list(range(n))
    rng.shuffle(order)
    pairs = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n)]
    if edges > len(pairs):
        raise ValueError("too many edges for a DAG")
    parents = [0] * n
    for a, b in rng.sample(pairs, edges):
        parents[b] |= 1 << a
    return parents


def sample_dataset(
    seed: int, parents: list[int], arities: list[int], samples: int
) -> np.ndarray:
    """Ancestral sampling from random Dirichlet CPTs over ``parents``."""
    gen = np.random.default_rng(seed)
    n = len(parents)
    order = []
    placed = 0
    while len(order) < n:
        for v in range(n):
            if not placed >> v & 1 and not parents[v] & ~placed:
                order.append(v)
                placed |= 1 << v
    data = np.zeros((samples, n), dtype=np.int64)
    for v in order:
        ps = [p for p in range(n) if parents[v] >> p & 1]
        q = int(np.prod([arities[p] for p in ps])) if ps else 1
        cpt = gen.dirichlet(np.full(arities[v], 0.5), size=q)
        cfg = np.zeros(samples, dtype=np.int64)
        for p in ps:
            cfg = cfg * arities[p] + data[:, p]
        u = gen.random(samples)
        cum = np.cumsum(cpt[cfg], axis=1)
        data[:, v] = np.minimum((u[:, None] > cum).sum(axis=1), arities[v] - 1)
    return data
