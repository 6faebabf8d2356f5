"""BIC local scores from discrete data.

Scores follow the log-likelihood convention (larger is better):

    BIC(v | S) = sum_jk N_jk ln(N_jk / N_j) - ln(N) / 2 * (r_v - 1) * q_S

where ``j`` ranges over parent configurations, ``k`` over values of ``v``,
``r_v`` is the arity of ``v`` and ``q_S`` the number of parent
configurations. Empty cells contribute nothing.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .bitset import bits, mask_of
from .instance import Instance, to_costs

MAX_CONFIGS = 1 << 24


@dataclass(frozen=True)
class Dataset:
    names: tuple[str, ...]
    arities: tuple[int, ...]
    values: np.ndarray  # shape (N, n), category indices

    def __post_init__(self):
        vals = self.values
        if vals.ndim != 2 or vals.shape[1] != len(self.names):
            raise ValueError("values must have one column per variable")
        if vals.shape[0] < 1:
            raise ValueError("dataset needs at least one sample")
        if len(self.arities) != len(self.names):
            raise ValueError("one arity per variable")
        if vals.size and (vals.min() < 0 or np.any(vals.max(axis=0) >= np.array(self.arities))):
            raise ValueError("category index outside the declared arity")

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def samples(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_rows(cls, names, rows) -> "Dataset":
        """Index raw values per column by order of first appearance."""
        n = len(names)
        codes = [dict() for _ in range(n)]
        out = []
        for r, row in enumerate(rows):
            if len(row) != n:
                raise ValueError(f"row {r + 1} has {len(row)} fields, expected {n}")
            out.append([codes[c].setdefault(val, len(codes[c])) for c, val in enumerate(row)])
        if not out:
            raise ValueError("dataset needs at least one sample")
        values = np.array(out, dtype=np.int64)
        return cls(tuple(names), tuple(max(1, len(c)) for c in codes), values)


def read_csv(source) -> Dataset:
    """Read a CSV whose first row holds the variable names."""
    if isinstance(source, str) and "\n" in source:
        fh = io.StringIO(source)
    else:
        fh = open(source, newline="")
    with fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[field.strip() for field in row] for row in reader if row]
    return Dataset.from_rows([h.strip() for h in header], rows)


def bic_local_score(data: Dataset, v: int, parents) -> float:
    """BIC score of ``v`` with parent set ``parents`` (bitmask or iterable).

    Raises ``ValueError`` if ``v`` is among the parents or the number of
    joint configurations exceeds ``MAX_CONFIGS``.
    """
    ps = list(bits(parents)) if isinstance(parents, int) else sorted(parents)
    if v in ps:
        raise ValueError("a variable cannot be its own parent")
    r = data.arities[v]
    q = math.prod(data.arities[p] for p in ps)
    if q * r > MAX_CONFIGS:
        raise ValueError(f"{q * r} parent configurations exceed the limit")
    x = data.values
    cfg = np.zeros(data.samples, dtype=np.int64)
    for p in ps:
        cfg = cfg * data.arities[p] + x[:, p]
    counts = np.bincount(cfg * r + x[:, v], minlength=q * r).reshape(q, r)
    per_cfg = counts.sum(axis=1)
    nz = counts > 0
    ll = float(np.sum(counts[nz] * np.log(counts[nz]))) - float(
        np.sum(per_cfg[per_cfg > 0] * np.log(per_cfg[per_cfg > 0]))
    )
    penalty = 0.5 * math.log(data.samples) * (r - 1) * q
    return ll - penalty


def local_scores(data: Dataset, max_parents: int) -> list[list[tuple[int, float]]]:
    """BIC scores of every parent set up to ``max_parents`` members, minus
    dominated ones.

    A set is dropped when one of its proper subsets scores at least as
    well. Sets with too many configurations are skipped.
    """
    if max_parents < 0:
        raise ValueError("max_parents must be >= 0")
    n = data.n
    result = []
    for v in range(n):
        others = [u for u in range(n) if u != v]
        score: dict[int, float] = {}
        # best score over all proper subsets of a set
        best_below: dict[int, float] = {}
        kept = []
        for k in range(min(max_parents, len(others)) + 1):
            for combo in combinations(others, k):
                m = mask_of(combo)
                try:
                    s = bic_local_score(data, v, m)
                except ValueError:
                    continue
                below = -math.inf
                for u in combo:
                    sub = m & ~(1 << u)
                    if sub in score:
                        below = max(below, score[sub], best_below[sub])
                score[m] = s
                best_below[m] = below
                if below < s:
                    kept.append((m, s))
        result.append(kept)
    return result


def enumerate_domains(data: Dataset, max_parents: int) -> Instance:
    """Cost-convention instance built from pruned BIC scores."""
    return Instance.from_domains(data.names, to_costs(local_scores(data, max_parents), "loglik"))
