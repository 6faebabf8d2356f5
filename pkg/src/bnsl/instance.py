"""Instances, domain states and the local score file format.

A score file is whitespace separated text::

    <n>
    <name> <k>
    <score> <p> <parent_1> ... <parent_p>     (k lines)
    ...                                       (n blocks)

Internally every score is a non-negative cost to be minimised. Files in the
log-score convention (larger is better) are converted per variable to
``best(v) - score``, which keeps the argmin of every domain unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, NamedTuple, Sequence

from .bitset import bits, full_mask

CONVENTIONS = ("auto", "cost", "loglik")
EPS_REL = 1e-9


class Infeasible(Exception):
    """The current domains admit no acyclic assignment."""


class DomainWipeout(Infeasible):
    def __init__(self, var: int):
        super().__init__(f"domain of variable {var} is empty")
        self.var = var


class ScoreFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ScoredValue(NamedTuple):
    parents: int
    score: float


@dataclass(frozen=True)
class Instance:
    """Immutable BNSL instance: per-variable candidate parent sets with costs.

    ``domains[v]`` is sorted by ascending cost, ties broken by the integer
    value of the parent bitset. Build instances with :meth:`from_domains`,
    which sorts and validates.
    """

    names: tuple[str, ...]
    domains: tuple[tuple[ScoredValue, ...], ...]

    def __post_init__(self):
        n = len(self.names)
        if len(self.domains) != n:
            raise ValueError("names and domains differ in length")
        if len(set(self.names)) != n:
            raise ValueError("duplicate variable names")
        allowed = full_mask(n)
        for v, dom in enumerate(self.domains):
            if not dom:
                raise ValueError(f"variable {self.names[v]!r} has an empty domain")
            seen = set()
            prev = None
            for val in dom:
                if val.parents & ~allowed:
                    raise ValueError(f"variable {self.names[v]!r}: parent out of range")
                if val.parents >> v & 1:
                    raise ValueError(f"variable {self.names[v]!r} is its own parent")
                if val.parents in seen:
                    raise ValueError(f"variable {self.names[v]!r}: duplicate parent set")
                if not math.isfinite(val.score) or val.score < 0:
                    raise ValueError(f"variable {self.names[v]!r}: cost must be finite and >= 0")
                key = (val.score, val.parents)
                if prev is not None and key < prev:
                    raise ValueError(f"variable {self.names[v]!r}: domain not sorted")
                prev = key
                seen.add(val.parents)

    @classmethod
    def from_domains(
        cls,
        names: Sequence[str],
        domains: Sequence[Iterable[tuple[int, float]]],
    ) -> "Instance":
        sorted_domains = []
        for dom in domains:
            vals = [ScoredValue(int(p), float(s)) for p, s in dom]
            vals.sort(key=lambda x: (x.score, x.parents))
            sorted_domains.append(tuple(vals))
        return cls(tuple(names), tuple(sorted_domains))

    @property
    def n(self) -> int:
        return len(self.names)

    @cached_property
    def masks(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(val.parents for val in dom) for dom in self.domains)

    @cached_property
    def scores(self) -> tuple[tuple[float, ...], ...]:
        return tuple(tuple(val.score for val in dom) for dom in self.domains)

    @cached_property
    def eps(self) -> float:
        top = max(val.score for dom in self.domains for val in dom)
        return EPS_REL * max(1.0, top)

    @cached_property
    def possibly_infeasible(self) -> bool:
        """True if some variable lacks the empty parent set."""
        return any(0 not in m for m in self.masks)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def network_cost(self, network: Sequence[int]) -> float:
        """Exact (correctly rounded) cost of a full parent-set assignment."""
        terms = []
        for v, parents in enumerate(network):
            i = self.masks[v].index(parents)
            terms.append(self.scores[v][i])
        return math.fsum(terms)


@dataclass(frozen=True)
class Incumbent:
    """A full network: ``network[v]`` is the parent bitmask of ``v``."""

    network: tuple[int, ...]
    cost: float


def is_acyclic(network: Sequence[int]) -> bool:
    """Topological check of a parent-set assignment given as bitmasks."""
    remaining = full_mask(len(network))
    while remaining:
        ready = 0
        for v in bits(remaining):
            if not network[v] & remaining:
                ready |= 1 << v
        if not ready:
            return False
        remaining &= ~ready
    return True


@dataclass(frozen=True)
class DomainState:
    """Snapshot of the live values of every variable.

    ``live[v]`` holds domain indices in ascending order, which is also
    ascending cost order. ``assigned`` is a bitmask of variables fixed by
    search; an assigned variable has exactly one live value.
    """

    instance: Instance
    live: tuple[tuple[int, ...], ...]
    assigned: int = 0

    @classmethod
    def full(cls, instance: Instance) -> "DomainState":
        return cls(instance, tuple(tuple(range(len(d))) for d in instance.domains))

    @property
    def n(self) -> int:
        return self.instance.n

    @cached_property
    def live_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(ix) for ix in self.live)

    def live_masks(self, v: int) -> list[int]:
        m = self.instance.masks[v]
        return [m[i] for i in self.live[v]]

    def min_score(self, v: int) -> float:
        return self.instance.scores[v][self.live[v][0]]

    def size(self) -> int:
        return sum(len(ix) for ix in self.live)

    def replace(self, v: int, indices: Iterable[int]) -> "DomainState":
        live = list(self.live)
        live[v] = tuple(indices)
        return DomainState(self.instance, tuple(live), self.assigned)

    def assign(self, v: int, index: int) -> "DomainState":
        if index not in self.live_sets[v]:
            raise DomainWipeout(v)
        live = list(self.live)
        live[v] = (index,)
        return DomainState(self.instance, tuple(live), self.assigned | 1 << v)

    def is_subset_of(self, other: "DomainState") -> bool:
        return all(a <= b for a, b in zip(self.live_sets, other.live_sets))


def restrict(
    domains: DomainState, v: int, keep: Callable[[ScoredValue], bool]
) -> DomainState:
    """Drop the live values of ``v`` that fail ``keep``; raise on wipeout."""
    if not 0 <= v < domains.n:
        raise IndexError(f"no variable {v}")
    dom = domains.instance.domains[v]
    kept = tuple(i for i in domains.live[v] if keep(dom[i]))
    if not kept:
        raise DomainWipeout(v)
    if kept == domains.live[v]:
        return domains
    return domains.replace(v, kept)


# ---------------------------------------------------------------------------
# score files


def _tokens(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = line.split()
        if toks:
            yield lineno, toks


def _parse_int(tok: str, lineno: int, what: str) -> int:
    try:
        val = int(tok)
    except ValueError:
        raise ScoreFileError(f"expected integer {what}, got {tok!r}", lineno) from None
    if val < 0:
        raise ScoreFileError(f"{what} must be non-negative", lineno)
    return val


def _parse_float(tok: str, lineno: int) -> float:
    try:
        val = float(tok)
    except ValueError:
        raise ScoreFileError(f"expected a score, got {tok!r}", lineno) from None
    if not math.isfinite(val):
        raise ScoreFileError(f"score {tok!r} is not finite", lineno)
    return val


def read_raw_scores(text: str) -> tuple[list[str], list[list[tuple[int, float]]]]:
    """Parse a score file without any score normalisation."""
    lines = _tokens(text)
    try:
        lineno, toks = next(lines)
    except StopIteration:
        raise ScoreFileError("empty score file") from None
    if len(toks) != 1:
        raise ScoreFileError("first line must hold the variable count", lineno)
    n = _parse_int(toks[0], lineno, "variable count")
    if n == 0:
        raise ScoreFileError("no variables", lineno)

    blocks = []
    for _ in range(n):
        try:
            lineno, toks = next(lines)
        except StopIteration:
            raise ScoreFileError(f"expected {n} variable blocks, found {len(blocks)}") from None
        if len(toks) != 2:
            raise ScoreFileError("block header must be '<name> <count>'", lineno)
        name = toks[0]
        k = _parse_int(toks[1], lineno, "parent set count")
        rows = []
        for _ in range(k):
            try:
                lineno, toks = next(lines)
            except StopIteration:
                raise ScoreFileError(f"variable {name!r}: expected {k} parent sets") from None
            if len(toks) < 2:
                raise ScoreFileError("parent set line must be '<score> <p> <names...>'", lineno)
            score = _parse_float(toks[0], lineno)
            p = _parse_int(toks[1], lineno, "parent count")
            if len(toks) != 2 + p:
                raise ScoreFileError(f"expected {p} parent names, got {len(toks) - 2}", lineno)
            rows.append((lineno, score, toks[2:]))
        blocks.append((name, rows))

    extra = next(lines, None)
    if extra is not None:
        raise ScoreFileError("trailing content after the last block", extra[0])

    names = [name for name, _ in blocks]
    index = {}
    for i, name in enumerate(names):
        if name in index:
            raise ScoreFileError(f"duplicate variable name {name!r}")
        index[name] = i

    domains = []
    for v, (name, rows) in enumerate(blocks):
        seen = set()
        dom = []
        for lineno, score, parents in rows:
            mask = 0
            for p in parents:
                if p not in index:
                    raise ScoreFileError(f"unknown parent {p!r}", lineno)
                if index[p] == v:
                    raise ScoreFileError(f"variable {name!r} listed as its own parent", lineno)
                mask |= 1 << index[p]
            if mask in seen:
                raise ScoreFileError(f"duplicate parent set for {name!r}", lineno)
            seen.add(mask)
            dom.append((mask, score))
        if not dom:
            raise ScoreFileError(f"variable {name!r} has no parent sets")
        domains.append(dom)
    return names, domains


def detect_convention(domains: Iterable[Iterable[tuple[int, float]]]) -> str:
    scores = [s for dom in domains for _, s in dom]
    if all(s >= 0 for s in scores):
        return "cost"
    if all(s <= 0 for s in scores):
        return "loglik"
    raise ScoreFileError(
        "scores have mixed signs; pass the score convention explicitly"
    )


def to_costs(
    domains: Sequence[Sequence[tuple[int, float]]], convention: str
) -> list[list[tuple[int, float]]]:
    if convention == "cost":
        for dom in domains:
            if any(s < 0 for _, s in dom):
                raise ScoreFileError("negative cost in cost convention")
        return [list(dom) for dom in domains]
    if convention == "loglik":
        out = []
        for dom in domains:
            best = max(s for _, s in dom)
            out.append([(m, best - s) for m, s in dom])
        return out
    raise ValueError(f"unknown score convention {convention!r}")


def parse_scores(text: str, convention: str = "auto") -> Instance:
    names, raw = read_raw_scores(text)
    if convention == "auto":
        convention = detect_convention(raw)
    return Instance.from_domains(names, to_costs(raw, convention))


def format_scores(names: Sequence[str], domains: Sequence[Iterable[tuple[int, float]]]) -> str:
    lines = [str(len(names))]
    for name, dom in zip(names, domains):
        dom = list(dom)
        lines.append(f"{name} {len(dom)}")
        for mask, score in dom:
            parents = [names[p] for p in bits(mask)]
            lines.append(" ".join([repr(float(score)), str(len(parents)), *parents]))
    return "\n".join(lines) + "\n"


def serialize(instance: Instance) -> str:
    """Write ``instance`` in the cost convention; ``parse_scores`` inverts it."""
    return format_scores(instance.names, instance.domains)


def load_scores(path, convention: str = "auto") -> Instance:
    with open(path) as fh:
        return parse_scores(fh.read(), convention)
