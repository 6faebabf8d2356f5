"""The acyclicity constraint over parent-set variables.

``acyc_checker`` greedily builds a witness order, ``gac_propagate`` prunes
every value without an acyclic support in O(n^3 d), and ``gac_probe`` does
the same by brute-force probing in O(n^3 d^2). The probe exists as an
independent reference for the fast propagator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .bitset import bits, bits_desc, full_mask, mask_of
from .instance import DomainState, Infeasible


class AcyclicityFailure(Infeasible):
    """No acyclic assignment exists; ``violated`` holds a violated cluster."""

    def __init__(self, violated: int):
        super().__init__(f"acyclicity violated on {sorted(bits(violated))}")
        self.violated = violated


@dataclass(frozen=True)
class OrderWitness:
    scope: int
    order: tuple[int, ...]
    witness: tuple[int, ...]

    @property
    def order_mask(self) -> int:
        return mask_of(self.order)

    @property
    def complete(self) -> bool:
        return self.order_mask == self.scope

    @property
    def violated(self) -> int:
        """Scope members the checker could not place (empty on success)."""
        return self.scope & ~self.order_mask


def mask_lists(domains: DomainState) -> list[list[int]]:
    masks = domains.instance.masks
    return [[masks[v][i] for i in ix] for v, ix in enumerate(domains.live)]


def acyc_checker(domains: DomainState, scope: int | None = None) -> OrderWitness:
    """Greedy witness order over ``scope`` (all variables by default).

    Variables outside ``scope`` are never ordered, and parent sets may use
    them freely. At every step the checker places the unordered variable
    whose first order-consistent live value sits earliest in its
    cost-sorted domain, ties going to the highest index; that value is the
    variable's witness. The set of placed variables does not depend on this
    rule, only the sequence does.
    """
    n = domains.n
    if scope is None:
        scope = full_mask(n)
    masks = domains.instance.masks
    live = domains.live
    rem = scope
    order: list[int] = []
    witness: list[int] = []
    while rem:
        best_v = -1
        best_pos = 0
        for v in bits_desc(rem):
            mv = masks[v]
            lv = live[v]
            limit = len(lv) if best_v < 0 else min(best_pos, len(lv))
            for pos in range(limit):
                if not mv[lv[pos]] & rem:
                    best_v, best_pos = v, pos
                    break
            if best_v >= 0 and best_pos == 0:
                break
        if best_v < 0:
            break
        order.append(best_v)
        witness.append(masks[best_v][live[best_v][best_pos]])
        rem &= ~(1 << best_v)
    return OrderWitness(scope, tuple(order), tuple(witness))


def closure(
    lm: Sequence[Sequence[int]],
    candidates: Sequence[int],
    placed: int,
    universe: int,
) -> int:
    """Grow ``placed`` with candidates that have a value inside it.

    A candidate ``w`` joins once some mask in ``lm[w]`` avoids every member
    of ``universe`` that is not yet placed. This is the least fixpoint, so
    the result is independent of the order of ``candidates``.
    """
    blocked = universe & ~placed
    pending = list(candidates)
    changed = True
    while changed and pending:
        changed = False
        rest = []
        for w in pending:
            for m in lm[w]:
                if not m & blocked:
                    blocked &= ~(1 << w)
                    placed |= 1 << w
                    changed = True
                    break
            else:
                rest.append(w)
        pending = rest
    return placed


def placeable(domains: DomainState, scope: int | None = None) -> int:
    """Set of scope members that ``acyc_checker`` would place."""
    if scope is None:
        scope = full_mask(domains.n)
    return closure(mask_lists(domains), list(bits(scope)), 0, scope)


def gac_propagate(domains: DomainState, reverse: bool = False) -> DomainState:
    """Remove every live value that has no acyclic support.

    Raises :class:`AcyclicityFailure` when no acyclic assignment exists.
    ``reverse`` flips the scan order of the per-variable closure, which must
    not change the result.
    """
    w = acyc_checker(domains)
    if not w.complete:
        raise AcyclicityFailure(w.violated)
    n = domains.n
    universe = full_mask(n)
    masks = domains.instance.masks
    lm = mask_lists(domains)
    live = list(domains.live)
    order = w.order
    changed = False
    prefix = 0
    for i, v in enumerate(order):
        rest = order[i + 1:]
        if reverse:
            rest = rest[::-1]
        reach = closure(lm, rest, prefix, universe)
        mv = masks[v]
        keep = [ix for ix in live[v] if not mv[ix] & ~reach]
        # the witness of v lies inside the order prefix, so keep is never empty
        assert keep, "propagator lost the witness value"
        if len(keep) != len(live[v]):
            live[v] = tuple(keep)
            lm[v] = [mv[ix] for ix in keep]
            changed = True
        prefix |= 1 << v
    if not changed:
        return domains
    return DomainState(domains.instance, tuple(live), domains.assigned)


def gac_probe(domains: DomainState) -> DomainState:
    """Same contract as :func:`gac_propagate`, by probing every value."""
    n = domains.n
    universe = full_mask(n)
    everyone = list(range(n))
    lm = mask_lists(domains)
    base = closure(lm, everyone, 0, universe)
    if base != universe:
        raise AcyclicityFailure(universe & ~base)
    masks = domains.instance.masks
    live = list(domains.live)
    changed = False
    for v in range(n):
        saved = lm[v]
        keep = []
        for ix in domains.live[v]:
            lm[v] = [masks[v][ix]]
            if closure(lm, everyone, 0, universe) == universe:
                keep.append(ix)
        lm[v] = saved
        if len(keep) != len(live[v]):
            live[v] = tuple(keep)
            changed = True
    if not changed:
        return domains
    return DomainState(domains.instance, tuple(live), domains.assigned)


def checker_consistent(domains: DomainState) -> DomainState:
    """Checker-only consistency: fail if unsatisfiable, never prune."""
    w = acyc_checker(domains)
    if not w.complete:
        raise AcyclicityFailure(w.violated)
    return domains
