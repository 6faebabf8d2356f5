"""Integer bitsets over variable indices.

Parent sets, clusters and orders are all plain Python ints where bit ``i``
stands for variable ``i``. Python ints are unbounded, so the same code path
serves any number of variables.
"""

from typing import Iterable, Iterator


def mask_of(members: Iterable[int]) -> int:
    m = 0
    for v in members:
        m |= 1 << v
    return m


def bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bits_desc(mask: int) -> Iterator[int]:
    while mask:
        top = mask.bit_length() - 1
        yield top
        mask ^= 1 << top


def popcount(mask: int) -> int:
    return mask.bit_count()


def full_mask(n: int) -> int:
    return (1 << n) - 1


def members(mask: int) -> tuple[int, ...]:
    return tuple(bits(mask))
