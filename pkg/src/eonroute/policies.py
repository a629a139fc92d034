"""Slot selection from a path's free slice set."""

from __future__ import annotations

from typing import Callable

from .spectrum import AllocationError, SliceSet, Slot, iter_fragments_bits


def alloc_first(sigma: SliceSet, n: int) -> Slot:
    """Lowest-numbered ``n`` slices of the first fragment that fits."""
    for start, length in iter_fragments_bits(sigma.bits):
        if length >= n:
            return Slot(start, n)
    raise AllocationError(f"{sigma} cannot hold {n} contiguous slices")


def alloc_fittest(sigma: SliceSet, n: int) -> Slot:
    """Start of the shortest fragment that fits; ties go to the lowest start."""
    best = None
    for start, length in iter_fragments_bits(sigma.bits):
        if length >= n and (best is None or length < best[1]):
            best = (start, length)
            if length == n:
                break
    if best is None:
        raise AllocationError(f"{sigma} cannot hold {n} contiguous slices")
    return Slot(best[0], n)


POLICIES: dict[str, Callable[[SliceSet, int], Slot]] = {
    "first": alloc_first,
    "fittest": alloc_fittest,
}


def get_policy(name: str) -> Callable[[SliceSet, int], Slot]:
    try:
        return POLICIES[name]
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; choose from {sorted(POLICIES)}") from None
