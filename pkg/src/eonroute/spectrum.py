"""Slice-set algebra.

A :class:`SliceSet` is an immutable set of spectrum slice indices drawn from a
universe of ``omega`` slices.  Members are stored as bits of a Python ``int``,
so intersection and subset tests are single big-int operations (400 slices is
seven machine words).

The module also exposes the raw bit-mask helpers (``trim_bits``,
``supports_bits``, ...) used by the search hot loop, which works on plain ints
to avoid object churn.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple


class AllocationError(RuntimeError):
    """Slot bookkeeping went inconsistent (double allocation, bad release)."""


class Fragment(NamedTuple):
    start: int
    length: int


class Slot(NamedTuple):
    start: int
    length: int

    @property
    def mask(self) -> int:
        return ((1 << self.length) - 1) << self.start


# ---------------------------------------------------------------------------
# bit-mask primitives


def run_starts_bits(bits: int, n: int) -> int:
    """Bit ``i`` set iff slices ``i .. i+n-1`` are all in ``bits``."""
    covered = 1
    while covered < n and bits:
        step = min(covered, n - covered)
        bits &= bits >> step
        covered += step
    return bits


def supports_bits(bits: int, n: int) -> bool:
    return run_starts_bits(bits, n) != 0


def trim_bits(bits: int, n: int) -> int:
    """Keep only the maximal runs of ``bits`` that are at least ``n`` long."""
    if n <= 1:
        return bits
    starts = run_starts_bits(bits, n)
    if not starts:
        return 0
    covered = 1
    while covered < n:
        step = min(covered, n - covered)
        starts |= starts << step
        covered += step
    return starts


def fragment_count_bits(bits: int) -> int:
    return (bits & ~(bits << 1)).bit_count()


def iter_fragments_bits(bits: int) -> Iterator[Fragment]:
    pos = 0
    while bits:
        low = (bits & -bits).bit_length() - 1
        bits >>= low
        pos += low
        # length of the run of ones now sitting at bit 0
        length = (~bits & (bits + 1)).bit_length() - 1
        yield Fragment(pos, length)
        bits >>= length
        pos += length


def bits_from_members(members: Iterable[int]) -> int:
    bits = 0
    for i in members:
        bits |= 1 << i
    return bits


def members_of_bits(bits: int) -> list[int]:
    out = []
    pos = 0
    while bits:
        low = (bits & -bits).bit_length() - 1
        pos += low
        out.append(pos)
        bits >>= low + 1
        pos += 1
    return out


# ---------------------------------------------------------------------------
# value type


@dataclass(frozen=True, slots=True)
class SliceSet:
    """Immutable set of slice indices in ``[0, omega)``."""

    bits: int
    omega: int

    def __post_init__(self) -> None:
        if self.omega < 0:
            raise ValueError("omega must be non-negative")
        if self.bits < 0 or self.bits >> self.omega:
            raise ValueError(f"slice index out of range [0, {self.omega})")

    @classmethod
    def of(cls, members: Iterable[int], omega: int) -> "SliceSet":
        members = list(members)
        for i in members:
            if not 0 <= i < omega:
                raise ValueError(f"slice index {i} out of range [0, {omega})")
        return cls(bits_from_members(members), omega)

    @classmethod
    def full(cls, omega: int) -> "SliceSet":
        return cls((1 << omega) - 1, omega)

    @classmethod
    def empty(cls, omega: int) -> "SliceSet":
        return cls(0, omega)

    @classmethod
    def span(cls, start: int, length: int, omega: int) -> "SliceSet":
        return cls(Slot(start, length).mask, omega)

    @classmethod
    def parse(cls, text: str, omega: int) -> "SliceSet":
        """Parse ``"1-2,5,7-9"``; the empty string is the empty set."""
        bits = 0
        text = text.strip()
        if text and text != "-":
            for part in text.split(","):
                lo, sep, hi = part.strip().partition("-")
                a = int(lo)
                b = int(hi) if sep else a
                if a > b or a < 0 or b >= omega:
                    raise ValueError(f"bad slice range {part!r} for omega={omega}")
                bits |= ((1 << (b - a + 1)) - 1) << a
        return cls(bits, omega)

    def format(self) -> str:
        return ",".join(
            str(f.start) if f.length == 1 else f"{f.start}-{f.start + f.length - 1}"
            for f in iter_fragments_bits(self.bits)
        )

    def __str__(self) -> str:
        return self.format()

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __bool__(self) -> bool:
        return self.bits != 0

    def __contains__(self, i: int) -> bool:
        return 0 <= i < self.omega and (self.bits >> i) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        return iter(members_of_bits(self.bits))

    def members(self) -> list[int]:
        return members_of_bits(self.bits)

    def sort_key(self) -> tuple[int, ...]:
        """Lexicographic order on the ascending member list."""
        return tuple(members_of_bits(self.bits))

    def __and__(self, other: "SliceSet") -> "SliceSet":
        return intersect(self, other)

    def __ge__(self, other: "SliceSet") -> bool:
        return is_superset(self, other)

    def __le__(self, other: "SliceSet") -> bool:
        return is_superset(other, self)


def _check_omega(a: SliceSet, b: SliceSet) -> None:
    if a.omega != b.omega:
        raise ValueError(f"slice universes differ: {a.omega} != {b.omega}")


def intersect(a: SliceSet, b: SliceSet) -> SliceSet:
    _check_omega(a, b)
    return SliceSet(a.bits & b.bits, a.omega)


def is_superset(a: SliceSet, b: SliceSet) -> bool:
    """True iff every member of ``b`` is in ``a`` (non-strict)."""
    _check_omega(a, b)
    return b.bits & ~a.bits == 0


def fragments(a: SliceSet) -> list[Fragment]:
    return list(iter_fragments_bits(a.bits))


def supports(a: SliceSet, n: int) -> bool:
    """True iff ``a`` has a contiguous run of at least ``n`` slices."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return supports_bits(a.bits, n)


def trim(a: SliceSet, n: int) -> SliceSet:
    if n < 1:
        raise ValueError("n must be >= 1")
    return SliceSet(trim_bits(a.bits, n), a.omega)


def _check_slot(slot: Slot, omega: int) -> None:
    if slot.length < 1 or slot.start < 0 or slot.start + slot.length > omega:
        raise AllocationError(f"slot {slot} outside [0, {omega})")


def subtract(a: SliceSet, slot: Slot) -> SliceSet:
    _check_slot(slot, a.omega)
    mask = slot.mask
    if a.bits & mask != mask:
        raise AllocationError(f"slot {slot} not fully available in {a}")
    return SliceSet(a.bits & ~mask, a.omega)


def add(a: SliceSet, slot: Slot) -> SliceSet:
    _check_slot(slot, a.omega)
    mask = slot.mask
    if a.bits & mask:
        raise AllocationError(f"slot {slot} overlaps available slices {a}")
    return SliceSet(a.bits | mask, a.omega)
