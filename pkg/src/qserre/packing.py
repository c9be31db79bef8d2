"""Kronecker packing of exponent vectors into single integers.

A monomial ``q^a z_1^e_1 ... z_N^e_N w^f`` becomes the integer
``sum(e_slot << shift_slot)`` with signed digits, so monomial
multiplication is integer addition.  Digits are decoded in balanced form,
which is exact as long as every final digit lies strictly inside its
slot's signed range.  Callers size the slots from a proven bound on the
absolute exponents that can occur.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# int64 keys need room for the signed sum of all digits
INT64_KEY_BITS = 62


@dataclass(frozen=True)
class Layout:
    bits: tuple  # bits per slot, slot 0 is q
    shifts: tuple = field(init=False)

    def __post_init__(self):
        shifts, s = [], 0
        for b in self.bits:
            if b < 2:
                raise ValueError("each slot needs at least 2 bits")
            shifts.append(s)
            s += b
        object.__setattr__(self, "shifts", tuple(shifts))

    @classmethod
    def for_bounds(cls, bounds) -> "Layout":
        """Smallest layout whose slots hold exponents with ``|e| <= bound``."""
        return cls(tuple(max(2, int(b).bit_length() + 1) for b in bounds))

    @property
    def nslots(self) -> int:
        return len(self.bits)

    @property
    def total_bits(self) -> int:
        return sum(self.bits)

    @property
    def fits_int64(self) -> bool:
        return self.total_bits <= INT64_KEY_BITS

    def capacity(self, slot: int) -> int:
        return (1 << (self.bits[slot] - 1)) - 1

    def pack(self, exps) -> int:
        key = 0
        for e, s, b in zip(exps, self.shifts, self.bits):
            if not -(1 << (b - 1)) < e < (1 << (b - 1)):
                raise OverflowError(f"exponent {e} does not fit in {b} bits")
            key += e << s
        return key

    def unit(self, slot: int) -> int:
        return 1 << self.shifts[slot]

    def unpack(self, key: int) -> tuple:
        out = []
        for b in self.bits:
            mask = (1 << b) - 1
            half = 1 << (b - 1)
            d = key & mask
            if d >= half:
                d -= 1 << b
            out.append(d)
            key = (key - d) >> b
        if key != 0:
            raise OverflowError("packed key exceeds the layout")
        return tuple(out)
