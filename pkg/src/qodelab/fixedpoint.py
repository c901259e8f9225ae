"""Two's-complement fixed-point numbers.

A register of ``n`` bits holding the unsigned pattern ``a`` stands for the
logical value ``2**-q * (-2**(n-1) * a[n-1] + sum_{i<n-1} 2**i * a[i])``.
The helpers here are the classical oracle for the arithmetic circuits in
:mod:`qodelab.arithmetic`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

MulMode = Literal["exact", "truncated"]


class FixedPointRangeError(ValueError):
    pass


class FormatMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class FixedPointFormat:
    n: int
    q: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one bit, got n={self.n}")
        if not 0 <= self.q <= self.n - 1:
            raise ValueError(f"fraction bits q={self.q} must lie in [0, {self.n - 1}]")

    @property
    def modulus(self) -> int:
        return 1 << self.n

    @property
    def resolution(self) -> float:
        return 2.0 ** -self.q

    @property
    def min_value(self) -> float:
        return -(1 << (self.n - 1)) * self.resolution

    @property
    def max_value(self) -> float:
        return ((1 << (self.n - 1)) - 1) * self.resolution

    def values(self) -> list[float]:
        """All of D_{n,q} in ascending order."""
        lo = -(1 << (self.n - 1))
        return [m * self.resolution for m in range(lo, -lo)]


@dataclass(frozen=True)
class FixedPointValue:
    bits: int
    format: FixedPointFormat

    def __post_init__(self):
        if not 0 <= self.bits < self.format.modulus:
            raise ValueError(f"bits {self.bits} outside [0, {self.format.modulus})")

    @property
    def signed(self) -> int:
        """The two's-complement integer, i.e. the value times 2**q."""
        return to_signed(self.bits, self.format.n)

    @property
    def value(self) -> float:
        return self.signed * self.format.resolution

    def bitstring(self) -> str:
        return format(self.bits, f"0{self.format.n}b")

    def __float__(self) -> float:
        return self.value


def to_signed(bits: int, n: int) -> int:
    bits &= (1 << n) - 1
    return bits - (1 << n) if bits >> (n - 1) else bits


def from_signed(m: int, n: int) -> int:
    return m % (1 << n)


def fx_from_bits(bits: int, fmt: FixedPointFormat) -> FixedPointValue:
    return FixedPointValue(bits % fmt.modulus, fmt)


def fx_encode(x: float, fmt: FixedPointFormat) -> FixedPointValue:
    """Round ``x`` to the nearest point of D_{n,q}; exact ties go toward -inf.

    Accepts the half-open window ``(min - h, max + h]`` with ``h`` half a grid
    step, which is exactly the set of reals that the tie rule maps into range.
    """
    scaled = x * (1 << fmt.q)
    lo = -(1 << (fmt.n - 1))
    m = math.ceil(scaled - 0.5) if math.isfinite(scaled) else lo - 1
    if not lo <= m <= -lo - 1:
        raise FixedPointRangeError(
            f"{x} is not representable in D_{{{fmt.n},{fmt.q}}} "
            f"= [{fmt.min_value}, {fmt.max_value}]"
        )
    return FixedPointValue(from_signed(m, fmt.n), fmt)


def _check_same(a: FixedPointValue, b: FixedPointValue) -> FixedPointFormat:
    if a.format != b.format:
        raise FormatMismatchError(f"{a.format} != {b.format}")
    return a.format


def fx_add(a: FixedPointValue, b: FixedPointValue) -> FixedPointValue:
    fmt = _check_same(a, b)
    return FixedPointValue((a.bits + b.bits) % fmt.modulus, fmt)


def fx_sub(a: FixedPointValue, b: FixedPointValue) -> FixedPointValue:
    """``a - b`` modulo 2**n."""
    fmt = _check_same(a, b)
    return FixedPointValue((a.bits - b.bits) % fmt.modulus, fmt)


def fx_neg(a: FixedPointValue) -> FixedPointValue:
    return FixedPointValue(-a.bits % a.format.modulus, a.format)


def mul_shift_bits(a: int, b: int, n: int, q: int, mode: MulMode = "exact") -> int:
    """Shifted product of two unsigned n-bit patterns, reduced mod 2**n.

    ``exact`` drops the low ``q`` bits of the full product.  ``truncated`` sums
    only the partial products ``a_j b_k 2**(j+k)`` with ``j + k >= q``, which
    loses the carries out of the dropped positions; the two agree for q <= 1.
    """
    if mode == "exact":
        return ((a * b) >> q) % (1 << n)
    if mode != "truncated":
        raise ValueError(f"unknown multiplication mode {mode!r}")
    total = 0
    for j in range(n):
        if not (a >> j) & 1:
            continue
        for k in range(n):
            if (b >> k) & 1 and j + k >= q:
                total += 1 << (j + k - q)
    return total % (1 << n)


def fx_mul_shift(a: FixedPointValue, b: FixedPointValue, mode: MulMode = "exact") -> FixedPointValue:
    fmt = _check_same(a, b)
    return FixedPointValue(mul_shift_bits(a.bits, b.bits, fmt.n, fmt.q, mode), fmt)


def asr_bits(bits: int, n: int) -> int:
    """Arithmetic right shift by one of an n-bit two's-complement pattern."""
    return from_signed(to_signed(bits, n) >> 1, n)


def fx_halve(a: FixedPointValue) -> FixedPointValue:
    """Divide by two, rounding toward -inf."""
    return FixedPointValue(asr_bits(a.bits, a.format.n), a.format)
