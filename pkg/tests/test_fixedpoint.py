import math
from itertools import product

import pytest
from hypothesis import given, strategies as st

from qodelab.fixedpoint import (
    FixedPointFormat,
    FixedPointRangeError,
    FormatMismatchError,
    FixedPointValue,
    asr_bits,
    fx_add,
    fx_encode,
    fx_from_bits,
    fx_halve,
    fx_mul_shift,
    fx_neg,
    fx_sub,
    mul_shift_bits,
    to_signed,
)

F41 = FixedPointFormat(4, 1)


def fx(bits, fmt=F41):
    return fx_from_bits(bits, fmt)


def test_format_values():
    assert F41.values()[0] == -4.0 and F41.values()[-1] == 3.5
    assert len(F41.values()) == 16
    assert F41.resolution == 0.5
    with pytest.raises(ValueError):
        FixedPointFormat(4, 4)
    with pytest.raises(ValueError):
        FixedPointFormat(0, 0)


def test_encode_examples():
    assert fx_encode(-1.0, F41).bitstring() == "1110"
    assert fx_encode(0.0, FixedPointFormat(6, 3)).bits == 0
    assert fx_encode(1.6, F41).value == 1.5


def test_encode_ties_go_down():
    assert fx_encode(0.25, F41).value == 0.0
    assert fx_encode(-0.25, F41).value == -0.5
    assert fx_encode(3.75, F41).value == 3.5


def test_encode_range():
    assert fx_encode(-4.24, F41).value == -4.0
    assert fx_encode(3.75, F41).value == 3.5
    with pytest.raises(FixedPointRangeError):
        fx_encode(-4.25, F41)  # the tie rounds down to -4.5
    with pytest.raises(FixedPointRangeError):
        fx_encode(3.76, F41)
    with pytest.raises(FixedPointRangeError):
        fx_encode(math.inf, F41)
    with pytest.raises(FixedPointRangeError):
        fx_encode(math.nan, F41)


@pytest.mark.parametrize("n,q", [(1, 0), (3, 1), (4, 1), (4, 3), (5, 2)])
def test_encode_roundtrip_on_grid(n, q):
    fmt = FixedPointFormat(n, q)
    for bits in range(1 << n):
        v = fx(bits, fmt)
        assert fx_encode(v.value, fmt).bits == bits


def test_add_examples():
    f2 = FixedPointFormat(2, 0)
    assert fx_add(fx(2, f2), fx(3, f2)).bits == 1
    assert fx_add(fx(0), fx(7)).bits == 7
    assert fx_add(fx_encode(1.5, F41), fx_encode(1.0, F41)).value == 2.5


def test_add_group_laws_exhaustive():
    for a, b, c in product(range(16), repeat=3):
        x, y, z = fx(a), fx(b), fx(c)
        assert fx_add(x, y) == fx_add(y, x)
        assert fx_add(fx_add(x, y), z) == fx_add(x, fx_add(y, z))
    for a in range(16):
        assert fx_add(fx(a), fx_neg(fx(a))).bits == 0
        assert fx_sub(fx(a), fx(a)).bits == 0


def test_format_mismatch():
    with pytest.raises(FormatMismatchError):
        fx_add(fx(1), fx(1, FixedPointFormat(4, 2)))


def test_mul_shift_examples():
    assert fx_mul_shift(fx(3), fx(3), "exact").bits == 4
    f42 = FixedPointFormat(4, 2)
    assert fx_mul_shift(fx(3, f42), fx(3, f42), "exact").bits == 2
    assert fx_mul_shift(fx(3, f42), fx(3, f42), "truncated").bits == 1
    for mode in ("exact", "truncated"):
        assert fx_mul_shift(fx(0), fx(9), mode).bits == 0


@pytest.mark.parametrize("n,q", [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (4, 0), (4, 1)])
def test_mul_modes_agree_for_small_shift(n, q):
    for a, b in product(range(1 << n), repeat=2):
        assert mul_shift_bits(a, b, n, q, "exact") == mul_shift_bits(a, b, n, q, "truncated")


def test_mul_modes_differ_at_q2():
    diff = [(a, b) for a, b in product(range(16), repeat=2)
            if mul_shift_bits(a, b, 4, 2, "exact") != mul_shift_bits(a, b, 4, 2, "truncated")]
    assert (3, 3) in diff


def test_mul_bad_mode():
    with pytest.raises(ValueError):
        mul_shift_bits(1, 1, 4, 0, "round")


def test_halve_examples():
    assert fx_halve(fx(0b1101)).bits == 0b1110
    assert fx_halve(fx(0)).bits == 0
    assert fx_halve(fx(0b0110)).bits == 0b0011


@pytest.mark.parametrize("n", range(1, 7))
def test_halve_is_floor_division(n):
    for bits in range(1 << n):
        assert to_signed(asr_bits(bits, n), n) == math.floor(to_signed(bits, n) / 2)


@given(st.integers(1, 12).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << n) - 1))))
def test_signed_roundtrip(nb):
    n, bits = nb
    v = FixedPointValue(bits, FixedPointFormat(n, 0))
    assert -(1 << (n - 1)) <= v.signed < (1 << (n - 1))
    assert v.signed % (1 << n) == bits


@given(st.floats(-4.25, 3.75, exclude_min=True))
def test_encode_is_nearest(x):
    v = fx_encode(x, F41).value
    assert abs(v - x) <= 0.25 + 1e-12
