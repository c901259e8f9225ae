from itertools import product

import numpy as np
import pytest

from qodelab.arithmetic import (
    RegisterError,
    build_add_const,
    build_add_register,
    build_fixedpoint_muladd,
    build_function_oracle,
    build_halve,
    build_muladd,
    build_sub_register,
    controlled_phase_count,
    mobius_coefficients,
)
from qodelab.statevector import QuantumState, RegisterLayout, apply, basis_index, init_basis, measure_register
from qodelab.verify import (
    verify_adder,
    verify_fixedpoint_multiplier,
    verify_halver,
    verify_multiplier,
    verify_subtractor,
)


def run(circuit, values):
    out = apply(circuit, init_basis(circuit.layout, values))
    return {name: max(measure_register(out, circuit.layout, name).items(), key=lambda kv: kv[1])[0]
            for name in circuit.layout.names}


def two(n):
    return RegisterLayout.sequential([("a", n), ("b", n)])


def three(n):
    return RegisterLayout.sequential([("a", n), ("b", n), ("c", n)])


def test_add_const_examples():
    L = RegisterLayout.sequential([("a", 3)])
    assert run(build_add_const(L, "a", 6), {"a": 5})["a"] == 3
    L2 = RegisterLayout.sequential([("a", 2)])
    assert run(build_add_const(L2, "a", 1), {"a": 1})["a"] == 2
    for a in range(8):
        assert run(build_add_const(L, "a", 0), {"a": a})["a"] == a
    with pytest.raises(ValueError):
        build_add_const(L, "a", 8)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_add_const_exhaustive(n):
    L = RegisterLayout.sequential([("a", n)])
    for c, a in product(range(1 << n), repeat=2):
        assert run(build_add_const(L, "a", c), {"a": a})["a"] == (a + c) % (1 << n)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_adder_and_subtractor_exhaustive(n):
    assert verify_adder(n).ok
    assert verify_subtractor(n).ok


def test_sub_examples():
    L = two(3)
    assert run(build_sub_register(L, "a", "b"), {"a": 5, "b": 5})["b"] == 0
    both = build_add_register(L, "a", "b") + build_sub_register(L, "a", "b")
    for a, b in product(range(8), repeat=2):
        assert run(both, {"a": a, "b": b})["b"] == b


@pytest.mark.parametrize("n", [1, 2, 3])
def test_muladd_exhaustive(n):
    assert verify_multiplier(n).ok


@pytest.mark.parametrize("n", [2, 3, 4])
def test_gate_count_formulas(n):
    L = two(n)
    add = build_add_register(L, "a", "b")
    assert controlled_phase_count(add, L["a"], 1) == n * (n + 1) // 2
    L3 = three(n)
    mul = build_muladd(L3, "a", "b", "c")
    assert controlled_phase_count(mul, L3["a"] + L3["b"], 2) == n * (2 + 3 * n + n * n) // 6


def test_fig_counts():
    assert controlled_phase_count(build_add_register(two(2), "a", "b"), two(2)["a"], 1) == 3
    L3 = three(2)
    assert controlled_phase_count(build_muladd(L3, "a", "b", "c"), L3["a"] + L3["b"], 2) == 4


@pytest.mark.parametrize("q", [0, 1])
@pytest.mark.parametrize("mode", ["truncated", "exact"])
def test_fixedpoint_muladd_small_shift(q, mode):
    assert verify_fixedpoint_multiplier(3, q, mode).ok


def test_fixedpoint_q0_equals_muladd():
    L = three(2)
    for mode in ("truncated", "exact"):
        c = build_fixedpoint_muladd(L, "a", "b", "c", 0, mode)
        for a, b, d in product(range(4), repeat=3):
            assert run(c, {"a": a, "b": b, "c": d})["c"] == (a * b + d) % 4


def test_truncation_discrepancy():
    L = three(4)
    vals = {"a": 3, "b": 3, "c": 0}
    assert run(build_fixedpoint_muladd(L, "a", "b", "c", 2, "truncated"), vals)["c"] == 1
    assert run(build_fixedpoint_muladd(L, "a", "b", "c", 2, "exact"), vals)["c"] == 2
    assert verify_fixedpoint_multiplier(4, 2, "truncated").ok  # each mode matches its own oracle
    assert verify_fixedpoint_multiplier(4, 2, "exact").ok


def test_fixedpoint_argument_checks():
    L = three(3)
    with pytest.raises(ValueError):
        build_fixedpoint_muladd(L, "a", "b", "c", 3)
    with pytest.raises(ValueError):
        build_fixedpoint_muladd(L, "a", "b", "c", 1, "rounded")
    L7 = three(7)
    with pytest.raises(ValueError):
        build_fixedpoint_muladd(L7, "a", "b", "c", 1, "exact")


def test_register_checks():
    L = RegisterLayout.sequential([("a", 2), ("b", 3)])
    with pytest.raises(RegisterError):
        build_add_register(L, "a", "b")
    with pytest.raises(RegisterError):
        build_add_register(two(2), "a", "a")


def test_mobius_roundtrip(rng):
    table = rng.integers(0, 16, size=16)
    c = mobius_coefficients(table)
    for x in range(16):
        assert sum(c[S] for S in range(16) if S & x == S) == table[x]


def test_function_oracle_examples():
    L = two(3)
    assert run(build_function_oracle(L, "a", "b", lambda a: a * a), {"a": 3, "b": 1})["b"] == 2
    ident = build_function_oracle(L, "a", "b", lambda a: a)
    zero = build_function_oracle(L, "a", "b", [0] * 8)
    for a, b in product(range(8), repeat=2):
        assert run(ident, {"a": a, "b": b})["b"] == (a + b) % 8
        assert run(zero, {"a": a, "b": b})["b"] == b
    with pytest.raises(ValueError):
        build_function_oracle(L, "a", "b", [0] * 5)


def test_halve_examples():
    L = RegisterLayout.sequential([("a", 4), ("anc", 1)])
    c = build_halve(L, "a", "anc")
    assert run(c, {"a": 0b1101}) == {"a": 0b1110, "anc": 1}
    assert run(c, {"a": 0}) == {"a": 0, "anc": 0}
    with pytest.raises(RegisterError):
        build_halve(L, "a", None)
    with pytest.raises(RegisterError):
        build_halve(RegisterLayout.sequential([("a", 4), ("anc", 2)]), "a", "anc")


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_halve_exhaustive(n):
    assert verify_halver(n).ok


def test_superposition_linearity(rng):
    L = two(3)
    c = build_add_register(L, "a", "b")
    amps = np.zeros(64, dtype=complex)
    coeffs = rng.normal(size=3) + 1j * rng.normal(size=3)
    coeffs /= np.linalg.norm(coeffs)
    inputs = [(1, 2), (5, 7), (6, 3)]
    for w, (a, b) in zip(coeffs, inputs):
        amps[basis_index(L, {"a": a, "b": b})] = w
    out = apply(c, QuantumState(amps)).amplitudes
    for w, (a, b) in zip(coeffs, inputs):
        assert out[basis_index(L, {"a": a, "b": (a + b) % 8})] == pytest.approx(w, abs=1e-12)


def test_adjoint_inverts_every_builder():
    L = three(2)
    circuits = [build_add_register(L, "a", "b"), build_sub_register(L, "b", "c"),
                build_muladd(L, "a", "b", "c"), build_fixedpoint_muladd(L, "a", "b", "c", 1, "exact"),
                build_add_const(L, "c", 3)]
    for c in circuits:
        for a, b, d in product(range(4), repeat=3):
            vals = {"a": a, "b": b, "c": d}
            out = apply(c.adjoint(), apply(c, init_basis(L, vals)))
            assert abs(out.amplitudes[basis_index(L, vals)]) == pytest.approx(1)
    Lh = RegisterLayout.sequential([("a", 3), ("anc", 1)])
    h = build_halve(Lh, "a", "anc")
    for a in range(8):
        out = apply(h.adjoint(), apply(h, init_basis(Lh, {"a": a})))
        assert abs(out.amplitudes[a]) == pytest.approx(1)
