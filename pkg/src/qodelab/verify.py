"""Exhaustive basis-state checks of the arithmetic circuits against integer oracles."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, Mapping

import numpy as np

from .arithmetic import (
    build_add_register,
    build_fixedpoint_muladd,
    build_halve,
    build_muladd,
    build_sub_register,
)
from .fixedpoint import asr_bits, mul_shift_bits
from .statevector import Circuit, RegisterLayout, apply, init_basis, register_values


@dataclass
class VerifyReport:
    name: str
    cases: int
    mismatches: int
    min_probability: float

    @property
    def ok(self) -> bool:
        return self.mismatches == 0 and abs(self.min_probability - 1.0) <= 1e-9


def check_circuit(
    name: str,
    circuit: Circuit,
    inputs: Iterable[Mapping[str, int]],
    oracle: Callable[[Mapping[str, int]], Mapping[str, int]],
) -> VerifyReport:
    """Run every basis input and compare the dominant output with the oracle."""
    layout = circuit.layout
    cases = mismatches = 0
    pmin = 1.0
    for values in inputs:
        psi = apply(circuit, init_basis(layout, values)).amplitudes
        idx = int(np.argmax(np.abs(psi)))
        pmin = min(pmin, float(abs(psi[idx]) ** 2))
        got = register_values(layout, idx)
        want = {**values, **oracle(values)}
        cases += 1
        mismatches += any(got[k] != v for k, v in want.items())
    return VerifyReport(name, cases, mismatches, pmin)


def _pairs(n: int):
    return ({"a": a, "b": b} for a, b in product(range(1 << n), repeat=2))


def _triples(n: int):
    return ({"a": a, "b": b, "c": c} for a, b, c in product(range(1 << n), repeat=3))


def verify_adder(n: int) -> VerifyReport:
    layout = RegisterLayout.sequential([("a", n), ("b", n)])
    mask = (1 << n) - 1
    return check_circuit(f"add n={n}", build_add_register(layout, "a", "b"), _pairs(n),
                         lambda v: {"b": (v["a"] + v["b"]) & mask})


def verify_subtractor(n: int) -> VerifyReport:
    layout = RegisterLayout.sequential([("a", n), ("b", n)])
    mask = (1 << n) - 1
    return check_circuit(f"sub n={n}", build_sub_register(layout, "a", "b"), _pairs(n),
                         lambda v: {"b": (v["b"] - v["a"]) & mask})


def verify_multiplier(n: int) -> VerifyReport:
    layout = RegisterLayout.sequential([("a", n), ("b", n), ("c", n)])
    mask = (1 << n) - 1
    return check_circuit(f"muladd n={n}", build_muladd(layout, "a", "b", "c"), _triples(n),
                         lambda v: {"c": (v["a"] * v["b"] + v["c"]) & mask})


def verify_fixedpoint_multiplier(n: int, q: int, mode: str = "truncated") -> VerifyReport:
    layout = RegisterLayout.sequential([("a", n), ("b", n), ("c", n)])
    mask = (1 << n) - 1
    circ = build_fixedpoint_muladd(layout, "a", "b", "c", q, mode)
    return check_circuit(f"fixed-point muladd n={n} q={q} {mode}", circ, _triples(n),
                         lambda v: {"c": (mul_shift_bits(v["a"], v["b"], n, q, mode) + v["c"]) & mask})


def verify_halver(n: int) -> VerifyReport:
    layout = RegisterLayout.sequential([("a", n), ("anc", 1)])
    return check_circuit(f"halve n={n}", build_halve(layout, "a", "anc"),
                         ({"a": a, "anc": 0} for a in range(1 << n)),
                         lambda v: {"a": asr_bits(v["a"], n), "anc": v["a"] & 1})


def verify_all(n: int, q: int = 1) -> list[VerifyReport]:
    reports = [verify_adder(n), verify_subtractor(n), verify_multiplier(n)]
    if 0 <= q < n:
        reports.append(verify_fixedpoint_multiplier(n, q, "truncated"))
        reports.append(verify_fixedpoint_multiplier(n, q, "exact"))
    reports.append(verify_halver(n))
    return reports
