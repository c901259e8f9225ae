"""Circuit builders for basis-encoded modular and fixed-point arithmetic.

Every builder works in the Fourier basis of the destination register: QFT the
destination, apply a diagonal phase pattern that depends on the source
registers, transform back.  With ``F`` the negative-sign transform, the
diagonal ``exp(-2 pi i g * y / 2**n)`` turns ``|b>`` into ``|b + g mod 2**n>``.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .fixedpoint import MulMode, mul_shift_bits
from .statevector import (
    CNOT,
    SWAP,
    Circuit,
    Gate,
    RegisterLayout,
    adj_phase,
    phase,
    qft,
    qft_inverse,
)

EXACT_MUL_MAX_BITS = 6


class RegisterError(ValueError):
    pass


def _width(layout: RegisterLayout, name: str) -> int:
    if name not in layout:
        raise RegisterError(f"unknown register {name!r}")
    return layout.width(name)


def _same_width(layout: RegisterLayout, *names: str) -> int:
    widths = {_width(layout, nm) for nm in names}
    if len(widths) != 1:
        raise RegisterError(f"registers {names} differ in width: {sorted(widths)}")
    if len(set(names)) != len(names):
        raise RegisterError(f"registers must be distinct, got {names}")
    return widths.pop()


def _wrap(layout: RegisterLayout, dst: str, diagonal: Sequence[Gate]) -> Circuit:
    c = qft(layout, dst)
    c.extend(diagonal)
    return c + qft_inverse(layout, dst)


def build_add_const(layout: RegisterLayout, register: str, c: int) -> Circuit:
    """|a> -> |a + c mod 2**n>; subtract by passing ``-c % 2**n``."""
    n = _width(layout, register)
    if not 0 <= c < 1 << n:
        raise ValueError(f"constant {c} outside [0, 2**{n})")
    qs = layout[register]
    diag = [adj_phase(qs[k], n - k, c) for k in range(n)]
    return _wrap(layout, register, diag)


def _add_diagonal(layout: RegisterLayout, src: str, dst: str, adjoint: bool = False) -> list[Gate]:
    n = _same_width(layout, src, dst)
    a, b = layout[src], layout[dst]
    gate = phase if adjoint else adj_phase
    return [gate(b[k], n - j - k, 1.0, controls=(a[j],)) for j in range(n) for k in range(n - j)]


def build_add_register(layout: RegisterLayout, src: str, dst: str) -> Circuit:
    """|a, b> -> |a, a + b mod 2**n> with n(n+1)/2 controlled rotations."""
    return _wrap(layout, dst, _add_diagonal(layout, src, dst))


def build_sub_register(layout: RegisterLayout, src: str, dst: str) -> Circuit:
    """|a, b> -> |a, b - a mod 2**n>: the adder with its diagonal conjugated."""
    return _wrap(layout, dst, _add_diagonal(layout, src, dst, adjoint=True))


def build_muladd(layout: RegisterLayout, src_a: str, src_b: str, dst: str) -> Circuit:
    """|a, b, c> -> |a, b, ab + c mod 2**n> using n(n+1)(n+2)/6 doubly-controlled rotations."""
    return build_fixedpoint_muladd(layout, src_a, src_b, dst, 0, "truncated")


def build_fixedpoint_muladd(
    layout: RegisterLayout,
    src_a: str,
    src_b: str,
    dst: str,
    q: int,
    mode: MulMode = "truncated",
) -> Circuit:
    """|a, b, c> -> |a, b, (ab >> q) + c mod 2**n>.

    ``truncated`` keeps only the partial products with j + k >= q, which drops
    carries out of the discarded bits once q >= 2.  ``exact`` builds the phase
    pattern from the full function (a, b) -> (ab >> q), at exponential cost.
    """
    n = _same_width(layout, src_a, src_b, dst)
    if not 0 <= q < n:
        raise ValueError(f"shift q={q} outside [0, {n})")
    a, b, y = layout[src_a], layout[src_b], layout[dst]
    if mode == "exact":
        if n > EXACT_MUL_MAX_BITS:
            raise ValueError(f"exact shifted multiplication is limited to n <= {EXACT_MUL_MAX_BITS}")
        table = [mul_shift_bits(v & ((1 << n) - 1), v >> n, n, q, "exact") for v in range(1 << (2 * n))]
        return _wrap(layout, dst, _function_diagonal(a + b, y, table))
    if mode != "truncated":
        raise ValueError(f"unknown multiplication mode {mode!r}")
    diag = []
    for j in range(n):
        for k in range(n):
            if j + k < q:
                continue
            for ell in range(n):
                p = j + k - q + ell
                if p < n:
                    diag.append(adj_phase(y[ell], n - p, 1.0, controls=(a[j], b[k])))
    return _wrap(layout, dst, diag)


def mobius_coefficients(table: Sequence[int]) -> np.ndarray:
    """Integer coefficients c_S with g(x) = sum over subsets S of x of c_S."""
    c = np.array(table, dtype=np.int64)
    w = c.shape[0].bit_length() - 1
    if c.shape[0] != 1 << w:
        raise ValueError("function table length must be a power of two")
    for i in range(w):
        bit = 1 << i
        idx = np.arange(c.shape[0])
        sel = idx[(idx & bit) != 0]
        c[sel] -= c[sel ^ bit]
    return c


def _function_diagonal(src_qubits: Sequence[int], dst_qubits: Sequence[int], table: Sequence[int]) -> list[Gate]:
    # exp(-2 pi i g(x) y / 2**n) = prod_ell prod_S exp(-2 pi i c_S 2**ell [S in x] y_ell / 2**n)
    n = len(dst_qubits)
    coeffs = mobius_coefficients([int(v) % (1 << n) for v in table])
    gates = []
    for S in range(coeffs.shape[0]):
        cS = int(coeffs[S])
        if cS == 0:
            continue
        controls = tuple(q for i, q in enumerate(src_qubits) if (S >> i) & 1)
        for ell in range(n):
            m = n - ell
            theta = cS % (1 << m)
            if theta:
                gates.append(adj_phase(dst_qubits[ell], m, theta, controls=controls))
    return gates


def build_function_oracle(
    layout: RegisterLayout,
    src: str,
    dst: str,
    g: Sequence[int] | Callable[[int], int],
) -> Circuit:
    """|a, b> -> |a, g(a) + b mod 2**n> for an integer function table ``g``."""
    w = _width(layout, src)
    _width(layout, dst)
    if src == dst:
        raise RegisterError("source and destination must differ")
    table = [g(a) for a in range(1 << w)] if callable(g) else list(g)
    if len(table) != 1 << w:
        raise ValueError(f"function table must have {1 << w} entries, got {len(table)}")
    return _wrap(layout, dst, _function_diagonal(layout[src], layout[dst], table))


def build_halve(layout: RegisterLayout, register: str, ancilla: str | None) -> Circuit:
    """(a, 0) -> (a >> 1 arithmetic, a_0): divide by two rounding toward -inf.

    The low bit is swapped out into the ancilla, the remaining bits slide down
    one position, and the sign bit is copied into the freed top qubit.
    """
    if ancilla is None:
        raise RegisterError("halving needs a one-qubit ancilla register")
    if _width(layout, ancilla) != 1:
        raise RegisterError(f"ancilla {ancilla!r} must be a single qubit")
    _width(layout, register)
    qs = layout[register]
    anc = layout[ancilla][0]
    n = len(qs)
    c = Circuit(layout)
    c.append(SWAP(qs[0], anc))
    for i in range(n - 1):
        c.append(SWAP(qs[i], qs[i + 1]))
    # the sign bit now sits one below the top, or in the ancilla when n == 1
    sign = qs[n - 2] if n >= 2 else anc
    c.append(CNOT(sign, qs[n - 1]))
    return c


def controlled_phase_count(circuit: Circuit, src_qubits: Sequence[int], n_controls: int | None = None) -> int:
    """Rotations whose controls all lie in ``src_qubits`` (the arithmetic diagonal, not the QFTs)."""
    src = set(src_qubits)
    return sum(
        1
        for g in circuit.gates
        if g.is_diagonal and g.controls and set(g.controls) <= src
        and (n_controls is None or len(g.controls) == n_controls)
    )
