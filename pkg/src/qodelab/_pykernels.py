"""Pure numpy implementations of the hot kernels.

Must stay result-identical to ``_ckernels.pyx``: same enumeration order,
same tie rule, same Metropolis update sequence driven by the same
pre-drawn random numbers.
"""
from __future__ import annotations

import numpy as np

BLOCK_ELEMS = 1 << 20


def _bit_matrix(count: int, width: int) -> np.ndarray:
    idx = np.arange(count, dtype=np.int64)[:, None]
    return ((idx >> np.arange(width)) & 1).astype(np.float64)


def energy_blocks(h: np.ndarray, J: np.ndarray, offset: float, low_bits: int | None = None):
    """Yield (first_index, energies) covering all 2**n assignments in index order.

    Assignment index is sum_i s_i 2**i.  The variables are split into a low
    and a high half so each block is an outer sum plus one matrix product.
    """
    n = h.shape[0]
    L = min(n, 12) if low_bits is None else low_bits
    Hn = n - L
    Xl = _bit_matrix(1 << L, L)
    Jll, Jhh, Jlh = J[:L, :L], J[L:, L:], J[:L, L:]
    e_low = Xl @ h[:L] + 0.5 * np.einsum("ij,jk,ik->i", Xl, Jll, Xl)
    cross_l = Xl @ Jlh  # (2**L, Hn)
    rows = max(1, BLOCK_ELEMS >> L)
    for start in range(0, 1 << Hn, rows):
        stop = min(1 << Hn, start + rows)
        Xh = ((np.arange(start, stop, dtype=np.int64)[:, None] >> np.arange(Hn)) & 1).astype(np.float64)
        e_high = Xh @ h[L:] + 0.5 * np.einsum("ij,jk,ik->i", Xh, Jhh, Xh) + offset
        block = e_high[:, None] + e_low[None, :] + Xh @ cross_l.T
        yield start << L, block.ravel()


def exact_minimize(h, J, offset, tol):
    """Index and energy of the lowest-index assignment within ``tol`` of the minimum."""
    h = np.ascontiguousarray(h, dtype=np.float64)
    J = np.ascontiguousarray(J, dtype=np.float64)
    mins = []
    best = np.inf
    for first, e in energy_blocks(h, J, offset):
        m = float(e.min())
        mins.append((first, m))
        best = min(best, m)
    threshold = best + tol
    for (first, e), (_, m) in zip(energy_blocks(h, J, offset), mins):
        if m <= threshold:
            i = int(np.argmax(e <= threshold))
            return first + i, float(e[i])
    raise AssertionError("unreachable")  # pragma: no cover


def anneal(h, J, init, uniforms, betas):
    """Single-flip Metropolis sweeps, all reads advanced together.

    ``init`` is (reads, n) in {0, 1}; ``uniforms`` is (reads, sweeps, n);
    ``betas`` has one inverse temperature per sweep.  Returns final states.
    """
    h = np.asarray(h, dtype=np.float64)
    J = np.asarray(J, dtype=np.float64)
    x = np.array(init, dtype=np.int8)
    reads, n = x.shape
    field = np.repeat(h[None, :], reads, axis=0)
    for j in range(n):
        on = x[:, j] == 1
        field[on] += J[j][None, :]
    for sweep, beta in enumerate(betas):
        u = uniforms[:, sweep, :]
        for i in range(n):
            dE = (1 - 2 * x[:, i]) * field[:, i]
            with np.errstate(over="ignore"):
                accept = (dE <= 0.0) | (u[:, i] < np.exp(-beta * dE))
            if not accept.any():
                continue
            sign = (1 - 2 * x[accept, i]).astype(np.float64)
            x[accept, i] ^= 1
            field[accept] += sign[:, None] * J[i][None, :]
    return x
