"""Energy gaps of QUBO Hamiltonians, statically and along an adiabatic path.

The path is H(s) = (1 - s) H_mix + s H_qubo with the transverse-field mixer
H_mix = sum_i (1 - X_i) / 2, whose ground state is the uniform superposition
and whose gap is one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.linalg import LinearOperator, eigsh

from ._pykernels import energy_blocks
from .qubo import NumberEncoding, Qubo, build_rk_problem
from .rk import ButcherTable, crank_nicolson, explicit_euler, scalar_linear_system
from .solvers import MAX_EXACT_VARS, ProblemTooLargeError, tie_tolerance

MAX_SCAN_VARS = 12
DENSE_LIMIT = 10


def qubo_spectrum_gap(q: Qubo) -> float:
    """Difference between the two smallest distinct energies over all assignments."""
    n = q.num_vars
    if n > MAX_EXACT_VARS:
        raise ProblemTooLargeError(f"{n} variables exceed {MAX_EXACT_VARS}")
    if n == 0:
        raise ValueError("an empty QUBO has a single energy level")
    tol = tie_tolerance(q)
    e0 = min(float(e.min()) for _, e in energy_blocks(q.h, q.J, q.offset))
    e1 = np.inf
    for _, e in energy_blocks(q.h, q.J, q.offset):
        above = e[e > e0 + tol]
        if above.size:
            e1 = min(e1, float(above.min()))
    return e1 - e0


def qubo_energies(q: Qubo) -> np.ndarray:
    return np.concatenate([e for _, e in energy_blocks(q.h, q.J, q.offset)])


class _PathHamiltonian:
    def __init__(self, q: Qubo):
        if q.num_vars > MAX_SCAN_VARS:
            raise ProblemTooLargeError(f"{q.num_vars} variables exceed the scan limit of {MAX_SCAN_VARS}")
        if q.num_vars == 0:
            raise ValueError("an empty QUBO has no gap")
        self.m = q.num_vars
        self.dim = 1 << self.m
        self.diag = qubo_energies(q)
        self.idx = np.arange(self.dim)

    def mixer_apply(self, v: np.ndarray) -> np.ndarray:
        out = 0.5 * self.m * v
        for i in range(self.m):
            out = out - 0.5 * v[self.idx ^ (1 << i)]
        return out

    def dense(self, s: float) -> np.ndarray:
        H = np.zeros((self.dim, self.dim))
        H[self.idx, self.idx] = 0.5 * self.m * (1 - s) + s * self.diag
        for i in range(self.m):
            H[self.idx, self.idx ^ (1 << i)] -= 0.5 * (1 - s)
        return H

    def lowest_two(self, s: float) -> tuple[float, float]:
        if self.m <= DENSE_LIMIT:
            w = eigh(self.dense(s), eigvals_only=True, subset_by_index=[0, 1])
            return float(w[0]), float(w[1])
        op = LinearOperator((self.dim, self.dim), dtype=float,
                            matvec=lambda v: (1 - s) * self.mixer_apply(v.ravel()) + s * self.diag * v.ravel())
        v0 = np.full(self.dim, 1.0) + 1e-3 * np.cos(np.arange(self.dim))
        w = eigsh(op, k=2, which="SA", v0=v0, tol=1e-12, ncv=min(self.dim, 40), return_eigenvectors=False)
        w = np.sort(w)
        return float(w[0]), float(w[1])


@dataclass
class SpectrumScan:
    s: np.ndarray
    e0: np.ndarray
    e1: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return self.e1 - self.e0

    @property
    def g_min(self) -> float:
        return float(self.gap.min())

    @property
    def s_min(self) -> float:
        return float(self.s[int(np.argmin(self.gap))])


def adiabatic_gap_scan(q: Qubo, grid: int = 101, refine: int = 3) -> SpectrumScan:
    """Lowest two eigenvalues of H(s) on a uniform grid over [0, 1] plus bisection refinement.

    At s=1 the gap is the QUBO gap itself (zero for a degenerate ground state).
    """
    if grid < 2:
        raise ValueError("grid needs at least two points")
    H = _PathHamiltonian(q)
    pts = np.linspace(0.0, 1.0, grid)
    vals = {float(s): H.lowest_two(float(s)) for s in pts}
    step = 1.0 / (grid - 1)
    for _ in range(refine):
        gaps = {s: e[1] - e[0] for s, e in vals.items()}
        best = min(gaps, key=gaps.get)
        step /= 2
        for s in (best - step, best + step):
            if 0.0 <= s <= 1.0 and s not in vals:
                vals[s] = H.lowest_two(s)
    ss = np.array(sorted(vals))
    e = np.array([vals[s] for s in ss])
    return SpectrumScan(ss, e[:, 0], e[:, 1])


def gap_lower_bound(dx: float, dt: float, b: float) -> float:
    """min{dx^2 (1 - dt)^2, dt^2 dx^2 b^2}."""
    return min(dx * dx * (1 - dt) ** 2, dt * dt * dx * dx * b * b)


SCHEMES = {"euler": (explicit_euler, -1.0), "crank-nicolson": (crank_nicolson, 1.0)}


def scalar_gap_problem(scheme: str, dx: float, dt: float):
    """Scalar test problem whose exact step solution sits on the register grid.

    u' = lam u from u = 0, every register carrying n = log2(1/dx) bits centred
    on zero, so the optimum (all zeros) is representable for every dx.
    """
    make_tbl, lam = SCHEMES[scheme]
    n = int(round(-np.log2(dx)))
    if n < 1 or 2.0 ** -n != dx:
        raise ValueError(f"dx={dx} is not a negative power of two")
    tbl: ButcherTable = make_tbl()
    encs = [NumberEncoding(n, float(n), -0.5) for _ in range(tbl.s + 1)]
    return build_rk_problem(scalar_linear_system(lam), tbl, dt, [0.0], encs)


@dataclass
class GapRow:
    dx: float
    dt: float
    gap_qubo: float
    gap_adiabatic: float
    bound: float
    num_vars: int


@dataclass
class GapTable:
    scheme: str
    rows: list[GapRow] = field(default_factory=list)

    def column(self, name: str, dt: float | None = None) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows if dt is None or r.dt == dt])

    def slope(self, name: str, dt: float) -> float:
        x = np.log(self.column("dx", dt))
        y = np.log(self.column(name, dt))
        return float(np.polyfit(x, y, 1)[0])

    def slopes(self) -> dict[float, dict[str, float]]:
        dts = sorted({r.dt for r in self.rows})
        return {dt: {"gap_qubo": self.slope("gap_qubo", dt), "gap_adiabatic": self.slope("gap_adiabatic", dt)}
                for dt in dts}


def gap_scaling_experiment(scheme: str, dxs, dts, grid: int = 101) -> GapTable:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {sorted(SCHEMES)}")
    table = GapTable(scheme)
    for dt in dts:
        for dx in dxs:
            prob = scalar_gap_problem(scheme, dx, dt)
            q = prob.qubo
            b = float(np.min(np.abs(prob.tbl.b[prob.tbl.b != 0])))
            table.rows.append(GapRow(dx, dt, qubo_spectrum_gap(q), adiabatic_gap_scan(q, grid).g_min,
                                     gap_lower_bound(dx, dt, b), q.num_vars))
    return table
