"""Runge-Kutta tables, polynomial right-hand sides and classical integrators.

These are the classical references the quantum formulations are checked
against: Butcher tables (explicit, Crank-Nicolson, collocation), an implicit
stage solver based on damped Newton iteration, RK4 for fine-step reference
runs and the closed-form solution of the rotating model system.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ButcherTable:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    name: str = ""

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        s = b.shape[0]
        if A.shape != (s, s) or c.shape != (s,):
            raise ValueError(f"inconsistent table shapes A{A.shape} b{b.shape} c{c.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def s(self) -> int:
        return self.b.shape[0]

    @property
    def explicit(self) -> bool:
        return not np.any(np.triu(self.A))


def explicit_euler() -> ButcherTable:
    return ButcherTable([[0.0]], [1.0], [0.0], "explicit-euler")


def crank_nicolson() -> ButcherTable:
    # two-stage form: the first stage is f(u), the second the trapezoidal average
    return ButcherTable([[0.0, 0.0], [0.5, 0.5]], [0.5, 0.5], [0.0, 1.0], "crank-nicolson")


def classic_rk4() -> ButcherTable:
    A = [[0, 0, 0, 0], [0.5, 0, 0, 0], [0, 0.5, 0, 0], [0, 0, 1, 0]]
    return ButcherTable(A, [1 / 6, 1 / 3, 1 / 3, 1 / 6], [0, 0.5, 0.5, 1], "rk4")


def gauss_legendre_nodes(s: int) -> np.ndarray:
    x, _ = np.polynomial.legendre.leggauss(s)
    return np.sort((x + 1.0) / 2.0)


def chebyshev_gauss_nodes(s: int) -> np.ndarray:
    i = np.arange(1, s + 1)
    return np.sort((1.0 - np.cos((2 * i - 1) * np.pi / (2 * s))) / 2.0)


def collocation_table(nodes: Sequence[float], name: str = "") -> ButcherTable:
    """Collocation coefficients: A[i, j] = int_0^{c_i} l_j, b[j] = int_0^1 l_j.

    ``l_j`` is the Lagrange basis polynomial on ``nodes``.
    """
    c = np.asarray(nodes, dtype=float)
    s = c.shape[0]
    if s == 0:
        raise ValueError("need at least one node")
    if np.unique(c).shape[0] != s:
        raise ValueError(f"collocation nodes must be distinct, got {c}")
    P = np.polynomial.Polynomial
    A = np.empty((s, s))
    b = np.empty(s)
    for j in range(s):
        lj = P([1.0])
        for m in range(s):
            if m != j:
                lj = lj * P([-c[m], 1.0]) / (c[j] - c[m])
        Lj = lj.integ()  # antiderivative vanishing at 0
        A[:, j] = Lj(c)
        b[j] = Lj(1.0)
    return ButcherTable(A, b, c, name)


def gauss_legendre(s: int = 3) -> ButcherTable:
    return collocation_table(gauss_legendre_nodes(s), f"gauss-legendre-{2 * s}")


def chebyshev_gauss(s: int) -> ButcherTable:
    return collocation_table(chebyshev_gauss_nodes(s), f"chebyshev-gauss-{s}")


TABLES: dict[str, Callable[[], ButcherTable]] = {
    "euler": explicit_euler,
    "crank-nicolson": crank_nicolson,
    "cn": crank_nicolson,
    "implicit-euler": lambda: collocation_table([1.0], "implicit-euler"),
    "gl2": lambda: gauss_legendre(1),
    "gl4": lambda: gauss_legendre(2),
    "gl6": lambda: gauss_legendre(3),
    "rk4": classic_rk4,
}


def table_by_name(name: str) -> ButcherTable:
    try:
        return TABLES[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; choose from {sorted(TABLES)}") from None


def spectral_integration_matrix(tbl: ButcherTable) -> np.ndarray:
    """Stack A over b^T, giving the (s+1) x s matrix of the collocation step."""
    return np.vstack([tbl.A, tbl.b[None, :]])


@dataclass(frozen=True)
class OdeSystem:
    """Autonomous polynomial right-hand side.

    ``tensors[d]`` holds the degree-``d`` coefficients with shape ``(N,)*(d+1)``;
    component ``j`` of ``f(u)`` is ``sum_d tensors[d][j, k1..kd] u[k1]..u[kd]``.
    """

    tensors: tuple[np.ndarray, ...]
    name: str = ""
    N: int = field(init=False)

    def __post_init__(self):
        ts = tuple(np.asarray(t, dtype=float) for t in self.tensors)
        if not ts:
            raise ValueError("an ODE system needs at least one coefficient tensor")
        N = ts[0].shape[0] if ts[0].ndim else 0
        for d, t in enumerate(ts):
            if t.shape != (N,) * (d + 1):
                raise ValueError(f"tensor of degree {d} must have shape {(N,) * (d + 1)}, got {t.shape}")
        object.__setattr__(self, "tensors", ts)
        object.__setattr__(self, "N", N)

    @property
    def degree(self) -> int:
        nz = [d for d, t in enumerate(self.tensors) if np.any(t)]
        return max(nz) if nz else 0

    @property
    def is_linear(self) -> bool:
        return self.degree <= 1


def eval_rhs(sys: OdeSystem, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (sys.N,):
        raise ValueError(f"state has shape {u.shape}, system expects ({sys.N},)")
    out = np.zeros(sys.N)
    for t in sys.tensors:
        term = t
        while term.ndim > 1:
            term = term @ u
        out += term
    return out


def jacobian(sys: OdeSystem, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    Jf = np.zeros((sys.N, sys.N))
    for d, t in enumerate(sys.tensors):
        for p in range(1, d + 1):
            # differentiate w.r.t. index position p, contract all others with u
            term = np.moveaxis(t, p, -1)
            while term.ndim > 2:
                term = np.tensordot(term, u, axes=([1], [0]))
            Jf += term
    return Jf


def model_system() -> OdeSystem:
    """du/dt = (u2, -u1)."""
    return OdeSystem((np.zeros(2), np.array([[0.0, 1.0], [-1.0, 0.0]])), "model")


def riccati_system() -> OdeSystem:
    """du/dt = u - u**2."""
    return OdeSystem((np.zeros(1), np.array([[1.0]]), np.array([[[-1.0]]])), "riccati")


def scalar_linear_system(lam: float) -> OdeSystem:
    return OdeSystem((np.zeros(1), np.array([[float(lam)]])), f"linear({lam})")


SYSTEMS: dict[str, Callable[[], OdeSystem]] = {
    "model": model_system,
    "riccati": riccati_system,
}


def system_by_name(name: str) -> OdeSystem:
    try:
        return SYSTEMS[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown system {name!r}; choose from {sorted(SYSTEMS)}") from None


def stage_residual(sys: OdeSystem, tbl: ButcherTable, u, dt: float, K) -> np.ndarray:
    """K_o - f(u + dt * sum_e A[o, e] K_e) for every stage o."""
    u = np.asarray(u, dtype=float)
    K = np.asarray(K, dtype=float)
    Y = u[None, :] + dt * tbl.A @ K
    return K - np.array([eval_rhs(sys, y) for y in Y])


def classical_rk_step(
    sys: OdeSystem,
    tbl: ButcherTable,
    u,
    dt: float,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> tuple[np.ndarray, np.ndarray]:
    """One Runge-Kutta step; returns the new state and the stage matrix K (s x N).

    Explicit tables use forward substitution.  Implicit ones run damped Newton
    on the stacked stage equations, starting from K_o = f(u), until the max-norm
    residual drops to ``tol``.
    """
    if dt <= 0:
        raise ValueError(f"time step must be positive, got {dt}")
    u = np.asarray(u, dtype=float)
    s, N = tbl.s, sys.N
    if tbl.explicit:
        K = np.zeros((s, N))
        for o in range(s):
            K[o] = eval_rhs(sys, u + dt * tbl.A[o, :o] @ K[:o])
        return u + dt * tbl.b @ K, K

    K = np.tile(eval_rhs(sys, u), (s, 1))
    R = stage_residual(sys, tbl, u, dt, K)
    norm = np.max(np.abs(R))
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise ConvergenceError(f"Newton stalled at residual {norm:.3e} after {max_iter} iterations")
        Y = u[None, :] + dt * tbl.A @ K
        Jac = np.eye(s * N)
        for o in range(s):
            Jo = jacobian(sys, Y[o])
            for e in range(s):
                Jac[o * N:(o + 1) * N, e * N:(e + 1) * N] -= dt * tbl.A[o, e] * Jo
        step = np.linalg.solve(Jac, -R.ravel()).reshape(s, N)
        lam = 1.0
        while True:
            K_try = K + lam * step
            R_try = stage_residual(sys, tbl, u, dt, K_try)
            norm_try = np.max(np.abs(R_try))
            if norm_try < norm or lam < 1e-4:
                break
            lam *= 0.5
        K, R, norm = K_try, R_try, norm_try
        it += 1
    return u + dt * tbl.b @ K, K


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return self.times.shape[0]


def integrate_classical(sys: OdeSystem, tbl: ButcherTable, u0, dt: float, steps: int, tol: float = 1e-12) -> Trajectory:
    u = np.asarray(u0, dtype=float)
    states = [u]
    for _ in range(steps):
        u, _ = classical_rk_step(sys, tbl, u, dt, tol)
        states.append(u)
    return Trajectory(dt * np.arange(steps + 1), np.array(states))


def rk4_reference(sys: OdeSystem, u0, t_end: float, dt: float = 1e-4) -> np.ndarray:
    """State at ``t_end`` from classic RK4 with a fine step (final step shortened)."""
    u = np.asarray(u0, dtype=float)
    steps = int(np.floor(t_end / dt + 1e-9))
    tbl = classic_rk4()
    for _ in range(steps):
        u, _ = classical_rk_step(sys, tbl, u, dt)
    rest = t_end - steps * dt
    if rest > 1e-15:
        u, _ = classical_rk_step(sys, tbl, u, rest)
    return u


def analytic_model_solution(u0, t: float) -> np.ndarray:
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, s], [-s, c]]) @ np.asarray(u0, dtype=float)
