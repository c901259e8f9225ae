"""Nested-interval refinement of register windows and QUBO-based time integration.

After every solve each register keeps its best value ``g`` as the new offset
and narrows its window: ``k <- k + c`` and ``d <- g - 2**(n - k - 1)``, which
leaves room for corrections of either sign.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .qubo import NumberEncoding, StageForm, build_rk_problem
from .rk import ButcherTable, OdeSystem, Trajectory, classical_rk_step, eval_rhs
from .solvers import Solver, solve_exact

logger = logging.getLogger(__name__)


@dataclass
class IterationRecord:
    iteration: int
    k: float
    d: np.ndarray
    g: np.ndarray
    u_next: np.ndarray
    energy: float
    error: float
    span_ok: bool


@dataclass
class VariationalState:
    n: int
    c: float
    k: float
    d: np.ndarray
    g: np.ndarray | None = None
    reference: np.ndarray | None = None
    non_convex: bool = False
    history: list[IterationRecord] = field(default_factory=list)

    @property
    def iteration(self) -> int:
        return len(self.history)

    @property
    def errors(self) -> list[float]:
        return [r.error for r in self.history]

    def shift(self, k: float) -> float:
        """Half-window offset 2**(n - k - 1), written as a power-of-two multiple of 2**-k."""
        return (1 << (self.n - 1)) * 2.0 ** -k


def initial_offsets(sys: OdeSystem, tbl: ButcherTable, u_now, n: int, k0: float) -> np.ndarray:
    """Centre stage windows on f(u) and next-state windows on u."""
    u_now = np.asarray(u_now, dtype=float)
    half = (1 << (n - 1)) * 2.0 ** -k0
    f = eval_rhs(sys, u_now)
    return np.concatenate([np.tile(f, tbl.s), u_now]) - half


def variational_rk_step(
    sys: OdeSystem,
    tbl: ButcherTable,
    dt: float,
    u_now,
    solver: Solver = solve_exact,
    n: int = 3,
    k0: float = 1.0,
    c: float = 0.5,
    iterations: int = 15,
    stage_form: StageForm = "rk",
    reference=None,
) -> tuple[np.ndarray, VariationalState]:
    """Solve one RK step through repeated QUBO solves with shrinking windows.

    Returns the decoded next state of the final iteration and the loop state,
    whose history records per-iteration errors against ``reference`` (the
    Newton solution of the same step unless given).
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    if c <= 0:
        raise ValueError("exponent shift c must be positive")
    u_now = np.asarray(u_now, dtype=float)
    if reference is None:
        reference, _ = classical_rk_step(sys, tbl, u_now, dt)
    state = VariationalState(n, c, float(k0), initial_offsets(sys, tbl, u_now, n, k0),
                             reference=np.asarray(reference, dtype=float),
                             non_convex=not sys.is_linear)
    if state.non_convex:
        logger.info("non-convex objective: convergence of the variational loop is not guaranteed")
    N = sys.N
    for i in range(iterations):
        encodings = [NumberEncoding(n, state.k, float(d)) for d in state.d]
        problem = build_rk_problem(sys, tbl, dt, u_now, encodings, stage_form)
        sol = solver(problem.qubo)
        g = problem.register_values(sol.bits)
        u_next = g[-N:]
        k_next = state.k + c
        d_next = g - state.shift(k_next)
        span_ok = all(NumberEncoding(n, k_next, float(d)).contains(float(v)) for d, v in zip(d_next, g))
        if not span_ok:  # pragma: no cover - guaranteed by the update rule
            raise AssertionError("updated window lost the current best value")
        state.history.append(IterationRecord(
            i, state.k, state.d.copy(), g, u_next.copy(), sol.energy,
            float(np.max(np.abs(u_next - state.reference))), span_ok,
        ))
        state.g, state.k, state.d = g, k_next, d_next
    return state.history[-1].u_next.copy(), state


@dataclass
class QuboIntegration:
    trajectory: Trajectory
    steps: list[VariationalState]


def integrate_qubo(
    sys: OdeSystem,
    tbl: ButcherTable,
    dt: float,
    u0,
    steps: int,
    solver: Solver = solve_exact,
    n: int = 3,
    k0: float = 1.0,
    c: float = 0.5,
    iterations: int = 15,
    stage_form: StageForm = "rk",
) -> QuboIntegration:
    u = np.asarray(u0, dtype=float)
    states, infos = [u], []
    for _ in range(steps):
        u, st = variational_rk_step(sys, tbl, dt, u, solver, n, k0, c, iterations, stage_form)
        states.append(u)
        infos.append(st)
    return QuboIntegration(Trajectory(dt * np.arange(steps + 1), np.array(states)), infos)
