"""Ground-state search for QUBOs: exhaustive enumeration and simulated annealing."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import kernels
from .qubo import Qubo

MAX_EXACT_VARS = 26


class ProblemTooLargeError(ValueError):
    pass


class Solution(NamedTuple):
    bits: np.ndarray
    energy: float

    @property
    def index(self) -> int:
        return int(sum(int(b) << i for i, b in enumerate(self.bits)))


def bits_of(index: int, n: int) -> np.ndarray:
    return np.array([(index >> i) & 1 for i in range(n)], dtype=np.int8)


def tie_tolerance(q: Qubo) -> float:
    """Energies closer than this count as equal when breaking ties."""
    scale = abs(q.offset) + np.abs(q.h).sum() + 0.5 * np.abs(q.J).sum()
    return 1e-11 * max(scale, 1e-300)


def solve_exact(q: Qubo, backend: str | None = None) -> Solution:
    """Global minimizer by enumeration; among (near-)equal minima the lowest index sum s_i 2**i wins."""
    n = q.num_vars
    if n > MAX_EXACT_VARS:
        raise ProblemTooLargeError(f"{n} variables exceed the enumeration limit of {MAX_EXACT_VARS}")
    if n == 0:
        return Solution(np.zeros(0, dtype=np.int8), q.offset)
    idx, _ = kernels.get_backend(backend).exact_minimize(q.h, q.J, q.offset, tie_tolerance(q))
    bits = bits_of(idx, n)
    return Solution(bits, q.energy(bits))


@dataclass(frozen=True)
class AnnealSchedule:
    reads: int = 100
    sweeps: int = 200
    beta_start: float = 0.1
    beta_end: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.reads < 1 or self.sweeps < 1:
            raise ValueError("reads and sweeps must be positive")
        if not 0 < self.beta_start < self.beta_end:
            raise ValueError("need 0 < beta_start < beta_end")

    def betas(self) -> np.ndarray:
        return np.geomspace(self.beta_start, self.beta_end, self.sweeps)


def solve_sa(q: Qubo, sched: AnnealSchedule | None = None, backend: str | None = None) -> Solution:
    """Best final state over independent single-flip Metropolis reads.

    Inverse temperatures refer to the problem scaled so its largest |h| or
    |J| is one, which makes the default schedule independent of units.
    """
    sched = sched or AnnealSchedule()
    n = q.num_vars
    rng = np.random.default_rng(sched.seed)
    init = rng.integers(0, 2, size=(sched.reads, n), dtype=np.int8)
    uniforms = rng.random((sched.reads, sched.sweeps, n))
    if n == 0:
        return Solution(np.zeros(0, dtype=np.int8), q.offset)
    scale = q.max_abs_coefficient()
    betas = sched.betas() / (scale if scale > 0 else 1.0)
    states = kernels.get_backend(backend).anneal(q.h, q.J, init, uniforms, betas)
    energies = q.energies(states)
    best = int(np.argmin(energies))
    bits = np.asarray(states[best], dtype=np.int8)
    return Solution(bits, q.energy(bits))


Solver = Callable[[Qubo], Solution]


def make_solver(kind: str, sched: AnnealSchedule | None = None) -> Solver:
    if kind == "exact":
        return solve_exact
    if kind == "sa":
        schedule = sched or AnnealSchedule()
        return lambda q: solve_sa(q, schedule)
    raise ValueError(f"unknown solver {kind!r}; use 'exact' or 'sa'")
