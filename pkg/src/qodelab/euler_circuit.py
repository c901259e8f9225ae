"""Explicit Euler stepping of du/dt = (u2, -u1) as a fixed-point quantum circuit."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .arithmetic import build_add_register, build_halve, build_sub_register
from .fixedpoint import FixedPointFormat, asr_bits, fx_encode, to_signed
from .rk import Trajectory
from .statevector import Circuit, RegisterLayout, apply, init_basis, measure_register

logger = logging.getLogger(__name__)

POINT_MASS_TOL = 1e-9


class MeasurementError(RuntimeError):
    pass


@dataclass(frozen=True)
class EulerCircuitPlan:
    fmt: FixedPointFormat
    dt_log2: int
    layout: RegisterLayout
    circuit: Circuit

    @property
    def dt(self) -> float:
        return 2.0 ** self.dt_log2

    @property
    def halvings(self) -> int:
        return -self.dt_log2


def euler_layout(fmt: FixedPointFormat, halvings: int) -> RegisterLayout:
    sizes = [("u1", fmt.n), ("u2", fmt.n), ("anc1", fmt.n), ("anc2", fmt.n)]
    sizes += [(f"h1_{i}", 1) for i in range(halvings)]
    sizes += [(f"h2_{i}", 1) for i in range(halvings)]
    return RegisterLayout.sequential(sizes)


def build_rhs_circuits(layout: RegisterLayout) -> tuple[Circuit, Circuit]:
    """Circuits writing f1 = u2 into anc1 and f2 = -u1 into anc2 (both ancillas start at 0)."""
    return (
        build_add_register(layout, "u2", "anc1"),
        build_sub_register(layout, "u1", "anc2"),
    )


def build_euler_step(fmt: FixedPointFormat, dt_log2: int) -> EulerCircuitPlan:
    if dt_log2 >= 0:
        raise ValueError(f"time step must be a negative power of two, got 2**{dt_log2}")
    halvings = -dt_log2
    if halvings > fmt.n:
        raise ValueError(f"{halvings} halvings exceed the {fmt.n}-bit register")
    layout = euler_layout(fmt, halvings)
    f1, f2 = build_rhs_circuits(layout)
    circuit = f1 + f2
    for i in range(halvings):
        circuit = circuit + build_halve(layout, "anc1", f"h1_{i}")
        circuit = circuit + build_halve(layout, "anc2", f"h2_{i}")
    circuit = circuit + build_add_register(layout, "anc1", "u1")
    circuit = circuit + build_add_register(layout, "anc2", "u2")
    logger.debug("euler step circuit: %d qubits, %d gates", layout.num_qubits, len(circuit))
    return EulerCircuitPlan(fmt, dt_log2, layout, circuit)


def classical_fixedpoint_euler(fmt: FixedPointFormat, dt_log2: int, bits: tuple[int, int]) -> tuple[int, int]:
    """Reference Euler update on raw register patterns, mirroring the circuit's arithmetic."""
    n = fmt.n
    mask = (1 << n) - 1
    u1, u2 = bits
    k1, k2 = u2, -u1 & mask
    for _ in range(-dt_log2):
        k1, k2 = asr_bits(k1, n), asr_bits(k2, n)
    return (u1 + k1) & mask, (u2 + k2) & mask


def _point_mass(dist: dict[int, float], name: str) -> int:
    value, p = max(dist.items(), key=lambda kv: kv[1])
    if abs(p - 1.0) > POINT_MASS_TOL:
        raise MeasurementError(f"register {name} is not in a basis state: {dist}")
    return value


def _warn_overflow(fmt: FixedPointFormat, dt_log2: int, bits: tuple[int, int]) -> None:
    n = fmt.n
    u1, u2 = (to_signed(b, n) for b in bits)
    k1, k2 = u2 >> -dt_log2, (-u1) >> -dt_log2
    lo, hi = -(1 << (n - 1)), (1 << (n - 1)) - 1
    if -u1 > hi or not (lo <= u1 + k1 <= hi and lo <= u2 + k2 <= hi):
        logger.warning("fixed-point overflow at u=(%g, %g): register arithmetic wraps modulo 2**%d",
                       u1 * fmt.resolution, u2 * fmt.resolution, n)


def step_bits(plan: EulerCircuitPlan, bits: tuple[int, int]) -> tuple[int, int, dict]:
    """Simulate one step from fresh ancillas; returns the measured u registers and all marginals."""
    _warn_overflow(plan.fmt, plan.dt_log2, bits)
    state = init_basis(plan.layout, {"u1": bits[0], "u2": bits[1]})
    out = apply(plan.circuit, state)
    marginals = {name: measure_register(out, plan.layout, name) for name in plan.layout.names}
    return _point_mass(marginals["u1"], "u1"), _point_mass(marginals["u2"], "u2"), marginals


@dataclass
class EulerRun:
    trajectory: Trajectory
    bits: list[tuple[int, int]]


def run_integration(plan: EulerCircuitPlan, u0, steps: int) -> EulerRun:
    """Step the circuit ``steps`` times, measuring and re-preparing the registers in between."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    fmt = plan.fmt
    bits = (fx_encode(u0[0], fmt).bits, fx_encode(u0[1], fmt).bits)
    history = [bits]
    for _ in range(steps):
        u1, u2, _ = step_bits(plan, bits)
        bits = (u1, u2)
        history.append(bits)
    states = np.array([[to_signed(b, fmt.n) * fmt.resolution for b in pair] for pair in history])
    return EulerRun(Trajectory(plan.dt * np.arange(steps + 1), states), history)


def classical_run(fmt: FixedPointFormat, dt_log2: int, u0, steps: int) -> list[tuple[int, int]]:
    bits = (fx_encode(u0[0], fmt).bits, fx_encode(u0[1], fmt).bits)
    history = [bits]
    for _ in range(steps):
        bits = classical_fixedpoint_euler(fmt, dt_log2, bits)
        history.append(bits)
    return history
