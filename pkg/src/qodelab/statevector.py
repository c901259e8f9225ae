"""Dense statevector simulation of multi-register qubit circuits.

Qubit ``i`` of the whole machine is bit ``i`` of the basis-state index, and
within a register qubit 0 is the least significant bit.  The gate set covers
what the Fourier-space arithmetic needs: H, X, SWAP, CNOT and (multi-)controlled
phase rotations ``R_m(theta) = diag(1, exp(2 pi i theta / 2**m))`` together with
their adjoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_QUBITS = 24
GATE_KINDS = ("H", "X", "SWAP", "CNOT", "PHASE", "ADJPHASE")


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    m: int = 0
    theta: float = 0.0

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(t) for t in self.targets)
        controls = tuple(int(c) for c in self.controls)
        if kind == "CNOT":
            # a CNOT is an X with exactly one control
            if len(controls) != 1:
                raise ValueError("CNOT takes exactly one control")
        n_targets = 2 if kind == "SWAP" else 1
        if len(targets) != n_targets:
            raise ValueError(f"{kind} acts on {n_targets} target(s), got {targets}")
        qubits = targets + controls
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"controls and targets must be distinct: {self}")
        theta = float(self.theta)
        if kind in ("PHASE", "ADJPHASE"):
            if self.m < 0:
                raise ValueError("phase gate index m must be non-negative")
            theta = math.fmod(theta, 2.0 ** self.m)
            if theta < 0:
                theta += 2.0 ** self.m
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "theta", theta)

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls

    @property
    def is_diagonal(self) -> bool:
        return self.kind in ("PHASE", "ADJPHASE")

    @property
    def angle(self) -> float:
        """Phase angle in radians applied to the |1> branch of the target."""
        a = 2.0 * math.pi * self.theta / 2.0 ** self.m
        return -a if self.kind == "ADJPHASE" else a

    def adjoint(self) -> "Gate":
        if self.kind == "PHASE":
            return Gate("ADJPHASE", self.targets, self.controls, self.m, self.theta)
        if self.kind == "ADJPHASE":
            return Gate("PHASE", self.targets, self.controls, self.m, self.theta)
        return self

    def to_line(self) -> str:
        ctl = ",".join(map(str, self.controls)) or "-"
        tgt = ",".join(map(str, self.targets))
        line = f"{self.kind} {ctl} {tgt}"
        if self.is_diagonal:
            line += f" {self.m} {self.theta!r}"
        return line

    @classmethod
    def from_line(cls, line: str) -> "Gate":
        parts = line.split()
        kind, ctl, tgt = parts[:3]
        controls = () if ctl == "-" else tuple(int(x) for x in ctl.split(","))
        targets = tuple(int(x) for x in tgt.split(","))
        if kind.upper() in ("PHASE", "ADJPHASE"):
            return cls(kind, targets, controls, int(parts[3]), float(parts[4]))
        return cls(kind, targets, controls)


def H(q: int) -> Gate:
    return Gate("H", (q,))


def X(q: int, controls: Sequence[int] = ()) -> Gate:
    return Gate("X", (q,), tuple(controls))


def CNOT(control: int, target: int) -> Gate:
    return Gate("CNOT", (target,), (control,))


def SWAP(a: int, b: int, controls: Sequence[int] = ()) -> Gate:
    return Gate("SWAP", (a, b), tuple(controls))


def phase(q: int, m: int, theta: float = 1.0, controls: Sequence[int] = ()) -> Gate:
    return Gate("PHASE", (q,), tuple(controls), m, theta)


def adj_phase(q: int, m: int, theta: float = 1.0, controls: Sequence[int] = ()) -> Gate:
    return Gate("ADJPHASE", (q,), tuple(controls), m, theta)


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[tuple[str, tuple[int, ...]], ...]

    def __post_init__(self):
        seen: set[int] = set()
        names: set[str] = set()
        for name, qubits in self.registers:
            if name in names:
                raise ValueError(f"duplicate register name {name!r}")
            names.add(name)
            if set(qubits) & seen:
                raise ValueError(f"register {name!r} overlaps another register")
            seen.update(qubits)
        if seen != set(range(len(seen))):
            raise ValueError("registers must cover qubits 0..m-1 without gaps")

    @classmethod
    def sequential(cls, sizes: Iterable[tuple[str, int]]) -> "RegisterLayout":
        """Pack registers one after the other, the first at the lowest qubits."""
        regs, start = [], 0
        for name, size in sizes:
            regs.append((name, tuple(range(start, start + size))))
            start += size
        return cls(tuple(regs))

    @property
    def num_qubits(self) -> int:
        return sum(len(q) for _, q in self.registers)

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.registers]

    def __getitem__(self, name: str) -> tuple[int, ...]:
        for reg, qubits in self.registers:
            if reg == name:
                return qubits
        raise KeyError(f"unknown register {name!r}")

    def __contains__(self, name: str) -> bool:
        return any(reg == name for reg, _ in self.registers)

    def width(self, name: str) -> int:
        return len(self[name])


@dataclass
class Circuit:
    layout: RegisterLayout
    gates: list[Gate] = field(default_factory=list)

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    def append(self, gate: Gate) -> "Circuit":
        if max(gate.qubits) >= self.num_qubits:
            raise ValueError(f"gate {gate} addresses a qubit beyond {self.num_qubits}")
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self.append(g)
        return self

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.layout != self.layout:
            raise ValueError("cannot concatenate circuits over different layouts")
        return Circuit(self.layout, self.gates + other.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def adjoint(self) -> "Circuit":
        return Circuit(self.layout, [g.adjoint() for g in reversed(self.gates)])

    def count(self, kind: str | None = None, n_controls: int | None = None) -> int:
        return sum(
            1
            for g in self.gates
            if (kind is None or g.kind == kind.upper())
            and (n_controls is None or len(g.controls) == n_controls)
        )

    def count_phases(self, n_controls: int | None = None) -> int:
        return sum(
            1 for g in self.gates if g.is_diagonal and (n_controls is None or len(g.controls) == n_controls)
        )

    def to_text(self) -> str:
        head = ["# qubits %d" % self.num_qubits]
        head += [f"# register {name} {','.join(map(str, q))}" for name, q in self.layout.registers]
        return "\n".join(head + [g.to_line() for g in self.gates]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        regs, gates = [], []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts and parts[0] == "register":
                    regs.append((parts[1], tuple(int(x) for x in parts[2].split(","))))
                continue
            gates.append(Gate.from_line(line))
        return cls(RegisterLayout(tuple(regs)), gates)


@dataclass
class QuantumState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        m = amps.shape[0].bit_length() - 1
        if amps.ndim != 1 or amps.shape[0] != 1 << m:
            raise ValueError("amplitude vector length must be a power of two")
        self.amplitudes = amps

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.shape[0].bit_length() - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "QuantumState":
        return QuantumState(self.amplitudes.copy())


def basis_index(layout: RegisterLayout, values: Mapping[str, int]) -> int:
    idx = 0
    for name, qubits in layout.registers:
        v = int(values.get(name, 0))
        if not 0 <= v < 1 << len(qubits):
            raise ValueError(f"value {v} does not fit register {name!r} of width {len(qubits)}")
        for bit, q in enumerate(qubits):
            idx |= ((v >> bit) & 1) << q
    unknown = set(values) - set(layout.names)
    if unknown:
        raise KeyError(f"unknown registers {sorted(unknown)}")
    return idx


def init_basis(layout: RegisterLayout, values: Mapping[str, int]) -> QuantumState:
    m = layout.num_qubits
    if m > MAX_QUBITS:
        raise ValueError(f"{m} qubits exceed the simulator cap of {MAX_QUBITS}")
    amps = np.zeros(1 << m, dtype=complex)
    amps[basis_index(layout, values)] = 1.0
    return QuantumState(amps)


def _axis(q: int, m: int) -> int:
    # C-order reshape puts the most significant qubit on axis 0
    return m - 1 - q


def _select(m: int, fixed: Mapping[int, int]) -> tuple:
    idx: list = [slice(None)] * m
    for q, v in fixed.items():
        idx[_axis(q, m)] = v
    return tuple(idx)


def apply_gate(psi: np.ndarray, gate: Gate, m: int) -> None:
    """Apply ``gate`` in place to ``psi`` reshaped as a rank-m tensor."""
    ctl = {c: 1 for c in gate.controls}
    if gate.is_diagonal:
        psi[_select(m, {**ctl, gate.targets[0]: 1})] *= np.exp(1j * gate.angle)
    elif gate.kind == "H":
        t = gate.targets[0]
        i0, i1 = _select(m, {**ctl, t: 0}), _select(m, {**ctl, t: 1})
        a0, a1 = psi[i0].copy(), psi[i1]
        psi[i0] = (a0 + a1) * _SQRT1_2
        psi[i1] = (a0 - a1) * _SQRT1_2
    elif gate.kind in ("X", "CNOT"):
        t = gate.targets[0]
        i0, i1 = _select(m, {**ctl, t: 0}), _select(m, {**ctl, t: 1})
        tmp = psi[i0].copy()
        psi[i0] = psi[i1]
        psi[i1] = tmp
    elif gate.kind == "SWAP":
        a, b = gate.targets
        i01, i10 = _select(m, {**ctl, a: 0, b: 1}), _select(m, {**ctl, a: 1, b: 0})
        tmp = psi[i01].copy()
        psi[i01] = psi[i10]
        psi[i10] = tmp
    else:  # pragma: no cover - kinds are validated in Gate
        raise ValueError(gate.kind)


_SQRT1_2 = 1.0 / math.sqrt(2.0)


def apply(circuit: Circuit, state: QuantumState) -> QuantumState:
    m = circuit.num_qubits
    if state.num_qubits != m:
        raise ValueError(f"state has {state.num_qubits} qubits, circuit expects {m}")
    psi = state.amplitudes.copy().reshape((2,) * m) if m else state.amplitudes.copy()
    for gate in circuit.gates:
        apply_gate(psi, gate, m)
    return QuantumState(psi.reshape(-1))


def qft(layout: RegisterLayout, register: str) -> Circuit:
    """F|j> = 2**(-n/2) sum_k exp(-2 pi i j k / 2**n) |k> on one register.

    n Hadamards and n(n-1)/2 controlled adjoint rotations (n(n+1)/2 rotation
    gates in all, counting H as R_1 on the fresh qubit) followed by n//2 swaps
    that restore the bit order.
    """
    qs = layout[register]
    n = len(qs)
    c = Circuit(layout)
    for j in reversed(range(n)):
        c.append(H(qs[j]))
        for k in reversed(range(j)):
            c.append(adj_phase(qs[j], j - k + 1, 1.0, controls=(qs[k],)))
    for i in range(n // 2):
        c.append(SWAP(qs[i], qs[n - 1 - i]))
    return c


def qft_inverse(layout: RegisterLayout, register: str) -> Circuit:
    return qft(layout, register).adjoint()


def unitary(circuit: Circuit) -> np.ndarray:
    """Dense matrix of a small circuit, column j = circuit applied to |j>."""
    m = circuit.num_qubits
    dim = 1 << m
    U = np.empty((dim, dim), dtype=complex)
    for j in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[j] = 1.0
        U[:, j] = apply(circuit, QuantumState(e)).amplitudes
    return U


def register_values(layout: RegisterLayout, index: int) -> dict[str, int]:
    out = {}
    for name, qubits in layout.registers:
        out[name] = sum(((index >> q) & 1) << bit for bit, q in enumerate(qubits))
    return out


def register_index_values(layout: RegisterLayout, register: str, m: int) -> np.ndarray:
    """Value of ``register`` for every basis index of an m-qubit machine."""
    idx = np.arange(1 << m, dtype=np.int64)
    vals = np.zeros_like(idx)
    for bit, q in enumerate(layout[register]):
        vals |= ((idx >> q) & 1) << bit
    return vals


def measure_register(state: QuantumState, layout: RegisterLayout, register: str) -> dict[int, float]:
    """Marginal outcome distribution of one register (zero-probability outcomes omitted)."""
    m = state.num_qubits
    vals = register_index_values(layout, register, m)
    probs = np.bincount(vals, weights=np.abs(state.amplitudes) ** 2, minlength=1 << layout.width(register))
    return {int(v): float(p) for v, p in enumerate(probs) if p > 1e-15}


def measure_all(state: QuantumState, layout: RegisterLayout) -> dict[str, dict[int, float]]:
    return {name: measure_register(state, layout, name) for name in layout.names}
