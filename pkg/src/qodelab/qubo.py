"""Compile one Runge-Kutta step of a polynomial ODE into a QUBO.

Each unknown (the stage values K[o, j] and the next state u'[j]) lives in an
n-bit register decoded as ``2**-k * sum_i 2**i s_i + d``.  The squared
residuals of the closure and stage equations are expanded into a multilinear
polynomial over the bits, reduced to degree two by Rosenberg substitution and
stored as linear fields ``h`` plus symmetric couplings ``J``.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np

from .rk import ButcherTable, OdeSystem, eval_rhs

ZERO_TOL = 1e-12
StageForm = Literal["rk", "split"]

Term = tuple[int, ...]


@dataclass(frozen=True)
class NumberEncoding:
    n: int
    k: float
    d: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a register needs at least one bit")

    @property
    def resolution(self) -> float:
        return 2.0 ** -self.k

    @property
    def span(self) -> tuple[float, float]:
        return self.d, self.d + self.resolution * ((1 << self.n) - 1)

    def weights(self) -> np.ndarray:
        # power-of-two multiples of the resolution, so decode is exact on the grid
        return self.resolution * 2.0 ** np.arange(self.n)

    def decode(self, bits: Sequence[int]) -> float:
        return float(np.dot(self.weights(), np.asarray(bits, dtype=float)) + self.d)

    def decode_int(self, m: int) -> float:
        return m * self.resolution + self.d

    def values(self) -> np.ndarray:
        return self.d + self.resolution * np.arange(1 << self.n)

    def encode(self, x: float) -> list[int]:
        """Bits of the grid point nearest ``x``; raises outside the span."""
        m = int(math.floor((x - self.d) / self.resolution + 0.5))
        if not 0 <= m < 1 << self.n:
            raise ValueError(f"{x} lies outside the register span {self.span}")
        return [(m >> i) & 1 for i in range(self.n)]

    def contains(self, x: float, slack: float = 1e-12) -> bool:
        lo, hi = self.span
        return lo - slack <= x <= hi + slack


def encode_registers(n: int, k: float, d: float, count: int) -> list[NumberEncoding]:
    return [NumberEncoding(n, k, d) for _ in range(count)]


class BinaryPolynomial:
    """Multilinear polynomial over 0/1 variables (s**2 == s is applied on multiplication)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Iterable[int], float] | None = None):
        self.terms: dict[Term, float] = {}
        for key, c in (terms or {}).items():
            t = tuple(sorted(set(key)))
            self.terms[t] = self.terms.get(t, 0.0) + float(c)

    @classmethod
    def constant(cls, c: float) -> "BinaryPolynomial":
        return cls({(): c})

    @classmethod
    def register(cls, enc: NumberEncoding, first_var: int) -> "BinaryPolynomial":
        p = cls({(first_var + i,): w for i, w in enumerate(enc.weights())})
        p.terms[()] = p.terms.get((), 0.0) + enc.d
        return p

    def copy(self) -> "BinaryPolynomial":
        out = BinaryPolynomial()
        out.terms = dict(self.terms)
        return out

    def __add__(self, other) -> "BinaryPolynomial":
        out = self.copy()
        if isinstance(other, BinaryPolynomial):
            for t, c in other.terms.items():
                out.terms[t] = out.terms.get(t, 0.0) + c
        else:
            out.terms[()] = out.terms.get((), 0.0) + float(other)
        return out

    __radd__ = __add__

    def __neg__(self) -> "BinaryPolynomial":
        return self * -1.0

    def __sub__(self, other) -> "BinaryPolynomial":
        return self + (-other)

    def __rsub__(self, other) -> "BinaryPolynomial":
        return (-self) + other

    def __mul__(self, other) -> "BinaryPolynomial":
        if not isinstance(other, BinaryPolynomial):
            out = BinaryPolynomial()
            out.terms = {t: c * float(other) for t, c in self.terms.items()}
            return out
        out: dict[Term, float] = {}
        for t1, c1 in self.terms.items():
            for t2, c2 in other.terms.items():
                key = t1 if not t2 else t2 if not t1 else tuple(sorted(set(t1).union(t2)))
                out[key] = out.get(key, 0.0) + c1 * c2
        res = BinaryPolynomial()
        res.terms = out
        return res

    __rmul__ = __mul__

    def square(self) -> "BinaryPolynomial":
        return self * self

    def pruned(self, rel_tol: float = ZERO_TOL) -> "BinaryPolynomial":
        """Drop coefficients below ``rel_tol`` times the largest magnitude."""
        if not self.terms:
            return BinaryPolynomial()
        scale = max(abs(c) for c in self.terms.values())
        out = BinaryPolynomial()
        out.terms = {t: c for t, c in self.terms.items() if abs(c) > rel_tol * scale}
        return out

    @property
    def degree(self) -> int:
        return max((len(t) for t in self.terms), default=0)

    def variables(self) -> set[int]:
        return {v for t in self.terms for v in t}

    def evaluate(self, bits: Sequence[int]) -> float:
        return sum(c for t, c in self.terms.items() if all(bits[v] for v in t))

    def __repr__(self) -> str:
        return f"BinaryPolynomial({len(self.terms)} terms, degree {self.degree})"


@dataclass
class Qubo:
    """E(s) = offset + h.s + sum_{i<j} J[i, j] s_i s_j with J symmetric, zero diagonal."""

    h: np.ndarray
    J: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)
        J = np.asarray(self.J, dtype=float)
        n = self.h.shape[0]
        if J.shape != (n, n):
            raise ValueError(f"J has shape {J.shape}, expected {(n, n)}")
        J = np.triu(J, 1)
        self.J = J + J.T
        self.offset = float(self.offset)

    @property
    def num_vars(self) -> int:
        return self.h.shape[0]

    @classmethod
    def from_polynomial(cls, p: BinaryPolynomial, num_vars: int | None = None) -> "Qubo":
        if p.degree > 2:
            raise ValueError(f"polynomial has degree {p.degree}; quadratize it first")
        n = num_vars if num_vars is not None else max(p.variables(), default=-1) + 1
        h, J, offset = np.zeros(n), np.zeros((n, n)), 0.0
        for t, c in p.terms.items():
            if len(t) == 0:
                offset += c
            elif len(t) == 1:
                h[t[0]] += c
            else:
                J[t[0], t[1]] += c
        return cls(h, J, offset)

    def to_polynomial(self) -> BinaryPolynomial:
        terms: dict = {(): self.offset}
        for i in np.flatnonzero(self.h):
            terms[(int(i),)] = self.h[i]
        for i, j in zip(*np.nonzero(np.triu(self.J, 1))):
            terms[(int(i), int(j))] = self.J[i, j]
        return BinaryPolynomial(terms)

    def energy(self, bits) -> float:
        x = np.asarray(bits, dtype=float)
        return float(self.offset + self.h @ x + 0.5 * x @ self.J @ x)

    def energies(self, X: np.ndarray) -> np.ndarray:
        """Energies for the rows of a 0/1 matrix."""
        X = np.asarray(X, dtype=float)
        return self.offset + X @ self.h + 0.5 * np.einsum("ij,jk,ik->i", X, self.J, X)

    def max_abs_coefficient(self) -> float:
        return float(max(np.max(np.abs(self.h), initial=0.0), np.max(np.abs(self.J), initial=0.0)))

    def scaled(self, factor: float) -> "Qubo":
        return Qubo(self.h * factor, self.J * factor, self.offset * factor)

    def to_sparse_text(self) -> str:
        """One ``i j value`` row per nonzero coefficient; ``i == j`` rows carry h."""
        lines = [f"# variables {self.num_vars}", f"# offset {float(self.offset)!r}"]
        for i in range(self.num_vars):
            if self.h[i] != 0.0:
                lines.append(f"{i} {i} {float(self.h[i])!r}")
            for j in range(i + 1, self.num_vars):
                if self.J[i, j] != 0.0:
                    lines.append(f"{i} {j} {float(self.J[i, j])!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_sparse_text(cls, text: str) -> "Qubo":
        n, offset, rows = None, 0.0, []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts[0] == "variables":
                    n = int(parts[1])
                elif parts[0] == "offset":
                    offset = float(parts[1])
                continue
            i, j, v = line.split()
            rows.append((int(i), int(j), float(v)))
        if n is None:
            n = max((max(i, j) for i, j, _ in rows), default=-1) + 1
        h, J = np.zeros(n), np.zeros((n, n))
        for i, j, v in rows:
            if i == j:
                h[i] += v
            else:
                J[min(i, j), max(i, j)] += v
        return cls(h, J, offset)


@dataclass(frozen=True)
class Reduction:
    aux: int
    pair: tuple[int, int]
    penalty: float


@dataclass
class ReductionMap:
    reductions: list[Reduction] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.reductions)

    def __iter__(self):
        return iter(self.reductions)

    def extend_assignment(self, bits: Sequence[int]) -> list[int]:
        """Append consistent auxiliary bits (y = s_i s_j) to an assignment of the original variables."""
        out = list(bits)
        for r in self.reductions:
            while len(out) <= r.aux:
                out.append(0)
            out[r.aux] = out[r.pair[0]] & out[r.pair[1]]
        return out

    def consistent(self, bits: Sequence[int]) -> bool:
        return all(bits[r.aux] == (bits[r.pair[0]] & bits[r.pair[1]]) for r in self.reductions)


def quadratize(
    p: BinaryPolynomial,
    penalty: float | str = "auto",
    num_vars: int | None = None,
) -> tuple[Qubo, ReductionMap]:
    """Reduce ``p`` to degree two by substituting s_i s_j -> y, most frequent pair first.

    Each substitution adds ``P (s_i s_j - 2 s_i y - 2 s_j y + 3 y)``, which is
    zero when y = s_i s_j and at least P otherwise.  The automatic weight
    P = 2 * sum |c| exceeds anything a violated substitution could gain.
    """
    n0 = num_vars if num_vars is not None else max(p.variables(), default=-1) + 1
    if penalty == "auto":
        P = 2.0 * sum(abs(c) for t, c in p.terms.items() if t)
    else:
        P = float(penalty)
    if P <= 0 and p.degree > 2:
        raise ValueError("penalty weight must be positive")
    terms = dict(p.terms)
    rmap = ReductionMap()
    next_var = n0
    while True:
        high = [t for t in terms if len(t) >= 3]
        if not high:
            break
        counts: Counter = Counter()
        for t in high:
            counts.update(combinations(t, 2))
        best = max(counts.values())
        i, j = min(pair for pair, cnt in counts.items() if cnt == best)
        y = next_var
        next_var += 1
        for t in high:
            if i in t and j in t:
                c = terms.pop(t)
                key = tuple(sorted([v for v in t if v not in (i, j)] + [y]))
                terms[key] = terms.get(key, 0.0) + c
        for key, c in (((i, j), P), ((i, y), -2 * P), ((j, y), -2 * P), ((y,), 3 * P)):
            terms[key] = terms.get(key, 0.0) + c
        rmap.reductions.append(Reduction(y, (i, j), P))
    reduced = BinaryPolynomial()
    reduced.terms = terms
    return Qubo.from_polynomial(reduced, next_var), rmap


def connectivity_count(q: Qubo) -> int:
    """Number of nonzero couplings J[i, j] with i < j."""
    return int(np.count_nonzero(np.triu(q.J, 1)))


def worst_case_connectivity(n: int, s: int, N: int) -> int:
    """Closed-form connection count n - 1 + s^2 N^2 n/2 + s N n/2 - s N."""
    val = n - 1 + s * s * N * N * n / 2 + s * N * n / 2 - s * N
    return int(round(val))


def dense_linear_connectivity(n: int, s: int, N: int) -> int:
    """Exact coupling count of the linear-system QUBO when A and L are dense.

    Every register couples all of its own bit pairs, every pair of stage
    registers couples all n*n bit pairs, and each next-state register couples
    with the s stage registers of its own component.
    """
    self_pairs = (s + 1) * N * n * (n - 1) // 2
    stage_pairs = n * n * (s * N) * (s * N - 1) // 2
    closure_pairs = n * n * s * N
    return self_pairs + stage_pairs + closure_pairs


def dense_linear_problem(n: int, s: int, N: int, dt: float = 0.5, seed: int = 0) -> "RkQuboProblem":
    """RK QUBO of a linear system with a dense random matrix and a dense s-stage Gauss table."""
    from .rk import OdeSystem, gauss_legendre

    rng = np.random.default_rng(seed)
    L = rng.uniform(0.5, 1.5, (N, N)) * rng.choice([-1.0, 1.0], (N, N))
    sys = OdeSystem((np.zeros(N), L), f"dense-linear({N})")
    encs = [NumberEncoding(n, 1.0, -1.0) for _ in range((s + 1) * N)]
    return build_rk_problem(sys, gauss_legendre(s), dt, rng.uniform(-1, 1, N), encs)


def normalize_qubo(q: Qubo) -> Qubo:
    """Scale by one positive factor so every h and J entry lies in [-1, 1]."""
    m = q.max_abs_coefficient()
    if m == 0.0:
        raise ValueError("cannot normalize an all-zero QUBO")
    return q.scaled(1.0 / m)


def _apply_rhs(sys: OdeSystem, Y: Sequence[BinaryPolynomial | float]) -> list[BinaryPolynomial]:
    """f evaluated on register polynomials."""
    polys = [y if isinstance(y, BinaryPolynomial) else BinaryPolynomial.constant(y) for y in Y]
    out = [BinaryPolynomial() for _ in range(sys.N)]
    for deg, T in enumerate(sys.tensors):
        for idx in zip(*np.nonzero(T)):
            term = BinaryPolynomial.constant(T[idx])
            for k in idx[1:]:
                term = term * polys[k]
            out[idx[0]] = out[idx[0]] + term
    return out


@dataclass
class RkQuboProblem:
    sys: OdeSystem
    tbl: ButcherTable
    dt: float
    u_now: np.ndarray
    encodings: list[NumberEncoding]
    objective: BinaryPolynomial
    qubo: Qubo
    reduction: ReductionMap
    stage_form: str = "rk"

    @property
    def num_registers(self) -> int:
        return (self.tbl.s + 1) * self.sys.N

    @property
    def num_main_vars(self) -> int:
        return sum(e.n for e in self.encodings)

    @property
    def num_aux(self) -> int:
        return len(self.reduction)

    def register_offsets(self) -> list[int]:
        return list(np.cumsum([0] + [e.n for e in self.encodings])[:-1])

    def stage_register(self, o: int, j: int) -> int:
        return o * self.sys.N + j

    def next_register(self, j: int) -> int:
        return self.tbl.s * self.sys.N + j

    def decode(self, bits: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        """(K, u_next) from an assignment (auxiliary bits ignored)."""
        vals = []
        for off, enc in zip(self.register_offsets(), self.encodings):
            vals.append(enc.decode(bits[off:off + enc.n]))
        s, N = self.tbl.s, self.sys.N
        vals = np.array(vals)
        return vals[: s * N].reshape(s, N), vals[s * N:]

    def register_values(self, bits: Sequence[int]) -> np.ndarray:
        K, u = self.decode(bits)
        return np.concatenate([K.ravel(), u])

    def objective_value(self, K, u_next) -> float:
        """The real-valued squared residual at arbitrary (K, u_next)."""
        return rk_residual_norm(self.sys, self.tbl, self.dt, self.u_now, K, u_next, self.stage_form)

    def metadata(self) -> dict:
        return {
            "system": self.sys.name,
            "scheme": self.tbl.name,
            "dt": self.dt,
            "u_now": [float(x) for x in self.u_now],
            "stage_form": self.stage_form,
            "registers": [
                {"index": r, "n": e.n, "k": e.k, "d": e.d, "first_var": int(off)}
                for r, (e, off) in enumerate(zip(self.encodings, self.register_offsets()))
            ],
            "num_vars": self.qubo.num_vars,
            "num_aux": self.num_aux,
            "reductions": [
                {"aux": r.aux, "pair": list(r.pair), "penalty": r.penalty} for r in self.reduction
            ],
            "connections": connectivity_count(self.qubo),
        }

    def to_json(self) -> str:
        return json.dumps(self.metadata(), indent=2)


def rk_residual_norm(sys, tbl, dt, u_now, K, u_next, stage_form: StageForm = "rk") -> float:
    u_now = np.asarray(u_now, dtype=float)
    K = np.asarray(K, dtype=float).reshape(tbl.s, sys.N)
    r_close = np.asarray(u_next) - u_now - dt * tbl.b @ K
    if stage_form == "rk":
        Y = u_now[None, :] + dt * tbl.A @ K
        r_stage = K - np.array([eval_rhs(sys, y) for y in Y])
    else:
        fK = np.array([eval_rhs(sys, k) for k in K])
        r_stage = K - eval_rhs(sys, u_now)[None, :] - dt * tbl.A @ fK
    return float(np.sum(r_close ** 2) + np.sum(r_stage ** 2))


def build_rk_objective(
    sys: OdeSystem,
    tbl: ButcherTable,
    dt: float,
    u_now,
    encodings: Sequence[NumberEncoding],
    stage_form: StageForm = "rk",
) -> BinaryPolynomial:
    """Sum of squared closure and stage residuals over the register bits.

    Registers are ordered stage-major (K[0, :], ..., K[s-1, :]) followed by the
    next state.  ``stage_form="rk"`` uses K_o = f(u + dt sum_e A[o, e] K_e);
    ``"split"`` uses the split form K_o = f(u) + dt sum_e A[o, e] f(K_e),
    which coincides with it for homogeneous linear systems.
    """
    u_now = np.asarray(u_now, dtype=float)
    s, N = tbl.s, sys.N
    if u_now.shape != (N,):
        raise ValueError(f"state has shape {u_now.shape}, system expects ({N},)")
    if len(encodings) != (s + 1) * N:
        raise ValueError(f"need {(s + 1) * N} register encodings, got {len(encodings)}")
    regs, off = [], 0
    for enc in encodings:
        regs.append(BinaryPolynomial.register(enc, off))
        off += enc.n
    K = [[regs[o * N + j] for j in range(N)] for o in range(s)]
    u_next = regs[s * N:]

    total = BinaryPolynomial()
    for j in range(N):
        r = u_next[j] - float(u_now[j])
        for o in range(s):
            if tbl.b[o] != 0.0:
                r = r - K[o][j] * (dt * tbl.b[o])
        total = total + r.square()

    f_now = eval_rhs(sys, u_now)
    fK = [_apply_rhs(sys, K[e]) for e in range(s)] if stage_form == "split" else None
    for o in range(s):
        if stage_form == "rk":
            Y = []
            for k in range(N):
                y = BinaryPolynomial.constant(float(u_now[k]))
                for e in range(s):
                    if tbl.A[o, e] != 0.0:
                        y = y + K[e][k] * (dt * tbl.A[o, e])
                Y.append(y)
            f_stage = _apply_rhs(sys, Y)
        elif stage_form == "split":
            f_stage = [BinaryPolynomial.constant(float(f_now[j])) for j in range(N)]
            for e in range(s):
                if tbl.A[o, e] != 0.0:
                    f_stage = [f_stage[j] + fK[e][j] * (dt * tbl.A[o, e]) for j in range(N)]
        else:
            raise ValueError(f"unknown stage form {stage_form!r}")
        for j in range(N):
            total = total + (K[o][j] - f_stage[j]).square()
    return total.pruned()


def build_rk_problem(
    sys: OdeSystem,
    tbl: ButcherTable,
    dt: float,
    u_now,
    encodings: Sequence[NumberEncoding],
    stage_form: StageForm = "rk",
    penalty: float | str = "auto",
) -> RkQuboProblem:
    objective = build_rk_objective(sys, tbl, dt, u_now, encodings, stage_form)
    n_main = sum(e.n for e in encodings)
    qubo, rmap = quadratize(objective, penalty, num_vars=n_main)
    return RkQuboProblem(sys, tbl, dt, np.asarray(u_now, dtype=float), list(encodings),
                         objective, qubo, rmap, stage_form)
