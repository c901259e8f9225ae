import numpy as np
import pytest

from qodelab.qubo import NumberEncoding, Qubo, build_rk_problem, encode_registers
from qodelab.rk import classical_rk_step, crank_nicolson, explicit_euler, model_system, scalar_linear_system
from qodelab.solvers import (
    AnnealSchedule,
    ProblemTooLargeError,
    bits_of,
    make_solver,
    solve_exact,
    solve_sa,
)


def test_exact_examples(backend):
    s = solve_exact(Qubo(np.array([1.0]), np.zeros((1, 1))), backend)
    assert list(s.bits) == [0] and s.energy == 0
    q = Qubo(np.array([-1.0, -1.0]), np.array([[0, 3.0], [3.0, 0]]))
    s = solve_exact(q, backend)
    assert s.energy == -1 and s.index == 1 and list(s.bits) == [1, 0]


def test_exact_model_euler_on_grid(backend):
    # u = (0.5, -0.25), dt = 0.5: K = f(u) = (-0.25, -0.5), u' = (0.375, -0.5)
    sys_, tbl = model_system(), explicit_euler()
    u = np.array([0.5, -0.25])
    encs = encode_registers(3, 3, -0.5, 4)
    prob = build_rk_problem(sys_, tbl, 0.5, u, encs)
    s = solve_exact(prob.qubo, backend)
    K, un = prob.decode(s.bits)
    ref, Kref = classical_rk_step(sys_, tbl, u, 0.5)
    np.testing.assert_allclose(un, ref)
    np.testing.assert_allclose(K, Kref)


def test_exact_size_limit():
    with pytest.raises(ProblemTooLargeError):
        solve_exact(Qubo(np.zeros(27), np.zeros((27, 27))))
    assert solve_exact(Qubo(np.zeros(0), np.zeros((0, 0)), 2.0)).energy == 2.0


def test_energy_is_recomputed(rng):
    q = Qubo(rng.normal(size=10), rng.normal(size=(10, 10)), 0.3)
    for s in (solve_exact(q), solve_sa(q)):
        assert s.energy == q.energy(s.bits)


def test_schedule_validation():
    with pytest.raises(ValueError):
        AnnealSchedule(reads=0)
    with pytest.raises(ValueError):
        AnnealSchedule(beta_start=2, beta_end=1)
    b = AnnealSchedule(sweeps=3, beta_start=1, beta_end=4).betas()
    np.testing.assert_allclose(b, [1, 2, 4])


def test_sa_zero_problem():
    s = solve_sa(Qubo(np.zeros(3), np.zeros((3, 3))))
    assert s.energy == 0


def test_sa_frustrated_triangle():
    J = np.ones((3, 3)) - np.eye(3)
    s = solve_sa(Qubo(np.zeros(3), J))
    assert s.energy == 0 and s.bits.sum() <= 1


def test_sa_convex_linear_problem():
    prob = build_rk_problem(scalar_linear_system(-1.0), explicit_euler(), 0.5, [0.5],
                            [NumberEncoding(3, 3, -0.5), NumberEncoding(3, 3, 0.0)])
    assert prob.qubo.num_vars == 6
    assert solve_sa(prob.qubo, AnnealSchedule(reads=100)).energy == pytest.approx(solve_exact(prob.qubo).energy)


def test_sa_never_below_exact_and_mostly_equal():
    rng = np.random.default_rng(2024)
    hits, trials = 0, 100
    for _ in range(trials):
        h = rng.normal(size=12)
        J = rng.normal(size=(12, 12))
        q = Qubo(h, J)
        ex, sa = solve_exact(q), solve_sa(q)
        assert sa.energy >= ex.energy - 1e-12
        hits += sa.energy <= ex.energy + 1e-9
    assert hits / trials >= 0.95


def test_sa_deterministic_and_backend_identical(rng):
    q = Qubo(rng.normal(size=9), rng.normal(size=(9, 9)))
    sched = AnnealSchedule(reads=10, sweeps=50, seed=7)
    a = solve_sa(q, sched, "python")
    b = solve_sa(q, sched)
    np.testing.assert_array_equal(a.bits, b.bits)


def test_make_solver():
    q = Qubo(np.array([-1.0]), np.zeros((1, 1)))
    assert make_solver("exact")(q).energy == -1
    assert make_solver("sa", AnnealSchedule(reads=2, sweeps=5))(q).energy == -1
    with pytest.raises(ValueError):
        make_solver("quantum")
    assert list(bits_of(6, 4)) == [0, 1, 1, 0]


def test_exact_on_cn_problem_matches_objective_min():
    prob = build_rk_problem(model_system(), crank_nicolson(), 0.5, [0.2, 0.1], encode_registers(2, 2, -0.5, 6))
    X = np.array([bits_of(i, 12) for i in range(1 << 12)])
    assert solve_exact(prob.qubo).energy == pytest.approx(prob.qubo.energies(X).min(), abs=1e-12)
