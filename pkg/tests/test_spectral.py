import numpy as np
import pytest

from qodelab.qubo import Qubo
from qodelab.solvers import ProblemTooLargeError, solve_exact
from qodelab.spectral import (
    _PathHamiltonian,
    adiabatic_gap_scan,
    gap_lower_bound,
    gap_scaling_experiment,
    qubo_spectrum_gap,
    scalar_gap_problem,
)


def test_static_gap_examples():
    assert qubo_spectrum_gap(Qubo(np.array([5.0]), np.zeros((1, 1)))) == 5
    assert qubo_spectrum_gap(Qubo(np.array([1.0, 1.0]), np.zeros((2, 2)))) == 1
    # degenerate ground states are skipped
    assert qubo_spectrum_gap(Qubo(np.array([0.0, 2.0]), np.zeros((2, 2)))) == 2
    with pytest.raises(ValueError):
        qubo_spectrum_gap(Qubo(np.zeros(0), np.zeros((0, 0))))


def test_single_qubit_path_analytic():
    h = 0.7
    scan = adiabatic_gap_scan(Qubo(np.array([h]), np.zeros((1, 1))), grid=21, refine=0)
    a, b = 0.5 * (1 - scan.s), scan.s * h
    # matrix [[a, -a], [-a, a + b]]
    expect = np.sqrt(b ** 2 + 4 * a ** 2)
    np.testing.assert_allclose(scan.gap, expect, atol=1e-8)
    assert scan.gap[0] == pytest.approx(1.0)
    assert scan.gap[-1] == pytest.approx(h)


def test_sparse_and_dense_agree(rng):
    q = Qubo(rng.normal(size=11), rng.normal(size=(11, 11)))
    H = _PathHamiltonian(q)
    vals = np.linalg.eigvalsh(H.dense(0.4))[:2]
    np.testing.assert_allclose(H.lowest_two(0.4), vals, atol=1e-8)
    v = rng.normal(size=H.dim)
    np.testing.assert_allclose(H.dense(0.0) @ v, H.mixer_apply(v), atol=1e-12)


def test_scan_limits():
    with pytest.raises(ProblemTooLargeError):
        adiabatic_gap_scan(Qubo(np.zeros(13), np.zeros((13, 13))))
    with pytest.raises(ValueError):
        adiabatic_gap_scan(Qubo(np.zeros(1), np.zeros((1, 1))), grid=1)


def test_euler_gap_is_dx_squared():
    for n in (1, 2, 3, 4):
        dx = 2.0 ** -n
        for dt in (0.1, 1e-6):
            q = scalar_gap_problem("euler", dx, dt).qubo
            assert q.num_vars == 2 * n
            assert qubo_spectrum_gap(q) == pytest.approx(dx * dx, abs=1e-12)


def test_gap_problem_optimum_is_zero():
    prob = scalar_gap_problem("crank-nicolson", 0.25, 0.1)
    sol = solve_exact(prob.qubo)
    K, u = prob.decode(sol.bits)
    assert sol.energy == pytest.approx(0, abs=1e-12)
    np.testing.assert_array_equal(K, 0)
    np.testing.assert_array_equal(u, 0)
    with pytest.raises(ValueError):
        scalar_gap_problem("euler", 0.3, 0.1)


def test_lower_bound_and_experiment():
    assert gap_lower_bound(0.5, 0.1, 0.5) == pytest.approx(min(0.25 * 0.81, 0.01 * 0.25 * 0.25))
    tab = gap_scaling_experiment("crank-nicolson", [0.5, 0.25], [0.1, 1e-6], grid=31)
    assert len(tab.rows) == 4
    for r in tab.rows:
        assert r.gap_adiabatic >= r.bound - 1e-12
        assert r.gap_adiabatic <= r.gap_qubo + 1e-9
    small, tiny = tab.column("gap_adiabatic", 0.1), tab.column("gap_adiabatic", 1e-6)
    assert np.all(small < tiny)
    with pytest.raises(ValueError):
        gap_scaling_experiment("rk4", [0.5], [0.1])
