import numpy as np
import pytest

from qodelab.qubo import NumberEncoding
from qodelab.rk import (
    classical_rk_step,
    crank_nicolson,
    explicit_euler,
    gauss_legendre,
    model_system,
    riccati_system,
    scalar_linear_system,
)
from qodelab.solvers import AnnealSchedule, make_solver
from qodelab.variational import initial_offsets, integrate_qubo, variational_rk_step


def test_initial_offsets_centre_windows():
    sys_, tbl = model_system(), gauss_legendre(2)
    d = initial_offsets(sys_, tbl, [1.0, 0.0], 3, 1.0)
    # f(1, 0) = (0, -1), half window 2**(3-1-1) = 2
    np.testing.assert_allclose(d, [-2, -3, -2, -3, -1, -2])


def test_window_schedule():
    _, st = variational_rk_step(model_system(), explicit_euler(), 0.5, [1.0, 0.0], iterations=15)
    assert st.k == pytest.approx(8.5)
    assert [r.k for r in st.history] == pytest.approx(1 + 0.5 * np.arange(15))
    assert all(r.span_ok for r in st.history)
    for r in st.history:
        for d, g in zip(r.d, r.g):
            assert NumberEncoding(3, r.k, float(d)).contains(float(g))


def test_representable_target_is_hit_exactly():
    # u = 0.5, lam = -1, dt = 0.5: K = -0.5, u' = 0.25, both on every grid from k=2 on
    sys_ = scalar_linear_system(-1.0)
    u, st = variational_rk_step(sys_, explicit_euler(), 0.5, [0.5], n=3, k0=2, iterations=3)
    assert u[0] == 0.25
    assert st.errors[-1] == 0


def test_error_invariant_linear():
    sys_, tbl = model_system(), gauss_legendre(3)
    _, st = variational_rk_step(sys_, tbl, 0.5, [1.0, 0.0], n=3, iterations=12)
    errs = st.errors
    for i in range(1, len(errs)):
        floor = st.n * 2.0 ** -st.history[i].k
        assert errs[i] <= max(errs[i - 1], floor) + 1e-12
    assert errs[-1] <= 2 * 2.0 ** -st.k


def test_reference_defaults_to_newton():
    sys_, tbl = model_system(), crank_nicolson()
    _, st = variational_rk_step(sys_, tbl, 0.5, [0.3, -0.2], iterations=2)
    np.testing.assert_allclose(st.reference, classical_rk_step(sys_, tbl, [0.3, -0.2], 0.5)[0])


def test_riccati_equilibrium_and_flag():
    res = integrate_qubo(riccati_system(), crank_nicolson(), 0.5, [0.0], 5, n=2, iterations=6)
    assert np.all(res.trajectory.states == 0)
    assert all(st.non_convex for st in res.steps)
    _, st = variational_rk_step(model_system(), explicit_euler(), 0.5, [0.0, 0.0], iterations=1)
    assert not st.non_convex


def test_integrate_zero_steps_and_times():
    res = integrate_qubo(model_system(), explicit_euler(), 0.5, [1.0, 0.0], 0)
    assert res.trajectory.states.shape == (1, 2)
    res = integrate_qubo(model_system(), explicit_euler(), 0.25, [1.0, 0.0], 3, iterations=4)
    np.testing.assert_allclose(res.trajectory.times, [0, 0.25, 0.5, 0.75])


def test_sa_solver_plugs_in():
    sa = make_solver("sa", AnnealSchedule(reads=30, sweeps=100, seed=3))
    u, st = variational_rk_step(model_system(), explicit_euler(), 0.5, [1.0, 0.0], solver=sa, n=2, iterations=8)
    assert st.errors[-1] < 0.1
    assert u.shape == (2,)


@pytest.mark.parametrize("kw", [{"iterations": 0}, {"c": 0.0}, {"c": -1}])
def test_argument_checks(kw):
    with pytest.raises(ValueError):
        variational_rk_step(model_system(), explicit_euler(), 0.5, [1.0, 0.0], **kw)
