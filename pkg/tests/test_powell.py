import numpy as np
import pytest
from scipy import optimize

from oxqnn.errors import InvalidArgumentError, NumericalError
from oxqnn.powell import OptimizerSettings, bracket_minimum, brent_minimize, powell_minimize


def rosenbrock(x):
    return 100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2


def test_shifted_quadratic():
    r = powell_minimize(lambda x: (x[0] - 3) ** 2 + (x[1] + 1) ** 2, [0.0, 0.0])
    np.testing.assert_allclose(r.x, [3, -1], atol=1e-4)
    assert r.converged


def test_sphere_10d():
    r = powell_minimize(lambda x: float(np.sum(x ** 2)), np.linspace(-2, 3, 10))
    assert r.fun < 1e-8


def test_rosenbrock_matches_reference():
    r = powell_minimize(rosenbrock, [-1.2, 1.0])
    assert r.fun < 1e-4
    assert r.iterations <= 500
    # independent reference minimizer: same basin, same minimizer
    ref = optimize.minimize(rosenbrock, [-1.2, 1.0], method="Nelder-Mead",
                            options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 5000})
    np.testing.assert_allclose(r.x, ref.x, atol=1e-3)


def test_never_worse_than_start_and_trace_monotone():
    rng = np.random.default_rng(4)
    a = rng.normal(size=(6, 6))
    f = lambda x: float(np.sum(np.cos(a @ x)) + 0.1 * x @ x)  # noqa: E731
    x0 = rng.normal(size=6)
    r = powell_minimize(f, x0)
    assert r.fun <= f(x0)
    assert r.trace[0] == f(x0)
    assert all(b <= a for a, b in zip(r.trace, r.trace[1:]))


def test_zero_budget_returns_start():
    x0 = np.array([0.5, -0.5])
    r = powell_minimize(rosenbrock, x0, OptimizerSettings(max_iterations=0))
    np.testing.assert_array_equal(r.x, x0)
    assert r.fun == rosenbrock(x0)
    assert r.iterations == 0 and r.trace == [r.fun]


def test_non_finite_objective():
    with pytest.raises(NumericalError, match="nan"):
        powell_minimize(lambda x: float("nan") if x[0] > 0.5 else x[0] ** 2 - x[0], [0.0])


def test_settings_validation():
    with pytest.raises(InvalidArgumentError):
        OptimizerSettings(relative_tolerance=0)
    with pytest.raises(InvalidArgumentError):
        OptimizerSettings(max_iterations=-1)


def test_line_search_pieces():
    g = lambda t: (t - 2.5) ** 2 + 1  # noqa: E731
    a, b, c, fa, fb, fc = bracket_minimum(g, 0.0, 1.0)
    assert min(a, c) < 2.5 < max(a, c)
    assert fb <= fa and fb <= fc
    x, fx = brent_minimize(g, a, b, c, fb, tol=1e-8)
    assert x == pytest.approx(2.5, abs=1e-6)
    assert fx == pytest.approx(1.0, abs=1e-12)


def test_deterministic():
    a = powell_minimize(rosenbrock, [-1.2, 1.0])
    b = powell_minimize(rosenbrock, [-1.2, 1.0])
    assert a.trace == b.trace and np.array_equal(a.x, b.x)
