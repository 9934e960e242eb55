import numpy as np
import pytest

from hbvm.problems import (
    FirstOrderProblem,
    InitialData,
    KthOrderProblem,
    SecondOrderGeneralProblem,
    SecondOrderSpecialProblem,
    UnknownProblemError,
    builtin,
    registry_names,
)

ALL = registry_names()


def _grad(fun, z, step=1e-5):
    g = np.empty_like(z)
    for i in range(z.size):
        e = np.zeros_like(z)
        e[i] = step
        g[i] = (fun(z + e) - fun(z - e)) / (2 * step)
    return g


def _random_state(problem, rng):
    z0 = np.concatenate(problem.initial.derivs)
    return z0 + 0.1 * rng.standard_normal(z0.size)


def test_registry_contents():
    assert set(ALL) >= {"harmonic", "henon-heiles", "kepler", "pendulum", "vdpol-2nd", "linear-3rd"}


def test_unknown_name_lists_registry():
    with pytest.raises(UnknownProblemError, match="harmonic"):
        builtin("nope")


def test_classes():
    assert isinstance(builtin("harmonic"), SecondOrderSpecialProblem)
    assert isinstance(builtin("henon-heiles"), FirstOrderProblem) and builtin("henon-heiles").dim == 4
    assert isinstance(builtin("kepler"), SecondOrderSpecialProblem) and builtin("kepler").dim == 2
    assert isinstance(builtin("vdpol-2nd"), SecondOrderGeneralProblem)
    p = builtin("linear-3rd")
    assert isinstance(p, KthOrderProblem) and p.order == 3


def test_harmonic_definition():
    p = builtin("harmonic")
    np.testing.assert_array_equal(p.rhs(np.array([0.3]), np.array([0.0])), [-0.3])
    assert p.energy(np.array([0.6]), np.array([0.8])) == pytest.approx(0.5)
    y, v = p.solution(0.7, InitialData(([2.0], [3.0])))
    assert y[0] == pytest.approx(2 * np.cos(0.7) + 3 * np.sin(0.7))


HAMILTONIAN = [n for n in ALL if builtin(n).as_first_order().skew is not None]


def test_hamiltonian_problems_found():
    assert set(HAMILTONIAN) == {"harmonic", "henon-heiles", "kepler", "pendulum"}


@pytest.mark.parametrize("name", HAMILTONIAN)
def test_canonical_structure(name):
    """f = J grad H on 100 random states for every Hamiltonian problem."""
    first = builtin(name).as_first_order()
    rng = np.random.default_rng(0)
    for _ in range(100):
        z = _random_state(first, rng)
        f = first.rhs(z)
        assert np.max(np.abs(f - first.skew @ _grad(first.energy, z))) < 1e-6 * (1 + np.max(np.abs(f)))


def test_henon_heiles_gradient():
    p = builtin("henon-heiles")
    z = np.array([0.1, -0.2, 0.3, 0.05])
    grad = _grad(p.energy, z)
    np.testing.assert_allclose(p.rhs(z), p.skew @ grad, atol=1e-9)


@pytest.mark.parametrize("name", [n for n in ALL if builtin(n).solution is not None])
def test_analytic_solutions_satisfy_ode(name):
    p = builtin(name)
    init = p.initial
    eps = 1e-4
    for t in np.linspace(0.05, 5.0, 50):
        cur = p.solution(t, init)
        fwd = p.solution(t + eps, init)
        bwd = p.solution(t - eps, init)
        # each level differentiates into the next; the top level into f
        for i in range(p.order):
            deriv = (fwd[i] - bwd[i]) / (2 * eps)
            target = cur[i + 1] if i + 1 < p.order else p.rhs(*cur)
            assert np.max(np.abs(deriv - target)) < 1e-8 * 10 * (1 + np.max(np.abs(target)))


def test_analytic_solutions_start_at_initial_data():
    for name in ALL:
        p = builtin(name)
        if p.solution is None:
            continue
        for a, b in zip(p.solution(p.initial.t0, p.initial), p.initial.derivs):
            np.testing.assert_allclose(a, b, atol=1e-15)


@pytest.mark.parametrize("name", ALL)
def test_analytic_jacobians_match_finite_differences(name):
    p = builtin(name)
    levels = p.initial.derivs
    analytic = p.level_jacobians(*levels)
    stripped = type(p)(**{**{f: getattr(p, f) for f in p.__dataclass_fields__}, "jac": None})
    numeric = stripped.level_jacobians(*levels)
    for A, N in zip(analytic, numeric):
        np.testing.assert_allclose(A, N, atol=1e-6)


def test_companion_form():
    p = builtin("linear-3rd")
    first = p.as_first_order()
    z = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(first.rhs(z), [2.0, 3.0, -2.0])
    assert first.dim == 3 and first.skew is None


def test_kepler_energy_and_eccentricity():
    p = builtin("kepler")
    assert p.evaluate_energy(*p.initial.derivs) == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        builtin("kepler", eccentricity=1.0)


def test_initial_data_validation():
    with pytest.raises(ValueError):
        InitialData(([1.0, 2.0], [1.0]))
    with pytest.raises(ValueError):
        builtin("harmonic").check_initial(InitialData(([1.0],)))
    with pytest.raises(ValueError):
        KthOrderProblem(f=lambda y: y, order=0, dim=1)
