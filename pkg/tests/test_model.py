import math

import numpy as np
import pytest

from agediff.errors import EvalError, ParseError, UnknownProblem
from agediff.model import (
    ExactSolution,
    builtin_description,
    builtin_ids,
    builtin_problem,
    exact_weighted_integral,
    problem_from_expressions,
)

E = math.e
DECAY = 1.0 - math.exp(-1.0)


def test_builtin_registry():
    assert builtin_ids() == ["example1", "example2", "example3"]
    for problem_id in builtin_ids():
        assert builtin_description(problem_id)
    with pytest.raises(UnknownProblem, match="example4"):
        builtin_problem("example4")
    with pytest.raises(UnknownProblem):
        builtin_description("nope")


def test_example1_definition():
    problem, exact = builtin_problem("example1")
    assert problem.homogeneous
    assert problem.boundary_value(0.3) == 0.0
    x = np.linspace(0.0, 1.0, 11)
    assert np.array_equal(problem.mortality(x, 5.0), np.ones_like(x))
    assert np.array_equal(problem.fertility(x, 5.0), np.full_like(x, E))
    assert np.allclose(problem.initial(x), E - np.exp(x), rtol=0, atol=0)
    assert problem.initial(np.array([1.0]))[0] == pytest.approx(0.0, abs=1e-15)
    assert exact is not None
    assert np.allclose(exact.u(x, 0.0), problem.initial(x), rtol=1e-15, atol=1e-15)


def test_example2_has_no_exact_solution():
    problem, exact = builtin_problem("example2")
    assert exact is None
    assert problem.homogeneous
    x = np.linspace(0.0, 1.0, 5)
    assert np.allclose(problem.mortality(x, 0.0), 0.5, rtol=0, atol=0)
    assert np.allclose(problem.mortality(x, DECAY), 1.5, rtol=1e-15, atol=0)
    assert np.allclose(problem.fertility(x, 0.0), 2.0 * np.exp(x), rtol=0, atol=0)


def test_example3_definition():
    problem, exact = builtin_problem("example3")
    assert not problem.homogeneous
    x = np.linspace(0.0, 1.0, 5)
    assert np.allclose(problem.mortality(x, DECAY), 2.0, rtol=1e-15, atol=0)
    assert np.allclose(problem.initial(x), np.exp(-x) / 2.0, rtol=0, atol=0)
    for t in (0.0, 0.4, 1.0):
        assert problem.boundary_value(t) == pytest.approx(
            float(exact.u(np.asarray(1.0), t)), rel=1e-15
        )


def test_exact_weighted_integral_oracle_values():
    problem, exact = builtin_problem("example1")
    assert exact_weighted_integral(exact, problem.psi2, 0.0) == pytest.approx(1.0, rel=1e-12)
    # the weighted total decays like e^{-t} for the separable profile
    for t in (0.0, 0.1, 0.5, 1.0):
        integral = exact_weighted_integral(exact, problem.psi2, t)
        assert integral == pytest.approx(math.exp(-t), rel=1e-12)

    problem3, exact3 = builtin_problem("example3")
    assert exact_weighted_integral(exact3, problem3.psi2, 0.0) == pytest.approx(
        (1.0 - math.exp(-1.0)) / 2.0, rel=1e-12
    )


def test_exact_weighted_integral_respects_domain():
    linear = ExactSolution(u=lambda x, t: np.asarray(x, dtype=float) + 0.0 * t, description="x")
    ones = lambda x: np.ones_like(np.asarray(x, dtype=float))
    assert exact_weighted_integral(linear, ones, 0.0, a_dagger=2.0) == pytest.approx(2.0, rel=1e-12)
    assert exact_weighted_integral(linear, ones, 0.0) == pytest.approx(0.5, rel=1e-12)


def test_example1_satisfies_the_birth_law():
    # u(0,t) - u_x(0,t) equals the fertility-weighted population integral
    problem, exact = builtin_problem("example1")
    for t in np.linspace(0.0, 1.0, 11):
        u0 = float(exact.u(np.asarray(0.0), t))
        ux0 = -math.exp(-t)
        integral = exact_weighted_integral(exact, problem.psi2, float(t))
        birth = E * integral
        assert u0 - ux0 == pytest.approx(birth, rel=1e-12)


def test_example3_satisfies_the_birth_law():
    problem, exact = builtin_problem("example3")
    fertility_profile = lambda x: 2.0 * np.exp(np.asarray(x, dtype=float))
    for t in np.linspace(0.0, 1.0, 11):
        sigma = 1.0 / (1.0 + math.exp(-t))
        u0 = float(exact.u(np.asarray(0.0), t))
        ux0 = -sigma
        birth = exact_weighted_integral(exact, fertility_profile, float(t))
        assert u0 == pytest.approx(sigma, rel=1e-15)
        assert u0 - ux0 == pytest.approx(birth, rel=1e-12)


def test_example1_satisfies_the_field_equation():
    # u_t + u_x + d(x, s1) u - u_xx = 0 with s1 the psi1-weighted total
    problem, exact = builtin_problem("example1")
    rng = np.random.default_rng(42)
    for x, t in rng.uniform(0.05, 0.95, size=(20, 2)):
        s1 = exact_weighted_integral(exact, problem.psi1, t)
        d = float(problem.mortality(np.asarray([x]), s1)[0])
        u = (E - math.exp(x)) * math.exp(-t)
        u_t = -u
        u_x = -math.exp(x) * math.exp(-t)
        u_xx = u_x
        assert abs(u_t + u_x + d * u - u_xx) <= 1e-12


def test_example3_satisfies_the_field_equation():
    problem, exact = builtin_problem("example3")
    rng = np.random.default_rng(43)
    for x, t in rng.uniform(0.05, 0.95, size=(20, 2)):
        s1 = exact_weighted_integral(exact, problem.psi1, t)
        d = float(problem.mortality(np.asarray([x]), s1)[0])
        sigma = 1.0 / (1.0 + math.exp(-t))
        u = math.exp(-x) * sigma
        u_t = math.exp(-x) * sigma * (1.0 - sigma)
        u_x = -u
        u_xx = u
        assert abs(u_t + u_x + d * u - u_xx) <= 1e-12


def test_initial_profiles_are_nonnegative():
    x = np.linspace(0.0, 1.0, 101)
    for problem_id in builtin_ids():
        problem, _ = builtin_problem(problem_id)
        assert np.all(problem.initial(x) >= -1e-15)
        assert np.all(problem.mortality(x, 0.5) >= 0.0)


def test_problem_from_expressions_matches_builtin():
    problem, _ = builtin_problem("example3")
    inline = problem_from_expressions(
        mortality="1 + s/(1 - exp(-1))",
        fertility="2*exp(x)",
        initial="exp(-x)/2",
        right_boundary="exp(-1)/(1 + exp(-t))",
    )
    assert not inline.homogeneous
    assert inline.a_dagger == 1.0
    x = np.linspace(0.05, 0.95, 7)
    for s in (0.0, 0.3, 1.0):
        assert np.allclose(inline.mortality(x, s), problem.mortality(x, s), rtol=1e-15, atol=0)
        assert np.allclose(inline.fertility(x, s), problem.fertility(x, s), rtol=1e-15, atol=0)
    assert np.allclose(inline.initial(x), problem.initial(x), rtol=1e-15, atol=0)
    for t in (0.0, 0.5, 1.0):
        assert inline.boundary_value(t) == pytest.approx(problem.boundary_value(t), rel=1e-15)


def test_problem_from_expressions_defaults():
    inline = problem_from_expressions(mortality="1", fertility="e", initial="e - exp(x)")
    assert inline.homogeneous
    x = np.linspace(0.0, 1.0, 5)
    assert np.array_equal(inline.psi1(x), np.ones_like(x))
    assert np.array_equal(inline.psi2(x), np.ones_like(x))


def test_problem_from_expressions_scalar_and_shape_handling():
    inline = problem_from_expressions(mortality="x + s", fertility="1", initial="x^2")
    assert inline.initial(np.asarray(0.5)).shape == ()
    assert float(inline.initial(np.asarray(0.5))) == 0.25
    grid_shaped = inline.mortality(np.array([[0.0, 1.0], [2.0, 3.0]]), 1.0)
    assert grid_shaped.shape == (2, 2)
    assert grid_shaped[1, 1] == 4.0


def test_problem_from_expressions_slot_restrictions():
    with pytest.raises(ParseError, match="allowed variables"):
        problem_from_expressions(mortality="t", fertility="1", initial="1")
    with pytest.raises(ParseError, match="allowed variables"):
        problem_from_expressions(mortality="1", fertility="1", initial="s")
    with pytest.raises(ParseError, match="allowed variables"):
        problem_from_expressions(mortality="1", fertility="1", initial="1", right_boundary="x")
    with pytest.raises(ParseError, match="allowed variables"):
        problem_from_expressions(mortality="1", fertility="1", initial="1", psi2="s")


def test_expression_domain_errors_surface_at_evaluation():
    inline = problem_from_expressions(mortality="1", fertility="1", initial="log(x)")
    with pytest.raises(EvalError, match="log"):
        inline.initial(np.array([0.0]))
