"""Explicit time stepping for the age-structured transport-diffusion model.

One step advances the interior values with upwinded transport, centered
diffusion and the mortality sink evaluated at the current weighted
population:

    U_i^{n+1} = (1 - lam - 2r - k*d_i(s1)) U_i^n + (r + lam) U_{i-1}^n + r U_{i+1}^n

The i = 1 and i = M-1 stencils reach the boundary values: the right one is
prescribed data, the left one solves the discrete Robin birth law

    (1 + 1/h) U_0^n - (1/h) U_1^n = qh(B(., s2) * U^n)

for U_0^n, which rearranges to U_0^n = (h*qh(...) + U_1^n) / (h + 1).  The
left value is computed at every stored level, including the last one, so a
solution history always satisfies the boundary identity row by row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EvalError, InvalidParameter, NonFiniteState, StabilityViolation
from .grid import GridSpec
from .model import ProblemSpec
from .quadrature import InteriorVector, pointwise_product, qh


@dataclass(frozen=True)
class SolutionHistory:
    """Every computed level of one run.

    ``interior`` has shape (n_steps + 1, m_total - 1); ``left_trace`` and
    ``right_trace`` hold U_0^n and U_M^n for n = 0..n_steps.
    """

    left_trace: np.ndarray
    right_trace: np.ndarray
    interior: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        n_levels = self.grid.n_steps + 1
        width = self.grid.m_total - 1
        if self.left_trace.shape != (n_levels,) or self.right_trace.shape != (n_levels,):
            raise DimensionMismatch(
                f"boundary traces must have shape ({n_levels},), got "
                f"{self.left_trace.shape} and {self.right_trace.shape}"
            )
        if self.interior.shape != (n_levels, width):
            raise DimensionMismatch(
                f"interior must have shape ({n_levels}, {width}), got {self.interior.shape}"
            )


def _interior_coordinates(u: InteriorVector) -> np.ndarray:
    return np.arange(1, len(u) + 1) * u.h


def _coefficient_values(fn, x: np.ndarray, s: float, what: str) -> np.ndarray:
    values = np.asarray(fn(x, s), dtype=float)
    if values.shape != x.shape:
        raise DimensionMismatch(
            f"{what} returned shape {values.shape} for {x.shape[0]} nodes"
        )
    if not np.all(np.isfinite(values)):
        raise EvalError(f"{what} evaluated to a non-finite value (s = {s!r})")
    return values


def weighted_population(psi_values: InteriorVector, u: InteriorVector) -> float:
    """s = qh(psi * u): the scalar the nonlocal coefficients are fed."""
    return qh(pointwise_product(psi_values, u))


def solve_left_boundary(u: InteriorVector, t: float, problem: ProblemSpec) -> float:
    """Solve the discrete Robin condition for U_0 given the interior row.

    ``t`` is accepted for interface symmetry with :func:`step`; the birth
    law itself has no explicit time dependence.
    """
    del t
    h = u.h
    x = _interior_coordinates(u)
    psi2 = InteriorVector(problem.psi2(x), h)
    s2 = weighted_population(psi2, u)
    fertility = _coefficient_values(problem.fertility, x, s2, "fertility")
    birth = qh(pointwise_product(InteriorVector(fertility, h), u))
    return (h * birth + u.values[0]) / (h + 1.0)


def step(
    u_prev: InteriorVector,
    left_prev: float,
    right_prev: float,
    t_prev: float,
    problem: ProblemSpec,
    grid: GridSpec,
) -> InteriorVector:
    """Advance the interior row one time level."""
    del t_prev
    if len(u_prev) != grid.m_total - 1:
        raise DimensionMismatch(
            f"row length {len(u_prev)} does not match grid width {grid.m_total - 1}"
        )
    h, k, r, lam = grid.h, grid.k, grid.r, grid.lam
    x = grid.interior_nodes()
    psi1 = InteriorVector(problem.psi1(x), h)
    s1 = weighted_population(psi1, u_prev)
    mortality = _coefficient_values(problem.mortality, x, s1, "mortality")

    u = u_prev.values
    shifted_left = np.concatenate(([left_prev], u[:-1]))
    shifted_right = np.concatenate((u[1:], [right_prev]))
    advanced = (1.0 - lam - 2.0 * r - k * mortality) * u + (r + lam) * shifted_left + r * shifted_right
    if not np.all(np.isfinite(advanced)):
        raise NonFiniteState("time step produced a non-finite value")
    return InteriorVector(advanced, h)


def run(problem: ProblemSpec, grid: GridSpec) -> SolutionHistory:
    """March from the initial profile to t_final and record every level."""
    if problem.a_dagger != grid.a_dagger:
        raise InvalidParameter(
            f"problem lives on [0, {problem.a_dagger!r}] but grid covers [0, {grid.a_dagger!r}]"
        )
    if grid.lam + 2.0 * grid.r > 1.0:
        # GridSpec construction already enforces this; kept as a cheap guard
        # so a tampered grid cannot start stepping.
        raise StabilityViolation(
            f"stability bound violated: lam + 2*r = {grid.lam + 2.0 * grid.r!r} > 1"
        )

    x = grid.interior_nodes()
    t_levels = grid.time_levels()
    n_steps = grid.n_steps

    interior = np.empty((n_steps + 1, grid.m_total - 1))
    initial_row = np.asarray(problem.initial(x), dtype=float)
    if initial_row.shape != x.shape:
        raise DimensionMismatch(
            f"initial profile returned shape {initial_row.shape} for {x.shape[0]} nodes"
        )
    if not np.all(np.isfinite(initial_row)):
        raise NonFiniteState("initial profile is not finite", time_level=0)
    interior[0] = initial_row

    right_trace = np.empty(n_steps + 1)
    for n in range(n_steps + 1):
        right_trace[n] = problem.boundary_value(t_levels[n])
    if not np.all(np.isfinite(right_trace)):
        raise NonFiniteState("right boundary data is not finite")

    left_trace = np.empty(n_steps + 1)
    for n in range(n_steps + 1):
        row = InteriorVector(interior[n], grid.h)
        left_trace[n] = solve_left_boundary(row, t_levels[n], problem)
        if not math.isfinite(left_trace[n]):
            raise NonFiniteState(
                f"left boundary value became non-finite at time level {n}", time_level=n
            )
        if n < n_steps:
            try:
                advanced = step(row, left_trace[n], right_trace[n], t_levels[n], problem, grid)
            except NonFiniteState as exc:
                raise NonFiniteState(
                    f"state became non-finite at time level {n + 1} (t = {t_levels[n + 1]!r})",
                    time_level=n + 1,
                ) from exc
            interior[n + 1] = advanced.values

    return SolutionHistory(
        left_trace=left_trace,
        right_trace=right_trace,
        interior=interior,
        grid=grid,
    )
