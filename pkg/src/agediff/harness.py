"""Refinement studies: observed orders, consistency decay, stability probes.

Every study walks a ladder of nested meshes produced by :func:`grid.refine`,
so spatial nodes and time levels of a coarse mesh sit exactly on all finer
ones and no interpolation ever enters an error number.  Errors against an
exact solution are measured at the realized final time of the ladder (the
same float on every level); self-convergence errors compare each coarser
run with the finest one at the shared nodes and levels.

CSV files are written atomically (temp file, then rename) and print floats
as shortest round-tripping decimals, so reading a table back reproduces the
in-memory rows bit for bit and identical studies produce identical bytes.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import AlignmentError, InvalidParameter
from .grid import GridSpec, refine
from .model import ExactSolution, ProblemSpec
from .quadrature import InteriorVector, inf_norm, l2_norm
from .residual import (
    ResidualBundle,
    XhElement,
    apply_phi,
    element_from_solution,
    restrict,
    xh_norm,
    yh_norm,
)
from .solver import run


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    k: float
    m_total: int
    n_steps: int
    err_inf: float
    err_l2: float
    err_xh: float
    order_inf: Optional[float]
    order_l2: Optional[float]
    order_xh: Optional[float]


@dataclass(frozen=True)
class ConsistencyRow:
    h: float
    residual_yh: float
    order: Optional[float]


@dataclass(frozen=True)
class StabilityRow:
    """One perturbation-pair ratio; ``degenerate`` marks an underflowed denominator."""

    h: float
    ratio: Optional[float]
    degenerate: bool


def _grid_ladder(base: GridSpec, levels: int) -> list[GridSpec]:
    if not (isinstance(levels, int) and levels >= 1):
        raise InvalidParameter(f"levels must be an integer >= 1, got {levels!r}")
    grids = [base]
    for _ in range(levels - 1):
        grids.append(refine(grids[-1]))
    return grids


def _order(previous: float, current: float) -> Optional[float]:
    if previous > 0.0 and current > 0.0:
        return math.log2(previous / current)
    return None


def _error_triple(error: XhElement) -> tuple[float, float, float]:
    h = error.grid.h
    final = InteriorVector(error.rows[-1], h)
    err_inf = max(inf_norm(final), abs(float(error.left_trace[-1])), abs(float(error.right_trace[-1])))
    return err_inf, l2_norm(final), xh_norm(error)


def _attach_orders(
    grids: list[GridSpec], triples: list[tuple[float, float, float]]
) -> list[ConvergenceRow]:
    rows = []
    for index, (grid, (err_inf, err_l2, err_xh)) in enumerate(zip(grids, triples)):
        if index == 0:
            orders = (None, None, None)
        else:
            prev = triples[index - 1]
            orders = (_order(prev[0], err_inf), _order(prev[1], err_l2), _order(prev[2], err_xh))
        rows.append(
            ConvergenceRow(
                h=grid.h,
                k=grid.k,
                m_total=grid.m_total,
                n_steps=grid.n_steps,
                err_inf=err_inf,
                err_l2=err_l2,
                err_xh=err_xh,
                order_inf=orders[0],
                order_l2=orders[1],
                order_xh=orders[2],
            )
        )
    return rows


def convergence_study(
    problem: ProblemSpec, exact: ExactSolution, base: GridSpec, levels: int
) -> list[ConvergenceRow]:
    """Errors against an exact solution on a ladder of refined meshes."""
    grids = _grid_ladder(base, levels)
    triples = []
    for grid in grids:
        solution = element_from_solution(run(problem, grid))
        sampled = restrict(exact.u, grid)
        triples.append(_error_triple(sampled - solution))
    return _attach_orders(grids, triples)


def restrict_to_coarse(element: XhElement, coarse: GridSpec) -> XhElement:
    """Sample an element from a nested finer mesh down to ``coarse``.

    The fine mesh must be ``coarse`` refined some number of times; anything
    else raises AlignmentError.
    """
    fine = element.grid
    if fine.a_dagger != coarse.a_dagger or fine.r != coarse.r:
        raise AlignmentError("grids do not describe the same problem setup")
    probe = coarse
    depth = 0
    while probe.m_total < fine.m_total:
        probe = refine(probe)
        depth += 1
    if probe != fine:
        raise AlignmentError(
            f"fine grid (m_total = {fine.m_total}) is not a refinement of the "
            f"coarse grid (m_total = {coarse.m_total})"
        )
    space_stride = 2**depth
    time_stride = 4**depth
    return XhElement(
        element.left_trace[::time_stride],
        element.rows[::time_stride, space_stride - 1 :: space_stride],
        element.right_trace[::time_stride],
        coarse,
    )


def self_convergence_study(
    problem: ProblemSpec, base: GridSpec, levels: int
) -> list[ConvergenceRow]:
    """Errors of each coarser run against the finest run of the ladder.

    Needs at least three levels so that at least two error rows exist and
    one order can be formed.
    """
    if not (isinstance(levels, int) and levels >= 3):
        raise InvalidParameter(f"self-convergence needs levels >= 3, got {levels!r}")
    grids = _grid_ladder(base, levels)
    elements = [element_from_solution(run(problem, grid)) for grid in grids]
    reference = elements[-1]
    triples = []
    for grid, element in zip(grids[:-1], elements[:-1]):
        sampled = restrict_to_coarse(reference, grid)
        triples.append(_error_triple(element - sampled))
    return _attach_orders(grids[:-1], triples)


def consistency_study(
    problem: ProblemSpec, exact: ExactSolution, base: GridSpec, levels: int
) -> list[ConsistencyRow]:
    """Residual norm of the restricted exact solution on each mesh."""
    grids = _grid_ladder(base, levels)
    rows = []
    previous = None
    for grid in grids:
        sampled = restrict(exact.u, grid)
        initial = InteriorVector(problem.initial(grid.interior_nodes()), grid.h)
        residual = yh_norm(apply_phi(sampled, problem, grid, initial))
        order = _order(previous, residual) if previous is not None else None
        rows.append(ConsistencyRow(h=grid.h, residual_yh=residual, order=order))
        previous = residual
    return rows


def _perturbation(grid: GridSpec, scale: float) -> XhElement:
    """A fixed low-frequency field, scaled to xh-norm = scale * h.

    The mode shape is drawn once from a fixed seed, so every call sees the
    same smooth function; only the sampling mesh changes.  Scaling by the
    mesh-dependent factor keeps the perturbation inside the shrinking
    neighbourhood where the stability estimate applies.
    """
    rng = np.random.default_rng(987654321)
    amplitudes = rng.uniform(0.5, 1.0, size=3)
    x = grid.interior_nodes()
    t = grid.time_levels()
    rows = np.zeros((grid.n_steps + 1, grid.m_total - 1))
    for mode in range(3):
        spatial = np.sin((mode + 1) * np.pi * x / grid.a_dagger)
        temporal = np.cos((mode + 1) * np.pi * t / grid.t_final)
        rows += amplitudes[mode] * temporal[:, None] * spatial[None, :]
    zeros = np.zeros(grid.n_steps + 1)
    raw = XhElement(zeros, rows, zeros.copy(), grid)
    norm = xh_norm(raw)
    factor = scale * grid.h / norm
    return XhElement(zeros, rows * factor, zeros.copy(), grid)


def stability_probe(
    problem: ProblemSpec, base: GridSpec, levels: int, perturbation_scale: float = 1.0
) -> list[StabilityRow]:
    """Ratio |V - W|_X / |phi(V) - phi(W)|_Y for a fixed smooth perturbation.

    V is the computed solution, W = V + perturbation.  V - W is known in
    closed form (it is the negated perturbation), so the numerator is taken
    from the perturbation directly instead of through a cancelling
    subtraction.  A vanishing denominator is reported as a degenerate row,
    never raised.
    """
    if not (math.isfinite(perturbation_scale) and perturbation_scale >= 0.0):
        raise InvalidParameter(
            f"perturbation_scale must be finite and >= 0, got {perturbation_scale!r}"
        )
    grids = _grid_ladder(base, levels)
    rows = []
    for grid in grids:
        solution = element_from_solution(run(problem, grid))
        perturbation = _perturbation(grid, perturbation_scale)
        perturbed = XhElement(
            solution.left_trace + perturbation.left_trace,
            solution.rows + perturbation.rows,
            solution.right_trace + perturbation.right_trace,
            grid,
        )
        initial = InteriorVector(problem.initial(grid.interior_nodes()), grid.h)
        residual_gap = apply_phi(solution, problem, grid, initial) - apply_phi(
            perturbed, problem, grid, initial
        )
        numerator = xh_norm(perturbation)
        denominator = yh_norm(residual_gap)
        if denominator == 0.0 or not math.isfinite(numerator / denominator):
            rows.append(StabilityRow(h=grid.h, ratio=None, degenerate=True))
        else:
            rows.append(StabilityRow(h=grid.h, ratio=numerator / denominator, degenerate=False))
    return rows


CONVERGENCE_HEADER = ["h", "k", "M", "N", "err_inf", "err_l2", "err_xh", "order_inf", "order_l2", "order_xh"]


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    return repr(float(value))


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(handle, "w", newline="") as stream:
            stream.write(text)
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.unlink(temp_path)
        raise


def write_convergence_csv(rows: list[ConvergenceRow], path: str) -> None:
    lines = [",".join(CONVERGENCE_HEADER)]
    for row in rows:
        lines.append(
            ",".join(
                [
                    _fmt(row.h),
                    _fmt(row.k),
                    str(row.m_total),
                    str(row.n_steps),
                    _fmt(row.err_inf),
                    _fmt(row.err_l2),
                    _fmt(row.err_xh),
                    _fmt(row.order_inf),
                    _fmt(row.order_l2),
                    _fmt(row.order_xh),
                ]
            )
        )
    _write_atomic(path, "\n".join(lines) + "\n")


def read_convergence_csv(path: str) -> list[ConvergenceRow]:
    with open(path, newline="") as stream:
        reader = csv.reader(stream)
        header = next(reader)
        if header != CONVERGENCE_HEADER:
            raise InvalidParameter(f"unexpected header {header!r} in {path}")
        rows = []
        for record in reader:
            rows.append(
                ConvergenceRow(
                    h=float(record[0]),
                    k=float(record[1]),
                    m_total=int(record[2]),
                    n_steps=int(record[3]),
                    err_inf=float(record[4]),
                    err_l2=float(record[5]),
                    err_xh=float(record[6]),
                    order_inf=float(record[7]) if record[7] else None,
                    order_l2=float(record[8]) if record[8] else None,
                    order_xh=float(record[9]) if record[9] else None,
                )
            )
    return rows


def write_consistency_csv(rows: list[ConsistencyRow], path: str) -> None:
    lines = ["h,residual_yh,order"]
    for row in rows:
        lines.append(",".join([_fmt(row.h), _fmt(row.residual_yh), _fmt(row.order)]))
    _write_atomic(path, "\n".join(lines) + "\n")


def write_stability_csv(rows: list[StabilityRow], path: str) -> None:
    lines = ["h,ratio"]
    for row in rows:
        ratio = "DegenerateRatio" if row.degenerate else _fmt(row.ratio)
        lines.append(",".join([_fmt(row.h), ratio]))
    _write_atomic(path, "\n".join(lines) + "\n")


def write_slice_csv(
    path: str,
    x: np.ndarray,
    u_numeric: np.ndarray,
    u_exact: Optional[np.ndarray] = None,
) -> None:
    if u_exact is None:
        lines = ["x,u_numeric"]
        for xi, ui in zip(x, u_numeric):
            lines.append(f"{_fmt(xi)},{_fmt(ui)}")
    else:
        lines = ["x,u_numeric,u_exact,abs_err"]
        for xi, ui, ei in zip(x, u_numeric, u_exact):
            lines.append(f"{_fmt(xi)},{_fmt(ui)},{_fmt(ei)},{_fmt(abs(ui - ei))}")
    _write_atomic(path, "\n".join(lines) + "\n")
