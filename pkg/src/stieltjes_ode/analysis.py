"""Error metrics, truncation errors, propagation bounds, and order fits.

Given a computed trajectory and an exact solution, this module reports the
per-node errors of the corrector, the predictor and the right-limit update,
evaluates the scheme's local truncation errors, and assembles the constants
``G1 .. G6`` that drive the a-priori error bounds.  ``estimate_order`` fits a
convergence order from (step, error) pairs and ``convergence_table`` runs a
whole benchmark grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .derivator import Derivator
from .solver import (IvpSpec, GridMismatchError, Partition, Trajectory,
                     TrajectoryHistory, build_partition, solve)

__all__ = [
    "ErrorReport",
    "BoundConstants",
    "error_report",
    "truncation_errors",
    "measure_constants",
    "theoretical_bounds",
    "predictor_bound",
    "right_limit_bound",
    "estimate_order",
    "ConvergenceCell",
    "convergence_table",
    "format_convergence_csv",
]


@dataclass
class ErrorReport:
    """Per-node errors of a trajectory against an exact solution.

    ``e[k] = u_k - x(t_k)`` for every node; ``e_star[k] = u*_{k+1} -
    x(t_{k+1})``, the predictor error against the exact value (it absorbs
    the one-point local truncation, which is why its maximum sits well
    above the corrector's); ``e_plus[k] = u_k+ - x(t_k+)`` for ``k <= N``.
    ``max_e`` and ``max_e_star`` run over all nodes.  ``max_e_plus`` runs
    over the jump nodes only, where the right limit actually differs from
    the node value; at every other node ``e_plus`` coincides with ``e``.
    (Without jumps it falls back to all nodes.)
    """

    e: np.ndarray
    e_star: np.ndarray
    e_plus: np.ndarray
    max_e: float
    max_e_star: float
    max_e_plus: float
    predictor_residual: Optional[np.ndarray] = None
    corrector_residual: Optional[np.ndarray] = None
    combined_residual: Optional[np.ndarray] = None


def _exact_history(part: Partition, exact: Callable) -> TrajectoryHistory:
    values = np.asarray(exact(part.nodes), dtype=float)
    return TrajectoryHistory(part.nodes, values, part.h, len(part.nodes))


def error_report(traj: Trajectory, exact: Callable, exact_right: Callable,
                 g: Derivator, spec: IvpSpec) -> ErrorReport:
    """Compare a trajectory with the exact solution of its problem.

    ``exact`` and ``exact_right`` must accept numpy arrays of times.
    """
    part = traj.partition
    nodes = part.nodes
    x = np.asarray(exact(nodes), dtype=float)
    x_right = np.asarray(exact_right(nodes[:-1]), dtype=float)
    e = traj.values - x
    e_star = traj.predictor_values - x[1:]
    e_plus = traj.right_values - x_right
    at_jump = part.gaps[:-1] > 0.0
    max_e_plus = float(np.max(np.abs(e_plus[at_jump]))) if np.any(at_jump) \
        else float(np.max(np.abs(e_plus)))
    return ErrorReport(
        e=e, e_star=e_star, e_plus=e_plus,
        max_e=float(np.max(np.abs(e))),
        max_e_star=float(np.max(np.abs(e_star))),
        max_e_plus=max_e_plus,
    )


def truncation_errors(exact: Callable, exact_right: Callable, g: Derivator,
                      spec: IvpSpec, part: Partition):
    """Local truncation residuals of the exact solution in the scheme.

    Returns three arrays indexed by step (entry ``k`` belongs to node
    ``k+1``): the predictor residual, the corrector residual with the exact
    endpoint value, and the combined residual with the predicted endpoint.
    """
    nodes = part.nodes
    x = np.asarray(exact(nodes), dtype=float)
    x_right = np.asarray(exact_right(nodes[:-1]), dtype=float)
    hist = _exact_history(part, exact)
    dg = part.g_left[1:] - part.g_right[:-1]
    n = part.n_steps
    resid_pred = np.empty(n)
    resid_corr = np.empty(n)
    resid_comb = np.empty(n)
    for k in range(n):
        f_plus = spec.rhs_right(nodes[k], x_right[k], hist)
        resid_pred[k] = x[k + 1] - x_right[k] - f_plus * dg[k]
        f_end = spec.rhs(nodes[k + 1], x[k + 1], hist)
        resid_corr[k] = x[k + 1] - x_right[k] - 0.5 * (f_plus + f_end) * dg[k]
        x_star = x_right[k] + f_plus * dg[k]
        f_pred = spec.rhs(nodes[k + 1], x_star, hist)
        resid_comb[k] = x[k + 1] - x_right[k] - 0.5 * (f_plus + f_pred) * dg[k]
    return resid_pred, resid_corr, resid_comb


@dataclass
class BoundConstants:
    """Regularity constants and the derived propagation factors.

    ``k1`` is the largest jump gap, ``k2``/``k3`` bound the state derivative
    of the right-hand side and of its right limit, ``lip`` is the common
    Lipschitz constant of the continuous parts, ``h`` the grid step and
    ``num_jumps`` the jump count.  ``g1 .. g6`` are recomputed from their
    defining formulas on every access.
    """

    k1: float
    k2: float
    k3: float
    lip: float
    h: float
    num_jumps: int

    @property
    def g1(self) -> float:
        k2h = self.k2 * self.lip * self.h
        k3h = self.k3 * self.lip * self.h
        return 0.5 * k2h + 0.5 * k3h + 0.5 * k3h * k3h

    @property
    def g2(self) -> float:
        k1, k2, k3 = self.k1, self.k2, self.k3
        hh = self.lip * self.h
        return (k1 * k2 + 0.5 * k1 * k2 * k3 * hh + 0.5 * k1 * k2 * k2 * hh
                + 0.5 * k1 * k2 * k2 * k3 * hh * hh)

    @property
    def g3(self) -> float:
        return self.k1 * self.k2

    @property
    def g4(self) -> float:
        return self.k3 * self.lip * self.h

    @property
    def g5(self) -> float:
        return self.g3 * (1.0 + self.g4)

    @property
    def g6(self) -> float:
        return 0.5 * self.k2 * self.lip * self.h


def measure_constants(spec: IvpSpec, g: Derivator, part: Partition,
                      exact: Callable, exact_right: Callable,
                      refine: int = 20) -> BoundConstants:
    """Sample the regularity constants along the exact solution.

    ``k2`` and ``k3`` come from central differences of the right-hand side
    in the state variable over the solution's range; the Lipschitz constant
    is the largest time difference quotient of the driver's continuous part
    and of the composed right-hand side (restricted per step, so jump
    contributions are excluded), sampled ``refine`` times per step.  When
    the spec carries exact constants they take precedence.
    """
    if spec.constants is not None:
        k1, k2, k3, lip = spec.constants
        if k1 < g.max_gap:
            raise ValueError(
                f"provided K1={k1} is below the largest jump gap {g.max_gap}")
        return BoundConstants(k1, k2, k3, lip, part.h, g.n_jumps)
    nodes = part.nodes
    hist = _exact_history(part, exact)
    x = np.asarray(exact(nodes), dtype=float)
    x_right = np.asarray(exact_right(nodes[:-1]), dtype=float)
    scale = max(1.0, float(np.max(np.abs(x))))
    delta = 1e-6 * scale
    k2 = 0.0
    k3 = 0.0
    for k, t in enumerate(nodes):
        k2 = max(k2, abs(spec.rhs(t, x[k] + delta, hist)
                         - spec.rhs(t, x[k] - delta, hist)) / (2 * delta))
        if k < len(nodes) - 1:
            k3 = max(k3, abs(spec.rhs_right(t, x_right[k] + delta, hist)
                             - spec.rhs_right(t, x_right[k] - delta, hist))
                     / (2 * delta))
    frac = np.linspace(0.0, 1.0, refine + 1)
    ts_grid = nodes[:-1, None] + np.diff(nodes)[:, None] * frac[None, :]
    cv_grid = g.continuous_value(ts_grid.ravel()).reshape(ts_grid.shape)
    x_grid = np.asarray(exact(ts_grid.ravel()), dtype=float).reshape(ts_grid.shape)
    dts = np.diff(ts_grid, axis=1)
    lip = float(np.max(np.abs(np.diff(cv_grid, axis=1)) / dts))
    for k in range(part.n_steps):
        fv = np.empty(refine + 1)
        # within a step the composed rhs is continuous from t_k+ onwards
        fv[0] = spec.rhs_right(nodes[k], x_right[k], hist)
        for j in range(1, refine + 1):
            fv[j] = spec.rhs(ts_grid[k, j], x_grid[k, j], hist)
        lip = max(lip, float(np.max(np.abs(np.diff(fv)) / dts[k])))
    return BoundConstants(g.max_gap, k2, k3, lip, part.h, g.n_jumps)


def theoretical_bounds(consts: BoundConstants, t: float, e0: float,
                       truncation_max: float) -> float:
    """A-priori corrector error bound at time ``t``.

    ``(1 + G2)^jumps * (|e0| + truncation_max / G1) * exp(G1 * t / h)``: the jump
    factor amplifies once per discontinuity, the exponential propagates the
    per-step growth over ``t/h`` steps.
    """
    g1 = consts.g1
    if g1 == 0.0:
        raise ValueError("bound undefined: G1 = 0 (all constants zero)")
    amplify = (1.0 + consts.g2) ** consts.num_jumps
    return amplify * (abs(e0) + truncation_max / g1) * math.exp(g1 * t / consts.h)


def predictor_bound(consts: BoundConstants, t: float, e0: float,
                    truncation_max: float, at_jump: bool = False) -> float:
    """Predictor companion of :func:`theoretical_bounds`."""
    base = theoretical_bounds(consts, t, e0, truncation_max) * math.exp(consts.g4)
    return base * (1.0 + consts.g5) if at_jump else base


def right_limit_bound(consts: BoundConstants, t: float, e0: float,
                      truncation_max: float, at_jump: bool = False) -> float:
    """Right-limit companion of :func:`theoretical_bounds`."""
    base = theoretical_bounds(consts, t, e0, truncation_max)
    return base * (1.0 + consts.g3) if at_jump else base


def estimate_order(h_values: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log10(error) against log10(step)."""
    h_arr = np.asarray(h_values, dtype=float)
    e_arr = np.asarray(errors, dtype=float)
    if h_arr.size != e_arr.size or h_arr.size < 2:
        raise ValueError("need at least two (step, error) pairs")
    if np.any(h_arr <= 0.0) or np.any(e_arr <= 0.0):
        raise ValueError("steps and errors must be positive for a log-log fit")
    slope, _ = np.polyfit(np.log10(h_arr), np.log10(e_arr), 1)
    return float(slope)


@dataclass
class ConvergenceCell:
    """One (jump count, step) cell of a convergence table."""

    num_jumps: int
    h: float
    max_e_star: float = math.nan
    max_e: float = math.nan
    max_e_plus: float = math.nan
    failed: bool = False
    reason: str = ""


def convergence_table(spec_factory: Callable, g_factory: Callable,
                      exact_factory: Callable, h_values: Sequence[float],
                      jump_counts: Sequence[int]) -> list[ConvergenceCell]:
    """Run the benchmark grid and collect the three error maxima per cell.

    ``g_factory(num_jumps)`` builds the driver, ``spec_factory(g)`` the
    problem and ``exact_factory(g)`` the pair (exact, exact right limit).
    A cell whose step is incompatible with the driver's jumps is marked
    failed and the run continues.
    """
    cells = []
    for nj in jump_counts:
        g = g_factory(nj)
        spec = spec_factory(g)
        exact, exact_right = exact_factory(g)
        for h in h_values:
            cell = ConvergenceCell(num_jumps=nj, h=h)
            try:
                part = build_partition(g, h)
                traj = solve(spec, g, part)
                report = error_report(traj, exact, exact_right, g, spec)
            except GridMismatchError as exc:
                cell.failed = True
                cell.reason = str(exc)
            else:
                cell.max_e_star = report.max_e_star
                cell.max_e = report.max_e
                cell.max_e_plus = report.max_e_plus
            cells.append(cell)
    return cells


def format_convergence_csv(cells: Sequence[ConvergenceCell]) -> str:
    """Render table cells as CSV, scientific notation with 5 significant digits."""
    lines = ["num_jumps,h,max_e_star,max_e,max_e_plus"]
    for c in cells:
        if c.failed:
            lines.append(f"{c.num_jumps},{c.h:.4e},failed,failed,failed")
        else:
            lines.append(f"{c.num_jumps},{c.h:.4e},{c.max_e_star:.4e},"
                         f"{c.max_e:.4e},{c.max_e_plus:.4e}")
    return "\n".join(lines) + "\n"
