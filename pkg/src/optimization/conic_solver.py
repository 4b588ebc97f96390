"""
Joint second-order cone solve of a horizon with cvxpy.

Solves the same problem as the analytic per-step path, as one program with
one 3-D cone per step. Used to cross-check the analytic solutions.
"""

import logging
from typing import Tuple

import cvxpy as cp
import numpy as np

from src.errors.agrivoltaic_errors import SolverError

logger = logging.getLogger(__name__)


def solve_conic(
    p: np.ndarray,
    q: np.ndarray,
    d1: np.ndarray,
    d2: np.ndarray,
    lower: float = 0.0,
    upper: float = 1.0,
    solver: str = cp.CLARABEL
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Maximize sum(p * x + q * y) subject to ||(x_t, y_t)|| <= 1 and the slab.

    The objective is rescaled by its largest coefficient before solving.

    Args:
        p: Objective coefficients on x
        q: Objective coefficients on y
        d1: Slab normal x-components
        d2: Slab normal y-components
        lower: Slab lower bound
        upper: Slab upper bound
        solver: cvxpy solver name

    Returns:
        (x, y) arrays

    Raises:
        SolverError: If the solver does not reach an optimal status
    """
    n = p.size
    scale = float(max(np.max(np.abs(p)), np.max(np.abs(q)), 1e-300))

    x = cp.Variable(n)
    y = cp.Variable(n)
    slab = cp.multiply(d1, x) + cp.multiply(d2, y)
    constraints = [
        cp.SOC(np.ones(n), cp.vstack([x, y]), axis=0),
        slab >= lower,
        slab <= upper,
    ]
    problem = cp.Problem(cp.Maximize((p / scale) @ x + (q / scale) @ y), constraints)

    try:
        problem.solve(solver=solver, verbose=False)
    except cp.SolverError as e:
        raise SolverError(f"{solver} failed on a {n}-step horizon: {e}") from e

    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise SolverError(f"{solver} returned status '{problem.status}' on a {n}-step horizon")
    if problem.status == cp.OPTIMAL_INACCURATE:
        logger.warning("conic solve of %d steps is only optimal_inaccurate", n)

    return np.asarray(x.value, dtype=float), np.asarray(y.value, dtype=float)
