# -*- coding: utf-8 -*-

# Script Description ##########################################################
"""
Exact solver for the small projection QPs of the ASIF filters

    minimize ||u - u_target||^2  subject to  A u >= b,  lower <= u <= upper

The action has at most three entries, so every candidate active set of size
<= n is enumerated and the closest feasible candidate is returned.
"""

# Imports #####################################################################

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e12

# Classes #####################################################################


@dataclass(frozen=True)
class QpProblem:
    """
    Attributes
    ----------
    target : np.ndarray
        The desired action u_NN, shape (n,)
    rows : np.ndarray
        Halfspace normals a_i, shape (m, n)
    bounds : np.ndarray
        Halfspace offsets b_i, shape (m,), meaning a_i . u >= b_i
    lower, upper : np.ndarray
        Per-axis box, shape (n,)
    tolerance : float
        Feasibility slack allowed on every row
    """

    target: np.ndarray
    rows: np.ndarray
    bounds: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    tolerance: float = 1e-9

    def __post_init__(self):
        n = np.asarray(self.target).size
        if n > 3:
            raise ValueError(f"QP dimension must be <= 3, got {n}")
        if np.asarray(self.rows).reshape(-1, n).shape[0] != np.asarray(self.bounds).size:
            raise ValueError("QP rows and bounds disagree in length")

    def stacked(self):
        """All inequalities, halfspaces first and then the box, as (A, b)"""
        n = np.asarray(self.target).size
        rows = np.asarray(self.rows, dtype=np.float64).reshape(-1, n)
        eye = np.eye(n)
        A = np.vstack([rows, eye, -eye])
        b = np.concatenate(
            [np.asarray(self.bounds, dtype=np.float64).reshape(-1), self.lower, -np.asarray(self.upper)]
        )
        return A, b

    def feasible(self, action) -> bool:
        A, b = self.stacked()
        return bool(np.all(A @ action >= b - self.tolerance))


@dataclass(frozen=True)
class QpSolution:
    action: Optional[np.ndarray]
    feasible: bool
    active: tuple = ()
    objective: float = float("inf")


# Functions ###################################################################


def project_onto_active(target: np.ndarray, A_active: np.ndarray, b_active: np.ndarray):
    """
    Closest point to target on the affine set A_active u = b_active

    Returns None when the active rows are linearly dependent.
    """
    gram = A_active @ A_active.T
    if np.linalg.cond(gram) > MAX_CONDITION:
        return None
    multipliers = np.linalg.solve(gram, b_active - A_active @ target)
    return target + A_active.T @ multipliers


def solve_qp(problem: QpProblem) -> QpSolution:
    """
    Minimise the distance to the target over the box-plus-halfspace region

    Parameters
    ----------
    problem : QpProblem
        The projection problem

    Returns
    -------
    QpSolution
        ``feasible`` is False when no candidate satisfies every row; the caller
        then substitutes its backup action
    """
    target = np.asarray(problem.target, dtype=np.float64).reshape(-1)
    A, b = problem.stacked()
    tol = problem.tolerance

    # interior optimum
    if np.all(A @ target >= b - tol):
        return QpSolution(action=target.copy(), feasible=True, active=(), objective=0.0)

    best = QpSolution(action=None, feasible=False)
    for size in range(1, target.size + 1):
        for active in combinations(range(A.shape[0]), size):
            idx = list(active)
            candidate = project_onto_active(target, A[idx], b[idx])
            if candidate is None:
                continue
            if not np.all(A @ candidate >= b - tol):
                continue
            objective = float(np.sum((candidate - target) ** 2))
            if objective < best.objective:
                best = QpSolution(action=candidate, feasible=True, active=active, objective=objective)

    if best.feasible:
        action = np.clip(best.action, problem.lower, problem.upper)
        return QpSolution(action=action, feasible=True, active=best.active, objective=best.objective)
    logger.debug("QP infeasible for target %s", target)
    return best
