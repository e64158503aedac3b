"""Dense two-phase simplex for small equality-form linear programs.

Solves min c . x subject to A x = b, x >= 0 with Bland's entering and
leaving rules, which guarantee termination without cycling and make the
returned vertex deterministic.  Sized for problems with tens of variables;
basis systems are re-solved each iteration rather than updated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

Array = np.ndarray

PIVOT_TOL = 1e-9  # reduced-cost and pivot-element threshold
FEAS_TOL = 1e-8   # feasibility threshold on the phase-one objective
MAX_ITERATIONS = 10_000

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    """Solver outcome: status plus the optimal point when one exists."""

    status: str
    x: Optional[Array]
    objective: Optional[float]
    iterations: int


def _bland_iterate(
    tableau_a: Array,
    b: Array,
    c: Array,
    basis: list[int],
    allowed: Array,
    max_iterations: int,
) -> tuple[str, int]:
    """Run simplex iterations in place on the basis list.

    allowed masks the columns eligible to enter (artificials are barred in
    phase two).  Returns (status, iterations).
    """
    m, n = tableau_a.shape
    in_basis = np.zeros(n, dtype=bool)
    in_basis[basis] = True
    for iteration in range(1, max_iterations + 1):
        basis_matrix = tableau_a[:, basis]
        x_basic = np.linalg.solve(basis_matrix, b)
        dual = np.linalg.solve(basis_matrix.T, c[basis])
        reduced = c - dual @ tableau_a
        entering = -1
        for j in range(n):
            if allowed[j] and not in_basis[j] and reduced[j] < -PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return OPTIMAL, iteration
        direction = np.linalg.solve(basis_matrix, tableau_a[:, entering])
        ratios = [
            (x_basic[i] / direction[i], basis[i], i)
            for i in range(m)
            if direction[i] > PIVOT_TOL
        ]
        if not ratios:
            return UNBOUNDED, iteration
        min_ratio = min(r for r, _, _ in ratios)
        # Bland's leaving rule: among minimal ratios, lowest variable index.
        _, row = min((var, i) for r, var, i in ratios if r <= min_ratio + 1e-12)
        in_basis[basis[row]] = False
        in_basis[entering] = True
        basis[row] = entering
    raise RuntimeError(f"simplex failed to converge within {max_iterations} iterations")


def solve_lp(
    c: Sequence[float],
    a_eq: Sequence[Sequence[float]],
    b_eq: Sequence[float],
    max_iterations: int = MAX_ITERATIONS,
) -> LPResult:
    """Minimize c . x subject to a_eq x = b_eq, x >= 0.

    Phase one minimizes the sum of artificial variables from the identity
    basis; phase two re-optimizes the original objective with artificials
    barred from entering.  Assumes a_eq has full row rank.
    """
    a = np.asarray(a_eq, dtype=float)
    b = np.asarray(b_eq, dtype=float).copy()
    cost = np.asarray(c, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"constraint matrix must be 2-d, got shape {a.shape}")
    m, n = a.shape
    if b.shape != (m,) or cost.shape != (n,):
        raise ValueError("objective or right-hand side shape mismatch")

    # Orient rows so the identity basis of artificials is feasible.
    a = a.copy()
    negative = b < 0.0
    a[negative] *= -1.0
    b[negative] *= -1.0

    full_a = np.hstack([a, np.eye(m)])
    phase1_cost = np.concatenate([np.zeros(n), np.ones(m)])
    basis = list(range(n, n + m))
    allowed = np.ones(n + m, dtype=bool)
    status, iters1 = _bland_iterate(full_a, b, phase1_cost, basis, allowed, max_iterations)
    if status != OPTIMAL:
        raise RuntimeError("phase one cannot be unbounded; inputs corrupted")
    x_basic = np.linalg.solve(full_a[:, basis], b)
    if float(phase1_cost[basis] @ x_basic) > FEAS_TOL:
        return LPResult(status=INFEASIBLE, x=None, objective=None, iterations=iters1)

    # Pivot any artificial still in the basis out onto an original column.
    for row in range(m):
        if basis[row] < n:
            continue
        inverse_row = np.linalg.solve(full_a[:, basis].T, np.eye(m)[row])
        candidates = inverse_row @ a
        replacement = -1
        for j in range(n):
            if j not in basis and abs(candidates[j]) > PIVOT_TOL:
                replacement = j
                break
        if replacement < 0:
            raise RuntimeError("constraint matrix is rank deficient")
        basis[row] = replacement

    allowed[n:] = False
    phase2_cost = np.concatenate([cost, np.zeros(m)])
    status, iters2 = _bland_iterate(full_a, b, phase2_cost, basis, allowed, max_iterations)
    iterations = iters1 + iters2
    if status == UNBOUNDED:
        return LPResult(status=UNBOUNDED, x=None, objective=None, iterations=iterations)
    x = np.zeros(n + m)
    x[basis] = np.linalg.solve(full_a[:, basis], b)
    solution = np.clip(x[:n], 0.0, None)
    return LPResult(
        status=OPTIMAL,
        x=solution,
        objective=float(cost @ solution),
        iterations=iterations,
    )
