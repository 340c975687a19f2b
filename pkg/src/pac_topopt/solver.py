"""Linear and variational-inequality solvers for the discrete scheme.

SPD systems are solved with Jacobi-preconditioned conjugate gradients; the
bound-constrained phase update is solved with projected Gauss-Seidel sweeps
in fixed ascending node order.  Both iterations are deterministic functions
of their inputs.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SolveReport",
    "ConvergenceError",
    "TimeStepError",
    "solve_spd",
    "projected_gauss_seidel",
    "solve_obstacle_vi",
]


@dataclass
class SolveReport:
    iterations: int
    final_residual: float
    converged: bool


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted; carries the last SolveReport."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class TimeStepError(ValueError):
    """The implicit concave split lost positivity (tau too large)."""


def _jacobi_pcg(matrix, rhs, tol, max_iter, x0):
    """PCG with diagonal (Jacobi) preconditioning, applied as the symmetric
    scaling D^{-1/2} A D^{-1/2}; returns (x, iterations, residual).

    Stops when ||A x - b|| <= tol * ||b|| in the original variables
    (absolute when b = 0).  The recurrence residual is verified against a
    true residual on exit and the iteration resumes if rounding drift broke
    the bound; the symmetric scaling keeps the attainable accuracy low on
    systems with strong material contrast.
    """
    diag = matrix.diagonal()
    if np.any(diag <= 0.0):
        raise ValueError("matrix diagonal must be positive for Jacobi PCG")
    root = np.sqrt(diag)
    inv_root = 1.0 / root

    norm_b = np.linalg.norm(rhs)
    target = tol * norm_b if norm_b > 0.0 else tol

    scaled = sp.diags(inv_root) @ matrix @ sp.diags(inv_root)
    scaled = scaled.tocsr()
    b = inv_root * rhs
    y = root * (np.zeros_like(rhs) if x0 is None else np.asarray(x0, dtype=float))

    # Restarts recompute the residual from scratch, so recurrence drift is
    # corrected; near the double-precision floor the freshly computed
    # residual may stay slightly above target, in which case the last
    # monitored residual is reported.
    iterations = 0
    res = np.inf
    for _restart in range(4):
        r = b - scaled @ y
        res = np.linalg.norm(root * r)
        if res <= target:
            break
        p = r.copy()
        rr = float(r @ r)
        while iterations < max_iter:
            ap = scaled @ p
            alpha = rr / float(p @ ap)
            y += alpha * p
            r -= alpha * ap
            iterations += 1
            res = np.linalg.norm(root * r)
            if res <= target:
                break
            rr_new = float(r @ r)
            beta = rr_new / rr
            rr = rr_new
            p = r + beta * p
        if res > target:  # max_iter exhausted
            break
    return inv_root * y, iterations, res


def solve_spd(system, rhs, tol=1e-9, max_iter=50000, x0=None):
    """Solve a constrained SPD system to ||K x - f|| <= tol * ||f|| on the
    free dofs.

    `x0` may hold a full-length warm start.  Returns the full solution
    vector (prescribed values at constrained dofs) and a SolveReport whose
    residual is the monitored CG residual, refreshed from scratch at the
    internal restarts; raises ConvergenceError when the budget runs out.
    """
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    reduced = system.reduced_matrix()
    b = system.reduce_rhs(rhs)
    start = None if x0 is None else np.asarray(x0, dtype=float)[system.free]
    x, iterations, residual = _jacobi_pcg(reduced, b, tol, max_iter, start)
    norm_b = np.linalg.norm(b)
    converged = residual <= (tol * norm_b if norm_b > 0.0 else tol)
    report = SolveReport(iterations=iterations, final_residual=float(residual),
                         converged=bool(converged))
    if not converged:
        raise ConvergenceError(
            f"PCG stalled after {iterations} iterations "
            f"(residual {residual:.3e})", report)
    return system.expand(x), report


def projected_gauss_seidel(matrix, rhs, x0, lower=-1.0, upper=1.0,
                           tol=1e-9, max_sweeps=10000):
    """Solve the box-constrained VI (A x - b, y - x) >= 0 for all y in the box.

    A must be SPD with positive diagonal.  Sweeps run in ascending node
    order; each nodal solve is clamped to [lower, upper], so the iterate is
    feasible at all times.  Convergence is declared when the projected
    residual max_i |x_i - clip(x_i - (A x - b)_i / A_ii)| <= tol, measured
    after a full sweep.  The quadratic energy (1/2) x.A x - b.x is
    nonincreasing across sweeps (coordinate descent); a safety assertion
    guards that up to roundoff.
    """
    matrix = matrix.tocsr()
    diag = matrix.diagonal()
    if np.any(diag <= 0.0):
        raise TimeStepError("VI system diagonal is not positive")
    indptr, indices, data = matrix.indptr, matrix.indices, matrix.data
    x = np.array(x0, dtype=float)
    np.clip(x, lower, upper, out=x)
    n = x.shape[0]

    def projected_residual():
        r = matrix @ x - rhs
        trial = np.clip(x - r / diag, lower, upper)
        return float(np.max(np.abs(x - trial))), r

    def energy(r):
        # with r = A x - b:  1/2 x.A x - b.x = 1/2 x.(r - b)
        return 0.5 * float(x @ (r - rhs))

    res, r = projected_residual()
    if res <= tol:
        return x, SolveReport(iterations=0, final_residual=res, converged=True)
    prev_energy = energy(r)

    for sweep in range(1, max_sweeps + 1):
        for i in range(n):
            s = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                s += data[k] * x[indices[k]]
            xi = x[i] - (s - rhs[i]) / diag[i]
            if xi < lower:
                xi = lower
            elif xi > upper:
                xi = upper
            x[i] = xi
        res, r = projected_residual()
        cur_energy = energy(r)
        slack = 1e-12 * (1.0 + abs(prev_energy))
        if cur_energy > prev_energy + slack:
            raise AssertionError(
                f"Gauss-Seidel energy increased: {prev_energy} -> {cur_energy}")
        prev_energy = cur_energy
        if res <= tol:
            return x, SolveReport(iterations=sweep, final_residual=res, converged=True)

    report = SolveReport(iterations=max_sweeps, final_residual=res, converged=False)
    raise ConvergenceError(
        f"projected Gauss-Seidel stalled after {max_sweeps} sweeps "
        f"(projected residual {res:.3e})", report)


def solve_obstacle_vi(mass_diag, laplacian, linear_term, previous,
                      eps, gamma, tau, tol=1e-9, max_sweeps=10000):
    """One semi-implicit step of the obstacle-constrained gradient flow.

    Solves, for phi in [-1, 1]^N,

        ( (eps/tau)(phi - prev) - (gamma/eps) phi, zeta - phi )_lumped
        + gamma eps (grad phi, grad(zeta - phi)) + (w, zeta - phi) >= 0,

    i.e. the VI with A = (eps/tau - gamma/eps) diag(m) + gamma eps K and
    b = (eps/tau) diag(m) prev - w.  Requires eps/tau > gamma/eps so that A
    is SPD with positive diagonal.
    """
    mass_diag = np.asarray(mass_diag, dtype=float)
    if np.any(mass_diag <= 0.0):
        raise ValueError("lumped mass must be positive")
    if eps <= 0.0 or gamma <= 0.0 or tau <= 0.0:
        raise ValueError("eps, gamma, tau must be positive")
    coeff = eps / tau - gamma / eps
    if coeff <= 0.0:
        raise TimeStepError(
            f"tau = {tau} too large: requires tau < eps^2/gamma = {eps * eps / gamma}")
    matrix = ((gamma * eps) * laplacian + sp.diags(coeff * mass_diag)).tocsr()
    rhs = (eps / tau) * mass_diag * previous - linear_term
    return projected_gauss_seidel(matrix, rhs, previous, tol=tol, max_sweeps=max_sweeps)
