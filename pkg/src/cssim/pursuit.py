"""Subspace Pursuit reconstruction and its arithmetic cost model.

The algorithm keeps a working support of size S. Initialization correlates
the measurements against the columns through the plain transpose (cheap, no
least squares); each round then merges the previous support with the S
strongest residual correlations, solves least squares on the merged set,
prunes back to the S largest coefficients, and refits. Iteration stops as
soon as the residual norm stops improving, returning the best iterate seen.

The matrix A is real while measurements are complex, so every least-squares
problem is solved once with the real and imaginary parts stacked as two
right-hand sides.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import SingularSubproblem

# Relative rank threshold: condition numbers beyond 1/COND trigger the SVD
# fallback, and a rank drop surviving it is a degenerate column set.
_COND = 1e-12


@dataclass(frozen=True)
class PursuitProblem:
    """Inputs to one reconstruction: A = P Theta Psi, measurements y, sparsity s."""

    a: np.ndarray
    y: np.ndarray
    s: int

    def __post_init__(self):
        m, n = self.a.shape
        if not 1 <= self.s <= m <= n:
            raise ValueError(f"need 1 <= s <= M <= N, got s={self.s}, M={m}, N={n}")
        if self.y.shape != (m,):
            raise ValueError(f"y must have length {m}, got {self.y.shape}")


@dataclass(frozen=True)
class PursuitResult:
    alpha_hat: np.ndarray
    support: np.ndarray
    iterations: int
    residual_norms: tuple[float, ...] = field(default=())


def _top_s(magnitudes: np.ndarray, s: int) -> np.ndarray:
    """Indices of the s largest entries; ties broken by ascending index."""
    order = np.argsort(-magnitudes, kind="stable")
    return np.sort(order[:s])


def _solve_ls(a_sub: np.ndarray, y2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares fit of stacked real/imag measurements on real columns.

    ``y2`` is (M, 2) holding the real and imaginary parts as two right-hand
    sides; the returned coefficients and residual share that layout. Pivoted
    QR first; SVD fallback if the pivoted factor reports an effective rank
    drop. A drop that survives the SVD means the selected columns are
    genuinely degenerate.
    """
    full_rank = min(a_sub.shape)
    sol, _, rank, _ = scipy.linalg.lstsq(
        a_sub, y2, cond=_COND, lapack_driver="gelsy"
    )
    if rank < full_rank:
        sol, _, rank, _ = scipy.linalg.lstsq(
            a_sub, y2, cond=_COND, lapack_driver="gelsd"
        )
        if rank < full_rank:
            raise SingularSubproblem(
                f"selected {a_sub.shape[1]} columns have rank {rank}"
            )
    residual = y2 - a_sub @ sol
    return sol, residual


def subspace_pursuit(
    problem: PursuitProblem,
    init: str = "transpose",
    max_iter: int | None = None,
    tol: float = 1e-12,
) -> PursuitResult:
    """Recover an s-sparse complex vector from y = A alpha.

    ``init`` selects how the starting support is found: "transpose" uses
    |A^T y| (the default, cheap), "pinv" uses the least-norm solution |A^+ y|
    and a least-squares starting residual. Iterations are capped at
    ``max_iter`` (default max(s, 100)).

    The returned coefficients are always the least-squares fit on the final
    support.
    """
    a = np.ascontiguousarray(problem.a, dtype=np.float64)
    y = np.asarray(problem.y, dtype=np.complex128)
    s = problem.s
    col_norms = np.einsum("ij,ij->j", a, a)
    if np.any(col_norms == 0.0):
        raise ValueError("A has zero columns")

    # All inner arithmetic runs on stacked (., 2) real/imag columns so the
    # large correlations stay real GEMMs.
    y2 = np.column_stack([y.real, y.imag])

    def correlate(v2):
        c = a.T @ v2
        return np.hypot(c[:, 0], c[:, 1])

    if init == "pinv":
        x_full, _ = _solve_ls(a, y2)
        support = _top_s(np.hypot(x_full[:, 0], x_full[:, 1]), s)
        coef, residual = _solve_ls(a[:, support], y2)
    elif init == "transpose":
        support = _top_s(correlate(y2), s)
        a_sub = a[:, support]
        residual = y2 - a_sub @ (a_sub.T @ y2)
        coef = None  # least-squares fit deferred until this iterate is final
    else:
        raise ValueError(f"unknown init {init!r}")

    norms = [float(np.linalg.norm(residual))]
    floor = tol * float(np.linalg.norm(y2))
    cap = max_iter if max_iter is not None else max(s, 100)
    iterations = 0

    for _ in range(cap):
        candidates = np.union1d(support, _top_s(correlate(residual), s))
        merged_coef, _ = _solve_ls(a[:, candidates], y2)
        merged_mag = np.hypot(merged_coef[:, 0], merged_coef[:, 1])
        new_support = candidates[_top_s(merged_mag, s)]
        new_coef, new_residual = _solve_ls(a[:, new_support], y2)
        new_norm = float(np.linalg.norm(new_residual))

        if new_norm > norms[-1]:
            break  # residual grew: keep the previous iterate
        # A repeated support yields the same least-squares residual, so an
        # exact norm plateau is a fixed point of the iteration.
        plateau = new_norm == norms[-1]
        support, coef, residual = new_support, new_coef, new_residual
        norms.append(new_norm)
        iterations += 1
        if plateau or new_norm <= floor:
            break

    if coef is None:
        coef, _ = _solve_ls(a[:, support], y2)

    alpha_hat = np.zeros(a.shape[1], dtype=np.complex128)
    alpha_hat[support] = coef[:, 0] + 1j * coef[:, 1]
    return PursuitResult(
        alpha_hat=alpha_hat,
        support=support,
        iterations=iterations,
        residual_norms=tuple(norms),
    )


def ls_cost(m_rows: int, s: int) -> int:
    """Flop count of one SVD-based least-squares solve, s variables, m_rows rows."""
    return 2 * m_rows * s**2 + 11 * s**3


@dataclass(frozen=True)
class ComplexityModel:
    """Arithmetic cost of a Subspace Pursuit run with k iterations.

    The per-call overhead constant c covers interpreter and library call
    costs that dominate at these small problem sizes; it multiplies the
    iteration count and is reported separately from the flop total.
    """

    k: int
    s: int
    m_rows: int
    n: int
    c: float = 3e9

    def line_items(self) -> dict[str, int]:
        k, s, m, n = self.k, self.s, self.m_rows, self.n
        return {
            "init_correlation": 4 * m * n,
            "init_residual": 2 * m + 8 * m * s,
            "loop_correlations": 4 * k * m * n,
            "loop_least_squares": k * ls_cost(m, 2 * s),
            "loop_residuals": k * (2 * m + 4 * m * s + ls_cost(m, s)),
        }

    def closed_form(self) -> int:
        k, s, m, n = self.k, self.s, self.m_rows, self.n
        return (
            99 * k * s**3
            + 4 * (k + 1) * m * n
            + 2 * (k + 1) * m
            + 4 * (k + 2) * m * s
            + 10 * m * k * s**2
        )


@dataclass(frozen=True)
class PredictedCost:
    line_item_total: int
    closed_form_total: int
    overhead: float

    @property
    def total(self) -> float:
        return self.closed_form_total + self.overhead


def predicted_cost(model: ComplexityModel) -> PredictedCost:
    """Evaluate line items and the closed-form total; the two must agree."""
    if min(model.k, model.s, model.m_rows, model.n) < 0:
        raise ValueError("model fields must be non-negative")
    items = sum(model.line_items().values())
    closed = model.closed_form()
    return PredictedCost(
        line_item_total=items,
        closed_form_total=closed,
        overhead=model.c * model.k,
    )
