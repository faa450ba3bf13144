"""Dense least-squares solver for the per-step coefficient problem.

Each acceleration step minimizes ``||b + D beta||_2`` over the mixing
coefficients, where b is the residual at the trial point and the columns
of D are residual differences against the windowed history. Near
convergence those columns become nearly collinear, so the solver uses a
column-pivoted Householder QR with a relative rank threshold and returns
the minimum-norm minimizer on rank deficiency. Normal equations are
avoided because they square the condition number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateDenominator",
    "LsSolution",
    "LsSystem",
    "beta0_closed_form",
    "solve_ls",
]

DEFAULT_RANK_TOL = 1e-12


class DegenerateDenominator(ArithmeticError):
    """Closed-form coefficient denominator is numerically zero."""


@dataclass(frozen=True)
class LsSystem:
    """Right-hand side b and difference columns D of one step's problem."""

    rhs_b: np.ndarray
    columns: tuple

    def __post_init__(self):
        b = np.asarray(self.rhs_b, dtype=float)
        if b.ndim != 1 or b.size < 1:
            raise ValueError("rhs_b must be a nonempty 1-D vector")
        cols = tuple(np.asarray(c, dtype=float) for c in self.columns)
        if len(cols) < 1:
            raise ValueError("at least one column is required")
        for c in cols:
            if c.shape != b.shape:
                raise ValueError("all columns must match the rhs length")
        if not (np.all(np.isfinite(b)) and all(np.all(np.isfinite(c)) for c in cols)):
            raise ValueError("least-squares input must be finite")
        object.__setattr__(self, "rhs_b", b)
        object.__setattr__(self, "columns", cols)

    def matrix(self) -> np.ndarray:
        return np.column_stack(self.columns)


@dataclass(frozen=True)
class LsSolution:
    """Minimizer beta, the recomputed optimum norm, and numerical rank."""

    beta: np.ndarray
    optimum_norm: float
    rank: int


def _householder_vector(x: np.ndarray):
    """Reflector (v, tau) with (I - tau v v^T) x = alpha e1.

    The sign of alpha is chosen opposite to x[0] so v has no cancellation.
    """
    normx = float(np.linalg.norm(x))
    alpha = -math.copysign(normx, x[0])
    v = x.copy()
    v[0] -= alpha
    tau = 2.0 / float(v @ v)
    return v, tau, alpha


def _qr(A: np.ndarray, pivot: bool):
    """Householder QR, optionally with greedy column pivoting.

    Returns (R, reflectors, piv): R is upper trapezoidal, reflectors is a
    list of (offset, v, tau) in application order, and piv satisfies
    A[:, piv] = Q R. Column norms are recomputed at every step rather
    than downdated; the systems here are tiny.
    """
    R = np.array(A, dtype=float)
    n, p = R.shape
    piv = np.arange(p)
    reflectors = []
    for k in range(min(n, p)):
        if pivot:
            norms = np.sqrt(np.sum(R[k:, k:] ** 2, axis=0))
            j = int(np.argmax(norms))
            if norms[j] == 0.0:
                break
            if j != 0:
                R[:, [k, k + j]] = R[:, [k + j, k]]
                piv[[k, k + j]] = piv[[k + j, k]]
        elif not np.any(R[k:, k]):
            continue
        v, tau, alpha = _householder_vector(R[k:, k])
        R[k:, k:] -= tau * np.outer(v, v @ R[k:, k:])
        R[k, k] = alpha
        R[k + 1 :, k] = 0.0
        reflectors.append((k, v, tau))
    return R, reflectors, piv


def _apply_qt(reflectors, y: np.ndarray) -> np.ndarray:
    out = np.array(y, dtype=float)
    for k, v, tau in reflectors:
        out[k:] -= tau * v * float(v @ out[k:])
    return out


def _apply_q(reflectors, y: np.ndarray) -> np.ndarray:
    out = np.array(y, dtype=float)
    for k, v, tau in reversed(reflectors):
        out[k:] -= tau * v * float(v @ out[k:])
    return out


def _back_substitute(R: np.ndarray, c: np.ndarray) -> np.ndarray:
    n = c.size
    z = np.zeros(n)
    for i in range(n - 1, -1, -1):
        z[i] = (c[i] - R[i, i + 1 :] @ z[i + 1 :]) / R[i, i]
    return z


def _forward_substitute(L: np.ndarray, c: np.ndarray) -> np.ndarray:
    n = c.size
    z = np.zeros(n)
    for i in range(n):
        z[i] = (c[i] - L[i, :i] @ z[:i]) / L[i, i]
    return z


def _min_norm_lstsq(A: np.ndarray, y: np.ndarray, rank_tol: float):
    """Minimum-norm least-squares solution of A z ~ y.

    The numerical rank r is the number of leading R diagonal entries
    exceeding ``rank_tol`` times the largest column norm. When r is less
    than the column count, a second (unpivoted) QR of the leading rows'
    transpose completes the orthogonal decomposition and yields the
    minimum-norm solution.
    """
    n, p = A.shape
    R, reflectors, piv = _qr(A, pivot=True)
    rank = 0
    if reflectors:
        head = abs(R[0, 0])
        for k in range(len(reflectors)):
            if abs(R[k, k]) > rank_tol * head:
                rank += 1
            else:
                break
    z = np.zeros(p)
    if rank == 0:
        return z, 0
    c = _apply_qt(reflectors, y)[:rank]
    if rank == p:
        zp = _back_substitute(R[:p, :p], c)
    else:
        R1t = np.ascontiguousarray(R[:rank, :].T)  # p x rank
        T, refl2, _ = _qr(R1t, pivot=False)
        w = _forward_substitute(T[:rank, :rank].T, c)
        zp = _apply_q(refl2, np.concatenate([w, np.zeros(p - rank)]))
    z[piv] = zp
    return z, rank


def solve_ls(system: LsSystem, rank_tol: float = DEFAULT_RANK_TOL) -> LsSolution:
    """Minimize ``||b + D beta||_2``; minimum-norm beta on rank deficiency.

    The optimum norm is recomputed from the returned beta rather than
    read off the factorization. Zero or dependent columns are handled by
    rank truncation, never by raising.
    """
    if not rank_tol > 0:
        raise ValueError("rank_tol must be positive")
    D = system.matrix()
    b = system.rhs_b
    beta, rank = _min_norm_lstsq(D, -b, rank_tol)
    optimum = float(np.linalg.norm(b + D @ beta))
    return LsSolution(beta=beta, optimum_norm=optimum, rank=rank)


def beta0_closed_form(rq: np.ndarray, r: np.ndarray, degenerate_tol: float | None = None) -> float:
    """Single-coefficient minimizer of ``||rq + beta (rq - r)||_2``.

    Equals -<rq, rq - r> / ||rq - r||^2, the window-0 acceleration
    coefficient. Raises :class:`DegenerateDenominator` when ``rq - r``
    is numerically zero (default threshold scales with the input norms);
    callers typically fall back to beta = 0.
    """
    rq = np.asarray(rq, dtype=float)
    r = np.asarray(r, dtype=float)
    if rq.shape != r.shape:
        raise ValueError("rq and r must have the same shape")
    d = rq - r
    dnorm = float(np.linalg.norm(d))
    if degenerate_tol is None:
        degenerate_tol = 1e-14 * (float(np.linalg.norm(rq)) + float(np.linalg.norm(r)))
    if dnorm <= degenerate_tol:
        raise DegenerateDenominator(
            f"||r(q(x)) - r(x)|| = {dnorm:.3e} is below the degeneracy threshold"
        )
    return -float(rq @ d) / (dnorm * dnorm)
