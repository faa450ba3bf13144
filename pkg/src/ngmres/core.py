"""Fixed-point problem abstraction, residuals, and the plain fixed-point solver.

State vectors are 1-D float64 numpy arrays; :func:`as_vector` is the
validating constructor applied at API boundaries. For a nonlinear system
g(x) = 0 the induced fixed-point map is q(x) = x - g(x), so the residual
r(x) = g(x) = x - q(x) serves both as the root-finding defect and as the
fixed-point defect.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

__all__ = [
    "EvaluationError",
    "IterationHistory",
    "IterationRecord",
    "NonlinearProblem",
    "Status",
    "StoppingCriterion",
    "as_vector",
    "fixed_point_solve",
    "fixed_point_step",
    "residual",
]

# residual norm a registered known solution must satisfy
SOLUTION_RESIDUAL_TOL = 1e-12


class EvaluationError(RuntimeError):
    """An evaluation produced non-finite values (overflow, NaN)."""


def as_vector(x, dim: Optional[int] = None) -> np.ndarray:
    """Validate and copy ``x`` into a finite 1-D float64 array.

    Scalars are promoted to length-1 vectors. Raises ``ValueError`` on
    non-finite entries, higher-rank input, or a mismatch with ``dim``.
    """
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D state vector, got shape {v.shape}")
    if v.size < 1:
        raise ValueError("state vector must have at least one entry")
    if dim is not None and v.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError("state vector entries must be finite")
    return v.copy()


@dataclass(frozen=True)
class NonlinearProblem:
    """A nonlinear system g(x) = 0 together with its fixed-point map.

    ``g`` must be pure and dimension-preserving; solvers treat it as the
    single source of evaluations and count every call. ``known_solution``
    (when given) is checked to satisfy ``||g(x*)|| <= 1e-12`` at
    construction. ``q_jacobian`` is the analytic Jacobian of
    q(x) = x - g(x), used by diagnostics only.
    """

    dim: int
    g: Callable[[np.ndarray], np.ndarray]
    known_solution: Optional[np.ndarray] = None
    q_jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("problem dimension must be >= 1")
        if self.known_solution is not None:
            xs = as_vector(self.known_solution, self.dim)
            object.__setattr__(self, "known_solution", xs)
            res = np.linalg.norm(_eval_g(self, xs))
            if not res <= SOLUTION_RESIDUAL_TOL:
                raise ValueError(
                    f"known_solution has residual norm {res:.3e} > {SOLUTION_RESIDUAL_TOL:.0e}"
                )

    def q(self, x: np.ndarray) -> np.ndarray:
        """Fixed-point map q(x) = x - g(x). Costs one g evaluation."""
        return x - self.g(x)


@dataclass(frozen=True)
class StoppingCriterion:
    """Termination rules on the residual norm ``||r_k||_2``."""

    tol: float = 1e-14
    max_iters: int = 300
    divergence_cap: float = 1e8

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol < self.divergence_cap:
            raise ValueError("tol must be smaller than divergence_cap")


class Status(str, Enum):
    """Terminal state of a solve."""

    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    DIVERGED = "diverged"
    STAGNATED = "stagnated"


@dataclass(frozen=True)
class IterationRecord:
    """Per-iterate log entry.

    ``coefficients`` holds the mixing coefficients computed by the step
    taken *from* this iterate; it is empty for plain fixed-point records
    and for the terminal iterate. ``ls_ratio`` is the least-squares
    optimum norm divided by the norm of its right-hand side (<= 1 up to
    roundoff, since zero coefficients are always feasible).
    """

    k: int
    res_norm: float
    coefficients: tuple = ()
    ls_ratio: Optional[float] = None
    x: Optional[np.ndarray] = None
    restarted: bool = False

    @property
    def sum_abs_beta(self) -> float:
        return float(sum(abs(b) for b in self.coefficients))


@dataclass
class IterationHistory:
    """Record sequence for one solve, plus its terminal status."""

    records: list
    status: Status
    g_eval_count: int

    @property
    def iterations(self) -> int:
        """Number of update steps taken (= len(records) - 1)."""
        return len(self.records) - 1

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    def res_norms(self) -> np.ndarray:
        return np.array([rec.res_norm for rec in self.records])


def _eval_g(problem: NonlinearProblem, x: np.ndarray) -> np.ndarray:
    """Evaluate g with a shape check; the result may be non-finite."""
    out = np.asarray(problem.g(x), dtype=float)
    if out.shape != (problem.dim,):
        raise ValueError(
            f"g returned shape {out.shape}, expected ({problem.dim},)"
        )
    return out


def residual(problem: NonlinearProblem, x) -> np.ndarray:
    """Residual r(x) = g(x) = x - q(x)."""
    v = as_vector(x, problem.dim)
    out = _eval_g(problem, v)
    if not np.all(np.isfinite(out)):
        raise EvaluationError("g(x) is not finite")
    return out


def fixed_point_step(problem: NonlinearProblem, x) -> np.ndarray:
    """One fixed-point update q(x) = x - g(x)."""
    v = as_vector(x, problem.dim)
    out = v - _eval_g(problem, v)
    if not np.all(np.isfinite(out)):
        raise EvaluationError("fixed-point step is not finite")
    return out


def fixed_point_solve(
    problem: NonlinearProblem,
    x0,
    stop: StoppingCriterion,
    store_iterates: bool = False,
) -> IterationHistory:
    """Iterate x <- q(x) until a stopping rule fires.

    Every iterate, including x0, gets a history record. A non-finite
    evaluation terminates with status ``diverged``; the last finite
    record is retained.
    """
    x = as_vector(x0, problem.dim)
    gx = _eval_g(problem, x)
    evals = 1
    if not np.all(np.isfinite(gx)):
        raise EvaluationError("g(x0) is not finite")
    r = float(np.linalg.norm(gx))
    records = []
    k = 0
    while True:
        records.append(
            IterationRecord(k=k, res_norm=r, x=x.copy() if store_iterates else None)
        )
        if r <= stop.tol:
            status = Status.CONVERGED
            break
        if r > stop.divergence_cap:
            status = Status.DIVERGED
            break
        if k >= stop.max_iters:
            status = Status.MAX_ITERS
            break
        x_next = x - gx
        if not np.all(np.isfinite(x_next)):
            status = Status.DIVERGED
            break
        g_next = _eval_g(problem, x_next)
        evals += 1
        if not np.all(np.isfinite(g_next)):
            status = Status.DIVERGED
            break
        x, gx = x_next, g_next
        r = float(np.linalg.norm(gx))
        k += 1
    return IterationHistory(records=records, status=status, g_eval_count=evals)
