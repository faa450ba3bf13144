"""Convergence-rate diagnostics and bound checks for solve histories.

q-factors are consecutive residual-norm ratios; root factors are k-th
roots of the residual norms. For a contraction factor rho below
sqrt(2) - 1, the single-window acceleration admits the per-step bound
eta = rho (1 + rho) / (1 - rho) < 1, which these helpers expose for
empirical checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import IterationHistory, NonlinearProblem, as_vector, residual

__all__ = [
    "AssumptionSummary",
    "DiagnosticsReport",
    "ETA_RHO_LIMIT",
    "assumption_monitor",
    "build_report",
    "eta_bound",
    "eta_bound_valid",
    "lemma_sandwich_check",
    "q_factors",
    "root_factors",
]

# contraction factors below this make the eta bound smaller than one
ETA_RHO_LIMIT = math.sqrt(2.0) - 1.0


def _positive_norms(history: IterationHistory) -> np.ndarray:
    """Residual norms truncated at the first exact zero."""
    if len(history.records) < 2:
        raise ValueError("need at least two records to form factors")
    norms = history.res_norms()
    nz = np.nonzero(norms == 0.0)[0]
    if nz.size:
        norms = norms[: nz[0]]
    return norms


def q_factors(history: IterationHistory) -> np.ndarray:
    """Consecutive ratios ||r_k|| / ||r_{k-1}||, k >= 1.

    Records from the first exact-zero residual onward are dropped, so
    the sequence may be shorter than the history (or empty).
    """
    norms = _positive_norms(history)
    return norms[1:] / norms[:-1]


def root_factors(history: IterationHistory) -> np.ndarray:
    """Root-convergence factors ||r_k||^(1/k), k >= 1 (zeros truncated)."""
    norms = _positive_norms(history)
    ks = np.arange(1, norms.size)
    return norms[1:] ** (1.0 / ks)


def eta_bound(rho: float) -> float:
    """Per-step factor bound rho (1 + rho) / (1 - rho) for the m = 0 scheme.

    Below one exactly when rho < sqrt(2) - 1; see
    :func:`eta_bound_valid`.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    return rho * (1.0 + rho) / (1.0 - rho)


def eta_bound_valid(rho: float) -> bool:
    """True when rho is small enough that the eta bound is below one."""
    return 0.0 < rho < ETA_RHO_LIMIT


def lemma_sandwich_check(problem: NonlinearProblem, x, rho: float) -> bool:
    """Two-sided residual/error comparison for a rho-contractive map.

    Checks (1 - rho) ||x - x*|| <= ||r(x)|| <= (1 + rho) ||x - x*||.
    Valid near the solution; far away it may legitimately fail.
    """
    if problem.known_solution is None:
        raise ValueError("problem has no known solution to compare against")
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    v = as_vector(x, problem.dim)
    err = float(np.linalg.norm(v - problem.known_solution))
    res = float(np.linalg.norm(residual(problem, v)))
    return (1.0 - rho) * err <= res <= (1.0 + rho) * err


class AssumptionSummary(NamedTuple):
    max_sum_abs_beta: float
    max_ls_ratio: float


def assumption_monitor(history: IterationHistory) -> AssumptionSummary:
    """Maxima of sum|beta| and the least-squares ratio over a history.

    Records without coefficients (plain fixed-point or terminal entries)
    contribute zero / are skipped.
    """
    if not history.records:
        raise ValueError("history is empty")
    max_beta = max(rec.sum_abs_beta for rec in history.records)
    ratios = [rec.ls_ratio for rec in history.records if rec.ls_ratio is not None]
    return AssumptionSummary(
        max_sum_abs_beta=float(max_beta),
        max_ls_ratio=float(max(ratios)) if ratios else 0.0,
    )


@dataclass(frozen=True)
class DiagnosticsReport:
    """Factor sequences plus assumption maxima for one history."""

    q_factors: np.ndarray
    root_factors: np.ndarray
    max_sum_abs_beta: float
    max_ls_ratio: float
    eta_bound: Optional[float] = None
    q_bound_satisfied: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "q_factors": [float(v) for v in self.q_factors],
            "root_factors": [float(v) for v in self.root_factors],
            "max_sum_abs_beta": self.max_sum_abs_beta,
            "max_ls_ratio": self.max_ls_ratio,
            "eta_bound": self.eta_bound,
            "q_bound_satisfied": self.q_bound_satisfied,
        }


def build_report(history: IterationHistory, rho: Optional[float] = None) -> DiagnosticsReport:
    """Assemble a report; with rho given, also evaluate the eta bound.

    ``q_bound_satisfied`` is set only when rho admits a sub-one bound.
    Histories with a single record yield empty factor sequences.
    """
    if len(history.records) >= 2:
        qf = q_factors(history)
        rf = root_factors(history)
    else:
        qf = np.empty(0)
        rf = np.empty(0)
    summary = assumption_monitor(history)
    eta = None
    satisfied = None
    if rho is not None:
        eta = eta_bound(rho)
        if eta_bound_valid(rho):
            satisfied = bool(np.all(qf <= eta)) if qf.size else True
    return DiagnosticsReport(
        q_factors=qf,
        root_factors=rf,
        max_sum_abs_beta=summary.max_sum_abs_beta,
        max_ls_ratio=summary.max_ls_ratio,
        eta_bound=eta,
        q_bound_satisfied=satisfied,
    )
