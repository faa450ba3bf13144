"""Windowed acceleration of fixed-point iterations.

Each step mixes the trial point q(x_k) with the last min(k, m) + 1
iterates; the mixing coefficients minimize a residual least-squares
problem over the window. Two variants are provided: the primary scheme
combines the raw iterates x_{k-i}, while the companion scheme combines
their fixed-point images q(x_{k-i}) and builds its least-squares problem
from the current residual instead of the trial-point residual.

Residuals are evaluated once per point and cached in the window, so one
accelerated step costs exactly two g evaluations (trial point plus new
iterate) and a companion-scheme step costs one.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .core import (
    EvaluationError,
    IterationHistory,
    IterationRecord,
    Status,
    StoppingCriterion,
    _eval_g,
    as_vector,
)
from .leastsq import (
    DEFAULT_RANK_TOL,
    DegenerateDenominator,
    LsSystem,
    beta0_closed_form,
    solve_ls,
)

__all__ = [
    "SolverConfig",
    "Window",
    "anderson_solve",
    "anderson_step",
    "ngmres_solve",
    "ngmres_step",
]

# iterations without a (1 - 1e-12)-factor residual improvement before
# a solve is declared stagnated
STAGNATION_WINDOW = 50
STAGNATION_FACTOR = 1.0 - 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Acceleration knobs.

    ``beta_guard`` (off by default) restarts the window whenever the
    coefficient magnitudes sum past the given bound; the plain algorithm
    carries no such safeguard. ``use_closed_form_when_m0`` switches the
    single-coefficient step to its closed form instead of the generic
    least-squares path.
    """

    m: int = 0
    stop: StoppingCriterion = field(default_factory=StoppingCriterion)
    rank_tol: float = DEFAULT_RANK_TOL
    beta_guard: Optional[float] = None
    use_closed_form_when_m0: bool = True
    store_iterates: bool = False

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("window size m must be >= 0")
        if self.beta_guard is not None and not self.beta_guard > 0:
            raise ValueError("beta_guard must be positive when set")
        if not self.rank_tol > 0:
            raise ValueError("rank_tol must be positive")


class WindowEntry(NamedTuple):
    x: np.ndarray
    g: np.ndarray
    q: np.ndarray  # x - g, cached so no evaluation is ever repeated


class Window:
    """Newest-first bounded history of iterates with cached residuals.

    Capacity is m + 1; pushing beyond it evicts the oldest entry, so at
    iteration k the window holds exactly min(k, m) + 1 entries unless it
    was restarted.
    """

    def __init__(self, m: int):
        if m < 0:
            raise ValueError("window size m must be >= 0")
        self.capacity = m + 1
        self._entries: deque = deque(maxlen=m + 1)

    def push(self, x: np.ndarray, g: np.ndarray) -> None:
        self._entries.appendleft(WindowEntry(x=x, g=g, q=x - g))

    def reset(self, x: np.ndarray, g: np.ndarray) -> None:
        """Drop all history and keep only the given iterate."""
        self._entries.clear()
        self.push(x, g)

    def __len__(self) -> int:
        return len(self._entries)

    def __getitem__(self, i: int) -> WindowEntry:
        return self._entries[i]

    def __iter__(self):
        return iter(self._entries)


def _check_step_pre(window: Window, x_k: np.ndarray) -> WindowEntry:
    if len(window) == 0:
        raise ValueError("window must contain the current iterate")
    head = window[0]
    if head.x.shape != x_k.shape or not np.array_equal(head.x, x_k):
        raise ValueError("window entry 0 must be the current iterate x_k")
    return head


def _combine(q_k: np.ndarray, beta: np.ndarray, points) -> np.ndarray:
    out = q_k.copy()
    for b, p in zip(beta, points):
        out += b * (q_k - p)
    return out


def ngmres_step(
    problem,
    window: Window,
    x_k: np.ndarray,
    config: SolverConfig,
    k: int = 0,
):
    """One accelerated update from x_k using the windowed history.

    Computes the trial point q(x_k) from the cached residual, evaluates
    b = g(q(x_k)) (the step's single new evaluation), solves for the
    coefficients, and returns

        x_{k+1} = q(x_k) + sum_i beta_i (q(x_k) - x_{k-i})

    together with the record for index k. With m = 0 and the closed form
    enabled, a degenerate denominator falls back to beta = 0, i.e. the
    plain fixed-point update.
    """
    head = _check_step_pre(window, x_k)
    q_k = head.q
    b = _eval_g(problem, q_k)
    if not np.all(np.isfinite(b)):
        raise EvaluationError("g(q(x_k)) is not finite")
    norm_b = float(np.linalg.norm(b))
    if config.m == 0 and config.use_closed_form_when_m0:
        try:
            beta = np.array([beta0_closed_form(b, head.g)])
        except DegenerateDenominator:
            beta = np.zeros(1)
        optimum = float(np.linalg.norm(b + beta[0] * (b - head.g)))
    else:
        system = LsSystem(rhs_b=b, columns=tuple(b - e.g for e in window))
        sol = solve_ls(system, config.rank_tol)
        beta, optimum = sol.beta, sol.optimum_norm
    x_next = _combine(q_k, beta, (e.x for e in window))
    record = IterationRecord(
        k=k,
        res_norm=float(np.linalg.norm(head.g)),
        coefficients=tuple(float(v) for v in beta),
        ls_ratio=optimum / norm_b if norm_b > 0 else 1.0,
        x=x_k.copy() if config.store_iterates else None,
    )
    return x_next, record


def anderson_step(
    problem,
    window: Window,
    x_k: np.ndarray,
    config: SolverConfig,
    k: int = 0,
):
    """Companion update mixing fixed-point images of the windowed iterates.

    The coefficients minimize ``||g(x_k) + sum_i beta_i (g(x_k) -
    g(x_{k-i}))||_2`` over the cached residuals (no new evaluation), and
    the update is x_{k+1} = q(x_k) + sum_i beta_i (q(x_k) - q(x_{k-i})).
    """
    head = _check_step_pre(window, x_k)
    norm_b = float(np.linalg.norm(head.g))
    system = LsSystem(rhs_b=head.g, columns=tuple(head.g - e.g for e in window))
    sol = solve_ls(system, config.rank_tol)
    x_next = _combine(head.q, sol.beta, (e.q for e in window))
    record = IterationRecord(
        k=k,
        res_norm=norm_b,
        coefficients=tuple(float(v) for v in sol.beta),
        ls_ratio=sol.optimum_norm / norm_b if norm_b > 0 else 1.0,
        x=x_k.copy() if config.store_iterates else None,
    )
    return x_next, record


def _accelerated_solve(
    problem,
    x0,
    config: SolverConfig,
    step_fn: Callable,
    step_evals: int,
) -> IterationHistory:
    stop = config.stop
    x = as_vector(x0, problem.dim)
    gx = _eval_g(problem, x)
    evals = 1
    if not np.all(np.isfinite(gx)):
        raise EvaluationError("g(x0) is not finite")
    r = float(np.linalg.norm(gx))
    window = Window(config.m)
    window.push(x, gx)
    records = []
    k = 0
    best = r
    flat = 0

    def terminal_record() -> IterationRecord:
        return IterationRecord(
            k=k, res_norm=r, x=x.copy() if config.store_iterates else None
        )

    while True:
        if r <= stop.tol:
            records.append(terminal_record())
            status = Status.CONVERGED
            break
        if r > stop.divergence_cap:
            records.append(terminal_record())
            status = Status.DIVERGED
            break
        if k >= stop.max_iters:
            records.append(terminal_record())
            status = Status.MAX_ITERS
            break
        if flat >= STAGNATION_WINDOW:
            records.append(terminal_record())
            status = Status.STAGNATED
            break
        try:
            x_next, rec = step_fn(problem, window, x, config, k=k)
        except EvaluationError:
            records.append(terminal_record())
            status = Status.DIVERGED
            break
        evals += step_evals
        if not np.all(np.isfinite(x_next)):
            records.append(rec)
            status = Status.DIVERGED
            break
        g_next = _eval_g(problem, x_next)
        evals += 1
        if not np.all(np.isfinite(g_next)):
            records.append(rec)
            status = Status.DIVERGED
            break
        restart = (
            config.beta_guard is not None and rec.sum_abs_beta > config.beta_guard
        )
        if restart:
            rec = replace(rec, restarted=True)
        records.append(rec)
        k += 1
        x, gx = x_next, g_next
        r = float(np.linalg.norm(gx))
        if restart:
            window.reset(x, gx)
        else:
            window.push(x, gx)
        if r < best * STAGNATION_FACTOR:
            best = r
            flat = 0
        else:
            flat += 1
    return IterationHistory(records=records, status=status, g_eval_count=evals)


def ngmres_solve(problem, x0, config: SolverConfig) -> IterationHistory:
    """Run the windowed acceleration from x0 until a stopping rule fires.

    The window starts as {x0} and grows to capacity m + 1. With the
    guard enabled, a step whose coefficient magnitudes sum past the
    bound is flagged and the window restarts from the new iterate.
    Besides the base stopping rules, a solve is declared ``stagnated``
    after 50 consecutive iterations without residual improvement.
    """
    return _accelerated_solve(problem, x0, config, ngmres_step, step_evals=1)


def anderson_solve(problem, x0, config: SolverConfig) -> IterationHistory:
    """Companion-scheme analogue of :func:`ngmres_solve`."""
    return _accelerated_solve(problem, x0, config, anderson_step, step_evals=0)
