"""Benchmark fixed-point problems plus small dense-matrix utilities.

Two problem families are provided: a 2x2 quadratic system whose
fixed-point map contracts or expands depending on two coefficients, and
a trigonometric family of arbitrary size calibrated so the vector of
pi/4 entries is an exact root. Both carry analytic Jacobians of the
fixed-point map; a central-difference Jacobian serves as the
verification oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EvaluationError, NonlinearProblem, as_vector, _eval_g

__all__ = [
    "Quadratic2DParams",
    "TrigParams",
    "jacobian_fd",
    "make_problem",
    "make_quadratic_2d",
    "make_trigonometric",
    "operator_norm",
    "registry_names",
]


@dataclass(frozen=True)
class Quadratic2DParams:
    c1: float
    c2: float

    def __post_init__(self):
        if not (np.isfinite(self.c1) and np.isfinite(self.c2)):
            raise ValueError("c1 and c2 must be finite")


@dataclass(frozen=True)
class TrigParams:
    s: int

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("system size s must be >= 1")


def make_quadratic_2d(params: Quadratic2DParams) -> NonlinearProblem:
    """2x2 problem with fixed-point map

        q(z) = [c1/2 (z1 + z1^2 + z2^2), c2/2 (z1^2 + z2)]

    and g(x) = x - q(x). The origin is a root, and the Jacobian of q at
    the origin is diag(c1/2, c2/2), so its spectral norm is
    max(|c1|, |c2|) / 2.
    """
    c1, c2 = float(params.c1), float(params.c2)

    def g(x: np.ndarray) -> np.ndarray:
        z1, z2 = x
        q = np.array([0.5 * c1 * (z1 + z1 * z1 + z2 * z2), 0.5 * c2 * (z1 * z1 + z2)])
        return x - q

    def q_jacobian(x: np.ndarray) -> np.ndarray:
        z1, z2 = x
        return np.array([[c1 * z1 + 0.5 * c1, c1 * z2], [c2 * z1, 0.5 * c2]])

    return NonlinearProblem(
        dim=2,
        g=g,
        known_solution=np.zeros(2),
        q_jacobian=q_jacobian,
        name="quadratic2d",
    )


def make_trigonometric(params: TrigParams) -> NonlinearProblem:
    """Size-s trigonometric system, exact root at z = pi/4 everywhere.

    The i-th raw component is s - sum_j cos(z_j) + i (1 - cos(z_i)) -
    sin(z_i) with 1-based i; g subtracts the raw value at the root and
    scales by 1/s, so g vanishes identically at the root by
    construction. q(x) = x - g(x).
    """
    s = int(params.s)
    xstar = np.full(s, np.pi / 4.0)
    idx = np.arange(1, s + 1, dtype=float)

    def raw(z: np.ndarray) -> np.ndarray:
        cz = np.cos(z)
        return (s - cz.sum()) + idx * (1.0 - cz) - np.sin(z)

    offset = raw(xstar)

    def g(z: np.ndarray) -> np.ndarray:
        return (raw(z) - offset) / s

    def q_jacobian(z: np.ndarray) -> np.ndarray:
        sz, cz = np.sin(z), np.cos(z)
        gprime = (np.tile(sz, (s, 1)) + np.diag(idx * sz - cz)) / s
        return np.eye(s) - gprime

    return NonlinearProblem(
        dim=s,
        g=g,
        known_solution=xstar,
        q_jacobian=q_jacobian,
        name="trigonometric",
    )


_REGISTRY = {
    "quadratic2d": lambda params: make_quadratic_2d(
        Quadratic2DParams(c1=float(params["c1"]), c2=float(params["c2"]))
    ),
    "trigonometric": lambda params: make_trigonometric(TrigParams(s=int(params["s"]))),
}


def registry_names() -> tuple:
    return tuple(sorted(_REGISTRY))


def make_problem(name: str, **params) -> NonlinearProblem:
    """Construct a registered problem by name.

    ``quadratic2d`` takes c1, c2; ``trigonometric`` takes s.
    """
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown problem {name!r}; available: {', '.join(registry_names())}"
        ) from None
    try:
        return factory(params)
    except KeyError as missing:
        raise ValueError(f"problem {name!r} requires parameter {missing}") from None


def jacobian_fd(problem: NonlinearProblem, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the fixed-point map q.

    Column j is (q(x + h e_j) - q(x - h e_j)) / (2h). Exact for linear
    maps up to roundoff; the default step is the usual double-precision
    compromise between truncation and cancellation.
    """
    if not h > 0:
        raise ValueError("finite-difference step h must be positive")
    v = as_vector(x, problem.dim)
    n = problem.dim
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        xp, xm = v + e, v - e
        qp = xp - _eval_g(problem, xp)
        qm = xm - _eval_g(problem, xm)
        if not (np.all(np.isfinite(qp)) and np.all(np.isfinite(qm))):
            raise EvaluationError("non-finite evaluation in finite-difference stencil")
        J[:, j] = (qp - qm) / (2.0 * h)
    return J


def operator_norm(matrix, rel_tol: float = 1e-10, max_iters: int = 10000) -> float:
    """Spectral norm (largest singular value) via power iteration on M^T M.

    Convergence is declared when the eigen-residual satisfies
    ``||B v - lam v|| <= rel_tol * lam`` with B = M^T M, which bounds the
    eigenvalue error by rel_tol * lam for symmetric B. Raises
    ``RuntimeError`` if the iteration cap is hit first.
    """
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2:
        raise ValueError("operator_norm expects a 2-D matrix")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    B = M.T @ M
    if not np.any(B):
        return 0.0
    rng = np.random.default_rng(0)
    v = rng.standard_normal(B.shape[0])
    v /= np.linalg.norm(v)
    w = B @ v
    for _ in range(max_iters):
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            # start landed in the null space; redraw
            v = rng.standard_normal(B.shape[0])
            v /= np.linalg.norm(v)
            w = B @ v
            continue
        v = w / nw
        w = B @ v
        lam = float(v @ w)
        if lam > 0.0 and float(np.linalg.norm(w - lam * v)) <= rel_tol * lam:
            return float(np.sqrt(lam))
    raise RuntimeError(f"power iteration did not converge within {max_iters} iterations")
