"""Experiment harness: single solves, seeded sweeps, and method comparisons.

CSV output conventions
----------------------
history (``solve``): columns k, res_norm, q_factor, root_factor,
    sum_abs_beta, ls_ratio; factor cells are blank at k = 0 and wherever
    undefined. ``sweep`` prepends a ``trial`` column.
summary: one row per trial with trial, status, iterations, g_evals,
    max_q_factor, root_factor_final, max_sum_abs_beta; written next to
    the history file as ``<stem>_summary.csv``.
compare: column k plus one res_norm column per method, cells blank after
    a method has terminated.

Floats are written with shortest round-trip formatting and files carry
no timestamps, so identical specs produce byte-identical output. Initial
guesses are drawn from a counter-based 64-bit generator keyed by
(seed, trial), making trial streams independent of execution order.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import (
    EvaluationError,
    IterationHistory,
    NonlinearProblem,
    StoppingCriterion,
    as_vector,
    fixed_point_solve,
)
from .diagnostics import (
    assumption_monitor,
    build_report,
    eta_bound_valid,
    q_factors,
    root_factors,
)
from .problems import make_problem, operator_norm, registry_names
from .solver import SolverConfig, anderson_solve, ngmres_solve

__all__ = [
    "RunSpec",
    "SphereRule",
    "UsageError",
    "compare",
    "main",
    "run",
    "sample_x0",
]

METHODS = ("fp", "ngmres", "aa")


class UsageError(ValueError):
    """Invalid run specification or command-line input."""


@dataclass(frozen=True)
class SphereRule:
    """Sample initial guesses on the sphere of given radius around center."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius > 0:
            raise UsageError("sampling radius must be positive")


def sample_x0(rule: SphereRule, seed: int, trial_index: int) -> np.ndarray:
    """Deterministic sphere sample for one trial.

    Draws y uniformly from (-1, 1)^n using a stream keyed by
    (seed, trial_index) and returns center + radius * y / ||y||, so the
    sample sits exactly on the sphere. A zero draw (probability zero) is
    redrawn from the same stream.
    """
    key = np.array([seed, trial_index], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    n = rule.center.size
    while True:
        y = rng.uniform(-1.0, 1.0, n)
        ny = float(np.linalg.norm(y))
        if ny > 0.0:
            return rule.center + rule.radius * (y / ny)


@dataclass
class RunSpec:
    """One experiment: problem, method, initial-guess rule, stopping rules."""

    problem: str
    params: dict = field(default_factory=dict)
    method: str = "ngmres"
    m: int = 0
    x0: Optional[np.ndarray] = None
    sphere: Optional[SphereRule] = None
    stop: StoppingCriterion = field(default_factory=StoppingCriterion)
    trials: int = 1
    seed: int = 0
    out: Optional[str] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise UsageError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.m < 0:
            raise UsageError("window size m must be >= 0")
        if self.trials < 1:
            raise UsageError("trials must be >= 1")
        if (self.x0 is None) == (self.sphere is None):
            raise UsageError("exactly one of x0 and sphere must be given")


def _solve_one(problem: NonlinearProblem, spec: RunSpec, x0) -> IterationHistory:
    if spec.method == "fp":
        return fixed_point_solve(problem, x0, spec.stop)
    config = SolverConfig(m=spec.m, stop=spec.stop)
    if spec.method == "ngmres":
        return ngmres_solve(problem, x0, config)
    return anderson_solve(problem, x0, config)


def _x0_for_trial(spec: RunSpec, trial: int) -> np.ndarray:
    if spec.x0 is not None:
        return spec.x0
    return sample_x0(spec.sphere, spec.seed, trial)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _history_rows(history: IterationHistory) -> list:
    if len(history.records) >= 2:
        qf = q_factors(history)
        rf = root_factors(history)
    else:
        qf = rf = np.empty(0)
    rows = []
    for i, rec in enumerate(history.records):
        stepped = len(rec.coefficients) > 0
        rows.append(
            [
                rec.k,
                rec.res_norm,
                qf[i - 1] if 1 <= i <= qf.size else None,
                rf[i - 1] if 1 <= i <= rf.size else None,
                rec.sum_abs_beta if stepped else None,
                rec.ls_ratio,
            ]
        )
    return rows


def _summary_row(trial: int, history: IterationHistory) -> list:
    if len(history.records) >= 2:
        qf = q_factors(history)
        rf = root_factors(history)
    else:
        qf = rf = np.empty(0)
    monitor = assumption_monitor(history)
    return [
        trial,
        history.status.value,
        history.iterations,
        history.g_eval_count,
        float(qf.max()) if qf.size else None,
        float(rf[-1]) if rf.size else None,
        monitor.max_sum_abs_beta,
    ]


def summary_path(history_path) -> Path:
    p = Path(history_path)
    return p.with_name(p.stem + "_summary" + (p.suffix or ".csv"))


HISTORY_HEADER = ["k", "res_norm", "q_factor", "root_factor", "sum_abs_beta", "ls_ratio"]
SUMMARY_HEADER = [
    "trial",
    "status",
    "iterations",
    "g_evals",
    "max_q_factor",
    "root_factor_final",
    "max_sum_abs_beta",
]


def run(spec: RunSpec, trial_column: Optional[bool] = None) -> int:
    """Execute every trial of a spec and write history + summary CSVs.

    The history CSV carries a leading ``trial`` column when
    ``trial_column`` is true (default: only for multi-trial specs).
    Returns 0 when all trials reach a terminal status; divergence is a
    terminal status, not an error. Returns 2 on an evaluation failure.
    """
    if spec.out is None:
        raise UsageError("an output path is required")
    problem = make_problem(spec.problem, **spec.params)
    if trial_column is None:
        trial_column = spec.trials > 1
    history_rows = []
    summary_rows = []
    try:
        for trial in range(spec.trials):
            history = _solve_one(problem, spec, _x0_for_trial(spec, trial))
            for row in _history_rows(history):
                history_rows.append([trial] + row if trial_column else row)
            summary_rows.append(_summary_row(trial, history))
    except EvaluationError as exc:
        print(f"evaluation failure in trial {trial}: {exc}", file=sys.stderr)
        return 2
    header = (["trial"] + HISTORY_HEADER) if trial_column else HISTORY_HEADER
    _write_csv(spec.out, header, history_rows)
    _write_csv(summary_path(spec.out), SUMMARY_HEADER, summary_rows)
    return 0


def _method_label(spec: RunSpec) -> str:
    return "fp" if spec.method == "fp" else f"{spec.method}{spec.m}"


def _same_x0_rule(a: RunSpec, b: RunSpec) -> bool:
    if (a.x0 is None) != (b.x0 is None):
        return False
    if a.x0 is not None:
        return np.array_equal(a.x0, b.x0)
    return (
        np.array_equal(a.sphere.center, b.sphere.center)
        and a.sphere.radius == b.sphere.radius
        and a.seed == b.seed
    )


def compare(specs: Sequence[RunSpec], out) -> int:
    """Run several methods from one initial guess; write an aligned table.

    All specs must share the problem and the x0 rule. Cells are blank
    after a method has terminated.
    """
    if not specs:
        raise UsageError("compare needs at least one run spec")
    base = specs[0]
    for other in specs[1:]:
        if other.problem != base.problem or other.params != base.params:
            raise UsageError("compare specs must share the same problem")
        if not _same_x0_rule(other, base):
            raise UsageError("compare specs must share the same x0 rule")
    labels = [_method_label(s) for s in specs]
    if len(set(labels)) != len(labels):
        raise UsageError(f"duplicate method specs in compare: {labels}")
    problem = make_problem(base.problem, **base.params)
    x0 = _x0_for_trial(base, 0)
    try:
        histories = [_solve_one(problem, s, x0) for s in specs]
    except EvaluationError as exc:
        print(f"evaluation failure: {exc}", file=sys.stderr)
        return 2
    depth = max(len(h.records) for h in histories)
    rows = []
    for k in range(depth):
        row = [k]
        for h in histories:
            row.append(h.records[k].res_norm if k < len(h.records) else None)
        rows.append(row)
    _write_csv(out, ["k"] + [f"res_norm_{lab}" for lab in labels], rows)
    return 0


def diagnose(spec: RunSpec, out) -> int:
    """Solve once and write a JSON diagnostics report.

    The contraction-factor proxy rho is the spectral norm of the
    fixed-point Jacobian at the known solution, when both are available;
    the factor bound is attached only when rho admits one.
    """
    problem = make_problem(spec.problem, **spec.params)
    try:
        history = _solve_one(problem, spec, _x0_for_trial(spec, 0))
    except EvaluationError as exc:
        print(f"evaluation failure: {exc}", file=sys.stderr)
        return 2
    rho = None
    if problem.q_jacobian is not None and problem.known_solution is not None:
        rho = operator_norm(problem.q_jacobian(problem.known_solution))
    report = build_report(history, rho=rho if rho is not None and 0.0 < rho < 1.0 else None)
    payload = {
        "problem": spec.problem,
        "params": spec.params,
        "method": spec.method,
        "m": spec.m,
        "status": history.status.value,
        "iterations": history.iterations,
        "g_evals": history.g_eval_count,
        "rho": rho,
        "eta_bound_valid": eta_bound_valid(rho) if rho is not None else None,
    }
    payload.update(report.to_dict())
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# command line


_DEFAULTS = {
    "method": "ngmres",
    "m": 0,
    "tol": 1e-14,
    "max_iters": 300,
    "seed": 0,
    "trials": 1,
    "center": "0",
    "c1": 0.8,
    "c2": 2.0 / 3.0,
    "s": 100,
}

_OPTION_KEYS = (
    "problem",
    "c1",
    "c2",
    "s",
    "method",
    "m",
    "tol",
    "max_iters",
    "seed",
    "trials",
    "x0",
    "radius",
    "center",
    "out",
    "methods",
)


def _parse_vector(text) -> np.ndarray:
    if isinstance(text, (list, tuple)):
        return as_vector([float(v) for v in text])
    try:
        return as_vector([float(part) for part in str(text).split(",") if part.strip() != ""])
    except ValueError as exc:
        raise UsageError(f"could not parse vector {text!r}: {exc}") from None


def _parse_center(text, dim: int) -> np.ndarray:
    if isinstance(text, (int, float)):
        return np.full(dim, float(text))
    parts = str(text).split(",")
    if len(parts) == 1:
        try:
            return np.full(dim, float(parts[0]))
        except ValueError:
            raise UsageError(f"could not parse center {text!r}") from None
    return as_vector(_parse_vector(text), dim)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file providing defaults for any flag")
    p.add_argument("--problem", help=f"problem name: {', '.join(registry_names())}")
    p.add_argument("--c1", type=float, help="quadratic2d coefficient c1")
    p.add_argument("--c2", type=float, help="quadratic2d coefficient c2")
    p.add_argument("--s", type=int, help="trigonometric system size")
    p.add_argument("--method", choices=list(METHODS), help="fp, ngmres, or aa")
    p.add_argument("--m", type=int, help="window size (ngmres/aa)")
    p.add_argument("--tol", type=float, help="residual-norm tolerance (default 1e-14)")
    p.add_argument("--max-iters", dest="max_iters", type=int, help="iteration cap (default 300)")
    p.add_argument("--seed", type=int, help="base seed for sphere sampling")
    p.add_argument("--trials", type=int, help="number of trials (sweep)")
    p.add_argument("--x0", help="explicit initial guess, comma separated (use --x0=...)")
    p.add_argument("--radius", type=float, help="sphere-sampling radius")
    p.add_argument("--center", help="sphere center: scalar or comma-separated vector")
    p.add_argument("--out", help="output path (CSV, or JSON for diagnose)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ngmres",
        description="Accelerated fixed-point experiments with CSV output.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("solve", "single solve from an explicit initial guess"),
        ("sweep", "seeded multi-trial sweep with sphere-sampled initial guesses"),
        ("compare", "aligned residual table for several methods"),
        ("diagnose", "single solve plus a JSON diagnostics report"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common_flags(p)
        if name == "compare":
            p.add_argument(
                "--methods",
                help="comma-separated method tokens, e.g. fp,ngmres:0,ngmres:1,aa:1",
            )
    return parser


def _merged_options(args: argparse.Namespace) -> dict:
    opts: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"could not read config {args.config!r}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(loaded) - set(_OPTION_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        opts.update(loaded)
    for key in _OPTION_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    for key, default in _DEFAULTS.items():
        opts.setdefault(key, default)
    return opts


def _problem_params(opts: dict) -> dict:
    name = opts.get("problem")
    if not name:
        raise UsageError("--problem is required")
    if name == "quadratic2d":
        return {"c1": float(opts["c1"]), "c2": float(opts["c2"])}
    if name == "trigonometric":
        return {"s": int(opts["s"])}
    raise UsageError(f"unknown problem {name!r}; available: {', '.join(registry_names())}")


def _spec_from_options(opts: dict, want_sphere: bool, method: Optional[str] = None, m: Optional[int] = None) -> RunSpec:
    name = opts["problem"]
    params = _problem_params(opts)
    stop = StoppingCriterion(
        tol=float(opts["tol"]),
        max_iters=int(opts["max_iters"]),
    )
    x0 = None
    sphere = None
    if want_sphere:
        if opts.get("radius") is None:
            raise UsageError("--radius is required for sphere sampling")
        dim = make_problem(name, **params).dim
        sphere = SphereRule(
            center=_parse_center(opts.get("center", "0"), dim),
            radius=float(opts["radius"]),
        )
    else:
        if opts.get("x0") is None:
            raise UsageError("--x0 is required (or use sweep for sampled guesses)")
        x0 = _parse_vector(opts["x0"])
    return RunSpec(
        problem=name,
        params=params,
        method=method or opts["method"],
        m=int(m if m is not None else opts["m"]),
        x0=x0,
        sphere=sphere,
        stop=stop,
        trials=int(opts["trials"]),
        seed=int(opts["seed"]),
        out=opts.get("out"),
    )


def _parse_method_tokens(text, default_m: int) -> list:
    tokens = [t.strip() for t in str(text).split(",") if t.strip()]
    if not tokens:
        raise UsageError("--methods must list at least one method token")
    parsed = []
    for token in tokens:
        name, _, mpart = token.partition(":")
        if name not in METHODS:
            raise UsageError(f"unknown method token {token!r}")
        try:
            m = int(mpart) if mpart else default_m
        except ValueError:
            raise UsageError(f"bad window size in method token {token!r}") from None
        parsed.append((name, m))
    return parsed


def _dispatch(args: argparse.Namespace) -> int:
    opts = _merged_options(args)
    if args.command == "solve":
        spec = _spec_from_options(opts, want_sphere=False)
        if spec.out is None:
            raise UsageError("--out is required")
        code = run(spec, trial_column=False)
    elif args.command == "sweep":
        spec = _spec_from_options(opts, want_sphere=True)
        if spec.out is None:
            raise UsageError("--out is required")
        code = run(spec, trial_column=True)
    elif args.command == "compare":
        if opts.get("methods") is None:
            raise UsageError("--methods is required for compare")
        if opts.get("out") is None:
            raise UsageError("--out is required")
        want_sphere = opts.get("x0") is None
        specs = [
            _spec_from_options(opts, want_sphere=want_sphere, method=name, m=m)
            for name, m in _parse_method_tokens(opts["methods"], int(opts["m"]))
        ]
        code = compare(specs, opts["out"])
    elif args.command == "diagnose":
        spec = _spec_from_options(opts, want_sphere=opts.get("x0") is None)
        if opts.get("out") is None:
            raise UsageError("--out is required")
        code = diagnose(spec, opts["out"])
    else:  # pragma: no cover - argparse enforces the choices
        raise UsageError(f"unknown command {args.command!r}")
    return code


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EvaluationError as exc:
        print(f"evaluation failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
