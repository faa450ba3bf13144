#!/usr/bin/env python3
"""Regenerate the benchmark figure panels from experiment CSVs.

Consumes only the CSV files written by the ``ngmres`` CLI (solve, sweep,
and compare schemas) and renders the six standard panels:

    fig1-left    q-factor scatter of the contractive sweep
    fig1-right   residual histories, baseline vs window 0 (contractive)
    fig2-left    residual histories, baseline vs window 0 (borderline)
    fig2-right   residual histories, window 0 vs window 1 (noncontractive)
    fig3-left    residual histories of the trigonometric sweeps
    fig3-right   root-factor scatter of the trigonometric sweeps

Panels can also be described by a JSON file: ``plots.py render --spec
spec.json`` with keys panel ("factor-scatter" | "history-semilogy"),
inputs, out, and optionally factor, labels, title, ylabel.

Rendering is read-only over the CSVs and embeds no timestamps, so
identical inputs produce identical image bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

PNG_METADATA = {"Software": "plots.py"}
FIGSIZE = (5.0, 4.0)
DPI = 120


class PlotUsageError(ValueError):
    """Unusable input: missing file, empty CSV, or missing columns."""


def _read_csv(path) -> tuple[list, list]:
    p = Path(path)
    if not p.is_file():
        raise PlotUsageError(f"input CSV not found: {p}")
    with open(p, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0]:
        raise PlotUsageError(f"empty CSV: {p}")
    header, data = rows[0], rows[1:]
    if not data:
        raise PlotUsageError(f"CSV has a header but no rows: {p}")
    return header, data


def _column(header: list, name: str, path) -> int:
    try:
        return header.index(name)
    except ValueError:
        raise PlotUsageError(f"column {name!r} missing from {path}") from None


def _maybe_float(cell: str) -> Optional[float]:
    return float(cell) if cell != "" else None


@dataclass
class FigureSpec:
    """One panel: input CSVs, panel kind, labels, output image path."""

    panel: str  # "factor-scatter" | "history-semilogy"
    inputs: list
    out: str
    factor: str = "q_factor"
    labels: Optional[list] = None
    title: str = ""
    ylabel: str = ""

    def __post_init__(self):
        if self.panel not in ("factor-scatter", "history-semilogy"):
            raise PlotUsageError(f"unknown panel kind {self.panel!r}")
        if not self.inputs:
            raise PlotUsageError("at least one input CSV is required")
        if not self.out:
            raise PlotUsageError("an output image path is required")

    def label_for(self, i: int) -> str:
        if self.labels and i < len(self.labels):
            return self.labels[i]
        return Path(self.inputs[i]).stem


def _save(fig, out) -> None:
    fig.savefig(out, dpi=DPI, metadata=PNG_METADATA)
    plt.close(fig)


def plot_factor_scatter(spec: FigureSpec) -> int:
    """One marker per (trial, k) of the chosen factor column.

    Histories too short to have factors (single-iteration runs) yield an
    empty panel with a warning, not an error.
    """
    fig, ax = plt.subplots(figsize=FIGSIZE)
    any_points = False
    for i, path in enumerate(spec.inputs):
        header, rows = _read_csv(path)
        k_col = _column(header, "k", path)
        f_col = _column(header, spec.factor, path)
        ks, vs = [], []
        for row in rows:
            v = _maybe_float(row[f_col])
            if v is not None:
                ks.append(float(row[k_col]))
                vs.append(v)
        if ks:
            any_points = True
            ax.scatter(ks, vs, s=6.0, alpha=0.5, linewidths=0, label=spec.label_for(i))
    if not any_points:
        warnings.warn("no factor values to plot; writing an empty panel")
        print("warning: no factor values to plot; writing an empty panel", file=sys.stderr)
    ax.set_xlabel("iteration k")
    ax.set_ylabel(spec.ylabel or spec.factor.replace("_", "-"))
    if spec.title:
        ax.set_title(spec.title)
    if any_points and len(spec.inputs) > 1:
        ax.legend()
    _save(fig, spec.out)
    return 0


def _history_lines(ax, path, label):
    """Draw residual-vs-k lines from one CSV of any of the three schemas."""
    header, rows = _read_csv(path)
    if "res_norm" in header:
        k_col = _column(header, "k", path)
        r_col = _column(header, "res_norm", path)
        if "trial" in header:
            t_col = header.index("trial")
            by_trial: dict = {}
            for row in rows:
                r = _maybe_float(row[r_col])
                if r is not None:
                    by_trial.setdefault(row[t_col], []).append((float(row[k_col]), r))
            for j, (_, pts) in enumerate(sorted(by_trial.items(), key=lambda kv: int(kv[0]))):
                pts.sort()
                ax.semilogy(
                    [p[0] for p in pts],
                    [p[1] for p in pts],
                    linewidth=0.7,
                    alpha=0.6,
                    label=label if j == 0 else None,
                )
        else:
            pts = [
                (float(row[k_col]), r)
                for row in rows
                if (r := _maybe_float(row[r_col])) is not None
            ]
            ax.semilogy([p[0] for p in pts], [p[1] for p in pts], label=label)
        return
    # compare schema: one res_norm_<method> column per method
    method_cols = [(name, i) for i, name in enumerate(header) if name.startswith("res_norm_")]
    if not method_cols:
        raise PlotUsageError(f"no residual columns found in {path}")
    k_col = _column(header, "k", path)
    for name, col in method_cols:
        pts = [
            (float(row[k_col]), r)
            for row in rows
            if (r := _maybe_float(row[col])) is not None
        ]
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], label=name[len("res_norm_"):])


def plot_history(spec: FigureSpec) -> int:
    """Log-scale residual norm against the iteration index."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for i, path in enumerate(spec.inputs):
        _history_lines(ax, path, spec.label_for(i))
    ax.set_xlabel("iteration k")
    ax.set_ylabel(spec.ylabel or "residual norm")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    _save(fig, spec.out)
    return 0


def render(spec: FigureSpec) -> int:
    if spec.panel == "factor-scatter":
        return plot_factor_scatter(spec)
    return plot_history(spec)


# ---------------------------------------------------------------------------
# command line

_FIGURES = {
    "fig1-left": dict(
        panel="factor-scatter",
        n_inputs=1,
        factor="q_factor",
        title="q-factors of the contractive sweep",
    ),
    "fig1-right": dict(
        panel="history-semilogy",
        n_inputs=1,
        title="contractive problem: baseline vs window 0",
    ),
    "fig2-left": dict(
        panel="history-semilogy",
        n_inputs=1,
        title="borderline problem: baseline vs window 0",
    ),
    "fig2-right": dict(
        panel="history-semilogy",
        n_inputs=1,
        title="noncontractive problem: window 0 vs window 1",
    ),
    "fig3-left": dict(
        panel="history-semilogy",
        n_inputs=2,
        title="trigonometric sweeps: residual histories",
    ),
    "fig3-right": dict(
        panel="factor-scatter",
        n_inputs=2,
        factor="root_factor",
        title="trigonometric sweeps: root-convergence factors",
    ),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots.py", description="Render benchmark figure panels from CSVs."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render a panel described by a JSON spec")
    p.add_argument("--spec", required=True, help="JSON FigureSpec file")
    for name, cfg in _FIGURES.items():
        p = sub.add_parser(name, help=f"{cfg['panel']} panel")
        p.add_argument("inputs", nargs="+" if cfg["n_inputs"] > 1 else 1, metavar="CSV")
        p.add_argument("--out", required=True, help="output image path")
        p.add_argument("--labels", help="comma-separated line labels")
    return parser


def _spec_from_json(path) -> FigureSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise PlotUsageError(f"could not read spec {path!r}: {exc}") from None
    known = {"panel", "inputs", "out", "factor", "labels", "title", "ylabel"}
    unknown = set(payload) - known
    if unknown:
        raise PlotUsageError(f"unknown spec keys: {sorted(unknown)}")
    try:
        return FigureSpec(**payload)
    except TypeError as exc:
        raise PlotUsageError(f"bad spec: {exc}") from None


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "render":
            return render(_spec_from_json(args.spec))
        cfg = _FIGURES[args.command]
        if len(args.inputs) != cfg["n_inputs"]:
            raise PlotUsageError(
                f"{args.command} takes {cfg['n_inputs']} input CSV(s), got {len(args.inputs)}"
            )
        spec = FigureSpec(
            panel=cfg["panel"],
            inputs=list(args.inputs),
            out=args.out,
            factor=cfg.get("factor", "q_factor"),
            labels=args.labels.split(",") if args.labels else None,
            title=cfg["title"],
        )
        return render(spec)
    except PlotUsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
