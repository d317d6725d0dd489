"""Render the four figure kinds from sysidlab CSV artifacts.

Usage:
    sysidlab-render <kind> <csv...> -o <image>

Kinds and the CSV schema each consumes:

* ``violin-bound``       sweep CSV  (which,n,trial,measured,bound,below_machine_eps)
* ``accuracy-lines``     heat CSV   (algo,N,K,seed,hausdorff,sigma_min_H,cond_O,cond_Q)
* ``conditioning-panel`` heat CSV   (same as accuracy-lines)
* ``pole-scatter``       poles CSV  (algo,N,K,seed,kind,re,im)

A header mismatch is reported column by column. Rendering is a pure function
of the CSV bytes and the figure spec.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

MACHINE_EPS = float(np.finfo(float).eps)

FIGURE_KINDS = ("violin-bound", "accuracy-lines", "pole-scatter", "conditioning-panel")

_SCHEMAS = {
    "violin-bound": ["which", "n", "trial", "measured", "bound", "below_machine_eps"],
    "accuracy-lines": ["algo", "N", "K", "seed", "hausdorff", "sigma_min_H", "cond_O", "cond_Q"],
    "conditioning-panel": ["algo", "N", "K", "seed", "hausdorff", "sigma_min_H", "cond_O", "cond_Q"],
    "pole-scatter": ["algo", "N", "K", "seed", "kind", "re", "im"],
}


class SchemaError(ValueError):
    pass


@dataclass
class FigureSpec:
    kind: str
    csv_paths: list[str]
    out_path: str
    log_y: bool | None = None  # default depends on kind
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; choose from {FIGURE_KINDS}")
        if not self.csv_paths:
            raise SchemaError("at least one CSV path is required")


def read_rows(path: str, kind: str) -> list[dict]:
    expected = _SCHEMAS[kind]
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in expected if c not in header]
        unexpected = [c for c in header if c not in expected]
        if missing or unexpected:
            raise SchemaError(
                f"{path}: header mismatch for {kind}: missing columns {missing}, "
                f"unexpected columns {unexpected}"
            )
        return list(reader)


def _render_violin_bound(spec: FigureSpec, rows: list[dict], ax) -> None:
    by_n: dict[int, list[float]] = {}
    bound_by_n: dict[int, float] = {}
    for row in rows:
        n = int(row["n"])
        by_n.setdefault(n, []).append(float(row["measured"]))
        b = float(row["bound"])
        bound_by_n[n] = max(bound_by_n.get(n, b), b)
    ns = sorted(by_n)

    log_y = True if spec.log_y is None else spec.log_y
    if log_y:
        ax.set_yscale("log")
        # violins of a log-scaled quantity read better in log space
        floor = MACHINE_EPS ** 2
        data = [np.maximum(np.asarray(by_n[n]), floor) for n in ns]
    else:
        data = [np.asarray(by_n[n]) for n in ns]

    for x, vals in zip(ns, data):
        if len(vals) > 1 and np.ptp(vals) > 0:
            ax.violinplot([vals], positions=[x], widths=0.8, showextrema=False)
        else:
            ax.plot([x], [vals[0]], "o", color="tab:blue", markersize=4)
    ax.plot(ns, [bound_by_n[n] for n in ns], "r-", label="bound")
    ax.axhline(MACHINE_EPS, color="r", linestyle="--", label="machine epsilon")
    ax.set_xlabel("n")
    ax.set_ylabel("measured")
    which = rows[0]["which"] if rows else ""
    ax.set_title(f"sampling distribution vs bound ({which})")
    ax.legend(loc="best")


def _render_accuracy_lines(spec: FigureSpec, rows: list[dict], ax) -> None:
    series: dict[tuple, dict[int, list[float]]] = {}
    for row in rows:
        key = (row["algo"], int(row["N"]))
        series.setdefault(key, {}).setdefault(int(row["K"]), []).append(float(row["hausdorff"]))
    for (algo, N), pts in sorted(series.items()):
        ks = sorted(pts)
        for i, k in enumerate(ks):
            ax.plot([k] * len(pts[k]), pts[k], ".", color="gray", alpha=0.5, markersize=3)
        ax.plot(ks, [pts[k][0] for k in ks], marker="o", label=f"{algo}, N={N}")
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel("K")
    ax.set_ylabel("Hausdorff distance")
    ax.set_title("identification accuracy")
    ax.legend(loc="best")


def _render_pole_scatter(spec: FigureSpec, rows: list[dict], ax) -> None:
    theta = np.linspace(0.0, 2.0 * np.pi, 256)
    ax.plot(np.cos(theta), np.sin(theta), "k--", linewidth=0.8, label="unit circle")
    markers = {"ho-kalman": "+", "moesp": "x"}
    seen = set()
    for row in rows:
        x, y = float(row["re"]), float(row["im"])
        if row["kind"] == "true":
            label = "true poles" if "true" not in seen else None
            seen.add("true")
            ax.plot(x, y, "o", markerfacecolor="none", markeredgecolor="red", label=label)
        else:
            algo = row["algo"]
            label = f"{algo} estimates" if algo not in seen else None
            seen.add(algo)
            ax.plot(x, y, markers.get(algo, "x"), color="tab:blue" if algo == "ho-kalman" else "tab:green",
                    label=label)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_aspect("equal")
    ax.set_title("pole distribution")
    ax.legend(loc="best", fontsize=8)


def _render_conditioning_panel(spec: FigureSpec, rows: list[dict], axes) -> None:
    ax_sigma, ax_cond = axes
    by_k: dict[int, dict] = {}
    for row in rows:
        by_k[int(row["K"])] = row  # diagnostics depend on K only
    ks = sorted(by_k)
    ax_sigma.plot(ks, [float(by_k[k]["sigma_min_H"]) for k in ks], "b-o", markersize=3)
    ax_sigma.set_yscale("log")
    ax_sigma.set_xlabel("K")
    ax_sigma.set_title("smallest nonzero singular value of H")
    ax_cond.plot(ks, [float(by_k[k]["cond_O"]) for k in ks], "b-o", markersize=3, label="cond(O)")
    ax_cond.plot(ks, [float(by_k[k]["cond_Q"]) for k in ks], color="tab:orange", marker="o",
                 markersize=3, label="cond(Q)")
    ax_cond.set_yscale("log")
    ax_cond.set_xlabel("K")
    ax_cond.set_title("condition numbers")
    ax_cond.legend(loc="best")


def render(spec: FigureSpec) -> str:
    """Render the figure described by ``spec`` and return the output path."""
    rows = []
    for path in spec.csv_paths:
        rows.extend(read_rows(path, spec.kind))

    if spec.kind == "conditioning-panel":
        fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.2))
        _render_conditioning_panel(spec, rows, axes)
    else:
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        if spec.kind == "violin-bound":
            _render_violin_bound(spec, rows, ax)
        elif spec.kind == "accuracy-lines":
            _render_accuracy_lines(spec, rows, ax)
        else:
            _render_pole_scatter(spec, rows, ax)
    fig.tight_layout()
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return str(out)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="sysidlab-render", description=__doc__)
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("csv", nargs="+", help="input CSV file(s)")
    parser.add_argument("-o", "--out", required=True, help="output image path")
    parser.add_argument("--linear-y", action="store_true", help="disable the default log scale")
    args = parser.parse_args(argv)
    spec = FigureSpec(kind=args.kind, csv_paths=args.csv, out_path=args.out,
                      log_y=False if args.linear_y else None)
    try:
        render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
