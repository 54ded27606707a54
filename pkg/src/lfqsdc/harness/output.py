"""Writers for ``sweep.csv`` and the ``curves.svg`` overlay plot."""
from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .reference import ReferenceCurves  # noqa: E402
from .sweep import CurvePoint  # noqa: E402

SWEEP_HEADER = ("loss_db", "rate", "ci_low", "ci_high", "qber", "aborted_fraction")

#: Fixed so repeated renders are byte-identical.
_SVG_RC = {"svg.hashsalt": "lfqsdc", "svg.fonttype": "none", "path.simplify": False}

_STYLE = {
    "practical_cs": dict(color="green", linestyle="-"),
    "jeec": dict(color="red", linestyle="--", marker="s", markersize=3),
    "lps": dict(color="black", linestyle="-.", marker="o", markersize=3, fillstyle="none"),
    "proposed": dict(color="blue", linestyle="-", marker="o", markersize=3),
}


def format_float(x: float) -> str:
    """Shortest text that reads back as the same double."""
    return repr(float(x))


def write_sweep_csv(points: Sequence[CurvePoint], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for p in points:
            writer.writerow([format_float(getattr(p, f)) for f in SWEEP_HEADER])


def read_sweep_csv(path: str | os.PathLike) -> list[CurvePoint]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != SWEEP_HEADER:
        raise ValueError(f"{path}: header must be {','.join(SWEEP_HEADER)}")
    return [CurvePoint(*(float(v) for v in row)) for row in rows[1:]]


def render_svg(points: Sequence[CurvePoint], reference: ReferenceCurves | None,
               path: str | os.PathLike, log_y: bool = True) -> None:
    """Plot the simulated curve, with any reference series, to a static SVG.

    On a log axis, zero rates cannot be drawn and are left out of the line.
    Every series carries an SVG id ``series-<name>``.
    """
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        if reference is not None:
            for s in reference:
                x, y = s.loss_db, s.rate
                if log_y:
                    keep = y > 0
                    x, y = x[keep], y[keep]
                (line,) = ax.plot(x, y, label=s.name, **_STYLE.get(s.name, {}))
                line.set_gid(f"series-{s.name}")
        xs = [p.loss_db for p in points]
        ys = [p.rate for p in points]
        if log_y:
            xs, ys = zip(*[(x, y) for x, y in zip(xs, ys) if y > 0]) if any(y > 0 for y in ys) else ((), ())
        (line,) = ax.plot(xs, ys, label="simulated", color="purple", marker="D", markersize=3)
        line.set_gid("series-simulated")
        if log_y:
            ax.set_yscale("log")
        ax.set_xlabel("Total channel loss (dB)")
        ax.set_ylabel("Secure rate per pulse")
        ax.grid(True, linestyle="--", linewidth=0.5)
        ax.legend(fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)


def emit_results(points: Sequence[CurvePoint], reference: ReferenceCurves | None,
                 out_dir: str | os.PathLike, log_y: bool = True) -> tuple[Path, Path]:
    """Write ``sweep.csv`` and ``curves.svg`` into ``out_dir``; returns both paths."""
    if not points:
        raise ValueError("no points to emit")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "sweep.csv"
    svg_path = out / "curves.svg"
    write_sweep_csv(points, csv_path)
    render_svg(points, reference, svg_path, log_y=log_y)
    return csv_path, svg_path
