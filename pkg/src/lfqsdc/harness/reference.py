"""Published comparison curves: loading, validation and exact re-emission.

File layout is a CSV with header ``curve,loss_db,rate``. Numbers keep their
original decimal text so that saving a loaded file reproduces it byte for byte.
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..exceptions import MonotonicityError, ParseError

CURVE_NAMES = ("practical_cs", "jeec", "lps", "proposed")
HEADER = ("curve", "loss_db", "rate")


def default_reference_path() -> Path:
    return Path(str(resources.files("lfqsdc") / "data" / "reference_curves.csv"))


@dataclass(frozen=True)
class CurveSeries:
    name: str
    loss_text: tuple[str, ...]
    rate_text: tuple[str, ...]

    @property
    def loss_db(self) -> np.ndarray:
        return np.array([float(t) for t in self.loss_text])

    @property
    def rate(self) -> np.ndarray:
        return np.array([float(t) for t in self.rate_text])

    def __len__(self):
        return len(self.loss_text)

    def points(self) -> list[tuple[float, float]]:
        return [(float(x), float(y)) for x, y in zip(self.loss_text, self.rate_text)]


@dataclass(frozen=True)
class ReferenceCurves:
    series: dict[str, CurveSeries]

    def __getitem__(self, name: str) -> CurveSeries:
        return self.series[name]

    def __iter__(self):
        return iter(self.series.values())

    def counts(self) -> dict[str, int]:
        return {name: len(s) for name, s in self.series.items()}

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(HEADER)
        for s in self.series.values():
            for x, y in zip(s.loss_text, s.rate_text):
                writer.writerow((s.name, x, y))
        return out.getvalue()


def parse_reference_curves(text: str) -> ReferenceCurves:
    rows = csv.reader(io.StringIO(text))
    try:
        header = next(rows)
    except StopIteration:
        raise ParseError("empty reference file", 1) from None
    if tuple(h.strip() for h in header) != HEADER:
        raise ParseError(f"header must be {','.join(HEADER)}, got {','.join(header)}", 1)
    collected: dict[str, tuple[list[str], list[str]]] = {}
    last: dict[str, tuple[float, int]] = {}
    for row in rows:
        line = rows.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line)
        name, x_text, y_text = (c.strip() for c in row)
        if name not in CURVE_NAMES:
            raise ParseError(f"unknown curve {name!r}", line)
        try:
            x, y = float(x_text), float(y_text)
        except ValueError:
            raise ParseError(f"non-numeric value in {row!r}", line) from None
        if not (np.isfinite(x) and np.isfinite(y)):
            raise ParseError("values must be finite", line)
        if name in last and x <= last[name][0]:
            raise MonotonicityError(
                f"{name}: loss {x_text} does not exceed {last[name][0]!r} (line {last[name][1]})", line)
        last[name] = (x, line)
        xs, ys = collected.setdefault(name, ([], []))
        xs.append(x_text)
        ys.append(y_text)
    missing = [n for n in CURVE_NAMES if n not in collected]
    if missing:
        raise ParseError(f"missing series: {', '.join(missing)}")
    return ReferenceCurves({n: CurveSeries(n, tuple(collected[n][0]), tuple(collected[n][1]))
                            for n in CURVE_NAMES})


def load_reference_curves(path: str | os.PathLike | None = None) -> ReferenceCurves:
    """Load a reference file; ``None`` loads the dataset shipped with the package."""
    path = default_reference_path() if path is None else Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_reference_curves(fh.read())


def save_reference_curves(curves: ReferenceCurves, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(curves.to_csv())
