"""Experiment harness: configuration, sweeps, reference curves and output."""
from __future__ import annotations

from .config import SimulationConfig, default_config, load_config, load_config_text
from .output import emit_results, read_sweep_csv, render_svg, write_sweep_csv
from .reference import ReferenceCurves, load_reference_curves, save_reference_curves
from .sweep import CodeLadder, CurvePoint, SweepSpec, run_sweep

__all__ = [
    "CodeLadder", "CurvePoint", "ReferenceCurves", "SimulationConfig", "SweepSpec", "default_config",
    "emit_results", "load_config", "load_config_text", "load_reference_curves", "read_sweep_csv",
    "render_svg", "run_sweep", "save_reference_curves", "write_sweep_csv",
]
