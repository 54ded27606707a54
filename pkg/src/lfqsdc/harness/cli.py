"""Command-line entry point: ``lfqsdc <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 aborted session (``simulate`` only),
3 input/output or parse error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ..exceptions import InsufficientCheckBits, ParseError
from ..ldpc.distribution import candidate_family, design_rate
from ..ldpc.optimize import optimize_degree_distribution
from ..ldpc.peg import construct_peg
from ..pat import run_tracking_loop
from ..protocol import run_session
from ..security import compute_secure_rate
from .config import SimulationConfig, default_config, load_config
from .output import emit_results, format_float
from .reference import load_reference_curves
from .sweep import CodeLadder, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_ABORTED, EXIT_IO = 0, 1, 2, 3

PAT_HEADER = ("step", "open_loop", "residual")
REFERENCE_HEADER = ("curve", "points", "loss_db_min", "loss_db_max")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Reports usage problems with exit code 1 rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lfqsdc", description="Loss-tolerant two-way quantum secure direct communication simulator.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="{simulate,sweep,optimize-ldpc,pat-demo,reference}")

    def common(p):
        p.add_argument("--config", type=Path, help="INI configuration file")
        p.add_argument("--seed", type=int, help="overrides the configured seed")

    p = sub.add_parser("simulate", help="run one session and print its security report")
    common(p)
    p.add_argument("--loss-db", type=float, help="total round-trip loss in dB")
    p.add_argument("--pulses", type=int, help="pulses sent by Bob")

    p = sub.add_parser("sweep", help="secure rate against loss, written to sweep.csv and curves.svg")
    common(p)
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory (default: results)")
    ref = p.add_mutually_exclusive_group()
    ref.add_argument("--reference", type=Path, help="reference curve file (default: shipped dataset)")
    ref.add_argument("--no-reference", action="store_true", help="plot the simulated curve alone")
    p.add_argument("--loss-start", type=float)
    p.add_argument("--loss-end", type=float)
    p.add_argument("--loss-step", type=float)
    p.add_argument("--pulses", type=int, help="pulses per session")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--n-jobs", type=int, help="parallel workers (results do not depend on this)")
    p.add_argument("--linear-y", action="store_true", help="linear rate axis instead of logarithmic")

    p = sub.add_parser("optimize-ldpc", help="search LDPC degree distributions")
    common(p)
    p.add_argument("--trials", type=int, help="Monte-Carlo frames per candidate")
    p.add_argument("--target-qber", type=float)
    p.add_argument("--block-length", type=int)
    p.add_argument("--n-jobs", type=int)
    p.add_argument("--alist", type=Path, help="write a PEG code of the winner in alist format")

    p = sub.add_parser("pat-demo", help="pointing-loop traces as CSV")
    common(p)
    p.add_argument("--steps", type=int)
    p.add_argument("--out", type=Path, help="CSV file (default: standard output)")

    p = sub.add_parser("reference", help="validate and summarise a reference curve file")
    p.add_argument("--file", type=Path, help="reference file (default: shipped dataset)")
    return parser


def _config(args) -> SimulationConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _cmd_simulate(args, out) -> int:
    cfg = _config(args)
    if args.loss_db is not None:
        if args.loss_db < 0:
            raise UsageError("--loss-db must be non-negative")
        cfg = replace(cfg, loss_db=args.loss_db, loss_source="fixed")
    if args.pulses is not None:
        cfg = replace(cfg, session=replace(cfg.session, n_pulses=args.pulses))
    session = cfg.effective_session()
    codes = CodeLadder.build(cfg.ldpc.rate_ladder(), cfg.ldpc.block_length, cfg.ldpc.code_seed)
    code = codes.codes[cfg.ldpc.rung]
    rng = np.random.default_rng(session.seed)
    message = rng.integers(0, 2, size=code.k, dtype=np.uint8)
    try:
        transcript, report = run_session(session, code, message, rng, cfg.ldpc.decoder)
    except InsufficientCheckBits as exc:
        print(f"status=aborted\nreason={exc}", file=out)
        return EXIT_ABORTED
    print(report.to_text(), file=out)
    print(f"status={transcript.status}", file=out)
    if report.aborted:
        return EXIT_ABORTED
    print(f"rate={format_float(compute_secure_rate(transcript, report))}", file=out)
    return EXIT_OK


def _cmd_sweep(args, out) -> int:
    cfg = _config(args)
    overrides = {k: v for k, v in (("loss_db_start", args.loss_start), ("loss_db_end", args.loss_end),
                                   ("loss_db_step", args.loss_step), ("pulses_per_point", args.pulses),
                                   ("repetitions", args.repetitions)) if v is not None}
    try:
        spec = replace(cfg.sweep, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    reference = None if args.no_reference else load_reference_curves(args.reference)
    codes = CodeLadder.build(cfg.ldpc.rate_ladder(), cfg.ldpc.block_length, cfg.ldpc.code_seed)
    template = cfg.effective_session() if cfg.loss_source == "channel" else cfg.session
    points = run_sweep(spec, template, codes, cfg.ldpc.decoder,
                       n_jobs=args.n_jobs if args.n_jobs is not None else cfg.n_jobs,
                       smoothing=cfg.smoothing)
    csv_path, svg_path = emit_results(points, reference, args.out, log_y=not args.linear_y)
    print(f"wrote {csv_path} ({len(points)} points)", file=out)
    print(f"wrote {svg_path}", file=out)
    return EXIT_OK


def _cmd_optimize(args, out) -> int:
    cfg = _config(args)
    ld = cfg.ldpc
    n = args.block_length or ld.block_length
    best, score = optimize_degree_distribution(
        candidate_family(), target_qber=args.target_qber if args.target_qber is not None else ld.optimizer_target_qber,
        penalty_qber=ld.optimizer_penalty_qber, penalty_rate=ld.optimizer_penalty_rate,
        trials=args.trials or ld.optimizer_trials, seed=cfg.sweep.seed, target_rate=ld.optimizer_target_rate,
        n=n, n_jobs=args.n_jobs if args.n_jobs is not None else cfg.n_jobs)
    print(f"winner={best}", file=out)
    print(f"design_rate={format_float(design_rate(best))}", file=out)
    print(f"score={format_float(score)}", file=out)
    if args.alist:
        construct_peg(best, n, np.random.default_rng(cfg.sweep.seed)).save_alist(args.alist)
        print(f"wrote {args.alist}", file=out)
    return EXIT_OK


def _cmd_pat(args, out) -> int:
    cfg = _config(args)
    steps = args.steps or cfg.pat.steps
    if steps < 100:
        raise UsageError("--steps must be >= 100")
    result = run_tracking_loop(cfg.pat.jitter, cfg.pat.controller, steps,
                               np.random.default_rng(cfg.session.seed))
    fh = open(args.out, "w", encoding="utf-8", newline="") if args.out else out
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PAT_HEADER)
        for i, (ol, res) in enumerate(zip(result.open_loop_trace, result.residual_trace)):
            writer.writerow((i, format_float(ol), format_float(res)))
    finally:
        if args.out:
            fh.close()
    if args.out:
        print(f"wrote {args.out}; rms open_loop={result.open_loop_rms:.3e} residual={result.residual_rms:.3e}",
              file=out)
    return EXIT_OK


def _cmd_reference(args, out) -> int:
    curves = load_reference_curves(args.file)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REFERENCE_HEADER)
    for s in curves:
        writer.writerow((s.name, len(s), s.loss_text[0], s.loss_text[-1]))
    return EXIT_OK


_COMMANDS = {"simulate": _cmd_simulate, "sweep": _cmd_sweep, "optimize-ldpc": _cmd_optimize,
             "pat-demo": _cmd_pat, "reference": _cmd_reference}


def cli_dispatch(argv: Sequence[str] | None = None, out=None) -> int:
    """Run one subcommand and return its exit code."""
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"lfqsdc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError) as exc:
        print(f"lfqsdc: error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(cli_dispatch())
