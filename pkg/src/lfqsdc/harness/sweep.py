"""Secure-rate-versus-loss sweeps.

Each loss point is independent: its repetitions run in sequence (so the rate
adaptation can learn from the previous session) on seeds derived from
``(spec.seed, point index, repetition index)``. Points are fanned out with
joblib, and results are identical for any worker count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from ..exceptions import InsufficientCheckBits
from ..ldpc.adaptation import CodingState, adapt_parameters, predict_channel
from ..ldpc.decoder import ChannelQuality, DecoderSettings
from ..ldpc.distribution import RateLadder, default_ladder
from ..ldpc.matrix import ParityCheckMatrix
from ..ldpc.peg import construct_peg
from ..protocol import SessionConfig, channel_snr_db, expected_round_trip_flip, run_session
from ..security import compute_secure_rate


@dataclass(frozen=True)
class SweepSpec:
    loss_db_start: float = 0.0
    loss_db_end: float = 35.0
    loss_db_step: float = 1.0
    pulses_per_point: int = 100_000
    repetitions: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.loss_db_start > self.loss_db_end:
            raise ValueError("loss_db_start must not exceed loss_db_end")
        if self.loss_db_step <= 0:
            raise ValueError("loss_db_step must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    def grid(self) -> np.ndarray:
        count = int(math.floor((self.loss_db_end - self.loss_db_start) / self.loss_db_step + 1e-9)) + 1
        return self.loss_db_start + self.loss_db_step * np.arange(count)


@dataclass(frozen=True)
class CurvePoint:
    loss_db: float
    rate: float
    ci_low: float
    ci_high: float
    qber: float
    aborted_fraction: float

    def __post_init__(self):
        if not self.ci_low <= self.rate <= self.ci_high:
            raise ValueError("need ci_low <= rate <= ci_high")


@dataclass(frozen=True)
class CodeLadder:
    """One parity-check matrix per rung of a :class:`RateLadder`."""

    ladder: RateLadder
    codes: tuple[ParityCheckMatrix, ...]

    @classmethod
    def build(cls, ladder: RateLadder | None = None, block_length: int = 1024, seed: int = 0) -> "CodeLadder":
        ladder = ladder or default_ladder()
        seeds = np.random.SeedSequence(seed).spawn(len(ladder))
        codes = tuple(construct_peg(d, block_length, np.random.default_rng(s))
                      for d, s in zip(ladder, seeds))
        return cls(ladder, codes)

    def __len__(self):
        return len(self.codes)


def leg_survival(loss_db: float) -> float:
    """Round-trip loss is split evenly, so each leg keeps ``10^(-loss_db / 20)``."""
    return 10.0 ** (-loss_db / 20.0)


def session_at_loss(template: SessionConfig, loss_db: float, n_pulses: int | None = None,
                    seed: int | None = None) -> SessionConfig:
    """Copy of ``template`` with ``loss_db`` of total round-trip loss added on top of its own."""
    keep = leg_survival(loss_db)
    fwd = replace(template.forward_noise, loss_p=1.0 - (1.0 - template.forward_noise.loss_p) * keep)
    bwd = replace(template.backward_noise, loss_p=1.0 - (1.0 - template.backward_noise.loss_p) * keep)
    changes = dict(forward_noise=fwd, backward_noise=bwd)
    if n_pulses is not None:
        changes["n_pulses"] = n_pulses
    if seed is not None:
        changes["seed"] = seed
    return replace(template, **changes)


def expected_quality(cfg: SessionConfig) -> ChannelQuality:
    """Channel quality a session at ``cfg`` should see, from configuration alone."""
    flip = expected_round_trip_flip(cfg)
    snr = channel_snr_db(cfg.backward_noise.loss_p, flip)
    return ChannelQuality(snr, min(flip, 0.5))


def initial_rung(cq: ChannelQuality, ladder: RateLadder, settings: DecoderSettings) -> int:
    """Run the adaptation rule on the expected channel until the rung stops moving."""
    state = CodingState(settings, len(ladder) - 1)
    for _ in range(len(ladder)):
        state = adapt_parameters(state, cq, cq, ladder)
    return state.rung


def repetition_seed(seed: int, point: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(point), int(rep)])


@dataclass(frozen=True)
class RepetitionOutcome:
    rate: float
    qber: float
    aborted: bool
    snr_db: float


def _measured_quality(transcript) -> ChannelQuality:
    if transcript.aborted or transcript.erasures.size == 0:
        return ChannelQuality(-math.inf, 0.5)
    eps = float(transcript.erasures.mean())
    flip = float(np.clip(2.0 * transcript.e_e, 0.0, 0.5))
    return ChannelQuality(channel_snr_db(eps, flip), flip)


def run_point(point: int, loss_db: float, spec: SweepSpec, template: SessionConfig, codes: CodeLadder,
              settings: DecoderSettings, smoothing: float = 0.5) -> tuple[CurvePoint, list[RepetitionOutcome]]:
    """All repetitions of one loss point, adapting the code rate between them."""
    base = session_at_loss(template, loss_db, spec.pulses_per_point)
    state = CodingState(settings, initial_rung(expected_quality(base), codes.ladder, settings))
    history: list[ChannelQuality] = []
    outcomes = []
    for rep in range(spec.repetitions):
        ss = repetition_seed(spec.seed, point, rep)
        rng = np.random.default_rng(ss)
        code = codes.codes[state.rung]
        message = rng.integers(0, 2, size=code.k, dtype=np.uint8)
        try:
            transcript, report = run_session(base, code, message, rng, settings)
        except InsufficientCheckBits:
            outcomes.append(RepetitionOutcome(0.0, 0.5, True, -math.inf))
            continue
        rate = 0.0 if report.aborted else compute_secure_rate(transcript, report)
        cq = _measured_quality(transcript)
        outcomes.append(RepetitionOutcome(rate, transcript.e_e, report.aborted, cq.snr_db))
        history.append(cq)
        state = adapt_parameters(state, cq, ChannelQuality(predict_channel(history, smoothing)), codes.ladder)
    return aggregate(loss_db, outcomes), outcomes


def aggregate(loss_db: float, outcomes: Sequence[RepetitionOutcome], confidence: float = 0.95) -> CurvePoint:
    """Mean rate with a Student-t interval over repetitions, clipped below at 0."""
    rates = np.array([o.rate for o in outcomes])
    mean = float(rates.mean())
    if len(rates) > 1 and rates.std() > 0:
        half = float(stats.t.ppf(0.5 + confidence / 2, len(rates) - 1) * rates.std(ddof=1) / math.sqrt(len(rates)))
    else:
        half = 0.0
    # rates are non-negative, so the interval is clipped at zero
    return CurvePoint(float(loss_db), mean, max(0.0, mean - half), mean + half,
                      float(np.mean([o.qber for o in outcomes])),
                      float(np.mean([o.aborted for o in outcomes])))


def run_sweep(spec: SweepSpec, template: SessionConfig, codes: CodeLadder | None = None,
              settings: DecoderSettings | None = None, n_jobs: int = 1,
              smoothing: float = 0.5) -> list[CurvePoint]:
    """Secure rate at every point of ``spec.grid()``."""
    codes = codes or CodeLadder.build(seed=spec.seed)
    settings = settings or DecoderSettings(adaptive=True)
    grid = spec.grid()
    results = Parallel(n_jobs=n_jobs)(
        delayed(run_point)(i, float(loss), spec, template, codes, settings, smoothing)
        for i, loss in enumerate(grid)
    )
    return [point for point, _ in results]
