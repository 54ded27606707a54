"""The two-way DL04 session.

Bob prepares single qubits and sends them to Alice. Alice sacrifices a random
subset to estimate the forward error rate ``e_e`` and aborts if it is too
high. Otherwise she writes an LDPC codeword onto the remaining qubits with
``I``/``U`` and sends them back; Bob measures each in its preparation basis,
so the outcome XOR the expected bit is the encoded bit.

Per-pulse data lives in a column-oriented :class:`FrameTable`; indexing it
yields :class:`FrameRecord` views.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from . import quantum as q
from ._validation import check_bits, check_rng
from .channel import AdaptiveOpticsModel, log_variance
from .exceptions import CodewordTooLong, InsufficientCheckBits
from .ldpc.decoder import BPDecoder, ChannelQuality, DecoderSettings, hard_to_llr
from .ldpc.matrix import ParityCheckMatrix
from .security import (DecoyConfig, SecurityReport, ToeplitzSeed, decoy_bounds,
                       privacy_amplify, secrecy_capacity, simulate_decoy_source)

#: Crossover assumed by the decoder is clipped into this range.
LLR_P_RANGE = (1e-3, 0.45)


class EveStrategy(enum.Enum):
    ALWAYS_Z = "always_z"
    ALWAYS_X = "always_x"
    RANDOM_ZX = "random_zx"


@dataclass(frozen=True)
class EveModel:
    """No attacker (``strategy=None``) or intercept-resend on a fraction of pulses."""

    strategy: EveStrategy | None = None
    fraction: float = 0.0

    def __post_init__(self):
        if self.strategy is not None:
            object.__setattr__(self, "strategy", EveStrategy(self.strategy))
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"fraction must lie in [0, 1], got {self.fraction}")

    @classmethod
    def intercept_resend(cls, strategy="random_zx", fraction: float = 1.0) -> "EveModel":
        return cls(EveStrategy(strategy), fraction)

    @property
    def active(self) -> bool:
        return self.strategy is not None and self.fraction > 0


@dataclass(frozen=True)
class SessionConfig:
    n_pulses: int = 100_000
    check_fraction: float = 0.2
    abort_threshold: float = 0.05
    forward_noise: q.NoiseSpec = field(default_factory=q.NoiseSpec)
    backward_noise: q.NoiseSpec = field(default_factory=q.NoiseSpec)
    eve: EveModel = field(default_factory=EveModel)
    seed: int = 0
    #: residual scintillation index applied as unit-mean lognormal fading per leg
    fading_index: float = 0.0
    adaptive_optics: AdaptiveOpticsModel = field(default_factory=AdaptiveOpticsModel)
    decoy: DecoyConfig | None = None

    def __post_init__(self):
        if self.n_pulses < 100:
            raise ValueError("n_pulses must be >= 100")
        if not 0.0 < self.check_fraction < 1.0:
            raise ValueError("check_fraction must lie in (0, 1)")
        if not 0.0 <= self.abort_threshold <= 0.5:
            raise ValueError("abort_threshold must lie in [0, 0.5]")
        if self.fading_index < 0:
            raise ValueError("fading_index must be >= 0")


class Role(enum.IntEnum):
    CHECK_BIT = 0
    MESSAGE_CARRIER = 1


_NONE = -1
_LOST = -2


@dataclass(frozen=True)
class FrameRecord:
    index: int
    prep: q.PrepParams
    role: Role | None
    alice_basis_used: q.Basis | None = None
    alice_result: int | None = None
    encoded_bit: int | None = None
    bob_result: int | object | None = None

    def __post_init__(self):
        if self.role is Role.CHECK_BIT and (self.alice_basis_used is None or self.alice_result is None):
            raise ValueError("a check frame needs Alice's basis and result")


class FrameTable:
    """Columnar per-pulse record.

    Integer columns use ``-1`` for "not applicable"; ``bob_result`` uses
    ``-2`` for a pulse lost on the way back. ``role`` is ``-1`` for pulses
    that never reached Alice.
    """

    _columns = ("index", "a0", "a1", "a2", "role", "alice_basis", "alice_result",
                "encoded_bit", "bob_result")

    def __init__(self, **cols):
        for name in self._columns:
            setattr(self, name, np.asarray(cols[name]))
        n = len(self.index)
        if any(len(getattr(self, c)) != n for c in self._columns):
            raise ValueError("frame columns must have equal length")

    @classmethod
    def empty_like_pulses(cls, a0, a1, a2) -> "FrameTable":
        n = len(a0)
        fill = lambda: np.full(n, _NONE, dtype=np.int8)  # noqa: E731
        return cls(index=np.arange(n), a0=a0, a1=a1, a2=a2, role=fill(), alice_basis=fill(),
                   alice_result=fill(), encoded_bit=fill(), bob_result=fill())

    def __len__(self):
        return len(self.index)

    def _record(self, i: int) -> FrameRecord:
        def opt(v):
            return None if v == _NONE else int(v)
        role = None if self.role[i] == _NONE else Role(int(self.role[i]))
        basis = None if self.alice_basis[i] == _NONE else q.Basis(int(self.alice_basis[i]))
        bob = self.bob_result[i]
        bob = q.LOST if bob == _LOST else opt(bob)
        return FrameRecord(int(self.index[i]), q.PrepParams(int(self.a0[i]), int(self.a1[i]), int(self.a2[i])),
                           role, basis, opt(self.alice_result[i]), opt(self.encoded_bit[i]), bob)

    def __getitem__(self, i) -> FrameRecord:
        if isinstance(i, slice):
            return [self._record(j) for j in range(*i.indices(len(self)))]
        return self._record(int(i) % len(self) if i < 0 else int(i))

    def __iter__(self) -> Iterator[FrameRecord]:
        return (self._record(i) for i in range(len(self)))

    def __eq__(self, other):
        if not isinstance(other, FrameTable):
            return NotImplemented
        return all(np.array_equal(getattr(self, c), getattr(other, c)) for c in self._columns)

    __hash__ = None

    def positions(self, role: Role) -> np.ndarray:
        return np.flatnonzero(self.role == role)


@dataclass
class ForwardLeg:
    """Everything the forward leg leaves behind for the rest of the session."""

    check_error_rate: float
    frames: FrameTable
    states: np.ndarray          # post-channel states of pulses that reached Alice, by frame index
    received: np.ndarray        # bool mask over all pulses
    n_sifted: int
    n_errors: int

    @property
    def carriers(self) -> np.ndarray:
        return self.frames.positions(Role.MESSAGE_CARRIER)


def _leg_survival(noise: q.NoiseSpec, cfg: SessionConfig, rng, n: int):
    """Per-pulse survival probability of one traversal, or ``None`` for the constant case."""
    s2 = log_variance(cfg.fading_index, cfg.adaptive_optics)
    if s2 == 0.0:
        return None
    fade = rng.lognormal(-0.5 * s2, math.sqrt(s2), size=n)
    return np.clip((1.0 - noise.loss_p) * fade, 0.0, 1.0)


def _intercept_resend(states: np.ndarray, eve: EveModel, rng) -> np.ndarray:
    n = states.shape[0]
    attacked = rng.random(n) < eve.fraction
    coin = rng.integers(0, 2, size=n).astype(np.uint8)
    if eve.strategy is EveStrategy.ALWAYS_Z:
        bases = np.zeros(n, dtype=np.uint8)
    elif eve.strategy is EveStrategy.ALWAYS_X:
        bases = np.ones(n, dtype=np.uint8)
    else:
        bases = coin
    outcomes = q.measure_states(states, bases, rng)
    resent = q.basis_states(bases, outcomes)
    return np.where(attacked[:, None], resent, states)


def run_forward_leg(cfg: SessionConfig, rng) -> ForwardLeg:
    """Bob prepares and sends; Eve may attack; Alice checks a random subset.

    Alice marks ``ceil(check_fraction * received)`` frames as check bits and
    measures them in random bases. Bob discloses the preparation of those
    frames, and the error rate counts mismatches among sifted frames (Alice's
    basis equal to Bob's) against the expected bit ``a1 XOR (a0 AND a2)``.

    Raises
    ------
    InsufficientCheckBits
        If no check frame survives sifting.
    """
    rng = check_rng(rng)
    n = cfg.n_pulses
    a0, a1, a2 = (rng.integers(0, 2, size=n, dtype=np.uint8) for _ in range(3))
    states = q.prepare_states(a0, a1, a2)
    if cfg.eve.active:
        states = _intercept_resend(states, cfg.eve, rng)
    survival = _leg_survival(cfg.forward_noise, cfg, rng, n)
    states, lost = q.apply_noise_states(states, cfg.forward_noise, rng, survival)
    received = ~lost

    frames = FrameTable.empty_like_pulses(a0, a1, a2)
    arrived = np.flatnonzero(received)
    n_checks = min(len(arrived), math.ceil(cfg.check_fraction * len(arrived)))
    order = rng.permutation(len(arrived))
    checks = np.sort(arrived[order[:n_checks]])
    frames.role[arrived] = Role.MESSAGE_CARRIER
    frames.role[checks] = Role.CHECK_BIT

    alice_bases = rng.integers(0, 2, size=len(checks), dtype=np.uint8)
    results = q.measure_states(states[checks], alice_bases, rng)
    frames.alice_basis[checks] = alice_bases
    frames.alice_result[checks] = results

    sifted = alice_bases == a0[checks]
    if not sifted.any():
        raise InsufficientCheckBits(f"{len(checks)} check frames, none sifted")
    expected = q.expected_bits(a0[checks], a1[checks], a2[checks])
    errors = int(np.count_nonzero(results[sifted] != expected[sifted]))
    n_sifted = int(np.count_nonzero(sifted))
    return ForwardLeg(errors / n_sifted, frames, states, received, n_sifted, errors)


@dataclass(frozen=True)
class Abort:
    e_e: float


@dataclass(frozen=True)
class Proceed:
    cs_estimate: float


def abort_or_capacity(e_e: float, cfg: SessionConfig, q_net: float = 1.0, e_b: float = 0.0):
    """``Abort`` if ``e_e`` exceeds the threshold, else ``Proceed`` with the capacity at ``e_f = e_e``."""
    if not 0.0 <= e_e <= 1.0:
        raise ValueError(f"e_e must lie in [0, 1], got {e_e}")
    if e_e > cfg.abort_threshold:
        return Abort(e_e)
    return Proceed(secrecy_capacity(q_net, min(e_e, 0.5), e_b))


class ReturnedPulses(NamedTuple):
    states: np.ndarray   # (M, 2) after modulation and the backward channel
    lost: np.ndarray     # bool (M,)
    bits: np.ndarray     # applied bits, codeword followed by zero padding


def encode_and_return(carrier_states: np.ndarray, codeword, cfg: SessionConfig, rng) -> ReturnedPulses:
    """Write ``codeword`` onto the first carriers with I/U, pad the rest with 0, send back."""
    rng = check_rng(rng)
    codeword = check_bits(codeword, "codeword")
    m = carrier_states.shape[0]
    if codeword.shape[0] > m:
        raise CodewordTooLong(f"codeword of {codeword.shape[0]} bits, only {m} carriers")
    bits = np.zeros(m, dtype=np.uint8)
    bits[:codeword.shape[0]] = codeword
    modulated = q.encode_states(carrier_states, bits)
    survival = _leg_survival(cfg.backward_noise, cfg, rng, m)
    states, lost = q.apply_noise_states(modulated, cfg.backward_noise, rng, survival)
    return ReturnedPulses(states, lost, bits)


def demodulate(returned: ReturnedPulses, a0, a1, a2, rng) -> np.ndarray:
    """Bob's bit per carrier: outcome in the preparation basis XOR the expected bit; ``-2`` if lost."""
    outcomes = q.measure_states(returned.states, a0, rng)
    bits = (outcomes ^ q.expected_bits(a0, a1, a2)).astype(np.int8)
    return np.where(returned.lost, np.int8(_LOST), bits)


def channel_snr_db(erasure_fraction: float, error_rate: float) -> float:
    """Decoder-facing SNR of an erasure-plus-flip channel.

    Ratio of correctly delivered bits to erased-or-flipped ones,
    ``(1 - eps)(1 - e) / (eps + (1 - eps) e)``, in dB; ``inf`` for a perfect channel.
    """
    good = (1.0 - erasure_fraction) * (1.0 - error_rate)
    bad = erasure_fraction + (1.0 - erasure_fraction) * error_rate
    if bad <= 0:
        return math.inf
    if good <= 0:
        return -math.inf
    return 10.0 * math.log10(good / bad)


@dataclass
class SessionTranscript:
    frames: FrameTable
    e_e: float
    aborted: bool
    codeword_sent: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))
    codeword_received: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))
    erasures: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    message_sent: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))
    message_decoded: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))
    survival_rate: float = 0.0
    converged: bool = False
    iterations_used: int = 0
    n_sifted: int = 0
    secure_key: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))
    #: "ok", "aborted", "decode_failure" or "insufficient_carriers"
    status: str = "ok"

    @property
    def message_carrier_count(self) -> int:
        return int(self.codeword_sent.shape[0])


def run_session(cfg: SessionConfig, code: ParityCheckMatrix, message, rng=None,
                decoder: DecoderSettings | None = None) -> tuple[SessionTranscript, SecurityReport]:
    """One complete session; deterministic given ``rng`` (default: ``cfg.seed``).

    An abort at the check step is reported through ``aborted`` flags on both
    returned objects rather than raised. A decoding failure is reported via
    ``converged=False`` with the raw received word kept; the backward error
    estimate is then taken as 1/2, which zeroes the capacity.
    """
    rng = check_rng(cfg.seed if rng is None else rng)
    decoder = decoder or DecoderSettings()
    message = check_bits(message, "message")
    if message.shape[0] != code.k:
        raise ValueError(f"message length must equal the code dimension k={code.k}")

    fwd = run_forward_leg(cfg, rng)
    frames = fwd.frames
    n_received = int(fwd.received.sum())
    forward_survival = n_received / cfg.n_pulses
    if cfg.decoy is not None:
        y1_lower = decoy_bounds(simulate_decoy_source(forward_survival, cfg.decoy, rng), cfg.decoy).y1_lower
    else:
        y1_lower = forward_survival

    verdict = abort_or_capacity(fwd.check_error_rate, cfg)
    if isinstance(verdict, Abort):
        transcript = SessionTranscript(frames, fwd.check_error_rate, True, n_sifted=fwd.n_sifted,
                                       status="aborted")
        return transcript, SecurityReport.aborted_report(fwd.check_error_rate, 0.0, y1_lower)

    carriers = fwd.carriers
    n = code.n
    if len(carriers) < n:
        transcript = SessionTranscript(frames, fwd.check_error_rate, False, message_sent=message,
                                       n_sifted=fwd.n_sifted, status="insufficient_carriers")
        report = SecurityReport(fwd.check_error_rate, 0.5, 0.0, 0.0, y1_lower, 1.0 - y1_lower, 0, 0, False)
        return transcript, report

    codeword = code.encode(message)
    returned = encode_and_return(fwd.states[carriers], codeword, cfg, rng)
    frames.encoded_bit[carriers] = returned.bits
    bob = demodulate(returned, frames.a0[carriers], frames.a1[carriers], frames.a2[carriers], rng)
    frames.bob_result[carriers] = bob

    detected = int(np.count_nonzero(bob != _LOST))
    q_net = forward_survival * detected / len(carriers)
    word = bob[:n]
    erased = word == _LOST
    received_word = np.where(erased, 0, word).astype(np.uint8)

    p_llr = float(np.clip(2.0 * fwd.check_error_rate, *LLR_P_RANGE))
    cq = ChannelQuality(channel_snr_db(float(erased.mean()), p_llr), min(fwd.check_error_rate, 0.5))
    bp = BPDecoder(**asdict(decoder)).fit(code)
    result = bp.decode(hard_to_llr(received_word, p_llr, erased), cq if decoder.adaptive else None)

    seen = ~erased
    if result.converged and seen.any():
        e_b = float(np.count_nonzero(received_word[seen] != result.estimate[seen]) / seen.sum())
    else:
        e_b = 0.5
    e_b = min(e_b, 0.5)
    cs = secrecy_capacity(q_net, min(fwd.check_error_rate, 0.5), e_b)
    final_len = int(math.floor(cs * n))
    secure_key = privacy_amplify(result.estimate, ToeplitzSeed.random(n, final_len, rng), final_len)

    transcript = SessionTranscript(
        frames=frames, e_e=fwd.check_error_rate, aborted=False, codeword_sent=codeword,
        codeword_received=received_word, erasures=erased, message_sent=message,
        message_decoded=code.extract_message(result.estimate), survival_rate=q_net,
        converged=result.converged, iterations_used=result.iterations_used,
        n_sifted=fwd.n_sifted, secure_key=secure_key,
        status="ok" if result.converged else "decode_failure",
    )
    report = SecurityReport(fwd.check_error_rate, e_b, q_net, cs, y1_lower, 1.0 - y1_lower,
                            n, final_len, False)
    return transcript, report


def expected_round_trip_flip(cfg: SessionConfig) -> float:
    """Probability a carrier bit arrives flipped, from the configured noise alone."""
    def leg(noise):
        dep = noise.depolarizing_p / 2.0
        # dephasing flips X-basis outcomes only: half the pulses
        deph = (1.0 - 0.75 * noise.depolarizing_p) * noise.dephasing_p / 2.0
        return dep + deph
    f, b = leg(cfg.forward_noise), leg(cfg.backward_noise)
    return f * (1 - b) + b * (1 - f)


__all__ = [
    "Abort", "EveModel", "EveStrategy", "FrameRecord", "FrameTable", "ForwardLeg", "Proceed",
    "ReturnedPulses", "Role", "SessionConfig", "SessionTranscript", "abort_or_capacity",
    "channel_snr_db", "demodulate", "encode_and_return", "expected_round_trip_flip",
    "run_forward_leg", "run_session",
]
