"""INI configuration for the command-line harness.

Sections mirror the simulator's modules and every physical quantity carries
its unit in the key name. Missing sections or keys fall back to the defaults
below. An example with every key::

    [session]
    n_pulses = 100000
    check_fraction = 0.2
    abort_threshold = 0.05
    seed = 0
    loss_db = 0.0               ; total round-trip loss, split evenly per leg
    loss_source = fixed         ; fixed | channel
    fading_index = 0.0          ; residual scintillation index per leg

    [noise.forward]
    depolarizing_p = 0.0098
    dephasing_p = 0.0
    loss_p = 0.0

    [noise.backward]
    depolarizing_p = 0.0098
    dephasing_p = 0.0
    loss_p = 0.0

    [eve]
    strategy = none             ; none | always_z | always_x | random_zx
    fraction = 0.0

    [ldpc]
    block_length = 1024
    ladder = 3:4, 3:6, 3:12     ; regular (d_v:d_c) rungs, increasing rate
    rung = 1                    ; rung used by `simulate`
    code_seed = 0
    adaptive = true
    max_iterations = 50
    snr_threshold_db = 10.0
    t_low_snr = 20
    t_high_snr = 10
    message_transform = identity
    damping = 0.75
    optimizer_target_qber = 0.02
    optimizer_trials = 200
    optimizer_penalty_qber = 1.0
    optimizer_penalty_rate = 1.0
    optimizer_target_rate = 0.5

    [channel]
    cn2_m_neg2_3 = 1e-15
    alpha_per_m = 0.0
    wavelength_m = 1.55e-6
    path_length_m = 1000.0
    particle_diameter_m = 0.0
    particle_refractive_index = 1.0
    q_ext = 2.0
    particle_density_per_m3 = 0.0
    geometric_loss_db = 0.0
    pointing_sigma_rad = 0.0
    beam_divergence_rad = 0.0
    ao_mode = off               ; off | open_loop | closed_loop

    [pat]
    ar_coefficient = 0.995
    innovation_sigma_rad = 1e-6
    sinusoid_amplitude_rad = 5e-6
    sinusoid_period_steps = 500
    kp = 0.8
    ki = 0.2
    kd = 0.1
    actuator_limit_rad_per_step = 1e-4
    steps = 10000

    [security]
    use_decoy = false
    decoy_mu = 0.5
    decoy_nu = 0.15
    decoy_include_vacuum = false
    decoy_pulses_per_class = 5000000

    [sweep]
    loss_db_start = 0.0
    loss_db_end = 35.0
    loss_db_step = 1.0
    pulses_per_point = 100000
    repetitions = 5
    seed = 0
    n_jobs = 1
    smoothing = 0.5
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace

from ..channel import AdaptiveOpticsModel, AOMode, AtmosphereParams, build_link_budget
from ..exceptions import ParseError
from ..ldpc.decoder import DecoderSettings
from ..ldpc.distribution import DegreeDistribution, RateLadder
from ..pat import ControllerConfig, JitterProcess
from ..protocol import EveModel, SessionConfig
from ..quantum import NoiseSpec
from ..security import DecoyConfig
from .sweep import SweepSpec, session_at_loss

#: Calibrated so the forward error rate at zero loss sits near 0.49%.
DEFAULT_DEPOLARIZING_P = 0.0098

KNOWN_SECTIONS = ("session", "noise.forward", "noise.backward", "eve", "ldpc", "channel",
                  "pat", "security", "sweep")


@dataclass(frozen=True)
class LdpcConfig:
    block_length: int = 1024
    ladder: tuple[tuple[int, int], ...] = ((3, 4), (3, 6), (3, 12))
    rung: int = 1
    code_seed: int = 0
    decoder: DecoderSettings = field(default_factory=lambda: DecoderSettings(adaptive=True))
    optimizer_target_qber: float = 0.02
    optimizer_trials: int = 200
    optimizer_penalty_qber: float = 1.0
    optimizer_penalty_rate: float = 1.0
    optimizer_target_rate: float = 0.5

    def rate_ladder(self) -> RateLadder:
        return RateLadder([DegreeDistribution.regular(dv, dc) for dv, dc in self.ladder])


@dataclass(frozen=True)
class ChannelConfig:
    atmosphere: AtmosphereParams = field(default_factory=AtmosphereParams)
    geometric_loss_db: float = 0.0
    pointing_sigma_rad: float = 0.0
    beam_divergence_rad: float = 0.0
    adaptive_optics: AdaptiveOpticsModel = field(default_factory=AdaptiveOpticsModel)


@dataclass(frozen=True)
class PatConfig:
    jitter: JitterProcess = field(default_factory=JitterProcess)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    steps: int = 10_000


@dataclass(frozen=True)
class SimulationConfig:
    session: SessionConfig
    loss_db: float = 0.0
    loss_source: str = "fixed"
    ldpc: LdpcConfig = field(default_factory=LdpcConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    pat: PatConfig = field(default_factory=PatConfig)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    n_jobs: int = 1
    smoothing: float = 0.5

    def with_seed(self, seed: int) -> "SimulationConfig":
        return replace(self, session=replace(self.session, seed=seed), sweep=replace(self.sweep, seed=seed))

    def effective_session(self) -> SessionConfig:
        """Session with the configured loss applied.

        With ``loss_source = channel`` the round-trip loss is twice the one-way
        link budget and the scintillation index becomes the fading index.
        """
        if self.loss_source == "channel":
            ch = self.channel
            budget = build_link_budget(ch.atmosphere, ch.geometric_loss_db,
                                       ch.pointing_sigma_rad, ch.beam_divergence_rad)
            base = replace(self.session, fading_index=ch.atmosphere.scintillation_index(),
                           adaptive_optics=ch.adaptive_optics)
            return session_at_loss(base, 2.0 * budget.total_loss_db)
        return session_at_loss(self.session, self.loss_db)


def default_config() -> SimulationConfig:
    return load_config_text("")


class _Section:
    """Typed access to one INI section with line-numbered errors."""

    def __init__(self, parser: configparser.ConfigParser, name: str, lines: dict):
        self.name = name
        self.data = parser[name] if parser.has_section(name) else {}
        self.lines = lines

    def _fail(self, key, msg):
        raise ParseError(f"[{self.name}] {key}: {msg}", self.lines.get((self.name, key)))

    def get(self, key, default, kind=float):
        if key not in self.data:
            return default
        raw = self.data[key].strip()
        try:
            if kind is bool:
                if raw.lower() in ("1", "true", "yes", "on"):
                    return True
                if raw.lower() in ("0", "false", "no", "off"):
                    return False
                raise ValueError(raw)
            if kind is int:
                return int(float(raw)) if "e" in raw.lower() else int(raw)
            return kind(raw)
        except ValueError:
            self._fail(key, f"cannot read {raw!r} as {kind.__name__}")

    def build(self, key, fn):
        """Run a constructor, reporting validation errors against ``key``."""
        try:
            return fn()
        except ParseError:
            raise
        except (ValueError, TypeError) as exc:
            self._fail(key, str(exc))


def _key_lines(text: str) -> dict:
    """Map ``(section, key)`` to its 1-based line for error messages."""
    lines, section = {}, None
    for i, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
            lines[(section, None)] = i
        elif section and "=" in s and not s.startswith((";", "#")):
            lines[(section, s.split("=", 1)[0].strip().lower())] = i
    return lines


def _parse_ladder(raw: str) -> tuple[tuple[int, int], ...]:
    rungs = []
    for item in raw.split(","):
        dv, dc = item.strip().split(":")
        rungs.append((int(dv), int(dc)))
    return tuple(rungs)


def load_config_text(text: str) -> SimulationConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from None
    for name in parser.sections():
        if name not in KNOWN_SECTIONS:
            raise ParseError(f"unknown section [{name}]", _key_lines(text).get((name, None)))
    lines = _key_lines(text)
    sec = {name: _Section(parser, name, lines) for name in KNOWN_SECTIONS}

    def noise(name):
        s = sec[name]
        return s.build("depolarizing_p", lambda: NoiseSpec(
            depolarizing_p=s.get("depolarizing_p", DEFAULT_DEPOLARIZING_P),
            loss_p=s.get("loss_p", 0.0),
            dephasing_p=s.get("dephasing_p", 0.0)))

    e = sec["eve"]
    strategy = e.get("strategy", "none", str).lower()
    eve = e.build("strategy", lambda: EveModel() if strategy == "none"
                  else EveModel.intercept_resend(strategy, e.get("fraction", 1.0)))

    sc = sec["security"]
    decoy = None
    if sc.get("use_decoy", False, bool):
        decoy = sc.build("decoy_mu", lambda: DecoyConfig(
            sc.get("decoy_mu", 0.5), sc.get("decoy_nu", 0.15),
            sc.get("decoy_include_vacuum", False, bool), sc.get("decoy_pulses_per_class", 5_000_000, int)))

    s = sec["session"]
    loss_source = s.get("loss_source", "fixed", str).lower()
    if loss_source not in ("fixed", "channel"):
        s._fail("loss_source", "must be 'fixed' or 'channel'")
    session = s.build("n_pulses", lambda: SessionConfig(
        n_pulses=s.get("n_pulses", 100_000, int),
        check_fraction=s.get("check_fraction", 0.2),
        abort_threshold=s.get("abort_threshold", 0.05),
        forward_noise=noise("noise.forward"),
        backward_noise=noise("noise.backward"),
        eve=eve,
        seed=s.get("seed", 0, int),
        fading_index=s.get("fading_index", 0.0),
        decoy=decoy))

    ld = sec["ldpc"]
    ladder_raw = ld.get("ladder", None, str)
    ladder = ld.build("ladder", lambda: _parse_ladder(ladder_raw)) if ladder_raw else LdpcConfig.ladder
    decoder = ld.build("max_iterations", lambda: DecoderSettings(
        max_iterations=ld.get("max_iterations", 50, int),
        adaptive=ld.get("adaptive", True, bool),
        snr_threshold=ld.get("snr_threshold_db", 10.0),
        t_low_snr=ld.get("t_low_snr", 20, int),
        t_high_snr=ld.get("t_high_snr", 10, int),
        message_transform=ld.get("message_transform", "identity", str),
        damping=ld.get("damping", 0.75)))
    ldpc = LdpcConfig(
        block_length=ld.get("block_length", 1024, int), ladder=ladder,
        rung=ld.get("rung", 1, int), code_seed=ld.get("code_seed", 0, int), decoder=decoder,
        optimizer_target_qber=ld.get("optimizer_target_qber", 0.02),
        optimizer_trials=ld.get("optimizer_trials", 200, int),
        optimizer_penalty_qber=ld.get("optimizer_penalty_qber", 1.0),
        optimizer_penalty_rate=ld.get("optimizer_penalty_rate", 1.0),
        optimizer_target_rate=ld.get("optimizer_target_rate", 0.5))
    ld.build("ladder", ldpc.rate_ladder)
    if not 0 <= ldpc.rung < len(ldpc.ladder):
        ld._fail("rung", f"must index the ladder (0..{len(ldpc.ladder) - 1})")

    c = sec["channel"]
    atmosphere = c.build("cn2_m_neg2_3", lambda: AtmosphereParams(
        cn2=c.get("cn2_m_neg2_3", 1e-15), alpha=c.get("alpha_per_m", 0.0),
        wavelength=c.get("wavelength_m", 1550e-9), path_length=c.get("path_length_m", 1000.0),
        particle_diameter=c.get("particle_diameter_m", 0.0),
        refractive_index=c.get("particle_refractive_index", 1.0), q_ext=c.get("q_ext", 2.0),
        particle_density=c.get("particle_density_per_m3", 0.0)))
    ao = c.build("ao_mode", lambda: AdaptiveOpticsModel(AOMode(c.get("ao_mode", "off", str).lower())))
    channel = ChannelConfig(atmosphere, c.get("geometric_loss_db", 0.0), c.get("pointing_sigma_rad", 0.0),
                            c.get("beam_divergence_rad", 0.0), ao)

    p = sec["pat"]
    pat = PatConfig(
        p.build("ar_coefficient", lambda: JitterProcess(
            p.get("ar_coefficient", 0.995), p.get("innovation_sigma_rad", 1e-6),
            p.get("sinusoid_amplitude_rad", 5e-6), p.get("sinusoid_period_steps", 500.0))),
        p.build("kp", lambda: ControllerConfig(
            p.get("kp", 0.8), p.get("ki", 0.2), p.get("kd", 0.1),
            p.get("actuator_limit_rad_per_step", 1e-4))),
        p.get("steps", 10_000, int))

    w = sec["sweep"]
    sweep = w.build("loss_db_start", lambda: SweepSpec(
        w.get("loss_db_start", 0.0), w.get("loss_db_end", 35.0), w.get("loss_db_step", 1.0),
        w.get("pulses_per_point", 100_000, int), w.get("repetitions", 5, int), w.get("seed", 0, int)))

    return SimulationConfig(session=session, loss_db=s.get("loss_db", 0.0), loss_source=loss_source,
                            ldpc=ldpc, channel=channel, pat=pat, sweep=sweep,
                            n_jobs=w.get("n_jobs", 1, int), smoothing=w.get("smoothing", 0.5))


def load_config(path: str | os.PathLike) -> SimulationConfig:
    with open(path, encoding="utf-8") as fh:
        return load_config_text(fh.read())
