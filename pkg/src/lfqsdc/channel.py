"""Free-space channel physics and the dB link budget.

Losses are power decibels, ``L_dB = -10 log10(T)``. All lengths are metres
and the optical wavenumber is ``k = 2 pi / wavelength``.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_non_negative, check_positive, check_rng
from .exceptions import DomainError, WeakTurbulenceWarning

#: Fried parameters above this are reported as ``inf``.
FRIED_CAP_M = 1e6


def wavenumber(wavelength: float) -> float:
    return 2.0 * math.pi / check_positive(wavelength, "wavelength")


def scintillation_index(cn2: float, k: float, L: float, *, warn: bool = True) -> float:
    """Rytov variance ``1.23 Cn2 k^(7/6) L^(11/6)``.

    A :class:`WeakTurbulenceWarning` is emitted when the result exceeds 1,
    where the weak-turbulence expression stops being trustworthy.
    """
    for name, v in (("cn2", cn2), ("k", k), ("L", L)):
        check_non_negative(v, name)
    sigma2 = 1.23 * cn2 * k ** (7.0 / 6.0) * L ** (11.0 / 6.0)
    if warn and sigma2 > 1.0:
        warnings.warn(f"scintillation index {sigma2:.3g} > 1: outside the weak-turbulence regime",
                      WeakTurbulenceWarning, stacklevel=2)
    return sigma2


def transmittance(alpha: float, L: float) -> float:
    """Beer-Lambert absorption ``exp(-alpha L)``."""
    check_non_negative(alpha, "alpha")
    check_non_negative(L, "L")
    return math.exp(-alpha * L)


def mie_cross_section(d_p: float, wavelength: float, n_p: float, q_ext: float) -> float:
    """Scattering cross-section in m^2 for particles of diameter ``d_p``.

    ``(2 pi^5 d^6 / (3 lambda^4)) ((n^2 - 1) / (n^2 + 2))^2 Q_ext``
    """
    check_non_negative(d_p, "d_p")
    check_positive(wavelength, "wavelength")
    check_non_negative(q_ext, "q_ext")
    if n_p < 1:
        raise ValueError(f"refractive index must be >= 1, got {n_p}")
    lorentz = (n_p ** 2 - 1.0) / (n_p ** 2 + 2.0)
    return (2.0 * math.pi ** 5 * d_p ** 6 / (3.0 * wavelength ** 4)) * lorentz ** 2 * q_ext


def fried_parameter(cn2: float, k: float, L: float) -> float:
    """Plane-wave coherence length ``(0.423 k^2 Cn2 L)^(-3/5)``.

    Raises :class:`DomainError` if any input is zero; returns ``inf`` when the
    value exceeds :data:`FRIED_CAP_M`.
    """
    for name, v in (("cn2", cn2), ("k", k), ("L", L)):
        if v == 0:
            raise DomainError(f"fried_parameter diverges for {name} = 0")
        check_positive(v, name)
    r0 = (0.423 * k ** 2 * cn2 * L) ** (-3.0 / 5.0)
    return math.inf if r0 > FRIED_CAP_M else r0


def pointing_coupling(pointing_sigma: float, beam_divergence: float) -> float:
    """Mean Gaussian-beam coupling under a Rayleigh radial pointing error.

    With coupling ``exp(-2 r^2 / theta^2)`` and ``r ~ Rayleigh(sigma)`` the
    expectation is ``theta^2 / (theta^2 + 4 sigma^2)``.
    """
    check_non_negative(pointing_sigma, "pointing_sigma")
    if pointing_sigma == 0:
        return 1.0
    check_positive(beam_divergence, "beam_divergence")
    t2 = beam_divergence ** 2
    return t2 / (t2 + 4.0 * pointing_sigma ** 2)


def db_from_transmission(t: float) -> float:
    if t <= 0:
        return math.inf
    return -10.0 * math.log10(t)


def transmission_from_db(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 10.0)


@dataclass(frozen=True)
class AtmosphereParams:
    """Turbulence, absorption and scattering description of one path (SI units)."""

    cn2: float = 1e-15
    alpha: float = 0.0
    wavelength: float = 1550e-9
    path_length: float = 1000.0
    particle_diameter: float = 0.0
    refractive_index: float = 1.0
    q_ext: float = 2.0
    particle_density: float = 0.0

    def __post_init__(self):
        for name in ("cn2", "alpha", "path_length", "particle_diameter", "q_ext", "particle_density"):
            check_non_negative(getattr(self, name), name)
        check_positive(self.wavelength, "wavelength")
        if self.refractive_index < 1:
            raise ValueError("refractive_index must be >= 1")

    @property
    def k(self) -> float:
        return wavenumber(self.wavelength)

    def scintillation_index(self, warn: bool = True) -> float:
        return scintillation_index(self.cn2, self.k, self.path_length, warn=warn)

    def fried_parameter(self) -> float:
        return fried_parameter(self.cn2, self.k, self.path_length)

    def scattering_cross_section(self) -> float:
        return mie_cross_section(self.particle_diameter, self.wavelength,
                                 self.refractive_index, self.q_ext)


@dataclass(frozen=True)
class LinkBudget:
    geometric_loss_db: float
    pointing_loss_db: float
    atmospheric_loss_db: float
    total_loss_db: float
    mean_transmission: float

    @classmethod
    def from_components(cls, geometric_loss_db: float, pointing_loss_db: float = 0.0,
                        atmospheric_loss_db: float = 0.0) -> "LinkBudget":
        total = math.fsum((geometric_loss_db, pointing_loss_db, atmospheric_loss_db))
        return cls(geometric_loss_db, pointing_loss_db, atmospheric_loss_db,
                   total, transmission_from_db(total))

    @classmethod
    def from_total(cls, total_loss_db: float) -> "LinkBudget":
        """A budget whose whole loss is booked as geometric."""
        return cls.from_components(total_loss_db)


def build_link_budget(params: AtmosphereParams, geometric_loss_db: float = 0.0,
                      pointing_sigma: float = 0.0, beam_divergence: float = 0.0) -> LinkBudget:
    """Aggregate absorption, Mie scattering and pointing loss on top of ``geometric_loss_db``."""
    check_non_negative(geometric_loss_db, "geometric_loss_db")
    sigma_s = params.scattering_cross_section()
    atmos_t = transmittance(params.alpha, params.path_length) * math.exp(
        -params.particle_density * sigma_s * params.path_length)
    atmospheric_db = db_from_transmission(atmos_t)
    pointing_db = db_from_transmission(pointing_coupling(pointing_sigma, beam_divergence))
    # -log10(1) can come out as -0.0; keep the components tidy
    return LinkBudget.from_components(geometric_loss_db, pointing_db + 0.0, atmospheric_db + 0.0)


class AOMode(enum.Enum):
    CLOSED_LOOP = "closed_loop"
    OPEN_LOOP = "open_loop"
    OFF = "off"


DEFAULT_AO_GAIN = {AOMode.CLOSED_LOOP: 0.9, AOMode.OPEN_LOOP: 0.6, AOMode.OFF: 0.0}


@dataclass(frozen=True)
class AdaptiveOpticsModel:
    """Fraction of the log-intensity variance removed by wavefront correction."""

    mode: AOMode = AOMode.OFF
    correction_gain: float = field(default=None)

    def __post_init__(self):
        mode = AOMode(self.mode)
        object.__setattr__(self, "mode", mode)
        gain = DEFAULT_AO_GAIN[mode] if self.correction_gain is None else float(self.correction_gain)
        if not 0.0 <= gain <= 1.0:
            raise ValueError(f"correction_gain must lie in [0, 1], got {gain}")
        if mode is AOMode.OFF and gain != 0.0:
            raise ValueError("adaptive optics switched off must have zero gain")
        object.__setattr__(self, "correction_gain", gain)


def log_variance(sigma_i2: float, ao: AdaptiveOpticsModel | None = None) -> float:
    """Log-intensity variance ``ln(1 + sigma_I^2 (1 - gain))`` left after correction."""
    check_non_negative(sigma_i2, "sigma_i2")
    gain = 0.0 if ao is None else ao.correction_gain
    return math.log1p(sigma_i2 * (1.0 - gain))


def sample_transmission(budget: LinkBudget, sigma_i2: float, ao: AdaptiveOpticsModel | None,
                        rng, size=None):
    """Per-pulse transmission: ``mean_transmission`` times a unit-mean lognormal.

    The result is clamped to [0, 1]. With zero residual variance every draw is
    exactly ``mean_transmission``. Returns a float when ``size`` is None.
    """
    rng = check_rng(rng)
    s2 = log_variance(sigma_i2, ao)
    eta0 = budget.mean_transmission
    if s2 == 0.0:
        return eta0 if size is None else np.full(size, eta0)
    s = math.sqrt(s2)
    fade = rng.lognormal(mean=-0.5 * s2, sigma=s, size=size)
    out = np.clip(eta0 * fade, 0.0, 1.0)
    return float(out) if size is None else out
