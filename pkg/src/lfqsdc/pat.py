"""Pointing, acquisition and tracking: metrics, optimizers and a PID tracking loop."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import erfc

from ._validation import check_non_negative, check_positive, check_rng
from .exceptions import Diverged, DomainError, NoConvergence

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PointingState:
    theta_p: float
    theta_t: float
    sigma: float = 0.0

    def __post_init__(self):
        check_non_negative(self.sigma, "sigma")

    @property
    def offset(self) -> float:
        return self.theta_p - self.theta_t


@dataclass(frozen=True)
class JitterProcess:
    """Disturbance ``theta_d(t)``: an AR(1) wander plus a sinusoid.

    The defaults model slow platform wander (wind, thermal drift) with a
    periodic vibration line, at a few microradians RMS.
    """

    ar_coefficient: float = 0.995
    innovation_sigma: float = 1e-6
    sinusoid_amplitude: float = 5e-6
    sinusoid_period: float = 500.0

    def __post_init__(self):
        if not 0.0 <= self.ar_coefficient < 1.0:
            raise ValueError("ar_coefficient must lie in [0, 1)")
        check_non_negative(self.innovation_sigma, "innovation_sigma")
        check_non_negative(self.sinusoid_amplitude, "sinusoid_amplitude")
        check_positive(self.sinusoid_period, "sinusoid_period")

    def sample(self, steps: int, rng) -> np.ndarray:
        rng = check_rng(rng)
        w = rng.normal(0.0, self.innovation_sigma, size=steps)
        ar = np.empty(steps)
        x = 0.0
        for t in range(steps):
            x = self.ar_coefficient * x + w[t]
            ar[t] = x
        t = np.arange(steps)
        return ar + self.sinusoid_amplitude * np.sin(2.0 * np.pi * t / self.sinusoid_period)


@dataclass(frozen=True)
class ControllerConfig:
    kp: float = 0.8
    ki: float = 0.2
    kd: float = 0.1
    actuator_limit: float = 1e-4

    def __post_init__(self):
        # Signed gains are allowed: a wrong-sign controller is a legitimate
        # (unstable) configuration that the tracking loop reports as Diverged.
        for name in ("kp", "ki", "kd"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.kp + self.ki + self.kd == -1.0:
            raise ValueError("kp + ki + kd = -1 makes the same-instant loop singular")
        check_positive(self.actuator_limit, "actuator_limit")


# -- alignment ---------------------------------------------------------------

def alignment_error(theta_m: float, d: float) -> float:
    """Lateral displacement ``d tan(theta_m)`` at range ``d``."""
    check_non_negative(d, "d")
    if abs(theta_m) >= math.pi / 2:
        raise DomainError(f"|theta_m| must be below pi/2, got {theta_m}")
    return d * math.tan(theta_m)


def correct_alignment(initial: PointingState, d: float, tolerance: float,
                      max_evaluations: int = 200) -> PointingState:
    """Golden-section search for the ``theta_p`` minimizing ``|e_a(theta_p - theta_t)|``.

    ``theta_t`` is the reference and stays fixed. The search bracket is
    ``theta_p +- 2 |offset|``, clipped to the domain of ``tan``. The returned
    state never has a larger alignment error than ``initial``.
    """
    check_positive(tolerance, "tolerance")
    offset = initial.offset
    if abs(offset) >= math.pi / 2:
        raise DomainError("initial pointing offset must be below pi/2")
    if abs(offset) <= tolerance:
        return initial

    def cost(theta):
        return abs(alignment_error(theta - initial.theta_t, d))

    edge = math.pi / 2 * (1.0 - 1e-9)
    lo = max(initial.theta_p - 2 * abs(offset), initial.theta_t - edge)
    hi = min(initial.theta_p + 2 * abs(offset), initial.theta_t + edge)
    c = hi - _INV_PHI * (hi - lo)
    e = lo + _INV_PHI * (hi - lo)
    fc, fe = cost(c), cost(e)
    evaluations = 2
    while hi - lo > tolerance:
        if evaluations >= max_evaluations:
            raise NoConvergence(f"golden-section search did not reach {tolerance} "
                                f"in {max_evaluations} evaluations")
        if fc < fe:
            hi, e, fe = e, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = cost(c)
        else:
            lo, c, fc = c, e, fe
            e = lo + _INV_PHI * (hi - lo)
            fe = cost(e)
        evaluations += 1
    theta = 0.5 * (lo + hi)
    if cost(theta) > cost(initial.theta_p):
        return initial
    return PointingState(theta, initial.theta_t, initial.sigma)


# -- acquisition ------------------------------------------------------------

def acquisition_probability(snr_linear, sigma, fov):
    """``P_a = (1 - exp(-fov^2 / 2 sigma^2)) (1 - erfc(sqrt(snr) / sqrt 2) / 2)``.

    The first factor is the chance a Rayleigh pointing error lands inside the
    field of view, the second a Gaussian threshold detection. ``sigma = 0``
    takes the limit (first factor 1). Works elementwise on arrays.
    """
    snr = np.asarray(snr_linear, dtype=float)
    sig = np.asarray(sigma, dtype=float)
    if np.any(snr < 0) or np.any(sig < 0):
        raise ValueError("snr_linear and sigma must be >= 0")
    check_positive(fov, "fov")
    with np.errstate(divide="ignore"):
        in_fov = np.where(sig > 0, -np.expm1(-fov ** 2 / (2.0 * np.where(sig > 0, sig, 1.0) ** 2)), 1.0)
    detect = 1.0 - 0.5 * erfc(np.sqrt(snr) / math.sqrt(2.0))
    p = in_fov * detect
    return float(p) if p.ndim == 0 else p


def maximize_acquisition(snr_range, sigma_range, fov: float = 1e-5, grid: int = 11):
    """Maximize :func:`acquisition_probability` over a closed box.

    A ``grid x grid`` lattice (corners included) seeds a bounded L-BFGS-B
    polish from its best point. Returns ``(snr*, sigma*, P_a*)``.
    """
    (s_lo, s_hi), (g_lo, g_hi) = (tuple(map(float, snr_range)), tuple(map(float, sigma_range)))
    if s_lo > s_hi or g_lo > g_hi:
        raise ValueError("ranges must be (low, high) with low <= high")
    snr_grid, sig_grid = np.meshgrid(np.linspace(s_lo, s_hi, grid), np.linspace(g_lo, g_hi, grid))
    values = acquisition_probability(snr_grid, sig_grid, fov)
    i = np.unravel_index(np.argmax(values), values.shape)
    best = (float(snr_grid[i]), float(sig_grid[i]), float(values[i]))
    if s_lo < s_hi or g_lo < g_hi:
        res = minimize(lambda x: -acquisition_probability(x[0], x[1], fov), x0=best[:2],
                       method="L-BFGS-B", bounds=[(s_lo, s_hi), (g_lo, g_hi)])
        if -res.fun > best[2]:
            best = (float(res.x[0]), float(res.x[1]), float(-res.fun))
    return best


# -- stability --------------------------------------------------------------

def stability_limit(wavelength: float, d_eff: float) -> float:
    """Diffraction-scale pointing stability requirement ``lambda / D_eff``."""
    check_positive(wavelength, "wavelength")
    if d_eff == 0:
        raise DomainError("effective aperture must be non-zero")
    return wavelength / check_positive(d_eff, "d_eff")


def satisfies_stability(s_p: float, wavelength: float, d_eff: float) -> bool:
    return s_p < stability_limit(wavelength, d_eff)


# -- tracking -----------------------------------------------------------------

class TrackingResult(NamedTuple):
    residual_trace: np.ndarray
    open_loop_trace: np.ndarray
    residual_rms: float
    open_loop_rms: float


def _steady_rms(trace: np.ndarray) -> float:
    start = int(0.2 * len(trace))
    return float(np.sqrt(np.mean(trace[start:] ** 2)))


def run_tracking_loop(jitter: JitterProcess, ctrl: ControllerConfig, steps: int, rng) -> TrackingResult:
    """Discrete velocity-form PID closing the loop around the residual.

    The controller update is
    ``du_t = kp (e_t - e_{t-1}) + ki e_t + kd (e_t - 2 e_{t-1} + e_{t-2})``
    with ``e_t = theta_d(t) - u_t`` and ``u_t = u_{t-1} + du_t``. Sensor and
    actuator share the sampling instant, so the implicit equation is solved for
    ``e_t`` in closed form; ``du_t`` is then clamped to ``actuator_limit`` and
    the residual recomputed. RMS values skip the first 20% of steps.
    """
    if steps < 100:
        raise ValueError("steps must be >= 100")
    disturbance = jitter.sample(steps, rng)
    residual = np.empty(steps)
    gain = ctrl.kp + ctrl.ki + ctrl.kd
    u = 0.0
    e1 = e2 = 0.0
    lim = ctrl.actuator_limit
    for t in range(steps):
        memory = -(ctrl.kp + 2.0 * ctrl.kd) * e1 + ctrl.kd * e2
        e = (disturbance[t] - u - memory) / (1.0 + gain)
        du = gain * e + memory
        u += min(max(du, -lim), lim)
        e = disturbance[t] - u
        residual[t] = e
        e2, e1 = e1, e
    res_rms = _steady_rms(residual)
    ol_rms = _steady_rms(disturbance)
    if not np.isfinite(res_rms) or res_rms > 1e3 * ol_rms:
        raise Diverged(f"residual RMS {res_rms:.3g} vs open-loop {ol_rms:.3g}")
    return TrackingResult(residual, disturbance, res_rms, ol_rms)
