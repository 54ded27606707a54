"""Security post-processing: error-rate estimation, decoy bounds, capacity, hashing."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Iterable, NamedTuple

import numpy as np
from scipy.linalg import toeplitz
from scipy.stats import binomtest
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_bits, check_probability, check_rng
from .exceptions import (AbortedSession, DegenerateIntensities, EmptyRecords,
                         SeedLengthMismatch)
from .information import binary_entropy

if TYPE_CHECKING:
    from .protocol import SessionTranscript


# -- QBER -----------------------------------------------------------------------

class QberEstimate(NamedTuple):
    e: float
    ci_low: float
    ci_high: float
    n: int


def estimate_qber(records: Iterable[tuple[int, int]] | np.ndarray, confidence: float = 0.95) -> QberEstimate:
    """Mismatch fraction of ``(expected, observed)`` pairs with a Wilson score interval."""
    arr = np.asarray(list(records) if not isinstance(records, np.ndarray) else records)
    if arr.size == 0:
        raise EmptyRecords("no (expected, observed) records to estimate from")
    arr = arr.reshape(-1, 2)
    return qber_from_counts(int(np.count_nonzero(arr[:, 0] != arr[:, 1])), len(arr), confidence)


def qber_from_counts(errors: int, total: int, confidence: float = 0.95) -> QberEstimate:
    if total <= 0:
        raise EmptyRecords("no records to estimate from")
    ci = binomtest(errors, total).proportion_ci(confidence_level=confidence, method="wilson")
    return QberEstimate(errors / total, float(ci.low), float(ci.high), total)


# -- decoy states -------------------------------------------------------------

@dataclass(frozen=True)
class DecoyConfig:
    """Signal intensity ``mu`` and weak decoy ``nu`` (mean photon numbers)."""

    mu: float = 0.5
    nu: float = 0.15
    include_vacuum: bool = False
    pulses_per_class: int = 5_000_000

    def __post_init__(self):
        if not self.mu > self.nu >= 0:
            raise ValueError(f"need mu > nu >= 0, got mu={self.mu}, nu={self.nu}")
        if self.pulses_per_class < 1:
            raise ValueError("pulses_per_class must be >= 1")

    @property
    def n_classes(self) -> int:
        return 3 if self.include_vacuum else 2


@dataclass(frozen=True)
class DetectionStats:
    q_mu: float
    q_nu: float
    y0: float = 0.0

    def __post_init__(self):
        for name in ("q_mu", "q_nu", "y0"):
            check_probability(getattr(self, name), name)


class DecoyBound(NamedTuple):
    y1_lower: float
    p_loss_estimate: float


def decoy_bounds(stats: DetectionStats, cfg: DecoyConfig) -> DecoyBound:
    """Weak-decoy lower bound on the single-photon yield.

    ``Y1 >= mu / (mu nu - nu^2) (Q_nu e^nu - Q_mu e^mu nu^2 / mu^2 - (mu^2 - nu^2) / mu^2 Y0)``,
    clamped to [0, 1]. ``p_loss_estimate`` is ``1 - y1_lower``.
    """
    mu, nu = cfg.mu, cfg.nu
    denom = mu * nu - nu ** 2
    if denom <= 0:
        raise DegenerateIntensities(f"mu*nu - nu^2 = {denom} must be positive")
    y1 = (mu / denom) * (stats.q_nu * math.exp(nu)
                         - stats.q_mu * math.exp(mu) * nu ** 2 / mu ** 2
                         - (mu ** 2 - nu ** 2) / mu ** 2 * stats.y0)
    y1 = min(max(y1, 0.0), 1.0)
    return DecoyBound(y1, 1.0 - y1)


def simulate_decoy_source(eta: float, cfg: DecoyConfig, rng, y0: float = 0.0) -> DetectionStats:
    """Monte-Carlo detection statistics of a Poisson source through transmission ``eta``.

    Each pulse carries ``Poisson(intensity)`` photons, each surviving with
    probability ``eta``; a background click occurs with probability ``y0``.
    With ``cfg.include_vacuum`` the returned ``y0`` is measured on a vacuum
    class, otherwise the true value is passed through.
    """
    rng = check_rng(rng)
    check_probability(eta, "eta")
    check_probability(y0, "y0")

    def gain(intensity):
        photons = rng.poisson(intensity, size=cfg.pulses_per_class)
        p_click = 1.0 - (1.0 - y0) * (1.0 - eta) ** photons
        return float(np.count_nonzero(rng.random(cfg.pulses_per_class) < p_click)) / cfg.pulses_per_class

    q_mu = gain(cfg.mu)
    q_nu = gain(cfg.nu)
    y0_hat = gain(0.0) if cfg.include_vacuum else y0
    return DetectionStats(q_mu, q_nu, y0_hat)


def true_single_photon_yield(eta: float, y0: float = 0.0) -> float:
    return 1.0 - (1.0 - y0) * (1.0 - eta)


# -- secrecy capacity ---------------------------------------------------------

def secrecy_capacity(q_net: float, e_f: float, e_b: float) -> float:
    """``max(0, q_net (1 - H2(e_f) - H2(e_b)))`` secure bits per pulse."""
    check_probability(q_net, "q_net")
    for name, e in (("e_f", e_f), ("e_b", e_b)):
        if not 0.0 <= e <= 0.5:
            raise ValueError(f"{name} must lie in [0, 0.5], got {e}")
    return max(0.0, q_net * (1.0 - binary_entropy(e_f) - binary_entropy(e_b)))


# -- privacy amplification ------------------------------------------------------

@dataclass(frozen=True)
class ToeplitzSeed:
    """Seed bits defining an ``out_len x in_len`` Toeplitz matrix.

    Orientation: ``T[i, j] = bits[i - j + in_len - 1]``. The first row reads
    the leading ``in_len`` bits backwards and the first column reads bits
    ``in_len - 1`` onward. A single 1 at position ``in_len - 1`` with
    ``out_len == in_len`` gives the identity.
    """

    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in check_bits(np.asarray(self.bits))))

    @classmethod
    def random(cls, in_len: int, out_len: int, rng) -> "ToeplitzSeed":
        n = in_len + out_len - 1 if out_len > 0 else 0
        return cls(tuple(check_rng(rng).integers(0, 2, size=n).tolist()))

    def matrix(self, in_len: int, out_len: int) -> np.ndarray:
        expected = in_len + out_len - 1 if out_len > 0 else 0
        if len(self.bits) != expected:
            raise SeedLengthMismatch(
                f"seed has {len(self.bits)} bits, in_len={in_len} and out_len={out_len} need {expected}")
        if out_len == 0:
            return np.zeros((0, in_len), dtype=np.uint8)
        b = np.asarray(self.bits, dtype=np.uint8)
        first_col = b[in_len - 1:]
        first_row = b[in_len - 1::-1]
        return toeplitz(first_col, first_row).astype(np.uint8)


def privacy_amplify(key, seed: ToeplitzSeed, out_len: int) -> np.ndarray:
    """Return ``T key`` over GF(2)."""
    key = check_bits(key, "key")
    if not 0 <= out_len <= key.shape[0]:
        raise ValueError(f"out_len must lie in [0, {key.shape[0]}], got {out_len}")
    if out_len == 0:
        if len(seed.bits) != 0:
            raise SeedLengthMismatch("out_len = 0 takes an empty seed")
        return np.zeros(0, dtype=np.uint8)
    T = seed.matrix(key.shape[0], out_len)
    return (T.astype(np.int64) @ key.astype(np.int64) % 2).astype(np.uint8)


class ToeplitzHasher(TransformerMixin, BaseEstimator):
    """Two-universal hashing as a transformer.

    ``fit`` draws (or accepts) the seed for rows of length ``in_len``;
    ``transform`` hashes each row of ``X`` down to ``out_len`` bits.
    """

    def __init__(self, out_len=1, seed=None, random_state=None):
        self.out_len = out_len
        self.seed = seed
        self.random_state = random_state

    def fit(self, X, y=None):
        X = np.atleast_2d(np.asarray(X))
        in_len = X.shape[1]
        if self.seed is not None:
            seed = self.seed if isinstance(self.seed, ToeplitzSeed) else ToeplitzSeed(tuple(self.seed))
        else:
            seed = ToeplitzSeed.random(in_len, self.out_len, self.random_state)
        self.matrix_ = seed.matrix(in_len, self.out_len)
        self.seed_ = seed
        self.n_features_in_ = in_len
        return self

    def transform(self, X):
        check_is_fitted(self, "matrix_")
        X = np.atleast_2d(np.asarray(X))
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected rows of {self.n_features_in_} bits, got {X.shape[1]}")
        return (X.astype(np.int64) @ self.matrix_.T.astype(np.int64) % 2).astype(np.uint8)


# -- report ---------------------------------------------------------------------

@dataclass(frozen=True)
class SecurityReport:
    e_e: float
    e_b: float
    q_net: float
    cs: float
    y1_lower: float
    p_loss_estimate: float
    raw_key_len: int
    final_key_len: int
    aborted: bool

    def __post_init__(self):
        if self.cs > self.q_net + 1e-12 or self.cs < 0:
            raise ValueError("cs must lie in [0, q_net]")
        if self.final_key_len > self.raw_key_len:
            raise ValueError("final_key_len cannot exceed raw_key_len")

    @classmethod
    def aborted_report(cls, e_e: float, q_net: float = 0.0, y1_lower: float = 0.0) -> "SecurityReport":
        return cls(e_e, 0.0, q_net, 0.0, y1_lower, 1.0 - y1_lower, 0, 0, True)

    def to_text(self) -> str:
        """Flat ``key=value`` lines, floats in shortest round-trip form."""
        return "\n".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}"
                         for k, v in asdict(self).items())


def compute_secure_rate(transcript: "SessionTranscript", report: SecurityReport) -> float:
    """Secure bits per pulse of a finished session; zero when ``cs`` is not positive."""
    if transcript.aborted or report.aborted:
        raise AbortedSession("the session aborted at the eavesdropping check")
    return report.cs if report.cs > 0 else 0.0
