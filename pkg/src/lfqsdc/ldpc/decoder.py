"""Sum-product belief propagation with an adaptive iteration cap.

LLR sign convention: positive means bit 0 is more likely. An erasure is LLR 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .._validation import check_finite_vector
from .matrix import ParityCheckMatrix

# keeps atanh finite; caps a single check message near +-35
_TANH_CLIP = 1.0 - 1e-15
_TINY = 1e-300


@dataclass(frozen=True)
class ChannelQuality:
    snr_db: float
    qber: float = 0.0
    snr_predicted_db: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.qber <= 0.5:
            raise ValueError(f"qber must lie in [0, 0.5], got {self.qber}")


@dataclass(frozen=True)
class DecoderSettings:
    max_iterations: int = 50
    adaptive: bool = False
    snr_threshold: float = 10.0
    t_low_snr: int = 20
    t_high_snr: int = 10
    message_transform: str = "identity"
    damping: float = 0.75

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.t_high_snr < 1 or self.t_low_snr < self.t_high_snr:
            raise ValueError("need 1 <= t_high_snr <= t_low_snr")
        if self.message_transform not in MESSAGE_TRANSFORMS:
            raise ValueError(
                f"unknown message_transform {self.message_transform!r}; "
                f"choose from {sorted(MESSAGE_TRANSFORMS)}"
            )

    def iteration_cap(self, cq: ChannelQuality | None = None) -> int:
        """``t_high_snr`` above the SNR threshold, ``t_low_snr`` otherwise."""
        if not self.adaptive:
            return self.max_iterations
        if cq is None:
            raise ValueError("adaptive decoding needs a ChannelQuality")
        return self.t_high_snr if cq.snr_db > self.snr_threshold else self.t_low_snr


#: ``transform(new, old, iteration, settings) -> adjusted`` applied to the
#: check-to-variable messages before each variable-node update.
MessageTransform = Callable[[np.ndarray, np.ndarray, int, DecoderSettings], np.ndarray]


def _identity(new, old, iteration, settings):
    return new


def _damped(new, old, iteration, settings):
    if iteration == 1:
        return new
    beta = settings.damping
    return beta * new + (1.0 - beta) * old


MESSAGE_TRANSFORMS: dict[str, MessageTransform] = {
    "identity": _identity,
    "damped": _damped,
}


def register_message_transform(name: str, fn: MessageTransform) -> None:
    """Plug in a learned or hand-written message adjustment under ``name``."""
    MESSAGE_TRANSFORMS[name] = fn


class DecodeResult(NamedTuple):
    estimate: np.ndarray
    converged: bool
    iterations_used: int


class _Graph:
    """Edge-indexed Tanner graph; edges are sorted by check then variable."""

    def __init__(self, H: ParityCheckMatrix):
        self.m, self.n = H.m, H.n
        self.rows = H.rows
        self.cols = H.cols
        self.H = H

    def syndrome_ok(self, bits) -> bool:
        parity = np.bincount(self.rows, weights=bits[self.cols], minlength=self.m)
        return not (parity.astype(np.int64) % 2).any()


def _check_update(graph: _Graph, v2c: np.ndarray) -> np.ndarray:
    """``2 atanh(prod_{k != j} tanh(m_k / 2))`` for every edge, in log-magnitude form."""
    t = np.tanh(0.5 * v2c)
    neg = t < 0
    mag = np.maximum(np.abs(t), _TINY)
    log_mag = np.log(mag)
    row_log = np.bincount(graph.rows, weights=log_mag, minlength=graph.m)
    row_neg = np.bincount(graph.rows, weights=neg, minlength=graph.m)
    excl = np.exp(row_log[graph.rows] - log_mag)
    sign = np.where((row_neg[graph.rows] - neg) % 2 == 1, -1.0, 1.0)
    return 2.0 * np.arctanh(np.clip(sign * excl, -_TANH_CLIP, _TANH_CLIP))


def _run_bp(graph: _Graph, llrs: np.ndarray, cap: int, settings: DecoderSettings) -> DecodeResult:
    transform = MESSAGE_TRANSFORMS[settings.message_transform]
    hard = (llrs < 0).astype(np.uint8)
    if graph.syndrome_ok(hard):
        return DecodeResult(hard, True, 0)
    v2c = llrs[graph.cols].copy()
    c2v = np.zeros_like(v2c)
    for it in range(1, cap + 1):
        c2v = transform(_check_update(graph, v2c), c2v, it, settings)
        posterior = llrs + np.bincount(graph.cols, weights=c2v, minlength=graph.n)
        hard = (posterior < 0).astype(np.uint8)
        if graph.syndrome_ok(hard):
            return DecodeResult(hard, True, it)
        v2c = posterior[graph.cols] - c2v
    return DecodeResult(hard, False, cap)


def bp_decode(H: ParityCheckMatrix, llrs, settings: DecoderSettings | None = None,
              cq: ChannelQuality | None = None) -> DecodeResult:
    """Decode one word. Stops as soon as every parity check is satisfied."""
    settings = settings or DecoderSettings()
    if not isinstance(H, ParityCheckMatrix):
        H = ParityCheckMatrix.from_dense(H)
    llrs = check_finite_vector(llrs, "llrs", H.n)
    return _run_bp(_Graph(H), llrs, settings.iteration_cap(cq), settings)


def bsc_llr(p: float) -> float:
    """LLR magnitude ``ln((1-p)/p)`` of a binary symmetric channel."""
    if not 0.0 < p < 0.5:
        raise ValueError(f"crossover must lie in (0, 0.5), got {p}")
    return float(np.log((1.0 - p) / p))


def hard_to_llr(bits, p: float, erased=None) -> np.ndarray:
    """Channel LLRs for received hard bits; erased positions get 0."""
    bits = np.asarray(bits)
    llr = bsc_llr(p) * (1.0 - 2.0 * bits)
    if erased is not None:
        llr = np.where(erased, 0.0, llr)
    return llr


class BPDecoder(BaseEstimator):
    """Belief-propagation decoder with the usual estimator surface.

    ``fit`` takes the parity-check matrix (a :class:`ParityCheckMatrix` or a
    dense 0/1 array); ``predict`` maps rows of LLRs to hard codeword
    estimates. ``decode`` returns the full :class:`DecodeResult` for one word.

    Examples
    --------
    >>> import numpy as np
    >>> H = np.array([[1, 1, 0], [0, 1, 1]])
    >>> BPDecoder().fit(H).predict([[2.0, -0.5, 2.0]])
    array([[0, 0, 0]], dtype=uint8)
    """

    def __init__(self, max_iterations=50, adaptive=False, snr_threshold=10.0,
                 t_low_snr=20, t_high_snr=10, message_transform="identity", damping=0.75):
        self.max_iterations = max_iterations
        self.adaptive = adaptive
        self.snr_threshold = snr_threshold
        self.t_low_snr = t_low_snr
        self.t_high_snr = t_high_snr
        self.message_transform = message_transform
        self.damping = damping

    @property
    def settings(self) -> DecoderSettings:
        return DecoderSettings(**self.get_params())

    def fit(self, H, y=None):
        if not isinstance(H, ParityCheckMatrix):
            H = ParityCheckMatrix.from_dense(H)
        self.settings_ = self.settings
        self.graph_ = _Graph(H)
        self.n_features_in_ = H.n
        return self

    def decode(self, llrs, cq: ChannelQuality | None = None) -> DecodeResult:
        check_is_fitted(self, "graph_")
        llrs = check_finite_vector(llrs, "llrs", self.n_features_in_)
        return _run_bp(self.graph_, llrs, self.settings_.iteration_cap(cq), self.settings_)

    def predict(self, X, cq: ChannelQuality | None = None) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.vstack([self.decode(row, cq).estimate for row in X])
