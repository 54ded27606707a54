"""SNR-threshold rate adaptation and the short-term channel predictor."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from ..exceptions import EmptyHistory
from .decoder import ChannelQuality, DecoderSettings
from .distribution import RateLadder, default_ladder


@dataclass(frozen=True)
class CodingState:
    """Decoder settings plus the current position on the rate ladder."""

    settings: DecoderSettings = field(default_factory=DecoderSettings)
    rung: int = 0

    def __post_init__(self):
        if self.rung < 0:
            raise ValueError("rung must be non-negative")


def adapt_parameters(current: CodingState, cq_now: ChannelQuality, cq_pred: ChannelQuality,
                     ladder: RateLadder | None = None) -> CodingState:
    """Step one rung down when either SNR is below threshold, otherwise one up.

    The threshold is ``current.settings.snr_threshold``. The rung saturates at
    both ends of ``ladder``.

    Examples
    --------
    >>> s = CodingState(rung=1)
    >>> adapt_parameters(s, ChannelQuality(8.0), ChannelQuality(12.0)).rung
    0
    >>> adapt_parameters(s, ChannelQuality(12.0), ChannelQuality(12.0)).rung
    2
    """
    ladder = ladder or default_ladder()
    threshold = current.settings.snr_threshold
    if cq_now.snr_db < threshold or cq_pred.snr_db < threshold:
        step = -1
    else:
        step = 1
    return replace(current, rung=ladder.clamp(current.rung + step))


def predict_channel(history: Sequence[ChannelQuality | float], smoothing: float = 0.5) -> float:
    """Exponentially weighted moving average of ``snr_db``, newest sample weighted ``smoothing``.

    Entries may be :class:`ChannelQuality` objects or bare dB values. The
    average is seeded with the oldest sample.
    """
    if len(history) == 0:
        raise EmptyHistory("cannot predict from an empty history")
    if not 0.0 < smoothing <= 1.0:
        raise ValueError(f"smoothing must lie in (0, 1], got {smoothing}")
    values = [h.snr_db if isinstance(h, ChannelQuality) else float(h) for h in history]
    estimate = values[0]
    for v in values[1:]:
        estimate = smoothing * v + (1.0 - smoothing) * estimate
    return float(estimate)
