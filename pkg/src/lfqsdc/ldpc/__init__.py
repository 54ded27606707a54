"""LDPC codes for the message channel."""
from __future__ import annotations

from .adaptation import CodingState, adapt_parameters, predict_channel
from .decoder import BPDecoder, ChannelQuality, DecodeResult, DecoderSettings, bp_decode
from .distribution import DegreeDistribution, RateLadder, candidate_family, default_ladder, design_rate
from .matrix import ParityCheckMatrix
from .optimize import DegreeDistributionSearch, optimize_degree_distribution
from .peg import construct_peg

__all__ = [
    "BPDecoder", "ChannelQuality", "CodingState", "DecodeResult", "DecoderSettings", "DegreeDistribution",
    "DegreeDistributionSearch", "ParityCheckMatrix", "RateLadder", "adapt_parameters", "bp_decode",
    "candidate_family", "construct_peg", "default_ladder", "design_rate", "optimize_degree_distribution",
    "predict_channel",
]
