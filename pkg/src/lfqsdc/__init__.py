"""Simulator for loss-tolerant two-way quantum secure direct communication.

Subpackages: :mod:`lfqsdc.ldpc` (codes, decoding, rate adaptation and
degree-distribution search) and :mod:`lfqsdc.harness` (configuration, sweeps,
reference curves, output and the command line).
"""
from __future__ import annotations

from .channel import AdaptiveOpticsModel, AOMode, AtmosphereParams, LinkBudget, build_link_budget
from .exceptions import LFQSDCError
from .pat import ControllerConfig, JitterProcess, run_tracking_loop
from .protocol import EveModel, SessionConfig, SessionTranscript, run_session
from .quantum import Basis, NoiseSpec, PrepParams, PureQubit
from .security import (DecoyConfig, SecurityReport, ToeplitzHasher, compute_secure_rate,
                       privacy_amplify, secrecy_capacity)

__version__ = "0.1.0"

__all__ = [
    "AOMode", "AdaptiveOpticsModel", "AtmosphereParams", "Basis", "ControllerConfig", "DecoyConfig",
    "EveModel", "JitterProcess", "LFQSDCError", "LinkBudget", "NoiseSpec", "PrepParams", "PureQubit",
    "SecurityReport", "SessionConfig", "SessionTranscript", "ToeplitzHasher", "build_link_budget",
    "compute_secure_rate", "privacy_amplify", "run_session", "run_tracking_loop", "secrecy_capacity",
]
