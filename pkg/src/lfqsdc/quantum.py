"""Single-qubit physics: preparation, I/U encoding, Born-rule measurement, noise.

Every operation exists in two forms. The scalar form works on one
:class:`PureQubit` and is what the protocol description talks about. The
``*_states`` form works on an ``(N, 2)`` complex array of amplitudes and is
what the session simulator uses; the scalar functions are thin wrappers over
the array kernels so both paths share one implementation.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._validation import check_probability, check_rng

SQRT_HALF = 1.0 / np.sqrt(2.0)
NORM_TOL = 1e-12
PHASE_TOL = 1e-10

#: Encoding unitary for a "1" bit. ``iY`` flips eigenstates of both Z and X.
U_ENCODE = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)


class Basis(enum.IntEnum):
    """Measurement basis; the integer value doubles as the array encoding."""

    Z = 0
    X = 1


@dataclass(frozen=True)
class PureQubit:
    amp0: complex
    amp1: complex

    def __post_init__(self):
        norm = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"qubit is not normalized (|a0|^2+|a1|^2 = {norm!r})")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amp0, self.amp1], dtype=complex)

    @classmethod
    def from_vector(cls, vec) -> "PureQubit":
        return cls(complex(vec[0]), complex(vec[1]))

    def overlap(self, other: "PureQubit") -> float:
        """Return ``|<self|other>|``."""
        return float(abs(np.vdot(self.vector, other.vector)))

    def equivalent(self, other: "PureQubit") -> bool:
        """Equality up to global phase."""
        return self.overlap(other) >= 1.0 - PHASE_TOL


ZERO = PureQubit(1.0 + 0j, 0j)
ONE = PureQubit(0j, 1.0 + 0j)
PLUS = PureQubit(SQRT_HALF + 0j, SQRT_HALF + 0j)
MINUS = PureQubit(SQRT_HALF + 0j, -SQRT_HALF + 0j)


@dataclass(frozen=True)
class PrepParams:
    """Preparation selectors: basis ``a0``, state ``a1``, phase swap ``a2``."""

    a0: int
    a1: int
    a2: int

    def __post_init__(self):
        for name in ("a0", "a1", "a2"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be a bit, got {getattr(self, name)!r}")

    @property
    def basis(self) -> Basis:
        return Basis(self.a0)

    @property
    def expected_bit(self) -> int:
        """Outcome a measurement in the preparation basis yields."""
        return expected_bits(self.a0, self.a1, self.a2).item()


@dataclass(frozen=True)
class NoiseSpec:
    depolarizing_p: float = 0.0
    loss_p: float = 0.0
    dephasing_p: float = 0.0

    def __post_init__(self):
        for name in ("depolarizing_p", "loss_p", "dephasing_p"):
            check_probability(getattr(self, name), name)

    @property
    def is_clean(self) -> bool:
        return self.depolarizing_p == 0 and self.loss_p == 0 and self.dephasing_p == 0


class _Lost:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "LOST"

    def __reduce__(self):
        return (_Lost, ())


#: Sentinel returned when a pulse does not survive a traversal.
LOST = _Lost()


# -- array kernels ----------------------------------------------------------

def expected_bits(a0, a1, a2) -> np.ndarray:
    """Outcome of measuring ``prepare(a0, a1, a2)`` in its own basis."""
    a0 = np.asarray(a0, dtype=np.uint8)
    a1 = np.asarray(a1, dtype=np.uint8)
    a2 = np.asarray(a2, dtype=np.uint8)
    return a1 ^ (a0 & a2)


def prepare_states(a0, a1, a2) -> np.ndarray:
    a0 = np.atleast_1d(np.asarray(a0, dtype=np.uint8))
    bit = np.atleast_1d(expected_bits(a0, a1, a2))
    states = np.empty((a0.shape[0], 2), dtype=complex)
    z = a0 == 0
    states[z, 0] = 1.0 - bit[z]
    states[z, 1] = bit[z]
    x = ~z
    states[x, 0] = SQRT_HALF
    states[x, 1] = SQRT_HALF * (1.0 - 2.0 * bit[x])
    return states


def basis_states(bases, bits) -> np.ndarray:
    """Eigenstates: ``|bit>`` for Z, ``|+>``/``|->`` for X."""
    bases = np.atleast_1d(np.asarray(bases, dtype=np.uint8))
    bits = np.atleast_1d(np.asarray(bits, dtype=np.uint8))
    return prepare_states(bases, bits, np.zeros_like(bits))


def encode_states(states: np.ndarray, bits) -> np.ndarray:
    """Apply ``U`` to rows where ``bits`` is 1 and identity elsewhere."""
    bits = np.atleast_1d(np.asarray(bits, dtype=bool))
    out = states.copy()
    flip = states[bits]
    out[bits, 0] = flip[:, 1]
    out[bits, 1] = -flip[:, 0]
    return out


def outcome_zero_probability(states: np.ndarray, bases) -> np.ndarray:
    bases = np.atleast_1d(np.asarray(bases, dtype=np.uint8))
    pz = np.abs(states[:, 0]) ** 2
    px = 0.5 * np.abs(states[:, 0] + states[:, 1]) ** 2
    return np.where(bases == Basis.Z, pz, px)


def measure_states(states: np.ndarray, bases, rng) -> np.ndarray:
    rng = check_rng(rng)
    p0 = outcome_zero_probability(states, bases)
    return (rng.random(states.shape[0]) >= p0).astype(np.uint8)


def _apply_pauli(states: np.ndarray, which: np.ndarray) -> np.ndarray:
    """``which`` codes: 0 none, 1 X, 2 Y, 3 Z."""
    out = states.copy()
    a, b = states[:, 0], states[:, 1]
    x = which == 1
    out[x, 0], out[x, 1] = b[x], a[x]
    y = which == 2
    out[y, 0], out[y, 1] = -1j * b[y], 1j * a[y]
    z = which == 3
    out[z, 1] = -b[z]
    return out


def apply_noise_states(states: np.ndarray, noise: NoiseSpec, rng, survival=None):
    """Push a batch through one traversal of the channel.

    Returns ``(states, lost)`` where ``lost`` is a boolean mask. ``survival``
    optionally overrides ``1 - noise.loss_p`` per pulse (used for fading).
    Four uniform arrays are always drawn, so the random stream advances the
    same way whatever the parameter values are.
    """
    rng = check_rng(rng)
    n = states.shape[0]
    u_loss = rng.random(n)
    u_dep = rng.random(n)
    pauli = rng.integers(1, 4, size=n)
    u_deph = rng.random(n)

    keep = 1.0 - noise.loss_p if survival is None else np.asarray(survival, dtype=float)
    lost = u_loss >= keep
    depolarized = u_dep < 0.75 * noise.depolarizing_p
    dephased = ~depolarized & (u_deph < noise.dephasing_p)
    which = np.where(depolarized, pauli, np.where(dephased, 3, 0))
    return _apply_pauli(states, which), lost


# -- scalar API ---------------------------------------------------------------

def prepare(p: PrepParams) -> PureQubit:
    return PureQubit.from_vector(prepare_states(p.a0, p.a1, p.a2)[0])


def apply_encoding(s: PureQubit, bit: int) -> PureQubit:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return PureQubit.from_vector(encode_states(s.vector[None, :], [bit])[0])


def measure(s: PureQubit, basis: Basis, rng) -> int:
    return int(measure_states(s.vector[None, :], [int(basis)], rng)[0])


def apply_noise(s: PureQubit, noise: NoiseSpec, rng):
    """Return the noisy qubit, or :data:`LOST`."""
    states, lost = apply_noise_states(s.vector[None, :], noise, rng)
    if lost[0]:
        return LOST
    return PureQubit.from_vector(states[0])
