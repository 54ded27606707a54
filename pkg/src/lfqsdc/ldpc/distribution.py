"""Edge-perspective degree distributions ``lambda(x)`` and ``rho(x)``."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

SUM_TOL = 1e-9


def _as_coeffs(coeffs) -> tuple[float, ...]:
    return tuple(float(c) for c in coeffs)


@dataclass(frozen=True)
class DegreeDistribution:
    """Coefficients are indexed from degree 2.

    ``lambda_coeffs[i]`` is the fraction of edges attached to variable nodes of
    degree ``i + 2``; likewise ``rho_coeffs`` for check nodes.
    """

    lambda_coeffs: tuple[float, ...]
    rho_coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lambda_coeffs", _as_coeffs(self.lambda_coeffs))
        object.__setattr__(self, "rho_coeffs", _as_coeffs(self.rho_coeffs))
        for name in ("lambda_coeffs", "rho_coeffs"):
            coeffs = getattr(self, name)
            if not coeffs:
                raise ValueError(f"{name} must not be empty")
            if min(coeffs) < 0:
                raise ValueError(f"{name} must be non-negative")
            if abs(sum(coeffs) - 1.0) > SUM_TOL:
                raise ValueError(f"{name} must sum to 1, got {sum(coeffs)!r}")

    @classmethod
    def regular(cls, dv: int, dc: int) -> "DegreeDistribution":
        if dv < 2 or dc < 2:
            raise ValueError("regular degrees must be >= 2")
        lam = [0.0] * (dv - 1)
        rho = [0.0] * (dc - 1)
        lam[-1] = 1.0
        rho[-1] = 1.0
        return cls(tuple(lam), tuple(rho))

    @classmethod
    def from_degrees(cls, lam: dict[int, float], rho: dict[int, float]) -> "DegreeDistribution":
        """Build from ``{degree: edge_fraction}`` mappings."""
        def expand(terms):
            out = [0.0] * (max(terms) - 1)
            for deg, frac in terms.items():
                if deg < 2:
                    raise ValueError("degrees must be >= 2")
                out[deg - 2] = frac
            return tuple(out)
        return cls(expand(lam), expand(rho))

    @property
    def max_variable_degree(self) -> int:
        return max(self.variable_degrees)

    @property
    def max_check_degree(self) -> int:
        return max(self.check_degrees)

    @property
    def variable_degrees(self) -> tuple[int, ...]:
        return tuple(i + 2 for i, c in enumerate(self.lambda_coeffs) if c > 0)

    @property
    def check_degrees(self) -> tuple[int, ...]:
        return tuple(i + 2 for i, c in enumerate(self.rho_coeffs) if c > 0)

    def _integral(self, coeffs) -> float:
        return sum(c / (i + 2) for i, c in enumerate(coeffs))

    def variable_node_fractions(self) -> dict[int, float]:
        """Node-perspective fractions ``L_i``."""
        total = self._integral(self.lambda_coeffs)
        return {i + 2: (c / (i + 2)) / total for i, c in enumerate(self.lambda_coeffs) if c > 0}

    def check_node_fractions(self) -> dict[int, float]:
        total = self._integral(self.rho_coeffs)
        return {i + 2: (c / (i + 2)) / total for i, c in enumerate(self.rho_coeffs) if c > 0}

    def __str__(self):
        def poly(coeffs):
            terms = [f"{c:g}x^{i + 1}" for i, c in enumerate(coeffs) if c > 0]
            return " + ".join(terms)
        return f"lambda(x) = {poly(self.lambda_coeffs)}; rho(x) = {poly(self.rho_coeffs)}"


def design_rate(d: DegreeDistribution) -> float:
    """``1 - (sum rho_i/i) / (sum lambda_i/i)``."""
    return 1.0 - d._integral(d.rho_coeffs) / d._integral(d.lambda_coeffs)


def _grid_pairs(max_degree: int, step: float):
    """Distributions with one or two nonzero terms on a coefficient grid."""
    n_steps = int(round(1.0 / step))
    for deg in range(2, max_degree + 1):
        yield {deg: 1.0}
    for lo, hi in combinations(range(2, max_degree + 1), 2):
        for k in range(1, n_steps):
            frac = round(k * step, 10)
            yield {lo: frac, hi: round(1.0 - frac, 10)}


def candidate_family(max_dv: int = 6, max_dc: int = 12, step: float = 0.1) -> list[DegreeDistribution]:
    """The optimizer's default search space.

    ``lambda`` ranges over every distribution with at most two nonzero terms,
    degrees up to ``max_dv``, on a ``step`` grid. ``rho`` is check-concentrated:
    a single degree or two consecutive degrees on the same grid, degrees up to
    ``max_dc``. Only candidates with design rate in (0, 1) are kept. Order is
    deterministic.
    """
    lambdas = list(_grid_pairs(max_dv, step))
    n_steps = int(round(1.0 / step))
    rhos = [{d: 1.0} for d in range(2, max_dc + 1)]
    for d in range(2, max_dc):
        for k in range(1, n_steps):
            frac = round(k * step, 10)
            rhos.append({d: frac, d + 1: round(1.0 - frac, 10)})
    family = []
    for lam in lambdas:
        for rho in rhos:
            dist = DegreeDistribution.from_degrees(lam, rho)
            if 0.0 < design_rate(dist) < 1.0:
                family.append(dist)
    return family


class RateLadder:
    """Degree distributions ordered by strictly increasing design rate.

    Rung 0 carries the most redundancy.
    """

    def __init__(self, rungs):
        rungs = list(rungs)
        if not rungs:
            raise ValueError("a rate ladder needs at least one rung")
        rates = [design_rate(d) for d in rungs]
        if any(not 0.0 < r < 1.0 for r in rates):
            raise ValueError(f"ladder rates must lie in (0, 1), got {rates}")
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValueError(f"ladder rates must be strictly increasing, got {rates}")
        self.rungs = tuple(rungs)
        self.rates = tuple(rates)

    def __len__(self):
        return len(self.rungs)

    def __getitem__(self, idx) -> DegreeDistribution:
        return self.rungs[idx]

    def __iter__(self):
        return iter(self.rungs)

    def clamp(self, idx: int) -> int:
        return int(np.clip(idx, 0, len(self.rungs) - 1))

    def __repr__(self):
        return f"RateLadder(rates={[round(r, 4) for r in self.rates]})"


def default_ladder() -> RateLadder:
    """Regular rungs (3,4), (3,6), (3,12): rates 1/4, 1/2, 3/4."""
    return RateLadder([
        DegreeDistribution.regular(3, 4),
        DegreeDistribution.regular(3, 6),
        DegreeDistribution.regular(3, 12),
    ])
