"""Degree-distribution search by Monte-Carlo decoding over a BSC.

The objective for a candidate ``d`` is::

    score(d) = I_BSC(p_hat) - penalty_qber * p_hat - penalty_rate * |R(d) - target_rate|

where ``p_hat`` is the post-decoding bit error rate of a PEG code built from
``d``. Since ``I_BSC <= 1`` and ``p_hat >= 0``, ``1 - penalty_rate * |R - t|``
bounds the score from above without any simulation. Candidates are visited in
order of decreasing bound and skipped once their bound falls below the best
score seen, which returns exactly the exhaustive argmax at a fraction of the
cost.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator

from ..exceptions import InfeasibleDistribution
from ..information import i_bsc
from .decoder import BPDecoder, hard_to_llr
from .distribution import DegreeDistribution, candidate_family, design_rate
from .peg import construct_peg


@dataclass(frozen=True)
class CandidateResult:
    index: int
    distribution: DegreeDistribution
    rate: float
    ber: float
    score: float


def candidate_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Per-candidate stream, independent of evaluation order."""
    return np.random.SeedSequence([int(seed), int(index)])


def simulate_ber(d: DegreeDistribution, qber: float, trials: int, n: int, seed,
                 max_iterations: int = 50) -> float:
    """Post-decoding BER of a PEG code from ``d`` on a BSC, all-zero codeword.

    BP on a BSC is symmetric, so the all-zero word is representative of any
    codeword. Raises :class:`InfeasibleDistribution` if no code can be built.
    """
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    code_seed, noise_seed = seed.spawn(2)
    H = construct_peg(d, n, np.random.default_rng(code_seed))
    decoder = BPDecoder(max_iterations=max_iterations).fit(H)
    rng = np.random.default_rng(noise_seed)
    errors = 0
    for _ in range(trials):
        received = (rng.random(n) < qber).astype(np.uint8)
        errors += int(decoder.decode(hard_to_llr(received, qber)).estimate.sum())
    return errors / (trials * n)


def score_distribution(d: DegreeDistribution, ber: float, penalty_qber: float = 1.0,
                       penalty_rate: float = 1.0, target_rate: float = 0.5) -> float:
    return float(i_bsc(ber) - penalty_qber * ber - penalty_rate * abs(design_rate(d) - target_rate))


def _evaluate(index, d, target_qber, trials, n, seed, penalty_qber, penalty_rate, target_rate):
    try:
        ber = simulate_ber(d, target_qber, trials, n, candidate_seed(seed, index))
    except InfeasibleDistribution:
        return None
    score = score_distribution(d, ber, penalty_qber, penalty_rate, target_rate)
    return CandidateResult(index, d, design_rate(d), ber, score)


def optimize_degree_distribution(family: Sequence[DegreeDistribution] | None = None,
                                 target_qber: float = 0.02, penalty_qber: float = 1.0,
                                 penalty_rate: float = 1.0, trials: int = 200, seed: int = 0,
                                 target_rate: float = 0.5, n: int = 1024, n_jobs: int = 1,
                                 return_evaluated: bool = False):
    """Return ``(best_distribution, best_score)`` over ``family``.

    Parameters
    ----------
    family : sequence of DegreeDistribution, optional
        Defaults to :func:`candidate_family`.
    target_qber : float
        BSC crossover probability used for the Monte-Carlo BER.
    trials : int
        Codewords simulated per candidate.
    n : int
        Block length of the PEG code built for each candidate.
    n_jobs : int
        Candidates evaluated concurrently per batch. The result does not
        depend on this value.
    return_evaluated : bool
        Also return the list of :class:`CandidateResult` actually simulated.
    """
    if family is None:
        family = candidate_family()
    family = list(family)
    if not family:
        raise ValueError("family must not be empty")
    if not 0.0 < target_qber < 0.5:
        raise ValueError(f"target_qber must lie in (0, 0.5), got {target_qber}")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    bounds = np.array([1.0 - penalty_rate * abs(design_rate(d) - target_rate) for d in family])
    order = np.lexsort((np.arange(len(family)), -bounds))
    best: CandidateResult | None = None
    evaluated: list[CandidateResult] = []
    batch = max(1, int(n_jobs))
    pos = 0
    with Parallel(n_jobs=n_jobs) as parallel:
        while pos < len(order):
            if best is not None and bounds[order[pos]] < best.score:
                break
            idx = [int(i) for i in order[pos:pos + batch]
                   if best is None or bounds[i] >= best.score]
            pos += batch
            results = parallel(
                delayed(_evaluate)(i, family[i], target_qber, trials, n, seed,
                                   penalty_qber, penalty_rate, target_rate)
                for i in idx
            )
            for r in results:
                if r is None:
                    continue
                evaluated.append(r)
                if best is None or r.score > best.score or (r.score == best.score and r.index < best.index):
                    best = r
    if best is None:
        raise InfeasibleDistribution("no candidate in the family could be constructed")
    if return_evaluated:
        return best.distribution, best.score, evaluated
    return best.distribution, best.score


class DegreeDistributionSearch(BaseEstimator):
    """Estimator wrapper: ``fit(family)`` runs the search.

    After fitting, ``best_distribution_``, ``best_score_`` and
    ``evaluated_`` (the simulated candidates) are available.
    """

    def __init__(self, target_qber=0.02, penalty_qber=1.0, penalty_rate=1.0, trials=200,
                 seed=0, target_rate=0.5, n=1024, n_jobs=1):
        self.target_qber = target_qber
        self.penalty_qber = penalty_qber
        self.penalty_rate = penalty_rate
        self.trials = trials
        self.seed = seed
        self.target_rate = target_rate
        self.n = n
        self.n_jobs = n_jobs

    def fit(self, family=None, y=None):
        d, score, evaluated = optimize_degree_distribution(
            family, return_evaluated=True, **self.get_params())
        self.best_distribution_ = d
        self.best_score_ = score
        self.evaluated_ = evaluated
        return self
