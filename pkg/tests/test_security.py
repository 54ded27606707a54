from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from lfqsdc.exceptions import (AbortedSession, DegenerateIntensities, EmptyRecords,
                               SeedLengthMismatch)
from lfqsdc.information import binary_entropy, i_bsc
from lfqsdc.protocol import EveModel, SessionConfig, run_session
from lfqsdc.quantum import NoiseSpec
from lfqsdc.security import (DecoyConfig, DetectionStats, SecurityReport, ToeplitzHasher,
                             ToeplitzSeed, compute_secure_rate, decoy_bounds, estimate_qber,
                             privacy_amplify, qber_from_counts, secrecy_capacity,
                             simulate_decoy_source, true_single_photon_yield)

#: Wilson 95% interval for 50 errors in 1000, frozen from a 40-digit mpmath evaluation.
WILSON_50_1000 = (0.038130262392748808, 0.065313820244250804)
#: 1 - H2(0.0049) - H2(0.0098), frozen from mpmath.
ENTROPY_BUDGET = 0.8758860991803097
H2_011 = 0.49991595816452800

probs = st.floats(0.0, 1.0, allow_nan=False)
half = st.floats(0.0, 0.5, allow_nan=False)
bitvec = st.lists(st.integers(0, 1), min_size=1, max_size=64)


def wilson_by_hand(k: int, n: int, conf: float = 0.95) -> tuple[float, float]:
    z = norm.ppf(0.5 + conf / 2)
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half_width = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return centre - half_width, centre + half_width


class TestEntropy:
    def test_endpoints(self):
        assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0

    def test_half(self):
        assert binary_entropy(0.5) == pytest.approx(1.0, abs=1e-15)

    def test_oracle(self):
        assert binary_entropy(0.11) == pytest.approx(H2_011, rel=1e-13)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            binary_entropy(1.2)

    def test_array(self):
        np.testing.assert_allclose(i_bsc(np.array([0.0, 0.5])), [1.0, 0.0], atol=1e-15)

    @given(probs)
    def test_symmetric(self, p):
        assert binary_entropy(p) == pytest.approx(binary_entropy(1 - p), abs=1e-12)


class TestQber:
    def test_no_errors(self):
        est = estimate_qber([(0, 0)] * 100)
        assert est.e == 0.0 and est.ci_low == 0.0

    def test_quarter(self):
        records = [(1, 0)] * 25 + [(1, 1)] * 75
        assert estimate_qber(records).e == 0.25

    def test_wilson_oracle(self):
        est = qber_from_counts(50, 1000)
        assert (est.ci_low, est.ci_high) == pytest.approx(WILSON_50_1000, abs=1e-9)
        assert (est.ci_low, est.ci_high) == pytest.approx(wilson_by_hand(50, 1000), abs=1e-9)

    def test_array_records(self):
        arr = np.array([[0, 1], [1, 1], [0, 0], [1, 0]])
        assert estimate_qber(arr).e == 0.5

    def test_empty(self):
        with pytest.raises(EmptyRecords):
            estimate_qber([])

    @given(st.integers(1, 2000), st.data())
    def test_interval_contains_estimate(self, n, data):
        k = data.draw(st.integers(0, n))
        est = qber_from_counts(k, n)
        assert est.ci_low <= est.e <= est.ci_high


class TestDecoy:
    def test_zero_gains(self):
        assert decoy_bounds(DetectionStats(0.0, 0.0), DecoyConfig()).y1_lower == 0.0

    def test_vacuum_decoy_is_degenerate(self):
        with pytest.raises(DegenerateIntensities):
            decoy_bounds(DetectionStats(0.1, 0.0), DecoyConfig(mu=0.5, nu=0.0))

    def test_intensity_order_enforced(self):
        with pytest.raises(ValueError):
            DecoyConfig(mu=0.1, nu=0.2)

    def test_exact_gains_give_valid_bound(self):
        """With the exact Poisson gains the bound sits just below ``eta``."""
        mu, nu, eta = 0.5, 0.15, 0.1
        stats = DetectionStats(1 - math.exp(-eta * mu), 1 - math.exp(-eta * nu))
        y1 = decoy_bounds(stats, DecoyConfig(mu, nu)).y1_lower
        assert 0.9 * eta <= y1 <= eta

    @pytest.mark.parametrize("y0", [0.0, 1.0])
    def test_vacuum_class_reports_background(self, y0):
        cfg = DecoyConfig(include_vacuum=True, pulses_per_class=10_000)
        assert simulate_decoy_source(0.3, cfg, np.random.default_rng(0), y0=y0).y0 == y0

    def test_vacuum_class_statistics(self):
        n = 200_000
        cfg = DecoyConfig(include_vacuum=True, pulses_per_class=n)
        y0 = simulate_decoy_source(0.3, cfg, np.random.default_rng(1), y0=0.01).y0
        assert abs(y0 - 0.01) <= 3 * math.sqrt(0.01 * 0.99 / n)

    def test_monte_carlo_eta_tenth(self):
        cfg = DecoyConfig(pulses_per_class=2_000_000)
        bound = decoy_bounds(simulate_decoy_source(0.1, cfg, np.random.default_rng(2)), cfg)
        assert bound.y1_lower <= true_single_photon_yield(0.1) + 0.005
        assert bound.y1_lower >= 0.09 - 0.005
        assert bound.p_loss_estimate == pytest.approx(1 - bound.y1_lower)


class TestSecrecyCapacity:
    def test_perfect(self):
        assert secrecy_capacity(1.0, 0.0, 0.0) == 1.0

    @given(probs, half)
    def test_maximal_forward_error(self, q, e_b):
        assert secrecy_capacity(q, 0.5, e_b) == 0.0

    def test_eleven_percent(self):
        assert secrecy_capacity(1.0, 0.11, 0.11) == pytest.approx(0.0, abs=2e-4)
        assert 1 - 2 * H2_011 == pytest.approx(1.68e-4, abs=1e-6)

    def test_entropy_oracle(self):
        assert secrecy_capacity(1.0, 0.0049, 0.0098) == pytest.approx(ENTROPY_BUDGET, rel=1e-13)

    @given(probs, half, half, half)
    def test_monotone_in_errors(self, q, a, b, c):
        lo, hi = sorted((a, b))
        assert secrecy_capacity(q, lo, c) >= secrecy_capacity(q, hi, c)
        assert secrecy_capacity(q, c, lo) >= secrecy_capacity(q, c, hi)

    @given(probs, half, half)
    def test_linear_in_gain(self, q, e_f, e_b):
        assert secrecy_capacity(q, e_f, e_b) == pytest.approx(q * secrecy_capacity(1.0, e_f, e_b), abs=1e-12)

    def test_error_above_half_rejected(self):
        with pytest.raises(ValueError):
            secrecy_capacity(1.0, 0.6, 0.0)


class TestToeplitz:
    def test_worked_example(self):
        """Seed 10110 and ``T[i, j] = seed[i - j + 3]`` give rows 1101 and 0110."""
        seed = ToeplitzSeed((1, 0, 1, 1, 0))
        np.testing.assert_array_equal(seed.matrix(4, 2), [[1, 1, 0, 1], [0, 1, 1, 0]])
        np.testing.assert_array_equal(privacy_amplify([1, 0, 1, 0], seed, 2), [1, 1])

    def test_empty_output(self):
        assert privacy_amplify([1, 0, 1], ToeplitzSeed(()), 0).size == 0

    def test_seed_length_checked(self):
        with pytest.raises(SeedLengthMismatch):
            privacy_amplify([1, 0, 1, 0], ToeplitzSeed((1, 0, 1)), 2)

    def test_out_len_bounded(self):
        with pytest.raises(ValueError):
            privacy_amplify([1, 0], ToeplitzSeed((1, 0, 1, 1)), 3)

    def test_identity_seed(self):
        n = 16
        bits = [0] * (2 * n - 1)
        bits[n - 1] = 1
        key = np.random.default_rng(0).integers(0, 2, n)
        np.testing.assert_array_equal(privacy_amplify(key, ToeplitzSeed(tuple(bits)), n), key)

    def test_constant_along_diagonals(self):
        T = ToeplitzSeed.random(9, 5, np.random.default_rng(3)).matrix(9, 5)
        assert all(T[i, j] == T[i + 1, j + 1] for i in range(4) for j in range(8))

    def test_linearity_on_random_pairs(self):
        rng = np.random.default_rng(4)
        seed = ToeplitzSeed.random(64, 32, rng)
        for _ in range(1000):
            a, b = rng.integers(0, 2, 64), rng.integers(0, 2, 64)
            np.testing.assert_array_equal(privacy_amplify(a ^ b, seed, 32),
                                          privacy_amplify(a, seed, 32) ^ privacy_amplify(b, seed, 32))

    def test_output_bias(self):
        rng = np.random.default_rng(5)
        seed = ToeplitzSeed.random(128, 1, rng)
        keys = rng.integers(0, 2, (10_000, 128))
        ones = np.mean([privacy_amplify(k, seed, 1)[0] for k in keys])
        assert abs(ones - 0.5) <= 0.015

    @given(bitvec, bitvec)
    def test_hypothesis_linearity(self, a, b):
        n = min(len(a), len(b))
        a, b = np.array(a[:n]), np.array(b[:n])
        seed = ToeplitzSeed.random(n, max(1, n // 2), np.random.default_rng(n))
        out = max(1, n // 2)
        np.testing.assert_array_equal(privacy_amplify(a ^ b, seed, out),
                                      privacy_amplify(a, seed, out) ^ privacy_amplify(b, seed, out))


class TestToeplitzHasher:
    def test_matches_function(self):
        X = np.random.default_rng(6).integers(0, 2, (20, 12))
        hasher = ToeplitzHasher(out_len=5, random_state=7).fit(X)
        expected = np.array([privacy_amplify(row, hasher.seed_, 5) for row in X])
        np.testing.assert_array_equal(hasher.transform(X), expected)

    def test_given_seed(self):
        hasher = ToeplitzHasher(out_len=2, seed=(1, 0, 1, 1, 0)).fit(np.zeros((1, 4)))
        np.testing.assert_array_equal(hasher.transform([[1, 0, 1, 0]]), [[1, 1]])

    def test_reproducible(self):
        X = np.ones((3, 10), dtype=int)
        a = ToeplitzHasher(out_len=4, random_state=1).fit_transform(X)
        b = ToeplitzHasher(out_len=4, random_state=1).fit_transform(X)
        np.testing.assert_array_equal(a, b)

    def test_width_checked(self):
        hasher = ToeplitzHasher(out_len=2, random_state=0).fit(np.zeros((1, 6)))
        with pytest.raises(ValueError):
            hasher.transform(np.zeros((1, 5)))

    def test_clone_and_params(self):
        from sklearn.base import clone
        hasher = clone(ToeplitzHasher(out_len=3, random_state=2))
        assert hasher.get_params() == {"out_len": 3, "seed": None, "random_state": 2}


class TestReport:
    def test_cs_bounded_by_gain(self):
        with pytest.raises(ValueError):
            SecurityReport(0.0, 0.0, 0.5, 0.6, 1.0, 0.0, 10, 5, False)

    def test_key_lengths(self):
        with pytest.raises(ValueError):
            SecurityReport(0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 10, 11, False)

    def test_text_round_trips_floats(self):
        report = SecurityReport(0.0049, 0.01, 1.0, 0.87, 1.0, 0.0, 1024, 890, False)
        fields = dict(line.split("=", 1) for line in report.to_text().splitlines())
        assert float(fields["e_e"]) == 0.0049 and fields["aborted"] == "False"
        assert int(fields["final_key_len"]) == 890

    def test_aborted_report(self):
        r = SecurityReport.aborted_report(0.25)
        assert r.aborted and r.cs == 0.0 and r.final_key_len == 0


class TestSecureRate:
    def test_noiseless_lossless(self, code_3_6_96):
        cfg = SessionConfig(n_pulses=2000, seed=1)
        message = np.random.default_rng(0).integers(0, 2, code_3_6_96.k)
        transcript, report = run_session(cfg, code_3_6_96, message)
        assert compute_secure_rate(transcript, report) == 1.0 == report.q_net

    def test_aborted(self, code_3_6_96):
        cfg = SessionConfig(n_pulses=5000, seed=2, eve=EveModel.intercept_resend())
        transcript, report = run_session(cfg, code_3_6_96, np.zeros(code_3_6_96.k, dtype=np.uint8))
        with pytest.raises(AbortedSession):
            compute_secure_rate(transcript, report)

    def test_depolarizing_both_legs(self, code_3_6_1024):
        noise = NoiseSpec(depolarizing_p=0.0098)
        cfg = SessionConfig(n_pulses=20_000, forward_noise=noise, backward_noise=noise, seed=3)
        message = np.random.default_rng(1).integers(0, 2, code_3_6_1024.k)
        transcript, report = run_session(cfg, code_3_6_1024, message)
        rate = compute_secure_rate(transcript, report)
        assert rate == pytest.approx(1.0 - binary_entropy(report.e_e) - binary_entropy(report.e_b), abs=1e-12)
        # e_e and e_b fluctuate over ~4000 and 1024 bits; 0.06 is above 3 sigma of the rate
        assert rate == pytest.approx(ENTROPY_BUDGET, abs=0.06)
        assert report.final_key_len == math.floor(rate * code_3_6_1024.n) == transcript.secure_key.size
