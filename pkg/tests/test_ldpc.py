from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import sparse
from sklearn.base import clone

from lfqsdc.exceptions import EmptyHistory, InfeasibleDistribution, ParseError
from lfqsdc.information import i_bsc
from lfqsdc.ldpc import (BPDecoder, ChannelQuality, CodingState, DecoderSettings, DegreeDistribution,
                         DegreeDistributionSearch, ParityCheckMatrix, RateLadder, adapt_parameters,
                         bp_decode, candidate_family, construct_peg, default_ladder, design_rate,
                         optimize_degree_distribution, predict_channel)
from lfqsdc.ldpc.decoder import MESSAGE_TRANSFORMS, bsc_llr, hard_to_llr, register_message_transform
from lfqsdc.ldpc.optimize import score_distribution, simulate_ber
from lfqsdc.ldpc.peg import degree_sequences
from smallcodes import HAMMING_7_4, codewords, full_dual, ml_decode


class TestDegreeDistribution:
    def test_regular_3_6_rate(self):
        assert design_rate(DegreeDistribution.regular(3, 6)) == pytest.approx(0.5)

    def test_symmetric_rate_zero(self):
        assert design_rate(DegreeDistribution.regular(3, 3)) == pytest.approx(0.0)

    def test_x_over_x_cubed(self):
        d = DegreeDistribution.from_degrees({2: 1.0}, {4: 1.0})
        assert design_rate(d) == pytest.approx(0.5)

    @pytest.mark.parametrize("lam,rho", [((0.5, 0.6), (1.0,)), ((1.0,), (-0.1, 1.1)), ((), (1.0,))])
    def test_invalid(self, lam, rho):
        with pytest.raises(ValueError):
            DegreeDistribution(lam, rho)

    def test_node_fractions_of_mixed_distribution(self):
        d = DegreeDistribution.from_degrees({2: 0.5, 3: 0.5}, {6: 1.0})
        frac = d.variable_node_fractions()
        # L_i proportional to lambda_i / i
        assert frac[2] == pytest.approx((0.5 / 2) / (0.5 / 2 + 0.5 / 3))

    def test_family_has_rates_in_unit_interval(self):
        fam = candidate_family()
        assert fam and all(0 < design_rate(d) < 1 for d in fam)
        assert all(d.max_variable_degree <= 6 and d.max_check_degree <= 12 for d in fam)
        assert all(sum(c > 0 for c in d.lambda_coeffs) <= 2 for d in fam)

    def test_default_ladder_strictly_ordered(self):
        rates = default_ladder().rates
        assert rates == pytest.approx((0.25, 0.5, 0.75))

    def test_ladder_rejects_unordered(self):
        with pytest.raises(ValueError):
            RateLadder([DegreeDistribution.regular(3, 6), DegreeDistribution.regular(3, 4)])


class TestPEG:
    def test_regular_3_6_n16(self):
        H = construct_peg(DegreeDistribution.regular(3, 6), 16, 1)
        assert H.m == 8
        assert set(H.column_degrees) == {3} and set(H.row_degrees) == {6}

    def test_regular_2_4_n8(self):
        H = construct_peg(DegreeDistribution.regular(2, 4), 8, 0)
        assert H.m == 4 and set(H.column_degrees) == {2}

    def test_degenerate_cycle_code(self):
        H = construct_peg(DegreeDistribution.regular(2, 2), 8, 0)
        assert H.m == 8 and set(H.row_degrees) == {2}

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            construct_peg(DegreeDistribution.regular(3, 6), 4)

    def test_unbalanceable_raises(self):
        # 27 variable-side edges against 4 checks of degree 6 is 3 edges off
        with pytest.raises(InfeasibleDistribution):
            degree_sequences(DegreeDistribution.regular(3, 6), 9)

    def test_seed_determinism(self):
        d = DegreeDistribution.regular(3, 6)
        assert construct_peg(d, 64, 5) == construct_peg(d, 64, 5)

    def test_no_four_cycles_at_moderate_length(self, code_3_6_1024):
        h = sparse.csr_matrix(code_3_6_1024.to_dense().astype(np.int32))
        overlap = (h.T @ h).tolil()
        overlap.setdiag(0)
        assert overlap.tocsr().max() <= 1

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(candidate_family(4, 8, 0.25)), st.integers(40, 120), st.integers(0, 1000))
    def test_degree_histogram_close_to_target(self, d, n, seed):
        try:
            H = construct_peg(d, n, seed)
        except InfeasibleDistribution:
            return
        counts = np.bincount(H.column_degrees, minlength=8)[2:]
        target = np.zeros_like(counts, dtype=float)
        for deg, f in d.variable_node_fractions().items():
            target[deg - 2] = f
        assert np.abs(counts / n - target).sum() <= 2.0 / n + 1e-12
        assert H.entries.shape[0] == len({tuple(e) for e in H.entries})


class TestParityCheckMatrix:
    def test_hamming_dimension(self):
        H = ParityCheckMatrix.from_dense(HAMMING_7_4)
        assert (H.m, H.n, H.k) == (3, 7, 4)

    def test_redundant_rows_do_not_change_dimension(self):
        assert ParityCheckMatrix.from_dense(full_dual(HAMMING_7_4)).k == 4

    def test_encode_gives_codewords(self, code_3_6_96):
        rng = np.random.default_rng(0)
        for _ in range(10):
            msg = rng.integers(0, 2, code_3_6_96.k, dtype=np.uint8)
            cw = code_3_6_96.encode(msg)
            assert code_3_6_96.is_codeword(cw)
            np.testing.assert_array_equal(code_3_6_96.extract_message(cw), msg)

    def test_duplicate_entries_rejected(self):
        with pytest.raises(ValueError):
            ParityCheckMatrix(2, 3, [(0, 1), (0, 1)])

    def test_alist_round_trip(self, code_3_6_96, tmp_path):
        path = tmp_path / "code.alist"
        code_3_6_96.save_alist(path)
        assert ParityCheckMatrix.load_alist(path) == code_3_6_96

    def test_alist_layout(self):
        text = ParityCheckMatrix.from_dense([[1, 1, 0], [0, 1, 1]]).to_alist()
        assert text.splitlines() == ["3 2", "2 2", "1 2 1", "2 2", "1 0", "1 2", "2 0", "1 2", "2 3"]

    def test_alist_error_has_line(self):
        with pytest.raises(ParseError) as err:
            ParityCheckMatrix.from_alist("3 2\n2 2\n1 2 x\n")
        assert err.value.line == 3


class TestBP:
    """Sum-product decoding on short and long codes."""

    def test_clean_codeword_needs_no_iterations(self, code_3_6_96):
        cw = code_3_6_96.encode(np.ones(code_3_6_96.k, dtype=np.uint8))
        res = bp_decode(code_3_6_96, hard_to_llr(cw, 0.01))
        assert res.converged and res.iterations_used <= 1
        np.testing.assert_array_equal(res.estimate, cw)

    def test_hamming_single_flips_match_ml(self):
        h = full_dual(HAMMING_7_4)
        words = codewords(h)
        dec = BPDecoder().fit(h)
        for cw in words:
            for i in range(7):
                r = cw.copy()
                r[i] ^= 1
                est = dec.decode(hard_to_llr(r, 0.05)).estimate
                np.testing.assert_array_equal(est, ml_decode(r, words))

    def test_erasures_filled(self, code_3_6_96):
        rng = np.random.default_rng(2)
        cw = code_3_6_96.encode(rng.integers(0, 2, code_3_6_96.k, dtype=np.uint8))
        erased = np.zeros(96, dtype=bool)
        erased[rng.choice(96, 15, replace=False)] = True
        res = bp_decode(code_3_6_96, hard_to_llr(cw, 0.01, erased))
        assert res.converged
        np.testing.assert_array_equal(res.estimate, cw)

    def test_long_code_at_three_percent(self, code_3_6_1024):
        rng = np.random.default_rng(3)
        dec = BPDecoder().fit(code_3_6_1024)
        for _ in range(10):
            noise = (rng.random(1024) < 0.03).astype(np.uint8)
            res = dec.decode(hard_to_llr(noise, 0.03))
            assert res.converged and not res.estimate.any()

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-20, 20, allow_nan=False), min_size=96, max_size=96))
    def test_converged_means_codeword(self, code_3_6_96, llrs):
        res = bp_decode(code_3_6_96, np.array(llrs), DecoderSettings(max_iterations=15))
        if res.converged:
            assert code_3_6_96.is_codeword(res.estimate)

    def test_nonfinite_llr_rejected(self, code_3_6_96):
        with pytest.raises(ValueError):
            bp_decode(code_3_6_96, np.full(96, np.inf))

    def test_bsc_llr(self):
        assert bsc_llr(0.1) == pytest.approx(math.log(9))
        with pytest.raises(ValueError):
            bsc_llr(0.5)


class TestAdaptiveIterations:
    def test_high_snr_cap(self):
        assert DecoderSettings(adaptive=True).iteration_cap(ChannelQuality(12.0)) == 10

    def test_low_snr_cap(self):
        assert DecoderSettings(adaptive=True).iteration_cap(ChannelQuality(8.0)) == 20

    def test_threshold_itself_is_low(self):
        assert DecoderSettings(adaptive=True).iteration_cap(ChannelQuality(10.0)) == 20

    def test_non_adaptive_uses_max(self):
        assert DecoderSettings(max_iterations=37).iteration_cap(ChannelQuality(12.0)) == 37

    def test_cap_bounds_iterations(self, code_3_6_96):
        rng = np.random.default_rng(4)
        llr = rng.normal(0.3, 2.0, 96)
        res = bp_decode(code_3_6_96, llr, DecoderSettings(adaptive=True), ChannelQuality(12.0))
        assert res.iterations_used <= 10

    def test_invalid_settings(self):
        with pytest.raises(ValueError):
            DecoderSettings(t_low_snr=5, t_high_snr=10)
        with pytest.raises(ValueError):
            DecoderSettings(message_transform="gnn")


class TestMessageTransforms:
    def test_registry(self):
        assert {"identity", "damped"} <= set(MESSAGE_TRANSFORMS)

    def test_damped_still_decodes(self, code_3_6_1024):
        rng = np.random.default_rng(6)
        noise = (rng.random(1024) < 0.03).astype(np.uint8)
        res = bp_decode(code_3_6_1024, hard_to_llr(noise, 0.03), DecoderSettings(message_transform="damped"))
        assert res.converged and not res.estimate.any()

    def test_custom_transform_is_called(self, code_3_6_96):
        calls = []

        def spy(new, old, iteration, settings):
            calls.append(iteration)
            return new

        register_message_transform("spy", spy)
        try:
            llr = hard_to_llr(np.eye(1, 96, 5, dtype=np.uint8)[0], 0.05)
            res = bp_decode(code_3_6_96, llr, DecoderSettings(message_transform="spy"))
            assert res.converged and calls == list(range(1, res.iterations_used + 1))
        finally:
            del MESSAGE_TRANSFORMS["spy"]


class TestEstimator:
    def test_clone_and_params(self):
        dec = BPDecoder(max_iterations=7, message_transform="damped")
        assert clone(dec).get_params() == dec.get_params()
        assert dec.settings == DecoderSettings(max_iterations=7, message_transform="damped")

    def test_predict_rows(self, code_3_6_96):
        X = np.vstack([hard_to_llr(np.zeros(96, dtype=np.uint8), 0.05)] * 3)
        assert BPDecoder().fit(code_3_6_96).predict(X).shape == (3, 96)

    def test_unfitted(self):
        from sklearn.exceptions import NotFittedError
        with pytest.raises(NotFittedError):
            BPDecoder().decode(np.zeros(3))


class TestAdaptation:
    def test_low_now_steps_down(self):
        assert adapt_parameters(CodingState(rung=1), ChannelQuality(8), ChannelQuality(12)).rung == 0

    def test_low_prediction_steps_down(self):
        assert adapt_parameters(CodingState(rung=1), ChannelQuality(12), ChannelQuality(8)).rung == 0

    def test_good_channel_steps_up(self):
        assert adapt_parameters(CodingState(rung=1), ChannelQuality(12), ChannelQuality(12)).rung == 2

    def test_saturates_at_top(self):
        assert adapt_parameters(CodingState(rung=2), ChannelQuality(12), ChannelQuality(12)).rung == 2

    def test_saturates_at_bottom(self):
        assert adapt_parameters(CodingState(rung=0), ChannelQuality(5), ChannelQuality(5)).rung == 0

    @given(st.integers(0, 2), st.floats(-30, 40), st.floats(-30, 40), st.floats(-30, 40))
    def test_monotone_in_current_snr(self, rung, a, b, pred):
        lo, hi = sorted((a, b))
        s = CodingState(rung=rung)
        assert (adapt_parameters(s, ChannelQuality(lo), ChannelQuality(pred)).rung
                <= adapt_parameters(s, ChannelQuality(hi), ChannelQuality(pred)).rung)

    def test_ewma_constant(self):
        assert predict_channel([10.0] * 5) == 10.0

    def test_ewma_two_samples(self):
        assert predict_channel([ChannelQuality(0.0), ChannelQuality(20.0)], 0.5) == 10.0

    def test_ewma_single(self):
        assert predict_channel([7.0]) == 7.0

    def test_ewma_empty(self):
        with pytest.raises(EmptyHistory):
            predict_channel([])


class TestOptimizer:
    def test_i_bsc_values(self):
        assert i_bsc(0.0) == 1.0
        assert i_bsc(0.5) == pytest.approx(0.0, abs=1e-15)
        assert i_bsc(0.11) == pytest.approx(0.5, abs=1e-4)

    def test_score_formula(self):
        d = DegreeDistribution.regular(3, 4)
        assert score_distribution(d, 0.01, 2.0, 1.0, 0.5) == pytest.approx(i_bsc(0.01) - 0.02 - 0.25)

    def test_ber_zero_on_clean_channel_like(self):
        assert simulate_ber(DegreeDistribution.regular(3, 6), 1e-4, 5, 128, 0) == 0.0

    def test_branch_and_bound_matches_exhaustive(self):
        family = candidate_family(4, 8, 0.25)[::7]
        best, score, evaluated = optimize_degree_distribution(family, trials=5, n=96, seed=3,
                                                              return_evaluated=True)
        _, _, everything = optimize_degree_distribution(family, trials=5, n=96, seed=3, penalty_rate=0.0,
                                                        return_evaluated=True)
        exhaustive = {r.index: score_distribution(r.distribution, r.ber) for r in everything}
        top = max(exhaustive.values())
        assert score == pytest.approx(top)
        assert len(evaluated) <= len(family)

    def test_deterministic_and_worker_independent(self):
        family = candidate_family(4, 8, 0.25)[:30]
        a = optimize_degree_distribution(family, trials=5, n=96, seed=9, n_jobs=1)
        b = optimize_degree_distribution(family, trials=5, n=96, seed=9, n_jobs=2)
        assert a == b

    def test_input_validation(self):
        with pytest.raises(ValueError):
            optimize_degree_distribution([], trials=1)
        with pytest.raises(ValueError):
            optimize_degree_distribution(candidate_family()[:1], target_qber=0.6)

    def test_estimator(self):
        family = candidate_family(4, 8, 0.25)[:10]
        search = DegreeDistributionSearch(trials=3, n=96).fit(family)
        assert search.best_distribution_ in family
        assert search.best_score_ == max(r.score for r in search.evaluated_)
