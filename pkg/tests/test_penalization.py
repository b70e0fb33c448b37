import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import batch, prob_rows
from penscore.penalization import (
    CORRECT,
    WRONG,
    bs_penalty,
    is_correct,
    ll_penalty,
    penalized_brier_score,
    penalized_log_loss,
    penalizing,
    wrong_mask,
)
from penscore.scoring import DomainError, ShapeError, brier_score, log_loss


class TestPenalizing:
    @pytest.mark.parametrize(
        "row, true, expected",
        [
            ([0.2, 0.5, 0.3], 1, 0.0),
            ([0.6, 0.3, 0.1], 1, 2 / 3),
            ([0.5, 0.5, 0.0], 0, 0.0),  # tie including the true class
        ],
    )
    def test_examples(self, row, true, expected):
        assert penalizing(*batch(row, true), 2 / 3).values[0] == pytest.approx(expected)

    def test_negative_penalty_rejected(self):
        with pytest.raises(DomainError):
            penalizing(*batch([0.5, 0.5], 0), -1.0)

    def test_shape_mismatch(self):
        q, _ = batch([0.5, 0.5], 0)
        _, y = batch([0.2, 0.3, 0.5], 0)
        with pytest.raises(ShapeError):
            penalizing(q, y, 1.0)

    @given(prob_rows(), st.floats(0, 10))
    def test_dichotomy_and_consistency(self, data, penalty):
        rows, true = data
        pay = penalizing(*batch(rows, true), penalty)
        assert np.all((pay.values == 0) | (pay.values == penalty))
        labels = [is_correct(r, np.eye(rows.shape[1])[t]) for r, t in zip(rows, true)]
        ref = [oracles.wrong(r, t) for r, t in zip(rows.tolist(), true.tolist())]
        assert [lab == WRONG for lab in labels] == ref
        if penalty > 0:
            assert ((pay.values > 0) == np.array(ref)).all()


class TestIsCorrect:
    def test_examples(self):
        assert is_correct([0.34, 0.33, 0.33], [1, 0, 0]) == CORRECT
        assert is_correct([0.33, 0.34, 0.33], [1, 0, 0]) == WRONG
        for t in range(4):
            assert is_correct([0.25] * 4, np.eye(4)[t]) == CORRECT


class TestPenalties:
    @pytest.mark.parametrize("c, expected", [(2, 0.5), (3, 2 / 3), (10, 0.9)])
    def test_bs_penalty(self, c, expected):
        assert bs_penalty(c) == pytest.approx(expected)

    @pytest.mark.parametrize("c", [2, 3])
    def test_ll_penalty(self, c):
        assert ll_penalty(c) == pytest.approx(math.log(c))

    @pytest.mark.parametrize("fn", [bs_penalty, ll_penalty])
    def test_c_below_two(self, fn):
        with pytest.raises(DomainError):
            fn(1)


class TestPenalizedScores:
    def test_motivation_rows(self, motivation):
        A, B = motivation
        assert penalized_brier_score(*batch(A, 1)).mean == pytest.approx(0.6534, abs=1e-12)
        assert penalized_brier_score(*batch(B, 1)).mean == pytest.approx(0.5202 + 2 / 3, abs=1e-12)
        assert penalized_log_loss(*batch(A, 1)).mean == pytest.approx(-math.log(0.34), abs=1e-12)
        assert penalized_log_loss(*batch(B, 1)).mean == pytest.approx(
            -math.log(0.49) + math.log(3), abs=1e-12
        )
        # frozen 5-decimal values
        assert penalized_brier_score(*batch(B, 1)).mean == pytest.approx(1.18687, abs=5e-6)
        assert penalized_log_loss(*batch(A, 1)).mean == pytest.approx(1.07881, abs=5e-6)
        assert penalized_log_loss(*batch(B, 1)).mean == pytest.approx(1.81196, abs=5e-6)

    def test_perfect_prediction(self):
        assert penalized_brier_score(*batch(np.eye(3), [0, 1, 2])).mean == 0
        assert penalized_log_loss(*batch(np.eye(3), [0, 1, 2])).mean == 0

    @given(prob_rows())
    def test_match_oracles_and_dominate(self, data):
        rows, true = data
        q, y = batch(rows, true)
        pb, pl = penalized_brier_score(q, y).per_sample, penalized_log_loss(q, y).per_sample
        bs, ll = brier_score(q, y).per_sample, log_loss(q, y).per_sample
        R, T = rows.tolist(), true.tolist()
        np.testing.assert_allclose(pb, [oracles.pbs(r, t) for r, t in zip(R, T)], atol=1e-12)
        np.testing.assert_allclose(pl, [oracles.pll(r, t) for r, t in zip(R, T)], atol=1e-12)
        wrong = wrong_mask(q, y)
        assert np.all(pb >= bs) and np.all(pl >= ll)
        assert np.array_equal(pb == bs, ~wrong) and np.array_equal(pl == ll, ~wrong)

    @given(prob_rows())
    def test_gap_is_exactly_the_penalty(self, data):
        rows, true = data
        q, y = batch(rows, true)
        gap_b = penalized_brier_score(q, y).per_sample - brier_score(q, y).per_sample
        gap_l = penalized_log_loss(q, y).per_sample - log_loss(q, y).per_sample
        assert set(np.round(gap_b, 12)) <= {0.0, round(bs_penalty(q.c), 12)}
        assert set(np.round(gap_l, 12)) <= {0.0, round(ll_penalty(q.c), 12)}

    @given(prob_rows())
    def test_alg_form_is_scaled_by_c(self, data):
        rows, true = data
        q, y = batch(rows, true)
        alg = penalized_brier_score(q, y, alg_form=True)
        np.testing.assert_allclose(q.c * alg.per_sample, penalized_brier_score(q, y).per_sample,
                                   atol=1e-12)
        assert alg.metric_name == "pbs_alg"
        # class-averaged squared error, written out directly
        mse = np.mean((q.values - y.values) ** 2, axis=1)
        pen = np.where(wrong_mask(q, y), (q.c - 1) / q.c**2, 0.0)
        np.testing.assert_allclose(alg.per_sample, mse + pen, atol=1e-12)

    def test_pll_alg_form_keeps_eq_orientation(self, motivation):
        _, B = motivation
        r = penalized_log_loss(*batch(B, 1), alg_form=True)
        assert r.metric_name == "pll_alg" and "sign-corrected" in r.flags
        assert r.mean == pytest.approx(penalized_log_loss(*batch(B, 1)).mean)

    @given(prob_rows(allow_zero=False))
    def test_correct_row_ceiling(self, data):
        rows, true = data
        q, y = batch(rows, true)
        ok = ~wrong_mask(q, y)
        assert np.all(penalized_brier_score(q, y).per_sample[ok] <= bs_penalty(q.c) + 1e-12)
        assert np.all(penalized_log_loss(q, y).per_sample[ok] <= ll_penalty(q.c) + 1e-12)
