import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from penscore import sampling
from penscore.sampling import ABS_GAUSSIAN, DIRICHLET, GENERATORS


@pytest.mark.parametrize("gen", GENERATORS)
def test_simplex_rows_are_valid(gen):
    rng = np.random.default_rng(0)
    v = sampling.simplex_rows(rng, (500, 7), gen)
    assert np.all(v >= 0)
    np.testing.assert_allclose(v.sum(axis=1), 1.0, atol=1e-12)


def test_unknown_generator():
    with pytest.raises(ValueError):
        sampling.simplex_rows(np.random.default_rng(0), (2, 3), "beta")


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 15), st.sampled_from(GENERATORS), st.integers(0, 2**32 - 1))
def test_correct_and_wrong_rows(c, gen, seed):
    rng = np.random.default_rng(seed)
    x, tx = sampling.correct_rows(rng, 200, c, gen)
    w, tw, _ = sampling.wrong_rows(rng, 200, c, gen)
    r = np.arange(200)
    assert np.all(x[r, tx] >= x.max(axis=1))
    assert np.all(w.max(axis=1) > w[r, tw])


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 15), st.sampled_from(GENERATORS), st.sampled_from(["below", "above"]),
       st.integers(0, 2**32 - 1))
def test_hot_value_pairs_constraints(c, gen, case, seed):
    rng = np.random.default_rng(seed)
    x, q, true, _ = sampling.hot_value_pairs(rng, 300, c, case, gen)
    r = np.arange(300)
    alpha, hot = x[r, true], q[r, true]
    np.testing.assert_allclose(q.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(q >= 0)
    assert np.all(alpha >= x.max(axis=1))  # x correct
    assert np.all(q.max(axis=1) > hot)  # q wrong
    if case == "below":
        assert np.all((hot > 0) & (hot < alpha))
    else:
        assert np.all((alpha < 0.5) & (hot > alpha))


def test_hot_value_errors():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        sampling.hot_value_pairs(rng, 5, 2, "above")
    with pytest.raises(ValueError):
        sampling.hot_value_pairs(rng, 5, 3, "sideways")


def _naive_above(rng, alpha, k, gen, n):
    """Per-row rejection straight from the definition: t ~ U(alpha, 1),
    shape from the generator, keep when q is wrong."""
    out_t, out_top = [], []
    got = 0
    while got < n:
        # independent proposals, drawn in blocks for speed
        t = rng.uniform(alpha, 1.0, 20000)
        top = sampling.simplex_rows(rng, (20000, k), gen).max(axis=1) * (1 - t)
        keep = top > t
        out_t.append(t[keep])
        out_top.append(top[keep])
        got += int(keep.sum())
    return np.concatenate(out_t)[:n], np.concatenate(out_top)[:n]


@pytest.mark.parametrize("gen", GENERATORS)
@pytest.mark.parametrize("alpha, k", [(0.47, 2), (0.32, 4), (0.42, 3), (0.25, 8)])
def test_fast_above_sampler_matches_naive_rejection(gen, alpha, k):
    # alpha values are above the tilt threshold, so the tilted proposal is used
    assert alpha >= sampling._tilt_threshold(k)
    rng = np.random.default_rng(12345)
    t_ref, top_ref = _naive_above(rng, alpha, k, gen, 3000)
    t, s = sampling._above_nonhot(rng, np.full(3000, alpha), k, gen)
    top = (s * (1 - t)[:, None]).max(axis=1)
    assert stats.ks_2samp(t, t_ref).pvalue > 1e-3
    assert stats.ks_2samp(top, top_ref).pvalue > 1e-3


@pytest.mark.parametrize("gen", GENERATORS)
def test_tilted_and_plain_agree(gen):
    rng = np.random.default_rng(7)
    alpha, k, n = 0.33, 3, 4000
    a = np.full(n, alpha)

    def draw(fn):
        ts, tops = [], []
        todo = n
        while todo > 0:
            acc, t, s = fn(rng, a[:todo], 64, k, gen)
            has = acc.any(axis=1)
            first = np.argmax(acc, axis=1)
            ts.append(t[has, first[has]])
            tops.append(s[has, first[has]].max(axis=1))
            todo -= int(has.sum())
        return np.concatenate(ts), np.concatenate(tops)

    t1, m1 = draw(sampling._above_plain)
    t2, m2 = draw(sampling._above_tilted)
    assert stats.ks_2samp(t1, t2).pvalue > 1e-3
    assert stats.ks_2samp(m1, m2).pvalue > 1e-3


def test_deterministic_given_seed():
    a = sampling.hot_value_pairs(np.random.default_rng(3), 100, 5, "above", ABS_GAUSSIAN)
    b = sampling.hot_value_pairs(np.random.default_rng(3), 100, 5, "above", ABS_GAUSSIAN)
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u, v)


def test_dirichlet_is_uniform_on_simplex():
    # for Dirichlet(1,...,1) on c=3 each coordinate is Beta(1, 2)
    v = sampling.simplex_rows(np.random.default_rng(0), (20000, 3), DIRICHLET)
    assert stats.kstest(v[:, 0], stats.beta(1, 2).cdf).pvalue > 1e-3
