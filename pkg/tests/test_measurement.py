import numpy as np
import pytest
from scipy import stats as scipy_stats

from eprgate.measurement import (
    DegenerateQuadratureError,
    HomodyneOutcome,
    homodyne_condition,
    homodyne_sample,
    normalize_lo_phase,
    quadrature_marginal,
    sample_quadrature,
    shot_stream,
)
from eprgate.states import displace, epr_pair, squeeze, tensor, vacuum

TWO_R_12DB = 1.2 * np.log(10.0)


def test_outcome_validation():
    with pytest.raises(ValueError):
        HomodyneOutcome(0, 0.0, np.nan)
    with pytest.raises(ValueError):
        HomodyneOutcome(0, 3.5, 1.0)


def test_normalize_lo_phase_flips_value():
    phase, value = normalize_lo_phase(3.0 * np.pi / 2.0, 1.25)
    assert phase == pytest.approx(np.pi / 2.0)
    assert value == -1.25
    phase, value = normalize_lo_phase(np.pi, 0.5)
    assert phase == pytest.approx(0.0, abs=1e-15)
    assert value == -0.5
    phase, value = normalize_lo_phase(-np.pi / 4.0, 2.0)
    assert phase == pytest.approx(3.0 * np.pi / 4.0)
    assert value == -2.0


def test_product_state_unaffected_by_measurement():
    state = tensor(vacuum(1), displace(squeeze(vacuum(1), 0, 0.4), 0, 0.7, -0.1))
    for outcome in (-2.0, 0.0, 3.3):
        post = homodyne_condition(state, 0, 0.0, outcome)
        assert np.allclose(post.mean, state.mean[2:], atol=1e-14)
        assert np.allclose(post.cov, state.cov[2:, 2:], atol=1e-14)


def test_epr_conditioning_schur_value():
    pair = epr_pair(12.0)
    post = homodyne_condition(pair, 0, 0.0, 0.0)
    expected = 1.0 / (2.0 * np.cosh(TWO_R_12DB))
    assert post.cov[0, 0] == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.06284554183958274, abs=1e-9)

    # brute-force check: residual variance of X2 given X1 over sampled pairs
    rng = np.random.default_rng(99)
    idx = [0, 2]
    samples = rng.multivariate_normal(pair.mean[idx], pair.cov[np.ix_(idx, idx)], size=10**6)
    slope = np.cov(samples.T)[0, 1] / samples[:, 0].var(ddof=1)
    residual = samples[:, 1] - slope * samples[:, 0]
    stderr = expected * np.sqrt(2.0 / 10**6)
    assert residual.var(ddof=1) == pytest.approx(expected, abs=4.0 * stderr)


def test_epr_zero_db_no_correlation():
    post = homodyne_condition(epr_pair(0.0), 0, 0.0, 1.7)
    assert post.cov[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(post.mean, 0.0, atol=1e-12)


def test_conditional_cov_outcome_independent():
    rng = np.random.default_rng(1)
    state = epr_pair(9.0)
    reference = homodyne_condition(state, 1, 0.3, 0.0).cov
    for outcome in rng.uniform(-4, 4, size=5):
        post = homodyne_condition(state, 1, 0.3, outcome)
        assert np.array_equal(post.cov, reference)


def test_conditioning_requires_two_modes():
    with pytest.raises(ValueError):
        homodyne_condition(vacuum(1), 0, 0.0, 0.0)


def test_degenerate_quadrature_rejected():
    state = tensor(squeeze(vacuum(1), 0, 25.0), vacuum(1))
    with pytest.raises(DegenerateQuadratureError, match="degenerate quadrature"):
        homodyne_condition(state, 0, 0.0, 0.0)


def test_vacuum_sample_variance():
    rng = np.random.default_rng(42)
    n = 10**5
    values = np.array([sample_quadrature(vacuum(1), 0, 0.0, rng).value for _ in range(n)])
    assert values.var(ddof=1) == pytest.approx(0.5, abs=3.0 * np.sqrt(2.0 / n) * 0.5)
    assert values.mean() == pytest.approx(0.0, abs=3.0 * np.sqrt(0.5 / n))


def test_fixed_seed_reproducible():
    def run():
        rng = shot_stream(42, 0)
        state = epr_pair(10.0)
        out = []
        for _ in range(50):
            outcome, post = homodyne_sample(state, 0, 0.0, rng)
            out.append(outcome.value)
            out.append(sample_quadrature(post, 0, np.pi / 2.0, rng).value)
        return np.array(out)

    assert np.array_equal(run(), run())
    # a different shot index gives a different substream
    assert shot_stream(42, 1).standard_normal() != shot_stream(42, 0).standard_normal()


def test_epr_sum_variance_from_sequential_sampling():
    rng = np.random.default_rng(7)
    pair = epr_pair(12.0)
    n = 10**5
    total = np.empty(n)
    for i in range(n):
        first, post = homodyne_sample(pair, 0, 0.0, rng)
        second = sample_quadrature(post, 0, 0.0, rng)
        total[i] = first.value + second.value
    expected = 10.0 ** (-1.2)
    stderr = expected * np.sqrt(2.0 / n)
    assert total.var(ddof=1) == pytest.approx(expected, abs=3.0 * stderr)


def test_law_of_total_variance():
    state = displace(epr_pair(12.0), 0, 0.6, -0.4)
    rng = np.random.default_rng(5)
    n = 10**5
    cond_means = np.empty(n)
    cond_var = None
    for i in range(n):
        _, post = homodyne_sample(state, 0, 0.0, rng)
        cond_means[i] = post.mean[0]
        cond_var = post.cov[0, 0]
    _, marginal_var = quadrature_marginal(state, 1, 0.0)
    reassembled = cond_means.var(ddof=1) + cond_var
    stderr = marginal_var * np.sqrt(2.0 / n)
    assert reassembled == pytest.approx(marginal_var, abs=3.0 * stderr)


def test_sampled_marginal_matches_analytic_distribution():
    state = displace(squeeze(vacuum(1), 0, 0.6, 0.4), 0, 1.1, -0.3)
    phase = np.pi / 3.0
    mu, var = quadrature_marginal(state, 0, phase)
    rng = np.random.default_rng(8)
    values = np.array(
        [sample_quadrature(state, 0, phase, rng).value for _ in range(10**5)]
    )
    result = scipy_stats.kstest(values, scipy_stats.norm(mu, np.sqrt(var)).cdf)
    assert result.pvalue > 0.001


def test_sample_normalizes_phase():
    rng = np.random.default_rng(3)
    outcome = sample_quadrature(vacuum(1), 0, 3.0 * np.pi / 2.0, rng)
    assert outcome.lo_phase == pytest.approx(np.pi / 2.0)


def test_homodyne_sample_reduces_mode_count():
    rng = np.random.default_rng(4)
    outcome, post = homodyne_sample(epr_pair(6.0), 1, 0.0, rng)
    assert post.n_modes == 1
    assert outcome.mode == 1
    with pytest.raises(ValueError):
        homodyne_sample(vacuum(1), 0, 0.0, rng)
