"""Batch-means estimator behavior on controlled inputs."""

import numpy as np
import pytest

from ergochain import CLT_NOTE, TooFewSamples, batch_means

# frozen: var over batch means of a million uniforms, default batch size
IID_UNIFORM_SIGMA2 = 0.0852840861918231


def test_constant_sequence_has_zero_error():
    est = batch_means(np.full(1000, 2.5))
    assert est.g_bar == 2.5
    assert est.sigma2_hat == 0.0 and est.mcse == 0.0


def test_iid_uniform_recovers_the_variance():
    vals = np.random.default_rng(2024).random(1_000_000)
    est = batch_means(vals)
    assert est.sigma2_hat == pytest.approx(IID_UNIFORM_SIGMA2, rel=1e-12)
    # for iid draws the asymptotic variance is the plain variance, 1/12
    assert abs(est.sigma2_hat - 1.0 / 12.0) < 0.1 / 12.0
    assert est.mcse == pytest.approx(np.sqrt(est.sigma2_hat / est.n), rel=1e-12)


def test_default_batch_size_is_sqrt_n():
    est = batch_means(np.arange(10_000, dtype=float))
    assert est.batch_size == 100
    assert est.num_batches == 100
    est2 = batch_means(np.arange(150, dtype=float))
    assert est2.batch_size == 12     # floor(sqrt(150))
    assert est2.num_batches == 12    # trailing 6 values dropped


def test_explicit_batch_size():
    est = batch_means(np.arange(100, dtype=float), batch_size=20)
    assert est.batch_size == 20 and est.num_batches == 5


def test_partial_batch_in_mean_not_variance():
    # 7 values, batch_size 2: mean over all 7, variance over 3 batches...
    # which is < 4, so it must refuse; with 9 values it works
    with pytest.raises(TooFewSamples):
        batch_means(np.arange(7, dtype=float), batch_size=2)
    vals = np.arange(9, dtype=float)
    est = batch_means(vals, batch_size=2)
    assert est.g_bar == vals.mean()          # includes the 9th value
    assert est.num_batches == 4
    means = vals[:8].reshape(4, 2).mean(axis=1)
    assert est.sigma2_hat == pytest.approx(2 * np.var(means, ddof=1), rel=1e-15)


@pytest.mark.parametrize("values,batch_size", [
    ([], None),
    ([1.0, 2.0, 3.0], None),
    (list(range(100)), 30),      # only 3 full batches
    (list(range(10)), 0),
])
def test_too_few_samples(values, batch_size):
    with pytest.raises(TooFewSamples):
        batch_means(values, batch_size=batch_size)


def test_json_shape():
    d = batch_means(np.arange(100, dtype=float)).to_json_dict()
    assert set(d) == {"g_bar", "mcse", "batch_size", "n"}
    assert d["n"] == 100


def test_clt_note_mentions_the_caveat():
    assert "central limit theorem" in CLT_NOTE
    assert "geometric" in CLT_NOTE
