import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from mellinwave import ParameterError, generate_test_signal
from mellinwave.estimators import (
    PowerLawDenoiser,
    ScaleFilterTransformer,
    SpectralExponentEstimator,
    WaveletTransform,
    check_signals,
)

N = 1024


@pytest.fixture(scope="module")
def X():
    rows = [generate_test_signal("chirp", N, f0=f, f1=f + 40, band=(24, 160)).samples for f in (40, 60)]
    return np.stack(rows)


def test_check_signals():
    assert check_signals([1.0, 2.0, 3.0]).shape == (1, 3)
    with pytest.raises(ParameterError):
        check_signals([[np.nan, 1.0]])
    with pytest.raises(ParameterError):
        check_signals(np.zeros((2, 2, 2)))
    with pytest.raises(ParameterError):
        check_signals([[1.0]])
    with pytest.raises(ParameterError):
        check_signals([["a", "b"]])
    with pytest.raises(ParameterError):
        check_signals([[1j, 2.0]], allow_complex=False)


@pytest.mark.parametrize("est", [
    WaveletTransform(voices=8),
    ScaleFilterTransformer(filter={"type": "hilbert"}, voices=8),
    PowerLawDenoiser(signal_exponent=-1.0),
    SpectralExponentEstimator(band=(2.0, 200.0)),
])
def test_params_round_trip(est):
    c = clone(est)
    assert c.get_params() == est.get_params()
    c.set_params(voices=4)
    assert c.voices == 4 and est.voices != 4


def test_not_fitted(X):
    with pytest.raises(NotFittedError):
        WaveletTransform().transform(X)
    with pytest.raises(NotFittedError):
        ScaleFilterTransformer().transform(X)


class TestWaveletTransform:
    def test_shape_and_inverse(self, X):
        wt = WaveletTransform(voices=8, sample_rate=N).fit(X)
        C = wt.transform(X)
        assert C.shape == (2, wt.grid_.n_scales, N)
        back = wt.inverse_transform(C, real_output=True)
        for b, x in zip(back, X):
            assert np.linalg.norm(b - x) / np.linalg.norm(x) < 1e-2

    def test_width_check(self, X):
        wt = WaveletTransform(voices=4, sample_rate=N).fit(X)
        with pytest.raises(ParameterError):
            wt.transform(X[:, :512])

    def test_explicit_grid(self, X):
        wt = WaveletTransform(voices=4, sigma_min=0.1, octaves=6, sample_rate=N).fit(X)
        assert wt.grid_.n_scales == 24
        with pytest.raises(ParameterError):
            WaveletTransform(sigma_min=0.1).fit(X)


def test_scale_filter_hilbert(X):
    est = ScaleFilterTransformer(filter={"type": "hilbert"}, voices=16, sample_rate=N)
    Y = est.fit_transform(X)
    assert est.scale_filter_.kind == "hilbert"
    for y, x in zip(Y, X):
        ref = np.imag(np.fft.ifft(np.fft.fft(x) * _analytic_mask(N)))
        assert np.linalg.norm(y - ref) / np.linalg.norm(ref) < 1e-2


def _analytic_mask(n):
    m = np.zeros(n)
    m[0] = m[n // 2] = 1
    m[1:n // 2] = 2
    return m


def test_pipeline(X):
    pipe = make_pipeline(ScaleFilterTransformer(voices=8, sample_rate=N), WaveletTransform(voices=4, sample_rate=N))
    assert pipe.fit_transform(X).shape[0] == 2


def test_denoiser_improves_power_law_signals():
    # the model assumes a power-law signal spectrum, so feed it one
    clean = np.stack([generate_test_signal("power_law_noise", 2048, sample_rate=2048.0, exponent=-2.0,
                                           seed=s).samples for s in range(3)])
    clean /= clean.std(axis=1, keepdims=True)
    noisy = clean + np.random.default_rng(3).standard_normal(clean.shape)
    Y = PowerLawDenoiser(signal_exponent=-2.0, voices=8, sample_rate=2048.0).fit(noisy).transform(noisy)
    assert Y.shape == clean.shape
    assert np.all(np.linalg.norm(Y - clean, axis=1) < 0.7 * np.linalg.norm(noisy - clean, axis=1))


def test_spectral_exponent_estimator():
    X = np.stack([generate_test_signal("power_law_noise", 4096, sample_rate=4096.0, exponent=-1.0, seed=s).samples
                  for s in range(6)])
    est = SpectralExponentEstimator(voices=8, sample_rate=4096.0).fit(X)
    assert len(est.estimates_) == 6
    assert abs(est.slope_ + 1.0) < 0.2
    np.testing.assert_allclose(est.predict(X), [e.slope for e in est.estimates_])
