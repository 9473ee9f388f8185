"""Property tests for the invariants that hold for every input."""

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mellinwave import (
    ScaleTimeGrid,
    Signal,
    analytic_part,
    apply_scale_filter,
    cauchy_wavelet,
    cwt_forward,
    fft,
    hilbert_filter,
    ifft,
    reconstruct,
    scaling_convolve,
    split_signs,
)

FINITE = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
RATE = st.sampled_from([1.0, 64.0, 1000.0])
WV = cauchy_wavelet(1)
GRID = ScaleTimeGrid(0.5, 6, 4, sample_rate=64.0)
GRID_PM = ScaleTimeGrid(0.5, 6, 4, include_negative_scales=True, sample_rate=64.0)
SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def real_signals(n=64):
    return arrays(np.float64, n, elements=FINITE)


@SETTINGS
@given(real_signals(), RATE)
def test_fft_parseval(x, rate):
    s = Signal(x, rate)
    X = fft(s)
    dt, df = 1 / rate, rate / x.size
    assert np.isclose(np.sum(np.abs(X.bins) ** 2) * df, np.sum(x**2) * dt, rtol=1e-10, atol=1e-9)


@SETTINGS
@given(real_signals(), RATE)
def test_fft_round_trip(x, rate):
    np.testing.assert_allclose(ifft(fft(Signal(x, rate))).samples, x, atol=1e-9)


@SETTINGS
@given(real_signals())
def test_analytic_part_projection(x):
    z = analytic_part(Signal(x, 64.0))
    np.testing.assert_allclose(z.samples.real, x, atol=1e-9)
    np.testing.assert_allclose(analytic_part(z).samples, z.samples, atol=1e-9)
    Z = np.fft.fft(z.samples)
    assert np.all(np.abs(Z[33:]) <= 1e-9 * max(1.0, np.abs(Z).max()))


@SETTINGS
@given(arrays(np.float64, 6, elements=st.floats(-5, 5)), arrays(np.float64, 6, elements=st.floats(-5, 5)),
       arrays(np.float64, 6, elements=st.floats(-5, 5)))
def test_split_signs_reassembles(re_p, re_m, im):
    f = np.geomspace(0.1, 10, 6)
    grid = np.concatenate([-f[::-1], f])
    vals = np.concatenate([(re_m + 1j * im)[::-1], re_p - 1j * im])
    W = split_signs(grid, vals)
    np.testing.assert_allclose(W(grid), vals, atol=1e-12)


@SETTINGS
@given(real_signals(), real_signals(), FINITE)
def test_cwt_linear(x, y, a):
    sx, sy = Signal(x, 64.0), Signal(y, 64.0)
    cx, cy = cwt_forward(sx, WV, GRID).coefficients, cwt_forward(sy, WV, GRID).coefficients
    cxy = cwt_forward(Signal(a * x + y, 64.0), WV, GRID).coefficients
    scale = 1 + np.abs(a) * np.abs(cx).max() + np.abs(cy).max()
    assert np.max(np.abs(cxy - (a * cx + cy))) <= 1e-10 * scale


@SETTINGS
@given(real_signals(), real_signals())
def test_reconstruct_linear(x, y):
    rx = reconstruct(cwt_forward(Signal(x, 64.0), WV, GRID), WV).samples
    ry = reconstruct(cwt_forward(Signal(y, 64.0), WV, GRID), WV).samples
    rxy = reconstruct(cwt_forward(Signal(x - 2 * y, 64.0), WV, GRID), WV).samples
    assert np.max(np.abs(rxy - (rx - 2 * ry))) <= 1e-9 * (1 + np.abs(x).max() + np.abs(y).max())


@SETTINGS
@given(real_signals())
def test_real_output_for_hermitian_filter(x):
    # the Nyquist bin has no mirror partner, so a +-i symbol cannot stay real there
    x = x - np.mean(x * (-1.0) ** np.arange(x.size)) * (-1.0) ** np.arange(x.size)
    h, _ = hilbert_filter(WV)
    y = apply_scale_filter(cwt_forward(Signal(x, 64.0), WV, GRID_PM), h, WV).samples
    assert np.max(np.abs(np.imag(y))) <= 1e-9 * (1 + np.abs(x).max())


@settings(max_examples=20, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.2, 3.0))
def test_scaling_convolve_bilinear(a, b, mu):
    f = np.geomspace(0.1, 10, 7)
    w1 = lambda s: np.exp(-np.log(s) ** 2)  # noqa: E731
    w2 = lambda s: np.exp(-np.log(s / mu) ** 2)  # noqa: E731
    dens = WV.density
    lhs = scaling_convolve(lambda s: a * w1(s) + b * w2(s), dens, f)
    rhs = a * scaling_convolve(w1, dens, f) + b * scaling_convolve(w2, dens, f)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-12 * np.abs(rhs).max() + 1e-300)
