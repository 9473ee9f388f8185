import math

import numpy as np
import pytest

from mellinwave import AdmissibilityError, MellinDivergenceError, ParameterError, cauchy_wavelet, parse_wavelet, sampled_wavelet

# 30-digit mpmath references
ORACLE = {
    (1, 0.0): 0.0063325739776461107152,
    (1, 1.0): 0.079577471545947667884,
    (1, 0.25): 0.010957911707905290458,
    (1, -5 / 3): 0.00037406454505826688374,
    (4, 0.0): 8.1049739674927990465e-6,
    (4, 2.0): 0.000030473480662964422737,
    (4, 3.0): 0.000076588210384063722015,
}
# psi(t) = int_0^inf f**a exp(-2 pi f) exp(2 pi i f t) df at t = 0.7
TIME_ORACLE = {
    1: 0.00581885992270531321 + 0.01597334096428909509j,
    2: -0.00114559060490380595 + 0.00428255892088507883j,
}


@pytest.mark.parametrize("key", sorted(ORACLE))
def test_cauchy_moments(key):
    alpha, p = key
    w = cauchy_wavelet(alpha)
    assert complex(w.mellin(p)).real == pytest.approx(ORACLE[key], rel=1e-12)
    assert complex(w.mellin(p, numeric=True)).real == pytest.approx(ORACLE[key], rel=1e-8)


def test_admissibility_constant():
    assert cauchy_wavelet(1).admissibility_constant == pytest.approx(1 / (16 * math.pi**2), rel=1e-14)


@pytest.mark.parametrize("alpha", [1, 2])
def test_time_function(alpha):
    assert cauchy_wavelet(alpha).time_fn(0.7) == pytest.approx(TIME_ORACLE[alpha], rel=1e-12)


def test_analytic_support():
    for alpha in (0.5, 1, 3):
        w = cauchy_wavelet(alpha)
        assert w.spectral_fn(np.array([-1.0]))[0] == 0
        np.testing.assert_array_equal(w.spectral_fn(np.array([-5.0, 0.0])), 0)


def test_density_is_squared_modulus():
    w = cauchy_wavelet(1.5)
    f = np.geomspace(1e-3, 10, 50)
    np.testing.assert_allclose(w.density(f), f**3 * np.exp(-4 * np.pi * f), rtol=1e-12)


def test_strip_enforced():
    w = cauchy_wavelet(1)
    with pytest.raises(MellinDivergenceError) as exc:
        w.mellin(2.0)
    assert exc.value.end == "lower"


def test_bad_alpha():
    with pytest.raises(ParameterError):
        cauchy_wavelet(0)
    with pytest.raises(ParameterError):
        cauchy_wavelet(-1)


def test_parse():
    assert parse_wavelet("cauchy:2").name == cauchy_wavelet(2).name
    with pytest.raises(ParameterError):
        parse_wavelet("morlet:6")
    with pytest.raises(ParameterError):
        parse_wavelet("cauchy:x")


def test_peak_frequency():
    # f**(2a) exp(-4 pi f) peaks at a / (2 pi); a flat maximum limits the optimiser to ~sqrt(eps)
    assert cauchy_wavelet(1).peak_frequency() == pytest.approx(1 / (2 * math.pi), rel=1e-6)
    assert cauchy_wavelet(3).peak_frequency() == pytest.approx(3 / (2 * math.pi), rel=1e-6)


def test_validate_passes():
    cauchy_wavelet(2).validate()


class TestSampled:
    def test_matches_closed_form(self):
        f = np.geomspace(1e-5, 12, 3000)
        sw = sampled_wavelet(f, f * np.exp(-2 * np.pi * f))
        cw = cauchy_wavelet(1)
        probe = np.geomspace(1e-3, 5, 200)
        np.testing.assert_allclose(sw.spectral_fn(probe), cw.spectral_fn(probe), atol=1e-6)
        assert complex(sw.mellin(0.0)).real == pytest.approx(cw.admissibility_constant, rel=1e-6)
        assert sw.mellin_closed_form is None

    def test_negative_frequency_rejected(self):
        f = np.linspace(-1, 5, 61)
        v = np.where(f > 0, f * np.exp(-2 * np.pi * f), 0.0)
        v[0] = 0.1
        with pytest.raises(AdmissibilityError, match="analytic"):
            sampled_wavelet(f, v)

    def test_divergent_constant_rejected(self):
        f = np.geomspace(1e-6, 10, 400)
        with pytest.raises(AdmissibilityError, match="low-frequency"):
            sampled_wavelet(f, np.exp(-2 * np.pi * f) / f)

    def test_no_high_decay_rejected(self):
        f = np.geomspace(1e-3, 1e3, 400)
        with pytest.raises(AdmissibilityError, match="high-frequency"):
            sampled_wavelet(f, np.sqrt(f))
