import json
import math

import numpy as np
import pytest

from mellinwave import (
    AdmissibilityError,
    DifferentialOperatorSpec,
    MellinContour,
    ParameterError,
    ParseError,
    ScaleFilter,
    cauchy_wavelet,
    check_admissibility,
    derive_scale_filter,
    differential_filter,
    filter_from_spec,
    hilbert_filter,
    hilbert_frequency_filter,
    identity_filter,
    polynomial_filter,
    power_filter,
    power_law_filter,
    scaling_convolve,
    split_signs,
)
from mellinwave.filters import load_filter_spec

# mpmath references for M{Psi}(p)
C1 = {0.0: 0.0063325739776461107152, 0.5: 0.019894367886486916971, 1.0: 0.079577471545947667884,
      -5 / 3: 0.00037406454505826688374}
C2 = {0.0: 0.000240608959094164106, 2.0: 0.0063325739776461107152}
C4_3 = 0.000076588210384063722015

SIGMA = np.geomspace(1e-2, 1e2, 41)
SIGNED = np.concatenate([-SIGMA[::-1], SIGMA])


def symmetric(f):
    return np.concatenate([-f[::-1], f])


class TestSplitSigns:
    f = symmetric(np.geomspace(0.1, 10, 20))

    def test_even_power(self):
        W = split_signs(self.f, np.abs(self.f) ** 0.5)
        x = self.f[self.f > 0]
        np.testing.assert_array_equal(W.positive(x), x**0.5)
        np.testing.assert_array_equal(W.negative(x), x**0.5)

    def test_odd(self):
        W = split_signs(self.f, self.f)
        x = self.f[self.f > 0]
        np.testing.assert_array_equal(W.negative(x), -x)

    def test_hilbert_constants(self):
        W = split_signs(self.f, -1j * np.sign(self.f))
        x = np.geomspace(0.2, 5, 7)
        np.testing.assert_allclose(W.positive(x), -1j)
        np.testing.assert_allclose(W.negative(x), 1j)

    def test_reassembly_exact(self):
        v = np.random.default_rng(0).standard_normal(self.f.size) + 1j
        np.testing.assert_array_equal(split_signs(self.f, v).reassemble(self.f), v)

    def test_dc_sample_warns(self):
        f = np.concatenate([-self.f[self.f > 0][::-1], [0.0], self.f[self.f > 0]])
        with pytest.warns(UserWarning, match="f = 0"):
            W = split_signs(f, np.ones(f.size) * 2)
        assert W.dc_gain == 2

    def test_asymmetric_grid(self):
        with pytest.raises(ParameterError):
            split_signs(np.linspace(-1, 2, 12), np.ones(12))


class TestClosedFormPairs:
    def test_identity(self):
        w, W = identity_filter(cauchy_wavelet(1))
        np.testing.assert_allclose(w.on_scales(SIGNED), 1 / C1[0.0], rtol=1e-12)
        assert W.dc_gain == 1

    def test_power_half(self):
        w, W = power_filter(0.5, cauchy_wavelet(1))
        np.testing.assert_allclose(W(SIGNED), C1[0.5] * np.abs(SIGNED) ** 0.5, rtol=1e-12)
        np.testing.assert_allclose(w.on_scales(SIGNED), np.abs(SIGNED) ** 0.5, rtol=1e-14)

    def test_power_one(self):
        _, W = power_filter(1.0, cauchy_wavelet(1))
        f = np.array([0.5, 2.0])
        np.testing.assert_allclose(W(f), f / (4 * math.pi), rtol=1e-12)

    def test_power_five_thirds(self):
        _, W = power_filter(-5 / 3, cauchy_wavelet(1))
        assert W(np.array([1.0]))[0].real == pytest.approx(C1[-5 / 3], rel=1e-12)

    def test_power_zero_is_identity_pair(self):
        w, W = power_filter(0.0, cauchy_wavelet(1))
        np.testing.assert_allclose(w.on_scales(SIGNED), 1.0)
        np.testing.assert_allclose(W(SIGNED), C1[0.0], rtol=1e-12)

    def test_power_divergent(self):
        with pytest.raises(AdmissibilityError):
            power_filter(2.0, cauchy_wavelet(1))

    @pytest.mark.parametrize("p", [0.0, 0.5, 1.0, -0.5])
    def test_power_pair_consistent(self, p):
        wv = cauchy_wavelet(1)
        w, W = power_filter(p, wv)
        f = np.geomspace(0.05, 20, 20)
        back = scaling_convolve(w.positive, wv.density, f)
        np.testing.assert_allclose(back, W.positive(f), rtol=1e-4)

    def test_derivative(self):
        w, W = differential_filter([0, 1], cauchy_wavelet(1))
        f = np.array([-2.0, 0.5, 3.0])
        np.testing.assert_allclose(W(f), 2j * np.pi * f)
        np.testing.assert_allclose(w(f), 2j * np.pi * f / C1[1.0], rtol=1e-12)
        assert W.dc_gain == 0

    def test_second_order(self):
        w, W = differential_filter([1, 0, 1], cauchy_wavelet(2))
        np.testing.assert_allclose(W(SIGNED), 1 - 4 * math.pi**2 * SIGNED**2, rtol=1e-12)
        want = 1 / C2[0.0] - 4 * math.pi**2 * SIGNED**2 / C2[2.0]
        np.testing.assert_allclose(w.on_scales(SIGNED), want, rtol=1e-12)

    def test_a0_is_identity(self):
        w, W = differential_filter([1], cauchy_wavelet(1))
        wi, _ = identity_filter(cauchy_wavelet(1))
        np.testing.assert_allclose(w.on_scales(SIGNED), wi.on_scales(SIGNED))
        assert W.dc_gain == 1

    def test_cubic_inadmissible_names_n(self):
        with pytest.raises(AdmissibilityError, match=r"Psi_mellin\(3\)"):
            differential_filter([0, 0, 0, 1], cauchy_wavelet(1))

    def test_cubic_on_cauchy4(self):
        w, _ = differential_filter([0, 0, 0, 1], cauchy_wavelet(4))
        assert w(np.array([1.0]))[0] == pytest.approx((2j * math.pi) ** 3 / C4_3, rel=1e-12)

    def test_hilbert(self):
        h, H = hilbert_filter(cauchy_wavelet(1))
        np.testing.assert_allclose(h(np.array([-1.0, 1.0])), np.array([1j, -1j]) / C1[0.0], rtol=1e-12)
        np.testing.assert_allclose(H(np.array([-3.0, 3.0])), [1j, -1j])
        assert H.hermitian()

    def test_spec_invariants(self):
        with pytest.raises(ParameterError):
            DifferentialOperatorSpec((1, 0))
        with pytest.raises(ParameterError):
            DifferentialOperatorSpec(())
        assert DifferentialOperatorSpec((0,)).order == 0


class TestDerive:
    @pytest.mark.parametrize("p", [-5 / 3, -0.5, 0.0, 0.5, 1.0])
    def test_power_invariance_cauchy1(self, p):
        wv = cauchy_wavelet(1)
        w = derive_scale_filter(power_law_filter(p), wv)
        want = np.abs(SIGNED) ** p / complex(wv.mellin(p, numeric=True))
        np.testing.assert_allclose(w.on_scales(SIGNED), want, rtol=1e-3)

    def test_even_power_two(self):
        wv = cauchy_wavelet(2)
        w = derive_scale_filter(power_law_filter(2.0, C2[2.0]), wv)
        np.testing.assert_allclose(w.on_scales(SIGNED), SIGNED**2, rtol=1e-3)

    def test_identity_constant(self):
        w = derive_scale_filter(polynomial_filter([1]), cauchy_wavelet(1))
        np.testing.assert_allclose(w.on_scales(SIGNED), 1 / C1[0.0], rtol=1e-12)
        assert w.info["residual"] < 1e-3

    def test_zero_filter(self):
        w = derive_scale_filter(power_law_filter(1.0, 0.0), cauchy_wavelet(1))
        assert not np.any(w.on_scales(SIGNED))
        assert w.info["method"] == "zero"

    def test_sampled_recovers_known_filter(self):
        # W is computed by quadrature from w = s**2 exp(-s); the contour route must return that w
        wv = cauchy_wavelet(1)
        f = np.geomspace(1e-7, 1e5, 1600)
        Wp = scaling_convolve(lambda s: s**2 * np.exp(-s), wv.density, f)
        W = split_signs(symmetric(f), np.concatenate([Wp[::-1], Wp]))
        w = derive_scale_filter(W, wv)
        s = np.geomspace(0.01, 50, 40)
        ref = s**2 * np.exp(-s)
        assert np.max(np.abs(w.positive(s) - ref)) / ref.max() < 1e-4
        assert w.info["method"] == "contour"
        assert w.info["residual"] < 1e-6

    def test_sampled_log_gaussian_round_trip(self):
        wv = cauchy_wavelet(1)
        f = np.geomspace(1e-4, 1e4, 800)
        g = np.exp(-np.log(f) ** 2)
        W = split_signs(symmetric(f), np.concatenate([g[::-1], 1j * g]))
        w = derive_scale_filter(W, wv)
        assert w.info["residual"] < 1e-3
        with pytest.raises(ParameterError):
            w.on_scales([w.domain[1] * 10])

    def test_sampled_explicit_contour(self):
        wv = cauchy_wavelet(1)
        f = np.geomspace(1e-4, 1e4, 800)
        g = np.exp(-np.log(f) ** 2)
        W = split_signs(symmetric(f), np.concatenate([g[::-1], g]))
        w = derive_scale_filter(W, wv, MellinContour(0.5))
        assert w.info["contour"]["c"] == 0.5
        assert w.info["residual"] < 1e-3

    def test_sampled_not_decaying(self):
        f = np.geomspace(1e-3, 1e3, 400)
        W = split_signs(symmetric(f), np.ones(800))
        with pytest.raises(AdmissibilityError, match="W_plus"):
            derive_scale_filter(W, cauchy_wavelet(1))

    def test_cached_samples_match(self):
        w = derive_scale_filter(power_law_filter(0.5), cauchy_wavelet(1), sigma_grid=SIGMA)
        s, wp, wm = w.samples
        np.testing.assert_allclose(wp, w.positive(s), rtol=1e-12)
        np.testing.assert_allclose(wm, w.negative(s), rtol=1e-12)


class TestAdmissibility:
    def test_identity_admissible(self):
        rep = check_admissibility(polynomial_filter([1]), cauchy_wavelet(1))
        assert rep.admissible
        assert rep.as_dict()["failing"] == []

    def test_cubic_rejected(self):
        rep = check_admissibility(DifferentialOperatorSpec((0, 0, 0, 1)), cauchy_wavelet(1))
        assert not rep.admissible
        assert rep.failing == ["Psi_mellin(3)"]
        assert "Psi_mellin(3)" in rep.summary()

    def test_cubic_cauchy4(self):
        assert check_admissibility([0, 0, 0, 1], cauchy_wavelet(4)).admissible

    def test_sampled_clauses(self):
        f = np.geomspace(1e-4, 1e4, 800)
        g = np.exp(-np.log(f) ** 2)
        ok = check_admissibility(split_signs(symmetric(f), np.concatenate([g[::-1], g])), cauchy_wavelet(1))
        assert ok.admissible
        bad = check_admissibility(split_signs(symmetric(f), 1 / symmetric(f) ** 2), cauchy_wavelet(1))
        assert bad.failing == ["contour"]

    def test_soundness(self):
        # everything accepted derives without error
        wv = cauchy_wavelet(2)
        for W in (hilbert_frequency_filter(), power_law_filter(1.5), polynomial_filter([1, 2, 3])):
            assert check_admissibility(W, wv).admissible
            derive_scale_filter(W, wv)


class TestSpecs:
    def test_types(self):
        assert filter_from_spec({"type": "identity"}).kind == "identity"
        assert filter_from_spec({"type": "hilbert"}).kind == "hilbert"
        W = filter_from_spec({"type": "power", "p": 0.5, "gain": [2, 0]})
        assert W(np.array([4.0]))[0] == pytest.approx(4.0)
        P = filter_from_spec({"type": "polynomial", "coefficients": [1, [0, 1]]})
        assert P(np.array([1.0]))[0] == pytest.approx(1 + 1j * 2j * math.pi)

    def test_sampled_file(self, tmp_path):
        f = symmetric(np.geomspace(0.1, 10, 10))
        np.savetxt(tmp_path / "W.csv", np.column_stack([f, np.abs(f), np.zeros_like(f)]), delimiter=",")
        (tmp_path / "spec.json").write_text(json.dumps({"type": "sampled", "path": "W.csv"}))
        W = load_filter_spec(tmp_path / "spec.json")
        np.testing.assert_allclose(W(f), np.abs(f))

    @pytest.mark.parametrize("spec", [{}, {"type": "power"}, {"type": "nope"}, {"type": "polynomial",
                                                                                 "coefficients": [[1, 2, 3]]}])
    def test_bad(self, spec):
        with pytest.raises(ParseError):
            filter_from_spec(spec)

    def test_bad_json(self, tmp_path):
        (tmp_path / "x.json").write_text("{not json")
        with pytest.raises(ParseError):
            load_filter_spec(tmp_path / "x.json")


def test_scale_filter_csv(tmp_path):
    w = ScaleFilter.constant(2.5 - 1j)
    w.to_csv(tmp_path / "w.csv", SIGNED[:5])
    data = np.loadtxt(tmp_path / "w.csv", delimiter=",")
    np.testing.assert_array_equal(data[:, 0], SIGNED[:5])
    np.testing.assert_array_equal(data[:, 1:], [[2.5, -1.0]] * 5)
