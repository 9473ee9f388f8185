"""scikit-learn style wrappers around the functional API.

Rows of ``X`` are independent signals sharing one sample rate.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ParameterError
from .filters import derive_scale_filter, filter_from_spec
from .harness import ExponentEstimate, denoise_power_law, estimate_spectral_exponent
from .signal_core import Signal, signal_band
from .transform import ScaleTimeGrid, Scaleogram, apply_scale_filter, cwt_forward, reconstruct
from .wavelets import parse_wavelet

__all__ = [
    "check_signals",
    "WaveletTransform",
    "ScaleFilterTransformer",
    "PowerLawDenoiser",
    "SpectralExponentEstimator",
]


def check_signals(X, allow_complex: bool = True, min_length: int = 2) -> np.ndarray:
    """Validate signal rows: 2-D (a 1-D input is one row), finite, at least ``min_length`` samples.

    Complex input is kept complex when allowed (``sklearn.utils.check_array``
    rejects complex data, hence this helper).
    """
    X = np.asarray(X)
    if X.dtype == object or not (np.issubdtype(X.dtype, np.number) or X.dtype == bool):
        raise ParameterError("signals must be numeric")
    if np.iscomplexobj(X):
        if not allow_complex:
            raise ParameterError("complex signals are not supported here")
        X = X.astype(np.complex128)
    else:
        X = X.astype(np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ParameterError(f"expected a 1-D or 2-D array, got {X.ndim} dimensions")
    if X.shape[1] < min_length:
        raise ParameterError(f"signals need at least {min_length} samples, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ParameterError("signals contain NaN or infinite values")
    return X


class _GridMixin:
    def _fit_grid(self, X):
        self.wavelet_ = parse_wavelet(self.wavelet)
        if self.sigma_min is not None:
            if self.octaves is None:
                raise ParameterError("sigma_min needs octaves")
            self.grid_ = ScaleTimeGrid(self.sigma_min, self.octaves, self.voices, self.include_negative_scales,
                                       self.sample_rate)
        else:
            lo, hi = np.inf, 0.0
            for row in X:
                a, b = signal_band(Signal(row, self.sample_rate))
                if b > 0:
                    lo, hi = min(lo, a), max(hi, b)
            if hi == 0:
                n = 1 << (X.shape[1] - 1).bit_length()
                lo, hi = self.sample_rate / n, self.sample_rate / 2
            self.grid_ = ScaleTimeGrid.covering(self.wavelet_, lo, hi, self.voices, self.octaves,
                                                moments=self._moments(),
                                                include_negative_scales=self.include_negative_scales,
                                                sample_rate=self.sample_rate)
        self.n_features_in_ = X.shape[1]
        return self

    def _moments(self):
        return (0.0,)

    def _check_width(self, X):
        if X.shape[1] != self.n_features_in_:
            raise ParameterError(f"fitted on signals of length {self.n_features_in_}, got {X.shape[1]}")


class WaveletTransform(_GridMixin, TransformerMixin, BaseEstimator):
    """Forward transform to scaleogram arrays of shape ``(n_signals, n_scales, n_padded)``.

    Without ``sigma_min`` the grid is chosen in :meth:`fit` to cover the band
    occupied by the training signals.
    """

    def __init__(self, wavelet="cauchy:1", voices=16, octaves=None, sigma_min=None,
                 include_negative_scales=False, sample_rate=1.0):
        self.wavelet = wavelet
        self.voices = voices
        self.octaves = octaves
        self.sigma_min = sigma_min
        self.include_negative_scales = include_negative_scales
        self.sample_rate = sample_rate

    def fit(self, X, y=None):
        return self._fit_grid(check_signals(X))

    def scaleograms(self, X) -> list[Scaleogram]:
        check_is_fitted(self, "grid_")
        X = check_signals(X)
        self._check_width(X)
        return [cwt_forward(Signal(row, self.sample_rate), self.wavelet_, self.grid_) for row in X]

    def transform(self, X):
        return np.stack([s.coefficients for s in self.scaleograms(X)])

    def inverse_transform(self, C, real_output=False):
        """Reconstruct signals from coefficient arrays produced by :meth:`transform`.

        The DC component is not represented in the coefficients and comes
        back as zero.
        """
        check_is_fitted(self, "grid_")
        C = np.asarray(C)
        if C.ndim == 2:
            C = C[None]
        out = []
        for c in C:
            meta = {"length": self.n_features_in_, "n": c.shape[1], "sample_rate": float(self.sample_rate),
                    "start_time": 0.0, "dc": 0.0, "real_source": bool(real_output), "wavelet": self.wavelet_.name}
            out.append(reconstruct(Scaleogram(c, self.grid_, meta), self.wavelet_, real_output=real_output).samples)
        return np.stack(out)


class ScaleFilterTransformer(_GridMixin, TransformerMixin, BaseEstimator):
    """Filter signals in the scale domain.

    ``filter`` is a filter spec (``{"type": "power", "p": 0.5}`` and so on);
    the matching scale filter is derived in :meth:`fit`.
    """

    def __init__(self, filter=None, wavelet="cauchy:1", voices=16, octaves=None, sigma_min=None,
                 include_negative_scales=False, sample_rate=1.0, real_output=True):
        self.filter = filter
        self.wavelet = wavelet
        self.voices = voices
        self.octaves = octaves
        self.sigma_min = sigma_min
        self.include_negative_scales = include_negative_scales
        self.sample_rate = sample_rate
        self.real_output = real_output

    def _spec(self):
        return self.filter if self.filter is not None else {"type": "identity"}

    def _moments(self):
        W = filter_from_spec(self._spec())
        if W.symbolic:
            return tuple(sorted({t.power for t in W.positive_terms + W.negative_terms if t.coef != 0})) or (0.0,)
        return (0.0,)

    def fit(self, X, y=None):
        X = check_signals(X)
        self._fit_grid(X)
        self.frequency_filter_ = filter_from_spec(self._spec())
        self.scale_filter_ = derive_scale_filter(self.frequency_filter_, self.wavelet_)
        return self

    def transform(self, X):
        check_is_fitted(self, "scale_filter_")
        X = check_signals(X)
        self._check_width(X)
        rows = []
        for row in X:
            sig = Signal(row, self.sample_rate)
            sg = cwt_forward(sig, self.wavelet_, self.grid_)
            real = self.real_output and sig.is_real
            rows.append(apply_scale_filter(sg, self.scale_filter_, self.wavelet_, real_output=real).samples)
        return np.stack(rows)


class PowerLawDenoiser(_GridMixin, TransformerMixin, BaseEstimator):
    """Scale-domain shrinkage with power-law signal and noise models.

    Amplitudes are re-estimated per signal unless given.
    """

    def __init__(self, signal_exponent=-2.0, noise_exponent=0.0, signal_amplitude=None, noise_amplitude=None,
                 wavelet="cauchy:1", voices=16, octaves=None, sigma_min=None, sample_rate=1.0):
        self.signal_exponent = signal_exponent
        self.noise_exponent = noise_exponent
        self.signal_amplitude = signal_amplitude
        self.noise_amplitude = noise_amplitude
        self.wavelet = wavelet
        self.voices = voices
        self.octaves = octaves
        self.sigma_min = sigma_min
        self.sample_rate = sample_rate

    include_negative_scales = False

    def fit(self, X, y=None):
        X = check_signals(X)
        n = 1 << (X.shape[1] - 1).bit_length()
        self.wavelet_ = parse_wavelet(self.wavelet)
        if self.sigma_min is None:
            # the whole resolvable band, since noise occupies all of it
            self.grid_ = ScaleTimeGrid.covering(self.wavelet_, self.sample_rate / n, self.sample_rate / 2,
                                                self.voices, self.octaves, tol=1e-3, sample_rate=self.sample_rate)
            self.n_features_in_ = X.shape[1]
            return self
        return self._fit_grid(X)

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X = check_signals(X)
        self._check_width(X)
        return np.stack([denoise_power_law(Signal(row, self.sample_rate), self.signal_exponent,
                                           self.noise_exponent, self.wavelet_, self.grid_,
                                           self.signal_amplitude, self.noise_amplitude).samples for row in X])


class SpectralExponentEstimator(_GridMixin, BaseEstimator):
    """Spectral exponent from the scale-power profile.

    :meth:`fit` stores the per-signal estimates and their mean in
    ``slope_``; :meth:`predict` returns one slope per row.
    """

    def __init__(self, wavelet="cauchy:1", voices=16, octaves=None, sigma_min=None, sample_rate=1.0,
                 band=None, max_residual=0.25):
        self.wavelet = wavelet
        self.voices = voices
        self.octaves = octaves
        self.sigma_min = sigma_min
        self.sample_rate = sample_rate
        self.band = band
        self.max_residual = max_residual

    include_negative_scales = False

    def fit(self, X, y=None):
        X = check_signals(X)
        n = 1 << (X.shape[1] - 1).bit_length()
        self.wavelet_ = parse_wavelet(self.wavelet)
        if self.sigma_min is None:
            self.grid_ = ScaleTimeGrid.covering(self.wavelet_, self.sample_rate / n, self.sample_rate / 2,
                                                self.voices, self.octaves, tol=1e-3, sample_rate=self.sample_rate)
            self.n_features_in_ = X.shape[1]
        else:
            self._fit_grid(X)
        self.estimates_ = self._estimate(X)
        self.slope_ = float(np.mean([e.slope for e in self.estimates_]))
        return self

    def _estimate(self, X) -> list[ExponentEstimate]:
        return [estimate_spectral_exponent(cwt_forward(Signal(row, self.sample_rate), self.wavelet_, self.grid_),
                                           self.band, self.max_residual) for row in X]

    def predict(self, X):
        check_is_fitted(self, "grid_")
        X = check_signals(X)
        self._check_width(X)
        return np.array([e.slope for e in self._estimate(X)])
