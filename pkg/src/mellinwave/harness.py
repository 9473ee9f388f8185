"""Cross-checks of scale-domain filtering against frequency-domain filtering,
spectral-exponent estimation and a power-law denoiser.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .exceptions import NonPowerLawError, ParameterError
from .filters import FrequencyFilter, ScaleFilter, _jsonable
from .signal_core import Signal, signal_band
from .transform import Scaleogram, ScaleTimeGrid, apply_scale_filter, cwt_forward, effective_symbol
from .wavelets import Wavelet, parse_wavelet

__all__ = [
    "ComparisonReport",
    "ExponentEstimate",
    "apply_frequency_filter",
    "compare_paths",
    "relative_l2",
    "estimate_spectral_exponent",
    "denoise_power_law",
    "scale_power",
    "EDGE_TRIM",
]

EDGE_TRIM = 0.05


def _filter_bins(W: FrequencyFilter, nu: np.ndarray, positive_only: bool = False) -> np.ndarray:
    vals = np.asarray(W(nu), dtype=np.complex128)
    n = nu.size
    if n % 2 == 0:
        # the Nyquist bin stands for both +f_N and -f_N
        fN = abs(nu[n // 2])
        vals[n // 2] = 0.0 if positive_only else 0.5 * (W.positive(np.array([fN]))[0] + W.negative(np.array([fN]))[0])
    if positive_only:
        vals[nu < 0] = 0.0
    return vals


def apply_frequency_filter(signal: Signal, W: FrequencyFilter, positive_only: bool = False,
                           real_output: bool | None = None) -> Signal:
    """Multiply the spectrum by ``W`` bin by bin.

    The DC bin gets ``W.dc_gain``; the Nyquist bin (even lengths) gets the
    mean of the two branches.  With ``positive_only`` the filter acts on the
    positive-frequency part only (negative bins and Nyquist are zeroed), the
    counterpart of a positive-scale wavelet analysis.  ``real_output``
    follows the synthesis rule: mirror-and-add for ``positive_only``, real
    part otherwise.  By default a real input gives a real output when the
    result is real to round-off.
    """
    work = signal.padded()
    n = len(work)
    X = np.fft.fft(work.samples)
    nu = np.fft.fftfreq(n, work.dt)
    Y = _filter_bins(W, nu, positive_only) * X
    if real_output and positive_only:
        dc = Y[0]
        Y = Y + np.conj(np.roll(Y[::-1], 1))
        Y[0] = dc
    y = np.fft.ifft(Y)[: len(signal)]
    if real_output:
        y = y.real
    elif real_output is None and signal.is_real and not positive_only:
        if np.max(np.abs(y.imag), initial=0.0) <= 1e-12 * max(np.max(np.abs(y.real), initial=0.0), 1e-300):
            y = y.real
    return Signal(y, signal.sample_rate, signal.start_time)


def relative_l2(y, ref, trim: float = EDGE_TRIM) -> float:
    """``||y - ref|| / ||ref||`` over the interior (``trim`` cut from each end); 0 when both vanish."""
    y, ref = np.asarray(y), np.asarray(ref)
    k = int(trim * ref.size)
    s = slice(k, ref.size - k)
    num, den = np.linalg.norm(y[s] - ref[s]), np.linalg.norm(ref[s])
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return float(num / den)


@dataclass
class ComparisonReport:
    """Scale-domain versus frequency-domain filtering of one signal.

    ``relative_l2`` and ``max_error`` compare the two paths on the interior
    window; ``effective_agreement`` compares the scale-domain path with
    frequency filtering by the effective symbol (pure implementation check);
    ``symbol_deviation`` is ``max|W_eff - W| / max|W|`` over the signal band.
    """

    filter: dict
    grid: dict
    wavelet: str
    relative_l2: float
    max_error: float
    effective_agreement: float
    symbol_deviation: float
    band: tuple | None
    real_output: bool
    timing: dict = field(default_factory=dict)

    def as_dict(self, include_timing: bool = False) -> dict:
        d = {"filter": _jsonable(self.filter), "grid": _jsonable(self.grid), "wavelet": self.wavelet,
             "relative_l2": self.relative_l2, "max_error": self.max_error,
             "effective_agreement": self.effective_agreement, "symbol_deviation": self.symbol_deviation,
             "band": None if self.band is None else [float(b) for b in self.band],
             "real_output": self.real_output, "edge_trim": EDGE_TRIM}
        if include_timing:
            d["timing"] = dict(self.timing)
        return d


def _effective_filter(w: ScaleFilter, wavelet: Wavelet, grid: ScaleTimeGrid) -> FrequencyFilter:
    return FrequencyFilter(lambda f: effective_symbol(w, wavelet, grid, f),
                           lambda f: effective_symbol(w, wavelet, grid, -np.asarray(f, dtype=float)),
                           "effective", {}, None, None, w.dc_gain)


def compare_paths(signal: Signal, w: ScaleFilter, W: FrequencyFilter, wavelet: Wavelet, grid: ScaleTimeGrid,
                  real_output: bool | None = None, warn_tol: float = 1e-2, scaleogram: Scaleogram | None = None
                  ) -> ComparisonReport:
    """Filter ``signal`` both ways and report the discrepancies.

    ``real_output`` defaults to ``signal.is_real``.  On a positive-scale
    grid without ``real_output`` the reference acts on the positive-frequency
    part only.  Warns when the effective symbol misses ``W`` by more than
    ``warn_tol`` on the signal band.
    """
    if real_output is None:
        real_output = signal.is_real
    positive_only = not grid.include_negative_scales
    timing = {}
    t0 = time.perf_counter()
    sg = scaleogram if scaleogram is not None else cwt_forward(signal, wavelet, grid)
    t1 = time.perf_counter()
    yw = apply_scale_filter(sg, w, wavelet, grid, real_output=real_output).samples
    t2 = time.perf_counter()
    if real_output:
        yref = apply_frequency_filter(signal, W, real_output=True).samples
    else:
        yref = apply_frequency_filter(signal, W, positive_only=positive_only, real_output=False).samples
    t3 = time.perf_counter()
    Weff = _effective_filter(w, wavelet, grid)
    yeff = apply_frequency_filter(signal, Weff, positive_only=positive_only, real_output=real_output).samples
    t4 = time.perf_counter()
    timing = {"forward": t1 - t0, "synthesis": t2 - t1, "reference": t3 - t2, "effective": t4 - t3}

    k = int(EDGE_TRIM * len(signal))
    s = slice(k, len(signal) - k)
    err = relative_l2(yw, yref)
    max_err = float(np.max(np.abs(yw[s] - yref[s]), initial=0.0))
    agree = relative_l2(yw, yeff)

    lo, hi = signal_band(signal)
    band = None
    dev = 0.0
    if hi > 0:
        band = (lo, hi)
        n = len(signal.padded())
        nu = np.fft.fftfreq(n, signal.dt)
        sel = (np.abs(nu) >= lo) & (np.abs(nu) <= hi)
        if positive_only:
            sel &= nu > 0
        f = nu[sel]
        target = W(f)
        scale = np.max(np.abs(target), initial=0.0)
        diff = np.max(np.abs(effective_symbol(w, wavelet, grid, f) - target), initial=0.0)
        dev = float(diff / scale) if scale > 0 else float(diff)
        if dev > warn_tol:
            warnings.warn(f"effective symbol deviates by {dev:.3g} from the target on the signal band; "
                          "the scale grid may not cover the band", RuntimeWarning, stacklevel=2)
    filt = {"scale_filter": w.describe(), "frequency_filter": W.describe()}
    return ComparisonReport(filt, grid.describe(), wavelet.name, err, max_err, agree, dev, band,
                            bool(real_output), timing)


# ------------------------------------------------------------------ exponents


def scale_power(scaleogram: Scaleogram) -> tuple[np.ndarray, np.ndarray]:
    """Per positive scale, ``sigma * mean_k |x~|**2`` over the original samples.

    For a spectral density proportional to ``|f|**p`` this grows like
    ``sigma**p`` (white noise gives a flat profile).
    """
    sigma = scaleogram.grid.signed_scales
    pos = sigma > 0
    n = scaleogram.meta.get("length", scaleogram.coefficients.shape[1])
    c = scaleogram.coefficients[pos, :n]
    return sigma[pos], sigma[pos] * np.mean(np.abs(c) ** 2, axis=1)


@dataclass(frozen=True)
class ExponentEstimate:
    """Least-squares slope of log scale power against log scale.

    ``half_width`` is the 95% Student-t half-width from the residual
    variance; neighbouring scales are correlated, so it is optimistic.
    """

    slope: float
    half_width: float
    band: tuple
    intercept: float
    residual_rms: float
    n_scales: int

    def as_dict(self) -> dict:
        return {"slope": self.slope, "half_width": self.half_width, "band": list(self.band),
                "intercept": self.intercept, "residual_rms": self.residual_rms, "n_scales": self.n_scales}


def default_exponent_band(scaleogram: Scaleogram) -> tuple[float, float]:
    rate = scaleogram.sample_rate
    n = scaleogram.meta.get("n", scaleogram.coefficients.shape[1])
    fp = parse_wavelet(scaleogram.meta["wavelet"]).peak_frequency()
    g = scaleogram.grid
    lo = max(8 * rate / n / fp, g.sigma_min)
    hi = min(rate / 8 / fp, g.sigma_max)
    return lo, hi


def estimate_spectral_exponent(scaleogram: Scaleogram, band: tuple | None = None,
                               max_residual: float = 0.25) -> ExponentEstimate:
    """Spectral exponent ``p`` of the input from the scale-power profile.

    Parameters
    ----------
    scaleogram : Scaleogram
    band : (float, float), optional
        Scale interval used for the fit; it must span at least two octaves.
        Default: the scales whose wavelet peak frequency lies between 8
        fundamental frequencies and a quarter of the Nyquist frequency,
        clipped to the grid.
    max_residual : float
        Largest acceptable RMS residual of ``ln P`` about the line.

    Raises
    ------
    ParameterError
        Band narrower than two octaves or outside the grid.
    NonPowerLawError
        Residual above ``max_residual`` (the profile is not a power law).
    """
    sigma, P = scale_power(scaleogram)
    g = scaleogram.grid
    if band is None:
        band = default_exponent_band(scaleogram)
    lo, hi = float(band[0]), float(band[1])
    if not (lo > 0 and hi > lo):
        raise ParameterError(f"bad band {band}")
    if lo < g.sigma_min * (1 - 1e-12) or hi > g.sigma_max * (1 + 1e-12):
        raise ParameterError(f"band {band} lies outside the grid [{g.sigma_min:g}, {g.sigma_max:g}]")
    if math.log2(hi / lo) < 2 - 1e-12:
        raise ParameterError(f"band {band} spans fewer than two octaves")
    sel = (sigma >= lo) & (sigma <= hi)
    if np.count_nonzero(sel) < 3:
        raise ParameterError("fewer than three grid scales inside the band")
    if np.any(P[sel] <= 0):
        raise NonPowerLawError("scale power vanishes inside the band")
    x, y = np.log(sigma[sel]), np.log(P[sel])
    fit = stats.linregress(x, y)
    resid = y - (fit.intercept + fit.slope * x)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    if rms > max_residual:
        raise NonPowerLawError(
            f"scale power is not a power law on {band}: residual RMS {rms:.3g} exceeds {max_residual:g}")
    dof = x.size - 2
    hw = float(stats.t.ppf(0.975, dof) * fit.stderr) if dof > 0 else math.inf
    return ExponentEstimate(float(fit.slope), hw, (lo, hi), float(fit.intercept), rms, int(x.size))


# ------------------------------------------------------------------ denoising


def _fit_amplitudes(sigma, P, ps, pn, band):
    """Robust amplitudes for ``S = A_s sigma**ps`` and ``N = A_n sigma**pn``.

    ``A_n`` is the median of ``P / sigma**pn`` over the quarter of the band
    (in log scale) where noise dominates: the large-scale end when
    ``pn > ps``, the small-scale end otherwise.  ``A_s`` is the median of
    ``(P - N) / sigma**ps`` over scales where ``P > 2 N`` (zero if none).
    """
    lo, hi = band
    inb = (sigma >= lo) & (sigma <= hi) & (P > 0)
    if not np.any(inb):
        return 0.0, 0.0
    s, p = sigma[inb], P[inb]
    ls = np.log(s)
    if np.isfinite(pn):
        cut = ls.min() + 0.75 * (ls.max() - ls.min()) if pn > ps else ls.min() + 0.25 * (ls.max() - ls.min())
        end = ls >= cut if pn > ps else ls <= cut
        An = float(np.median(p[end] / s[end] ** pn))
        N = An * s ** pn
    else:
        An, N = 0.0, np.zeros_like(s)
    strong = p > 2 * N
    if not np.any(strong):
        return 0.0, An
    As = float(np.exp(np.median(np.log(p[strong] - N[strong]) - ps * ls[strong])))
    return As, An


def wiener_scale_filter(signal_exponent: float, noise_exponent: float, signal_amplitude: float,
                        noise_amplitude: float, wavelet: Wavelet) -> ScaleFilter:
    """``w(sigma) = S/(S+N) / M{Psi}(0)`` with ``S = A_s|sigma|**p_s`` and ``N = A_n|sigma|**p_n``."""
    c0 = wavelet.admissibility_constant
    ps, pn, As, An = float(signal_exponent), float(noise_exponent), float(signal_amplitude), float(noise_amplitude)

    def gain(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            S = As * s ** ps
            N = An * s ** pn if np.isfinite(pn) else np.zeros_like(s)
            g = np.where(S + N > 0, S / (S + N), 1.0 if not np.isfinite(pn) else 0.0)
        return (g / c0).astype(np.complex128)

    params = {"signal_exponent": ps, "noise_exponent": pn, "signal_amplitude": As, "noise_amplitude": An}
    return ScaleFilter(gain, gain, "wiener", params, None, None, 1.0)


def denoise_power_law(signal: Signal, signal_exponent: float, noise_exponent: float, wavelet: Wavelet,
                      grid: ScaleTimeGrid, signal_amplitude: float | None = None,
                      noise_amplitude: float | None = None, real_output: bool | None = None,
                      return_details: bool = False):
    """Scale-domain Wiener-style shrinkage for power-law signal and noise models.

    The per-scale weight ``S/(S+N)`` uses ``S = A_s sigma**p_s`` and
    ``N = A_n sigma**p_n``; amplitudes not given are estimated from the
    scale-power profile of the input (see :func:`_fit_amplitudes`) over the
    default exponent band.
    ``noise_exponent = -inf`` means no noise and reduces to reconstruction.
    The output DC equals the input DC.  For fixed amplitudes the map is
    linear in the input.

    Returns
    -------
    Signal, or (Signal, dict) with ``return_details``
    """
    ps, pn = float(signal_exponent), float(noise_exponent)
    if not math.isfinite(ps):
        raise ParameterError("signal exponent must be finite")
    if math.isnan(pn) or pn == math.inf:
        raise ParameterError("noise exponent must be finite or -inf")
    if real_output is None:
        real_output = signal.is_real
    sg = cwt_forward(signal, wavelet, grid)
    sigma, P = scale_power(sg)
    if signal_amplitude is None or (noise_amplitude is None and math.isfinite(pn)):
        As, An = _fit_amplitudes(sigma, P, ps, pn, default_exponent_band(sg))
        As = As if signal_amplitude is None else float(signal_amplitude)
        An = An if noise_amplitude is None else float(noise_amplitude)
    else:
        As, An = float(signal_amplitude), float(noise_amplitude or 0.0)
    if As < 0 or An < 0:
        raise ParameterError("amplitudes must be nonnegative")
    w = wiener_scale_filter(ps, pn, As, An, wavelet)
    vals = w.on_scales(grid.signed_scales)
    if not np.all(np.isfinite(vals)):
        raise ParameterError("denoising weight is not finite on the grid")
    out = apply_scale_filter(sg, w, wavelet, grid, real_output=real_output)
    if return_details:
        g = vals.real * wavelet.admissibility_constant
        return out, {"signal_amplitude": As, "noise_amplitude": An, "signal_exponent": ps,
                     "noise_exponent": pn, "gain_min": float(g.min()), "gain_max": float(g.max())}
    return out
