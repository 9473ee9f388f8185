"""Sampled signals, Fourier transforms and signal file I/O.

Fourier convention: forward kernel ``exp(-2j*pi*f*t)``, inverse
``exp(+2j*pi*f*t)``, frequency ``f`` in cycles per unit time.  Discrete
spectra are scaled by the sample spacing so that they approximate the
continuous transform and satisfy ``sum|x|^2 dt == sum|X|^2 df``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DomainError, LengthError, ParameterError, ParseError

__all__ = [
    "Signal",
    "Spectrum",
    "next_pow2",
    "fft",
    "ifft",
    "analytic_part",
    "generate_test_signal",
    "load_signal",
    "save_signal",
    "signal_band",
]


def next_pow2(n: int) -> int:
    return 1 << max(1, int(n - 1).bit_length())


def _is_pow2(n: int) -> bool:
    return n >= 2 and n & (n - 1) == 0


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled, real or complex time series.

    Parameters
    ----------
    samples : array_like
        Sample values. Real input is stored as float64, anything complex as
        complex128.
    sample_rate : float
        Samples per unit time.
    start_time : float
        Time of the first sample.
    """

    samples: np.ndarray
    sample_rate: float = 1.0
    start_time: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.samples)
        if x.ndim != 1:
            raise ParameterError(f"signal samples must be 1-D, got shape {x.shape}")
        if x.size < 2:
            raise LengthError("a signal needs at least 2 samples")
        x = x.astype(np.complex128 if np.iscomplexobj(x) else np.float64)
        if not np.all(np.isfinite(x)):
            raise ParameterError("signal samples must be finite")
        rate = float(self.sample_rate)
        if not (rate > 0 and math.isfinite(rate)):
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", _frozen(x))
        object.__setattr__(self, "sample_rate", rate)
        object.__setattr__(self, "start_time", float(self.start_time))

    def __len__(self):
        return self.samples.size

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self)) / self.sample_rate

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.samples)

    def with_samples(self, samples) -> "Signal":
        return Signal(samples, self.sample_rate, self.start_time)

    def padded(self) -> "Signal":
        """Zero-pad to the next power of two (no-op when already one)."""
        n = len(self)
        if _is_pow2(n):
            return self
        out = np.zeros(next_pow2(n), dtype=self.samples.dtype)
        out[:n] = self.samples
        return self.with_samples(out)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Two-sided discrete spectrum in numpy FFT bin order.

    ``original_length`` is the length of the signal before padding and is
    used by :func:`ifft` to trim.
    """

    bins: np.ndarray
    frequencies: np.ndarray
    sample_rate: float
    start_time: float = 0.0
    original_length: int | None = None
    real_source: bool = False

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=np.complex128)
        f = np.asarray(self.frequencies, dtype=np.float64)
        if b.shape != f.shape or b.ndim != 1:
            raise ParameterError("bins and frequency axis must be 1-D of equal length")
        object.__setattr__(self, "bins", _frozen(b))
        object.__setattr__(self, "frequencies", _frozen(f))
        if self.original_length is None:
            object.__setattr__(self, "original_length", b.size)

    @property
    def source_length(self) -> int:
        return self.bins.size

    @property
    def df(self) -> float:
        return self.sample_rate / self.bins.size


def fft(signal: Signal, pad: bool = False) -> Spectrum:
    """Forward transform approximating the continuous Fourier integral.

    Raises
    ------
    LengthError
        If the length is not a power of two and ``pad`` is false.
    """
    n = len(signal)
    if not _is_pow2(n):
        if not pad:
            raise LengthError(f"length {n} is not a power of two; pass pad=True")
        work = signal.padded()
    else:
        work = signal
    bins = np.fft.fft(work.samples) * work.dt
    freqs = np.fft.fftfreq(len(work), work.dt)
    return Spectrum(bins, freqs, work.sample_rate, work.start_time, n, work.is_real)


def ifft(spectrum: Spectrum) -> Signal:
    """Inverse of :func:`fft`, trimmed to the original length.

    Sources that were real come back real when the bins are Hermitian.
    """
    x = np.fft.ifft(spectrum.bins) * spectrum.sample_rate
    x = x[: spectrum.original_length]
    if spectrum.real_source and _hermitian(spectrum.bins):
        x = x.real
    return Signal(x, spectrum.sample_rate, spectrum.start_time)


def _hermitian(bins: np.ndarray, rtol: float = 1e-12) -> bool:
    mirror = np.conj(np.roll(bins[::-1], 1))
    scale = np.max(np.abs(bins)) if bins.size else 0.0
    return bool(np.max(np.abs(bins - mirror), initial=0.0) <= rtol * max(scale, 1e-300))


def analytic_part(signal: Signal) -> Signal:
    """Discrete analytic signal of a real input.

    Positive-frequency bins are doubled, negative ones zeroed; DC and Nyquist
    keep unit weight (half the weight of the doubled bins), which keeps
    ``Re(output) == input`` exactly.  A complex input is accepted only when it
    is already analytic, in which case it is returned unchanged; this makes
    the operation a projection.
    """
    n = len(signal)
    x = signal.padded().samples
    m = x.size
    X = np.fft.fft(x)
    if not signal.is_real:
        neg = X[m // 2 + 1 :]
        total = np.linalg.norm(X)
        if total > 0 and np.linalg.norm(neg) > 1e-12 * total:
            raise DomainError("analytic_part expects a real signal (complex input has negative frequencies)")
        return signal
    h = np.zeros(m)
    h[0] = 1.0
    h[1 : m // 2] = 2.0
    h[m // 2] = 1.0
    return Signal(np.fft.ifft(X * h)[:n], signal.sample_rate, signal.start_time)


def signal_band(signal: Signal, rel: float = 1e-6) -> tuple[float, float]:
    """Smallest and largest ``|f| > 0`` whose bin magnitude exceeds ``rel * max``."""
    spec = fft(signal, pad=True)
    mag = np.abs(spec.bins)
    f = np.abs(spec.frequencies)
    keep = (f > 0) & (mag > rel * mag.max(initial=0.0))
    if not np.any(keep):
        return (0.0, 0.0)
    return float(f[keep].min()), float(f[keep].max())


def _band_project(x: np.ndarray, rate: float, lo: float, hi: float) -> np.ndarray:
    X = np.fft.fft(x)
    f = np.abs(np.fft.fftfreq(x.size, 1.0 / rate))
    X[(f < lo) | (f > hi)] = 0.0
    return np.fft.ifft(X).real


def generate_test_signal(kind: str, n: int = 4096, sample_rate: float = None, **params) -> Signal:
    """Deterministic synthetic test signals.

    Kinds and their parameters:

    ``impulse``
        ``position`` (sample index, default 0), ``amplitude``.
    ``multitone``
        ``frequencies`` (list), optional ``amplitudes`` and ``phases``.
    ``chirp``
        Linear sweep ``f0 -> f1`` under a Tukey taper, projected onto the band
        ``band=(lo, hi)`` (default ``(0.75*f0, 1.25*f1)``) so it is exactly
        band-limited on the periodic grid.
    ``power_law_noise``
        Gaussian noise whose one-sided spectral density is ``|f|**exponent``
        on ``band`` (default: lowest nonzero bin to Nyquist) and zero
        elsewhere; ``seed`` is required, ``rms`` defaults to 1.

    ``sample_rate`` defaults to ``n``, i.e. a unit-length window where
    frequencies read as cycles per window.
    """
    if n < 2:
        raise ParameterError("n must be at least 2")
    rate = float(n if sample_rate is None else sample_rate)
    if rate <= 0:
        raise ParameterError("sample_rate must be positive")
    t = np.arange(n) / rate
    nyquist = rate / 2
    if kind == "impulse":
        pos = int(params.get("position", 0))
        if not 0 <= pos < n:
            raise ParameterError("impulse position out of range")
        x = np.zeros(n)
        x[pos] = float(params.get("amplitude", 1.0))
    elif kind == "multitone":
        freqs = np.atleast_1d(np.asarray(params.get("frequencies", ()), dtype=float))
        if freqs.size == 0 or np.any(freqs < 0) or np.any(freqs > nyquist):
            raise ParameterError("multitone needs frequencies in [0, Nyquist]")
        amps = np.broadcast_to(np.asarray(params.get("amplitudes", 1.0), dtype=float), freqs.shape)
        phases = np.broadcast_to(np.asarray(params.get("phases", 0.0), dtype=float), freqs.shape)
        x = np.sum(amps[:, None] * np.cos(2 * np.pi * freqs[:, None] * t + phases[:, None]), axis=0)
    elif kind == "chirp":
        from scipy.signal.windows import tukey

        f0 = float(params.get("f0", n / 128))
        f1 = float(params.get("f1", n / 32))
        if not (0 < f0 < f1 <= nyquist):
            raise ParameterError("chirp needs 0 < f0 < f1 <= Nyquist")
        lo, hi = params.get("band", (0.75 * f0, min(1.25 * f1, nyquist)))
        T = n / rate
        phase = 2 * np.pi * (f0 * t + 0.5 * (f1 - f0) * t**2 / T)
        x = tukey(n, float(params.get("taper", 0.25))) * np.cos(phase)
        x = _band_project(x, rate, lo, hi) * float(params.get("amplitude", 1.0))
    elif kind == "power_law_noise":
        if "seed" not in params:
            raise ParameterError("power_law_noise needs a seed")
        p = float(params.get("exponent", 0.0))
        if not math.isfinite(p):
            raise ParameterError("power-law exponent must be finite")
        rng = np.random.default_rng(int(params["seed"]))
        lo, hi = params.get("band", (rate / n, nyquist))
        f = np.fft.rfftfreq(n, 1.0 / rate)
        inband = (f >= lo) & (f <= hi) & (f > 0)
        if not np.any(inband):
            raise ParameterError("power_law_noise band contains no frequency bins")
        amp = np.zeros_like(f)
        amp[inband] = f[inband] ** (p / 2)
        coef = amp * (rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size))
        if n % 2 == 0:
            coef[-1] = coef[-1].real * np.sqrt(2)
        x = np.fft.irfft(coef, n)
        x *= float(params.get("rms", 1.0)) / np.sqrt(np.mean(x**2))
    else:
        raise ParameterError(f"unknown test signal kind {kind!r}")
    return Signal(x, rate)


# ---------------------------------------------------------------- file I/O


def save_signal(signal: Signal, path, format: str = "csv") -> None:
    """Write a signal as ``csv`` (time,value[,imag]) or raw ``f64le``."""
    path = Path(path)
    if format == "csv":
        cols = [signal.times]
        if signal.is_real:
            cols.append(signal.samples)
        else:
            cols += [signal.samples.real, signal.samples.imag]
        np.savetxt(path, np.column_stack(cols), fmt="%.17g", delimiter=",")
    elif format == "f64le":
        if not signal.is_real:
            raise DomainError("f64le stores real samples only")
        path.write_bytes(signal.samples.astype("<f8").tobytes())
    else:
        raise ParameterError(f"unknown signal format {format!r}")


def load_signal(path, format: str = "csv", sample_rate: float | None = None) -> Signal:
    """Read a signal written by :func:`save_signal` or by hand.

    CSV rows are ``time,value`` or ``time,re,im``; a single ``value`` column
    needs ``sample_rate``.  Lines starting with ``#`` and blank lines are
    skipped.  Times must be uniformly spaced.
    """
    path = Path(path)
    if format == "f64le":
        raw = path.read_bytes()
        if len(raw) == 0 or len(raw) % 8:
            raise ParseError(f"{path}: size {len(raw)} is not a positive multiple of 8 bytes")
        return Signal(np.frombuffer(raw, dtype="<f8"), 1.0 if sample_rate is None else sample_rate)
    if format != "csv":
        raise ParameterError(f"unknown signal format {format!r}")

    rows, lines = [], []
    ncol = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split(",")
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise ParseError(f"cannot parse {s!r} as numbers", lineno) from None
            if ncol is None:
                ncol = len(vals)
                if ncol not in (1, 2, 3):
                    raise ParseError(f"expected 1 to 3 columns, got {ncol}", lineno)
            elif len(vals) != ncol:
                raise ParseError(f"expected {ncol} columns, got {len(vals)}", lineno)
            rows.append(vals)
            lines.append(lineno)
    if len(rows) < 2:
        raise ParseError(f"{path}: need at least 2 samples, found {len(rows)}")
    data = np.array(rows)
    if ncol == 1:
        if sample_rate is None:
            raise ParseError("single-column CSV needs an explicit sample rate")
        return Signal(data[:, 0], sample_rate)
    t = data[:, 0]
    steps = np.diff(t)
    dt = (t[-1] - t[0]) / (t.size - 1)
    if dt <= 0:
        raise ParseError("time column must be increasing", lines[1])
    bad = np.flatnonzero(np.abs(steps - dt) > 1e-9 * max(abs(dt), np.max(np.abs(t))))
    if bad.size:
        k = bad[0] + 1
        raise ParseError(
            f"non-uniform time column: step {float(steps[bad[0]])!r} differs from mean step {float(dt)!r}",
            lines[k],
        )
    values = data[:, 1] if ncol == 2 else data[:, 1] + 1j * data[:, 2]
    rate = 1.0 / dt if sample_rate is None else sample_rate
    return Signal(values, rate, t[0])
